#include "zsh/data_io.hpp"
#include "zsh/error.hpp"
#include "zsh/featurize.hpp"
#include "zsh/model.hpp"

#include <Eigen/QR>

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <fstream>
#include <sstream>

using namespace zsh;
using zsh::testing::TempDir;

namespace {

LoadError::Reason load_reason(const std::function<void()>& f)
{
    try {
        f();
    } catch (const LoadError& e) {
        return e.reason();
    }
    ADD_FAILURE() << "no LoadError thrown";
    return LoadError::Reason::open_failed;
}

}

TEST(Features, CsvRows)
{
    std::istringstream in("a,1.0,2.0\nb,3.0,4.0\n");
    const auto X = read_features_csv(in);
    EXPECT_EQ(X.n(), 2);
    EXPECT_EQ(X.d(), 2);
    EXPECT_EQ(X.item_ids(), (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(X.values()(0, 1), 3.0);
    EXPECT_EQ(X.values()(1, 0), 2.0);
}

TEST(Features, CsvRaggedRowNamesRow)
{
    std::istringstream in("a,1.0,2.0\nb,3.0,4.0,5.0\n");
    try {
        read_features_csv(in);
        FAIL();
    } catch (const LoadError& e) {
        EXPECT_EQ(e.reason(), LoadError::Reason::dimension_mismatch);
        EXPECT_EQ(e.row(), 2u);
    }
}

TEST(Features, CsvRejectsGarbage)
{
    std::istringstream bad("a,1.0,x\n");
    EXPECT_EQ(load_reason([&] { read_features_csv(bad); }), LoadError::Reason::parse);
    std::istringstream nan("a,1.0,nan\n");
    EXPECT_EQ(load_reason([&] { read_features_csv(nan); }), LoadError::Reason::non_finite);
    std::istringstream dup("a,1\na,2\n");
    EXPECT_EQ(load_reason([&] { read_features_csv(dup); }), LoadError::Reason::duplicate);
    std::istringstream empty("");
    EXPECT_EQ(load_reason([&] { read_features_csv(empty); }), LoadError::Reason::empty);
}

TEST(Features, CsvToleratesCrlf)
{
    std::istringstream in("a,1.5\r\nb,2.5\r\n");
    const auto X = read_features_csv(in);
    EXPECT_EQ(X.item_ids()[1], "b");
    EXPECT_EQ(X.values()(0, 1), 2.5);
}

TEST(Features, BinaryRoundTripIsBitExact)
{
    std::mt19937_64 rng(3);
    Matrix V = zsh::testing::gaussian(5, 7, rng);
    // Values representable in f32 survive unchanged.
    V = V.cast<float>().cast<double>();
    std::vector<std::string> ids;
    for (int i = 0; i < 7; ++i) ids.push_back("item" + std::to_string(i));
    const FeatureMatrix X(V, ids);

    TempDir dir;
    save_features(X, dir.file("x.bin"), FeatureFormat::binary);
    const auto back = load_features(dir.file("x.bin"), FeatureFormat::binary);
    EXPECT_EQ(back.item_ids(), ids);
    EXPECT_TRUE(back.values() == V);
}

TEST(Features, BinaryTruncated)
{
    FeatureMatrix X(Matrix::Ones(3, 4), {"a", "b", "c", "d"});
    std::ostringstream out;
    write_features_binary(X, out);
    const std::string bytes = out.str();
    std::istringstream cut(bytes.substr(0, 30));
    EXPECT_EQ(load_reason([&] { read_features_binary(cut); }), LoadError::Reason::truncated);
}

TEST(Features, FormatFromExtension)
{
    EXPECT_EQ(feature_format_for("x.csv"), FeatureFormat::csv);
    EXPECT_EQ(feature_format_for("x.bin"), FeatureFormat::binary);
}

TEST(Embeddings, NormalisedOnLoad)
{
    std::istringstream in("2 2\ncat 3.0 4.0\nbird 1 0\n");
    const auto table = read_embeddings(in);
    EXPECT_EQ(table.dim(), 2);
    EXPECT_NEAR(table.at("cat")(0), 0.6, 1e-15);
    EXPECT_NEAR(table.at("cat")(1), 0.8, 1e-15);
}

TEST(Embeddings, ZeroVectorRejected)
{
    std::istringstream in("1 2\ndog 0.0 0.0\n");
    EXPECT_EQ(load_reason([&] { read_embeddings(in); }), LoadError::Reason::zero_vector);
}

TEST(Embeddings, RaggedRejected)
{
    std::istringstream in("2 2\ncat 1 2\ndog 1 2 3\n");
    EXPECT_EQ(load_reason([&] { read_embeddings(in); }), LoadError::Reason::dimension_mismatch);
}

TEST(Embeddings, DuplicateRejected)
{
    std::istringstream in("2 2\ncat 1 2\ncat 1 3\n");
    EXPECT_EQ(load_reason([&] { read_embeddings(in); }), LoadError::Reason::duplicate);
}

TEST(Embeddings, SaveLoadRoundTrip)
{
    std::mt19937_64 rng(5);
    const auto table = zsh::testing::random_embeddings({"a", "b", "c"}, 4, rng);
    TempDir dir;
    save_embeddings(table, dir.file("e.txt"));
    const auto back = load_embeddings(dir.file("e.txt"));
    for (const auto& [label, v] : table.entries()) {
        EXPECT_TRUE(back.at(label).isApprox(v, 1e-15));
    }
}

TEST(AssembleY, LookupSemantics)
{
    LabelEmbeddingTable t(2);
    t.insert("cat", Vector::Unit(2, 0));
    t.insert("dog", Vector::Unit(2, 1));
    const auto Y = assemble_Y(LabelList::single({"cat", "cat", "dog"}), t);
    ASSERT_EQ(Y.cols(), 3);
    EXPECT_TRUE(Y.col(0) == t.at("cat"));
    EXPECT_TRUE(Y.col(1) == t.at("cat"));
    EXPECT_TRUE(Y.col(2) == t.at("dog"));
}

TEST(AssembleY, SingleColumn)
{
    LabelEmbeddingTable t(3);
    const Vector u = Vector::Unit(3, 2);
    t.insert("only", u);
    const auto Y = assemble_Y(LabelList::single({"only"}), t);
    EXPECT_TRUE(Y == Matrix(u));
}

TEST(AssembleY, MissingLabelNamed)
{
    LabelEmbeddingTable t(2);
    t.insert("cat", Vector::Unit(2, 0));
    try {
        assemble_Y(LabelList::single({"cat", "zebra"}), t);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("zebra"), std::string::npos);
    }
}

TEST(Cosine, Cases)
{
    Vector a(2), b(2);
    a << 1, 0;
    b << 0, 1;
    EXPECT_EQ(cosine_similarity(a, b), 0.0);
    EXPECT_EQ(cosine_similarity(a, a), 1.0);
    a << 0.6, 0.8;
    b << 0.8, 0.6;
    EXPECT_NEAR(cosine_similarity(a, b), 0.6 * 0.8 + 0.8 * 0.6, 1e-15);
    EXPECT_NEAR(cosine_similarity(a, b), 0.96, 1e-15);
    EXPECT_THROW(cosine_similarity(a, Vector::Zero(2)), ValidationError);
}

TEST(Labels, SingleAndMulti)
{
    std::istringstream single("cat\ndog\n");
    const auto l = read_labels(single);
    EXPECT_EQ(l.size(), 2u);
    EXPECT_EQ(l.label(1), "dog");

    std::istringstream multi("sky,sea\n\nsea\n");
    const auto m = read_labels(multi, true);
    ASSERT_EQ(m.size(), 3u);
    EXPECT_EQ(m.tags(0), (std::vector<std::string>{"sky", "sea"}));
    EXPECT_TRUE(m.tags(1).empty());
}

TEST(Split, SectionsAndOverlap)
{
    std::istringstream in("# comment\n[seen]\na\nb\n\n[unseen]\nc\n");
    const auto s = read_split(in);
    EXPECT_EQ(s.seen, (std::set<std::string>{"a", "b"}));
    EXPECT_EQ(s.unseen, (std::set<std::string>{"c"}));

    SplitSpec bad;
    bad.seen = {"a"};
    bad.unseen = {"a"};
    EXPECT_THROW(bad.validate(), ProtocolError);
}

TEST(RelatedPairs, Symmetric)
{
    std::istringstream in("cat\tdog\n");
    const auto r = read_related_pairs(in);
    EXPECT_TRUE(r.related("dog", "cat"));
    EXPECT_TRUE(r.related("cat", "dog"));
    EXPECT_FALSE(r.related("cat", "car"));
    EXPECT_TRUE(r.mentions("dog"));
}

namespace {

ZshModel small_model(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const Matrix X = zsh::testing::gaussian(3, 10, rng);
    ZshModel m;
    m.anchors = sample_anchors(X, 4, seed);
    m.P = zsh::testing::gaussian(4, 6, rng);
    m.W = zsh::testing::gaussian(6, 3, rng);
    Eigen::HouseholderQR<Matrix> qr(zsh::testing::gaussian(3, 3, rng));
    m.R = qr.householderQ();
    m.hyper.code_length = 6;
    m.hyper.seed = seed;
    return m;
}

}

TEST(ModelFile, SaveLoadSaveIsIdempotent)
{
    TempDir dir;
    const auto m = small_model(9);
    save_model(m, dir.file("a.zshm"));
    const auto back = load_model(dir.file("a.zshm"));
    save_model(back, dir.file("b.zshm"));
    EXPECT_EQ(zsh::testing::read_file(dir.file("a.zshm")),
              zsh::testing::read_file(dir.file("b.zshm")));
    EXPECT_TRUE(back.P == m.P);
    EXPECT_TRUE(back.R == m.R);
    EXPECT_LE(back.orthogonality_residual(), 1e-8);
}

TEST(ModelFile, TruncatedRejected)
{
    TempDir dir;
    save_model(small_model(2), dir.file("a.zshm"));
    const auto bytes = zsh::testing::read_file(dir.file("a.zshm"));
    zsh::testing::write_file(dir.file("cut.zshm"), bytes.substr(0, bytes.size() / 2));
    EXPECT_EQ(load_reason([&] { load_model(dir.file("cut.zshm")); }),
              LoadError::Reason::truncated);
}

TEST(ModelFile, WrongMagicRejected)
{
    TempDir dir;
    zsh::testing::write_file(dir.file("x.zshm"), "NOPE0000000000000000");
    EXPECT_EQ(load_reason([&] { load_model(dir.file("x.zshm")); }), LoadError::Reason::bad_header);
}
