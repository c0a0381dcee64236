#include "zsh/codes.hpp"
#include "zsh/error.hpp"
#include "zsh/featurize.hpp"
#include "zsh/train.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace zsh;

namespace {

std::vector<int> random_bits(Index l, std::mt19937_64& rng)
{
    std::bernoulli_distribution coin;
    std::vector<int> bits(static_cast<std::size_t>(l));
    for (auto& b : bits) b = coin(rng) ? 1 : 0;
    return bits;
}

BinaryCode pack(const std::vector<int>& bits)
{
    std::vector<bool> v(bits.begin(), bits.end());
    return BinaryCode::from_bits(v);
}

ZshModel random_model(Index d, Index m, Index l, std::mt19937_64& rng)
{
    ZshModel model;
    model.anchors.anchors = zsh::testing::gaussian(d, m, rng);
    model.anchors.delta = 2.0;
    model.P = zsh::testing::gaussian(m, l, rng);
    model.W = zsh::testing::gaussian(l, 2, rng);
    model.R = Matrix::Identity(2, 2);
    model.hyper.code_length = l;
    return model;
}

}

TEST(Packing, LayoutAndPadding)
{
    EXPECT_EQ(words_for_bits(1), 1);
    EXPECT_EQ(words_for_bits(64), 1);
    EXPECT_EQ(words_for_bits(65), 2);
    EXPECT_EQ(words_for_bits(130), 3);

    Vector s(3);
    s << 1.0, -1.0, 0.0;
    const auto c = BinaryCode::from_signs(s);
    ASSERT_EQ(c.words().size(), 1u);
    EXPECT_EQ(c.words()[0], 0b101u);
    EXPECT_TRUE(c.to_signs() == (Vector(3) << 1.0, -1.0, 1.0).finished());
    EXPECT_THROW(BinaryCode::from_words(3, {0b1000}), ValidationError);
    EXPECT_THROW(BinaryCode::from_words(65, {0}), ValidationError);
}

TEST(Hamming, IdentityAndComplement)
{
    std::mt19937_64 rng(1);
    for (Index l : {1, 16, 63, 64, 65, 130}) {
        const auto a = pack(random_bits(l, rng));
        EXPECT_EQ(hamming(a, a), 0);
        EXPECT_EQ(hamming(a, a.complement()), l);
    }
    EXPECT_THROW(hamming(BinaryCode(8), BinaryCode(9)), ValidationError);
}

TEST(Hamming, MatchesNaiveLoop)
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto a = random_bits(130, rng), b = random_bits(130, rng);
        ASSERT_EQ(hamming(pack(a), pack(b)), oracle::naive_hamming(a, b));
    }
}

TEST(Encode, ZeroProjectionGivesAllOnes)
{
    std::mt19937_64 rng(3);
    auto model = random_model(3, 4, 10, rng);
    model.P.setZero();
    const auto c = encode(zsh::testing::gaussian(3, 1, rng).col(0), model);
    for (Index j = 0; j < 10; ++j) EXPECT_TRUE(c.bit(j));
}

TEST(Encode, NegatingPFlipsNonZeroBits)
{
    std::mt19937_64 rng(4);
    auto model = random_model(3, 5, 12, rng);
    const Vector x = zsh::testing::gaussian(3, 1, rng).col(0);
    const auto a = encode(x, model);
    model.P = -model.P;
    const auto b = encode(x, model);
    EXPECT_EQ(hamming(a, b), 12);
}

TEST(Encode, DatabaseEqualsPerItemAndRoundTrips)
{
    std::mt19937_64 rng(5);
    const auto model = random_model(4, 6, 70, rng);
    const Matrix V = zsh::testing::gaussian(4, 9, rng);
    std::vector<std::string> ids;
    for (int i = 0; i < 9; ++i) ids.push_back("x" + std::to_string(i));
    const FeatureMatrix X(V, ids);
    const auto db = encode_database(X, model);
    ASSERT_EQ(db.size(), 9);
    EXPECT_EQ(db.code_length(), 70);
    for (Index i = 0; i < 9; ++i) EXPECT_EQ(db.code(i), encode(V.col(i), model));
    EXPECT_FALSE(db.has_labels());
    EXPECT_THROW(db.labels(), ValidationError);

    std::stringstream buf;
    write_codes(db, buf);
    const auto back = read_codes(buf);
    EXPECT_EQ(back.words(), db.words());
    EXPECT_EQ(back.ids(), db.ids());
    EXPECT_EQ(back.code_length(), 70);
}

TEST(Encode, LabelsRoundTrip)
{
    std::mt19937_64 rng(6);
    const auto model = random_model(2, 3, 8, rng);
    const FeatureMatrix X(zsh::testing::gaussian(2, 3, rng), {"a", "b", "c"});
    const auto db = encode_database(X, model, LabelList::multi({{"sky", "sea"}, {}, {"sea"}}));
    std::stringstream buf;
    write_codes(db, buf);
    const auto back = read_codes(buf);
    ASSERT_TRUE(back.has_labels());
    EXPECT_TRUE(back.labels().is_multi_label());
    EXPECT_EQ(back.labels().tags(0), (std::vector<std::string>{"sky", "sea"}));
    EXPECT_TRUE(back.labels().tags(1).empty());
}

TEST(Encode, DimensionMismatch)
{
    std::mt19937_64 rng(7);
    const auto model = random_model(3, 4, 8, rng);
    const FeatureMatrix X(zsh::testing::gaussian(2, 3, rng), {"a", "b", "c"});
    EXPECT_THROW(encode_database(X, model), ValidationError);
}

TEST(Encode, TrainingItemsAgreeWithCodes)
{
    const auto inst = zsh::testing::clustered_instance(4, 25, 6, 4, 8);
    TrainConfig config;
    config.anchors = 40;
    config.hyper.code_length = 16;
    config.hyper.seed = 8;
    const auto result = train(inst.data.features.values(), inst.Y, config);
    const auto db = encode_database(inst.data.features, result.model);
    const Matrix phi = kernel_map_batch(inst.data.features.values(), result.model.anchors);
    const Matrix F = result.model.P.transpose() * phi;

    std::mt19937_64 rng(9);
    const Matrix random = zsh::testing::random_signs(16, db.size(), rng);
    double agree = 0.0, agree_random = 0.0;
    for (Index j = 0; j < db.size(); ++j) {
        const Vector s = db.code(j).to_signs();
        for (Index b = 0; b < 16; ++b) {
            EXPECT_EQ(s(b), sgn(F(b, j)));
            agree += s(b) == result.model.B(b, j) ? 1.0 : 0.0;
            agree_random += random(b, j) == result.model.B(b, j) ? 1.0 : 0.0;
        }
    }
    EXPECT_GT(agree, agree_random);
}
