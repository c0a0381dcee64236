#include "zsh/error.hpp"
#include "zsh/evalkit.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <numeric>
#include <set>
#include <sstream>

using namespace zsh;

namespace {

BinaryCode code_of(const std::string& bits)
{
    std::vector<bool> v;
    for (char c : bits) v.push_back(c == '1');
    return BinaryCode::from_bits(v);
}

CodeDatabase database(const std::vector<std::string>& bits, const std::vector<std::string>& labels)
{
    std::vector<BinaryCode> codes;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        codes.push_back(code_of(bits[i]));
        ids.push_back("d" + std::to_string(i));
    }
    return CodeDatabase(codes, ids, LabelList::single(labels));
}

RankedRetrieval ranking_of(const std::vector<Index>& order)
{
    RankedRetrieval r;
    for (auto i : order) r.results.push_back({i, 0});
    return r;
}

}

TEST(Search, FullRankingWhenKExceedsN)
{
    const auto db = database({"00", "11", "01"}, {"a", "b", "c"});
    const auto r = search_topk(code_of("00"), db, 10);
    ASSERT_EQ(r.results.size(), 3u);
    EXPECT_EQ(r.results[0], (Neighbor{0, 0}));
    EXPECT_EQ(r.results[1], (Neighbor{2, 1}));
    EXPECT_EQ(r.results[2], (Neighbor{1, 2}));
}

TEST(Search, TiesKeepDatabaseOrder)
{
    const auto db = database({"101", "101", "101", "101"}, {"a", "a", "a", "a"});
    const auto r = search_topk(code_of("000"), db, 3);
    ASSERT_EQ(r.results.size(), 3u);
    for (Index i = 0; i < 3; ++i) EXPECT_EQ(r.results[static_cast<std::size_t>(i)].index, i);
}

TEST(Search, ExcludeDropsPosition)
{
    const auto db = database({"00", "00", "11"}, {"a", "a", "b"});
    const auto r = search_topk(code_of("00"), db, 3, 0);
    ASSERT_EQ(r.results.size(), 2u);
    EXPECT_EQ(r.results[0].index, 1);
}

TEST(Search, MatchesFullSortOracle)
{
    std::mt19937_64 rng(1);
    std::bernoulli_distribution coin;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<int>> raw(50, std::vector<int>(12));
        std::vector<BinaryCode> codes;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            // Few distinct bits so that ties are common.
            for (std::size_t b = 0; b < 12; ++b) raw[i][b] = b < 4 && coin(rng) ? 1 : 0;
            std::vector<bool> v(raw[i].begin(), raw[i].end());
            codes.push_back(BinaryCode::from_bits(v));
            ids.push_back(std::to_string(i));
        }
        const CodeDatabase db(codes, ids);
        std::vector<int> q(12, 0);
        for (std::size_t b = 0; b < 4; ++b) q[b] = coin(rng) ? 1 : 0;
        const auto expected = oracle::full_sort(q, raw);
        const auto got = search_topk(BinaryCode::from_bits(std::vector<bool>(q.begin(), q.end())), db, 50);
        ASSERT_EQ(got.results.size(), expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            EXPECT_EQ(got.results[i].index, expected[i].index);
            EXPECT_EQ(got.results[i].distance, expected[i].distance);
        }
        for (int r : {0, 1, 3, 12}) {
            std::vector<Index> filtered;
            for (const auto& e : expected)
                if (e.distance <= r) filtered.push_back(e.index);
            std::sort(filtered.begin(), filtered.end());
            EXPECT_EQ(search_radius(BinaryCode::from_bits(std::vector<bool>(q.begin(), q.end())), db, r),
                      filtered);
        }
    }
}

TEST(Search, RadiusExtremes)
{
    const auto db = database({"0000", "0000", "1111", "0001"}, {"a", "b", "c", "d"});
    EXPECT_EQ(search_radius(code_of("0000"), db, 4), (std::vector<Index>{0, 1, 2, 3}));
    EXPECT_EQ(search_radius(code_of("0000"), db, 0), (std::vector<Index>{0, 1}));
}

TEST(Map, TextbookCases)
{
    EXPECT_DOUBLE_EQ(average_precision_at_k(ranking_of({0, 1, 2}), {0, 1, 2}, 3), 1.0);
    EXPECT_DOUBLE_EQ(average_precision_at_k(ranking_of({5, 7, 9}), {7}, 3), 0.5);
    EXPECT_DOUBLE_EQ(average_precision_at_k(ranking_of({5, 7, 9}), {}, 3), 0.0);
    // Denominator variants: relevant item 4 lies beyond K.
    EXPECT_DOUBLE_EQ(average_precision_at_k(ranking_of({1, 2, 3}), {1, 4}, 3), 0.5);
    EXPECT_DOUBLE_EQ(
        average_precision_at_k(ranking_of({1, 2, 3}), {1, 4}, 3, ApDenominator::retrieved), 1.0);
    EXPECT_THROW(map_at_k({}, {}, 3), ValidationError);
}

TEST(Precision, Cases)
{
    EXPECT_DOUBLE_EQ(precision_of({1, 2}, {1, 2}), 1.0);
    EXPECT_DOUBLE_EQ(precision_of({}, {1, 2}), 0.0);
    EXPECT_DOUBLE_EQ(precision_of({1, 2, 3, 4, 5}, {2, 4, 9}), 0.4);
}

TEST(MapRelated, Cases)
{
    RelatedPairs pairs;
    pairs.add("cat", "dog");
    const auto labels = LabelList::single({"dog", "car", "dog", "dog"});
    EXPECT_DOUBLE_EQ(ap_related(ranking_of({0, 1, 2}), "cat", labels, pairs, 3), 13.0 / 18.0);
    EXPECT_DOUBLE_EQ(ap_related(ranking_of({0, 2, 3}), "cat", labels, pairs, 3), 1.0);
    EXPECT_DOUBLE_EQ(ap_related(ranking_of({1}), "cat", labels, pairs, 3), 0.0);
    // Same category never counts.
    EXPECT_DOUBLE_EQ(ap_related(ranking_of({0, 2}), "dog", labels, pairs, 3), 0.0);
}

TEST(MapRelated, WarnsOnUnmentionedLabel)
{
    RelatedPairs pairs;
    pairs.add("cat", "dog");
    const auto labels = LabelList::single({"dog"});
    std::vector<RankedRetrieval> rankings{ranking_of({0})};
    std::vector<std::string> qlabels{"zebra"};
    std::vector<std::string> warnings;
    const auto v = map_related(rankings, qlabels, labels, pairs, 3, &warnings);
    EXPECT_EQ(v.mean, 0.0);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("zebra"), std::string::npos);
}

TEST(PrecisionRelated, Cases)
{
    RelatedPairs pairs;
    pairs.add("cat", "dog");
    std::vector<std::string> db_labels(10, "car");
    db_labels[1] = db_labels[4] = db_labels[7] = "dog";
    const auto labels = LabelList::single(db_labels);
    std::vector<std::vector<Index>> retrieved{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, {}};
    std::vector<std::string> qlabels{"cat", "cat"};
    const auto v = precision_related(retrieved, qlabels, labels, pairs);
    EXPECT_DOUBLE_EQ(v.per_query[0], 0.3);
    EXPECT_DOUBLE_EQ(v.per_query[1], 0.0);
}

TEST(Metrics, RandomInstancesMatchDirectFormulas)
{
    std::mt19937_64 rng(2);
    const std::vector<std::string> names{"a", "b", "c", "d"};
    RelatedPairs pairs;
    pairs.add("a", "b");
    pairs.add("c", "d");
    pairs.add("a", "c");
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_int_distribution<Index> size(1, 12), kdist(1, 15);
    std::bernoulli_distribution coin;
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = size(rng), K = kdist(rng);
        std::vector<std::string> labels;
        std::vector<std::vector<int>> raw;
        std::vector<BinaryCode> codes;
        for (Index i = 0; i < n; ++i) {
            labels.push_back(names[static_cast<std::size_t>(pick(rng))]);
            std::vector<int> bits(6);
            for (auto& b : bits) b = coin(rng) ? 1 : 0;
            raw.push_back(bits);
            codes.push_back(BinaryCode::from_bits(std::vector<bool>(bits.begin(), bits.end())));
        }
        std::vector<std::string> ids;
        for (Index i = 0; i < n; ++i) ids.push_back("d" + std::to_string(i));
        const CodeDatabase db(codes, ids, LabelList::single(labels));
        std::vector<int> q(6);
        for (auto& b : q) b = coin(rng) ? 1 : 0;
        const std::string qlabel = names[static_cast<std::size_t>(pick(rng))];
        const CodeDatabase queries({BinaryCode::from_bits(std::vector<bool>(q.begin(), q.end()))},
                                   {"q"}, LabelList::single({qlabel}));

        EvalOptions opts;
        opts.K = K;
        opts.radius = 2;
        opts.related = &pairs;
        const auto report = evaluate(queries, db, opts);

        const auto full = oracle::full_sort(q, raw);
        std::vector<Index> order, within;
        std::vector<bool> related_flags;
        std::set<Index> relevant, related;
        for (Index i = 0; i < n; ++i) {
            if (labels[static_cast<std::size_t>(i)] == qlabel) relevant.insert(i);
            if (labels[static_cast<std::size_t>(i)] != qlabel &&
                pairs.related(labels[static_cast<std::size_t>(i)], qlabel))
                related.insert(i);
        }
        for (const auto& item : full) {
            order.push_back(item.index);
            related_flags.push_back(related.count(item.index) != 0);
            if (item.distance <= 2) within.push_back(item.index);
        }
        EXPECT_NEAR(report.map_at_k, oracle::ap_direct(order, relevant, K), 1e-12);
        EXPECT_NEAR(report.precision_at_radius, oracle::precision_direct(within, relevant), 1e-12);
        EXPECT_NEAR(*report.map_related, oracle::map_related_direct(related_flags, K), 1e-12);
        EXPECT_NEAR(*report.precision_related, oracle::precision_related_direct(within, related),
                    1e-12);
    }
}

TEST(Evaluate, HandcraftedSixItems)
{
    const auto db = database({"0000", "0001", "0011", "0111", "1111", "0000"},
                             {"A", "B", "A", "C", "A", "B"});
    const CodeDatabase queries({code_of("0000")}, {"q"}, LabelList::single({"A"}));
    RelatedPairs pairs;
    pairs.add("A", "B");
    EvalOptions opts;
    opts.K = 6;
    opts.radius = 2;
    opts.related = &pairs;
    const auto report = evaluate(queries, db, opts);
    // Ranking d0 d5 d1 d2 d3 d4, relevant at ranks 1, 4, 6.
    EXPECT_NEAR(report.map_at_k, (1.0 + 2.0 / 4.0 + 3.0 / 6.0) / 3.0, 1e-15);
    EXPECT_NEAR(report.precision_at_radius, 2.0 / 4.0, 1e-15);
    EXPECT_NEAR(*report.map_related, (0.0 + 1.0 / 2 + 2.0 / 3 + 2.0 / 4 + 2.0 / 5 + 2.0 / 6) / 6.0,
                1e-15);
    EXPECT_NEAR(*report.precision_related, 0.5, 1e-15);

    std::ostringstream out;
    write_report_jsonl(report, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(nlohmann::json::parse(line)["query"], "q");
    std::getline(in, line);
    const auto summary = nlohmann::json::parse(line);
    EXPECT_TRUE(summary["summary"].get<bool>());
    EXPECT_NEAR(summary["map"].get<double>(), 2.0 / 3.0, 1e-15);
}

TEST(Evaluate, QueryExcludedFromItsOwnDatabaseEntry)
{
    const auto db = database({"00", "00", "11"}, {"a", "a", "b"});
    const auto queries = db.select({0});
    EvalOptions opts;
    opts.K = 3;
    const auto report = evaluate(queries, db, opts);
    EXPECT_EQ(report.queries[0].relevant, 1);
    EXPECT_DOUBLE_EQ(report.map_at_k, 1.0);
}

TEST(Evaluate, SharedTagRelevance)
{
    const auto q = LabelList::multi({{"sky", "sea", "sun"}});
    const auto d = LabelList::multi({{"sky", "sea"}, {"sky"}, {"sun", "sea", "x"}, {}});
    const auto rel = shared_tags_relevance(q, d, 2);
    EXPECT_EQ(rel[0], (RelevantSet{0, 2}));
}

TEST(Evaluate, UnlabelledDatabaseRejected)
{
    const CodeDatabase db({code_of("01")}, {"x"});
    const CodeDatabase queries({code_of("01")}, {"q"}, LabelList::single({"a"}));
    EXPECT_THROW(evaluate(queries, db, EvalOptions{}), ValidationError);
}

TEST(RandomBaseline, ClosedFormMatchesSimulation)
{
    std::mt19937_64 rng(3);
    const Index N = 30, R = 7, K = 10;
    std::vector<Index> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::set<Index> relevant;
    for (Index i = 0; i < R; ++i) relevant.insert(i);
    double sum = 0.0;
    const int trials = 200000;
    for (int t = 0; t < trials; ++t) {
        std::shuffle(order.begin(), order.end(), rng);
        sum += oracle::ap_direct(order, relevant, K);
    }
    EXPECT_NEAR(sum / trials, oracle::random_ranking_ap(R, N, K), 2e-3);
}
