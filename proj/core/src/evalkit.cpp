#include "zsh/evalkit.hpp"

#include "zsh/error.hpp"
#include "zsh/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

namespace zsh {
namespace {

void check_query(const BinaryCode& query, const CodeDatabase& db)
{
    if (query.length() != db.code_length()) {
        throw ValidationError("query code has " + std::to_string(query.length()) +
                              " bits, database codes have " + std::to_string(db.code_length()));
    }
}

double mean_of(const std::vector<double>& v)
{
    double sum = 0.0;
    for (double x : v) sum += x;
    return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

bool contains(const RelevantSet& set, Index item)
{
    return std::binary_search(set.begin(), set.end(), item);
}

const std::string& single_label(const LabelList& labels, Index item)
{
    return labels.label(static_cast<std::size_t>(item));
}

void note_unmentioned(const std::string& label, const RelatedPairs& related,
                      std::set<std::string>& reported, std::vector<std::string>* warnings)
{
    if (warnings && !related.mentions(label) && reported.insert(label).second) {
        warnings->push_back("query label '" + label + "' appears in no related pair");
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

RankedRetrieval search_topk(const BinaryCode& query, const CodeDatabase& db, Index K,
                            std::optional<Index> exclude)
{
    if (K < 1) throw ValidationError("search: K must be >= 1");
    check_query(query, db);
    const Index n = db.size();
    const auto l = static_cast<std::size_t>(db.code_length());

    // Counting sort on distance keeps equal distances in database order.
    std::vector<int> dist(static_cast<std::size_t>(n));
    std::vector<Index> count(l + 2, 0);
    for (Index i = 0; i < n; ++i) {
        if (exclude && *exclude == i) continue;
        const int d = hamming_words(query.words(), db.code_words(i));
        dist[static_cast<std::size_t>(i)] = d;
        ++count[static_cast<std::size_t>(d) + 1];
    }
    for (std::size_t d = 1; d < count.size(); ++d) count[d] += count[d - 1];
    const Index total = count.back();
    std::vector<Neighbor> order(static_cast<std::size_t>(total));
    for (Index i = 0; i < n; ++i) {
        if (exclude && *exclude == i) continue;
        const int d = dist[static_cast<std::size_t>(i)];
        order[static_cast<std::size_t>(count[static_cast<std::size_t>(d)]++)] = {i, d};
    }
    if (total > K) order.resize(static_cast<std::size_t>(K));

    RankedRetrieval out;
    out.results = std::move(order);
    return out;
}

std::vector<Index> search_radius(const BinaryCode& query, const CodeDatabase& db, int r,
                                 std::optional<Index> exclude)
{
    check_query(query, db);
    std::vector<Index> out;
    for (Index i = 0; i < db.size(); ++i) {
        if (exclude && *exclude == i) continue;
        if (hamming_words(query.words(), db.code_words(i)) <= r) out.push_back(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Relevance
// ---------------------------------------------------------------------------

std::vector<RelevantSet> same_label_relevance(const LabelList& query_labels,
                                              const LabelList& db_labels)
{
    std::map<std::string, RelevantSet> by_label;
    for (std::size_t i = 0; i < db_labels.size(); ++i) {
        by_label[db_labels.label(i)].push_back(static_cast<Index>(i));
    }
    std::vector<RelevantSet> out(query_labels.size());
    for (std::size_t q = 0; q < query_labels.size(); ++q) {
        auto it = by_label.find(query_labels.label(q));
        if (it != by_label.end()) out[q] = it->second;
    }
    return out;
}

std::vector<RelevantSet> shared_tags_relevance(const LabelList& query_labels,
                                               const LabelList& db_labels, int min_shared)
{
    if (min_shared < 1) throw ValidationError("shared-tag relevance needs min_shared >= 1");
    std::vector<std::set<std::string>> db_tags(db_labels.size());
    for (std::size_t i = 0; i < db_labels.size(); ++i) {
        db_tags[i].insert(db_labels.tags(i).begin(), db_labels.tags(i).end());
    }
    std::vector<RelevantSet> out(query_labels.size());
    for (std::size_t q = 0; q < query_labels.size(); ++q) {
        const std::set<std::string> qt(query_labels.tags(q).begin(), query_labels.tags(q).end());
        for (std::size_t i = 0; i < db_tags.size(); ++i) {
            int shared = 0;
            for (const auto& t : qt) shared += static_cast<int>(db_tags[i].count(t));
            if (shared >= min_shared) out[q].push_back(static_cast<Index>(i));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

std::optional<ApDenominator> parse_ap_denominator(std::string_view name)
{
    if (name == "relevant") return ApDenominator::relevant;
    if (name == "retrieved") return ApDenominator::retrieved;
    return std::nullopt;
}

double average_precision_at_k(const RankedRetrieval& ranking, const RelevantSet& relevant, Index K,
                              ApDenominator denominator)
{
    if (K < 1) throw ValidationError("AP@K: K must be >= 1");
    const auto depth = std::min<std::size_t>(ranking.results.size(), static_cast<std::size_t>(K));
    double sum = 0.0;
    Index hits = 0;
    for (std::size_t i = 0; i < depth; ++i) {
        if (contains(relevant, ranking.results[i].index)) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    const Index denom = denominator == ApDenominator::relevant
                            ? std::min(static_cast<Index>(relevant.size()), K)
                            : hits;
    return denom == 0 ? 0.0 : sum / static_cast<double>(denom);
}

MetricValue map_at_k(std::span<const RankedRetrieval> rankings,
                     std::span<const RelevantSet> relevance, Index K, ApDenominator denominator)
{
    if (rankings.empty()) throw ValidationError("MAP@K: empty query set");
    if (rankings.size() != relevance.size()) {
        throw ValidationError("MAP@K: rankings and relevance sets differ in count");
    }
    MetricValue v;
    v.per_query.resize(rankings.size());
    for (std::size_t q = 0; q < rankings.size(); ++q) {
        v.per_query[q] = average_precision_at_k(rankings[q], relevance[q], K, denominator);
    }
    v.mean = mean_of(v.per_query);
    return v;
}

double precision_of(const std::vector<Index>& retrieved, const RelevantSet& relevant)
{
    if (retrieved.empty()) return 0.0;
    Index hits = 0;
    for (auto i : retrieved) hits += contains(relevant, i) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(retrieved.size());
}

MetricValue precision_at_radius(std::span<const std::vector<Index>> retrieved,
                                std::span<const RelevantSet> relevance)
{
    if (retrieved.size() != relevance.size()) {
        throw ValidationError("precision: retrieval and relevance sets differ in count");
    }
    MetricValue v;
    v.per_query.resize(retrieved.size());
    for (std::size_t q = 0; q < retrieved.size(); ++q) {
        v.per_query[q] = precision_of(retrieved[q], relevance[q]);
    }
    v.mean = mean_of(v.per_query);
    return v;
}

double ap_related(const RankedRetrieval& ranking, const std::string& query_label,
                  const LabelList& db_labels, const RelatedPairs& related, Index K)
{
    if (K < 1) throw ValidationError("MAP_related: K must be >= 1");
    const auto depth = std::min<std::size_t>(ranking.results.size(), static_cast<std::size_t>(K));
    if (depth == 0) return 0.0;
    double sum = 0.0;
    Index n_related = 0;
    for (std::size_t i = 0; i < depth; ++i) {
        if (related.related(query_label, single_label(db_labels, ranking.results[i].index))) {
            ++n_related;
        }
        sum += static_cast<double>(n_related) / static_cast<double>(i + 1);
    }
    return sum / static_cast<double>(depth);
}

MetricValue map_related(std::span<const RankedRetrieval> rankings,
                        std::span<const std::string> query_labels, const LabelList& db_labels,
                        const RelatedPairs& related, Index K, std::vector<std::string>* warnings)
{
    if (rankings.empty()) throw ValidationError("MAP_related: empty query set");
    if (rankings.size() != query_labels.size()) {
        throw ValidationError("MAP_related: rankings and query labels differ in count");
    }
    std::set<std::string> reported;
    MetricValue v;
    v.per_query.resize(rankings.size());
    for (std::size_t q = 0; q < rankings.size(); ++q) {
        note_unmentioned(query_labels[q], related, reported, warnings);
        v.per_query[q] = ap_related(rankings[q], query_labels[q], db_labels, related, K);
    }
    v.mean = mean_of(v.per_query);
    return v;
}

MetricValue precision_related(std::span<const std::vector<Index>> retrieved,
                              std::span<const std::string> query_labels,
                              const LabelList& db_labels, const RelatedPairs& related,
                              std::vector<std::string>* warnings)
{
    if (retrieved.size() != query_labels.size()) {
        throw ValidationError("Precision_related: retrievals and query labels differ in count");
    }
    std::set<std::string> reported;
    MetricValue v;
    v.per_query.resize(retrieved.size());
    for (std::size_t q = 0; q < retrieved.size(); ++q) {
        note_unmentioned(query_labels[q], related, reported, warnings);
        const auto& r = retrieved[q];
        if (r.empty()) continue;
        Index n_related = 0;
        for (auto i : r) n_related += related.related(query_labels[q], single_label(db_labels, i)) ? 1 : 0;
        v.per_query[q] = static_cast<double>(n_related) / static_cast<double>(r.size());
    }
    v.mean = mean_of(v.per_query);
    return v;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

void EvalOptions::validate() const
{
    if (K < 1) throw ValidationError("K must be >= 1");
    if (radius < 0) throw ValidationError("radius must be >= 0");
    if (min_shared_tags < 1) throw ValidationError("min shared tags must be >= 1");
}

MetricReport evaluate(const CodeDatabase& queries, const CodeDatabase& db, const EvalOptions& options)
{
    options.validate();
    if (queries.size() == 0) throw ValidationError("evaluation needs at least one query");
    if (queries.code_length() != db.code_length()) {
        throw ValidationError("query codes have " + std::to_string(queries.code_length()) +
                              " bits, database codes have " + std::to_string(db.code_length()));
    }
    if (options.radius > db.code_length()) {
        throw ValidationError("radius exceeds the code length");
    }
    const LabelList& qlabels = queries.labels();
    const LabelList& dlabels = db.labels();

    std::vector<RelevantSet> relevance =
        options.relevance == RelevanceMode::same_label
            ? same_label_relevance(qlabels, dlabels)
            : shared_tags_relevance(qlabels, dlabels, options.min_shared_tags);

    std::unordered_map<std::string, Index> position;
    for (Index i = 0; i < db.size(); ++i) position.emplace(db.ids()[static_cast<std::size_t>(i)], i);

    const auto nq = static_cast<std::size_t>(queries.size());
    std::vector<RankedRetrieval> rankings(nq);
    std::vector<std::vector<Index>> within(nq);
    parallel_for(nq, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            const auto code = queries.code(static_cast<Index>(q));
            std::optional<Index> self;
            if (auto it = position.find(queries.ids()[q]); it != position.end()) self = it->second;
            rankings[q] = search_topk(code, db, options.K, self);
            rankings[q].query_id = queries.ids()[q];
            within[q] = search_radius(code, db, options.radius, self);
            // A query that matches its own database entry must not count it
            // as relevant either.
            if (self) {
                auto& rel = relevance[q];
                rel.erase(std::remove(rel.begin(), rel.end(), *self), rel.end());
            }
        }
    });

    MetricReport report;
    report.K = options.K;
    report.radius = options.radius;
    const auto map = map_at_k(rankings, relevance, options.K, options.ap_denominator);
    const auto prec = precision_at_radius(within, relevance);
    report.map_at_k = map.mean;
    report.precision_at_radius = prec.mean;

    std::vector<std::string> label_of(nq);
    for (std::size_t q = 0; q < nq; ++q) {
        const auto& tags = qlabels.tags(q);
        for (std::size_t t = 0; t < tags.size(); ++t) label_of[q] += (t ? "," : "") + tags[t];
    }

    std::optional<MetricValue> mrel;
    std::optional<MetricValue> prel;
    if (options.related) {
        if (qlabels.is_multi_label() || dlabels.is_multi_label()) {
            throw ValidationError("related-category metrics need single-label queries and database");
        }
        mrel = map_related(rankings, label_of, dlabels, *options.related, options.K, &report.warnings);
        prel = precision_related(within, label_of, dlabels, *options.related);
        report.map_related = mrel->mean;
        report.precision_related = prel->mean;
    }

    report.queries.resize(nq);
    for (std::size_t q = 0; q < nq; ++q) {
        auto& r = report.queries[q];
        r.query_id = queries.ids()[q];
        r.label = label_of[q];
        r.ap = map.per_query[q];
        r.precision = prec.per_query[q];
        r.retrieved_at_radius = static_cast<Index>(within[q].size());
        r.relevant = static_cast<Index>(relevance[q].size());
        if (mrel) r.ap_related = mrel->per_query[q];
        if (prel) r.precision_related = prel->per_query[q];
    }
    return report;
}

void write_report_jsonl(const MetricReport& report, std::ostream& out)
{
    using nlohmann::ordered_json;
    for (const auto& q : report.queries) {
        ordered_json j;
        j["query"] = q.query_id;
        j["label"] = q.label;
        j["ap"] = q.ap;
        j["precision"] = q.precision;
        j["retrieved"] = q.retrieved_at_radius;
        j["relevant"] = q.relevant;
        if (q.ap_related) j["ap_related"] = *q.ap_related;
        if (q.precision_related) j["precision_related"] = *q.precision_related;
        out << j.dump() << '\n';
    }
    ordered_json s;
    s["summary"] = true;
    s["queries"] = report.queries.size();
    s["K"] = report.K;
    s["radius"] = report.radius;
    s["map"] = report.map_at_k;
    s["precision"] = report.precision_at_radius;
    if (report.map_related) s["map_related"] = *report.map_related;
    if (report.precision_related) s["precision_related"] = *report.precision_related;
    if (!report.warnings.empty()) s["warnings"] = report.warnings;
    out << s.dump() << '\n';
}

} // namespace zsh
