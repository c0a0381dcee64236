#pragma once

#include "zsh/codes.hpp"
#include "zsh/data_io.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zsh {

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

struct Neighbor
{
    Index index = 0;  // position in the database
    int distance = 0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Results sorted by (distance, database index).
struct RankedRetrieval
{
    std::string query_id;
    std::vector<Neighbor> results;
};

/// Exact top-K linear scan. `exclude` drops one database position (the query
/// itself when it is drawn from the database).
RankedRetrieval search_topk(const BinaryCode& query, const CodeDatabase& db, Index K,
                            std::optional<Index> exclude = std::nullopt);

/// Database positions within Hamming distance r, ascending.
std::vector<Index> search_radius(const BinaryCode& query, const CodeDatabase& db, int r,
                                 std::optional<Index> exclude = std::nullopt);

// ---------------------------------------------------------------------------
// Relevance
// ---------------------------------------------------------------------------

/// Relevant database positions of one query, sorted ascending.
using RelevantSet = std::vector<Index>;

/// Single-label ground truth: same label as the query.
std::vector<RelevantSet> same_label_relevance(const LabelList& query_labels,
                                              const LabelList& db_labels);

/// Multi-label ground truth: at least `min_shared` tags in common.
std::vector<RelevantSet> shared_tags_relevance(const LabelList& query_labels,
                                               const LabelList& db_labels, int min_shared = 2);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Denominator of AP@K: min(|relevant|, K) or the number of relevant items
/// retrieved in the top K.
enum class ApDenominator { relevant, retrieved };

std::optional<ApDenominator> parse_ap_denominator(std::string_view name);

struct MetricValue
{
    double mean = 0.0;
    std::vector<double> per_query;
};

/// (sum_{i<=K} Precision@i * rel_i) / denominator. Zero when there is nothing
/// relevant.
double average_precision_at_k(const RankedRetrieval& ranking, const RelevantSet& relevant, Index K,
                              ApDenominator denominator = ApDenominator::relevant);

MetricValue map_at_k(std::span<const RankedRetrieval> rankings,
                     std::span<const RelevantSet> relevance, Index K,
                     ApDenominator denominator = ApDenominator::relevant);

/// |relevant ∩ retrieved| / |retrieved|, zero for an empty retrieval.
double precision_of(const std::vector<Index>& retrieved, const RelevantSet& relevant);

MetricValue precision_at_radius(std::span<const std::vector<Index>> retrieved,
                                std::span<const RelevantSet> relevance);

/// Mean over cutoffs i = 1..K of n_related(i) / i. When the ranking holds
/// fewer than K items the cutoffs stop at its length. Items of the query's
/// own category never count as related.
double ap_related(const RankedRetrieval& ranking, const std::string& query_label,
                  const LabelList& db_labels, const RelatedPairs& related, Index K);

/// `warnings` receives one entry per query label that no related pair
/// mentions; such queries are still scored.
MetricValue map_related(std::span<const RankedRetrieval> rankings,
                        std::span<const std::string> query_labels, const LabelList& db_labels,
                        const RelatedPairs& related, Index K,
                        std::vector<std::string>* warnings = nullptr);

/// n_related / n_retrieved within the radius, zero for an empty retrieval.
MetricValue precision_related(std::span<const std::vector<Index>> retrieved,
                              std::span<const std::string> query_labels,
                              const LabelList& db_labels, const RelatedPairs& related,
                              std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// Evaluation driver
// ---------------------------------------------------------------------------

enum class RelevanceMode { same_label, shared_tags };

struct EvalOptions
{
    Index K = 5000;
    int radius = 2;
    ApDenominator ap_denominator = ApDenominator::relevant;
    RelevanceMode relevance = RelevanceMode::same_label;
    int min_shared_tags = 2;
    /// Related-category metrics are computed when set.
    const RelatedPairs* related = nullptr;

    void validate() const;
};

struct QueryMetrics
{
    std::string query_id;
    std::string label;
    double ap = 0.0;
    double precision = 0.0;
    Index retrieved_at_radius = 0;
    Index relevant = 0;
    std::optional<double> ap_related;
    std::optional<double> precision_related;
};

struct MetricReport
{
    Index K = 0;
    int radius = 0;
    double map_at_k = 0.0;
    double precision_at_radius = 0.0;
    std::optional<double> map_related;
    std::optional<double> precision_related;
    std::vector<QueryMetrics> queries;
    std::vector<std::string> warnings;
};

/// Ranks every query against the database and scores it. A database item
/// whose id equals the query id is excluded from that query's results.
MetricReport evaluate(const CodeDatabase& queries, const CodeDatabase& db,
                      const EvalOptions& options);

/// One JSON object per query followed by a summary object.
void write_report_jsonl(const MetricReport& report, std::ostream& out);

} // namespace zsh
