#pragma once

#include "zsh/data_io.hpp"
#include "zsh/evalkit.hpp"
#include "zsh/train.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zsh {

/// Which items form the retrieval database.
enum class DbMode {
    seen_plus_unseen_rest,  // seen items not used for training + unseen non-queries
    all_rest,               // every item that is not a query
};

std::optional<DbMode> parse_db_mode(std::string_view name);

struct ExperimentOptions
{
    TrainConfig train;
    Index train_size = 10000;
    Index num_queries = 1000;
    DbMode db = DbMode::seen_plus_unseen_rest;
    EvalOptions eval;

    void validate() const;
};

struct ExperimentResult
{
    MetricReport report;
    TrainTrace trace;
    ZshModel model;
    std::vector<Index> train_items;
    std::vector<Index> query_items;
    std::vector<Index> db_items;
};

/// Zero-shot protocol: train on a sample of seen-category items, draw queries
/// from unseen categories, encode the database and score the queries. Every
/// item label must belong to the split; the split must have at least one
/// seen and one unseen label. Sampling is seeded by `options.train.hyper.seed`.
ExperimentResult run_zeroshot_experiment(const FeatureMatrix& features, const LabelList& labels,
                                         const LabelEmbeddingTable& embeddings,
                                         const SplitSpec& split, const ExperimentOptions& options);

struct SweepPoint
{
    std::string x;
    double map = 0.0;
    double precision = 0.0;
};

/// Each category in turn is the only unseen one.
std::vector<SweepPoint> sweep_unseen_category(const FeatureMatrix& features,
                                              const LabelList& labels,
                                              const LabelEmbeddingTable& embeddings,
                                              const ExperimentOptions& options,
                                              std::vector<std::string> categories = {});

/// For each ratio r, round(r * C) categories (at least one, at most C - 1) of
/// a seeded shuffle are seen and the rest unseen.
std::vector<SweepPoint> sweep_seen_ratio(const FeatureMatrix& features, const LabelList& labels,
                                         const LabelEmbeddingTable& embeddings,
                                         const ExperimentOptions& options,
                                         std::span<const double> ratios);

/// Fixed split, varying number of training items.
std::vector<SweepPoint> sweep_train_size(const FeatureMatrix& features, const LabelList& labels,
                                         const LabelEmbeddingTable& embeddings,
                                         const SplitSpec& split, const ExperimentOptions& options,
                                         std::span<const Index> sizes);

/// CSV `x,map,precision`.
void write_sweep_csv(std::span<const SweepPoint> points, std::ostream& out);

} // namespace zsh
