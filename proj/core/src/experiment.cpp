#include "zsh/experiment.hpp"

#include "rng.hpp"
#include "text_util.hpp"
#include "zsh/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace zsh {

std::optional<DbMode> parse_db_mode(std::string_view name)
{
    if (name == "seen+unseen-rest") return DbMode::seen_plus_unseen_rest;
    if (name == "all-rest") return DbMode::all_rest;
    return std::nullopt;
}

void ExperimentOptions::validate() const
{
    train.validate();
    eval.validate();
    if (train_size < 1) throw ValidationError("train size must be >= 1");
    if (num_queries < 1) throw ValidationError("query count must be >= 1");
}

namespace {

std::vector<Index> take_sorted(std::vector<Index> pool, Index count, detail::Rng& rng)
{
    rng.shuffle(pool.begin(), pool.end());
    pool.resize(static_cast<std::size_t>(std::min<Index>(count, static_cast<Index>(pool.size()))));
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::set<std::string> label_universe(const LabelList& labels)
{
    std::set<std::string> all;
    for (std::size_t i = 0; i < labels.size(); ++i) all.insert(labels.label(i));
    return all;
}

} // namespace

ExperimentResult run_zeroshot_experiment(const FeatureMatrix& features, const LabelList& labels,
                                         const LabelEmbeddingTable& embeddings,
                                         const SplitSpec& split, const ExperimentOptions& options)
{
    options.validate();
    split.validate();
    if (split.unseen.empty()) throw ProtocolError("split has no unseen categories");
    if (split.seen.empty()) throw ProtocolError("split has no seen categories");
    if (labels.is_multi_label()) {
        throw ValidationError("the zero-shot protocol needs single-label items");
    }
    if (static_cast<Index>(labels.size()) != features.n()) {
        throw ValidationError("label count " + std::to_string(labels.size()) +
                              " does not match feature count " + std::to_string(features.n()));
    }

    std::vector<Index> seen_items;
    std::vector<Index> unseen_items;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& l = labels.label(i);
        if (split.seen.count(l)) {
            seen_items.push_back(static_cast<Index>(i));
        } else if (split.unseen.count(l)) {
            unseen_items.push_back(static_cast<Index>(i));
        } else {
            throw ProtocolError("label '" + l + "' of item " + features.item_ids()[i] +
                                " is neither seen nor unseen");
        }
    }
    if (seen_items.empty()) throw ProtocolError("no items carry a seen label");
    if (unseen_items.empty()) throw ProtocolError("no items carry an unseen label");

    detail::Rng rng(detail::derive_seed(options.train.hyper.seed, 2));
    ExperimentResult result;
    result.query_items = take_sorted(unseen_items, options.num_queries, rng);
    result.train_items = take_sorted(seen_items, options.train_size, rng);

    std::vector<bool> is_query(labels.size(), false);
    std::vector<bool> is_train(labels.size(), false);
    for (auto i : result.query_items) is_query[static_cast<std::size_t>(i)] = true;
    for (auto i : result.train_items) is_train[static_cast<std::size_t>(i)] = true;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (is_query[i]) continue;
        if (options.db == DbMode::seen_plus_unseen_rest && is_train[i]) continue;
        result.db_items.push_back(static_cast<Index>(i));
    }
    if (result.db_items.empty()) throw ProtocolError("retrieval database is empty");

    const LabelList train_labels = labels.select(result.train_items);
    for (std::size_t i = 0; i < train_labels.size(); ++i) {
        if (split.unseen.count(train_labels.label(i))) {
            throw ProtocolError("training item carries unseen label '" + train_labels.label(i) + "'");
        }
    }
    const FeatureMatrix train_features = features.select(result.train_items);
    const Matrix Y = assemble_Y(train_labels, embeddings);

    TrainResult trained = train(train_features.values(), Y, options.train);
    result.model = std::move(trained.model);
    result.trace = std::move(trained.trace);

    const CodeDatabase db = encode_database(features.select(result.db_items), result.model,
                                            labels.select(result.db_items));
    const CodeDatabase queries = encode_database(features.select(result.query_items), result.model,
                                                 labels.select(result.query_items));
    result.report = evaluate(queries, db, options.eval);
    return result;
}

std::vector<SweepPoint> sweep_unseen_category(const FeatureMatrix& features,
                                              const LabelList& labels,
                                              const LabelEmbeddingTable& embeddings,
                                              const ExperimentOptions& options,
                                              std::vector<std::string> categories)
{
    const auto all = label_universe(labels);
    if (categories.empty()) categories.assign(all.begin(), all.end());
    std::vector<SweepPoint> points;
    for (const auto& c : categories) {
        if (!all.count(c)) throw ValidationError("unknown category '" + c + "'");
        SplitSpec split;
        split.unseen.insert(c);
        for (const auto& other : all) {
            if (other != c) split.seen.insert(other);
        }
        const auto r = run_zeroshot_experiment(features, labels, embeddings, split, options);
        points.push_back({c, r.report.map_at_k, r.report.precision_at_radius});
    }
    return points;
}

std::vector<SweepPoint> sweep_seen_ratio(const FeatureMatrix& features, const LabelList& labels,
                                         const LabelEmbeddingTable& embeddings,
                                         const ExperimentOptions& options,
                                         std::span<const double> ratios)
{
    const auto all = label_universe(labels);
    if (all.size() < 2) throw ProtocolError("a seen-ratio sweep needs at least two categories");
    std::vector<std::string> order(all.begin(), all.end());
    detail::Rng rng(detail::derive_seed(options.train.hyper.seed, 3));
    rng.shuffle(order.begin(), order.end());

    const auto C = static_cast<double>(order.size());
    std::vector<SweepPoint> points;
    for (double ratio : ratios) {
        if (!(ratio > 0.0 && ratio < 1.0)) {
            throw ValidationError("seen ratios must lie in (0, 1)");
        }
        const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(ratio * C)), 1,
                                               order.size() - 1);
        SplitSpec split;
        split.seen.insert(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
        split.unseen.insert(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
        const auto r = run_zeroshot_experiment(features, labels, embeddings, split, options);
        points.push_back({detail::format_double(ratio), r.report.map_at_k,
                          r.report.precision_at_radius});
    }
    return points;
}

std::vector<SweepPoint> sweep_train_size(const FeatureMatrix& features, const LabelList& labels,
                                         const LabelEmbeddingTable& embeddings,
                                         const SplitSpec& split, const ExperimentOptions& options,
                                         std::span<const Index> sizes)
{
    std::vector<SweepPoint> points;
    for (Index size : sizes) {
        ExperimentOptions o = options;
        o.train_size = size;
        const auto r = run_zeroshot_experiment(features, labels, embeddings, split, o);
        points.push_back({std::to_string(size), r.report.map_at_k, r.report.precision_at_radius});
    }
    return points;
}

void write_sweep_csv(std::span<const SweepPoint> points, std::ostream& out)
{
    out << "x,map,precision\n";
    for (const auto& p : points) {
        out << p.x << ',' << detail::format_double(p.map) << ','
            << detail::format_double(p.precision) << '\n';
    }
}

} // namespace zsh
