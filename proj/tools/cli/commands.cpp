#include "cli/commands.hpp"

#include "zsh/codes.hpp"
#include "zsh/data_io.hpp"
#include "zsh/error.hpp"
#include "zsh/evalkit.hpp"
#include "zsh/experiment.hpp"
#include "zsh/graph.hpp"
#include "zsh/parallel.hpp"
#include "zsh/train.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string_view>

namespace zsh::cli {
namespace {

std::string fmt(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, ec == std::errc() ? ptr : buf);
}

// ---------------------------------------------------------------------------
// Shared flag groups
// ---------------------------------------------------------------------------

struct FeatureFlags
{
    std::string path;
    std::string format = "auto";

    void add(CLI::App* cmd, const std::string& name, bool required)
    {
        auto* opt = cmd->add_option("--" + name, path, "Feature matrix (.csv or binary ZSHF)");
        if (required) opt->required();
        cmd->add_option("--" + name + "-format", format, "Feature file format")
            ->check(CLI::IsMember({"auto", "csv", "binary"}));
    }

    FeatureMatrix load() const
    {
        FeatureFormat f = feature_format_for(path);
        if (format == "csv") f = FeatureFormat::csv;
        if (format == "binary") f = FeatureFormat::binary;
        return load_features(path, f);
    }
};

struct TrainFlags
{
    Hyperparameters hyper;
    Index anchors = 1000;
    double delta = 0.0;
    CLI::Option* delta_opt = nullptr;
    Index knn = 5;
    double sigma = 1.0;
    std::string affinity = "gaussian";

    void add(CLI::App* cmd)
    {
        cmd->add_option("--code-length", hyper.code_length, "Bits per code")
            ->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--anchors", anchors, "Number of kernel anchors m")
            ->check(CLI::PositiveNumber)->capture_default_str();
        delta_opt = cmd->add_option("--delta", delta, "RBF bandwidth (default: mean squared distance)")
                        ->check(CLI::PositiveNumber);
        cmd->add_option("--knn", knn, "Neighbours per item in the similarity graph")
            ->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--sigma", sigma, "Similarity graph bandwidth")
            ->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--affinity", affinity, "Graph affinity")
            ->check(CLI::IsMember({"gaussian", "exp-neg-dist"}))->capture_default_str();
        cmd->add_option("--lambda", hyper.lambda, "Ridge weight on W")
            ->check(CLI::NonNegativeNumber)->capture_default_str();
        cmd->add_option("--alpha", hyper.alpha, "Code fitting weight")
            ->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--beta", hyper.beta, "Ridge weight on P")
            ->check(CLI::NonNegativeNumber)->capture_default_str();
        cmd->add_option("--gamma", hyper.gamma, "Laplacian weight")
            ->check(CLI::NonNegativeNumber)->capture_default_str();
        cmd->add_option("--max-iters", hyper.max_iters, "Maximum outer iterations")
            ->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--tol", hyper.tol, "Relative objective change that stops training")
            ->check(CLI::NonNegativeNumber)->capture_default_str();
        cmd->add_option("--dcc-passes", hyper.dcc_max_passes, "Sweep cap per code update")
            ->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--seed", hyper.seed, "Random seed")->capture_default_str();
    }

    TrainConfig config() const
    {
        TrainConfig c;
        c.hyper = hyper;
        c.anchors = anchors;
        if (delta_opt && delta_opt->count() > 0) c.delta = delta;
        c.knn = knn;
        c.sigma = sigma;
        c.affinity = *parse_affinity(affinity);
        c.validate();
        return c;
    }
};

struct EvalFlags
{
    EvalOptions options;
    std::string ap_denominator = "relevant";
    std::string relevance = "same-label";
    std::string related;

    void add(CLI::App* cmd, bool with_relevance)
    {
        cmd->add_option("--k", options.K, "Ranking depth for MAP@K")
            ->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--radius", options.radius, "Hamming radius for precision")
            ->check(CLI::NonNegativeNumber)->capture_default_str();
        cmd->add_option("--ap-denominator", ap_denominator, "AP@K normaliser")
            ->check(CLI::IsMember({"relevant", "retrieved"}))->capture_default_str();
        cmd->add_option("--related", related, "Related label pairs (labelA<TAB>labelB)");
        if (with_relevance) {
            cmd->add_option("--relevance", relevance, "Ground truth rule")
                ->check(CLI::IsMember({"same-label", "shared-tags"}))->capture_default_str();
            cmd->add_option("--min-shared-tags", options.min_shared_tags,
                            "Tags a multi-label item must share with the query")
                ->check(CLI::PositiveNumber)->capture_default_str();
        }
    }

    EvalOptions resolve(std::optional<RelatedPairs>& pairs) const
    {
        EvalOptions o = options;
        o.ap_denominator = *parse_ap_denominator(ap_denominator);
        o.relevance = relevance == "shared-tags" ? RelevanceMode::shared_tags
                                                 : RelevanceMode::same_label;
        if (!related.empty()) {
            pairs = load_related_pairs(related);
            o.related = &*pairs;
        }
        o.validate();
        return o;
    }
};

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    return out;
}

void check_label_count(const LabelList& labels, const FeatureMatrix& features)
{
    if (static_cast<Index>(labels.size()) != features.n()) {
        throw ValidationError("--labels has " + std::to_string(labels.size()) +
                              " rows but the features have " + std::to_string(features.n()) +
                              " items");
    }
}

LaplacianMatrix graph_for(const Matrix& X, const TrainConfig& config, bool force,
                          const std::string& dump_path)
{
    LaplacianMatrix L;
    if (config.hyper.gamma != 0.0 || force) {
        const auto graph = build_similarity(X, config.knn, config.sigma, config.affinity);
        if (!dump_path.empty()) {
            auto out = open_output(dump_path);
            write_triplets(graph, out);
        }
        L = laplacian(graph);
    } else {
        L.L.resize(X.cols(), X.cols());
        L.degree = Vector::Zero(X.cols());
    }
    return L;
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct TrainCmd
{
    FeatureFlags features;
    std::string labels;
    std::string embeddings;
    std::string split;
    std::string model_out;
    std::string trace_out;
    std::string graph_dump;
    TrainFlags train;

    void add(CLI::App& app, std::function<void()>& action, std::ostream& out)
    {
        auto* cmd = app.add_subcommand("train", "Learn hash functions from seen-category data");
        features.add(cmd, "features", true);
        cmd->add_option("--labels", labels, "One label per item")->required();
        cmd->add_option("--embeddings", embeddings, "word2vec text embedding table")->required();
        cmd->add_option("--split", split, "Seen/unseen split; every item must be seen");
        cmd->add_option("--model-out", model_out, "Output model file")->required();
        cmd->add_option("--trace-out", trace_out, "Objective trace CSV");
        cmd->add_option("--graph-dump", graph_dump, "Write the similarity graph as i j s triplets");
        train.add(cmd);
        cmd->callback([this, &action, &out] {
            const TrainConfig config = train.config();
            action = [this, config, &out] { run(config, out); };
        });
    }

    void run(const TrainConfig& config, std::ostream& out) const
    {
        const FeatureMatrix X = features.load();
        const LabelList labs = load_labels(labels);
        check_label_count(labs, X);
        const LabelEmbeddingTable table = load_embeddings(embeddings);
        if (!split.empty()) {
            const SplitSpec s = load_split(split);
            for (std::size_t i = 0; i < labs.size(); ++i) {
                const auto& l = labs.label(i);
                if (s.unseen.count(l)) {
                    throw ProtocolError("training item " + X.item_ids()[i] + " has unseen label '" +
                                        l + "'");
                }
                if (!s.seen.count(l)) {
                    throw ProtocolError("training item " + X.item_ids()[i] + " has label '" + l +
                                        "' outside the seen set");
                }
            }
        }
        const Matrix Y = assemble_Y(labs, table);
        const LaplacianMatrix L = graph_for(X.values(), config, !graph_dump.empty(), graph_dump);
        const TrainResult result = train_with(X, Y, L, config);

        save_model(result.model, model_out);
        if (!trace_out.empty()) {
            auto t = open_output(trace_out);
            write_trace_csv(result.trace, t);
        }
        out << "iterations=" << result.trace.iterations.size()
            << " stop=" << to_string(result.trace.stop)
            << " objective=" << fmt(result.trace.objective_sequence().back()) << '\n';
    }

    static TrainResult train_with(const FeatureMatrix& X, const Matrix& Y,
                                  const LaplacianMatrix& L, const TrainConfig& config)
    {
        return zsh::train(X.values(), Y, L, config);
    }
};

struct EncodeCmd
{
    std::string model;
    FeatureFlags features;
    std::string labels;
    bool multi_label = false;
    std::string out_path;

    void add(CLI::App& app, std::function<void()>& action, std::ostream& out)
    {
        auto* cmd = app.add_subcommand("encode", "Encode feature vectors into a code file");
        cmd->add_option("--model", model, "Model file")->required();
        features.add(cmd, "features", true);
        cmd->add_option("--labels", labels, "Optional labels stored with the codes");
        cmd->add_flag("--multi-label", multi_label, "Labels are comma-separated tag lists");
        cmd->add_option("--out", out_path, "Output code file")->required();
        cmd->callback([this, &action, &out] { action = [this, &out] { run(out); }; });
    }

    void run(std::ostream& out) const
    {
        const ZshModel m = load_model(model);
        const FeatureMatrix X = features.load();
        std::optional<LabelList> labs;
        if (!labels.empty()) {
            labs = load_labels(labels, multi_label);
            check_label_count(*labs, X);
        }
        const CodeDatabase db = encode_database(X, m, std::move(labs));
        save_codes(db, out_path);
        out << "encoded=" << db.size() << " bits=" << db.code_length() << '\n';
    }
};

struct SearchCmd
{
    std::string db;
    std::string queries;
    FeatureFlags query_features;
    std::string model;
    Index k = 5000;
    std::string out_path;

    void add(CLI::App& app, std::function<void()>& action, std::ostream& out)
    {
        auto* cmd = app.add_subcommand("search", "Rank database codes for each query");
        cmd->add_option("--db", db, "Database code file")->required();
        auto* q = cmd->add_option("--queries", queries, "Query code file");
        query_features.add(cmd, "query-features", false);
        cmd->add_option("--model", model, "Model used to encode --query-features");
        cmd->add_option("--k", k, "Results per query")->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--out", out_path, "Output file (default: stdout)");
        cmd->callback([this, q, &action, &out] {
            const bool have_features = !query_features.path.empty();
            if ((q->count() > 0) == have_features) {
                throw ValidationError("search needs exactly one of --queries or --query-features");
            }
            if (have_features && model.empty()) {
                throw ValidationError("--query-features requires --model");
            }
            action = [this, &out] { run(out); };
        });
    }

    void run(std::ostream& out) const
    {
        const CodeDatabase database = load_codes(db);
        CodeDatabase q;
        if (!queries.empty()) {
            q = load_codes(queries);
        } else {
            q = encode_database(query_features.load(), load_model(model));
        }
        if (q.code_length() != database.code_length()) {
            throw ValidationError("query codes have " + std::to_string(q.code_length()) +
                                  " bits, database codes have " +
                                  std::to_string(database.code_length()));
        }
        std::ostringstream text;
        for (Index i = 0; i < q.size(); ++i) {
            const auto r = search_topk(q.code(i), database, k);
            for (const auto& nb : r.results) {
                text << q.ids()[static_cast<std::size_t>(i)] << ' '
                     << database.ids()[static_cast<std::size_t>(nb.index)] << ' ' << nb.distance
                     << '\n';
            }
        }
        if (out_path.empty()) {
            out << text.str();
        } else {
            auto f = open_output(out_path);
            f << text.str();
        }
    }
};

void write_summary(const MetricReport& r, std::ostream& out)
{
    out << "map=" << fmt(r.map_at_k) << " precision=" << fmt(r.precision_at_radius);
    if (r.map_related) out << " map_related=" << fmt(*r.map_related);
    if (r.precision_related) out << " precision_related=" << fmt(*r.precision_related);
    out << '\n';
}

struct EvalCmd
{
    std::string db;
    std::string queries;
    EvalFlags eval;
    std::string out_path;

    void add(CLI::App& app, std::function<void()>& action, std::ostream& out)
    {
        auto* cmd = app.add_subcommand("eval", "Score labelled query codes against a labelled database");
        cmd->add_option("--db", db, "Database code file with labels")->required();
        cmd->add_option("--queries", queries, "Query code file with labels")->required();
        eval.add(cmd, true);
        cmd->add_option("--out", out_path, "JSON-lines report (default: stdout)");
        cmd->callback([this, &action, &out] { action = [this, &out] { run(out); }; });
    }

    void run(std::ostream& out) const
    {
        std::optional<RelatedPairs> pairs;
        const EvalOptions options = eval.resolve(pairs);
        const CodeDatabase database = load_codes(db);
        const CodeDatabase q = load_codes(queries);
        const MetricReport report = evaluate(q, database, options);
        if (out_path.empty()) {
            write_report_jsonl(report, out);
        } else {
            auto f = open_output(out_path);
            write_report_jsonl(report, f);
            write_summary(report, out);
        }
    }
};

struct ExpCmd
{
    FeatureFlags features;
    std::string labels;
    std::string embeddings;
    std::string split;
    TrainFlags train;
    EvalFlags eval;
    Index train_size = 10000;
    Index num_queries = 1000;
    std::string db_mode = "seen+unseen-rest";
    std::string sweep = "none";
    std::string grid;
    std::string out_path;
    std::string csv_path;
    std::string trace_out;
    std::string model_out;

    void add(CLI::App& app, std::function<void()>& action, std::ostream& out)
    {
        auto* cmd = app.add_subcommand("exp-zeroshot", "Run the zero-shot retrieval protocol");
        features.add(cmd, "features", true);
        cmd->add_option("--labels", labels, "One label per item")->required();
        cmd->add_option("--embeddings", embeddings, "word2vec text embedding table")->required();
        cmd->add_option("--split", split, "Seen/unseen split");
        train.add(cmd);
        eval.add(cmd, false);
        cmd->add_option("--train-size", train_size, "Training items sampled from seen categories")
            ->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--queries", num_queries, "Queries sampled from unseen categories")
            ->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--db", db_mode, "Retrieval database composition")
            ->check(CLI::IsMember({"seen+unseen-rest", "all-rest"}))->capture_default_str();
        cmd->add_option("--sweep", sweep, "Sweep mode")
            ->check(CLI::IsMember({"none", "unseen-category", "seen-ratio", "train-size"}))
            ->capture_default_str();
        cmd->add_option("--grid", grid, "Comma-separated sweep values");
        cmd->add_option("--out", out_path, "JSON-lines report of a single run");
        cmd->add_option("--csv", csv_path, "CSV x,map,precision");
        cmd->add_option("--trace-out", trace_out, "Objective trace CSV of a single run");
        cmd->add_option("--model-out", model_out, "Model file of a single run");
        cmd->callback([this, &action, &out] {
            ExperimentOptions options = base_options();
            if ((sweep == "none" || sweep == "train-size") && split.empty()) {
                throw ValidationError("--split is required for --sweep=" + sweep);
            }
            std::vector<double> ratios;
            std::vector<Index> sizes;
            if (sweep == "seen-ratio" || sweep == "train-size") {
                if (grid.empty()) throw ValidationError("--grid is required for --sweep=" + sweep);
                for (const auto& g : split_list(grid)) {
                    double v = 0.0;
                    const auto [p, ec] = std::from_chars(g.data(), g.data() + g.size(), v);
                    if (ec != std::errc() || p != g.data() + g.size()) {
                        throw ValidationError("--grid: cannot parse '" + g + "'");
                    }
                    if (sweep == "seen-ratio") {
                        if (!(v > 0.0 && v < 1.0)) throw ValidationError("--grid ratios must lie in (0, 1)");
                        ratios.push_back(v);
                    } else {
                        if (v < 1.0 || v != std::floor(v)) {
                            throw ValidationError("--grid sizes must be positive integers");
                        }
                        sizes.push_back(static_cast<Index>(v));
                    }
                }
            }
            action = [this, options, ratios, sizes, &out] { run(options, ratios, sizes, out); };
        });
    }

    ExperimentOptions base_options() const
    {
        ExperimentOptions o;
        o.train = train.config();
        std::optional<RelatedPairs> unused;
        EvalFlags no_related = eval;
        no_related.related.clear();
        o.eval = no_related.resolve(unused);
        o.train_size = train_size;
        o.num_queries = num_queries;
        o.db = *parse_db_mode(db_mode);
        o.validate();
        return o;
    }

    void run(ExperimentOptions options, const std::vector<double>& ratios,
             const std::vector<Index>& sizes, std::ostream& out) const
    {
        std::optional<RelatedPairs> pairs;
        if (!eval.related.empty()) {
            pairs = load_related_pairs(eval.related);
            options.eval.related = &*pairs;
        }
        const FeatureMatrix X = features.load();
        const LabelList labs = load_labels(labels);
        check_label_count(labs, X);
        const LabelEmbeddingTable table = load_embeddings(embeddings);

        std::vector<SweepPoint> points;
        if (sweep == "none") {
            const SplitSpec s = load_split(split);
            const auto result = run_zeroshot_experiment(X, labs, table, s, options);
            if (!out_path.empty()) {
                auto f = open_output(out_path);
                write_report_jsonl(result.report, f);
            }
            if (!trace_out.empty()) {
                auto f = open_output(trace_out);
                write_trace_csv(result.trace, f);
            }
            if (!model_out.empty()) save_model(result.model, model_out);
            std::string x;
            for (const auto& u : s.unseen) x += (x.empty() ? "" : "+") + u;
            points.push_back({x, result.report.map_at_k, result.report.precision_at_radius});
            write_summary(result.report, out);
        } else if (sweep == "unseen-category") {
            points = sweep_unseen_category(X, labs, table, options, split_list(grid));
        } else if (sweep == "seen-ratio") {
            points = sweep_seen_ratio(X, labs, table, options, ratios);
        } else {
            points = sweep_train_size(X, labs, table, load_split(split), options, sizes);
        }

        if (!csv_path.empty()) {
            auto f = open_output(csv_path);
            write_sweep_csv(points, f);
        } else if (sweep != "none") {
            write_sweep_csv(points, out);
        }
    }
};

struct InspectCmd
{
    std::string model;
    FeatureFlags features;
    std::string labels;
    std::string embeddings;
    Index knn = 5;
    double sigma = 1.0;
    std::string affinity = "gaussian";

    void add(CLI::App& app, std::function<void()>& action, std::ostream& out)
    {
        auto* cmd = app.add_subcommand("inspect", "Print model dimensions and diagnostics");
        cmd->add_option("--model", model, "Model file")->required();
        features.add(cmd, "features", false);
        cmd->add_option("--labels", labels, "Labels of --features");
        cmd->add_option("--embeddings", embeddings, "Embedding table for --labels");
        cmd->add_option("--knn", knn, "Neighbours per item in the similarity graph")
            ->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--sigma", sigma, "Similarity graph bandwidth")
            ->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--affinity", affinity, "Graph affinity")
            ->check(CLI::IsMember({"gaussian", "exp-neg-dist"}))->capture_default_str();
        cmd->callback([this, &action, &out] {
            const int given = !features.path.empty() + !labels.empty() + !embeddings.empty();
            if (given != 0 && given != 3) {
                throw ValidationError("--features, --labels and --embeddings go together");
            }
            action = [this, &out] { run(out); };
        });
    }

    void run(std::ostream& out) const
    {
        const ZshModel m = load_model(model);
        out << "m=" << m.m() << '\n'
            << "l=" << m.l() << '\n'
            << "e=" << m.e() << '\n'
            << "d=" << m.d() << '\n'
            << "delta=" << fmt(m.anchors.delta) << '\n'
            << "orthogonality_residual=" << fmt(m.orthogonality_residual()) << '\n';
        if (features.path.empty()) return;

        const FeatureMatrix X = features.load();
        const LabelList labs = load_labels(labels);
        check_label_count(labs, X);
        const Matrix Y = assemble_Y(labs, load_embeddings(embeddings));
        if (Y.rows() != m.e()) {
            throw ValidationError("--embeddings have dimension " + std::to_string(Y.rows()) +
                                  ", the model expects " + std::to_string(m.e()));
        }
        if (X.d() != m.d()) {
            throw ValidationError("--features have dimension " + std::to_string(X.d()) +
                                  ", the model expects " + std::to_string(m.d()));
        }
        TrainConfig graph_config;
        graph_config.hyper = m.hyper;
        graph_config.knn = knn;
        graph_config.sigma = sigma;
        graph_config.affinity = *parse_affinity(affinity);
        const LaplacianMatrix L = graph_for(X.values(), graph_config, false, {});

        // The model file carries no training codes; score the codes the
        // model assigns to the given items.
        ZshModel scored = m;
        const Matrix phiX = kernel_map_batch(X.values(), m.anchors);
        scored.B = (m.P.transpose() * phiX).unaryExpr([](double v) { return sgn(v); });
        const auto t = objective_terms(scored.P, scored.W, scored.R, scored.B, phiX, Y, L.L, m.hyper);
        out << "objective=" << fmt(t.total()) << '\n'
            << "terms=" << fmt(t.alignment) << ',' << fmt(t.w_ridge) << ',' << fmt(t.code_fit)
            << ',' << fmt(t.p_ridge) << ',' << fmt(t.laplacian) << '\n';
    }
};

int exit_code_for(const Error& e)
{
    switch (e.kind()) {
    case ErrorKind::solver:
        return exit_solver;
    case ErrorKind::protocol:
        return exit_protocol;
    case ErrorKind::validation:
    default:
        return exit_validation;
    }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Zero-shot hashing: train, encode, search and evaluate binary codes", "zsh"};
    app.require_subcommand(1);
    int workers = 1;
    auto* workers_opt = app.add_option("--workers", workers, "Worker threads (env ZSH_WORKERS)")
                            ->check(CLI::PositiveNumber)
                            ->capture_default_str();

    std::function<void()> action;
    TrainCmd train_cmd;
    EncodeCmd encode_cmd;
    SearchCmd search_cmd;
    EvalCmd eval_cmd;
    ExpCmd exp_cmd;
    InspectCmd inspect_cmd;
    train_cmd.add(app, action, out);
    encode_cmd.add(app, action, out);
    search_cmd.add(app, action, out);
    eval_cmd.add(app, action, out);
    exp_cmd.add(app, action, out);
    inspect_cmd.add(app, action, out);
    // Subcommand flags may also precede or follow --workers.
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return exit_ok;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }

    try {
        if (workers_opt->count() == 0) {
            if (const char* env = std::getenv("ZSH_WORKERS"); env && *env) {
                const std::string_view text(env);
                const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), workers);
                if (ec != std::errc() || p != text.data() + text.size() || workers < 1) {
                    err << "error: --workers: ZSH_WORKERS must be a positive integer, got '" << text
                        << "'\n";
                    return exit_validation;
                }
            }
        }
        set_worker_count(workers);
        if (action) action();
        return exit_ok;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
}

} // namespace zsh::cli
