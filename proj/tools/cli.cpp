#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hotelalign/align.hpp"
#include "hotelalign/data.hpp"
#include "hotelalign/embedding.hpp"
#include "hotelalign/eval.hpp"
#include "hotelalign/model.hpp"
#include "hotelalign/repro.hpp"
#include "hotelalign/rng.hpp"
#include "hotelalign/synth.hpp"
#include "hotelalign/train.hpp"

namespace fs = std::filesystem;

namespace hotelalign::cli {
namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Validation failures found before any work starts are usage errors.
template <typename F>
void check_usage(F&& f)
{
    try {
        f();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
}

std::ofstream open_output(const fs::path& path)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

void echo_config(const CLI::App& sub, std::ostream& out)
{
    out << "# effective config (" << sub.get_name() << ")\n";
    std::istringstream lines(sub.config_to_str(true, false));
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty()) out << "#   " << line << '\n';
}

SessionSet pick_split(const SessionSet& all, const std::string& split, std::uint64_t split_seed)
{
    if (split == "all") return all;
    auto parts = split_sessions(all, SplitRatios{}, derive_seed(split_seed, "split." + all.brand));
    if (split == "train") return parts.train;
    if (split == "val") return parts.validation;
    return parts.test;
}

const std::vector<std::string> kSplits{"train", "val", "test", "all"};

// ---- gen ----

struct GenOptions {
    WorldConfig world;
    std::string out_dir = ".";
};

void add_gen(CLI::App& app, GenOptions& o)
{
    auto& w = o.world;
    app.add_option("--out", o.out_dir, "output directory");
    app.add_option("--markets", w.n_markets, "number of markets");
    app.add_option("--hotels-per-market", w.hotels_per_market, "hotels in each market");
    app.add_option("--latent-dim", w.latent_dim, "latent hotel vector length");
    app.add_option("--amenity-dim", w.amenity_dim, "amenity feature length");
    app.add_option("--geo-dim", w.geo_dim, "geo feature length");
    app.add_option("--sessions", w.n_sessions_per_brand, "sessions per brand");
    app.add_option("--min-length", w.min_session_length, "shortest session");
    app.add_option("--max-length", w.max_session_length, "longest session");
    app.add_option("--brand-bias", w.brand_bias_strength, "per-brand popularity noise");
    app.add_option("--popularity-spread", w.popularity_spread, "shared log-popularity spread");
    app.add_option("--affinity-sharpness", w.affinity_sharpness, "inverse temperature of the click walk");
    app.add_option("--overlap", w.overlap_fraction, "fraction of hotels in the brand mapping");
    app.add_option("--source-brand", w.brands[0], "source brand tag");
    app.add_option("--target-brand", w.brands[1], "target brand tag");
    app.add_option("--seed", w.seed, "world seed");
}

int cmd_gen(const CLI::App& sub, const GenOptions& o, std::ostream& out)
{
    check_usage([&] { o.world.validate(); });
    echo_config(sub, out);
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);

    const World world = generate_world(o.world);
    {
        auto f = open_output(dir / "catalog.jsonl");
        write_catalog(f, world.catalog);
    }
    for (const auto& brand : world.brands) {
        auto f = open_output(dir / ("sessions_" + brand + ".jsonl"));
        write_sessions(f, generate_sessions(world, brand, o.world), world.catalog);
        if (!f) throw DataError("write failed for brand " + brand);
    }
    {
        auto f = open_output(dir / "mapping.tsv");
        write_mapping(f, world.mapping);
    }
    {
        auto f = open_output(dir / "world-meta.json");
        write_world_meta(f, o.world);
    }
    out << "wrote " << world.catalog.size() << " hotels, " << o.world.n_sessions_per_brand
        << " sessions per brand, " << world.mapping.size() << " mapped hotels to " << dir.string() << '\n';
    return kOk;
}

// ---- train ----

struct TrainOptions {
    TrainConfig cfg;
    std::string catalog, sessions, brand, out;
    std::string split = "train";
    std::uint64_t split_seed = 42;
    std::string reg_variant = "norm";
    std::string optimizer = "sgd";
    std::string source_embeddings, mapping;
    std::string curve, curve_split = "test";
};

void add_train(CLI::App& app, TrainOptions& o)
{
    auto& c = o.cfg;
    app.add_option("--catalog", o.catalog, "catalog file")->required()->check(CLI::ExistingFile);
    app.add_option("--sessions", o.sessions, "session file of the brand")->required()->check(CLI::ExistingFile);
    app.add_option("--brand", o.brand, "brand tag of the sessions")->required();
    app.add_option("--out", o.out, "embedding file to write")->required();
    app.add_option("--split", o.split, "sessions to train on")->check(CLI::IsMember(kSplits));
    app.add_option("--split-seed", o.split_seed, "seed of the 8:1:1 session split");
    app.add_option("--click-dim", c.click_dim, "click sub-embedding size");
    app.add_option("--amenity-embed-dim", c.amenity_dim, "amenity sub-embedding size");
    app.add_option("--geo-embed-dim", c.geo_dim, "geo sub-embedding size");
    app.add_option("--dim", c.dim, "enriched embedding size");
    app.add_option("--window", c.window, "skip-gram window");
    app.add_option("--negatives", c.n_neg, "negatives per pair");
    app.add_option("--lr", c.learning_rate, "learning rate");
    app.add_option("--epochs", c.epochs, "passes over the training pairs");
    app.add_option("--l2", c.l2_weight, "weight decay on touched parameters");
    app.add_option("--init-scale", c.init_scale, "initial weights uniform in +-scale/cols");
    app.add_option("--lambda", c.lambda, "pull toward the source space");
    app.add_option("--reg-variant", o.reg_variant, "norm or squared_norm")
        ->check(CLI::IsMember({"norm", "squared_norm"}));
    app.add_option("--optimizer", o.optimizer, "sgd or adam")->check(CLI::IsMember({"sgd", "adam"}));
    app.add_option("--seed", c.seed, "training seed");
    app.add_option("--source-embeddings", o.source_embeddings, "frozen source space")->check(CLI::ExistingFile);
    app.add_option("--mapping", o.mapping, "source -> target mapping")->check(CLI::ExistingFile);
    app.add_option("--curve", o.curve, "write hits@10/hits@100 checkpoints here");
    app.add_option("--curve-split", o.curve_split, "sessions scored at each checkpoint")
        ->check(CLI::IsMember(kSplits));
    app.add_option("--eval-every", c.eval_every, "steps between checkpoints");
}

int cmd_train(const CLI::App& sub, TrainOptions& o, std::ostream& out, std::ostream& err)
{
    check_usage([&] {
        o.cfg.reg_variant = parse_reg_variant(o.reg_variant);
        o.cfg.optimizer = parse_optimizer(o.optimizer);
        o.cfg.validate();
        if (o.cfg.lambda > 0 && (o.source_embeddings.empty() || o.mapping.empty()))
            throw ConfigError("--lambda > 0 requires --source-embeddings and --mapping");
    });
    echo_config(sub, out);

    const auto catalog = load_catalog(o.catalog);
    const auto all = load_sessions(o.sessions, catalog, o.brand, &err);
    const auto sessions = pick_split(all, o.split, o.split_seed);

    std::optional<EmbeddingSpace> source;
    std::optional<BrandMapping> mapping;
    if (!o.source_embeddings.empty()) source = read_embeddings(fs::path(o.source_embeddings), "source");
    if (!o.mapping.empty()) mapping = load_mapping(o.mapping);

    std::vector<CurvePoint> curve;
    CurveSink sink;
    SessionSet curve_sessions;
    if (!o.curve.empty()) {
        curve_sessions = pick_split(all, o.curve_split, o.split_seed);
        sink = [&](std::size_t step, const EmbeddingSpace& space) {
            const std::size_t ks[] = {10, 100};
            const auto r = evaluate(curve_sessions, catalog, space, ScoreMode::model, ks);
            curve.push_back({step, r.row(10).hits, r.row(100).hits});
        };
    }

    const auto result = train(sessions, catalog, o.cfg, source ? &*source : nullptr,
                              mapping ? &*mapping : nullptr, sink);
    write_embeddings(fs::path(o.out), export_embeddings(result.params, catalog, o.brand));
    {
        auto f = open_output(o.out + ".config");
        f << sub.config_to_str(true, false);
    }
    if (!o.curve.empty()) {
        auto f = open_output(o.curve);
        write_curve(f, curve);
    }
    out << "trained " << sessions.size() << " sessions, " << result.steps << " steps, "
        << result.skipped_pairs << " skipped pairs\n";
    out << "final train loss " << format_double(result.epoch_mean_loss.back()) << '\n';
    return kOk;
}

// ---- align ----

struct AlignOptions {
    std::string source, target, mapping, out, summary;
    std::string method = "lp";
};

void add_align(CLI::App& app, AlignOptions& o)
{
    app.add_option("--source", o.source, "source embedding file")->required()->check(CLI::ExistingFile);
    app.add_option("--target", o.target, "target embedding file")->required()->check(CLI::ExistingFile);
    app.add_option("--mapping", o.mapping, "source -> target mapping")->required()->check(CLI::ExistingFile);
    app.add_option("--method", o.method, "lp or procrustes")->check(CLI::IsMember({"lp", "procrustes"}));
    app.add_option("--out", o.out, "projection file to write")->required();
    app.add_option("--summary", o.summary, "JSON fit summary");
}

int cmd_align(const CLI::App& sub, const AlignOptions& o, std::ostream& out)
{
    echo_config(sub, out);
    const auto source = read_embeddings(fs::path(o.source), "source");
    const auto target = read_embeddings(fs::path(o.target), "target");
    const auto rows = common_rows(source, target, load_mapping(o.mapping));
    const auto P = o.method == "lp" ? fit_linear_projection(rows.source, rows.target)
                                    : fit_procrustes(rows.source, rows.target);
    write_projection(fs::path(o.out), P);

    nlohmann::ordered_json summary = {{"method", to_string(P.kind)},
                                      {"common_rows", rows.source.rows()},
                                      {"excluded", rows.excluded},
                                      {"residual", P.fit_residual},
                                      {"rank", P.rank},
                                      {"degenerate", P.degenerate}};
    if (P.kind == ProjectionKind::orthogonal) summary["orthogonality_error"] = orthogonality_error(P.W);
    if (!o.summary.empty()) {
        auto f = open_output(o.summary);
        f << summary.dump(2) << '\n';
    }
    out << "method " << o.method << ", " << rows.source.rows() << " common rows, residual "
        << format_double(P.fit_residual) << '\n';
    if (P.kind == ProjectionKind::orthogonal)
        out << "orthogonality error " << format_double(orthogonality_error(P.W)) << '\n';
    return kOk;
}

// ---- eval ----

struct EvalOptions {
    std::string embeddings, catalog, sessions, brand, mapping, projection, out;
    std::string split = "test";
    std::uint64_t split_seed = 42;
    std::string mode = "cosine";
    std::string pool = "market";
    std::vector<std::size_t> ks;
    bool cross_brand = false;
    bool reverse_mapping = false;
    double max_missing = 0.5;
};

void add_eval(CLI::App& app, EvalOptions& o)
{
    app.add_option("--embeddings", o.embeddings, "embedding file")->required()->check(CLI::ExistingFile);
    app.add_option("--catalog", o.catalog, "catalog file")->required()->check(CLI::ExistingFile);
    app.add_option("--sessions", o.sessions, "session file of the test brand")->required()->check(CLI::ExistingFile);
    app.add_option("--brand", o.brand, "brand tag of the sessions")->required();
    app.add_option("--split", o.split, "sessions to evaluate")->check(CLI::IsMember(kSplits));
    app.add_option("--split-seed", o.split_seed, "seed of the 8:1:1 session split");
    app.add_option("--mode", o.mode, "cosine or model")->check(CLI::IsMember({"cosine", "model"}));
    app.add_option("--k", o.ks, "cutoff, repeatable (default 10 and 100)")->check(CLI::PositiveNumber);
    app.add_option("--pool", o.pool, "market or global")->check(CLI::IsMember({"market", "global"}));
    app.add_flag("--cross-brand", o.cross_brand, "look hotels up through --mapping");
    app.add_option("--mapping", o.mapping, "source -> target mapping")->check(CLI::ExistingFile);
    app.add_flag("--reverse-mapping", o.reverse_mapping,
                 "the embeddings belong to the mapping's target brand");
    app.add_option("--apply-projection", o.projection, "projection applied to the embeddings first")
        ->check(CLI::ExistingFile);
    app.add_option("--max-missing", o.max_missing, "fail when more queries than this fraction are missing")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--out", o.out, "metrics file (JSON lines)");
}

int cmd_eval(const CLI::App& sub, EvalOptions& o, std::ostream& out, std::ostream& err)
{
    if (o.ks.empty()) o.ks = {10, 100};
    check_usage([&] {
        if (o.cross_brand && o.mapping.empty()) throw ConfigError("--cross-brand requires --mapping");
    });
    echo_config(sub, out);

    const auto catalog = load_catalog(o.catalog);
    const auto sessions = pick_split(load_sessions(o.sessions, catalog, o.brand, &err), o.split, o.split_seed);
    auto space = read_embeddings(fs::path(o.embeddings));
    if (!o.projection.empty()) space = apply_projection(space, read_projection(fs::path(o.projection)));

    const auto mode = parse_score_mode(o.mode);
    const auto pool = parse_pool_policy(o.pool);
    MetricsReport report;
    if (o.cross_brand) {
        auto mapping = load_mapping(o.mapping);
        if (o.reverse_mapping) mapping = mapping.inverted();
        report = cross_brand_evaluate(sessions, catalog, space, mapping, mode, o.ks, pool);
    } else {
        report = evaluate(sessions, catalog, space, mode, o.ks, pool);
    }

    if (!o.out.empty()) {
        auto f = open_output(o.out);
        write_metrics(f, report);
    }
    for (const auto& r : report.rows) {
        const auto tag = to_string(r.setting) + " " + to_string(r.mode);
        out << tag << " hits@" << r.k << ' ' << format_double(r.hits) << '\n';
        out << tag << " mrr@" << r.k << ' ' << format_double(r.mrr) << '\n';
    }
    out << "events " << report.n_events << ", skipped queries " << report.skipped_queries
        << ", missing candidates " << report.missing_candidates << '\n';
    if (report.skipped_fraction() > o.max_missing) {
        err << "error: " << report.skipped_queries << " of " << report.n_events + report.skipped_queries
            << " queries have no embedding\n";
        return kRuntimeError;
    }
    return kOk;
}

// ---- repro ----

struct ReproOptions {
    bool quick = false;
    std::string out = "repro";
    std::uint64_t seed = 42;
};

void add_repro(CLI::App& app, ReproOptions& o)
{
    app.add_flag("--quick", o.quick, "small world, well under a minute");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--seed", o.seed, "experiment seed");
}

int cmd_repro(const CLI::App& sub, const ReproOptions& o, std::ostream& out, std::ostream& err)
{
    echo_config(sub, out);
    const auto cfg = o.quick ? ReproConfig::quick(o.seed) : ReproConfig::reference(o.seed);
    const auto result = run_reproduction(cfg, [&](const std::string& msg) { err << msg << '\n'; });
    const fs::path dir(o.out);
    write_repro_outputs(dir, cfg, result);

    std::ifstream table(dir / "table1.txt");
    out << table.rdbuf();
    for (const auto& c : result.checks)
        out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    return result.all_passed() ? kOk : kCheckFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"hotel embeddings across brands: generate, train, align, evaluate"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "help for every subcommand");

    GenOptions gen;
    TrainOptions tr;
    AlignOptions al;
    EvalOptions ev;
    ReproOptions rp;

    app.option_defaults()->always_capture_default();
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic two-brand world");
    auto* train_cmd = app.add_subcommand("train", "train one brand's embeddings");
    auto* align_cmd = app.add_subcommand("align", "fit a projection between two embedding files");
    auto* eval_cmd = app.add_subcommand("eval", "next-hotel prediction metrics");
    auto* repro_cmd = app.add_subcommand("repro", "run the full reference experiment");
    add_gen(*gen_cmd, gen);
    add_train(*train_cmd, tr);
    add_align(*align_cmd, al);
    add_eval(*eval_cmd, ev);
    add_repro(*repro_cmd, rp);
    for (auto* sub : {gen_cmd, train_cmd, align_cmd, eval_cmd, repro_cmd})
        sub->set_config("--config", "", "read flags from a key = value file (flags win)");

    std::vector<const char*> argv{"hotelalign"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (*gen_cmd) return cmd_gen(*gen_cmd, gen, out);
        if (*train_cmd) return cmd_train(*train_cmd, tr, out, err);
        if (*align_cmd) return cmd_align(*align_cmd, al, out);
        if (*eval_cmd) return cmd_eval(*eval_cmd, ev, out, err);
        if (*repro_cmd) return cmd_repro(*repro_cmd, rp, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kUsageError;
}

}  // namespace hotelalign::cli
