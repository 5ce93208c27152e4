#include "hotelalign/repro.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hotelalign/rng.hpp"
#include "hotelalign/train.hpp"

namespace hotelalign {

namespace {

const std::vector<std::size_t> kTableKs{10, 100};

std::string lambda_label(double lambda)
{
    std::ostringstream s;
    s << "hotel2vec_DA(lambda=" << lambda << ")";
    return s.str();
}

std::size_t count_pairs(const SessionSet& sessions, std::size_t window)
{
    std::size_t n = 0;
    for (const auto& s : sessions.sessions) n += make_pairs(s, window).size();
    return n;
}

TableCell to_cell(const std::string& name, const std::string& test_brand, const MetricsReport& r)
{
    return {name,
            test_brand,
            r.rows.front().setting,
            r.row(10).hits,
            r.row(100).hits,
            r.row(10).mrr,
            r.row(100).mrr,
            r.n_events};
}

void note(const ProgressSink& progress, const std::string& msg)
{
    if (progress) progress(msg);
}

std::string fmt(double v, int precision = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

}  // namespace

ReproConfig ReproConfig::reference(std::uint64_t seed)
{
    ReproConfig cfg;
    cfg.seed = seed;
    cfg.world.seed = seed;
    cfg.world.n_markets = 5;
    cfg.world.hotels_per_market = 200;
    cfg.world.n_sessions_per_brand = 50000;
    cfg.world.brand_bias_strength = 0.5;
    cfg.train.seed = seed;
    cfg.train.dim = 32;
    cfg.train.epochs = 3;
    // With nonnegative tied embeddings every negative costs at least ln 2, and
    // more than one negative per pair drives the whole network to zero.
    cfg.train.n_neg = 1;
    cfg.train.init_scale = 16;
    cfg.train.learning_rate = 0.005;
    return cfg;
}

ReproConfig ReproConfig::quick(std::uint64_t seed)
{
    ReproConfig cfg = reference(seed);
    cfg.world.n_markets = 3;
    cfg.world.hotels_per_market = 200;
    cfg.world.n_sessions_per_brand = 6000;
    return cfg;
}

bool ReproResult::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const TableCell& ReproResult::cell(const std::string& embeddings, const std::string& test_brand) const
{
    for (const auto& c : table)
        if (c.embeddings == embeddings && c.test_brand == test_brand) return c;
    throw std::out_of_range("no table cell " + embeddings + " / " + test_brand);
}

double mean_mapped_distance(const EmbeddingSpace& target, const EmbeddingSpace& source, const BrandMapping& mapping)
{
    double sum = 0;
    std::size_t n = 0;
    for (const auto& [s, t] : mapping.pairs()) {
        auto rs = source.find(s);
        auto rt = target.find(t);
        if (!rs || !rt) continue;
        sum += (target.row(*rt) - source.row(*rs)).norm();
        ++n;
    }
    if (n == 0) throw EvalError("no mapped hotel present in both spaces");
    return sum / double(n);
}

ReproResult run_reproduction(const ReproConfig& cfg, const ProgressSink& progress)
{
    if (cfg.lambdas.empty()) throw std::invalid_argument("repro: at least one lambda required");
    ReproResult res;

    const World world = generate_world(cfg.world);
    const auto& catalog = world.catalog;
    const std::string source_brand = world.brands[0];
    const std::string target_brand = world.brands[1];
    const BrandMapping& mapping = world.mapping;  // source -> target
    const BrandMapping reverse = mapping.inverted();

    const auto source_split = split_sessions(generate_sessions(world, source_brand, cfg.world), cfg.ratios,
                                             derive_seed(cfg.seed, "split." + source_brand));
    const auto target_split = split_sessions(generate_sessions(world, target_brand, cfg.world), cfg.ratios,
                                             derive_seed(cfg.seed, "split." + target_brand));
    note(progress, "world: " + std::to_string(catalog.size()) + " hotels, " +
                       std::to_string(source_split.train.size()) + " train sessions per brand");

    // source brand
    TrainConfig source_cfg = cfg.train;
    source_cfg.lambda = 0;
    auto source_run = train(source_split.train, catalog, source_cfg);
    res.final_loss.push_back(source_run.epoch_mean_loss.back());
    const auto source_space = export_embeddings(source_run.params, catalog, source_brand);
    note(progress, "trained " + source_brand + " (loss " + fmt(source_run.epoch_mean_loss.back()) + ")");

    // target brand: every run starts from the same init as the source run
    TrainConfig target_cfg = cfg.train;
    const std::size_t total_steps = count_pairs(target_split.train, target_cfg.window) * target_cfg.epochs;
    target_cfg.eval_every = std::max<std::size_t>(1, total_steps / std::max<std::size_t>(1, cfg.curve_points));

    auto curve_recorder = [&](std::vector<CurvePoint>& curve) {
        return [&catalog, &target_split, &curve](std::size_t step, const EmbeddingSpace& space) {
            const auto r = evaluate(target_split.test, catalog, space, ScoreMode::model, kTableKs);
            curve.push_back({step, r.row(10).hits, r.row(100).hits});
        };
    };

    target_cfg.lambda = 0;
    auto plain_run = train(target_split.train, catalog, target_cfg, nullptr, nullptr, curve_recorder(res.curve_plain));
    res.final_loss.push_back(plain_run.epoch_mean_loss.back());
    const auto plain_space = export_embeddings(plain_run.params, catalog, target_brand);
    note(progress, "trained " + target_brand + " cold start (loss " + fmt(plain_run.epoch_mean_loss.back()) + ")");

    std::vector<EmbeddingSpace> da_spaces;
    for (std::size_t i = 0; i < cfg.lambdas.size(); ++i) {
        TrainConfig da_cfg = target_cfg;
        da_cfg.lambda = cfg.lambdas[i];
        std::vector<CurvePoint> scratch;
        auto run = train(target_split.train, catalog, da_cfg, &source_space, &mapping,
                         curve_recorder(i == 0 ? res.curve_da : scratch));
        res.final_loss.push_back(run.epoch_mean_loss.back());
        da_spaces.push_back(export_embeddings(run.params, catalog, target_brand));
        note(progress, "trained " + target_brand + " with lambda=" + fmt(cfg.lambdas[i], 2) + " (loss " +
                           fmt(run.epoch_mean_loss.back()) + ")");
    }

    // post-hoc alignment of the source space onto the cold-start target space
    const auto rows = common_rows(source_space, plain_space, mapping);
    res.lp_rows = static_cast<std::size_t>(rows.source.rows());
    res.lp = fit_linear_projection(rows.source, rows.target);
    res.procrustes = fit_procrustes(rows.source, rows.target);
    const auto lp_space = apply_projection(source_space, res.lp);
    note(progress, "fitted LP on " + std::to_string(res.lp_rows) + " common hotels (residual " +
                       fmt(res.lp.fit_residual) + ")");

    // zero-shot table: every configuration on both brands' test sessions
    struct Entry {
        std::string name;
        const EmbeddingSpace* space;
        std::string native_brand;
    };
    std::vector<Entry> entries{{"hotel2vec_" + source_brand, &source_space, source_brand},
                               {"hotel2vec_" + target_brand, &plain_space, target_brand},
                               {"LP", &lp_space, source_brand}};
    for (std::size_t i = 0; i < cfg.lambdas.size(); ++i)
        entries.push_back({lambda_label(cfg.lambdas[i]), &da_spaces[i], target_brand});

    for (const auto& e : entries) {
        for (const auto* split : {&target_split, &source_split}) {
            const auto& test = split->test;
            MetricsReport r;
            if (test.brand == e.native_brand) {
                r = evaluate(test, catalog, *e.space, ScoreMode::cosine, kTableKs);
            } else {
                // mapping must run space brand -> test brand
                const auto& m = e.native_brand == source_brand ? mapping : reverse;
                r = cross_brand_evaluate(test, catalog, *e.space, m, ScoreMode::cosine, kTableKs);
            }
            res.table.push_back(to_cell(e.name, test.brand, r));
        }
    }

    // supervised setting: the network's own score on the target brand
    {
        const auto plain = evaluate(target_split.test, catalog, plain_space, ScoreMode::model, kTableKs);
        const auto da = evaluate(target_split.test, catalog, da_spaces.front(), ScoreMode::model, kTableKs);
        res.plain_model_hits10 = plain.row(10).hits;
        res.plain_model_hits100 = plain.row(100).hits;
        res.da_model_hits10 = da.row(10).hits;
        res.da_model_hits100 = da.row(100).hits;
    }

    res.distance_plain = mean_mapped_distance(plain_space, source_space, mapping);
    for (const auto& s : da_spaces) res.distance_da.push_back(mean_mapped_distance(s, source_space, mapping));

    // ---- ordering checks ----
    const std::string da_name = lambda_label(cfg.lambdas.front());
    {
        const auto& da = res.cell(da_name, source_brand);
        const auto& lp = res.cell("LP", target_brand);
        res.checks.push_back({"alignment-quality",
                              da.hits100 > lp.hits100,
                              "zero-shot hits@100: DA on " + source_brand + " test " + fmt(da.hits100) +
                                  " vs LP on " + target_brand + " test " + fmt(lp.hits100)});
    }
    {
        bool ok = res.distance_da.front() < res.distance_plain;
        std::string detail = "mean mapped distance: lambda=0 " + fmt(res.distance_plain) + ", lambda=" +
                             fmt(cfg.lambdas.front(), 2) + " " + fmt(res.distance_da.front());
        for (std::size_t i = 1; i < cfg.lambdas.size(); ++i) {
            ok = ok && res.distance_da[i] > res.distance_da.front() && res.distance_da[i] < res.distance_plain;
            detail += ", lambda=" + fmt(cfg.lambdas[i], 2) + " " + fmt(res.distance_da[i]);
        }
        res.checks.push_back({"da-closeness", ok, detail});
    }
    {
        const auto& da = res.cell(da_name, target_brand);
        const auto& plain = res.cell("hotel2vec_" + target_brand, target_brand);
        res.checks.push_back({"in-brand-non-degradation",
                              da.hits100 >= 0.9 * plain.hits100,
                              "in-brand hits@100: DA " + fmt(da.hits100) + " vs 0.9 x cold start " +
                                  fmt(0.9 * plain.hits100)});
    }
    res.checks.push_back({"supervised-improvement",
                          res.da_model_hits100 >= res.plain_model_hits100,
                          "model-scoring hits@100: DA " + fmt(res.da_model_hits100) + " vs cold start " +
                              fmt(res.plain_model_hits100)});
    {
        bool ok = !res.curve_da.empty() && !res.curve_plain.empty();
        std::string detail;
        if (ok) {
            const auto& first_da = res.curve_da.front();
            const auto& first_plain = res.curve_plain.front();
            const double target = res.curve_plain.back().hits100;
            auto reach = std::find_if(res.curve_da.begin(), res.curve_da.end(),
                                      [&](const CurvePoint& p) { return p.hits100 >= target; });
            const bool earlier = reach != res.curve_da.end() && reach->step < res.curve_plain.back().step;
            ok = first_da.hits100 > first_plain.hits100 && earlier;
            detail = "first checkpoint hits@100: DA " + fmt(first_da.hits100) + " vs cold start " +
                     fmt(first_plain.hits100) + "; cold-start final " + fmt(target) + " at step " +
                     std::to_string(res.curve_plain.back().step) + ", DA reaches it at step " +
                     (reach == res.curve_da.end() ? std::string("never") : std::to_string(reach->step));
        } else {
            detail = "no curve checkpoints recorded";
        }
        res.checks.push_back({"jump-start", ok, detail});
    }
    return res;
}

void write_repro_outputs(const std::filesystem::path& dir, const ReproConfig& cfg, const ReproResult& res)
{
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name);
        if (!out) throw DataError("cannot write " + (dir / name).string());
        return out;
    };

    {
        auto out = open("table1.jsonl");
        for (const auto& c : res.table) {
            nlohmann::ordered_json obj = {{"embeddings", c.embeddings}, {"test_brand", c.test_brand},
                                          {"setting", to_string(c.setting)}, {"hits@100", c.hits100},
                                          {"hits@10", c.hits10},           {"mrr@10", c.mrr10},
                                          {"mrr@100", c.mrr100},           {"n_events", c.n_events}};
            out << obj.dump() << '\n';
        }
    }
    {
        auto out = open("table1.txt");
        const auto& brands = cfg.world.brands;
        char line[256];
        std::snprintf(line, sizeof line, "%-28s | %-35s | %-35s\n", "embeddings", ("test " + brands[1]).c_str(),
                      ("test " + brands[0]).c_str());
        out << line;
        std::snprintf(line, sizeof line, "%-28s | %8s %8s %8s %8s | %8s %8s %8s %8s\n", "", "hits@100", "hits@10",
                      "MRR@10", "MRR@100", "hits@100", "hits@10", "MRR@10", "MRR@100");
        out << line;
        for (std::size_t i = 0; i + 1 < res.table.size(); i += 2) {
            const auto& a = res.table[i];
            const auto& b = res.table[i + 1];
            std::snprintf(line, sizeof line,
                          "%-28s | %8.4f %8.4f %8.4f %8.4f | %8.4f %8.4f %8.4f %8.4f\n", a.embeddings.c_str(),
                          a.hits100, a.hits10, a.mrr10, a.mrr100, b.hits100, b.hits10, b.mrr10, b.mrr100);
            out << line;
        }
    }
    {
        auto out = open("table2.jsonl");
        nlohmann::ordered_json plain = {{"approach", "hotel2vec_" + cfg.world.brands[1]},
                                        {"hits@10", res.plain_model_hits10},
                                        {"hits@100", res.plain_model_hits100}};
        nlohmann::ordered_json da = {{"approach", "hotel2vec_DA"},
                                     {"hits@10", res.da_model_hits10},
                                     {"hits@100", res.da_model_hits100}};
        out << plain.dump() << '\n' << da.dump() << '\n';
    }
    {
        auto out = open("curve_plain.jsonl");
        write_curve(out, res.curve_plain);
    }
    {
        auto out = open("curve_da.jsonl");
        write_curve(out, res.curve_da);
    }
    {
        auto out = open("alignment.json");
        nlohmann::ordered_json obj = {
            {"common_rows", res.lp_rows},
            {"lp_residual", res.lp.fit_residual},
            {"lp_rank", res.lp.rank},
            {"procrustes_residual", res.procrustes.fit_residual},
            {"procrustes_orthogonality_error", orthogonality_error(res.procrustes.W)},
            {"procrustes_degenerate", res.procrustes.degenerate},
            {"mean_distance_lambda0", res.distance_plain},
            {"mean_distance_da", res.distance_da},
            {"lambdas", cfg.lambdas},
            {"final_loss", res.final_loss},
        };
        out << obj.dump(2) << '\n';
    }
    {
        auto out = open("checks.txt");
        for (const auto& c : res.checks)
            out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    }
}

}  // namespace hotelalign
