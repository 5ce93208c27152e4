// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--expect-unmet 7,8] [--fixtures DIR]
//
// Exit status is 0 when the set of failing criteria equals the expected set
// (empty by default) and the reference table matches its frozen fixture.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli.hpp"
#include "helpers.hpp"
#include "hotelalign/align.hpp"
#include "hotelalign/repro.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace hotelalign;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// ---- 1 ----

Outcome gradient_correctness()
{
    double worst = 0;
    std::size_t coords = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const double lambda = seed % 2 ? 1.0 : 0.0;
        const auto variant = (seed / 2) % 2 ? RegVariant::squared_norm : RegVariant::norm;
        auto r = testutil::random_instance_check(1000 + seed, 1 + seed % 5, lambda, variant);
        worst = std::max(worst, r.worst);
        coords += r.checked;
    }
    return {worst < 1e-4, "max relative error " + num(worst) + " over 100 instances, " + std::to_string(coords) +
                              " coordinates (limit 1e-4)"};
}

// ---- 2 ----

Outcome metric_oracle()
{
    testutil::Fixture f;
    auto l = SpaceLookup::in_brand(f.space, f.cat);
    double worst = 0;
    bool ranks_ok = true;
    for (auto mode : {ScoreMode::cosine, ScoreMode::model}) {
        const auto* want = mode == ScoreMode::cosine ? testutil::Fixture::kCosineRanks : testutil::Fixture::kModelRanks;
        auto ranks = rank_events(f.events, f.cat, l, mode, PoolPolicy::market);
        ranks_ok = ranks_ok && std::equal(ranks.begin(), ranks.end(), want);
        const std::size_t ks[] = {1, 3, 10};
        auto r = evaluate_with(f.events, f.cat, l, mode, ks, PoolPolicy::market);
        for (const auto& row : testutil::Fixture::kExpected) {
            worst = std::max(worst, std::abs(r.row(std::size_t(row[0])).hits - row[1]));
            worst = std::max(worst, std::abs(r.row(std::size_t(row[0])).mrr - row[2]));
        }
    }

    // randomized fixtures: invariants, plus agreement with the sorting oracle
    std::size_t violations = 0, mismatched_ranks = 0;
    const std::size_t ks[] = {1, 2, 5, 10, 20, 100};
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng = make_rng(seed, "acceptance.metrics");
        std::vector<std::size_t> sizes;
        for (std::size_t m = 0, n = 1 + uniform_index(rng, 3); m < n; ++m) sizes.push_back(2 + uniform_index(rng, 12));
        auto cat = testutil::small_catalog(sizes, seed);
        std::vector<std::pair<std::string, std::vector<double>>> rows;
        for (HotelIndex h = 0; h < cat.size(); ++h) {
            if (uniform_real(rng, 0, 1) < 0.1) continue;
            rows.push_back({cat.id(h), {double(uniform_index(rng, 4)), double(uniform_index(rng, 4)),
                                        uniform_real(rng, 0, 1) < 0.5 ? 0.0 : uniform_real(rng, 0, 1)}});
        }
        if (rows.empty()) continue;
        auto space = testutil::make_space(rows);
        auto lookup = SpaceLookup::in_brand(space, cat);
        std::vector<PredictionEvent> events;
        for (int i = 0; i < 30; ++i) {
            HotelIndex q = uniform_index(rng, cat.size());
            auto members = cat.market_members(q);
            HotelIndex t = members[uniform_index(rng, members.size())];
            if (t != q && lookup.has(q)) events.push_back({q, t});
        }
        if (events.empty()) continue;
        const auto mode = seed % 2 ? ScoreMode::model : ScoreMode::cosine;
        auto ranks = rank_events(events, cat, lookup, mode, PoolPolicy::market);
        for (std::size_t i = 0; i < events.size(); ++i)
            if (ranks[i] != testutil::brute_rank(events[i], cat, lookup, mode, PoolPolicy::market)) ++mismatched_ranks;
        auto r = evaluate_with(events, cat, lookup, mode, ks, PoolPolicy::market);
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            const auto& row = r.rows[i];
            if (row.mrr > row.hits || row.mrr < 0 || row.hits > 1) ++violations;
            if (i > 0 && (row.hits < r.rows[i - 1].hits || row.mrr < r.rows[i - 1].mrr)) ++violations;
        }
    }
    const bool ok = worst <= 1e-12 && ranks_ok && violations == 0 && mismatched_ranks == 0;
    return {ok, "20-event fixture max deviation " + num(worst) + (ranks_ok ? ", ranks equal" : ", ranks differ") +
                    "; 1000 random fixtures: " + std::to_string(violations) + " invariant violations, " +
                    std::to_string(mismatched_ranks) + " rank mismatches"};
}

// ---- 3 ----

Outcome lp_recovery()
{
    double worst_lp = 0, worst_q = 0;
    std::size_t residual_violations = 0;
    auto random = [](Rng& rng, Eigen::Index r, Eigen::Index c) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform_real(rng, -1, 1);
        return m;
    };
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng = make_rng(seed, "acceptance.align");
        const Eigen::Index d = 2 + Eigen::Index(uniform_index(rng, 8));
        Matrix S = random(rng, 3 * d, d);
        Matrix R = random(rng, d, d);
        worst_lp = std::max(worst_lp, (fit_linear_projection(S, S * R).W - R).cwiseAbs().maxCoeff());
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd(random(rng, d, d)));
        Matrix Q = qr.householderQ();
        worst_q = std::max(worst_q, (fit_procrustes(S, S * Q).W - Q).cwiseAbs().maxCoeff());
        // planted and unrelated targets
        for (const Matrix& t : {Matrix(S * R), random(rng, 3 * d, d)})
            if (fit_procrustes(S, t).fit_residual + 1e-12 < fit_linear_projection(S, t).fit_residual)
                ++residual_violations;
    }
    const bool ok = worst_lp < 1e-6 && worst_q < 1e-6 && residual_violations == 0;
    return {ok, "max |W - R| " + num(worst_lp) + ", max |W - Q| " + num(worst_q) +
                    " over 50 instances; procrustes residual below least squares on " +
                    std::to_string(residual_violations) + " instances"};
}

// ---- 4 to 8: reference world ----

// Values from the frozen reference run (seed 42). A rerun must reproduce them.
struct Frozen {
    double da_on_source, lp_on_target;
    double distance_plain, distance_da1, distance_da05;
    double da_in_brand, plain_in_brand;
    double da_model, plain_model;
    double first_da, first_plain;
};

constexpr Frozen kFrozen{
    0.7492970068112229,  0.7196509863429439,                       // zero-shot
    0.5341876670874249,  0.01819124772970769, 0.026794605802530427,  // distances
    0.7187782578117151,  0.7503767708228675,                       // in-brand
    0.718627549482568,   0.7512810207977494,                       // model scoring
    0.680096453330654,   0.649050537526374,                        // first checkpoint
};
constexpr double kFixtureTolerance = 1e-9;

bool near(double a, double b)
{
    return std::abs(a - b) <= kFixtureTolerance;
}

std::string fixture_note(bool ok)
{
    return ok ? "; matches frozen reference" : "; DIFFERS from frozen reference";
}

// Compares every numeric cell of two table1.jsonl files.
bool tables_match(const fs::path& got, const fs::path& want, std::string& why)
{
    std::ifstream a(got), b(want);
    if (!b) {
        why = "missing fixture " + want.string();
        return false;
    }
    std::string la, lb;
    std::size_t line = 0;
    while (true) {
        const bool ga = bool(std::getline(a, la)), gb = bool(std::getline(b, lb));
        if (!ga && !gb) return true;
        ++line;
        if (ga != gb) {
            why = "row count differs at line " + std::to_string(line);
            return false;
        }
        auto ja = nlohmann::json::parse(la), jb = nlohmann::json::parse(lb);
        for (auto it = jb.begin(); it != jb.end(); ++it) {
            if (!ja.contains(it.key())) {
                why = "line " + std::to_string(line) + " lacks " + it.key();
                return false;
            }
            const auto& va = ja[it.key()];
            const bool same = it->is_number_float() ? near(va.get<double>(), it->get<double>()) : va == *it;
            if (!same) {
                why = "line " + std::to_string(line) + " " + it.key() + ": " + va.dump() + " vs " + it->dump();
                return false;
            }
        }
    }
}

// ---- 9 ----

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism()
{
    testutil::TempDir a, b;
    std::ostringstream sink;
    cli::run({"repro", "--quick", "--out", a.path().string()}, sink, sink);
    cli::run({"repro", "--quick", "--out", b.path().string()}, sink, sink);
    std::size_t compared = 0;
    std::vector<std::string> differing;
    for (const char* f : {"table1.jsonl", "table2.jsonl", "curve_plain.jsonl", "curve_da.jsonl", "alignment.json"}) {
        if (!fs::exists(a / f) || !fs::exists(b / f)) {
            differing.push_back(std::string(f) + " (missing)");
            continue;
        }
        ++compared;
        if (slurp(a / f) != slurp(b / f)) differing.push_back(f);
    }
    std::string detail = std::to_string(compared) + " metric and curve files compared";
    for (const auto& d : differing) detail += ", differs: " + d;
    return {differing.empty() && compared == 5, detail};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    std::vector<int> expect_unmet;
    std::string fixtures = HOTELALIGN_FIXTURE_DIR;
    app.add_option("--expect-unmet", expect_unmet, "criteria known not to hold")->delimiter(',');
    app.add_option("--fixtures", fixtures, "directory with frozen reference tables");
    CLI11_PARSE(app, argc, argv);

    std::set<int> failed;
    auto report = [&](int n, const std::string& name, const Outcome& o) {
        std::cout << (o.pass ? "PASS " : "FAIL ") << n << ' ' << name << ": " << o.detail << std::endl;
        if (!o.pass) failed.insert(n);
    };

    report(1, "gradient-correctness", gradient_correctness());
    report(2, "metric-oracle", metric_oracle());
    report(3, "lp-recovery", lp_recovery());

    const auto cfg = ReproConfig::reference();
    const auto res = run_reproduction(cfg);
    testutil::TempDir out;
    write_repro_outputs(out.path(), cfg, res);
    const std::string src = cfg.world.brands[0], tgt = cfg.world.brands[1];
    const auto& F = kFrozen;

    {
        const double da = res.cell("hotel2vec_DA(lambda=1)", src).hits100;
        const double lp = res.cell("LP", tgt).hits100;
        const bool fx = near(da, F.da_on_source) && near(lp, F.lp_on_target);
        report(4, "alignment-quality",
               {da > lp && fx, "zero-shot hits@100 DA(lambda=1) on " + src + " test " + num(da) + " vs LP on " + tgt +
                                   " test " + num(lp) + fixture_note(fx)});
    }
    {
        const double d0 = res.distance_plain, d1 = res.distance_da[0], d05 = res.distance_da[1];
        const bool fx = near(d0, F.distance_plain) && near(d1, F.distance_da1) && near(d05, F.distance_da05);
        report(5, "da-closeness",
               {d1 < d0 && d05 > d1 && d05 < d0 && fx, "mean mapped distance lambda=1 " + num(d1) + " < lambda=0.5 " +
                                                           num(d05) + " < lambda=0 " + num(d0) + fixture_note(fx)});
    }
    {
        const double da = res.cell("hotel2vec_DA(lambda=1)", tgt).hits100;
        const double plain = res.cell("hotel2vec_" + tgt, tgt).hits100;
        const bool fx = near(da, F.da_in_brand) && near(plain, F.plain_in_brand);
        report(6, "in-brand-non-degradation",
               {da >= 0.9 * plain && fx, "in-brand hits@100 DA " + num(da) + " vs 0.9 x cold start " +
                                             num(0.9 * plain) + fixture_note(fx)});
    }
    {
        const bool fx = near(res.da_model_hits100, F.da_model) && near(res.plain_model_hits100, F.plain_model);
        report(7, "supervised-improvement",
               {res.da_model_hits100 >= res.plain_model_hits100 && fx,
                "model-scoring hits@100 DA " + num(res.da_model_hits100) + " vs single brand " +
                    num(res.plain_model_hits100) + fixture_note(fx)});
    }
    {
        const auto& cd = res.curve_da;
        const auto& cp = res.curve_plain;
        const bool have = !cd.empty() && !cp.empty();
        const double first_da = have ? cd.front().hits100 : 0, first_plain = have ? cp.front().hits100 : 0;
        std::string reached = "never";
        bool earlier = false;
        if (have) {
            auto it = std::find_if(cd.begin(), cd.end(), [&](const CurvePoint& p) { return p.hits100 >= cp.back().hits100; });
            if (it != cd.end()) {
                reached = std::to_string(it->step);
                earlier = it->step < cp.back().step;
            }
        }
        const bool fx = near(first_da, F.first_da) && near(first_plain, F.first_plain);
        report(8, "jump-start",
               {have && first_da > first_plain && earlier && fx,
                "first checkpoint hits@100 DA " + num(first_da) + " vs cold start " + num(first_plain) +
                    "; cold start ends at " + num(have ? cp.back().hits100 : 0) + " (step " +
                    std::to_string(have ? cp.back().step : 0) + "), DA reaches it at step " + reached +
                    fixture_note(fx)});
    }

    report(9, "determinism", determinism());

    std::string why;
    const bool table_ok = tables_match(out / "table1.jsonl", fs::path(fixtures) / "reference_table1.jsonl", why);
    std::cout << "reference table " << (table_ok ? "matches frozen fixture" : "does not match: " + why) << std::endl;

    const std::set<int> expected(expect_unmet.begin(), expect_unmet.end());
    std::cout << "acceptance: " << 9 - failed.size() << " of 9 criteria hold";
    if (!expected.empty()) {
        std::cout << "; expected unmet:";
        for (int n : expected) std::cout << ' ' << n;
    }
    std::cout << std::endl;
    return failed == expected && table_ok ? 0 : 1;
}
