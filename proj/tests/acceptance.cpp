// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "veribond/capacity.hpp"
#include "veribond/collusion.hpp"
#include "veribond/engine.hpp"
#include "veribond/golden.hpp"
#include "veribond/jury.hpp"
#include "veribond/payout.hpp"
#include "veribond/presets.hpp"
#include "veribond/scenario.hpp"

namespace fs = std::filesystem;
using namespace veribond;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(VERIBOND_CLI_PATH) + " " + args;
    const int status = std::system(cmd.c_str());
    return status == -1 ? -1 : WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("veribond_acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

long double dp_tail(std::uint64_t N, std::uint64_t k, std::uint32_t n, std::uint32_t t) {
    std::vector<long double> prob(n + 1, 0.0L);
    prob[0] = 1.0L;
    for (std::uint32_t draw = 0; draw < n; ++draw) {
        std::vector<long double> next(n + 1, 0.0L);
        const long double remaining = static_cast<long double>(N - draw);
        for (std::uint32_t c = 0; c <= draw; ++c) {
            if (prob[c] == 0.0L) continue;
            const long double colluders_left = static_cast<long double>(k) - c;
            const long double honest_left = remaining - colluders_left;
            if (colluders_left > 0) next[c + 1] += prob[c] * (colluders_left / remaining);
            if (honest_left > 0) next[c] += prob[c] * (honest_left / remaining);
        }
        prob.swap(next);
    }
    long double tail = 0.0L;
    for (std::uint32_t c = n + 1; c-- > t;) tail += prob[c];
    return tail;
}

// --- criteria -------------------------------------------------------------

bool criterion_1_table1(std::string& detail) {
    const int rc = run_cli("collusion-table --check > /dev/null");
    detail = "collusion-table --check exit " + std::to_string(rc);
    return rc == 0;
}

bool criterion_2_table2(std::string& detail) {
    const int rc = run_cli("capacity-table --check > /dev/null");
    detail = "capacity-table --check exit " + std::to_string(rc);
    return rc == 0;
}

bool criterion_3_dominance(std::string& detail) {
    std::size_t cells = 0;
    for (std::uint32_t n = 11; n <= 101; n += 2) {
        for (const double p : {0.05, 0.10, 0.15, 0.20, 0.25, 0.30}) {
            const double log_bound = -2.0 * n * (0.5 - p) * (0.5 - p);
            const auto lim = exact_collusion_probability(CollusionQuery::limit(p, n));
            if (lim.log_tail > log_bound + 1e-12) {
                detail = "limit tail exceeds the bound at n=" + std::to_string(n);
                return false;
            }
            const auto fin = exact_collusion_probability(CollusionQuery::finite(
                10000, static_cast<std::uint64_t>(std::llround(p * 10000)), n));
            if (fin.log_tail > log_bound + 1e-12) {
                detail = "finite tail exceeds the bound at n=" + std::to_string(n);
                return false;
            }
            ++cells;
        }
    }
    const double checkpoint = hoeffding_bound(21, 0.1);
    if (!(checkpoint < 0.002)) {
        detail = "bound at n=21, p=0.1 not below 0.2%";
        return false;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu cells dominated; bound(21,0.1)=%.3e < 2e-3",
                  cells, checkpoint);
    detail = buf;
    return true;
}

bool criterion_4_oracle(std::string& detail) {
    std::size_t checked = 0;
    double worst = 0.0;
    for (std::uint64_t N = 1; N <= 60; ++N) {
        for (std::uint64_t k = 0; k <= N; ++k) {
            for (std::uint32_t n = 1; n <= 15 && n <= N; n += 2) {
                const std::uint32_t t = (n + 1) / 2;
                const long double want = dp_tail(N, k, n, t);
                const double got = std::exp(log_hypergeometric_tail(N, k, n, t));
                const double denom = std::max<double>(static_cast<double>(want), got);
                const double rel =
                    denom == 0.0 ? 0.0
                                 : std::abs(got - static_cast<double>(want)) / denom;
                worst = std::max(worst, rel);
                if (rel > 1e-12) {
                    char buf[160];
                    std::snprintf(buf, sizeof(buf),
                                  "N=%llu k=%llu n=%u: rel err %.3e > 1e-12",
                                  static_cast<unsigned long long>(N),
                                  static_cast<unsigned long long>(k), n, rel);
                    detail = buf;
                    return false;
                }
                ++checked;
            }
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu instances, worst relative error %.3e", checked, worst);
    detail = buf;
    return true;
}

bool criterion_5_sharpness(std::string& detail) {
    struct Row { const char* name; std::uint64_t posts; Rational ratio; };
    const std::vector<Row> rows = {{"SmallCommunity", 100000, Rational(1, 1000)},
                                   {"Reddit", 1300000, Rational(2, 1000)}};
    const auto configs = golden::capacity_configs();

    for (const auto& row : rows) {
        for (const auto& cfg : configs) {
            CapacityQuery q;
            q.lambda_per_hour = dispute_rate_from_volume(
                static_cast<double>(row.posts), row.ratio.to_double());
            q.panel = cfg.panel;
            q.hours_per_case = cfg.hours_per_case.to_double();
            q.avail_hours_per_day = cfg.avail_hours_per_day.to_double();
            const std::uint64_t n_min = min_jurors_exact(
                row.posts, row.ratio, cfg.panel, cfg.hours_per_case, cfg.avail_hours_per_day);
            const auto n_low =
                static_cast<std::uint64_t>(std::ceil(0.8 * static_cast<double>(n_min)));

            const double target_arrivals = row.posts > 500000 ? 7e5 : 4e5;
            const double horizon = target_arrivals / q.lambda_per_hour;
            ServiceDist service{ServiceKind::Deterministic, q.hours_per_case, 0.5};

            for (std::uint64_t seed = 1; seed <= 3; ++seed) {
                Rng rng_stable(seed);
                const StabilityReport ok =
                    verify_stability(q, n_min, rng_stable, service, horizon);
                if (ok.verdict != StabilityVerdict::Stable || ok.littles_residual >= 0.05) {
                    char buf[200];
                    std::snprintf(buf, sizeof(buf),
                                  "%s/%s N=%llu seed=%llu: verdict %s, littles %.4f",
                                  row.name, cfg.name.c_str(),
                                  static_cast<unsigned long long>(n_min),
                                  static_cast<unsigned long long>(seed),
                                  stability_verdict_name(ok.verdict), ok.littles_residual);
                    detail = buf;
                    return false;
                }

                Rng rng_div(seed + 100);
                const StabilityReport bad =
                    verify_stability(q, n_low, rng_div, service, horizon);
                const double want_slope =
                    q.lambda_per_hour * q.panel * q.hours_per_case -
                    static_cast<double>(n_low) * q.avail_hours_per_day;
                if (bad.verdict != StabilityVerdict::Divergent ||
                    std::abs(bad.backlog_slope - want_slope) > 0.2 * want_slope) {
                    char buf[220];
                    std::snprintf(buf, sizeof(buf),
                                  "%s/%s N=%llu seed=%llu: verdict %s, slope %.2f vs %.2f",
                                  row.name, cfg.name.c_str(),
                                  static_cast<unsigned long long>(n_low),
                                  static_cast<unsigned long long>(seed),
                                  stability_verdict_name(bad.verdict), bad.backlog_slope,
                                  want_slope);
                    detail = buf;
                    return false;
                }
            }
        }
    }
    detail = "6 rows x {N_min stable, ceil(0.8 N_min) divergent} x 3 seeds";
    return true;
}

bool criterion_6_conservation(std::string& detail) {
    Rng rng(424242);
    for (int trial = 0; trial < 10000; ++trial) {
        const Money beta(1 + rng.uniform_index(50'000'000));
        PayoutPolicy policy;
        policy.platform_fraction =
            Rational(static_cast<std::int64_t>(rng.uniform_index(45)), 100);
        policy.jury_pool_fraction =
            Rational(static_cast<std::int64_t>(1 + rng.uniform_index(54)), 100);
        policy.juror_fee_curve = rng.bernoulli(0.25) ? FeeCurve::LogScale : FeeCurve::Flat;
        const std::size_t jurors = 1 + 2 * rng.uniform_index(20);
        std::vector<ParticipantId> ids;
        for (std::size_t j = 0; j < jurors; ++j) ids.push_back("j" + std::to_string(j));
        const Payout p = distribute_forfeited_bond(beta, policy, ids);
        if (p.total() != beta) {
            detail = "payout draw " + std::to_string(trial) + " broke conservation";
            return false;
        }
    }

    for (int trial = 0; trial < 100; ++trial) {
        ScenarioConfig cfg;
        cfg.seed = 9000 + trial;
        cfg.contests = 2 + rng.uniform_index(4);
        cfg.beta_minor = 37 + rng.uniform_index(5000);
        cfg.viewers = 4;
        cfg.evaluators_per_contest = rng.bernoulli(0.5) ? 2 : 0;
        cfg.engine.jury.panel_size = rng.bernoulli(0.5) ? 3 : 5;
        cfg.engine.jury.bench_size = cfg.engine.jury.panel_size;

        AgentGroup creators;
        creators.kind = StrategyKind::HonestCreator;
        creators.count = 2;
        creators.accuracy = rng.uniform_real();
        AgentGroup challengers;
        challengers.kind = StrategyKind::DiligentChallenger;
        challengers.count = 2;
        challengers.detection_skill = rng.uniform_real();
        AgentGroup troll;
        troll.kind = StrategyKind::FrivolousChallenger;
        troll.count = 1;
        troll.challenge_rate = rng.uniform_real() * 0.6;
        AgentGroup jurors;
        jurors.kind = StrategyKind::DiligentJuror;
        jurors.count = 2 * cfg.engine.jury.panel_size + 2;
        jurors.error_rate = rng.uniform_real() * 0.4;
        AgentGroup lazy;
        lazy.kind = StrategyKind::LazyJuror;
        lazy.count = 2;
        lazy.abstain_prob = rng.uniform_real() * 0.7;
        lazy.bond_decline_prob = rng.uniform_real() * 0.4;
        cfg.agents = {creators, challengers, troll, jurors, lazy};

        const ScenarioRun run = run_scenario(cfg);
        if (run.metrics.escrow_residual != 0) {
            detail = "scenario " + std::to_string(trial) + " residual " +
                     std::to_string(run.metrics.escrow_residual);
            return false;
        }
    }
    detail = "10000 payout draws exact; 100 randomized scenarios residual 0";
    return true;
}

bool criterion_7_empirical(std::string& detail) {
    PanelSamplingQuery q;
    q.pool = 10000;
    q.colluders = 3000;
    q.panel = 11;
    Rng rng(777777);
    const EmpiricalRate r = empirical_collusion_rate(q, 100000, rng, 3.0);
    const double target = 7.81e-02;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "rate %.5f, Wilson 3-sigma [%.5f, %.5f], target %.5f",
                  r.rate, r.wilson_low, r.wilson_high, target);
    detail = buf;
    return r.contains(target);
}

bool criterion_8_determinism(std::string& detail) {
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    if (run_cli("simulate --bundled mixed-adversarial --out " + a.string() +
                " --verify-replay > /dev/null") != 0) {
        detail = "simulate run A failed or replay diverged";
        return false;
    }
    if (run_cli("simulate --bundled mixed-adversarial --out " + b.string() +
                " --verify-replay > /dev/null") != 0) {
        detail = "simulate run B failed or replay diverged";
        return false;
    }
    if (slurp(a / "metrics.json") != slurp(b / "metrics.json") ||
        slurp(a / "metrics.csv") != slurp(b / "metrics.csv") ||
        slurp(a / "events.jsonl") != slurp(b / "events.jsonl")) {
        detail = "same-seed simulate runs differ";
        return false;
    }

    const fs::path t = scratch("det_tables");
    if (run_cli("collusion-table --format csv --out " + (t / "x1.csv").string() +
                " > /dev/null") != 0 ||
        run_cli("collusion-table --format csv --out " + (t / "x2.csv").string() +
                " > /dev/null") != 0 ||
        slurp(t / "x1.csv") != slurp(t / "x2.csv")) {
        detail = "collusion-table runs differ";
        return false;
    }
    if (run_cli("capacity-table --format csv --out " + (t / "y1.csv").string() +
                " > /dev/null") != 0 ||
        run_cli("capacity-table --format csv --out " + (t / "y2.csv").string() +
                " > /dev/null") != 0 ||
        slurp(t / "y1.csv") != slurp(t / "y2.csv")) {
        detail = "capacity-table runs differ";
        return false;
    }
    detail = "byte-identical reruns; event-log replay hash verified";
    return true;
}

bool criterion_9_reputation(std::string& detail) {
    Rng rng(31337);
    double worst_gap = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        JurorProfile p;
        p.visibility = rng.uniform_real() * 3.0;
        p.weight_prosocial = rng.uniform_real() * 2.0;
        p.weight_monetary = rng.uniform_real() * 2.0;
        p.est_va = rng.uniform_real() * 2.0 - 0.5;
        p.est_vy = rng.uniform_real();
        p.cost_coefficient = 0.1 + rng.uniform_real() * 3.0;
        const double y = rng.uniform_real() * 50.0;

        const double r = reputation_score(p);
        JurorProfile px = p;
        px.visibility *= 2.0;
        if (std::abs(reputation_score(px) - 2.0 * r) > 1e-9 * std::max(1.0, std::abs(r))) {
            detail = "score not linear in visibility";
            return false;
        }
        const double h = 1e-6;
        JurorProfile pa = p;
        pa.est_va += h;
        const double slope_a = (reputation_score(pa) - r) / h;
        if (std::abs(slope_a - p.visibility * p.weight_prosocial) > 1e-4) {
            detail = "prosocial slope off";
            return false;
        }
        JurorProfile py = p;
        py.est_vy += h;
        const double slope_y = (reputation_score(py) - r) / h;
        if (std::abs(slope_y + p.visibility * p.weight_monetary) > 1e-4) {
            detail = "monetary slope off (wrong sign or weight)";
            return false;
        }

        const double analytic = optimal_participation(p, y);
        double best_a = 0.0, best_v = -1e300;
        for (int g = 0; g <= 1000; ++g) {
            JurorProfile probe = p;
            probe.participation = g / 1000.0;
            const double v = juror_benefit(probe, y);
            if (v > best_v) {
                best_v = v;
                best_a = probe.participation;
            }
        }
        worst_gap = std::max(worst_gap, std::abs(analytic - best_a));
        if (std::abs(analytic - best_a) > 1e-3 + 1e-9) {
            detail = "optimizer gap " + std::to_string(std::abs(analytic - best_a));
            return false;
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "1000 profiles; worst |a*-argmax| = %.2e", worst_gap);
    detail = buf;
    return true;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<bool(std::string&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
    const std::string filter = argc > 1 ? argv[1] : "";
    const std::vector<Criterion> criteria = {
        {1, "collusion table reproduction (84 cells, 3 sig figs, sentinels)", 5.0,
         criterion_1_table1},
        {2, "capacity table reproduction (12 exact integers)", 1.0, criterion_2_table2},
        {3, "exponential bound dominance + 0.2% checkpoint", 5.0, criterion_3_dominance},
        {4, "small-instance hypergeometric oracle (rel err <= 1e-12)", 60.0,
         criterion_4_oracle},
        {5, "capacity threshold sharpness (stable at N_min, divergent at 0.8 N_min)", 120.0,
         criterion_5_sharpness},
        {6, "exact conservation (10000 payouts + 100 scenarios)", 30.0,
         criterion_6_conservation},
        {7, "empirical panel sampling within 3-sigma Wilson of 7.81e-02", 10.0,
         criterion_7_empirical},
        {8, "seeded determinism and replay", 60.0, criterion_8_determinism},
        {9, "reputation linearity and benefit optimizer", 10.0, criterion_9_reputation},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!filter.empty() && filter != std::to_string(c.id)) continue;
        std::string detail;
        const auto start = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > c.budget_seconds) {
            ok = false;
            detail += " [over budget " + std::to_string(c.budget_seconds) + "s]";
        }
        std::printf("%s criterion %d: %s — %s (%.2fs)\n", ok ? "PASS" : "FAIL", c.id, c.name,
                    detail.c_str(), elapsed);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
