// veribond: contest engine + analysis toolkit command line.
//
// Exit codes: 0 success, 1 validation/usage error, 2 golden-table mismatch,
// 3 replay divergence.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "veribond/capacity.hpp"
#include "veribond/collusion.hpp"
#include "veribond/engine.hpp"
#include "veribond/golden.hpp"
#include "veribond/presets.hpp"
#include "veribond/scenario.hpp"

namespace vb = veribond;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitGoldenMismatch = 2;
constexpr int kExitReplayDivergence = 3;

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("VERACITY_SEED");
    if (!raw || !*raw) return std::nullopt;
    return std::stoull(raw);
}

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + out_path + "'");
    os << text;
    std::cout << "wrote " << out_path << "\n";
}

// ---------------------------------------------------------------------------
// collusion-table
// ---------------------------------------------------------------------------

struct CollusionTableOpts {
    std::string pool = "10000";  // "inf" for the infinite-pool limit
    std::vector<double> ratios;
    std::vector<std::uint32_t> panels;
    std::string format = "table";
    std::string out;
    bool check = false;
};

std::string render_collusion_table(const std::vector<vb::CollusionCell>& cells,
                                   const std::vector<double>& ratios,
                                   const std::vector<std::uint32_t>& panels,
                                   const std::string& pool_label, const std::string& format) {
    std::ostringstream os;
    if (format == "csv") {
        os << "panel,ratio,pool,exact_tail,log_tail,hoeffding,clamped,display\n";
        for (const auto& cell : cells) {
            os << cell.query.panel << ',' << fmt_full(cell.query.colluder_fraction()) << ','
               << pool_label << ',' << fmt_full(cell.result.exact_tail) << ','
               << fmt_full(cell.result.log_tail) << ',' << fmt_full(cell.result.hoeffding) << ','
               << (cell.result.clamped ? 1 : 0) << ','
               << vb::golden::format_probability(cell.result.exact_tail) << '\n';
        }
        return os.str();
    }
    if (format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& cell : cells) {
            arr.push_back({{"panel", cell.query.panel},
                           {"ratio", cell.query.colluder_fraction()},
                           {"pool", pool_label},
                           {"exact_tail", cell.result.exact_tail},
                           {"log_tail", cell.result.log_tail},
                           {"hoeffding", cell.result.hoeffding},
                           {"clamped", cell.result.clamped},
                           {"display", vb::golden::format_probability(cell.result.exact_tail)}});
        }
        return nlohmann::json{{"pool", pool_label}, {"cells", arr}}.dump(2) + "\n";
    }
    // Aligned text, scientific notation, sentinel below the display floor.
    os << "Collusion probability P(bloc >= majority), pool " << pool_label << "\n";
    os << "panel";
    for (const double r : ratios) {
        char head[16];
        std::snprintf(head, sizeof(head), "%.0f%%", r * 100.0);
        os << '\t' << head;
    }
    os << '\n';
    std::size_t idx = 0;
    for (const std::uint32_t n : panels) {
        os << n;
        for (std::size_t j = 0; j < ratios.size(); ++j, ++idx)
            os << '\t' << vb::golden::format_probability(cells[idx].result.exact_tail);
        os << '\n';
    }
    return os.str();
}

int run_collusion_table(CollusionTableOpts opts) {
    if (opts.ratios.empty()) opts.ratios = vb::golden::collusion_ratios();
    if (opts.panels.empty()) opts.panels = vb::golden::collusion_panels();
    if (opts.check) {
        opts.pool = std::to_string(vb::golden::kCollusionPool);
        opts.ratios = vb::golden::collusion_ratios();
        opts.panels = vb::golden::collusion_panels();
    }
    for (const double r : opts.ratios) {
        if (r < 0.0 || r >= 0.5)
            throw std::invalid_argument("ratio " + fmt_full(r) +
                                        " outside [0, 0.5); majority capture bound needs p < 1/2");
    }
    for (const std::uint32_t n : opts.panels) {
        if (n == 0 || n % 2 == 0)
            throw std::invalid_argument("panel size " + std::to_string(n) + " must be odd");
    }

    std::vector<std::uint64_t> pools;
    if (opts.pool != "inf") pools.push_back(std::stoull(opts.pool));
    const auto cells = vb::collusion_table(pools, opts.ratios, opts.panels);
    const std::string label = opts.pool == "inf" ? "inf" : opts.pool;

    if (opts.check) {
        const auto& golden = vb::golden::collusion_cells();
        std::size_t idx = 0, mismatches = 0;
        for (std::size_t i = 0; i < opts.panels.size(); ++i) {
            for (std::size_t j = 0; j < opts.ratios.size(); ++j, ++idx) {
                const auto& expect = golden[i][j];
                const std::string got =
                    vb::golden::format_probability(cells[idx].result.exact_tail);
                const std::string want = expect ? *expect : "<1e-10";
                if (!vb::golden::within_one_third_digit(got, want)) {
                    ++mismatches;
                    std::cerr << "mismatch panel=" << opts.panels[i]
                              << " ratio=" << opts.ratios[j] << ": got " << got << ", want "
                              << want << "\n";
                }
            }
        }
        if (mismatches) {
            std::cerr << "collusion-table check: " << mismatches << " mismatching cell(s)\n";
            return kExitGoldenMismatch;
        }
        std::cout << "collusion-table check: " << cells.size() << "/" << cells.size()
                  << " cells match\n";
        return kExitOk;
    }

    emit(render_collusion_table(cells, opts.ratios, opts.panels, label, opts.format), opts.out);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// capacity-table
// ---------------------------------------------------------------------------

struct CapacityTableOpts {
    std::string format = "table";
    std::string out;
    bool check = false;
    std::string name = "Custom";
    std::uint64_t posts = 0;  // nonzero selects a single custom row
    std::string ratio = "1/1000";
    std::uint32_t panel = 0;  // nonzero selects a single custom config
    std::string hours = "1";
    std::string avail = "4";
};

std::string render_capacity_table(const std::vector<vb::CapacityCell>& cells,
                                  const std::vector<vb::PlatformRow>& rows,
                                  const std::vector<vb::StaffingConfig>& configs,
                                  const std::string& format) {
    std::ostringstream os;
    if (format == "csv") {
        os << "platform,posts_per_day,ratio,lambda_per_hour,config,panel,hours_per_case,"
              "avail_hours_per_day,n_min\n";
        std::size_t idx = 0;
        for (const auto& row : rows) {
            for (const auto& cfg : configs) {
                const auto& cell = cells[idx++];
                os << row.name << ',' << row.posts_per_day << ',' << row.challenge_ratio.str()
                   << ',' << fmt_full(cell.lambda_per_hour) << ',' << cfg.name << ','
                   << cfg.panel << ',' << cfg.hours_per_case.str() << ','
                   << cfg.avail_hours_per_day.str() << ',' << cell.n_min << '\n';
            }
        }
        return os.str();
    }
    if (format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& cell : cells) {
            arr.push_back({{"platform", cell.platform},
                           {"config", cell.config},
                           {"lambda_per_hour", cell.lambda_per_hour},
                           {"n_min", cell.n_min},
                           {"display", vb::compact_count(cell.n_min)}});
        }
        return nlohmann::json{{"cells", arr}}.dump(2) + "\n";
    }
    os << "Minimum juror pool by platform and staffing configuration\n";
    os << "platform\tposts/day\tdisputes/hr";
    for (const auto& cfg : configs) os << '\t' << cfg.name;
    os << '\n';
    std::size_t idx = 0;
    for (const auto& row : rows) {
        os << row.name << '\t' << vb::compact_count(row.posts_per_day) << '\t'
           << vb::compact_count(static_cast<std::uint64_t>(cells[idx].lambda_per_hour + 0.5));
        for (std::size_t j = 0; j < configs.size(); ++j, ++idx)
            os << '\t' << vb::compact_count(cells[idx].n_min);
        os << '\n';
    }
    return os.str();
}

int run_capacity_table(const CapacityTableOpts& opts) {
    std::vector<vb::PlatformRow> rows = vb::golden::capacity_rows();
    std::vector<vb::StaffingConfig> configs = vb::golden::capacity_configs();
    if (!opts.check && opts.posts > 0)
        rows = {{opts.name, opts.posts, vb::Rational::parse(opts.ratio)}};
    if (!opts.check && opts.panel > 0)
        configs = {{"Custom", opts.panel, vb::Rational::parse(opts.hours),
                    vb::Rational::parse(opts.avail)}};

    const auto cells = vb::capacity_table(rows, configs);

    if (opts.check) {
        const auto& golden = vb::golden::capacity_cells();
        std::size_t idx = 0, mismatches = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < configs.size(); ++j, ++idx) {
                if (cells[idx].n_min != golden[i][j]) {
                    ++mismatches;
                    std::cerr << "mismatch " << rows[i].name << "/" << configs[j].name
                              << ": got " << cells[idx].n_min << ", want " << golden[i][j]
                              << "\n";
                }
            }
        }
        if (mismatches) {
            std::cerr << "capacity-table check: " << mismatches << " mismatching cell(s)\n";
            return kExitGoldenMismatch;
        }
        std::cout << "capacity-table check: " << cells.size() << "/" << cells.size()
                  << " cells match\n";
        return kExitOk;
    }

    emit(render_capacity_table(cells, rows, configs, opts.format), opts.out);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
    std::string config_path;
    std::string bundled;
    std::string out_dir = ".";
    std::string dump_config;
    bool verify_replay = false;
    std::optional<std::uint64_t> seed;
};

std::string metrics_csv(const vb::ScenarioMetrics& m) {
    std::ostringstream os;
    os << "metric,value\n";
    os << "contests_total," << m.contests_total << '\n';
    os << "false_content," << m.false_content << '\n';
    os << "false_survived," << m.false_survived << '\n';
    os << "misinformation_survival_rate," << fmt_full(m.misinformation_survival_rate()) << '\n';
    os << "challenges_against_true," << m.challenges_against_true << '\n';
    os << "false_challenge_wins," << m.false_challenge_wins << '\n';
    os << "false_challenge_success_rate," << fmt_full(m.false_challenge_success_rate()) << '\n';
    os << "panels_seated," << m.panels_seated << '\n';
    os << "bloc_majority_panels," << m.bloc_majority_panels << '\n';
    os << "empirical_collusion_rate," << fmt_full(m.empirical_collusion_rate()) << '\n';
    os << "expired_unchallenged," << m.expired_unchallenged << '\n';
    os << "escrow_residual," << m.escrow_residual << '\n';
    os << "reserve," << m.reserve << '\n';
    os << "state_hash," << m.state_hash << '\n';
    return os.str();
}

int run_simulate(const SimulateOpts& opts) {
    vb::ScenarioConfig config;
    if (!opts.bundled.empty()) {
        config = vb::preset_scenario(opts.bundled);
    } else if (!opts.config_path.empty()) {
        std::ifstream is(opts.config_path);
        if (!is) throw std::runtime_error("cannot read '" + opts.config_path + "'");
        nlohmann::json j;
        is >> j;
        config = vb::ScenarioConfig::from_json(j);
    } else {
        throw std::invalid_argument("simulate needs --config or --bundled");
    }
    if (const auto env = env_seed()) config.seed = *env;
    if (opts.seed) config.seed = *opts.seed;

    if (!opts.dump_config.empty()) {
        emit(config.to_json().dump(2) + "\n", opts.dump_config);
        return kExitOk;
    }

    const vb::ScenarioRun run = vb::run_scenario(config);

    namespace fs = std::filesystem;
    fs::create_directories(opts.out_dir);
    const fs::path metrics_json_path = fs::path(opts.out_dir) / "metrics.json";
    const fs::path metrics_csv_path = fs::path(opts.out_dir) / "metrics.csv";
    const fs::path events_path = fs::path(opts.out_dir) / "events.jsonl";
    {
        std::ofstream os(metrics_json_path, std::ios::binary);
        os << run.metrics.to_json().dump(2) << '\n';
    }
    {
        std::ofstream os(metrics_csv_path, std::ios::binary);
        os << metrics_csv(run.metrics);
    }
    {
        std::ofstream os(events_path, std::ios::binary);
        run.log.write(os);
    }

    std::cout << "contests: " << run.metrics.contests_total << '\n';
    std::cout << "misinformation survival rate: "
              << fmt_full(run.metrics.misinformation_survival_rate()) << '\n';
    std::cout << "false-challenge success rate: "
              << fmt_full(run.metrics.false_challenge_success_rate()) << '\n';

    // When a colluding bloc exists, report empirical capture odds next to the
    // exact panel-draw probability.
    std::uint64_t colluders = 0, jurors = 0;
    for (const auto& g : config.agents) {
        if (vb::is_juror(g.kind)) jurors += g.count;
        if (g.kind == vb::StrategyKind::ColludingJuror) colluders += g.count;
    }
    if (colluders > 0 && run.metrics.panels_seated > 0) {
        const auto exact = vb::exact_collusion_probability(vb::CollusionQuery::finite(
            jurors, colluders, config.engine.jury.panel_size));
        std::cout << "empirical bloc-majority rate: "
                  << fmt_full(run.metrics.empirical_collusion_rate()) << " over "
                  << run.metrics.panels_seated << " panels (exact "
                  << fmt_full(exact.exact_tail) << ")\n";
    }
    std::cout << "escrow residual: " << run.metrics.escrow_residual << '\n';
    std::cout << "state hash: " << run.metrics.state_hash << '\n';
    std::cout << "wrote " << metrics_json_path.string() << ", " << metrics_csv_path.string()
              << ", " << events_path.string() << '\n';

    if (opts.verify_replay) {
        std::ifstream is(events_path);
        const vb::EventLog loaded = vb::EventLog::read(is);
        const vb::Engine replayed = vb::Engine::replay(loaded);
        if (replayed.state_hash() != run.metrics.state_hash) {
            std::cerr << "replay hash " << replayed.state_hash() << " != live hash "
                      << run.metrics.state_hash << '\n';
            return kExitReplayDivergence;
        }
        std::cout << "replay verified: state hash matches\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// min-panel / min-jurors
// ---------------------------------------------------------------------------

int run_min_panel(double ratio, double epsilon, const std::string& mode) {
    const vb::RiskMode m = mode == "hoeffding" ? vb::RiskMode::Hoeffding : vb::RiskMode::Exact;
    if (mode != "hoeffding" && mode != "exact")
        throw std::invalid_argument("mode must be 'exact' or 'hoeffding'");
    const std::uint32_t n = vb::min_panel_for_risk(ratio, epsilon, m);
    std::cout << n << '\n';
    return kExitOk;
}

int run_min_jurors(double lambda, std::uint32_t panel, double hours, double avail) {
    vb::CapacityQuery q;
    q.lambda_per_hour = lambda;
    q.panel = panel;
    q.hours_per_case = hours;
    q.avail_hours_per_day = avail;
    const vb::CapacityResult r = vb::min_jurors(q);
    std::cout << "n_min: " << r.n_min << '\n';
    std::cout << "parallel panels: " << r.servers << '\n';
    std::cout << "utilization: " << fmt_full(r.utilization) << '\n';
    std::cout << "stable: " << (r.stable ? "yes" : "no") << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int run_verify(std::optional<std::uint64_t> seed_opt) {
    const std::uint64_t seed = seed_opt.value_or(env_seed().value_or(12345));
    bool ok = true;
    auto report = [&](bool pass, const std::string& what) {
        std::cout << (pass ? "PASS " : "FAIL ") << what << '\n';
        ok = ok && pass;
    };

    {
        vb::Rng rng(seed);
        bool conserved = true;
        for (int i = 0; i < 2000 && conserved; ++i) {
            const vb::Money beta(1 + rng.uniform_index(10'000'000));
            vb::PayoutPolicy policy;
            policy.platform_fraction = vb::Rational(static_cast<std::int64_t>(rng.uniform_index(30)), 100);
            policy.jury_pool_fraction = vb::Rational(static_cast<std::int64_t>(1 + rng.uniform_index(50)), 100);
            policy.juror_fee_curve = rng.bernoulli(0.3) ? vb::FeeCurve::LogScale : vb::FeeCurve::Flat;
            const std::size_t jurors = 1 + 2 * rng.uniform_index(15);
            std::vector<vb::ParticipantId> ids;
            for (std::size_t k = 0; k < jurors; ++k) ids.push_back("j" + std::to_string(k));
            const vb::Payout p = vb::distribute_forfeited_bond(beta, policy, ids);
            conserved = p.total() == beta;
        }
        report(conserved, "payout conservation over 2000 randomized draws");
    }

    {
        bool dominated = true;
        for (const std::uint32_t n : vb::golden::collusion_panels()) {
            for (const double p : vb::golden::collusion_ratios()) {
                const auto r = vb::exact_collusion_probability(vb::CollusionQuery::limit(p, n));
                const double log_bound = -2.0 * n * (0.5 - p) * (0.5 - p);
                if (r.log_tail > log_bound + 1e-12) dominated = false;
            }
        }
        report(dominated, "exponential bound dominates the exact tail on the reference grid");
    }

    {
        const auto cells = vb::capacity_table(vb::golden::capacity_rows(),
                                              vb::golden::capacity_configs());
        const auto& golden = vb::golden::capacity_cells();
        bool match = true;
        std::size_t idx = 0;
        for (const auto& row : golden)
            for (const std::uint64_t want : row) match = match && cells[idx++].n_min == want;
        report(match, "staffing table integers match the reference");
    }

    {
        vb::ScenarioConfig cfg = vb::preset_scenario("all-honest");
        cfg.contests = 20;
        cfg.seed = seed;
        const vb::ScenarioRun run = vb::run_scenario(cfg);
        std::stringstream buf;
        run.log.write(buf);
        const vb::EventLog loaded = vb::EventLog::read(buf);
        const vb::Engine replayed = vb::Engine::replay(loaded);
        report(replayed.state_hash() == run.metrics.state_hash,
               "event-log replay reproduces the live state hash");

        const vb::ScenarioRun again = vb::run_scenario(cfg);
        report(again.metrics.to_json() == run.metrics.to_json() &&
                   again.metrics.state_hash == run.metrics.state_hash,
               "identical seed reproduces identical metrics");
        report(run.metrics.escrow_residual == 0, "scenario escrow residual is zero");
    }

    return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"veracity-bond contest engine and analysis toolkit"};
    app.require_subcommand(1);

    CollusionTableOpts ct;
    auto* ct_cmd = app.add_subcommand("collusion-table",
                                      "exact bloc-capture probability grid");
    ct_cmd->add_option("--pool", ct.pool, "juror pool size, or 'inf' for the limit");
    ct_cmd->add_option("--ratios", ct.ratios, "colluder ratios (e.g. 0.05 0.1)");
    ct_cmd->add_option("--panels", ct.panels, "odd panel sizes");
    ct_cmd->add_option("--format", ct.format, "table|csv|json")
        ->check(CLI::IsMember({"table", "csv", "json"}));
    ct_cmd->add_option("--out", ct.out, "output file (default stdout)");
    ct_cmd->add_flag("--check", ct.check, "diff against the embedded reference grid");

    CapacityTableOpts cap;
    auto* cap_cmd = app.add_subcommand("capacity-table", "minimum juror pool grid");
    cap_cmd->add_option("--format", cap.format, "table|csv|json")
        ->check(CLI::IsMember({"table", "csv", "json"}));
    cap_cmd->add_option("--out", cap.out, "output file (default stdout)");
    cap_cmd->add_flag("--check", cap.check, "diff against the embedded reference grid");
    cap_cmd->add_option("--name", cap.name, "custom platform name");
    cap_cmd->add_option("--posts", cap.posts, "custom platform posts/day (enables custom row)");
    cap_cmd->add_option("--ratio", cap.ratio, "custom challenge ratio as p/q");
    cap_cmd->add_option("--panel", cap.panel, "custom config panel size (enables custom config)");
    cap_cmd->add_option("--hours", cap.hours, "custom config hours per case as p/q");
    cap_cmd->add_option("--avail", cap.avail, "custom config juror-hours per day as p/q");

    SimulateOpts sim;
    std::uint64_t sim_seed_raw = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "run an agent-based scenario");
    sim_cmd->add_option("--config", sim.config_path, "scenario config JSON");
    sim_cmd->add_option("--bundled", sim.bundled, "built-in scenario")
        ->check(CLI::IsMember(vb::preset_names()));
    sim_cmd->add_option("--out", sim.out_dir, "output directory");
    sim_cmd->add_option("--dump-config", sim.dump_config,
                        "write the effective scenario config and exit");
    sim_cmd->add_flag("--verify-replay", sim.verify_replay,
                      "re-derive state from the written log and compare hashes");
    auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed_raw, "seed override");

    double mp_ratio = 0.1, mp_eps = 0.001;
    std::string mp_mode = "exact";
    auto* mp_cmd = app.add_subcommand("min-panel", "smallest odd panel for a risk cap");
    mp_cmd->add_option("--ratio", mp_ratio, "colluder ratio p < 1/2")->required();
    mp_cmd->add_option("--epsilon", mp_eps, "risk cap in (0,1]")->required();
    mp_cmd->add_option("--mode", mp_mode, "exact|hoeffding");

    double mj_lambda = 0, mj_hours = 1, mj_avail = 4;
    std::uint32_t mj_panel = 31;
    auto* mj_cmd = app.add_subcommand("min-jurors", "minimum juror pool for a dispute rate");
    mj_cmd->add_option("--lambda", mj_lambda, "disputes per hour")->required();
    mj_cmd->add_option("--panel", mj_panel, "panel size (odd)");
    mj_cmd->add_option("--hours", mj_hours, "juror-hours per case");
    mj_cmd->add_option("--avail", mj_avail, "juror-hours per day");

    std::uint64_t verify_seed_raw = 0;
    auto* verify_cmd = app.add_subcommand("verify", "run built-in invariant checks");
    auto* verify_seed_opt = verify_cmd->add_option("--seed", verify_seed_raw, "seed override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (app.got_subcommand(ct_cmd)) return run_collusion_table(ct);
        if (app.got_subcommand(cap_cmd)) return run_capacity_table(cap);
        if (app.got_subcommand(sim_cmd)) {
            if (sim_seed_opt->count()) sim.seed = sim_seed_raw;
            return run_simulate(sim);
        }
        if (app.got_subcommand(mp_cmd)) return run_min_panel(mp_ratio, mp_eps, mp_mode);
        if (app.got_subcommand(mj_cmd)) return run_min_jurors(mj_lambda, mj_panel, mj_hours, mj_avail);
        if (app.got_subcommand(verify_cmd)) {
            return run_verify(verify_seed_opt->count()
                                  ? std::optional<std::uint64_t>(verify_seed_raw)
                                  : std::nullopt);
        }
    } catch (const vb::EngineError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == vb::EngineErr::ReplayDivergence ? kExitReplayDivergence
                                                           : kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}
