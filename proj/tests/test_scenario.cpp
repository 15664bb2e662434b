#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "veribond/collusion.hpp"
#include "veribond/presets.hpp"
#include "veribond/scenario.hpp"

using namespace veribond;

TEST_CASE("perfect challengers and jurors leave no misinformation standing") {
    ScenarioConfig cfg = preset_scenario("all-honest");
    const ScenarioRun run = run_scenario(cfg);
    CHECK(run.metrics.false_content > 0);
    CHECK(run.metrics.false_survived == 0);
    CHECK(run.metrics.misinformation_survival_rate() == 0.0);
    CHECK(run.metrics.escrow_residual == 0);
}

TEST_CASE("no challengers: every contest expires and refunds in full") {
    ScenarioConfig cfg = preset_scenario("all-honest");
    std::erase_if(cfg.agents, [](const AgentGroup& g) { return is_challenger(g.kind); });
    cfg.contests = 25;
    const ScenarioRun run = run_scenario(cfg);
    CHECK(run.metrics.expired_unchallenged == 25);
    CHECK(run.metrics.panels_seated == 0);
    CHECK(run.metrics.escrow_residual == 0);
    // All bonds returned to creators; nobody else earns anything.
    CHECK(run.metrics.payouts_by_role.at("creators") ==
          25ULL * cfg.beta_minor);
    CHECK(run.metrics.payouts_by_role.count("jurors") == 0);
    CHECK(run.metrics.payouts_by_role.at("platform") == 0);
}

TEST_CASE("identical config and seed give identical metrics and logs") {
    const ScenarioConfig cfg = preset_scenario("mixed-adversarial");
    const ScenarioRun a = run_scenario(cfg);
    const ScenarioRun b = run_scenario(cfg);
    CHECK(a.metrics.to_json() == b.metrics.to_json());
    CHECK(a.metrics.state_hash == b.metrics.state_hash);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i)
        CHECK(a.log.entries()[i].to_jsonl() == b.log.entries()[i].to_jsonl());

    ScenarioConfig other = cfg;
    other.seed += 1;
    const ScenarioRun c = run_scenario(other);
    CHECK(c.metrics.state_hash != a.metrics.state_hash);
}

TEST_CASE("the adversarial mix still conserves every minor unit") {
    const ScenarioRun run = run_scenario(preset_scenario("mixed-adversarial"));
    CHECK(run.metrics.escrow_residual == 0);
    CHECK(run.metrics.contests_total == 120);
}

TEST_CASE("raising juror error weakly raises misinformation survival") {
    std::vector<double> errors{0.0, 0.15, 0.3, 0.45};
    std::vector<double> survival;
    for (const double err : errors) {
        ScenarioConfig cfg = preset_scenario("all-honest");
        cfg.contests = 120;
        cfg.seed = 5;
        for (auto& g : cfg.agents) {
            if (g.kind == StrategyKind::DiligentJuror) g.error_rate = err;
            if (g.kind == StrategyKind::DiligentChallenger) g.detection_skill = 0.9;
        }
        survival.push_back(run_scenario(cfg).metrics.misinformation_survival_rate());
    }
    // Spearman rank correlation over the sweep must be positive.
    double rho = 0.0;
    {
        auto rank = [](const std::vector<double>& v) {
            std::vector<double> r(v.size());
            for (std::size_t i = 0; i < v.size(); ++i)
                for (std::size_t j = 0; j < v.size(); ++j)
                    if (v[j] < v[i] || (v[j] == v[i] && j < i)) r[i] += 1.0;
            return r;
        };
        const auto rx = rank(errors), ry = rank(survival);
        const double n = static_cast<double>(errors.size());
        double d2 = 0.0;
        for (std::size_t i = 0; i < rx.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
        rho = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
    }
    CHECK(rho > 0.0);
    CHECK(survival.front() == 0.0);
    CHECK(survival.back() > survival.front());
}

TEST_CASE("raising challenger skill weakly lowers misinformation survival") {
    std::vector<double> skills{0.2, 0.6, 1.0};
    std::vector<double> survival;
    for (const double skill : skills) {
        ScenarioConfig cfg = preset_scenario("all-honest");
        cfg.contests = 120;
        cfg.seed = 6;
        for (auto& g : cfg.agents)
            if (g.kind == StrategyKind::DiligentChallenger) g.detection_skill = skill;
        survival.push_back(run_scenario(cfg).metrics.misinformation_survival_rate());
    }
    CHECK(survival.front() >= survival.back());
    CHECK(survival.front() > 0.0);
}

TEST_CASE("frivolous challengers lose money in expectation") {
    ScenarioConfig cfg = preset_scenario("collusion-sweep");
    cfg.contests = 150;
    const ScenarioRun run = run_scenario(cfg);
    // Challenges against true content with an honest majority nearly always
    // fail, so the frivolous challenger's balance stays under the stakes put
    // at risk.
    CHECK(run.metrics.challenges_against_true > 0);
    const std::uint64_t staked =
        static_cast<std::uint64_t>(run.metrics.challenges_against_true) * cfg.beta_minor;
    const auto it = run.metrics.payouts_by_role.find("challengers");
    const std::uint64_t recovered = it == run.metrics.payouts_by_role.end() ? 0 : it->second;
    CHECK(recovered < staked);
}

TEST_CASE("a 10% bloc on 21-seat panels never reaches a majority") {
    // With 10 colluders in a pool of 100 a 21-seat majority needs 11 bloc
    // seats, which cannot happen; the exact tail is literally zero and the
    // scenario must agree.
    ScenarioConfig cfg = preset_scenario("collusion-sweep");
    cfg.contests = 200;
    cfg.engine.jury.panel_size = 21;
    cfg.engine.jury.bench_size = 5;
    const ScenarioRun run = run_scenario(cfg);
    CHECK(run.metrics.panels_seated > 0);
    CHECK(run.metrics.bloc_majority_panels == 0);
    const auto exact = exact_collusion_probability(CollusionQuery::finite(100, 10, 21));
    CHECK(exact.exact_tail == 0.0);
    CHECK(run.metrics.empirical_collusion_rate() == exact.exact_tail);
}

TEST_CASE("panel sampling matches the exact tail: small finite pool") {
    PanelSamplingQuery q;
    q.pool = 100;
    q.colluders = 30;
    q.panel = 11;
    Rng rng(20240604);
    const EmpiricalRate r = empirical_collusion_rate(q, 100000, rng);
    const double exact =
        exact_collusion_probability(CollusionQuery::finite(100, 30, 11)).exact_tail;
    CHECK(r.contains(exact));
    CHECK(r.rate == doctest::Approx(exact).epsilon(0.1));
}

TEST_CASE("panel sampling matches the binomial oracle at p = 1/2") {
    PanelSamplingQuery q;
    q.ratio = 0.5;
    q.panel = 11;
    Rng rng(20240605);
    const EmpiricalRate r = empirical_collusion_rate(q, 100000, rng);
    // Majority of independent fair seats is exactly 1/2 by symmetry.
    CHECK(r.contains(0.5));
}

TEST_CASE("no colluders, no captures") {
    PanelSamplingQuery q;
    q.ratio = 0.0;
    q.panel = 11;
    Rng rng(1);
    CHECK(empirical_collusion_rate(q, 1000, rng).rate == 0.0);
}

TEST_CASE("bonded content outranks unbonded content at equal base score") {
    const auto ranked = visibility_rank(
        {{"plain", 0, 1.0}, {"bonded", 1000, 1.0}}, 1.0);
    CHECK(ranked[0].content.id == "bonded");
    CHECK(ranked[1].content.id == "plain");
}

TEST_CASE("zero weight reduces to the base-score order") {
    const auto ranked = visibility_rank(
        {{"a", 100000, 0.3}, {"b", 0, 0.9}, {"c", 50, 0.5}}, 0.0);
    CHECK(ranked[0].content.id == "b");
    CHECK(ranked[1].content.id == "c");
    CHECK(ranked[2].content.id == "a");
}

TEST_CASE("doubling every bond preserves the relative order") {
    Rng rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ContentScore> contents;
        for (int i = 0; i < 8; ++i)
            contents.push_back({"c" + std::to_string(i), rng.uniform_index(100000),
                                0.1 + rng.uniform_real()});
        const auto base = visibility_rank(contents, 1.0);
        auto doubled = contents;
        for (auto& c : doubled) c.beta_minor *= 2;
        const auto after = visibility_rank(doubled, 1.0);
        // Doubling is a monotone transform of the boost, so a pair where one
        // side dominates on both base score and bond can never swap. Check
        // pairwise dominance rather than exact equality of orderings.
        for (std::size_t i = 0; i < base.size(); ++i)
            for (std::size_t j = i + 1; j < base.size(); ++j) {
                const auto& hi = base[i].content;
                const auto& lo = base[j].content;
                if (hi.base_score >= lo.base_score && hi.beta_minor >= lo.beta_minor) {
                    // dominance must survive the rescaling
                    std::size_t pi = 0, pj = 0;
                    for (std::size_t k = 0; k < after.size(); ++k) {
                        if (after[k].content.id == hi.id) pi = k;
                        if (after[k].content.id == lo.id) pj = k;
                    }
                    CHECK(pi < pj);
                }
            }
    }
}

TEST_CASE("scenario config json round trip is strict") {
    const ScenarioConfig cfg = preset_scenario("mixed-adversarial");
    const ScenarioConfig back = ScenarioConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    nlohmann::json bad = cfg.to_json();
    bad["alien"] = 1;
    CHECK_THROWS_AS(ScenarioConfig::from_json(bad), std::invalid_argument);

    nlohmann::json bad_agent = cfg.to_json();
    bad_agent["agents"][0]["accuracy"] = 1.5;
    CHECK_THROWS_AS(ScenarioConfig::from_json(bad_agent), std::invalid_argument);
}

TEST_CASE("config validation catches unbuildable scenarios") {
    ScenarioConfig cfg = preset_scenario("all-honest");
    cfg.agents.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    ScenarioConfig no_jurors = preset_scenario("all-honest");
    std::erase_if(no_jurors.agents, [](const AgentGroup& g) { return is_juror(g.kind); });
    CHECK_THROWS_AS(no_jurors.validate(), std::invalid_argument);
}
