#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "veribond/engine.hpp"
#include "veribond/rng.hpp"

namespace veribond {

enum class StrategyKind {
    HonestCreator,
    MisinfoCreator,
    DiligentChallenger,
    FrivolousChallenger,
    DiligentJuror,
    LazyJuror,
    ColludingJuror,
};

const char* strategy_kind_name(StrategyKind k);
StrategyKind parse_strategy_kind(const std::string& s);
bool is_creator(StrategyKind k);
bool is_challenger(StrategyKind k);
bool is_juror(StrategyKind k);

struct AgentGroup {
    StrategyKind kind = StrategyKind::DiligentJuror;
    std::uint32_t count = 0;
    double accuracy = 0.95;         // creators: P(content is true)
    double detection_skill = 0.9;   // diligent challengers
    double challenge_rate = 0.05;   // frivolous challengers
    double error_rate = 0.1;        // jurors: P(wrong vote | voting)
    double abstain_prob = 0.5;      // lazy jurors
    double bond_decline_prob = 0.0; // refusal to post the juror bond
    int bloc = 0;                   // colluding jurors
    Vote target = Vote::ForChallenger;

    void validate() const;
    nlohmann::json to_json() const;
    static AgentGroup from_json(const nlohmann::json& j);
};

struct ScenarioConfig {
    std::uint64_t seed = 0;
    std::uint32_t contests = 100;
    std::uint64_t beta_minor = 1000;
    std::uint32_t viewers = 10;             // plain viewer accounts for evaluations
    std::uint32_t evaluators_per_contest = 3;  // 0 disables the evaluation phase
    double visibility_weight = 1.0;
    EngineConfig engine;
    std::vector<AgentGroup> agents;

    void validate() const;
    nlohmann::json to_json() const;
    static ScenarioConfig from_json(const nlohmann::json& j);
};

struct ScenarioMetrics {
    std::uint32_t contests_total = 0;
    std::uint32_t false_content = 0;
    std::uint32_t false_survived = 0;  // false content not resolved for a challenger
    std::uint32_t true_content = 0;
    std::uint32_t challenges_against_true = 0;
    std::uint32_t false_challenge_wins = 0;  // challenge against true content that won
    std::uint32_t panels_seated = 0;
    std::uint32_t bloc_majority_panels = 0;  // a colluding bloc held >= t seats
    std::uint32_t expired_unchallenged = 0;
    std::map<std::string, std::uint64_t> payouts_by_role;  // role -> minor units received
    std::map<ParticipantId, double> final_reputation;      // jurors only
    std::vector<std::pair<std::uint32_t, double>> mean_reputation_trajectory;
    std::int64_t escrow_residual = 0;
    std::uint64_t reserve = 0;
    std::uint64_t state_hash = 0;

    double misinformation_survival_rate() const {
        return false_content ? static_cast<double>(false_survived) / false_content : 0.0;
    }
    double false_challenge_success_rate() const {
        return challenges_against_true
                   ? static_cast<double>(false_challenge_wins) / challenges_against_true
                   : 0.0;
    }
    double empirical_collusion_rate() const {
        return panels_seated ? static_cast<double>(bloc_majority_panels) / panels_seated : 0.0;
    }

    nlohmann::json to_json() const;
};

struct ScenarioRun {
    ScenarioMetrics metrics;
    EventLog log;
};

/// Plays every contest through the engine state machine: creators post
/// content with a bond, challengers react to the (hidden) ground truth,
/// jurors vote per their strategy, colluding blocs vote their target.
ScenarioRun run_scenario(const ScenarioConfig& config);

struct PanelSamplingQuery {
    std::optional<std::uint64_t> pool;  // finite N; nullopt = independent seats
    std::uint64_t colluders = 0;        // k when finite
    double ratio = 0.0;                 // p when infinite
    std::uint32_t panel = 0;
};

struct EmpiricalRate {
    std::uint64_t trials = 0;
    std::uint64_t hits = 0;
    double rate = 0.0;
    double wilson_low = 0.0;
    double wilson_high = 0.0;
    double z = 3.0;

    bool contains(double p) const { return p >= wilson_low && p <= wilson_high; }
};

/// Monte Carlo panel draws counting how often a bloc reaches the majority
/// threshold, with a Wilson score interval at the given z.
EmpiricalRate empirical_collusion_rate(const PanelSamplingQuery& q, std::uint64_t trials,
                                       Rng& rng, double z = 3.0);

struct ContentScore {
    ContentId id;
    std::uint64_t beta_minor = 0;
    double base_score = 0.0;
};

struct RankedContent {
    ContentScore content;
    double score = 0.0;
};

/// base_score * (1 + weight * log(1 + beta/beta0)), best first, ties by id.
std::vector<RankedContent> visibility_rank(std::vector<ContentScore> contents, double weight,
                                           double beta0 = 100.0);

}  // namespace veribond
