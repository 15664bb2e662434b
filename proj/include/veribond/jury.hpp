#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "veribond/rating.hpp"
#include "veribond/rational.hpp"
#include "veribond/rng.hpp"

namespace veribond {

using ParticipantId = std::string;
using ContentId = std::string;

struct JuryConfig {
    std::uint32_t pool_size = 100;   // advertised eligible pool size N
    std::uint32_t panel_size = 11;   // n = 2m+1
    std::uint32_t bench_size = 11;   // alternates drawn alongside the panel
    Rational gamma{1, 10};           // juror bond fraction
    double reputation_threshold = 0.0;

    std::uint32_t majority_threshold() const { return (panel_size + 1) / 2; }
    void validate() const;

    nlohmann::json to_json() const;
    static JuryConfig from_json(const nlohmann::json& j);
};

/// Per-juror behavioural profile driving selection eligibility and the
/// reputation score R = x * (gamma_a * E[v_a] - gamma_y * E[v_y]).
struct JurorProfile {
    ParticipantId id;
    double visibility = 1.0;         // x
    double weight_prosocial = 1.0;   // gamma_a
    double weight_monetary = 1.0;    // gamma_y
    double est_va = 0.5;             // running estimate of prosocial value
    double est_vy = 0.0;             // running estimate of monetary value
    double participation = 1.0;      // chosen action a in [0,1]
    double cost_coefficient = 1.0;   // c in C(a) = c*a^2/2
    double reputation = 0.0;         // R, recomputed deterministically
    std::vector<Rating> rating_history;

    nlohmann::json to_json() const;
    static JurorProfile from_json(const nlohmann::json& j);
};

struct RatingRecord {
    Rating value = Rating::Neutral;
    ParticipantId evaluator_id;
    ContentId contest_id;
};

struct RatingSummary {
    double mean = 0.0;                  // of {0,1,2} encodings
    bool at_or_above_neutral = false;   // boundary inclusive
};

/// Mean of the {0,1,2} encodings; the neutral boundary test is done on
/// integer sums so it is exact.
RatingSummary aggregate_rating(std::span<const Rating> ratings);

struct SelectedJury {
    std::vector<ParticipantId> members;
    std::vector<ParticipantId> bench;
};

/// Draws panel_size jurors uniformly without replacement from the eligible
/// pool (above the reputation threshold, not excluded), then a bench of
/// alternates from the remainder.
SelectedJury select_jury(const std::vector<JurorProfile>& pool, const JuryConfig& config,
                         const std::set<ParticipantId>& exclusions, Rng& rng);

/// Uniform conflict-free sample of evaluators from the viewer pool.
std::vector<ParticipantId> assign_evaluators(const std::vector<ParticipantId>& viewer_pool,
                                             const std::set<ParticipantId>& conflicted,
                                             std::size_t count, Rng& rng);

/// (v_a + v_y*y)*a - c*a^2/2 at the profile's chosen participation level.
double juror_benefit(const JurorProfile& profile, double y);

/// Analytic maximizer of the benefit in a: clip((v_a + v_y*y)/c, 0, 1).
double optimal_participation(const JurorProfile& profile, double y);

/// R = x * (gamma_a * est_va - gamma_y * est_vy).
double reputation_score(const JurorProfile& profile);

struct ReputationParams {
    double ema_alpha = 0.2;
    double inactivity_penalty = 0.1;
    // Observed monetary pull saturates as y / (y + reference).
    double high_bond_reference = 100.0;

    nlohmann::json to_json() const;
    static ReputationParams from_json(const nlohmann::json& j);
};

struct JurorContestOutcome {
    std::vector<Rating> ratings;
    bool voted = false;
    double monetary_reward = 0.0;      // y, minor units
    bool took_high_bond_case = false;
};

/// EMA update of the value estimates followed by an R recomputation.
JurorProfile update_reputation(JurorProfile profile, const JurorContestOutcome& outcome,
                               const ReputationParams& params = {});

/// Profiles at or above the threshold, best R first, ties broken by id.
std::vector<JurorProfile> rank_jurors(std::vector<JurorProfile> profiles, double threshold);

}  // namespace veribond
