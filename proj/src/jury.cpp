#include "veribond/jury.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace veribond {

void JuryConfig::validate() const {
    if (panel_size == 0 || panel_size % 2 == 0)
        throw std::invalid_argument("JuryConfig: panel_size must be odd");
    if (panel_size > pool_size)
        throw std::invalid_argument("JuryConfig: panel_size exceeds pool_size");
    if (gamma <= Rational(0, 1) || gamma >= Rational(1, 1))
        throw std::invalid_argument("JuryConfig: gamma outside (0,1)");
}

nlohmann::json JuryConfig::to_json() const {
    return {
        {"pool_size", pool_size},
        {"panel_size", panel_size},
        {"bench_size", bench_size},
        {"gamma", gamma.str()},
        {"reputation_threshold", reputation_threshold},
    };
}

JuryConfig JuryConfig::from_json(const nlohmann::json& j) {
    JuryConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "pool_size") c.pool_size = value.get<std::uint32_t>();
        else if (key == "panel_size") c.panel_size = value.get<std::uint32_t>();
        else if (key == "bench_size") c.bench_size = value.get<std::uint32_t>();
        else if (key == "gamma") c.gamma = Rational::parse(value.get<std::string>());
        else if (key == "reputation_threshold") c.reputation_threshold = value.get<double>();
        else throw std::invalid_argument("JuryConfig: unknown field '" + key + "'");
    }
    c.validate();
    return c;
}

nlohmann::json JurorProfile::to_json() const {
    nlohmann::json ratings = nlohmann::json::array();
    for (const Rating r : rating_history) ratings.push_back(rating_name(r));
    return {
        {"id", id},
        {"visibility", visibility},
        {"weight_prosocial", weight_prosocial},
        {"weight_monetary", weight_monetary},
        {"est_va", est_va},
        {"est_vy", est_vy},
        {"participation", participation},
        {"cost_coefficient", cost_coefficient},
        {"reputation", reputation},
        {"rating_history", ratings},
    };
}

JurorProfile JurorProfile::from_json(const nlohmann::json& j) {
    JurorProfile p;
    for (const auto& [key, value] : j.items()) {
        if (key == "id") p.id = value.get<std::string>();
        else if (key == "visibility") p.visibility = value.get<double>();
        else if (key == "weight_prosocial") p.weight_prosocial = value.get<double>();
        else if (key == "weight_monetary") p.weight_monetary = value.get<double>();
        else if (key == "est_va") p.est_va = value.get<double>();
        else if (key == "est_vy") p.est_vy = value.get<double>();
        else if (key == "participation") p.participation = value.get<double>();
        else if (key == "cost_coefficient") p.cost_coefficient = value.get<double>();
        else if (key == "reputation") p.reputation = value.get<double>();
        else if (key == "rating_history") {
            for (const auto& r : value) p.rating_history.push_back(parse_rating(r.get<std::string>()));
        } else {
            throw std::invalid_argument("JurorProfile: unknown field '" + key + "'");
        }
    }
    return p;
}

RatingSummary aggregate_rating(std::span<const Rating> ratings) {
    if (ratings.empty()) throw std::invalid_argument("aggregate_rating: empty rating list");
    std::uint64_t sum = 0;
    for (const Rating r : ratings) sum += static_cast<std::uint64_t>(r);
    RatingSummary s;
    s.mean = static_cast<double>(sum) / static_cast<double>(ratings.size());
    s.at_or_above_neutral = sum >= ratings.size();  // mean >= 1, exact
    return s;
}

SelectedJury select_jury(const std::vector<JurorProfile>& pool, const JuryConfig& config,
                         const std::set<ParticipantId>& exclusions, Rng& rng) {
    config.validate();
    std::vector<std::size_t> eligible;
    eligible.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (exclusions.count(pool[i].id)) continue;
        if (pool[i].reputation < config.reputation_threshold) continue;
        eligible.push_back(i);
    }
    if (eligible.size() < config.panel_size)
        throw std::runtime_error("select_jury: insufficient eligible pool");

    // Partial Fisher-Yates: the first panel_size draws are a uniform sample
    // without replacement; the next draws form the bench.
    const std::size_t want =
        std::min<std::size_t>(eligible.size(),
                              static_cast<std::size_t>(config.panel_size) + config.bench_size);
    for (std::size_t i = 0; i < want; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(eligible.size() - i));
        std::swap(eligible[i], eligible[j]);
    }

    SelectedJury out;
    out.members.reserve(config.panel_size);
    for (std::size_t i = 0; i < config.panel_size; ++i)
        out.members.push_back(pool[eligible[i]].id);
    for (std::size_t i = config.panel_size; i < want; ++i)
        out.bench.push_back(pool[eligible[i]].id);
    return out;
}

std::vector<ParticipantId> assign_evaluators(const std::vector<ParticipantId>& viewer_pool,
                                             const std::set<ParticipantId>& conflicted,
                                             std::size_t count, Rng& rng) {
    std::vector<ParticipantId> eligible;
    eligible.reserve(viewer_pool.size());
    for (const auto& v : viewer_pool) {
        if (!conflicted.count(v)) eligible.push_back(v);
    }
    if (count > eligible.size())
        throw std::runtime_error("assign_evaluators: insufficient conflict-free viewers");
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(eligible.size() - i));
        std::swap(eligible[i], eligible[j]);
    }
    eligible.resize(count);
    return eligible;
}

double juror_benefit(const JurorProfile& profile, double y) {
    const double a = profile.participation;
    return (profile.est_va + profile.est_vy * y) * a -
           profile.cost_coefficient * a * a / 2.0;
}

double optimal_participation(const JurorProfile& profile, double y) {
    if (profile.cost_coefficient <= 0.0)
        throw std::invalid_argument("optimal_participation: cost coefficient must be positive");
    const double a = (profile.est_va + profile.est_vy * y) / profile.cost_coefficient;
    return std::clamp(a, 0.0, 1.0);
}

double reputation_score(const JurorProfile& profile) {
    return profile.visibility *
           (profile.weight_prosocial * profile.est_va -
            profile.weight_monetary * profile.est_vy);
}

nlohmann::json ReputationParams::to_json() const {
    return {
        {"ema_alpha", ema_alpha},
        {"inactivity_penalty", inactivity_penalty},
        {"high_bond_reference", high_bond_reference},
    };
}

ReputationParams ReputationParams::from_json(const nlohmann::json& j) {
    ReputationParams p;
    for (const auto& [key, value] : j.items()) {
        if (key == "ema_alpha") p.ema_alpha = value.get<double>();
        else if (key == "inactivity_penalty") p.inactivity_penalty = value.get<double>();
        else if (key == "high_bond_reference") p.high_bond_reference = value.get<double>();
        else throw std::invalid_argument("ReputationParams: unknown field '" + key + "'");
    }
    return p;
}

JurorProfile update_reputation(JurorProfile profile, const JurorContestOutcome& outcome,
                               const ReputationParams& params) {
    const double alpha = params.ema_alpha;
    if (outcome.voted) {
        if (!outcome.ratings.empty()) {
            const RatingSummary s = aggregate_rating(outcome.ratings);
            const double observed = s.mean / 2.0;  // map {0..2} onto [0,1]
            profile.est_va = (1.0 - alpha) * profile.est_va + alpha * observed;
            profile.rating_history.insert(profile.rating_history.end(),
                                          outcome.ratings.begin(), outcome.ratings.end());
        }
        const double pull = outcome.took_high_bond_case
                                ? outcome.monetary_reward /
                                      (outcome.monetary_reward + params.high_bond_reference)
                                : 0.0;
        profile.est_vy = (1.0 - alpha) * profile.est_vy + alpha * pull;
    } else {
        profile.est_va = std::max(0.0, profile.est_va - params.inactivity_penalty);
    }
    profile.reputation = reputation_score(profile);
    return profile;
}

std::vector<JurorProfile> rank_jurors(std::vector<JurorProfile> profiles, double threshold) {
    std::erase_if(profiles, [&](const JurorProfile& p) { return p.reputation < threshold; });
    std::sort(profiles.begin(), profiles.end(), [](const JurorProfile& a, const JurorProfile& b) {
        if (a.reputation != b.reputation) return a.reputation > b.reputation;
        return a.id < b.id;
    });
    return profiles;
}

}  // namespace veribond
