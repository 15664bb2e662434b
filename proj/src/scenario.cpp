#include "veribond/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace veribond {

const char* strategy_kind_name(StrategyKind k) {
    switch (k) {
        case StrategyKind::HonestCreator: return "honest_creator";
        case StrategyKind::MisinfoCreator: return "misinfo_creator";
        case StrategyKind::DiligentChallenger: return "diligent_challenger";
        case StrategyKind::FrivolousChallenger: return "frivolous_challenger";
        case StrategyKind::DiligentJuror: return "diligent_juror";
        case StrategyKind::LazyJuror: return "lazy_juror";
        case StrategyKind::ColludingJuror: return "colluding_juror";
    }
    return "unknown";
}

StrategyKind parse_strategy_kind(const std::string& s) {
    if (s == "honest_creator") return StrategyKind::HonestCreator;
    if (s == "misinfo_creator") return StrategyKind::MisinfoCreator;
    if (s == "diligent_challenger") return StrategyKind::DiligentChallenger;
    if (s == "frivolous_challenger") return StrategyKind::FrivolousChallenger;
    if (s == "diligent_juror") return StrategyKind::DiligentJuror;
    if (s == "lazy_juror") return StrategyKind::LazyJuror;
    if (s == "colluding_juror") return StrategyKind::ColludingJuror;
    throw std::invalid_argument("parse_strategy_kind: unknown kind '" + s + "'");
}

bool is_creator(StrategyKind k) {
    return k == StrategyKind::HonestCreator || k == StrategyKind::MisinfoCreator;
}
bool is_challenger(StrategyKind k) {
    return k == StrategyKind::DiligentChallenger || k == StrategyKind::FrivolousChallenger;
}
bool is_juror(StrategyKind k) {
    return k == StrategyKind::DiligentJuror || k == StrategyKind::LazyJuror ||
           k == StrategyKind::ColludingJuror;
}

namespace {

const char* id_prefix(StrategyKind k) {
    switch (k) {
        case StrategyKind::HonestCreator: return "hc";
        case StrategyKind::MisinfoCreator: return "mc";
        case StrategyKind::DiligentChallenger: return "dc";
        case StrategyKind::FrivolousChallenger: return "fc";
        case StrategyKind::DiligentJuror: return "dj";
        case StrategyKind::LazyJuror: return "lj";
        case StrategyKind::ColludingJuror: return "cj";
    }
    return "xx";
}

void require_prob(double v, const char* name) {
    if (v < 0.0 || v > 1.0)
        throw std::invalid_argument(std::string("AgentGroup: ") + name + " outside [0,1]");
}

}  // namespace

void AgentGroup::validate() const {
    require_prob(accuracy, "accuracy");
    require_prob(detection_skill, "detection_skill");
    require_prob(challenge_rate, "challenge_rate");
    require_prob(error_rate, "error_rate");
    require_prob(abstain_prob, "abstain_prob");
    require_prob(bond_decline_prob, "bond_decline_prob");
}

nlohmann::json AgentGroup::to_json() const {
    return {
        {"kind", strategy_kind_name(kind)},
        {"count", count},
        {"accuracy", accuracy},
        {"detection_skill", detection_skill},
        {"challenge_rate", challenge_rate},
        {"error_rate", error_rate},
        {"abstain_prob", abstain_prob},
        {"bond_decline_prob", bond_decline_prob},
        {"bloc", bloc},
        {"target", vote_name(target)},
    };
}

AgentGroup AgentGroup::from_json(const nlohmann::json& j) {
    AgentGroup g;
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") g.kind = parse_strategy_kind(value.get<std::string>());
        else if (key == "count") g.count = value.get<std::uint32_t>();
        else if (key == "accuracy") g.accuracy = value.get<double>();
        else if (key == "detection_skill") g.detection_skill = value.get<double>();
        else if (key == "challenge_rate") g.challenge_rate = value.get<double>();
        else if (key == "error_rate") g.error_rate = value.get<double>();
        else if (key == "abstain_prob") g.abstain_prob = value.get<double>();
        else if (key == "bond_decline_prob") g.bond_decline_prob = value.get<double>();
        else if (key == "bloc") g.bloc = value.get<int>();
        else if (key == "target") g.target = parse_vote(value.get<std::string>());
        else throw std::invalid_argument("AgentGroup: unknown field '" + key + "'");
    }
    g.validate();
    return g;
}

void ScenarioConfig::validate() const {
    if (contests == 0) throw std::invalid_argument("ScenarioConfig: zero contests");
    if (beta_minor == 0) throw std::invalid_argument("ScenarioConfig: zero bond");
    std::uint32_t creators = 0, jurors = 0;
    for (const auto& g : agents) {
        g.validate();
        if (is_creator(g.kind)) creators += g.count;
        if (is_juror(g.kind)) jurors += g.count;
    }
    if (creators == 0) throw std::invalid_argument("ScenarioConfig: no creator agents");
    if (jurors < engine.jury.panel_size)
        throw std::invalid_argument("ScenarioConfig: fewer jurors than the panel size");
}

nlohmann::json ScenarioConfig::to_json() const {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : agents) groups.push_back(g.to_json());
    return {
        {"seed", seed},
        {"contests", contests},
        {"beta_minor", beta_minor},
        {"viewers", viewers},
        {"evaluators_per_contest", evaluators_per_contest},
        {"visibility_weight", visibility_weight},
        {"engine", engine.to_json()},
        {"agents", groups},
    };
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
    ScenarioConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "seed") c.seed = value.get<std::uint64_t>();
        else if (key == "contests") c.contests = value.get<std::uint32_t>();
        else if (key == "beta_minor") c.beta_minor = value.get<std::uint64_t>();
        else if (key == "viewers") c.viewers = value.get<std::uint32_t>();
        else if (key == "evaluators_per_contest") c.evaluators_per_contest = value.get<std::uint32_t>();
        else if (key == "visibility_weight") c.visibility_weight = value.get<double>();
        else if (key == "engine") c.engine = EngineConfig::from_json(value);
        else if (key == "agents") {
            for (const auto& g : value) c.agents.push_back(AgentGroup::from_json(g));
        } else {
            throw std::invalid_argument("ScenarioConfig: unknown field '" + key + "'");
        }
    }
    c.validate();
    return c;
}

nlohmann::json ScenarioMetrics::to_json() const {
    nlohmann::json trajectory = nlohmann::json::array();
    for (const auto& [idx, mean] : mean_reputation_trajectory)
        trajectory.push_back({{"contest", idx}, {"mean_reputation", mean}});
    return {
        {"contests_total", contests_total},
        {"false_content", false_content},
        {"false_survived", false_survived},
        {"true_content", true_content},
        {"misinformation_survival_rate", misinformation_survival_rate()},
        {"challenges_against_true", challenges_against_true},
        {"false_challenge_wins", false_challenge_wins},
        {"false_challenge_success_rate", false_challenge_success_rate()},
        {"panels_seated", panels_seated},
        {"bloc_majority_panels", bloc_majority_panels},
        {"empirical_collusion_rate", empirical_collusion_rate()},
        {"expired_unchallenged", expired_unchallenged},
        {"payouts_by_role", payouts_by_role},
        {"final_reputation", final_reputation},
        {"reputation_trajectory", trajectory},
        {"escrow_residual", escrow_residual},
        {"reserve", reserve},
        {"state_hash", state_hash},
    };
}

namespace {

struct Agent {
    ParticipantId id;
    AgentGroup spec;
};

Rating draw_rating(StrategyKind kind, Rng& rng) {
    double yes = 0.6, neutral = 0.3;
    if (kind == StrategyKind::DiligentJuror) { yes = 0.85; neutral = 0.12; }
    if (kind == StrategyKind::LazyJuror) { yes = 0.30; neutral = 0.40; }
    const double u = rng.uniform_real();
    if (u < yes) return Rating::Yes;
    if (u < yes + neutral) return Rating::Neutral;
    return Rating::No;
}

}  // namespace

ScenarioRun run_scenario(const ScenarioConfig& config) {
    config.validate();

    EngineConfig ecfg = config.engine;
    ecfg.seed = config.seed;
    Engine engine(ecfg);
    // Agent decisions draw from their own stream so strategy noise does not
    // disturb the engine's selection randomness.
    Rng world(config.seed ^ 0x5DEECE66DULL);

    std::vector<Agent> creators, challengers, jurors;
    std::map<ParticipantId, AgentGroup> juror_spec;
    std::map<ParticipantId, StrategyKind> kind_of;
    std::map<StrategyKind, std::uint32_t> counters;
    for (const auto& group : config.agents) {
        for (std::uint32_t i = 0; i < group.count; ++i) {
            Agent agent;
            agent.id = std::string(id_prefix(group.kind)) + "_" +
                       std::to_string(counters[group.kind]++);
            agent.spec = group;
            kind_of[agent.id] = group.kind;
            if (is_creator(group.kind)) creators.push_back(agent);
            else if (is_challenger(group.kind)) challengers.push_back(agent);
            else jurors.push_back(agent);
        }
    }

    for (const auto& a : creators) engine.register_participant(a.id, true);
    for (const auto& a : challengers) engine.register_participant(a.id, true);
    for (std::uint32_t i = 0; i < config.viewers; ++i)
        engine.register_participant("v_" + std::to_string(i), true);
    for (const auto& a : jurors) {
        JurorProfile profile;
        profile.id = a.id;
        engine.register_juror(profile, a.spec.bond_decline_prob);
        juror_spec[a.id] = a.spec;
    }

    ScenarioMetrics m;
    m.contests_total = config.contests;
    const Money beta(config.beta_minor);
    const std::uint32_t trajectory_stride = std::max<std::uint32_t>(1, config.contests / 50);

    auto juror_vote = [&](const ParticipantId& id, bool truth) -> std::optional<Vote> {
        const AgentGroup& spec = juror_spec.at(id);
        if (spec.kind == StrategyKind::ColludingJuror) return spec.target;
        if (spec.kind == StrategyKind::LazyJuror && world.bernoulli(spec.abstain_prob))
            return std::nullopt;
        const Vote correct = truth ? Vote::ForCreator : Vote::ForChallenger;
        const Vote wrong = truth ? Vote::ForChallenger : Vote::ForCreator;
        return world.bernoulli(spec.error_rate) ? wrong : correct;
    };

    for (std::uint32_t ci = 0; ci < config.contests; ++ci) {
        const Agent& creator = creators[ci % creators.size()];
        const bool truth = world.bernoulli(creator.spec.accuracy);
        const ContentId content = "content_" + std::to_string(ci);
        engine.open_contest(content, creator.id, beta);
        if (truth) ++m.true_content; else ++m.false_content;

        for (const auto& ch : challengers) {
            bool wants = false;
            if (ch.spec.kind == StrategyKind::DiligentChallenger)
                wants = !truth && world.bernoulli(ch.spec.detection_skill);
            else
                wants = world.bernoulli(ch.spec.challenge_rate);
            if (!wants) continue;
            try {
                engine.submit_challenge(content, ch.id, beta, "evidence:" + content + ":" + ch.id);
                if (truth) ++m.challenges_against_true;
            } catch (const EngineError& e) {
                if (e.code() != EngineErr::ChallengeCapExceeded) throw;
            }
        }
        engine.advance_clock(1);

        while (engine.contest(content).state == ContestState::Challenged) {
            engine.activate_next_challenge(content);
            const Contest& c = engine.contest(content);
            const std::vector<ParticipantId> seated = c.panels.back().panel.members;
            ++m.panels_seated;
            std::map<int, std::uint32_t> bloc_seats;
            for (const auto& id : seated) {
                const auto& spec = juror_spec.at(id);
                if (spec.kind == StrategyKind::ColludingJuror) ++bloc_seats[spec.bloc];
            }
            for (const auto& [bloc, seats] : bloc_seats) {
                if (seats >= config.engine.jury.majority_threshold()) {
                    ++m.bloc_majority_panels;
                    break;
                }
            }

            for (const auto& id : seated) {
                if (const auto v = juror_vote(id, truth))
                    engine.record_vote(content, id, *v, "assessment:" + content + ":" + id);
            }

            if (!engine.contest(content).panels.back().panel.all_voted()) {
                const Tick deadline = *engine.contest(content).deliberation_deadline;
                if (engine.now() < deadline) engine.advance_clock(deadline - engine.now());
                bool bench_exhausted = false;
                while (!engine.contest(content).panels.back().panel.all_voted()) {
                    const JuryPanelState& panel = engine.contest(content).panels.back().panel;
                    std::vector<ParticipantId> missing;
                    for (const auto& id : panel.members)
                        if (!panel.votes.count(id)) missing.push_back(id);
                    for (const auto& id : missing) {
                        if (bench_exhausted) {
                            // No alternates left; the absentee votes at the
                            // deadline rather than wedging the contest.
                            const Vote correct = truth ? Vote::ForCreator : Vote::ForChallenger;
                            engine.record_vote(content, id, correct,
                                               "assessment:late:" + content + ":" + id);
                            continue;
                        }
                        try {
                            const ParticipantId sub = engine.substitute_inactive_juror(content, id);
                            if (const auto v = juror_vote(sub, truth))
                                engine.record_vote(content, sub, *v,
                                                   "assessment:" + content + ":" + sub);
                        } catch (const EngineError& e) {
                            if (e.code() != EngineErr::EmptyBench) throw;
                            bench_exhausted = true;
                            const Vote correct = truth ? Vote::ForCreator : Vote::ForChallenger;
                            engine.record_vote(content, id, correct,
                                               "assessment:late:" + content + ":" + id);
                        }
                    }
                }
            }

            const Vote verdict = engine.finalize_active_challenge(content);
            if (verdict == Vote::ForChallenger && truth) ++m.false_challenge_wins;

            if (config.evaluators_per_contest > 0) {
                try {
                    const auto evaluators = engine.assign_contest_evaluators(
                        content, config.evaluators_per_contest);
                    const auto members =
                        engine.contest(content).panels.back().panel.members;
                    for (const auto& ev : evaluators) {
                        for (const auto& member : members) {
                            engine.record_juror_evaluation(
                                content, member,
                                draw_rating(juror_spec.at(member).kind, world), ev);
                        }
                    }
                } catch (const EngineError& e) {
                    if (e.code() != EngineErr::InsufficientPool) throw;
                }
            }
            engine.settle_juror_bonds(content);
        }

        if (engine.contest(content).state == ContestState::Open) {
            const Tick deadline = engine.contest(content).challenge_deadline;
            if (engine.now() < deadline) engine.advance_clock(deadline - engine.now());
            engine.expire_challenge_period(content);
        }

        const ContestState final_state = engine.contest(content).state;
        if (!truth && final_state != ContestState::ResolvedForChallenger) ++m.false_survived;
        if (final_state == ContestState::ExpiredUnchallenged) ++m.expired_unchallenged;

        if (ci % trajectory_stride == 0 || ci + 1 == config.contests) {
            double sum = 0.0;
            for (const auto& [id, entry] : engine.roster()) sum += entry.profile.reputation;
            m.mean_reputation_trajectory.emplace_back(
                ci, engine.roster().empty() ? 0.0 : sum / engine.roster().size());
        }
    }

    for (const auto& [id, minor] : engine.accounts().received) {
        std::string role = "other";
        const auto it = kind_of.find(id);
        if (it != kind_of.end()) {
            if (is_creator(it->second)) role = "creators";
            else if (is_challenger(it->second)) role = "challengers";
            else role = "jurors";
        } else if (id.rfind("v_", 0) == 0) {
            role = "viewers";
        }
        m.payouts_by_role[role] += minor;
    }
    m.payouts_by_role["platform"] += engine.accounts().platform_income;
    for (const auto& [id, entry] : engine.roster())
        m.final_reputation[id] = entry.profile.reputation;
    m.escrow_residual = engine.escrow_residual();
    m.reserve = engine.accounts().reserve;
    m.state_hash = engine.state_hash();

    return ScenarioRun{std::move(m), engine.log()};
}

EmpiricalRate empirical_collusion_rate(const PanelSamplingQuery& q, std::uint64_t trials,
                                       Rng& rng, double z) {
    if (q.panel == 0 || q.panel % 2 == 0)
        throw std::invalid_argument("empirical_collusion_rate: panel must be odd");
    if (trials == 0) throw std::invalid_argument("empirical_collusion_rate: zero trials");
    if (q.pool && (q.colluders > *q.pool || q.panel > *q.pool))
        throw std::invalid_argument("empirical_collusion_rate: invalid finite pool");

    const std::uint32_t t = (q.panel + 1) / 2;
    std::uint64_t hits = 0;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        std::uint32_t bloc = 0;
        if (q.pool) {
            // Floyd's sampling of `panel` distinct ids from [0, N); ids below
            // k are colluders.
            const std::uint64_t N = *q.pool;
            std::set<std::uint64_t> chosen;
            for (std::uint64_t alt = N - q.panel; alt < N; ++alt) {
                const std::uint64_t candidate = rng.uniform_index(alt + 1);
                if (!chosen.insert(candidate).second) chosen.insert(alt);
            }
            for (const std::uint64_t id : chosen)
                if (id < q.colluders) ++bloc;
        } else {
            for (std::uint32_t seat = 0; seat < q.panel; ++seat)
                if (rng.bernoulli(q.ratio)) ++bloc;
        }
        if (bloc >= t) ++hits;
    }

    EmpiricalRate r;
    r.trials = trials;
    r.hits = hits;
    r.z = z;
    r.rate = static_cast<double>(hits) / static_cast<double>(trials);
    const double n = static_cast<double>(trials);
    const double phat = r.rate;
    const double denom = 1.0 + z * z / n;
    const double center = (phat + z * z / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom;
    r.wilson_low = std::max(0.0, center - half);
    r.wilson_high = std::min(1.0, center + half);
    return r;
}

std::vector<RankedContent> visibility_rank(std::vector<ContentScore> contents, double weight,
                                           double beta0) {
    if (beta0 <= 0.0) throw std::invalid_argument("visibility_rank: beta0 must be positive");
    std::vector<RankedContent> ranked;
    ranked.reserve(contents.size());
    for (auto& c : contents) {
        const double boost =
            1.0 + weight * std::log1p(static_cast<double>(c.beta_minor) / beta0);
        const double score = c.base_score * boost;
        ranked.push_back({std::move(c), score});
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedContent& a, const RankedContent& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.content.id < b.content.id;
    });
    return ranked;
}

}  // namespace veribond
