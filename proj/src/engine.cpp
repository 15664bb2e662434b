#include "veribond/engine.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace veribond {

const char* contest_state_name(ContestState s) {
    switch (s) {
        case ContestState::Open: return "open";
        case ContestState::Challenged: return "challenged";
        case ContestState::Deliberating: return "deliberating";
        case ContestState::ResolvedForCreator: return "resolved_for_creator";
        case ContestState::ResolvedForChallenger: return "resolved_for_challenger";
        case ContestState::ExpiredUnchallenged: return "expired_unchallenged";
    }
    return "unknown";
}

const char* challenge_outcome_name(ChallengeOutcome o) {
    switch (o) {
        case ChallengeOutcome::Queued: return "queued";
        case ChallengeOutcome::Active: return "active";
        case ChallengeOutcome::Won: return "won";
        case ChallengeOutcome::Lost: return "lost";
        case ChallengeOutcome::Dismissed: return "dismissed";
    }
    return "unknown";
}

const char* vote_name(Vote v) {
    return v == Vote::ForCreator ? "for_creator" : "for_challenger";
}

Vote parse_vote(const std::string& s) {
    if (s == "for_creator") return Vote::ForCreator;
    if (s == "for_challenger") return Vote::ForChallenger;
    throw std::invalid_argument("parse_vote: unknown vote '" + s + "'");
}

const char* engine_err_name(EngineErr e) {
    switch (e) {
        case EngineErr::DuplicateContent: return "duplicate_content";
        case EngineErr::UnknownContent: return "unknown_content";
        case EngineErr::DuplicateParticipant: return "duplicate_participant";
        case EngineErr::UnknownParticipant: return "unknown_participant";
        case EngineErr::UnverifiedParticipant: return "unverified_participant";
        case EngineErr::ZeroBond: return "zero_bond";
        case EngineErr::WrongState: return "wrong_state";
        case EngineErr::DeadlinePassed: return "deadline_passed";
        case EngineErr::BondMismatch: return "bond_mismatch";
        case EngineErr::DuplicateChallenger: return "duplicate_challenger";
        case EngineErr::SelfChallenge: return "self_challenge";
        case EngineErr::ChallengeCapExceeded: return "challenge_cap_exceeded";
        case EngineErr::ActiveChallengeExists: return "active_challenge_exists";
        case EngineErr::EmptyQueue: return "empty_queue";
        case EngineErr::NotAJuror: return "not_a_juror";
        case EngineErr::AlreadyVoted: return "already_voted";
        case EngineErr::DeliberationOver: return "deliberation_over";
        case EngineErr::DeliberationPending: return "deliberation_pending";
        case EngineErr::EmptyAssessment: return "empty_assessment";
        case EngineErr::MissingVotes: return "missing_votes";
        case EngineErr::EmptyBench: return "empty_bench";
        case EngineErr::PendingChallenges: return "pending_challenges";
        case EngineErr::NotYetExpired: return "not_yet_expired";
        case EngineErr::NothingToSettle: return "nothing_to_settle";
        case EngineErr::ConflictOfInterest: return "conflict_of_interest";
        case EngineErr::NotAnEvaluator: return "not_an_evaluator";
        case EngineErr::DuplicateEvaluation: return "duplicate_evaluation";
        case EngineErr::InsufficientPool: return "insufficient_pool";
        case EngineErr::InvalidArgument: return "invalid_argument";
        case EngineErr::CorruptLog: return "corrupt_log";
        case EngineErr::ReplayDivergence: return "replay_divergence";
    }
    return "unknown";
}

bool JuryPanelState::is_member(const ParticipantId& id) const {
    return std::find(members.begin(), members.end(), id) != members.end();
}

std::size_t Contest::queued_count() const {
    std::size_t n = 0;
    for (const auto& ch : challenges)
        if (ch.outcome == ChallengeOutcome::Queued) ++n;
    return n;
}

bool Contest::has_challenger(const ParticipantId& id) const {
    for (const auto& ch : challenges)
        if (ch.challenger_id == id) return true;
    return false;
}

bool Contest::any_lost_challenge() const {
    for (const auto& ch : challenges)
        if (ch.outcome == ChallengeOutcome::Lost) return true;
    return false;
}

const PanelRecord* Contest::active_panel() const {
    return panels.empty() ? nullptr : &panels.back();
}

// ---------------------------------------------------------------------------
// Event log serialization
// ---------------------------------------------------------------------------

std::string Event::to_jsonl() const {
    const nlohmann::json j = {
        {"seq", seq},
        {"tick", tick},
        {"kind", kind},
        {"payload", payload},
        {"rng", Rng::state_to_hex(rng_before)},
    };
    return j.dump();
}

Event Event::from_jsonl(const std::string& line) {
    const nlohmann::json j = nlohmann::json::parse(line);
    Event ev;
    ev.seq = j.at("seq").get<std::uint64_t>();
    ev.tick = j.at("tick").get<Tick>();
    ev.kind = j.at("kind").get<std::string>();
    ev.payload = j.at("payload");
    ev.rng_before = Rng::state_from_hex(j.at("rng").get<std::string>());
    return ev;
}

void EventLog::write(std::ostream& os) const {
    for (const auto& ev : entries_) os << ev.to_jsonl() << '\n';
}

EventLog EventLog::read(std::istream& is) {
    EventLog log;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        log.append(Event::from_jsonl(line));
    }
    return log;
}

// ---------------------------------------------------------------------------
// EngineConfig
// ---------------------------------------------------------------------------

nlohmann::json EngineConfig::to_json() const {
    return {
        {"policy", policy.to_json()},
        {"jury", jury.to_json()},
        {"reputation", reputation.to_json()},
        {"challenge_period", challenge_period},
        {"deliberation_period", deliberation_period},
        {"active_challenge_cap", active_challenge_cap},
        {"seed", seed},
    };
}

EngineConfig EngineConfig::from_json(const nlohmann::json& j) {
    EngineConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "policy") c.policy = PayoutPolicy::from_json(value);
        else if (key == "jury") c.jury = JuryConfig::from_json(value);
        else if (key == "reputation") c.reputation = ReputationParams::from_json(value);
        else if (key == "challenge_period") c.challenge_period = value.get<Tick>();
        else if (key == "deliberation_period") c.deliberation_period = value.get<Tick>();
        else if (key == "active_challenge_cap") c.active_challenge_cap = value.get<std::uint32_t>();
        else if (key == "seed") c.seed = value.get<std::uint64_t>();
        else throw std::invalid_argument("EngineConfig: unknown field '" + key + "'");
    }
    return c;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

Engine::Engine(EngineConfig cfg) : config_(std::move(cfg)), rng_(config_.seed) {
    config_.policy.validate();
    config_.jury.validate();
    Event genesis;
    genesis.seq = 0;
    genesis.tick = 0;
    genesis.kind = "engine_init";
    genesis.payload = {{"config", config_.to_json()}};
    genesis.rng_before = rng_.state();
    log_.append(std::move(genesis));
}

void Engine::commit(const std::string& kind, nlohmann::json payload, const Rng::State& before,
                    Tick tick) {
    Event ev;
    ev.seq = log_.size();
    ev.tick = tick;
    ev.kind = kind;
    ev.payload = std::move(payload);
    ev.rng_before = before;
    log_.append(std::move(ev));
}

nlohmann::json Engine::dispatch(const std::string& kind, const nlohmann::json& args) {
    if (kind == "register_participant") return apply_register_participant(args);
    if (kind == "register_juror") return apply_register_juror(args);
    if (kind == "advance_clock") return apply_advance_clock(args);
    if (kind == "open_contest") return apply_open_contest(args);
    if (kind == "submit_challenge") return apply_submit_challenge(args);
    if (kind == "activate_challenge") return apply_activate(args);
    if (kind == "record_vote") return apply_vote(args);
    if (kind == "substitute_juror") return apply_substitute(args);
    if (kind == "finalize_challenge") return apply_finalize(args);
    if (kind == "expire_challenge_period") return apply_expire(args);
    if (kind == "assign_evaluators") return apply_assign_evaluators(args);
    if (kind == "record_evaluation") return apply_evaluation(args);
    if (kind == "settle_juror_bonds") return apply_settle_bonds(args);
    throw EngineError(EngineErr::CorruptLog, "unknown event kind '" + kind + "'");
}

namespace {

// Runs a command body with rollback of the generator on failure, so a
// rejected command leaves no trace (no event, no rng drift).
template <typename Fn>
nlohmann::json execute_guarded(Rng& rng, Fn&& fn) {
    const Rng::State before = rng.state();
    try {
        return fn();
    } catch (...) {
        rng.set_state(before);
        throw;
    }
}

}  // namespace

// Commands record the clock and generator state they started from; a failed
// command rolls the generator back and leaves no event.
#define VERIBOND_COMMAND(kind_literal, args_expr)                                  \
    const Rng::State before_ = rng_.state();                                       \
    const Tick tick_ = clock_;                                                     \
    nlohmann::json payload_;                                                       \
    try {                                                                          \
        payload_ = dispatch(kind_literal, args_expr);                              \
    } catch (...) {                                                                \
        rng_.set_state(before_);                                                   \
        throw;                                                                     \
    }                                                                              \
    commit(kind_literal, payload_, before_, tick_);

void Engine::register_participant(const ParticipantId& id, bool verified) {
    VERIBOND_COMMAND("register_participant",
                     (nlohmann::json{{"id", id}, {"verified", verified}}));
}

void Engine::register_juror(const JurorProfile& profile, double bond_decline_prob) {
    VERIBOND_COMMAND("register_juror",
                     (nlohmann::json{{"profile", profile.to_json()},
                                     {"bond_decline_prob", bond_decline_prob}}));
}

void Engine::advance_clock(Tick by) {
    VERIBOND_COMMAND("advance_clock", (nlohmann::json{{"by", by}}));
}

void Engine::open_contest(const ContentId& content, const ParticipantId& creator, Money beta,
                          std::optional<Tick> challenge_period) {
    const Tick period = challenge_period.value_or(config_.challenge_period);
    VERIBOND_COMMAND("open_contest",
                     (nlohmann::json{{"content", content},
                                     {"creator", creator},
                                     {"beta", beta.minor_units()},
                                     {"period", period}}));
}

void Engine::submit_challenge(const ContentId& content, const ParticipantId& challenger,
                              Money bond, const std::string& evidence_ref) {
    VERIBOND_COMMAND("submit_challenge",
                     (nlohmann::json{{"content", content},
                                     {"challenger", challenger},
                                     {"bond", bond.minor_units()},
                                     {"evidence", evidence_ref}}));
}

ParticipantId Engine::activate_next_challenge(const ContentId& content) {
    VERIBOND_COMMAND("activate_challenge", (nlohmann::json{{"content", content}}));
    return payload_.at("challenger").get<std::string>();
}

void Engine::record_vote(const ContentId& content, const ParticipantId& juror, Vote vote,
                         const std::string& assessment) {
    VERIBOND_COMMAND("record_vote",
                     (nlohmann::json{{"content", content},
                                     {"juror", juror},
                                     {"vote", vote_name(vote)},
                                     {"assessment", assessment}}));
}

ParticipantId Engine::substitute_inactive_juror(const ContentId& content,
                                                const ParticipantId& juror) {
    VERIBOND_COMMAND("substitute_juror",
                     (nlohmann::json{{"content", content}, {"juror", juror}}));
    return payload_.at("substitute").get<std::string>();
}

Vote Engine::finalize_active_challenge(const ContentId& content) {
    VERIBOND_COMMAND("finalize_challenge", (nlohmann::json{{"content", content}}));
    return parse_vote(payload_.at("verdict").get<std::string>());
}

void Engine::expire_challenge_period(const ContentId& content) {
    VERIBOND_COMMAND("expire_challenge_period", (nlohmann::json{{"content", content}}));
}

std::vector<ParticipantId> Engine::assign_contest_evaluators(const ContentId& content,
                                                             std::size_t count) {
    VERIBOND_COMMAND("assign_evaluators",
                     (nlohmann::json{{"content", content}, {"count", count}}));
    return payload_.at("sealed").at("evaluators").get<std::vector<std::string>>();
}

void Engine::record_juror_evaluation(const ContentId& content, const ParticipantId& juror,
                                     Rating rating, const ParticipantId& evaluator) {
    VERIBOND_COMMAND("record_evaluation",
                     (nlohmann::json{{"content", content},
                                     {"juror", juror},
                                     {"rating", rating_name(rating)},
                                     {"sealed", {{"evaluator", evaluator}}}}));
}

void Engine::settle_juror_bonds(const ContentId& content) {
    VERIBOND_COMMAND("settle_juror_bonds", (nlohmann::json{{"content", content}}));
}

#undef VERIBOND_COMMAND

// ---------------------------------------------------------------------------
// Command bodies. Each validates fully before mutating.
// ---------------------------------------------------------------------------

Contest& Engine::must_contest(const ContentId& content) {
    const auto it = contests_.find(content);
    if (it == contests_.end())
        throw EngineError(EngineErr::UnknownContent, "no contest for '" + content + "'");
    return it->second;
}

const RosterEntry& Engine::must_juror(const ParticipantId& id) const {
    const auto it = roster_.find(id);
    if (it == roster_.end())
        throw EngineError(EngineErr::UnknownParticipant, "no juror '" + id + "'");
    return it->second;
}

void Engine::require_verified(const ParticipantId& id) const {
    const auto it = participants_.find(id);
    if (it == participants_.end())
        throw EngineError(EngineErr::UnknownParticipant, "unregistered participant '" + id + "'");
    if (!it->second)
        throw EngineError(EngineErr::UnverifiedParticipant, "participant '" + id + "' not verified");
}

void Engine::credit(const ParticipantId& id, std::uint64_t minor) {
    accounts_.received[id] += minor;
    accounts_.paid_out += minor;
}

nlohmann::json Engine::apply_register_participant(const nlohmann::json& a) {
    const auto id = a.at("id").get<std::string>();
    const bool verified = a.at("verified").get<bool>();
    if (id.empty()) throw EngineError(EngineErr::InvalidArgument, "empty participant id");
    if (participants_.count(id))
        throw EngineError(EngineErr::DuplicateParticipant, "participant '" + id + "' exists");
    participants_[id] = verified;
    return {{"id", id}, {"verified", verified}};
}

nlohmann::json Engine::apply_register_juror(const nlohmann::json& a) {
    JurorProfile profile = JurorProfile::from_json(a.at("profile"));
    const double decline = a.at("bond_decline_prob").get<double>();
    if (profile.id.empty()) throw EngineError(EngineErr::InvalidArgument, "empty juror id");
    if (decline < 0.0 || decline > 1.0)
        throw EngineError(EngineErr::InvalidArgument, "bond_decline_prob outside [0,1]");
    if (participants_.count(profile.id))
        throw EngineError(EngineErr::DuplicateParticipant, "participant '" + profile.id + "' exists");
    profile.reputation = reputation_score(profile);
    participants_[profile.id] = true;
    roster_[profile.id] = RosterEntry{profile, decline};
    return {{"profile", profile.to_json()}, {"bond_decline_prob", decline}};
}

nlohmann::json Engine::apply_advance_clock(const nlohmann::json& a) {
    const Tick by = a.at("by").get<Tick>();
    if (by == 0) throw EngineError(EngineErr::InvalidArgument, "clock must advance by at least 1");
    clock_ += by;
    return {{"by", by}};
}

nlohmann::json Engine::apply_open_contest(const nlohmann::json& a) {
    const auto content = a.at("content").get<std::string>();
    const auto creator = a.at("creator").get<std::string>();
    const Money beta(a.at("beta").get<std::uint64_t>());
    const Tick period = a.at("period").get<Tick>();

    if (content.empty()) throw EngineError(EngineErr::InvalidArgument, "empty content id");
    if (contests_.count(content))
        throw EngineError(EngineErr::DuplicateContent, "content '" + content + "' already bonded");
    require_verified(creator);
    if (beta.is_zero()) throw EngineError(EngineErr::ZeroBond, "veracity bond must be positive");
    if (period == 0) throw EngineError(EngineErr::InvalidArgument, "zero challenge period");

    Contest c;
    c.content_id = content;
    c.creator_id = creator;
    c.veracity_bond = beta;
    c.state = ContestState::Open;
    c.opened_at = clock_;
    c.challenge_deadline = clock_ + period;
    contests_.emplace(content, std::move(c));
    accounts_.injected += beta.minor_units();
    accounts_.escrow_vb += beta.minor_units();
    return {{"content", content}, {"creator", creator}, {"beta", beta.minor_units()}, {"period", period}};
}

nlohmann::json Engine::apply_submit_challenge(const nlohmann::json& a) {
    const auto content = a.at("content").get<std::string>();
    const auto challenger = a.at("challenger").get<std::string>();
    const Money bond(a.at("bond").get<std::uint64_t>());
    const auto evidence = a.at("evidence").get<std::string>();

    Contest& c = must_contest(content);
    if (c.state != ContestState::Open && c.state != ContestState::Challenged &&
        c.state != ContestState::Deliberating)
        throw EngineError(EngineErr::WrongState,
                          std::string("cannot challenge in state ") + contest_state_name(c.state));
    if (clock_ >= c.challenge_deadline)
        throw EngineError(EngineErr::DeadlinePassed, "challenge period over for '" + content + "'");
    require_verified(challenger);
    if (challenger == c.creator_id)
        throw EngineError(EngineErr::SelfChallenge, "creator cannot challenge own content");
    if (c.has_challenger(challenger))
        throw EngineError(EngineErr::DuplicateChallenger,
                          "'" + challenger + "' already challenged '" + content + "'");
    if (bond != c.veracity_bond)
        throw EngineError(EngineErr::BondMismatch,
                          "counter bond " + bond.str() + " != veracity bond " + c.veracity_bond.str());
    if (active_challenge_count_[challenger] >= config_.active_challenge_cap)
        throw EngineError(EngineErr::ChallengeCapExceeded,
                          "'" + challenger + "' at the active-challenge cap");

    Challenge ch;
    ch.challenger_id = challenger;
    ch.counter_bond = bond;
    ch.evidence_ref = evidence;
    ch.outcome = ChallengeOutcome::Queued;
    c.challenges.push_back(std::move(ch));
    if (c.state == ContestState::Open) c.state = ContestState::Challenged;
    ++active_challenge_count_[challenger];
    accounts_.injected += bond.minor_units();
    accounts_.escrow_cvb += bond.minor_units();
    return {{"content", content}, {"challenger", challenger}, {"bond", bond.minor_units()},
            {"evidence", evidence}};
}

ParticipantId Engine::seat_with_bond(std::vector<ParticipantId>& bench,
                                     const ParticipantId& candidate,
                                     std::vector<ParticipantId>& declined) {
    ParticipantId current = candidate;
    for (;;) {
        const double decline_prob = must_juror(current).bond_decline_prob;
        if (!rng_.bernoulli(decline_prob)) return current;
        declined.push_back(current);
        if (bench.empty())
            throw EngineError(EngineErr::EmptyBench, "no alternates left for '" + current + "'");
        // Next best available: highest reputation, ties broken at random.
        double best = must_juror(bench[0]).profile.reputation;
        for (const auto& id : bench) best = std::max(best, must_juror(id).profile.reputation);
        std::vector<std::size_t> tied;
        for (std::size_t i = 0; i < bench.size(); ++i)
            if (must_juror(bench[i]).profile.reputation == best) tied.push_back(i);
        const std::size_t pick = tied[rng_.uniform_index(tied.size())];
        current = bench[pick];
        bench.erase(bench.begin() + static_cast<std::ptrdiff_t>(pick));
    }
}

nlohmann::json Engine::apply_activate(const nlohmann::json& a) {
    const auto content = a.at("content").get<std::string>();
    Contest& c = must_contest(content);
    if (c.state == ContestState::Deliberating)
        throw EngineError(EngineErr::ActiveChallengeExists, "a challenge is already active");
    if (c.state != ContestState::Challenged)
        throw EngineError(EngineErr::WrongState,
                          std::string("cannot activate in state ") + contest_state_name(c.state));
    std::vector<std::size_t> queued;
    for (std::size_t i = 0; i < c.challenges.size(); ++i)
        if (c.challenges[i].outcome == ChallengeOutcome::Queued) queued.push_back(i);
    if (queued.empty()) throw EngineError(EngineErr::EmptyQueue, "no queued challenges");

    const std::size_t chosen = queued[rng_.uniform_index(queued.size())];

    std::set<ParticipantId> exclusions{c.creator_id};
    for (const auto& ch : c.challenges) exclusions.insert(ch.challenger_id);

    std::vector<JurorProfile> pool;
    pool.reserve(roster_.size());
    std::size_t eligible = 0;
    for (const auto& [id, entry] : roster_) {
        pool.push_back(entry.profile);
        if (!exclusions.count(id) &&
            entry.profile.reputation >= config_.jury.reputation_threshold)
            ++eligible;
    }
    if (eligible < config_.jury.panel_size)
        throw EngineError(EngineErr::InsufficientPool,
                          "eligible pool " + std::to_string(eligible) + " < panel " +
                              std::to_string(config_.jury.panel_size));

    JuryConfig jcfg = config_.jury;
    jcfg.pool_size = static_cast<std::uint32_t>(std::max<std::size_t>(roster_.size(), jcfg.panel_size));
    SelectedJury drawn = select_jury(pool, jcfg, exclusions, rng_);

    std::vector<ParticipantId> members;
    std::vector<ParticipantId> bench = drawn.bench;
    std::vector<ParticipantId> declined;
    std::vector<Substitution> subs;
    members.reserve(drawn.members.size());
    for (const auto& cand : drawn.members) {
        const ParticipantId seated = seat_with_bond(bench, cand, declined);
        if (seated != cand) subs.push_back({cand, seated, clock_});
        members.push_back(seated);
    }

    // Commit.
    const Money jbond = juror_bond_amount(c.veracity_bond, config_.policy.gamma);
    PanelRecord rec;
    rec.challenge_index = chosen;
    rec.panel.members = members;
    rec.panel.bench = bench;
    rec.panel.substitutions = subs;
    for (const auto& m : members) {
        rec.bonds[m] = JurorBond{m, jbond, JurorBondStatus::Held};
        accounts_.injected += jbond.minor_units();
        accounts_.escrow_juror += jbond.minor_units();
    }
    c.challenges[chosen].outcome = ChallengeOutcome::Active;
    c.active_challenge = chosen;
    c.deliberation_deadline = clock_ + config_.deliberation_period;
    c.state = ContestState::Deliberating;
    c.panels.push_back(std::move(rec));

    return {{"content", content},
            {"challenger", c.challenges[chosen].challenger_id},
            {"members", members},
            {"bench", bench},
            {"declined", declined},
            {"juror_bond", jbond.minor_units()}};
}

nlohmann::json Engine::apply_vote(const nlohmann::json& a) {
    const auto content = a.at("content").get<std::string>();
    const auto juror = a.at("juror").get<std::string>();
    const Vote vote = parse_vote(a.at("vote").get<std::string>());
    const auto assessment = a.at("assessment").get<std::string>();

    Contest& c = must_contest(content);
    if (c.state != ContestState::Deliberating)
        throw EngineError(EngineErr::WrongState, "no deliberation in progress");
    JuryPanelState& panel = c.panels.back().panel;
    if (!panel.is_member(juror))
        throw EngineError(EngineErr::NotAJuror, "'" + juror + "' is not on this panel");
    if (panel.votes.count(juror))
        throw EngineError(EngineErr::AlreadyVoted, "'" + juror + "' already voted");
    if (clock_ > *c.deliberation_deadline)
        throw EngineError(EngineErr::DeliberationOver, "deliberation deadline passed");
    if (assessment.empty())
        throw EngineError(EngineErr::EmptyAssessment, "assessment text required");

    panel.votes[juror] = vote;
    panel.assessments[juror] = assessment;
    return {{"content", content}, {"juror", juror}, {"vote", vote_name(vote)},
            {"assessment", assessment}};
}

nlohmann::json Engine::apply_substitute(const nlohmann::json& a) {
    const auto content = a.at("content").get<std::string>();
    const auto juror = a.at("juror").get<std::string>();

    Contest& c = must_contest(content);
    if (c.state != ContestState::Deliberating)
        throw EngineError(EngineErr::WrongState, "no deliberation in progress");
    PanelRecord& rec = c.panels.back();
    JuryPanelState& panel = rec.panel;
    if (!panel.is_member(juror))
        throw EngineError(EngineErr::NotAJuror, "'" + juror + "' is not on this panel");
    if (panel.votes.count(juror))
        throw EngineError(EngineErr::AlreadyVoted, "'" + juror + "' already voted, cannot substitute");
    if (clock_ < *c.deliberation_deadline)
        throw EngineError(EngineErr::DeliberationPending, "deadline not reached yet");
    if (panel.bench.empty())
        throw EngineError(EngineErr::EmptyBench, "no alternates available");

    std::vector<ParticipantId> bench = panel.bench;
    std::vector<ParticipantId> declined;
    // Pull the best-ranked alternate, then run the bond gauntlet.
    double best = must_juror(bench[0]).profile.reputation;
    for (const auto& id : bench) best = std::max(best, must_juror(id).profile.reputation);
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < bench.size(); ++i)
        if (must_juror(bench[i]).profile.reputation == best) tied.push_back(i);
    const std::size_t pick = tied[rng_.uniform_index(tied.size())];
    const ParticipantId first = bench[pick];
    bench.erase(bench.begin() + static_cast<std::ptrdiff_t>(pick));
    const ParticipantId substitute = seat_with_bond(bench, first, declined);

    // Commit: forfeit the absentee's bond, penalize reputation, swap seats.
    JurorBond& old_bond = rec.bonds.at(juror);
    old_bond.status = JurorBondStatus::ForfeitedToReserve;
    accounts_.escrow_juror -= old_bond.amount.minor_units();
    accounts_.reserve += old_bond.amount.minor_units();

    JurorContestOutcome inactive;
    inactive.voted = false;
    roster_.at(juror).profile =
        update_reputation(roster_.at(juror).profile, inactive, config_.reputation);

    *std::find(panel.members.begin(), panel.members.end(), juror) = substitute;
    panel.bench = bench;
    panel.substitutions.push_back({juror, substitute, clock_});

    const Money jbond = juror_bond_amount(c.veracity_bond, config_.policy.gamma);
    rec.bonds[substitute] = JurorBond{substitute, jbond, JurorBondStatus::Held};
    accounts_.injected += jbond.minor_units();
    accounts_.escrow_juror += jbond.minor_units();

    return {{"content", content}, {"juror", juror}, {"substitute", substitute},
            {"declined", declined}, {"forfeited", old_bond.amount.minor_units()}};
}

nlohmann::json Engine::apply_finalize(const nlohmann::json& a) {
    const auto content = a.at("content").get<std::string>();
    Contest& c = must_contest(content);
    if (c.state != ContestState::Deliberating)
        throw EngineError(EngineErr::WrongState, "no deliberation in progress");
    PanelRecord& rec = c.panels.back();
    JuryPanelState& panel = rec.panel;
    if (!panel.all_voted())
        throw EngineError(EngineErr::MissingVotes,
                          std::to_string(panel.members.size() - panel.votes.size()) +
                              " vote(s) missing; substitute inactive jurors first");

    std::size_t for_creator = 0, for_challenger = 0;
    for (const auto& [id, v] : panel.votes)
        (v == Vote::ForCreator ? for_creator : for_challenger)++;
    const Vote verdict = for_challenger > for_creator ? Vote::ForChallenger : Vote::ForCreator;

    const Money beta = c.veracity_bond;
    Challenge& active = c.challenges.at(*c.active_challenge);
    const ParticipantId challenger = active.challenger_id;
    const ParticipantId winner = verdict == Vote::ForChallenger ? challenger : c.creator_id;

    const Payout payout = distribute_forfeited_bond(beta, config_.policy, panel.members);

    // The losing side's escrowed bond funds the payout.
    if (verdict == Vote::ForChallenger) {
        accounts_.escrow_vb -= beta.minor_units();
    } else {
        accounts_.escrow_cvb -= beta.minor_units();
    }
    credit(winner, payout.winner_share.minor_units());
    for (const auto& [jid, fee] : payout.juror_shares) credit(jid, fee.minor_units());
    accounts_.platform_income += payout.platform_share.minor_units();
    accounts_.paid_out += payout.platform_share.minor_units();

    nlohmann::json dismissed = nlohmann::json::array();
    bool vb_refunded = false;

    if (verdict == Vote::ForChallenger) {
        active.outcome = ChallengeOutcome::Won;
        --active_challenge_count_[challenger];
        // Winner's own counter-bond comes back in full.
        accounts_.escrow_cvb -= beta.minor_units();
        credit(challenger, beta.minor_units());
        for (auto& ch : c.challenges) {
            if (ch.outcome != ChallengeOutcome::Queued) continue;
            ch.outcome = ChallengeOutcome::Dismissed;
            --active_challenge_count_[ch.challenger_id];
            accounts_.escrow_cvb -= ch.counter_bond.minor_units();
            credit(ch.challenger_id, ch.counter_bond.minor_units());
            dismissed.push_back(ch.challenger_id);
        }
        c.state = ContestState::ResolvedForChallenger;
    } else {
        active.outcome = ChallengeOutcome::Lost;
        --active_challenge_count_[challenger];
        if (c.queued_count() > 0) {
            c.state = ContestState::Challenged;
        } else if (clock_ >= c.challenge_deadline) {
            c.state = ContestState::ResolvedForCreator;
            accounts_.escrow_vb -= beta.minor_units();
            credit(c.creator_id, beta.minor_units());
            vb_refunded = true;
        } else {
            c.state = ContestState::Open;
        }
    }
    c.active_challenge.reset();
    c.deliberation_deadline.reset();
    rec.finalized = true;
    rec.juror_fee_minor = payout.juror_shares.front().second.minor_units();

    return {{"content", content},
            {"verdict", vote_name(verdict)},
            {"for_creator", for_creator},
            {"for_challenger", for_challenger},
            {"winner", winner},
            {"winner_share", payout.winner_share.minor_units()},
            {"per_juror_fee", rec.juror_fee_minor},
            {"platform_share", payout.platform_share.minor_units()},
            {"dismissed", dismissed},
            {"vb_refunded", vb_refunded}};
}

nlohmann::json Engine::apply_expire(const nlohmann::json& a) {
    const auto content = a.at("content").get<std::string>();
    Contest& c = must_contest(content);
    if (c.state == ContestState::Challenged || c.state == ContestState::Deliberating)
        throw EngineError(EngineErr::PendingChallenges,
                          "challenges must be resolved before expiry");
    if (c.state != ContestState::Open)
        throw EngineError(EngineErr::WrongState,
                          std::string("cannot expire in state ") + contest_state_name(c.state));
    if (clock_ < c.challenge_deadline)
        throw EngineError(EngineErr::NotYetExpired, "challenge period still running");

    accounts_.escrow_vb -= c.veracity_bond.minor_units();
    credit(c.creator_id, c.veracity_bond.minor_units());
    c.state = c.any_lost_challenge() ? ContestState::ResolvedForCreator
                                     : ContestState::ExpiredUnchallenged;
    return {{"content", content},
            {"refunded", c.veracity_bond.minor_units()},
            {"state", contest_state_name(c.state)}};
}

PanelRecord* Engine::panel_awaiting_settlement(Contest& c) {
    for (auto it = c.panels.rbegin(); it != c.panels.rend(); ++it) {
        if (it->finalized && !it->bonds_settled) return &*it;
    }
    return nullptr;
}

nlohmann::json Engine::apply_assign_evaluators(const nlohmann::json& a) {
    const auto content = a.at("content").get<std::string>();
    const auto count = a.at("count").get<std::size_t>();
    Contest& c = must_contest(content);
    PanelRecord* rec = panel_awaiting_settlement(c);
    if (!rec) throw EngineError(EngineErr::NothingToSettle, "no finalized panel awaiting evaluation");
    if (!rec->evaluators.empty())
        throw EngineError(EngineErr::DuplicateEvaluation, "evaluators already assigned");
    if (count == 0) throw EngineError(EngineErr::InvalidArgument, "evaluator count must be positive");

    std::set<ParticipantId> conflicted{c.creator_id};
    for (const auto& ch : c.challenges) conflicted.insert(ch.challenger_id);
    for (const auto& p : c.panels) {
        for (const auto& m : p.panel.members) conflicted.insert(m);
        for (const auto& s : p.panel.substitutions) conflicted.insert(s.replaced);
    }

    std::vector<ParticipantId> viewers;
    viewers.reserve(participants_.size());
    for (const auto& [id, verified] : participants_)
        if (verified && !conflicted.count(id)) viewers.push_back(id);
    if (count > viewers.size())
        throw EngineError(EngineErr::InsufficientPool,
                          "only " + std::to_string(viewers.size()) + " conflict-free viewers");

    const std::vector<ParticipantId> sampled = assign_evaluators(viewers, {}, count, rng_);
    rec->evaluators = sampled;
    return {{"content", content}, {"count", count}, {"sealed", {{"evaluators", sampled}}}};
}

nlohmann::json Engine::apply_evaluation(const nlohmann::json& a) {
    const auto content = a.at("content").get<std::string>();
    const auto juror = a.at("juror").get<std::string>();
    const Rating rating = parse_rating(a.at("rating").get<std::string>());
    const auto evaluator = a.at("sealed").at("evaluator").get<std::string>();

    Contest& c = must_contest(content);
    PanelRecord* rec = panel_awaiting_settlement(c);
    if (!rec) throw EngineError(EngineErr::NothingToSettle, "no finalized panel awaiting evaluation");
    if (std::find(rec->evaluators.begin(), rec->evaluators.end(), evaluator) ==
        rec->evaluators.end())
        throw EngineError(EngineErr::NotAnEvaluator, "'" + evaluator + "' was not assigned");
    if (!rec->panel.is_member(juror))
        throw EngineError(EngineErr::NotAJuror, "'" + juror + "' did not serve on this panel");
    for (const auto& [src, r] : rec->ratings[juror]) {
        if (src == evaluator)
            throw EngineError(EngineErr::DuplicateEvaluation,
                              "evaluator already rated this juror");
    }
    rec->ratings[juror].emplace_back(evaluator, rating);
    return {{"content", content}, {"juror", juror}, {"rating", rating_name(rating)},
            {"sealed", {{"evaluator", evaluator}}}};
}

nlohmann::json Engine::apply_settle_bonds(const nlohmann::json& a) {
    const auto content = a.at("content").get<std::string>();
    Contest& c = must_contest(content);
    PanelRecord* rec = panel_awaiting_settlement(c);
    if (!rec) throw EngineError(EngineErr::NothingToSettle, "no finalized panel to settle");

    nlohmann::json refunded = nlohmann::json::array();
    nlohmann::json forfeited = nlohmann::json::array();
    for (const auto& member : rec->panel.members) {
        JurorBond& bond = rec->bonds.at(member);
        if (bond.status != JurorBondStatus::Held) continue;

        std::vector<Rating> values;
        for (const auto& [src, r] : rec->ratings[member]) values.push_back(r);
        // No ratings recorded counts as neutral, not as a failure to rate.
        const bool at_or_above =
            values.empty() ? true : aggregate_rating(values).at_or_above_neutral;

        bond = settle_juror_bond(bond, /*attended=*/true, /*assessment_submitted=*/true,
                                 at_or_above ? Rating::Neutral : Rating::No);
        accounts_.escrow_juror -= bond.amount.minor_units();
        if (bond.status == JurorBondStatus::Refunded) {
            credit(member, bond.amount.minor_units());
            refunded.push_back(member);
        } else {
            accounts_.reserve += bond.amount.minor_units();
            forfeited.push_back(member);
        }

        JurorContestOutcome outcome;
        outcome.ratings = values;
        outcome.voted = true;
        outcome.monetary_reward = static_cast<double>(rec->juror_fee_minor);
        outcome.took_high_bond_case =
            static_cast<double>(c.veracity_bond.minor_units()) >=
            config_.reputation.high_bond_reference;
        roster_.at(member).profile =
            update_reputation(roster_.at(member).profile, outcome, config_.reputation);
    }
    rec->bonds_settled = true;
    return {{"content", content}, {"refunded", refunded}, {"forfeited", forfeited}};
}

// ---------------------------------------------------------------------------
// Inspection & replay
// ---------------------------------------------------------------------------

bool Engine::has_contest(const ContentId& content) const { return contests_.count(content) > 0; }

const Contest& Engine::contest(const ContentId& content) const {
    const auto it = contests_.find(content);
    if (it == contests_.end())
        throw EngineError(EngineErr::UnknownContent, "no contest for '" + content + "'");
    return it->second;
}

nlohmann::json Engine::state_json() const {
    nlohmann::json contests = nlohmann::json::object();
    for (const auto& [id, c] : contests_) {
        nlohmann::json challenges = nlohmann::json::array();
        for (const auto& ch : c.challenges) {
            challenges.push_back({{"challenger", ch.challenger_id},
                                  {"bond", ch.counter_bond.minor_units()},
                                  {"evidence", ch.evidence_ref},
                                  {"outcome", challenge_outcome_name(ch.outcome)}});
        }
        nlohmann::json panels = nlohmann::json::array();
        for (const auto& p : c.panels) {
            nlohmann::json votes = nlohmann::json::object();
            for (const auto& [jid, v] : p.panel.votes) votes[jid] = vote_name(v);
            nlohmann::json bonds = nlohmann::json::object();
            for (const auto& [jid, b] : p.bonds)
                bonds[jid] = {{"amount", b.amount.minor_units()},
                              {"status", juror_bond_status_name(b.status)}};
            nlohmann::json ratings = nlohmann::json::object();
            for (const auto& [jid, list] : p.ratings) {
                nlohmann::json arr = nlohmann::json::array();
                for (const auto& [src, r] : list) arr.push_back(rating_name(r));
                ratings[jid] = arr;
            }
            nlohmann::json subs = nlohmann::json::array();
            for (const auto& s : p.panel.substitutions)
                subs.push_back({{"replaced", s.replaced}, {"substitute", s.substitute},
                                {"tick", s.tick}});
            panels.push_back({{"challenge_index", p.challenge_index},
                              {"members", p.panel.members},
                              {"bench", p.panel.bench},
                              {"votes", votes},
                              {"assessments", p.panel.assessments},
                              {"substitutions", subs},
                              {"bonds", bonds},
                              {"ratings", ratings},
                              {"juror_fee", p.juror_fee_minor},
                              {"finalized", p.finalized},
                              {"bonds_settled", p.bonds_settled}});
        }
        nlohmann::json cj = {{"creator", c.creator_id},
                             {"beta", c.veracity_bond.minor_units()},
                             {"state", contest_state_name(c.state)},
                             {"challenges", challenges},
                             {"panels", panels},
                             {"opened_at", c.opened_at},
                             {"challenge_deadline", c.challenge_deadline}};
        if (c.active_challenge) cj["active_challenge"] = *c.active_challenge;
        if (c.deliberation_deadline) cj["deliberation_deadline"] = *c.deliberation_deadline;
        contests[id] = std::move(cj);
    }

    nlohmann::json roster = nlohmann::json::object();
    for (const auto& [id, entry] : roster_)
        roster[id] = {{"profile", entry.profile.to_json()},
                      {"bond_decline_prob", entry.bond_decline_prob}};

    return {{"clock", clock_},
            {"rng", rng_.state_hex()},
            {"contests", contests},
            {"participants", participants_},
            {"roster", roster},
            {"active_counts", active_challenge_count_},
            {"accounts",
             {{"injected", accounts_.injected},
              {"escrow_vb", accounts_.escrow_vb},
              {"escrow_cvb", accounts_.escrow_cvb},
              {"escrow_juror", accounts_.escrow_juror},
              {"paid_out", accounts_.paid_out},
              {"platform_income", accounts_.platform_income},
              {"reserve", accounts_.reserve},
              {"received", accounts_.received}}}};
}

std::uint64_t Engine::state_hash() const {
    const std::string dump = state_json().dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (const unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

Engine Engine::replay(const EventLog& log) { return replay_prefix(log, log.size()); }

Engine Engine::replay_prefix(const EventLog& log, std::size_t count) {
    if (log.size() == 0 || count == 0)
        throw EngineError(EngineErr::CorruptLog, "empty log");
    count = std::min(count, log.size());
    const Event& genesis = log.entries().front();
    if (genesis.kind != "engine_init")
        throw EngineError(EngineErr::CorruptLog, "log does not start with engine_init");

    Engine eng(EngineConfig::from_json(genesis.payload.at("config")));
    const Event& own = eng.log_.entries().front();
    if (own.payload != genesis.payload || genesis.seq != 0 || genesis.tick != 0 ||
        own.rng_before != genesis.rng_before)
        throw EngineError(EngineErr::CorruptLog, "genesis entry mismatch");

    for (std::size_t i = 1; i < count; ++i) {
        const Event& ev = log.entries()[i];
        if (ev.seq != eng.log_.size())
            throw EngineError(EngineErr::CorruptLog,
                              "sequence gap at entry " + std::to_string(i));
        if (ev.tick != eng.clock_)
            throw EngineError(EngineErr::CorruptLog,
                              "tick mismatch at entry " + std::to_string(i));
        if (ev.rng_before != eng.rng_.state())
            throw EngineError(EngineErr::CorruptLog,
                              "generator state mismatch at entry " + std::to_string(i));
        const Tick tick_before = eng.clock_;
        nlohmann::json produced;
        try {
            produced = execute_guarded(eng.rng_, [&] { return eng.dispatch(ev.kind, ev.payload); });
        } catch (const EngineError& err) {
            if (err.code() == EngineErr::CorruptLog) throw;
            throw EngineError(EngineErr::ReplayDivergence,
                              "entry " + std::to_string(i) + " rejected: " + err.what());
        }
        if (produced != ev.payload)
            throw EngineError(EngineErr::ReplayDivergence,
                              "entry " + std::to_string(i) + " produced different outcome");
        eng.commit(ev.kind, produced, ev.rng_before, tick_before);
    }
    return eng;
}

}  // namespace veribond
