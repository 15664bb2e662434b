#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "veribond/jury.hpp"
#include "veribond/money.hpp"
#include "veribond/payout.hpp"
#include "veribond/rng.hpp"

namespace veribond {

using Tick = std::uint64_t;

enum class ContestState {
    Open,
    Challenged,
    Deliberating,
    ResolvedForCreator,
    ResolvedForChallenger,
    ExpiredUnchallenged,
};

enum class ChallengeOutcome { Queued, Active, Won, Lost, Dismissed };
enum class Vote { ForCreator, ForChallenger };

const char* contest_state_name(ContestState s);
const char* challenge_outcome_name(ChallengeOutcome o);
const char* vote_name(Vote v);
Vote parse_vote(const std::string& s);

struct Challenge {
    ParticipantId challenger_id;
    Money counter_bond;
    std::string evidence_ref;
    ChallengeOutcome outcome = ChallengeOutcome::Queued;
};

struct Substitution {
    ParticipantId replaced;
    ParticipantId substitute;
    Tick tick = 0;
};

struct JuryPanelState {
    std::vector<ParticipantId> members;  // current seats, selection order
    std::vector<ParticipantId> bench;    // remaining alternates, best first
    std::map<ParticipantId, Vote> votes;
    std::map<ParticipantId, std::string> assessments;
    std::vector<Substitution> substitutions;

    bool all_voted() const { return votes.size() == members.size(); }
    bool is_member(const ParticipantId& id) const;
};

/// One activated challenge's jury, bonds and evaluation state.
struct PanelRecord {
    std::size_t challenge_index = 0;
    JuryPanelState panel;
    std::map<ParticipantId, JurorBond> bonds;
    // Evaluator identities are sealed: they appear only inside the event
    // log's sealed payload sections, never in contest-visible output.
    std::vector<ParticipantId> evaluators;
    std::map<ParticipantId, std::vector<std::pair<ParticipantId, Rating>>> ratings;
    std::uint64_t juror_fee_minor = 0;  // per-juror fee paid at finalize
    bool finalized = false;
    bool bonds_settled = false;
};

struct Contest {
    ContentId content_id;
    ParticipantId creator_id;
    Money veracity_bond;
    ContestState state = ContestState::Open;
    std::vector<Challenge> challenges;  // submission order, all outcomes
    std::optional<std::size_t> active_challenge;
    std::vector<PanelRecord> panels;  // one per activation
    Tick opened_at = 0;
    Tick challenge_deadline = 0;
    std::optional<Tick> deliberation_deadline;

    std::size_t queued_count() const;
    bool has_challenger(const ParticipantId& id) const;
    bool any_lost_challenge() const;
    const PanelRecord* active_panel() const;
};

enum class EngineErr {
    DuplicateContent,
    UnknownContent,
    DuplicateParticipant,
    UnknownParticipant,
    UnverifiedParticipant,
    ZeroBond,
    WrongState,
    DeadlinePassed,
    BondMismatch,
    DuplicateChallenger,
    SelfChallenge,
    ChallengeCapExceeded,
    ActiveChallengeExists,
    EmptyQueue,
    NotAJuror,
    AlreadyVoted,
    DeliberationOver,
    DeliberationPending,
    EmptyAssessment,
    MissingVotes,
    EmptyBench,
    PendingChallenges,
    NotYetExpired,
    NothingToSettle,
    ConflictOfInterest,
    NotAnEvaluator,
    DuplicateEvaluation,
    InsufficientPool,
    InvalidArgument,
    CorruptLog,
    ReplayDivergence,
};

const char* engine_err_name(EngineErr e);

class EngineError : public std::runtime_error {
public:
    EngineError(EngineErr code, const std::string& what)
        : std::runtime_error(std::string(engine_err_name(code)) + ": " + what), code_(code) {}
    EngineErr code() const { return code_; }

private:
    EngineErr code_;
};

/// Money ledger across the whole engine. The residual is zero at every tick:
/// whatever enters escrow leaves only through payouts, refunds or the reserve.
struct Accounts {
    std::uint64_t injected = 0;
    std::uint64_t escrow_vb = 0;
    std::uint64_t escrow_cvb = 0;
    std::uint64_t escrow_juror = 0;
    std::uint64_t paid_out = 0;  // payouts + refunds, all recipients
    std::uint64_t platform_income = 0;
    std::uint64_t reserve = 0;
    std::map<ParticipantId, std::uint64_t> received;

    std::int64_t residual() const {
        return static_cast<std::int64_t>(injected) -
               static_cast<std::int64_t>(escrow_vb + escrow_cvb + escrow_juror +
                                         paid_out + reserve);
    }
};

struct Event {
    std::uint64_t seq = 0;
    Tick tick = 0;
    std::string kind;
    nlohmann::json payload;
    Rng::State rng_before{};

    std::string to_jsonl() const;
    static Event from_jsonl(const std::string& line);
};

class EventLog {
public:
    void append(Event ev) { entries_.push_back(std::move(ev)); }
    const std::vector<Event>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    void write(std::ostream& os) const;
    static EventLog read(std::istream& is);

private:
    std::vector<Event> entries_;
};

struct EngineConfig {
    PayoutPolicy policy;
    JuryConfig jury;
    ReputationParams reputation;
    Tick challenge_period = 100;
    Tick deliberation_period = 50;
    std::uint32_t active_challenge_cap = 3;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    static EngineConfig from_json(const nlohmann::json& j);
};

struct RosterEntry {
    JurorProfile profile;
    double bond_decline_prob = 0.0;
};

/// Single-writer contest ledger: every mutation is a command that validates,
/// applies, and appends one event carrying the generator state it started
/// from. Replaying the log from genesis rebuilds the identical engine.
class Engine {
public:
    explicit Engine(EngineConfig cfg);

    // --- registration
    void register_participant(const ParticipantId& id, bool verified);
    void register_juror(const JurorProfile& profile, double bond_decline_prob = 0.0);

    // --- time
    void advance_clock(Tick by);
    Tick now() const { return clock_; }

    // --- contest commands
    void open_contest(const ContentId& content, const ParticipantId& creator, Money beta,
                      std::optional<Tick> challenge_period = std::nullopt);
    void submit_challenge(const ContentId& content, const ParticipantId& challenger,
                          Money bond, const std::string& evidence_ref);
    /// Uniformly draws one queued challenge, seats a jury (bond refusals are
    /// replaced from the bench immediately) and opens deliberation. Returns
    /// the chosen challenger.
    ParticipantId activate_next_challenge(const ContentId& content);
    void record_vote(const ContentId& content, const ParticipantId& juror, Vote vote,
                     const std::string& assessment);
    /// Replaces a juror who has not voted by the deliberation deadline.
    /// Returns the substitute.
    ParticipantId substitute_inactive_juror(const ContentId& content,
                                            const ParticipantId& juror);
    Vote finalize_active_challenge(const ContentId& content);
    void expire_challenge_period(const ContentId& content);

    // --- evaluation & settlement
    std::vector<ParticipantId> assign_contest_evaluators(const ContentId& content,
                                                         std::size_t count);
    void record_juror_evaluation(const ContentId& content, const ParticipantId& juror,
                                 Rating rating, const ParticipantId& evaluator);
    void settle_juror_bonds(const ContentId& content);

    // --- inspection
    bool has_contest(const ContentId& content) const;
    const Contest& contest(const ContentId& content) const;
    const std::map<ContentId, Contest>& contests() const { return contests_; }
    const Accounts& accounts() const { return accounts_; }
    const std::map<ParticipantId, RosterEntry>& roster() const { return roster_; }
    const EngineConfig& config() const { return config_; }
    const EventLog& log() const { return log_; }
    std::int64_t escrow_residual() const { return accounts_.residual(); }

    /// Canonical JSON of the full engine state (contests, accounts, roster,
    /// clock, rng). Deterministic: nlohmann orders object keys.
    nlohmann::json state_json() const;
    /// FNV-1a 64 over the canonical state serialization.
    std::uint64_t state_hash() const;

    /// Reconstructs an engine from a recorded log, re-validating every entry.
    /// Sequence gaps, tick mismatches, generator-state mismatches or payload
    /// divergence raise EngineError{CorruptLog or ReplayDivergence}.
    static Engine replay(const EventLog& log);
    static Engine replay_prefix(const EventLog& log, std::size_t count);

private:
    struct CommandResult {
        nlohmann::json payload;
    };

    void commit(const std::string& kind, nlohmann::json payload, const Rng::State& before,
                Tick tick);
    nlohmann::json dispatch(const std::string& kind, const nlohmann::json& args);

    // apply_* perform validation and mutation; they return the full event
    // payload (args echoed back plus any random outcomes).
    nlohmann::json apply_register_participant(const nlohmann::json& a);
    nlohmann::json apply_register_juror(const nlohmann::json& a);
    nlohmann::json apply_advance_clock(const nlohmann::json& a);
    nlohmann::json apply_open_contest(const nlohmann::json& a);
    nlohmann::json apply_submit_challenge(const nlohmann::json& a);
    nlohmann::json apply_activate(const nlohmann::json& a);
    nlohmann::json apply_vote(const nlohmann::json& a);
    nlohmann::json apply_substitute(const nlohmann::json& a);
    nlohmann::json apply_finalize(const nlohmann::json& a);
    nlohmann::json apply_expire(const nlohmann::json& a);
    nlohmann::json apply_assign_evaluators(const nlohmann::json& a);
    nlohmann::json apply_evaluation(const nlohmann::json& a);
    nlohmann::json apply_settle_bonds(const nlohmann::json& a);

    Contest& must_contest(const ContentId& content);
    const RosterEntry& must_juror(const ParticipantId& id) const;
    void require_verified(const ParticipantId& id) const;
    void credit(const ParticipantId& id, std::uint64_t minor);
    /// Draws a bond decision for a candidate seat; substitutes from the bench
    /// (best reputation first, random tie-break) until someone posts.
    ParticipantId seat_with_bond(std::vector<ParticipantId>& bench,
                                 const ParticipantId& candidate,
                                 std::vector<ParticipantId>& declined);
    PanelRecord* panel_awaiting_settlement(Contest& c);

    EngineConfig config_;
    Rng rng_;
    Tick clock_ = 0;
    std::map<ContentId, Contest> contests_;
    std::map<ParticipantId, bool> participants_;  // id -> verified
    std::map<ParticipantId, RosterEntry> roster_;
    std::map<ParticipantId, std::uint32_t> active_challenge_count_;
    Accounts accounts_;
    EventLog log_;
};

}  // namespace veribond
