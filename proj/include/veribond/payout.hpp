#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "veribond/money.hpp"
#include "veribond/rating.hpp"
#include "veribond/rational.hpp"

namespace veribond {

using ParticipantId = std::string;

enum class FeeCurve { Flat, LogScale };

const char* fee_curve_name(FeeCurve c);
FeeCurve parse_fee_curve(const std::string& s);

/// How a forfeited bond splits between the winning party, the jurors and the
/// platform. Fractions are exact rationals; the winner always receives the
/// residual, so the split sums back to the bond in integer minor units.
struct PayoutPolicy {
    Rational platform_fraction{1, 10};
    Rational jury_pool_fraction{3, 10};
    FeeCurve juror_fee_curve = FeeCurve::Flat;
    // Minor units in one whole currency unit; the LogScale pool grows with
    // log(1 + beta/log_scale_unit).
    std::uint64_t log_scale_unit = 100;
    Rational gamma{1, 10};  // juror bond fraction of beta

    void validate() const;
    Rational winner_fraction() const {
        return Rational(1, 1) - platform_fraction - jury_pool_fraction;
    }

    nlohmann::json to_json() const;
    static PayoutPolicy from_json(const nlohmann::json& j);
};

struct Payout {
    Money winner_share;
    std::vector<std::pair<ParticipantId, Money>> juror_shares;
    Money platform_share;

    Money total() const {
        Money t = winner_share + platform_share;
        for (const auto& [id, m] : juror_shares) t += m;
        return t;
    }
};

/// Size of the jury fee pool carved out of beta before the per-juror split.
Money jury_pool_amount(Money beta, const PayoutPolicy& policy);

/// Splits a forfeited bond: platform fee, equal juror fees, winner residual.
/// All rounding dust lands on the winner so the components always sum to beta
/// exactly.
Payout distribute_forfeited_bond(Money beta, const PayoutPolicy& policy,
                                 const std::vector<ParticipantId>& jurors);

/// floor(gamma * beta); gamma must lie strictly in (0,1).
Money juror_bond_amount(Money beta, const Rational& gamma);

enum class JurorBondStatus { Held, Refunded, ForfeitedToReserve };

const char* juror_bond_status_name(JurorBondStatus s);

struct JurorBond {
    ParticipantId juror_id;
    Money amount;
    JurorBondStatus status = JurorBondStatus::Held;
};

/// Refunds the bond when the juror attended, submitted an assessment and
/// averaged at least neutral; otherwise it is forfeited to the reserve fund.
/// Settling a bond twice is an error.
JurorBond settle_juror_bond(JurorBond bond, bool attended, bool assessment_submitted,
                            Rating avg_rating);

}  // namespace veribond
