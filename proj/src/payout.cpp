#include "veribond/payout.hpp"

#include <cmath>
#include <stdexcept>

namespace veribond {

const char* fee_curve_name(FeeCurve c) {
    switch (c) {
        case FeeCurve::Flat: return "flat";
        case FeeCurve::LogScale: return "log_scale";
    }
    return "unknown";
}

FeeCurve parse_fee_curve(const std::string& s) {
    if (s == "flat") return FeeCurve::Flat;
    if (s == "log_scale") return FeeCurve::LogScale;
    throw std::invalid_argument("parse_fee_curve: unknown curve '" + s + "'");
}

void PayoutPolicy::validate() const {
    const Rational zero(0, 1);
    const Rational one(1, 1);
    if (platform_fraction < zero || platform_fraction >= one)
        throw std::invalid_argument("PayoutPolicy: platform_fraction outside [0,1)");
    if (jury_pool_fraction < zero || jury_pool_fraction >= one)
        throw std::invalid_argument("PayoutPolicy: jury_pool_fraction outside [0,1)");
    if (platform_fraction + jury_pool_fraction >= one)
        throw std::invalid_argument("PayoutPolicy: fractions sum to 1 or more");
    if (gamma <= zero || gamma >= one)
        throw std::invalid_argument("PayoutPolicy: gamma outside (0,1)");
    if (log_scale_unit == 0)
        throw std::invalid_argument("PayoutPolicy: log_scale_unit must be positive");
}

nlohmann::json PayoutPolicy::to_json() const {
    return {
        {"platform_fraction", platform_fraction.str()},
        {"jury_pool_fraction", jury_pool_fraction.str()},
        {"juror_fee_curve", fee_curve_name(juror_fee_curve)},
        {"log_scale_unit", log_scale_unit},
        {"gamma", gamma.str()},
    };
}

PayoutPolicy PayoutPolicy::from_json(const nlohmann::json& j) {
    PayoutPolicy p;
    for (const auto& [key, value] : j.items()) {
        if (key == "platform_fraction") p.platform_fraction = Rational::parse(value.get<std::string>());
        else if (key == "jury_pool_fraction") p.jury_pool_fraction = Rational::parse(value.get<std::string>());
        else if (key == "juror_fee_curve") p.juror_fee_curve = parse_fee_curve(value.get<std::string>());
        else if (key == "log_scale_unit") p.log_scale_unit = value.get<std::uint64_t>();
        else if (key == "gamma") p.gamma = Rational::parse(value.get<std::string>());
        else throw std::invalid_argument("PayoutPolicy: unknown field '" + key + "'");
    }
    p.validate();
    return p;
}

Money jury_pool_amount(Money beta, const PayoutPolicy& policy) {
    if (policy.juror_fee_curve == FeeCurve::Flat)
        return beta.scaled_floor(policy.jury_pool_fraction);

    // Pool grows with log(1 + beta/beta0), so very large bonds do not drown
    // out the rest of the docket. Only the cap computation uses a double; the
    // result is floored into minor units and all later arithmetic is integer,
    // so the conservation identity is unaffected.
    const double beta0 = static_cast<double>(policy.log_scale_unit);
    const double scaled =
        policy.jury_pool_fraction.to_double() * beta0 *
        std::log1p(static_cast<double>(beta.minor_units()) / beta0);
    const Money log_pool(static_cast<std::uint64_t>(scaled < 0 ? 0 : scaled));
    // log1p(x) <= x keeps the pool under jury_pool_fraction*beta already, but
    // clamp anyway so the identity can never break.
    const Money ceiling = beta - beta.scaled_floor(policy.platform_fraction);
    return log_pool < ceiling ? log_pool : ceiling;
}

Payout distribute_forfeited_bond(Money beta, const PayoutPolicy& policy,
                                 const std::vector<ParticipantId>& jurors) {
    policy.validate();
    if (beta.is_zero()) throw std::invalid_argument("distribute_forfeited_bond: zero bond");
    if (jurors.empty()) throw std::invalid_argument("distribute_forfeited_bond: empty juror list");
    if (jurors.size() % 2 == 0)
        throw std::invalid_argument("distribute_forfeited_bond: juror count must be odd");

    const Money platform = beta.scaled_floor(policy.platform_fraction);
    const Money pool = jury_pool_amount(beta, policy);
    const Money per_juror(pool.minor_units() / jurors.size());

    Payout p;
    p.platform_share = platform;
    p.juror_shares.reserve(jurors.size());
    Money juror_total = Money::zero();
    for (const auto& id : jurors) {
        p.juror_shares.emplace_back(id, per_juror);
        juror_total += per_juror;
    }
    p.winner_share = beta - platform - juror_total;
    return p;
}

Money juror_bond_amount(Money beta, const Rational& gamma) {
    if (gamma <= Rational(0, 1) || gamma >= Rational(1, 1))
        throw std::invalid_argument("juror_bond_amount: gamma outside (0,1)");
    return beta.scaled_floor(gamma);
}

const char* juror_bond_status_name(JurorBondStatus s) {
    switch (s) {
        case JurorBondStatus::Held: return "held";
        case JurorBondStatus::Refunded: return "refunded";
        case JurorBondStatus::ForfeitedToReserve: return "forfeited_to_reserve";
    }
    return "unknown";
}

JurorBond settle_juror_bond(JurorBond bond, bool attended, bool assessment_submitted,
                            Rating avg_rating) {
    if (bond.status != JurorBondStatus::Held)
        throw std::logic_error("settle_juror_bond: bond already settled");
    const bool refund = attended && assessment_submitted && avg_rating >= Rating::Neutral;
    bond.status = refund ? JurorBondStatus::Refunded : JurorBondStatus::ForfeitedToReserve;
    return bond;
}

}  // namespace veribond
