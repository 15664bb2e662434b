#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "veribond/payout.hpp"
#include "veribond/rng.hpp"

using namespace veribond;

namespace {

std::vector<ParticipantId> jurors(std::size_t n) {
    std::vector<ParticipantId> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("j" + std::to_string(i));
    return ids;
}

PayoutPolicy default_policy() { return PayoutPolicy{}; }

}  // namespace

TEST_CASE("forfeited bond split: 10% platform, 30% pool, 3 jurors") {
    const Payout p = distribute_forfeited_bond(Money(1000), default_policy(), jurors(3));
    CHECK(p.platform_share == Money(100));
    REQUIRE(p.juror_shares.size() == 3);
    for (const auto& [id, fee] : p.juror_shares) CHECK(fee == Money(100));
    CHECK(p.winner_share == Money(600));
    CHECK(p.total() == Money(1000));
}

TEST_CASE("rounding dust lands on the winner") {
    const Payout p = distribute_forfeited_bond(Money(1000), default_policy(), jurors(7));
    CHECK(p.platform_share == Money(100));
    for (const auto& [id, fee] : p.juror_shares) CHECK(fee == Money(42));
    CHECK(p.winner_share == Money(606));  // 300/7 leaves dust 6
    CHECK(p.total() == Money(1000));
}

TEST_CASE("degenerate one-minor-unit bond") {
    const Payout p = distribute_forfeited_bond(Money(1), default_policy(), jurors(3));
    CHECK(p.platform_share == Money(0));
    for (const auto& [id, fee] : p.juror_shares) CHECK(fee == Money(0));
    CHECK(p.winner_share == Money(1));
    CHECK(p.total() == Money(1));
}

TEST_CASE("distribution rejects bad input") {
    CHECK_THROWS_AS(distribute_forfeited_bond(Money(1000), default_policy(), {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(distribute_forfeited_bond(Money(1000), default_policy(), jurors(4)),
                    std::invalid_argument);
    CHECK_THROWS_AS(distribute_forfeited_bond(Money(0), default_policy(), jurors(3)),
                    std::invalid_argument);
    PayoutPolicy greedy;
    greedy.platform_fraction = Rational(6, 10);
    greedy.jury_pool_fraction = Rational(4, 10);
    CHECK_THROWS_AS(distribute_forfeited_bond(Money(1000), greedy, jurors(3)),
                    std::invalid_argument);
}

TEST_CASE("juror bond amount") {
    CHECK(juror_bond_amount(Money(1000), Rational(1, 10)) == Money(100));
    CHECK(juror_bond_amount(Money(999), Rational(1, 10)) == Money(99));
    CHECK_THROWS_AS(juror_bond_amount(Money(1000), Rational(1, 1)), std::invalid_argument);
    CHECK_THROWS_AS(juror_bond_amount(Money(1000), Rational(0, 1)), std::invalid_argument);
}

TEST_CASE("juror bond settlement") {
    const JurorBond held{"j0", Money(100), JurorBondStatus::Held};

    CHECK(settle_juror_bond(held, true, true, Rating::Neutral).status ==
          JurorBondStatus::Refunded);
    CHECK(settle_juror_bond(held, true, true, Rating::Yes).status ==
          JurorBondStatus::Refunded);
    CHECK(settle_juror_bond(held, false, true, Rating::Yes).status ==
          JurorBondStatus::ForfeitedToReserve);
    CHECK(settle_juror_bond(held, true, false, Rating::Yes).status ==
          JurorBondStatus::ForfeitedToReserve);
    CHECK(settle_juror_bond(held, true, true, Rating::No).status ==
          JurorBondStatus::ForfeitedToReserve);

    JurorBond settled = settle_juror_bond(held, true, true, Rating::Neutral);
    CHECK_THROWS_AS(settle_juror_bond(settled, true, true, Rating::Neutral), std::logic_error);
}

TEST_CASE("conservation holds for randomized bonds, policies and jury sizes") {
    Rng rng(20240601);
    for (int trial = 0; trial < 10000; ++trial) {
        const Money beta(1 + rng.uniform_index(100'000'000));
        PayoutPolicy policy;
        policy.platform_fraction =
            Rational(static_cast<std::int64_t>(rng.uniform_index(40)), 100);
        policy.jury_pool_fraction =
            Rational(static_cast<std::int64_t>(1 + rng.uniform_index(59)), 100);
        policy.juror_fee_curve = rng.bernoulli(0.3) ? FeeCurve::LogScale : FeeCurve::Flat;
        const std::size_t n = 1 + 2 * rng.uniform_index(25);
        const Payout p = distribute_forfeited_bond(beta, policy, jurors(n));
        REQUIRE(p.total() == beta);
    }
}

TEST_CASE("platform and juror shares never decrease as beta grows") {
    Rng rng(7);
    const PayoutPolicy policy = default_policy();
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + 2 * rng.uniform_index(10);
        const Money beta(1 + rng.uniform_index(1'000'000));
        const Money bigger = beta + Money(1 + rng.uniform_index(10'000));
        const Payout before = distribute_forfeited_bond(beta, policy, jurors(n));
        const Payout after = distribute_forfeited_bond(bigger, policy, jurors(n));
        CHECK(after.platform_share >= before.platform_share);
        CHECK(after.juror_shares[0].second >= before.juror_shares[0].second);
    }
}

TEST_CASE("winner share is monotone for steps that dominate the juror granularity") {
    // The winner residual can dip by up to n minor units while the platform
    // floor ticks and the juror pool crosses a multiple of n on the same
    // step; a step of (n+1)/(1-p-q) always dominates both.
    Rng rng(11);
    const PayoutPolicy policy = default_policy();  // residual fraction 6/10
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + 2 * rng.uniform_index(10);
        const Money beta(1 + rng.uniform_index(1'000'000));
        const auto step = static_cast<std::uint64_t>((n + 1) * 10 / 6 + 1);
        const Payout before = distribute_forfeited_bond(beta, policy, jurors(n));
        const Payout after = distribute_forfeited_bond(beta + Money(step), policy, jurors(n));
        CHECK(after.winner_share >= before.winner_share);

        const Payout next = distribute_forfeited_bond(beta + Money(1), policy, jurors(n));
        CHECK(next.winner_share.minor_units() + n >= before.winner_share.minor_units());
    }
}

TEST_CASE("log-scale pool is non-decreasing and midpoint concave") {
    PayoutPolicy policy;
    policy.juror_fee_curve = FeeCurve::LogScale;
    Rng rng(13);
    for (int trial = 0; trial < 500; ++trial) {
        const std::uint64_t lo = 1 + rng.uniform_index(10'000'000);
        const std::uint64_t hi = lo + 1 + rng.uniform_index(10'000'000);
        const std::uint64_t pool_lo = jury_pool_amount(Money(lo), policy).minor_units();
        const std::uint64_t pool_hi = jury_pool_amount(Money(hi), policy).minor_units();
        CHECK(pool_hi >= pool_lo);
        const std::uint64_t mid = lo + (hi - lo) / 2;
        const std::uint64_t pool_mid = jury_pool_amount(Money(mid), policy).minor_units();
        // floor() can shave a unit from each evaluation.
        CHECK(2 * pool_mid + 3 >= pool_lo + pool_hi);
    }
}

TEST_CASE("log-scale pool still conserves the bond exactly") {
    PayoutPolicy policy;
    policy.juror_fee_curve = FeeCurve::LogScale;
    Rng rng(17);
    for (int trial = 0; trial < 2000; ++trial) {
        const Money beta(1 + rng.uniform_index(1'000'000'000));
        const Payout p = distribute_forfeited_bond(beta, policy, jurors(1 + 2 * rng.uniform_index(8)));
        REQUIRE(p.total() == beta);
    }
}

TEST_CASE("policy JSON round trip rejects unknown fields") {
    PayoutPolicy policy;
    policy.platform_fraction = Rational(1, 20);
    policy.juror_fee_curve = FeeCurve::LogScale;
    const PayoutPolicy back = PayoutPolicy::from_json(policy.to_json());
    CHECK(back.platform_fraction == policy.platform_fraction);
    CHECK(back.juror_fee_curve == policy.juror_fee_curve);

    nlohmann::json bad = policy.to_json();
    bad["mystery"] = 1;
    CHECK_THROWS_AS(PayoutPolicy::from_json(bad), std::invalid_argument);
}
