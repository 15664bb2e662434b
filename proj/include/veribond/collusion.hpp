#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace veribond {

/// Probability floor applied to reported tail values; anything smaller is
/// clamped and flagged. A separate, looser floor (1e-10) applies only when
/// tables are formatted for display.
inline constexpr double kCollusionComputationFloor = 1e-15;
inline constexpr double kCollusionDisplayFloor = 1e-10;

/// A panel-capture question: how likely is it that a coordinated bloc holds a
/// voting majority on a randomly drawn panel?
///   - finite pool: N jurors of whom k collude, panel of n without replacement
///   - infinite pool: each seat is a colluder independently with probability p
struct CollusionQuery {
    std::optional<std::uint64_t> pool;  // nullopt = infinite-pool limit
    std::uint64_t colluders = 0;        // k, used when pool is set
    double ratio = 0.0;                 // p, used when pool is unset
    std::uint32_t panel = 0;            // n, odd

    static CollusionQuery finite(std::uint64_t N, std::uint64_t k, std::uint32_t n) {
        CollusionQuery q;
        q.pool = N;
        q.colluders = k;
        q.panel = n;
        return q;
    }
    static CollusionQuery limit(double p, std::uint32_t n) {
        CollusionQuery q;
        q.ratio = p;
        q.panel = n;
        return q;
    }

    std::uint32_t majority() const { return (panel + 1) / 2; }
    double colluder_fraction() const {
        return pool ? static_cast<double>(colluders) / static_cast<double>(*pool) : ratio;
    }
};

struct CollusionResult {
    double exact_tail = 0.0;  // P(X >= t), clamped at the computation floor
    double log_tail = 0.0;    // ln P(X >= t), unclamped (-inf when P = 0)
    double hoeffding = 0.0;   // exp(-2n(1/2-p)^2); NaN when p >= 1/2
    double omega = 0.0;       // 2(1/2-p)^2; NaN when p >= 1/2
    bool clamped = false;
};

/// ln P(X >= t) for X ~ Hypergeometric(N, k, n). Log-space throughout:
/// log-gamma binomial coefficients, terms accumulated smallest-first with
/// compensated summation, so tails far below double range keep full relative
/// precision.
double log_hypergeometric_tail(std::uint64_t N, std::uint64_t k, std::uint32_t n,
                               std::uint32_t t);

/// ln P(X >= t) for X ~ Binomial(n, p), same scheme.
double log_binomial_tail(std::uint32_t n, double p, std::uint32_t t);

/// Exponential majority-capture bound exp(-2n(1/2-p)^2), valid for p < 1/2.
double hoeffding_bound(std::uint32_t n, double p);

CollusionResult exact_collusion_probability(const CollusionQuery& q);

struct CollusionCell {
    CollusionQuery query;
    CollusionResult result;
};

/// Full cross-product grid. An empty pool list means one infinite-pool row
/// set; a pool entry of 0 also denotes the infinite-pool limit.
std::vector<CollusionCell> collusion_table(const std::vector<std::uint64_t>& pools,
                                           const std::vector<double>& ratios,
                                           const std::vector<std::uint32_t>& panels);

enum class RiskMode { Exact, Hoeffding };

/// Smallest odd panel size whose capture risk is <= epsilon at colluder
/// fraction p (infinite-pool limit for Exact mode).
std::uint32_t min_panel_for_risk(double p, double epsilon, RiskMode mode);

}  // namespace veribond
