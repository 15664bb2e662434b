#include "veribond/collusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace veribond {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_choose(double n, double r) {
    return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

/// logsumexp with the terms added in ascending order under Kahan
/// compensation; small terms are not swallowed by the dominant one.
double log_sum_exp(std::vector<double> log_terms) {
    log_terms.erase(std::remove(log_terms.begin(), log_terms.end(), kNegInf),
                    log_terms.end());
    if (log_terms.empty()) return kNegInf;
    const double m = *std::max_element(log_terms.begin(), log_terms.end());
    std::sort(log_terms.begin(), log_terms.end());
    double sum = 0.0, comp = 0.0;
    for (const double lt : log_terms) {
        const double term = std::exp(lt - m);
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return m + std::log(sum);
}

}  // namespace

double log_hypergeometric_tail(std::uint64_t N, std::uint64_t k, std::uint32_t n,
                               std::uint32_t t) {
    if (k > N) throw std::invalid_argument("log_hypergeometric_tail: k > N");
    if (n > N) throw std::invalid_argument("log_hypergeometric_tail: n > N");

    // Support of X: max(0, n-(N-k)) <= x <= min(n, k).
    const std::uint64_t hi = std::min<std::uint64_t>(n, k);
    const std::uint64_t lo = (n > N - k) ? n - (N - k) : 0;
    if (t > hi) return kNegInf;
    const std::uint64_t from = std::max<std::uint64_t>(t, lo);

    const double log_denom = log_choose(static_cast<double>(N), static_cast<double>(n));
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(hi - from + 1));
    for (std::uint64_t x = from; x <= hi; ++x) {
        const double lt = log_choose(static_cast<double>(k), static_cast<double>(x)) +
                          log_choose(static_cast<double>(N - k), static_cast<double>(n - x)) -
                          log_denom;
        terms.push_back(lt);
    }
    return std::min(0.0, log_sum_exp(std::move(terms)));
}

double log_binomial_tail(std::uint32_t n, double p, std::uint32_t t) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("log_binomial_tail: p outside [0,1]");
    if (t > n) return kNegInf;
    if (p == 0.0) return t == 0 ? 0.0 : kNegInf;
    if (p == 1.0) return 0.0;

    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    std::vector<double> terms;
    terms.reserve(n - t + 1);
    for (std::uint32_t x = t; x <= n; ++x) {
        terms.push_back(log_choose(n, x) + x * lp + (n - x) * lq);
    }
    return std::min(0.0, log_sum_exp(std::move(terms)));
}

double hoeffding_bound(std::uint32_t n, double p) {
    if (p < 0.0) throw std::invalid_argument("hoeffding_bound: negative p");
    if (p >= 0.5) throw std::invalid_argument("hoeffding_bound: p must be below 1/2");
    const double gap = 0.5 - p;
    return std::exp(-2.0 * static_cast<double>(n) * gap * gap);
}

CollusionResult exact_collusion_probability(const CollusionQuery& q) {
    if (q.panel == 0 || q.panel % 2 == 0)
        throw std::invalid_argument("exact_collusion_probability: panel size must be odd");
    if (q.pool) {
        if (q.colluders > *q.pool)
            throw std::invalid_argument("exact_collusion_probability: k > N");
        if (q.panel > *q.pool)
            throw std::invalid_argument("exact_collusion_probability: n > N");
    } else if (q.ratio < 0.0 || q.ratio > 1.0) {
        throw std::invalid_argument("exact_collusion_probability: ratio outside [0,1]");
    }

    const std::uint32_t t = q.majority();
    CollusionResult r;
    r.log_tail = q.pool ? log_hypergeometric_tail(*q.pool, q.colluders, q.panel, t)
                        : log_binomial_tail(q.panel, q.ratio, t);

    const double tail = std::exp(r.log_tail);
    if (r.log_tail != kNegInf && tail < kCollusionComputationFloor) {
        r.exact_tail = kCollusionComputationFloor;
        r.clamped = true;
    } else if (r.log_tail == kNegInf) {
        r.exact_tail = 0.0;  // structurally impossible (k < t), not an underflow
        r.clamped = false;
    } else {
        r.exact_tail = tail;
    }

    const double p = q.colluder_fraction();
    if (p < 0.5) {
        const double gap = 0.5 - p;
        r.omega = 2.0 * gap * gap;
        r.hoeffding = std::exp(-2.0 * static_cast<double>(q.panel) * gap * gap);
    } else {
        r.omega = std::numeric_limits<double>::quiet_NaN();
        r.hoeffding = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

std::vector<CollusionCell> collusion_table(const std::vector<std::uint64_t>& pools,
                                           const std::vector<double>& ratios,
                                           const std::vector<std::uint32_t>& panels) {
    std::vector<std::uint64_t> pool_list = pools.empty() ? std::vector<std::uint64_t>{0} : pools;
    std::vector<CollusionCell> cells;
    cells.reserve(pool_list.size() * ratios.size() * panels.size());
    for (const std::uint64_t N : pool_list) {
        for (const std::uint32_t n : panels) {
            for (const double p : ratios) {
                CollusionQuery q;
                if (N == 0) {
                    q = CollusionQuery::limit(p, n);
                } else {
                    // k rounded to the nearest representable bloc size.
                    const auto k = static_cast<std::uint64_t>(
                        std::llround(p * static_cast<double>(N)));
                    q = CollusionQuery::finite(N, k, n);
                }
                cells.push_back({q, exact_collusion_probability(q)});
            }
        }
    }
    return cells;
}

std::uint32_t min_panel_for_risk(double p, double epsilon, RiskMode mode) {
    if (p < 0.0 || p >= 0.5)
        throw std::invalid_argument("min_panel_for_risk: p must lie in [0, 1/2)");
    if (epsilon <= 0.0 || epsilon > 1.0)
        throw std::invalid_argument("min_panel_for_risk: epsilon outside (0,1]");

    for (std::uint32_t n = 1;; n += 2) {
        const double risk = (mode == RiskMode::Hoeffding)
                                ? hoeffding_bound(n, p)
                                : std::exp(log_binomial_tail(n, p, (n + 1) / 2));
        if (risk <= epsilon) return n;
        if (n > 100001)
            throw std::runtime_error("min_panel_for_risk: no panel found below 100001");
    }
}

}  // namespace veribond
