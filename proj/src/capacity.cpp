#include "veribond/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <stdexcept>

namespace veribond {

void CapacityQuery::validate() const {
    if (lambda_per_hour < 0.0) throw std::invalid_argument("CapacityQuery: negative lambda");
    if (panel == 0 || panel % 2 == 0) throw std::invalid_argument("CapacityQuery: panel must be odd");
    if (hours_per_case <= 0.0) throw std::invalid_argument("CapacityQuery: hours_per_case must be positive");
    if (avail_hours_per_day <= 0.0) throw std::invalid_argument("CapacityQuery: avail_hours_per_day must be positive");
}

CapacityResult min_jurors(const CapacityQuery& q) {
    q.validate();
    CapacityResult r;
    const double demand = q.lambda_per_hour * q.panel * q.hours_per_case;
    r.n_min = static_cast<std::uint64_t>(std::ceil(demand / q.avail_hours_per_day - 1e-12));
    r.servers = r.n_min / q.panel;
    r.utilization = r.n_min ? demand / (static_cast<double>(r.n_min) * q.avail_hours_per_day) : 0.0;
    r.stable = r.utilization <= 1.0;
    return r;
}

std::uint64_t min_jurors_exact(std::uint64_t posts_per_day, const Rational& challenge_ratio,
                               std::uint32_t panel, const Rational& hours_per_case,
                               const Rational& avail_hours_per_day) {
    // ceil( posts * ratio / 24 * n * h / a ) with exact integer arithmetic.
    const __int128 num = static_cast<__int128>(posts_per_day) * challenge_ratio.num() *
                         panel * hours_per_case.num() * avail_hours_per_day.den();
    const __int128 den = static_cast<__int128>(24) * challenge_ratio.den() *
                         hours_per_case.den() * avail_hours_per_day.num();
    if (den <= 0 || num < 0) throw std::invalid_argument("min_jurors_exact: invalid parameters");
    return static_cast<std::uint64_t>((num + den - 1) / den);
}

double dispute_rate_from_volume(double posts_per_day, double challenge_ratio) {
    if (challenge_ratio < 0.0 || challenge_ratio > 1.0)
        throw std::invalid_argument("dispute_rate_from_volume: ratio outside [0,1]");
    return posts_per_day * challenge_ratio / 24.0;
}

const char* service_kind_name(ServiceKind k) {
    switch (k) {
        case ServiceKind::Deterministic: return "deterministic";
        case ServiceKind::Exponential: return "exponential";
        case ServiceKind::Lognormal: return "lognormal";
    }
    return "unknown";
}

ServiceKind parse_service_kind(const std::string& s) {
    if (s == "deterministic") return ServiceKind::Deterministic;
    if (s == "exponential") return ServiceKind::Exponential;
    if (s == "lognormal") return ServiceKind::Lognormal;
    throw std::invalid_argument("parse_service_kind: unknown kind '" + s + "'");
}

double ServiceDist::sample(Rng& rng) const {
    switch (kind) {
        case ServiceKind::Deterministic:
            return mean_hours;
        case ServiceKind::Exponential:
            return rng.exponential(mean_hours);
        case ServiceKind::Lognormal: {
            // mu chosen so the distribution mean equals mean_hours.
            const double mu = std::log(mean_hours) - 0.5 * lognormal_sigma * lognormal_sigma;
            return rng.lognormal(mu, lognormal_sigma);
        }
    }
    return mean_hours;
}

double QueueStats::littles_residual() const {
    const double lw = throughput * mean_sojourn;
    return std::abs(mean_in_system - lw) / std::max(mean_in_system, 1.0);
}

QueueStats mgc_simulate(double lambda, const ServiceDist& service, std::uint32_t servers,
                        double horizon_hours, Rng& rng, double warmup_hours,
                        std::size_t trajectory_samples) {
    if (servers == 0) throw std::invalid_argument("mgc_simulate: need at least one server");
    if (horizon_hours <= 0.0) throw std::invalid_argument("mgc_simulate: nonpositive horizon");
    if (warmup_hours < 0.0 || warmup_hours >= horizon_hours)
        throw std::invalid_argument("mgc_simulate: warmup must lie inside the horizon");

    QueueStats st;
    st.horizon_hours = horizon_hours;
    if (lambda <= 0.0) return st;
    const double window = horizon_hours - warmup_hours;

    // Busy servers as a min-heap of departure times; waiting jobs FIFO.
    std::priority_queue<std::pair<double, std::uint64_t>,
                        std::vector<std::pair<double, std::uint64_t>>,
                        std::greater<>> departures;  // (time, job id)
    std::queue<std::pair<std::uint64_t, double>> waiting;  // (job id, service need)
    std::vector<double> arrival_time;

    double now = 0.0;
    double next_arrival = rng.exponential(1.0 / lambda);
    double area_in_system = 0.0;       // integral of jobs-in-system
    double work_in_system = 0.0;       // unfinished service, server-hours
    double sum_sojourn = 0.0;
    std::uint64_t in_system = 0;

    const double sample_dt = horizon_hours / static_cast<double>(std::max<std::size_t>(trajectory_samples, 1));
    double next_sample = sample_dt;
    st.work_trajectory.reserve(trajectory_samples + 1);

    auto drain_to = [&](double t) {
        // Only the part of the interval beyond the warm-up feeds statistics.
        const double measured = std::max(0.0, t - std::max(now, warmup_hours));
        area_in_system += in_system * measured;
        // Work decreases at a rate equal to the number of busy servers.
        work_in_system -= static_cast<double>(std::min<std::uint64_t>(in_system, servers)) * (t - now);
        if (work_in_system < 0.0) work_in_system = 0.0;
        now = t;
    };

    while (true) {
        const double next_departure = departures.empty()
                                          ? std::numeric_limits<double>::infinity()
                                          : departures.top().first;
        const double next_event = std::min(next_arrival, next_departure);
        if (next_event > horizon_hours) {
            while (next_sample <= horizon_hours + 1e-12) {
                const double pending = std::min(next_sample, horizon_hours);
                const double drained =
                    static_cast<double>(std::min<std::uint64_t>(in_system, servers)) * (pending - now);
                st.work_trajectory.emplace_back(pending, std::max(0.0, work_in_system - drained));
                next_sample += sample_dt;
            }
            drain_to(horizon_hours);
            break;
        }

        while (next_sample <= next_event) {
            const double drained =
                static_cast<double>(std::min<std::uint64_t>(in_system, servers)) * (next_sample - now);
            st.work_trajectory.emplace_back(next_sample, std::max(0.0, work_in_system - drained));
            next_sample += sample_dt;
        }

        if (next_arrival <= next_departure) {
            drain_to(next_arrival);
            const std::uint64_t id = st.arrivals++;
            arrival_time.push_back(now);
            const double need = service.sample(rng);
            work_in_system += need;
            if (in_system < servers) {
                departures.emplace(now + need, id);
            } else {
                waiting.emplace(id, need);
            }
            ++in_system;
            next_arrival = now + rng.exponential(1.0 / lambda);
        } else {
            drain_to(next_departure);
            const std::uint64_t id = departures.top().second;
            departures.pop();
            if (now >= warmup_hours) {
                sum_sojourn += now - arrival_time[id];
                ++st.completions;
            }
            --in_system;
            if (!waiting.empty()) {
                const auto [wid, need] = waiting.front();
                waiting.pop();
                departures.emplace(now + need, wid);
            }
        }
    }

    st.mean_in_system = area_in_system / window;
    st.mean_sojourn = st.completions ? sum_sojourn / static_cast<double>(st.completions) : 0.0;
    st.throughput = static_cast<double>(st.completions) / window;
    return st;
}

const char* stability_verdict_name(StabilityVerdict v) {
    switch (v) {
        case StabilityVerdict::Stable: return "stable";
        case StabilityVerdict::StableMarginal: return "stable_marginal";
        case StabilityVerdict::Divergent: return "divergent";
    }
    return "unknown";
}

namespace {

double fit_slope(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(samples.size());
    for (const auto& [x, y] : samples) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

}  // namespace

StabilityReport verify_stability(const CapacityQuery& q, std::uint64_t N, Rng& rng,
                                 const ServiceDist& service, double horizon_hours) {
    q.validate();
    if (N == 0) throw std::invalid_argument("verify_stability: empty pool");

    StabilityReport rep;
    const double supply = static_cast<double>(N) * q.avail_hours_per_day;  // juror-hours/hour
    const double demand = q.lambda_per_hour * q.panel * q.hours_per_case;
    rep.rho = demand / supply;
    rep.shortfall_rate = std::max(0.0, demand - supply);

    // Pooled model: one work-conserving server, service requirement
    // n*S/(N*a) hours per dispute.
    ServiceDist pooled = service;
    pooled.mean_hours = service.mean_hours * q.panel / supply;
    rep.stats = mgc_simulate(q.lambda_per_hour, pooled, 1, horizon_hours, rng, 0.0, 512);

    // Trajectory is recorded in server-hours; rescale to juror-hours.
    for (auto& [t, w] : rep.stats.work_trajectory) w *= supply;
    rep.backlog_slope = fit_slope(rep.stats.work_trajectory);
    rep.littles_residual = rep.stats.littles_residual();

    // Divergence shows up as a persistent positive work slope on the scale of
    // the total demand rate; a stable queue's slope is orders smaller.
    const double slope_threshold = 0.02 * demand;
    if (rep.backlog_slope > slope_threshold) {
        rep.verdict = StabilityVerdict::Divergent;
    } else if (std::abs(rep.rho - 1.0) < 1e-9) {
        rep.verdict = StabilityVerdict::StableMarginal;
    } else {
        rep.verdict = StabilityVerdict::Stable;
    }
    return rep;
}

std::vector<CapacityCell> capacity_table(const std::vector<PlatformRow>& rows,
                                         const std::vector<StaffingConfig>& configs) {
    std::vector<CapacityCell> cells;
    cells.reserve(rows.size() * configs.size());
    for (const auto& row : rows) {
        for (const auto& cfg : configs) {
            CapacityCell cell;
            cell.platform = row.name;
            cell.config = cfg.name;
            cell.lambda_per_hour =
                dispute_rate_from_volume(static_cast<double>(row.posts_per_day),
                                         row.challenge_ratio.to_double());
            cell.n_min = min_jurors_exact(row.posts_per_day, row.challenge_ratio, cfg.panel,
                                          cfg.hours_per_case, cfg.avail_hours_per_day);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

std::string compact_count(std::uint64_t v) {
    char buf[32];
    if (v >= 1000000000) {
        std::snprintf(buf, sizeof(buf), "%.1fB", static_cast<double>(v) / 1e9);
    } else if (v >= 1000000) {
        std::snprintf(buf, sizeof(buf), "%.1fM", static_cast<double>(v) / 1e6);
    } else if (v >= 100000) {
        std::snprintf(buf, sizeof(buf), "%lluK",
                      static_cast<unsigned long long>((v + 500) / 1000));
    } else {
        std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(v));
    }
    return buf;
}

}  // namespace veribond
