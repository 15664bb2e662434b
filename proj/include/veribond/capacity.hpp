#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "veribond/rational.hpp"
#include "veribond/rng.hpp"

namespace veribond {

/// Staffing question: dispute arrival rate lambda (per hour), panel size n,
/// mean juror effort h (hours per case) and the hours a juror volunteers per
/// day, a. The published capacity table divides per-hour demand by per-day
/// supply without converting; min_jurors follows that convention so its
/// integers reproduce exactly, and the README documents the caveat.
struct CapacityQuery {
    double lambda_per_hour = 0.0;
    std::uint32_t panel = 0;          // n, odd
    double hours_per_case = 0.0;      // h
    double avail_hours_per_day = 0.0; // a

    void validate() const;
};

struct CapacityResult {
    std::uint64_t n_min = 0;
    std::uint64_t servers = 0;   // floor(N/n) parallel panels at N = n_min
    double utilization = 0.0;    // rho = lambda*n*h / (N*a) at N = n_min
    bool stable = false;         // rho <= 1
};

CapacityResult min_jurors(const CapacityQuery& q);

/// Exact-rational n_min for integer post volumes and rational parameters;
/// the table generator uses this so cells land on exact integers.
std::uint64_t min_jurors_exact(std::uint64_t posts_per_day, const Rational& challenge_ratio,
                               std::uint32_t panel, const Rational& hours_per_case,
                               const Rational& avail_hours_per_day);

/// posts/day * ratio / 24 -> disputes per hour.
double dispute_rate_from_volume(double posts_per_day, double challenge_ratio);

enum class ServiceKind { Deterministic, Exponential, Lognormal };

const char* service_kind_name(ServiceKind k);
ServiceKind parse_service_kind(const std::string& s);

struct ServiceDist {
    ServiceKind kind = ServiceKind::Deterministic;
    double mean_hours = 1.0;
    double lognormal_sigma = 0.5;  // shape parameter when kind == Lognormal

    double sample(Rng& rng) const;
};

struct QueueStats {
    double mean_in_system = 0.0;   // L: time-average jobs in system
    double mean_sojourn = 0.0;     // W: mean time in system of completed jobs
    double throughput = 0.0;       // completions per hour
    std::uint64_t arrivals = 0;
    std::uint64_t completions = 0;
    double horizon_hours = 0.0;
    // Regular samples of (time, unfinished work in server-hours).
    std::vector<std::pair<double, double>> work_trajectory;

    /// |L - lambda*W| / max(L, 1) with lambda taken as the throughput.
    double littles_residual() const;
};

/// FIFO M/G/c discrete-event simulation: Poisson arrivals at `lambda` per
/// hour, `servers` parallel servers drawing service times from `service`.
/// Statistics cover [warmup_hours, horizon_hours); the trajectory covers the
/// whole run.
QueueStats mgc_simulate(double lambda, const ServiceDist& service, std::uint32_t servers,
                        double horizon_hours, Rng& rng, double warmup_hours = 0.0,
                        std::size_t trajectory_samples = 256);

enum class StabilityVerdict { Stable, StableMarginal, Divergent };

const char* stability_verdict_name(StabilityVerdict v);

struct StabilityReport {
    StabilityVerdict verdict = StabilityVerdict::Stable;
    double rho = 0.0;             // lambda*n*h / (N*a)
    double backlog_slope = 0.0;   // fitted, juror-hours per hour
    double shortfall_rate = 0.0;  // max(0, lambda*n*h - N*a), juror-hours per hour
    double littles_residual = 0.0;
    QueueStats stats;
};

/// Simulates the pooled juror-hour model: each dispute demands n*S juror-hours
/// (S from `service`, mean h) and a pool of N jurors drains work at N*a
/// juror-hours per hour. Equivalent to a single work-conserving server with
/// service requirement n*S/(N*a); the stability boundary sits exactly at
/// N = n_min as the capacity threshold asserts.
StabilityReport verify_stability(const CapacityQuery& q, std::uint64_t N, Rng& rng,
                                 const ServiceDist& service, double horizon_hours);

struct PlatformRow {
    std::string name;
    std::uint64_t posts_per_day = 0;
    Rational challenge_ratio{0, 1};
};

struct StaffingConfig {
    std::string name;
    std::uint32_t panel = 0;
    Rational hours_per_case{1, 1};
    Rational avail_hours_per_day{1, 1};
};

struct CapacityCell {
    std::string platform;
    std::string config;
    double lambda_per_hour = 0.0;
    std::uint64_t n_min = 0;
};

std::vector<CapacityCell> capacity_table(const std::vector<PlatformRow>& rows,
                                         const std::vector<StaffingConfig>& configs);

/// Compact human form used by the table output: exact below 100K, then "547K",
/// then "2.6M".
std::string compact_count(std::uint64_t v);

}  // namespace veribond
