#include "veribond/golden.hpp"

#include <cmath>
#include <cstdio>

#include "veribond/collusion.hpp"

namespace veribond::golden {

namespace {

// Shorthand for the sentinel cell.
const std::optional<std::string> S = std::nullopt;

std::optional<std::string> V(const char* s) { return std::string(s); }

}  // namespace

const std::vector<std::uint32_t>& collusion_panels() {
    static const std::vector<std::uint32_t> panels = {11, 15, 21, 25, 31, 35, 41,
                                                      43, 51, 61, 71, 81, 91, 101};
    return panels;
}

const std::vector<double>& collusion_ratios() {
    static const std::vector<double> ratios = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    return ratios;
}

const std::vector<std::vector<std::optional<std::string>>>& collusion_cells() {
    // Reference values for P(X >= m+1), X ~ Hypergeometric(10000, ratio*10000, n),
    // three significant figures; sentinel below 1e-10.
    static const std::vector<std::vector<std::optional<std::string>>> cells = {
        /* n=11  */ {V("5.65e-06"), V("2.92e-04"), V("2.64e-03"), V("1.16e-02"), V("3.42e-02"), V("7.81e-02")},
        /* n=15  */ {V("1.74e-07"), V("3.29e-05"), V("6.03e-04"), V("4.21e-03"), V("1.72e-02"), V("4.99e-02")},
        /* n=21  */ {V("9.80e-10"), V("1.30e-06"), V("6.86e-05"), V("9.57e-04"), V("6.37e-03"), V("2.63e-02")},
        /* n=25  */ {S,             V("1.53e-07"), V("1.64e-05"), V("3.62e-04"), V("3.33e-03"), V("1.74e-02")},
        /* n=31  */ {S,             V("6.28e-09"), V("1.94e-06"), V("8.57e-05"), V("1.28e-03"), V("9.44e-03")},
        /* n=35  */ {S,             V("7.51e-10"), V("4.71e-07"), V("3.30e-05"), V("6.81e-04"), V("6.34e-03")},
        /* n=41  */ {S,             S,             V("5.69e-08"), V("7.96e-06"), V("2.66e-04"), V("3.51e-03")},
        /* n=43  */ {S,             S,             V("2.81e-08"), V("4.96e-06"), V("1.95e-04"), V("2.88e-03")},
        /* n=51  */ {S,             S,             V("1.69e-09"), V("7.53e-07"), V("5.65e-05"), V("1.33e-03")},
        /* n=61  */ {S,             S,             S,             V("7.21e-08"), V("1.21e-05"), V("5.09e-04")},
        /* n=71  */ {S,             S,             S,             V("6.94e-09"), V("2.63e-06"), V("1.97e-04")},
        /* n=81  */ {S,             S,             S,             V("6.71e-10"), V("5.72e-07"), V("7.64e-05")},
        /* n=91  */ {S,             S,             S,             S,             V("1.25e-07"), V("2.98e-05")},
        /* n=101 */ {S,             S,             S,             S,             V("2.73e-08"), V("1.17e-05")},
    };
    return cells;
}

const std::vector<PlatformRow>& capacity_rows() {
    static const std::vector<PlatformRow> rows = {
        {"Small Community", 100000, Rational(1, 1000)},
        {"Reddit", 1300000, Rational(2, 1000)},
        {"Twitter/X", 500000000, Rational(5, 1000)},
        {"Facebook", 4000000000ULL, Rational(3, 1000)},
    };
    return rows;
}

const std::vector<StaffingConfig>& capacity_configs() {
    static const std::vector<StaffingConfig> configs = {
        {"Quick", 21, Rational(1, 2), Rational(2, 1)},
        {"Standard", 31, Rational(1, 1), Rational(4, 1)},
        {"Thorough", 35, Rational(2, 1), Rational(8, 1)},
    };
    return configs;
}

const std::vector<std::vector<std::uint64_t>>& capacity_cells() {
    static const std::vector<std::vector<std::uint64_t>> cells = {
        {22, 33, 37},
        {569, 840, 948},
        {546875, 807292, 911459},
        {2625000, 3875000, 4375000},
    };
    return cells;
}

std::string format_probability(double value) {
    if (value < kCollusionDisplayFloor) return "<1e-10";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2e", value);
    return buf;
}

bool within_one_third_digit(const std::string& a, const std::string& b) {
    if (a == b) return true;
    if (a == "<1e-10" || b == "<1e-10") return false;  // sentinel must match exactly

    // Split "m.mm" and the exponent by hand; scanf would eat the whole
    // scientific literal as the mantissa.
    auto split = [](const std::string& s, double& mantissa, int& exponent) {
        const auto e = s.find_first_of("eE");
        if (e == std::string::npos) return false;
        mantissa = std::stod(s.substr(0, e));
        exponent = std::stoi(s.substr(e + 1));
        return true;
    };
    double ma = 0, mb = 0;
    int ea = 0, eb = 0;
    if (!split(a, ma, ea) || !split(b, mb, eb)) return false;
    // Compare on a shared exponent so 9.99e-05 and 1.00e-04 line up.
    const int common = std::max(ea, eb);
    const double ua = ma * std::pow(10.0, ea - common);
    const double ub = mb * std::pow(10.0, eb - common);
    return std::abs(ua - ub) <= 0.01 + 1e-9;
}

}  // namespace veribond::golden
