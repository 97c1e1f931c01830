#include "mfunc/satotate.hpp"

#include <cmath>
#include <numbers>

#include "mfunc/error.hpp"

namespace mfunc::satotate {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kConsistencyTol = 1e-12;
}  // namespace

bool IntervalSystem::contains(double theta) const noexcept {
    for (const auto& I : intervals)
        if (theta >= I.a && theta <= I.b) return true;
    return false;
}

IntervalSystem build_intervals(int gamma, double xi) {
    if (gamma < 1) fail(ErrorKind::domain, "build_intervals: gamma must be >= 1");
    if (!(xi > 0.0 && xi < kPi / 2)) fail(ErrorKind::domain, "build_intervals: xi must lie in (0, pi/2)");
    IntervalSystem s;
    s.gamma = gamma;
    s.xi = xi;
    s.eta = std::sin(xi);
    s.ell = gamma % 2 == 1 ? 1 : 2;
    const double g1 = gamma + 1.0;
    auto A = [&](int j) { return Interval{(2 * kPi * j + xi) / g1, (2 * kPi * j + kPi - xi) / g1}; };
    auto B = [&](int j) { return Interval{(2 * kPi * j + kPi + xi) / g1, (2 * kPi * j + 2 * kPi - xi) / g1}; };
    const int last = gamma % 2 == 1 ? (gamma - 1) / 2 : (gamma - 2) / 2;
    for (int j = 0; j <= last; ++j) {
        s.intervals.push_back(A(j));
        s.intervals.push_back(B(j));
    }
    if (gamma % 2 == 0) s.intervals.push_back(A(gamma / 2));
    return s;
}

double endpoint_sum_S(const IntervalSystem& s) {
    double total = 0.0;
    for (const auto& I : s.intervals) total += I.b - I.a;
    return total;
}

double endpoint_sum_T(const IntervalSystem& s) {
    double total = 0.0;
    for (const auto& I : s.intervals) total += std::sin(2.0 * I.b) - std::sin(2.0 * I.a);
    return total;
}

double closed_form_S(const IntervalSystem& s) {
    const double closed = kPi - 2.0 * s.xi;
    const double sum = endpoint_sum_S(s);
    if (std::abs(sum - closed) > kConsistencyTol)
        fail(ErrorKind::internal_consistency, "closed_form_S: endpoint sum " + io::format_double(sum) +
                                                  " differs from pi - 2 xi");
    return closed;
}

double closed_form_T(const IntervalSystem& s) {
    const double sum = endpoint_sum_T(s);
    if (std::abs(sum) > kConsistencyTol)
        fail(ErrorKind::internal_consistency, "closed_form_T: endpoint sum " + io::format_double(sum) + " is not 0");
    return 0.0;
}

double even_cosine_sum(int gamma) {
    if (gamma < 2 || gamma % 2 != 0) fail(ErrorKind::domain, "even_cosine_sum: gamma must be even and >= 2");
    double s = 0.0;
    for (int j = 0; j <= (gamma - 2) / 2; ++j) s += std::cos((4 * kPi * j + 2 * kPi) / (gamma + 1.0));
    return s;
}

double st_ratio(double a, double b) {
    if (!(0.0 <= a && a <= b && b <= kPi)) fail(ErrorKind::domain, "st_ratio: need 0 <= a <= b <= pi");
    return (b - a - 0.5 * (std::sin(2.0 * b) - std::sin(2.0 * a))) / kPi;
}

double st_ratio(const IntervalSystem& s) {
    double total = 0.0;
    for (const auto& I : s.intervals) total += st_ratio(I.a, I.b);
    return total;
}

double empirical_fraction(const arith::HeckeTable& table, const IntervalSystem& s, std::uint64_t x) {
    if (x > table.prime_limit)
        fail(ErrorKind::incomplete_data, "empirical_fraction: table covers primes up to " +
                                             std::to_string(table.prime_limit) + ", asked for " + std::to_string(x));
    std::size_t hits = 0, total = 0;
    for (const auto& e : table.entries) {
        if (e.p > x) break;
        ++total;
        if (s.contains(e.theta)) ++hits;
    }
    if (total == 0) fail(ErrorKind::domain, "empirical_fraction: no primes up to x");
    return static_cast<double>(hits) / static_cast<double>(total);
}

PfDensity pf_epsilon_density(const arith::HeckeTable& table, double epsilon, std::uint64_t x) {
    const double root2 = std::sqrt(2.0);
    if (!(epsilon > 0.0 && epsilon <= root2)) fail(ErrorKind::domain, "pf_epsilon_density: need 0 < epsilon <= sqrt 2");
    if (x > table.prime_limit)
        fail(ErrorKind::incomplete_data, "pf_epsilon_density: table covers primes up to " +
                                             std::to_string(table.prime_limit));
    const double threshold = root2 - epsilon;
    std::size_t hits = 0, total = 0;
    for (const auto& e : table.entries) {
        if (e.p > x) break;
        ++total;
        if (std::abs(e.lambda) > threshold) ++hits;
    }
    PfDensity out;
    out.epsilon = epsilon;
    out.x = x;
    out.fraction = total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
    // |2 cos theta| > c on [0, arccos(c/2)) and (pi - arccos(c/2), pi]; the two pieces have equal measure.
    out.prediction = 2.0 * st_ratio(0.0, std::acos(threshold / 2.0));
    return out;
}

io::Json record(const IntervalSystem& s, std::uint64_t x, double empirical) {
    const double predicted = 1.0 - 2.0 * s.xi / kPi;
    io::Json j;
    j["gamma"] = s.gamma;
    j["xi"] = s.xi;
    j["x"] = x;
    j["empirical"] = empirical;
    j["predicted"] = predicted;
    j["abs_error"] = std::abs(empirical - predicted);
    return j;
}

}  // namespace mfunc::satotate
