#pragma once

// Interval systems {theta : |sin((gamma + 1) theta)| >= sin xi} built from the
// blocks A(j), B(j), their endpoint sums, and Sato-Tate measures.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "mfunc/arith.hpp"
#include "mfunc/io.hpp"

namespace mfunc::satotate {

struct Interval {
    double a = 0.0, b = 0.0;
};

struct IntervalSystem {
    int gamma = 1;
    double xi = 0.0;
    double eta = 0.0;   // sin(xi)
    int ell = 1;        // 1 for odd gamma, 2 for even gamma
    std::vector<Interval> intervals;   // ascending, disjoint

    bool contains(double theta) const noexcept;
};

// A(j) = [(2 pi j + xi), (2 pi j + pi - xi)] / (gamma + 1), B(j) shifted by pi / (gamma + 1).
// Odd gamma: j = 0..(gamma - 1)/2. Even gamma: j = 0..(gamma - 2)/2 plus A(gamma / 2).
IntervalSystem build_intervals(int gamma, double xi);

// pi - 2 xi, checked against the endpoint sum sum_blocks (b - a).
double closed_form_S(const IntervalSystem& system);
// 0, checked against the endpoint sum sum_blocks (sin 2b - sin 2a).
double closed_form_T(const IntervalSystem& system);

double endpoint_sum_S(const IntervalSystem& system);
double endpoint_sum_T(const IntervalSystem& system);

// sum_{j=0}^{(gamma-2)/2} cos((4 pi j + 2 pi) / (gamma + 1)) for even gamma (equals -1/2).
double even_cosine_sum(int gamma);

// (1/pi)(b - a - (sin 2b - sin 2a)/2): Sato-Tate measure of [a, b].
double st_ratio(double a, double b);
double st_ratio(const IntervalSystem& system);

// Fraction of primes p <= x with theta(p) in the system.
double empirical_fraction(const arith::HeckeTable& table, const IntervalSystem& system, std::uint64_t x);

struct PfDensity {
    double epsilon = 0.0;
    std::uint64_t x = 0;
    double fraction = 0.0;     // share of primes p <= x with |lambda(p)| > sqrt 2 - epsilon
    double prediction = 0.0;   // Sato-Tate measure of {theta : |2 cos theta| > sqrt 2 - epsilon}
};

PfDensity pf_epsilon_density(const arith::HeckeTable& table, double epsilon, std::uint64_t x);

// {gamma, xi, x, empirical, predicted, abs_error}
io::Json record(const IntervalSystem& system, std::uint64_t x, double empirical);

}  // namespace mfunc::satotate
