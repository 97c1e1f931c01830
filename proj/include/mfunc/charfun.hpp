#pragma once

// Local characteristic functions
//   K_n(w) = int_0^1 exp(i <z_n(theta), w>) d theta,   <z, w> = Re z Re w + Im z Im w,
// their decay in |w|, and the truncated product Lambda_N(w) = prod_{n < N} K_n(w).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfunc/euler.hpp"

namespace mfunc::charfun {

using euler::cplx;

struct QuadratureOptions {
    double tol = 1e-10;              // successive trapezoid values must agree this well
    std::size_t min_nodes = 64;
    double oversample = 8.0;         // nodes per unit of |w| p^{-sigma} g(n)
    std::size_t max_nodes = std::size_t{1} << 24;
};

struct QuadratureResult {
    cplx value;
    std::size_t nodes = 0;           // trapezoid nodes behind `value`
    double error_estimate = 0.0;     // |T_{2M} - T_M| at the last doubling
};

// Starting node count max(min_nodes, ceil(oversample * |w| * p^{-sigma} * g(n))).
std::size_t initial_nodes(const euler::LocalCurve& curve, double abs_w, const QuadratureOptions& opts = {});

// Curve values on a uniform theta grid that refines by doubling; shared between
// evaluations at equal |w| so the logarithms are taken once.
class CurveNodes {
public:
    CurveNodes(const euler::LocalCurve& curve, std::size_t base_nodes);

    std::size_t base() const noexcept { return base_; }
    std::size_t levels() const noexcept { return levels_.size(); }
    // Level 0: theta = m / base. Level k >= 1: the odd nodes of resolution base * 2^k.
    const std::vector<cplx>& level(std::size_t k);

private:
    const euler::LocalCurve* curve_;
    std::size_t base_;
    std::deque<std::vector<cplx>> levels_;  // stable references across growth
};

// Periodic trapezoid rule with doubling; throws AccuracyError past max_nodes.
QuadratureResult integrate(CurveNodes& nodes, cplx w, const QuadratureOptions& opts = {});

QuadratureResult local_charfn_detail(const euler::LocalCurve& curve, cplx w, const QuadratureOptions& opts = {});
cplx local_charfn(const euler::LocalCurve& curve, cplx w, const QuadratureOptions& opts = {});

// ---------------------------------------------------------------------------
// Decay in |w|.

// min(|w|^{1/2} p^{-sigma/2}, |w| p^{-sigma}): reciprocal size of the Jessen-Wintner bound.
double decay_normalizer(std::uint64_t p, double sigma, double radius);

struct DecayRow {
    double radius = 0.0;
    double sup_abs = 0.0;        // sup over directions of |K_n(radius e^{i tau})|
    double best_tau = 0.0;
    double best_radius = 0.0;    // where the sup was attained, within the radial window
    double normalized = 0.0;     // sup_abs * decay_normalizer
    std::size_t nodes = 0;
};

struct DecayOptions {
    QuadratureOptions quad{};
    // Golden-section search around the best few seed directions.
    bool refine = true;
    std::size_t refine_candidates = 4;
    int refine_iterations = 40;
    // Each radius r stands for the window [r, r + decay_window(curve)], sampled at this many
    // offsets, so a row tracks the envelope rather than one phase of the oscillation.
    std::size_t window_samples = 8;
};

// pi / sup|z_n|: no longer than one beat of the oscillation of K_n in |w|.
double decay_window(const euler::LocalCurve& curve);

// Seed directions are used as given; |K_n| is pi-periodic in tau, so [0, pi) suffices.
std::vector<DecayRow> decay_profile(const euler::LocalCurve& curve, std::span<const double> radii,
                                    std::span<const double> directions, const DecayOptions& opts = {});

// max/min of the normalized sup across the rows.
double decay_spread(std::span<const DecayRow> rows);

std::vector<double> uniform_directions(std::size_t count);

struct DerivativeZeros {
    int first = 0;   // sign changes of g'_{tau,n} on [0, 1)
    int second = 0;  // sign changes of g''_{tau,n}
};

// Root counts from the Taylor form of the derivatives on a uniform periodic grid.
DerivativeZeros count_derivative_zeros(const euler::LocalCurve& curve, double tau, std::size_t grid = 4096);

// Exactly two zeros of g' and g'' for every tested direction.
bool two_zero_structure(const euler::LocalCurve& curve, std::size_t directions = 64, std::size_t grid = 4096);

struct PreflightPrime {
    std::uint64_t p = 0;
    std::size_t index = 0;
    double r1_abs = 0.0;
    double spread = 0.0;
    bool bounded = false;
    std::vector<DecayRow> rows;
};

struct PreflightOptions {
    double r1_min = 0.3;                         // constant C in |r_{1,n}| >= C
    std::size_t required = 5;
    std::uint64_t min_prime = 11;
    std::size_t max_candidates = 200;
    std::vector<double> radius_scales{1e2, 1e3};  // radii are scale * p^sigma
    std::size_t directions = 16;
    double max_spread = 1.5;
    std::size_t zero_check_directions = 32;
};

struct PreflightReport {
    bool passed = false;
    std::size_t bounded_count = 0;
    std::vector<PreflightPrime> primes;
};

// At least `required` primes with |r_1| >= C, two-zero derivative structure and a
// bounded normalized decay profile.
PreflightReport decay_preflight(const euler::EulerProductSpec& spec, double sigma,
                                const PreflightOptions& opts = {});

// ---------------------------------------------------------------------------
// Truncated product on a Cartesian w-grid.

struct WGrid {
    double w_max = 60.0;
    std::size_t nodes = 513;  // per axis; odd so that w = 0 is a node

    double spacing() const noexcept { return 2.0 * w_max / static_cast<double>(nodes - 1); }
    double coordinate(std::size_t i) const noexcept {
        return (static_cast<double>(i) - static_cast<double>(nodes - 1) / 2.0) * spacing();
    }
    std::size_t center() const noexcept { return (nodes - 1) / 2; }
};

struct CharFnGrid {
    std::string spec_name;
    double sigma = 0.0;
    std::size_t prime_cutoff = 0;
    WGrid grid;
    // Row-major: values[a * nodes + b] = Lambda_N(u_a + i v_b).
    std::vector<cplx> values;
    // Bound on sup_w |Lambda(w) - Lambda_N(w)| from the omitted primes.
    double tail_bound = 0.0;
    bool heuristic = false;
    std::vector<std::uint64_t> skipped_primes;
    std::size_t direct_primes = 0;
    std::size_t series_primes = 0;
    double series_remainder = 0.0;
    std::optional<PreflightReport> preflight;

    cplx at(std::size_t a, std::size_t b) const { return values[a * grid.nodes + b]; }
};

struct ProductOptions {
    QuadratureOptions quad{};
    double tail_tol = 1e-2;
    bool enforce_tail = true;
    // Primes with |w|_max * sup|z_n| below this go through the cumulant series.
    double series_threshold = 0.5;
    int series_degree = 32;
    std::size_t series_nodes = 128;
};

// sum_{n >= N} of an upper bound on E|z_n|^2 (all omitted primes, to infinity).
double omitted_second_moment(const euler::EulerProductSpec& spec, double sigma, std::size_t N);

CharFnGrid product_charfn(const euler::EulerProductSpec& spec, double sigma, std::size_t N, const WGrid& grid,
                          const ProductOptions& opts = {});

// CSV `re_w,im_w,re_val,im_val` plus JSON sidecar.
void write_charfn_csv(const CharFnGrid& g, std::ostream& out);

}  // namespace mfunc::charfun
