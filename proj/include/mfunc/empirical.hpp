#pragma once

// Values of the truncated log Euler product on vertical lines, their histograms,
// and their discrepancy against a density grid.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfunc/density.hpp"
#include "mfunc/euler.hpp"
#include "mfunc/io.hpp"

namespace mfunc::empirical {

using cplx = std::complex<double>;

struct LogSample {
    cplx value;
    // Bound on the omitted primes' contribution (+inf for sigma <= 1).
    double tail_bound = 0.0;
};

// -sum_{n < cutoff} sum_k Log(1 - a_n^{(k)} p_n^{-sigma - i t}).
LogSample sample_log(const euler::EulerProductSpec& spec, double sigma, double t, std::size_t prime_cutoff);

// Equidistant midpoints t_k = -T + (k + 1/2) 2T / count.
double sample_time(double T, std::size_t count, std::size_t k);

// All sample values on the equidistant grid, computed for t > 0 and mirrored by conjugation.
std::vector<cplx> sample_path(const euler::EulerProductSpec& spec, double sigma, double T, std::size_t count,
                              std::size_t prime_cutoff);

struct EmpiricalHistogram {
    std::string spec_name;
    double sigma = 0.0;
    double T = 0.0;
    std::size_t samples = 0;
    std::size_t prime_cutoff = 0;
    std::uint64_t seed = 0;
    bool heuristic = false;
    bool synthetic = false;   // drawn from a density rather than sampled
    density::Geometry geometry;
    std::vector<std::uint64_t> counts;   // counts[i * ny + j]
    std::uint64_t out_of_range = 0;
    cplx mean;
    double tail_bound = 0.0;

    std::uint64_t at(std::size_t i, std::size_t j) const { return counts[i * geometry.ny + j]; }
};

struct HistogramOptions {
    double max_out_of_range = 0.05;   // larger fractions raise grid_too_small
    std::uint64_t seed = 0;           // recorded only; the equidistant sampler is deterministic
};

EmpiricalHistogram histogram_from_values(const std::vector<cplx>& values, const density::Geometry& geometry);

EmpiricalHistogram build_histogram(const euler::EulerProductSpec& spec, double sigma, double T,
                                   std::size_t sample_count, std::size_t prime_cutoff,
                                   const density::Geometry& geometry, const HistogramOptions& opts = {});

// Fraction of all samples inside R; partially covered bins are prorated by area.
double bohr_jessen_ratio(const EmpiricalHistogram& hist, const density::Rectangle& R);

// 100 cell-aligned rectangles inside `geometry`, fixed by the seed.
std::vector<density::Rectangle> rectangle_family(const density::Geometry& geometry, std::uint64_t seed,
                                                 std::size_t count = 100);

struct DiscrepancyReport {
    bool sufficient = false;          // false when there are no samples
    std::size_t samples = 0;
    double l1 = 0.0;                  // sum over cells |count / samples - cell mass|
    double l1_noise = 0.0;            // expected l1 under independent sampling
    double sup_rect = 0.0;            // max over the family of |ratio - mass|
    density::Rectangle worst;
    double worst_ratio = 0.0, worst_mass = 0.0;
    double std_error = 0.0;           // binomial standard error at the worst rectangle
    double max_std_error = 0.0;       // largest binomial standard error over the family
    double out_of_range_fraction = 0.0;
    double density_outside = 0.0;     // 1 - density mass on the grid
};

DiscrepancyReport discrepancy(const EmpiricalHistogram& hist, const density::DensityGrid& density,
                              std::uint64_t seed = 0);

// Multinomial draw of `samples` points from the cell masses (inverse transform), for self-tests.
EmpiricalHistogram resample(const density::DensityGrid& density, std::size_t samples, std::uint64_t seed);

void write_histogram_csv(const EmpiricalHistogram& h, std::ostream& out);
io::Json sidecar(const EmpiricalHistogram& h);
io::Json to_json(const DiscrepancyReport& r);

}  // namespace mfunc::empirical
