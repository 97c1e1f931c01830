#include "mfunc/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "mfunc/error.hpp"
#include "mfunc/parallel.hpp"

namespace mfunc::empirical {

namespace {

constexpr std::size_t kReanchor = 256;
constexpr int kMaxTaylor = 12;

void check_cutoff(const euler::EulerProductSpec& spec, std::size_t cutoff) {
    if (cutoff == 0) fail(ErrorKind::domain, "sampler: prime cutoff must be positive");
    if (cutoff > spec.prime_count())
        fail(ErrorKind::incomplete_data, "sampler: " + spec.name() + " has local data for " +
                                             std::to_string(spec.prime_count()) + " primes, asked for " +
                                             std::to_string(cutoff));
}

double tail_bound_after(const euler::EulerProductSpec& spec, double sigma, std::size_t cutoff) {
    // |Log(1 - a x e)| <= -log(1 - x) <= x / (1 - x) per root for |a| <= 1.
    return spec.c0() * arith::prime_power_tail(spec.prime(cutoff - 1), sigma);
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

LogSample sample_log(const euler::EulerProductSpec& spec, double sigma, double t, std::size_t prime_cutoff) {
    if (!(sigma > 0.0)) fail(ErrorKind::domain, "sample_log: sigma must be positive");
    check_cutoff(spec, prime_cutoff);
    cplx z = 0.0;
    for (std::size_t n = 0; n < prime_cutoff; ++n) {
        const double p = static_cast<double>(spec.prime(n));
        const cplx e = std::polar(std::pow(p, -sigma), -t * std::log(p));
        for (auto a : spec.roots(n)) {
            if (!(std::abs(a * e) < 1.0)) fail(ErrorKind::singularity, "sample_log: branch condition violated");
            z -= std::log(1.0 - a * e);
        }
    }
    return {z, tail_bound_after(spec, sigma, prime_cutoff)};
}

double sample_time(double T, std::size_t count, std::size_t k) {
    const double q = 2.0 * static_cast<double>(k) + 1.0 - static_cast<double>(count);
    return q * T / static_cast<double>(count);
}

std::vector<cplx> sample_path(const euler::EulerProductSpec& spec, double sigma, double T, std::size_t count,
                              std::size_t prime_cutoff) {
    if (!(sigma > 0.0)) fail(ErrorKind::domain, "sample_path: sigma must be positive");
    if (!(T > 0.0)) fail(ErrorKind::domain, "sample_path: T must be positive");
    check_cutoff(spec, prime_cutoff);

    std::vector<euler::LocalCurve> curves;
    curves.reserve(prime_cutoff);
    for (std::size_t n = 0; n < prime_cutoff; ++n)
        if (spec.degree(n) > 0) curves.emplace_back(spec, n, sigma);

    std::vector<cplx> values(count, 0.0);
    const std::size_t positive = count / 2;
    const std::size_t first = count - positive;  // index of the smallest t > 0
    const double dt = 2.0 * T / static_cast<double>(count);

    parallel_for_blocks(positive, [&](std::size_t lo, std::size_t hi) {
        for (const auto& c : curves) {
            const double lp = std::log(static_cast<double>(c.prime()));
            const cplx rot = std::polar(1.0, -dt * lp);
            const auto coeff = c.coefficients();
            const bool taylor = c.truncation() <= kMaxTaylor;
            cplx e;
            for (std::size_t m = lo; m < hi; ++m) {
                const std::size_t k = first + m;
                // Anchors sit at fixed global indices so e does not depend on the partition.
                if (m % kReanchor == 0 || m == lo) {
                    const std::size_t anchor = m - m % kReanchor;
                    e = std::polar(1.0, -sample_time(T, count, first + anchor) * lp);
                    for (std::size_t s = anchor; s < m; ++s) e *= rot;
                } else {
                    e *= rot;
                }
                cplx z = 0.0;
                if (taylor) {
                    cplx ej = e;
                    for (std::size_t j = 0; j < coeff.size(); ++j) {
                        z += coeff[j] * ej;
                        ej *= e;
                    }
                } else {
                    const cplx ex = e * c.radius();
                    for (auto a : c.roots()) z -= std::log(1.0 - a * ex);
                }
                values[k] += z;
            }
        }
    });
    for (std::size_t k = first; k < count; ++k) values[count - 1 - k] = std::conj(values[k]);
    if (count % 2 == 1) {
        // t = 0: the product is real for real-coefficient specs.
        values[positive] = sample_log(spec, sigma, 0.0, prime_cutoff).value;
    }
    return values;
}

EmpiricalHistogram histogram_from_values(const std::vector<cplx>& values, const density::Geometry& g) {
    if (g.nx == 0 || g.ny == 0 || !(g.rect.area() > 0.0)) fail(ErrorKind::domain, "histogram: empty geometry");
    EmpiricalHistogram h;
    h.geometry = g;
    h.samples = values.size();
    h.counts.assign(g.nx * g.ny, 0);
    cplx sum = 0.0;
    for (const auto& v : values) {
        sum += v;
        const double fx = std::floor((v.real() - g.rect.x0) / g.dx());
        const double fy = std::floor((v.imag() - g.rect.y0) / g.dy());
        if (fx >= 0.0 && fy >= 0.0 && fx < static_cast<double>(g.nx) && fy < static_cast<double>(g.ny))
            ++h.counts[static_cast<std::size_t>(fx) * g.ny + static_cast<std::size_t>(fy)];
        else
            ++h.out_of_range;
    }
    h.mean = values.empty() ? cplx(0.0) : sum / static_cast<double>(values.size());
    return h;
}

EmpiricalHistogram build_histogram(const euler::EulerProductSpec& spec, double sigma, double T,
                                   std::size_t sample_count, std::size_t prime_cutoff,
                                   const density::Geometry& geometry, const HistogramOptions& opts) {
    if (sample_count < 1000) fail(ErrorKind::domain, "build_histogram: need at least 1000 samples");
    auto h = histogram_from_values(sample_path(spec, sigma, T, sample_count, prime_cutoff), geometry);
    h.spec_name = spec.name();
    h.sigma = sigma;
    h.T = T;
    h.prime_cutoff = prime_cutoff;
    h.seed = opts.seed;
    h.heuristic = sigma <= 1.0 || sigma <= spec.sigma0();
    h.tail_bound = tail_bound_after(spec, sigma, prime_cutoff);
    const double frac = static_cast<double>(h.out_of_range) / static_cast<double>(h.samples);
    if (frac > opts.max_out_of_range)
        fail(ErrorKind::grid_too_small, "build_histogram: " + io::format_double(100.0 * frac, 4) +
                                            "% of samples fall outside the grid");
    return h;
}

double bohr_jessen_ratio(const EmpiricalHistogram& h, const density::Rectangle& R) {
    if (!R.valid()) fail(ErrorKind::domain, "bohr_jessen_ratio: invalid rectangle");
    if (h.samples == 0) return 0.0;
    const auto& g = h.geometry;
    // Points outside the grid lie in R only if R reaches past the grid.
    if (!g.rect.contains(R) && h.out_of_range > 0)
        fail(ErrorKind::coverage, "bohr_jessen_ratio: rectangle extends past the histogram grid");
    double hits = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i)
        for (std::size_t j = 0; j < g.ny; ++j) {
            const auto c = h.at(i, j);
            if (c == 0) continue;
            const auto cell = g.cell(i, j);
            const double a = density::overlap_area(cell, R);
            if (a > 0.0) hits += static_cast<double>(c) * a / cell.area();
        }
    return hits / static_cast<double>(h.samples);
}

std::vector<density::Rectangle> rectangle_family(const density::Geometry& g, std::uint64_t seed, std::size_t count) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    auto span = [&](std::size_t cells) {
        std::size_t a = rng() % (cells + 1), b = rng() % (cells + 1);
        while (a == b) b = rng() % (cells + 1);
        return std::pair{std::min(a, b), std::max(a, b)};
    };
    std::vector<density::Rectangle> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const auto [i0, i1] = span(g.nx);
        const auto [j0, j1] = span(g.ny);
        out.push_back({g.rect.x0 + static_cast<double>(i0) * g.dx(), g.rect.x0 + static_cast<double>(i1) * g.dx(),
                       g.rect.y0 + static_cast<double>(j0) * g.dy(), g.rect.y0 + static_cast<double>(j1) * g.dy()});
    }
    return out;
}

DiscrepancyReport discrepancy(const EmpiricalHistogram& h, const density::DensityGrid& d, std::uint64_t seed) {
    if (!(h.geometry == d.geometry)) fail(ErrorKind::domain, "discrepancy: histogram and density grids differ");
    DiscrepancyReport r;
    r.samples = h.samples;
    r.sufficient = h.samples > 0;
    if (!r.sufficient) return r;
    const auto& g = h.geometry;
    const double S = static_cast<double>(h.samples);
    double on_grid = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i)
        for (std::size_t j = 0; j < g.ny; ++j) {
            const double m = d.cell_mass(i, j);
            on_grid += m;
            r.l1 += std::abs(static_cast<double>(h.at(i, j)) / S - m);
            r.l1_noise += std::sqrt(2.0 * std::max(0.0, m * (1.0 - m)) / (std::numbers::pi * S));
        }
    r.density_outside = 1.0 - on_grid;
    r.out_of_range_fraction = static_cast<double>(h.out_of_range) / S;
    r.sup_rect = -1.0;
    for (const auto& R : rectangle_family(g, seed)) {
        const double ratio = bohr_jessen_ratio(h, R), mass = density::region_mass(d, R);
        const double se = std::sqrt(std::max(0.0, mass * (1.0 - mass)) / S);
        r.max_std_error = std::max(r.max_std_error, se);
        if (std::abs(ratio - mass) > r.sup_rect) {
            r.sup_rect = std::abs(ratio - mass);
            r.worst = R;
            r.worst_ratio = ratio;
            r.worst_mass = mass;
            r.std_error = se;
        }
    }
    return r;
}

EmpiricalHistogram resample(const density::DensityGrid& d, std::size_t samples, std::uint64_t seed) {
    const auto& g = d.geometry;
    std::vector<double> cdf(g.nx * g.ny);
    double acc = 0.0;
    for (std::size_t k = 0; k < cdf.size(); ++k) {
        acc += d.values[k];
        cdf[k] = acc;
    }
    if (!(acc > 0.0)) fail(ErrorKind::domain, "resample: density has no mass");
    EmpiricalHistogram h;
    h.spec_name = d.spec_name;
    h.sigma = d.sigma;
    h.prime_cutoff = d.prime_cutoff;
    h.seed = seed;
    h.synthetic = true;
    h.heuristic = d.heuristic;
    h.geometry = g;
    h.samples = samples;
    h.counts.assign(cdf.size(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < samples; ++s) {
        const double u = unit_uniform(rng) * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        ++h.counts[std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1)];
    }
    return h;
}

void write_histogram_csv(const EmpiricalHistogram& h, std::ostream& out) {
    out << "x,y,count\n";
    const auto& g = h.geometry;
    for (std::size_t i = 0; i < g.nx; ++i)
        for (std::size_t j = 0; j < g.ny; ++j)
            out << io::format_double(g.x(i)) << ',' << io::format_double(g.y(j)) << ',' << h.at(i, j) << '\n';
}

io::Json sidecar(const EmpiricalHistogram& h) {
    const auto& g = h.geometry;
    io::Json j;
    j["kind"] = "histogram";
    j["spec"] = h.spec_name;
    j["sigma"] = h.sigma;
    j["T"] = h.T;
    j["samples"] = h.samples;
    j["prime_cutoff"] = h.prime_cutoff;
    j["seed"] = h.seed;
    j["heuristic"] = h.heuristic;
    j["synthetic"] = h.synthetic;
    j["stride"] = h.samples > 0 ? 2.0 * h.T / static_cast<double>(h.samples) : 0.0;
    j["z_rect"] = {g.rect.x0, g.rect.x1, g.rect.y0, g.rect.y1};
    j["resolution"] = {g.nx, g.ny};
    j["out_of_range"] = h.out_of_range;
    j["mean"] = {h.mean.real(), h.mean.imag()};
    j["tail_bound"] = std::isfinite(h.tail_bound) ? io::Json(h.tail_bound) : io::Json(nullptr);
    return j;
}

io::Json to_json(const DiscrepancyReport& r) {
    io::Json j;
    j["sufficient"] = r.sufficient;
    j["samples"] = r.samples;
    j["l1"] = r.l1;
    j["l1_noise"] = r.l1_noise;
    j["sup_rect"] = r.sup_rect;
    j["worst_rect"] = {r.worst.x0, r.worst.x1, r.worst.y0, r.worst.y1};
    j["worst_ratio"] = r.worst_ratio;
    j["worst_mass"] = r.worst_mass;
    j["std_error"] = r.std_error;
    j["max_std_error"] = r.max_std_error;
    j["out_of_range_fraction"] = r.out_of_range_fraction;
    j["density_outside"] = r.density_outside;
    return j;
}

}  // namespace mfunc::empirical
