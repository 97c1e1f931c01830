#include "mfunc/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>

#include "mfunc/error.hpp"

namespace mfunc::density {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

}  // namespace

bool Rectangle::valid() const noexcept {
    return std::isfinite(x0) && std::isfinite(x1) && std::isfinite(y0) && std::isfinite(y1) && x0 <= x1 && y0 <= y1;
}

bool Rectangle::contains(const Rectangle& r) const noexcept {
    return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1;
}

double overlap_area(const Rectangle& a, const Rectangle& b) noexcept {
    const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    return w > 0.0 && h > 0.0 ? w * h : 0.0;
}

Rectangle Geometry::cell(std::size_t i, std::size_t j) const noexcept {
    return {rect.x0 + static_cast<double>(i) * dx(), rect.x0 + static_cast<double>(i + 1) * dx(),
            rect.y0 + static_cast<double>(j) * dy(), rect.y0 + static_cast<double>(j + 1) * dy()};
}

double DensityGrid::cell_mass(std::size_t i, std::size_t j) const {
    return at(i, j) * geometry.dx() * geometry.dy() / kTwoPi;
}

double component_variance(const euler::EulerProductSpec& spec, double sigma, std::size_t N) {
    double var = 0.0;
    for (std::size_t n = 0; n < std::min(N, spec.prime_count()); ++n) {
        if (spec.degree(n) == 0) continue;
        const euler::LocalCurve c(spec, n, sigma);
        for (auto cj : c.coefficients()) var += std::norm(cj) / 2.0;
    }
    return var;
}

Rectangle auto_rectangle(const euler::EulerProductSpec& spec, double sigma, std::size_t N, double k) {
    const double s = k * std::sqrt(component_variance(spec, sigma, N));
    return {-s, s, -s, s};
}

DensityGrid invert(const charfun::CharFnGrid& grid, const Geometry& geo, const InvertOptions& opts) {
    if (!geo.rect.valid() || geo.rect.area() <= 0.0) fail(ErrorKind::domain, "invert: empty z-rectangle");
    if (geo.nx == 0 || geo.ny == 0) fail(ErrorKind::domain, "invert: resolution must be positive");
    const std::size_t n = grid.grid.nodes;
    if (grid.values.size() != n * n) fail(ErrorKind::domain, "invert: malformed characteristic-function grid");
    if (grid.preflight && !grid.preflight->passed)
        fail(ErrorKind::inversion_quality, "invert: decay preflight failed (" + std::to_string(grid.preflight->bounded_count) +
                                    " primes with bounded decay, need 5)");

    const double h = grid.grid.spacing();
    const double dx = geo.dx(), dy = geo.dy();
    // F(i, a) = trapezoid weight * exp(-i z_i u_a) [* sinc(u_a dz / 2) for cell means].
    auto kernel = [&](std::size_t count, auto coord, double cell) {
        Eigen::MatrixXcd F(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t a = 0; a < n; ++a) {
                const double u = grid.grid.coordinate(a);
                double wt = (a == 0 || a + 1 == n) ? 0.5 * h : h;
                if (opts.cell_average) wt *= sinc(0.5 * u * cell);
                F(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = std::polar(wt, -coord(i) * u);
            }
        return F;
    };
    const Eigen::MatrixXcd Fx = kernel(geo.nx, [&](std::size_t i) { return geo.x(i); }, dx);
    const Eigen::MatrixXcd Fy = kernel(geo.ny, [&](std::size_t j) { return geo.y(j); }, dy);
    Eigen::MatrixXcd L(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            L(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = grid.values[a * n + b];
    const Eigen::MatrixXcd M = (Fx * L) * Fy.transpose() / kTwoPi;

    DensityGrid d;
    d.spec_name = grid.spec_name;
    d.sigma = grid.sigma;
    d.prime_cutoff = grid.prime_cutoff;
    d.w_max = grid.grid.w_max;
    d.w_nodes = n;
    d.geometry = geo;
    d.cell_average = opts.cell_average;
    d.heuristic = grid.heuristic;
    d.values.resize(geo.nx * geo.ny);
    const double cell = dx * dy / kTwoPi;
    double total = 0.0, clipped = 0.0;
    for (std::size_t i = 0; i < geo.nx; ++i)
        for (std::size_t j = 0; j < geo.ny; ++j) {
            const cplx m = M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            d.imag_residue = std::max(d.imag_residue, std::abs(m.imag()));
            double v = m.real();
            if (v < 0.0) {
                clipped += -v * cell;
                v = 0.0;
            }
            d.values[i * geo.ny + j] = v;
            total += v * cell;
        }
    d.clip_mass = clipped;
    d.norm_defect = std::abs(1.0 - total);
    if (opts.enforce) {
        if (d.norm_defect > opts.norm_tol)
            fail(ErrorKind::inversion_quality,
                 "invert: norm defect " + io::format_double(d.norm_defect, 4) +
                     " exceeds tolerance; enlarge W_max, the w-grid, the z-rectangle or N");
        if (d.imag_residue > opts.imag_tol)
            fail(ErrorKind::inversion_quality,
                 "invert: imaginary residue " + io::format_double(d.imag_residue, 4) + " exceeds tolerance");
    }
    return d;
}

double region_mass(const DensityGrid& d, const Rectangle& R) {
    if (!R.valid()) fail(ErrorKind::domain, "region_mass: invalid rectangle");
    const auto& g = d.geometry;
    if (!g.rect.contains(R)) {
        const double inside = overlap_area(g.rect, R);
        const double uncovered = R.area() > 0.0 ? 1.0 - inside / R.area() : 1.0;
        throw CoverageError("region_mass: rectangle extends outside the density grid (" +
                                io::format_double(100.0 * uncovered, 4) + "% uncovered)",
                            uncovered);
    }
    if (R.area() == 0.0) return 0.0;
    const auto lo_i = static_cast<std::size_t>(std::max(0.0, std::floor((R.x0 - g.rect.x0) / g.dx())));
    const auto lo_j = static_cast<std::size_t>(std::max(0.0, std::floor((R.y0 - g.rect.y0) / g.dy())));
    double mass = 0.0;
    for (std::size_t i = lo_i; i < g.nx && g.rect.x0 + static_cast<double>(i) * g.dx() < R.x1; ++i)
        for (std::size_t j = lo_j; j < g.ny && g.rect.y0 + static_cast<double>(j) * g.dy() < R.y1; ++j) {
            const double a = overlap_area(g.cell(i, j), R);
            if (a > 0.0) mass += d.at(i, j) * a / kTwoPi;
        }
    return mass;
}

cplx expectation(const DensityGrid& d, const std::function<cplx(cplx)>& phi) {
    const auto& g = d.geometry;
    cplx sum = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i)
        for (std::size_t j = 0; j < g.ny; ++j) sum += phi(cplx(g.x(i), g.y(j))) * d.cell_mass(i, j);
    return sum;
}

charfun::CharFnGrid synthetic_charfn(const charfun::WGrid& grid, const std::function<cplx(cplx)>& lambda) {
    charfun::CharFnGrid g;
    g.spec_name = "synthetic";
    g.grid = grid;
    g.values.resize(grid.nodes * grid.nodes);
    for (std::size_t a = 0; a < grid.nodes; ++a)
        for (std::size_t b = 0; b < grid.nodes; ++b)
            g.values[a * grid.nodes + b] = lambda(cplx(grid.coordinate(a), grid.coordinate(b)));
    return g;
}

void write_density_csv(const DensityGrid& d, std::ostream& out) {
    out << "x,y,m\n";
    const auto& g = d.geometry;
    for (std::size_t i = 0; i < g.nx; ++i)
        for (std::size_t j = 0; j < g.ny; ++j)
            out << io::format_double(g.x(i)) << ',' << io::format_double(g.y(j)) << ','
                << io::format_double(d.at(i, j)) << '\n';
}

void write_gnuplot_matrix(const DensityGrid& d, std::ostream& out) {
    const auto& g = d.geometry;
    out << g.ny;
    for (std::size_t j = 0; j < g.ny; ++j) out << ' ' << io::format_double(g.y(j));
    out << '\n';
    for (std::size_t i = 0; i < g.nx; ++i) {
        out << io::format_double(g.x(i));
        for (std::size_t j = 0; j < g.ny; ++j) out << ' ' << io::format_double(d.at(i, j));
        out << '\n';
    }
}

io::Json sidecar(const DensityGrid& d) {
    const auto& g = d.geometry;
    io::Json j;
    j["kind"] = "density";
    j["spec"] = d.spec_name;
    j["sigma"] = d.sigma;
    j["prime_cutoff"] = d.prime_cutoff;
    j["w_max"] = d.w_max;
    j["w_nodes"] = d.w_nodes;
    j["z_rect"] = {g.rect.x0, g.rect.x1, g.rect.y0, g.rect.y1};
    j["resolution"] = {g.nx, g.ny};
    j["cell_average"] = d.cell_average;
    j["clip_mass"] = d.clip_mass;
    j["norm_defect"] = d.norm_defect;
    j["imag_residue"] = d.imag_residue;
    j["heuristic"] = d.heuristic;
    j["measure"] = "|dz| = dx dy / 2pi, |dw| = du dv / 2pi";
    return j;
}

}  // namespace mfunc::density
