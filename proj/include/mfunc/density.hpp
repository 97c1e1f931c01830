#pragma once

// Fourier inversion of the truncated characteristic function to the density
//   M(z) = int e^{-i <z, w>} Lambda(w) |dw|,   |dw| = du dv / 2 pi,
// and integrals of M against rectangles and test functions with |dz| = dx dy / 2 pi.

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfunc/charfun.hpp"
#include "mfunc/io.hpp"

namespace mfunc::density {

using cplx = std::complex<double>;

struct Rectangle {
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;

    double width() const noexcept { return x1 - x0; }
    double height() const noexcept { return y1 - y0; }
    double area() const noexcept { return width() * height(); }
    // Finite with x0 <= x1 and y0 <= y1.
    bool valid() const noexcept;
    bool contains(const Rectangle& inner) const noexcept;
    bool operator==(const Rectangle&) const = default;
};

// Overlap area of two rectangles (0 when disjoint).
double overlap_area(const Rectangle& a, const Rectangle& b) noexcept;

// Cell-centred geometry: nx by ny equal cells covering `rect`.
struct Geometry {
    Rectangle rect;
    std::size_t nx = 0, ny = 0;

    double dx() const noexcept { return rect.width() / static_cast<double>(nx); }
    double dy() const noexcept { return rect.height() / static_cast<double>(ny); }
    double x(std::size_t i) const noexcept { return rect.x0 + (static_cast<double>(i) + 0.5) * dx(); }
    double y(std::size_t j) const noexcept { return rect.y0 + (static_cast<double>(j) + 0.5) * dy(); }
    Rectangle cell(std::size_t i, std::size_t j) const noexcept;
    bool operator==(const Geometry&) const = default;
};

struct DensityGrid {
    std::string spec_name;
    double sigma = 0.0;
    std::size_t prime_cutoff = 0;
    double w_max = 0.0;
    std::size_t w_nodes = 0;
    Geometry geometry;
    bool cell_average = false;   // values are cell means of M rather than point values
    bool heuristic = false;
    // values[i * ny + j] = M at cell (i, j), clipped at zero.
    std::vector<double> values;
    double clip_mass = 0.0;       // |negative mass| removed, in |dz| units
    double norm_defect = 0.0;     // |1 - int M |dz|| after clipping
    double imag_residue = 0.0;    // max |Im M| before it was discarded

    double at(std::size_t i, std::size_t j) const { return values[i * geometry.ny + j]; }
    // Probability mass of cell (i, j): M * dx dy / 2 pi.
    double cell_mass(std::size_t i, std::size_t j) const;
};

struct InvertOptions {
    bool cell_average = false;
    double norm_tol = 0.01;       // larger defects raise inversion_quality
    double imag_tol = 1e-8;       // larger residues raise inversion_quality
    bool enforce = true;
};

// Box of +-k standard deviations per axis, from the exact variance
// sum_{n<N} sum_j |r_{j,n}|^2 p^{-2 j sigma} / 2 of each component.
Rectangle auto_rectangle(const euler::EulerProductSpec& spec, double sigma, std::size_t N, double k = 6.0);
double component_variance(const euler::EulerProductSpec& spec, double sigma, std::size_t N);

DensityGrid invert(const charfun::CharFnGrid& grid, const Geometry& geometry, const InvertOptions& opts = {});

// int_R M |dz|; partially covered cells are prorated by area.
double region_mass(const DensityGrid& density, const Rectangle& R);

// int Phi M |dz| by the midpoint rule on the cells.
cplx expectation(const DensityGrid& density, const std::function<cplx(cplx)>& phi);

// Synthetic Lambda on a w-grid, for self-tests of the inversion.
charfun::CharFnGrid synthetic_charfn(const charfun::WGrid& grid, const std::function<cplx(cplx)>& lambda);

void write_density_csv(const DensityGrid& d, std::ostream& out);
// gnuplot "nonuniform matrix": first row ny then the y values, each further row x_i then M(x_i, y_j).
void write_gnuplot_matrix(const DensityGrid& d, std::ostream& out);
io::Json sidecar(const DensityGrid& d);

}  // namespace mfunc::density
