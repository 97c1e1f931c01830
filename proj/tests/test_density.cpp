#include <cmath>
#include <memory>
#include <numbers>

#include "doctest.h"
#include "mfunc/density.hpp"
#include "mfunc/error.hpp"

using namespace mfunc;
using density::cplx;

namespace {
std::shared_ptr<const arith::HeckeTable> delta_table() {
    static auto t = std::make_shared<const arith::HeckeTable>(arith::hecke_table(20000));
    return t;
}
}  // namespace

TEST_CASE("Gaussian is its own transform") {
    const auto lam = density::synthetic_charfn(charfun::WGrid{}, [](cplx w) { return std::exp(-std::norm(w) / 2.0); });
    density::Geometry geo{{-5.0, 5.0, -4.0, 6.0}, 50, 40};
    const auto d = density::invert(lam, geo);
    double worst = 0.0;
    for (std::size_t i = 0; i < geo.nx; ++i)
        for (std::size_t j = 0; j < geo.ny; ++j) {
            const double x = geo.x(i), y = geo.y(j);
            worst = std::max(worst, std::abs(d.at(i, j) - std::exp(-(x * x + y * y) / 2.0)));
        }
    CHECK(worst < 1e-6);
    CHECK(d.imag_residue < 1e-12);
    CHECK(d.clip_mass < 1e-12);
}

TEST_CASE("cell means integrate a shifted Gaussian exactly") {
    // Lambda of a Gaussian centred at (0.3, -0.2): exp(i <c, w>) exp(-|w|^2 / 2).
    const auto lam = density::synthetic_charfn(charfun::WGrid{}, [](cplx w) {
        return std::exp(cplx(0.0, 0.3 * w.real() - 0.2 * w.imag()) - std::norm(w) / 2.0);
    });
    density::Geometry geo{{-7.0, 7.0, -7.0, 7.0}, 14, 14};
    density::InvertOptions o;
    o.cell_average = true;
    const auto d = density::invert(lam, geo, o);
    CHECK(d.norm_defect < 1e-9);
    // Cell-aligned half plane x >= 0: P(N(0.3, 1) >= 0) = (1 + erf(0.3 / sqrt 2)) / 2.
    const double expect = 0.5 * (1.0 + std::erf(0.3 / std::sqrt(2.0)));
    CHECK(density::region_mass(d, {0.0, 7.0, -7.0, 7.0}) == doctest::Approx(expect).epsilon(1e-9));
    const auto mean = density::expectation(d, [](cplx z) { return z; });
    CHECK(std::abs(mean - cplx(0.3, -0.2)) < 1e-3);
}

TEST_CASE("region mass and coverage") {
    const auto lam = density::synthetic_charfn(charfun::WGrid{}, [](cplx w) { return std::exp(-std::norm(w) / 2.0); });
    density::Geometry geo{{-8.0, 8.0, -8.0, 8.0}, 64, 64};
    const auto d = density::invert(lam, geo);
    CHECK(density::region_mass(d, geo.rect) == doctest::Approx(1.0).epsilon(d.norm_defect + 1e-12));
    CHECK(density::region_mass(d, {0.5, 0.5, -1.0, 1.0}) == 0.0);
    const density::Rectangle R{-1.3, 0.7, -0.2, 2.1};
    const auto indicator = density::expectation(d, [&](cplx z) {
        return cplx(z.real() >= R.x0 && z.real() <= R.x1 && z.imag() >= R.y0 && z.imag() <= R.y1 ? 1.0 : 0.0);
    });
    // Midpoint indicator and prorated cells differ only on the boundary cells.
    CHECK(indicator.real() == doctest::Approx(density::region_mass(d, R)).epsilon(0.03));
    try {
        density::region_mass(d, {7.0, 9.0, 0.0, 1.0});
        FAIL("expected coverage error");
    } catch (const CoverageError& e) {
        CHECK(e.uncovered_fraction() == doctest::Approx(0.5));
    }
}

TEST_CASE("inversion quality error") {
    // A truncated grid that cannot resolve a narrow Gaussian.
    const auto lam = density::synthetic_charfn(charfun::WGrid{3.0, 31}, [](cplx w) { return std::exp(-std::norm(w) / 50.0); });
    CHECK_THROWS_AS(density::invert(lam, {{-2.0, 2.0, -2.0, 2.0}, 20, 20}), Error);
}

TEST_CASE("zeta density at sigma 1.2 with a modest cutoff") {
    const auto z = euler::spec_zeta(1000);
    const auto lam = charfun::product_charfn(z, 1.2, 300, charfun::WGrid{});
    const auto rect = density::auto_rectangle(z, 1.2, 300);
    CHECK(rect.x1 == doctest::Approx(6.0 * std::sqrt(density::component_variance(z, 1.2, 300))));
    const auto d = density::invert(lam, {rect, 120, 120});
    CHECK(d.norm_defect < 1e-3);
    CHECK(d.clip_mass < 5e-3);
    CHECK(d.imag_residue < 1e-8);
    const auto mean = density::expectation(d, [](cplx z) { return z; });
    CHECK(std::abs(mean) < 1e-3);
}

TEST_CASE("symmetric power density is symmetric in y") {
    const auto s2 = euler::spec_sympow(delta_table(), 2);
    const auto lam = charfun::product_charfn(s2, 1.2, 300, charfun::WGrid{});
    const auto d = density::invert(lam, {density::auto_rectangle(s2, 1.2, 300), 80, 80});
    double worst = 0.0;
    for (std::size_t i = 0; i < 80; ++i)
        for (std::size_t j = 0; j < 80; ++j) worst = std::max(worst, std::abs(d.at(i, j) - d.at(i, 79 - j)));
    CHECK(worst < 1e-6);
}
