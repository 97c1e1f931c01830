#include <cmath>
#include <memory>
#include <numbers>

#include "doctest.h"
#include "mfunc/empirical.hpp"
#include "mfunc/error.hpp"
#include "mfunc/parallel.hpp"

using namespace mfunc;
using empirical::cplx;

namespace {
std::shared_ptr<const arith::HeckeTable> delta_table() {
    static auto t = std::make_shared<const arith::HeckeTable>(arith::hecke_table(20000));
    return t;
}
}  // namespace

TEST_CASE("log zeta(2) from the truncated product") {
    const auto z = euler::spec_zeta(20000);
    const auto s = empirical::sample_log(z, 2.0, 0.0, 20000);
    const double exact = std::log(std::numbers::pi * std::numbers::pi / 6.0);
    CHECK(s.value.imag() == 0.0);
    CHECK(exact - s.value.real() >= 0.0);
    CHECK(exact - s.value.real() <= s.tail_bound);
    CHECK(s.tail_bound < 1e-4);
    CHECK(std::isinf(empirical::sample_log(z, 1.0, 0.0, 100).tail_bound));
}

TEST_CASE("sampler conjugate symmetry and agreement with direct logs") {
    const auto s2 = euler::spec_sympow(delta_table(), 2);
    for (std::size_t count : {1000u, 1001u}) {
        const auto v = empirical::sample_path(s2, 1.2, 300.0, count, 500);
        for (std::size_t k = 0; k < count; ++k) {
            CHECK(v[k] == std::conj(v[count - 1 - k]));
            CHECK(empirical::sample_time(300.0, count, k) == -empirical::sample_time(300.0, count, count - 1 - k));
        }
        for (std::size_t k : {0u, 17u, 499u, 700u, 999u}) {
            const double t = empirical::sample_time(300.0, count, k);
            CHECK(std::abs(v[k] - empirical::sample_log(s2, 1.2, t, 500).value) < 1e-10);
        }
    }
    CHECK(empirical::sample_log(s2, 1.2, 0.0, 100).value.imag() == 0.0);
}

TEST_CASE("sampler result does not depend on the thread count") {
    const auto z = euler::spec_zeta(3000);
    set_thread_count(1);
    const auto a = empirical::sample_path(z, 1.1, 1000.0, 4000, 3000);
    set_thread_count(3);
    const auto b = empirical::sample_path(z, 1.1, 1000.0, 4000, 3000);
    set_thread_count(0);
    CHECK(a == b);
}

TEST_CASE("histogram bookkeeping") {
    const auto z = euler::spec_zeta(2000);
    const density::Geometry geo{{-2.0, 2.0, -2.0, 2.0}, 20, 20};
    const auto h = empirical::build_histogram(z, 1.2, 1000.0, 4000, 1000, geo);
    std::uint64_t total = h.out_of_range;
    for (auto c : h.counts) total += c;
    CHECK(total == h.samples);
    CHECK_FALSE(h.heuristic);
    CHECK(std::abs(h.mean.imag()) < 1e-12);
    CHECK(empirical::bohr_jessen_ratio(h, geo.rect) ==
          doctest::Approx(1.0 - double(h.out_of_range) / double(h.samples)));
    const density::Rectangle R{-0.3, 0.5, 0.1, 0.9}, Rc{-0.3, 0.5, -0.9, -0.1};
    CHECK(empirical::bohr_jessen_ratio(h, R) == doctest::Approx(empirical::bohr_jessen_ratio(h, Rc)).epsilon(1e-12));
    CHECK_THROWS_AS(empirical::build_histogram(z, 1.2, 1000.0, 999, 1000, geo), Error);
    try {
        empirical::build_histogram(z, 0.8, 1000.0, 4000, 1000, {{-0.1, 0.1, -0.1, 0.1}, 4, 4});
        FAIL("expected grid_too_small");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::grid_too_small);
    }
}

TEST_CASE("discrepancy of a histogram drawn from the density") {
    const auto lam = density::synthetic_charfn(charfun::WGrid{}, [](cplx w) { return std::exp(-std::norm(w) / 2.0); });
    density::InvertOptions o;
    o.cell_average = true;
    const auto d = density::invert(lam, {{-6.0, 6.0, -6.0, 6.0}, 30, 30}, o);
    const auto h = empirical::resample(d, 200000, 5);
    const auto r = empirical::discrepancy(h, d, 1);
    CHECK(r.sufficient);
    CHECK(r.l1 < 3.0 * r.l1_noise);
    CHECK(r.sup_rect < 5.0 * r.max_std_error);
    const auto again = empirical::resample(d, 200000, 5);
    CHECK(again.counts == h.counts);

    auto empty = h;
    empty.samples = 0;
    std::fill(empty.counts.begin(), empty.counts.end(), 0);
    CHECK_FALSE(empirical::discrepancy(empty, d).sufficient);
    CHECK(empirical::rectangle_family(d.geometry, 1).size() == 100);
}
