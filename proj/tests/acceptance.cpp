// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mfunc/arith.hpp"
#include "mfunc/charfun.hpp"
#include "mfunc/density.hpp"
#include "mfunc/error.hpp"
#include "mfunc/euler.hpp"
#include "mfunc/pipeline.hpp"
#include "mfunc/satotate.hpp"
#include "oracles/oracles.hpp"

using namespace mfunc;
using cplx = std::complex<double>;
using boost::multiprecision::cpp_int;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::filesystem::path cache_dir() { return arith::default_cache_dir(); }

std::shared_ptr<const arith::HeckeTable> delta_table() {
    static auto t = std::make_shared<const arith::HeckeTable>(arith::cached_hecke_table(1000000, cache_dir()));
    return t;
}

// Table over the first `count` primes with prescribed angles.
std::shared_ptr<const arith::HeckeTable> angle_table(const std::vector<double>& thetas) {
    const auto primes = arith::first_primes(thetas.size());
    arith::HeckeTable t;
    t.prime_limit = primes.primes.back();
    for (std::size_t i = 0; i < thetas.size(); ++i)
        t.entries.push_back({primes.primes[i], 2.0 * std::cos(thetas[i]), thetas[i], false});
    return std::make_shared<const arith::HeckeTable>(t);
}

cpp_int big(arith::Int128 v) {
    const bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
    cpp_int r = static_cast<std::uint64_t>(u >> 64);
    r <<= 64;
    r += static_cast<std::uint64_t>(u);
    return neg ? cpp_int(-r) : r;
}

void c1(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> angle(0.0, kPi);
    std::vector<double> thetas(1000);
    for (auto& t : thetas) t = angle(rng);
    const auto table = angle_table(thetas);

    double cheb = 0.0;
    for (int g = 2; g <= 10; ++g) {
        const auto s = euler::spec_sympow(table, g);
        for (std::size_t n = 0; n < thetas.size(); ++n) {
            const double r1 = euler::taylor_r(s, 1, n).real();
            cheb = std::max(cheb, std::abs(r1 * std::sin(thetas[n]) - std::sin((g + 1) * thetas[n])));
        }
    }
    // gamma = 1: r_1 = lambda = 2 cos theta.
    const auto m = euler::spec_modular(table);
    for (std::size_t n = 0; n < thetas.size(); ++n)
        cheb = std::max(cheb, std::abs(euler::taylor_r(m, 1, n).real() * std::sin(thetas[n]) - std::sin(2 * thetas[n])));
    o.require(cheb < 1e-12, "Chebyshev identity");

    double endpoint = 0.0;
    for (int g = 2; g <= 20; ++g)
        for (int k = 1; k <= 9; ++k) {
            const double xi = k * kPi / 20;
            const auto s = satotate::build_intervals(g, xi);
            endpoint = std::max({endpoint, std::abs(satotate::endpoint_sum_S(s) - (kPi - 2 * xi)),
                                 std::abs(satotate::endpoint_sum_T(s))});
        }
    o.require(endpoint < 1e-12, "endpoint sums");

    std::uniform_real_distribution<double> lam(-2.0, 2.0);
    std::vector<double> lambdas(1000), lthetas(1000);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        lambdas[i] = lam(rng);
        lthetas[i] = arith::satake_angle(lambdas[i]);
    }
    const auto s2 = euler::spec_sympow(angle_table(lthetas), 2);
    double reduction = 0.0;
    for (std::size_t n = 0; n < lambdas.size(); ++n)
        reduction = std::max(reduction, std::abs(euler::taylor_r(s2, 1, n).real() - (lambdas[n] * lambdas[n] - 1)));
    o.require(reduction < 1e-13, "gamma = 2 reduction");

    const double secs = seconds_since(t0);
    o.require(secs < 1.0, "runtime");
    o.detail << " chebyshev=" << cheb << " endpoint=" << endpoint << " reduction=" << reduction << " time=" << secs
             << "s";
}

void c2(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ref = oracle::tau_by_expansion(3);
    const auto tau = arith::tau_coefficients(1000000);
    o.require(big(tau[1]) == -24 && big(tau[2]) == 252 && ref[2] == -24 && ref[3] == 252, "tau(2), tau(3)");

    const auto primes = arith::sieve_primes(1000000).primes;
    std::size_t hecke = 0, deligne = 0;
    for (auto p : primes) {
        if (p <= 1000) {
            const cpp_int tp = big(tau[p - 1]);
            if (big(tau[p * p - 1]) == tp * tp - boost::multiprecision::pow(cpp_int(p), 11)) ++hecke;
            else o.require(false, "Hecke relation at p = " + std::to_string(p));
        }
        if (arith::deligne_holds(tau[p - 1], p)) ++deligne;
        else o.require(false, "Deligne bound at p = " + std::to_string(p));
    }
    o.detail << " hecke_primes=" << hecke << " deligne_primes=" << deligne << " time=" << seconds_since(t0) << "s";
}

void c3(Outcome& o) {
    const auto& t = *delta_table();
    const std::uint64_t x = 1000000;
    const std::pair<int, double> cases[] = {{2, kPi / 6}, {3, kPi / 6}, {4, kPi / 4}};
    for (const auto& [g, xi] : cases) {
        const double f = satotate::empirical_fraction(t, satotate::build_intervals(g, xi), x);
        const double err = std::abs(f - (1 - 2 * xi / kPi));
        o.require(err < 0.01, "gamma = " + std::to_string(g));
        o.detail << " g" << g << "_err=" << err;
    }
    const auto pf = satotate::pf_epsilon_density(t, 0.1, x);
    const double err = std::abs(pf.fraction - pf.prediction);
    o.require(err < 0.01, "P_f(0.1)");
    o.detail << " pf_err=" << err;
}

void c4(Outcome& o) {
    const auto zeta = euler::spec_zeta(2000);
    const auto delta = euler::spec_modular(delta_table());
    const auto sym2 = euler::spec_sympow(delta_table(), 2);
    const euler::EulerProductSpec* specs[] = {&zeta, &delta, &sym2};

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double riemann = 0.0, conj = 0.0, origin = 0.0, modulus = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto& spec = *specs[i % 3];
        const std::size_t n = rng() % 1000;
        const double sigma = 0.6 + 0.9 * unit(rng);
        const cplx w = std::polar(100.0 * unit(rng), 2 * kPi * unit(rng));
        const euler::LocalCurve c(spec, n, sigma);
        const cplx k = charfun::local_charfn(c, w);
        riemann = std::max(riemann, std::abs(k - oracle::riemann_charfn(c, w, 1000000)));
        conj = std::max(conj, std::abs(k - std::conj(charfun::local_charfn(c, -w))));
        origin = std::max(origin, std::abs(charfun::local_charfn(c, 0.0) - 1.0));
        for (int s = 0; s < 50; ++s) {
            const cplx v = std::polar(500.0 * unit(rng), 2 * kPi * unit(rng));
            modulus = std::max(modulus, std::abs(charfun::local_charfn(c, v)));
        }
    }
    o.require(origin == 0.0, "K(0) = 1");
    o.require(modulus <= 1 + 1e-12, "|K| <= 1");
    o.require(riemann < 1e-8, "Riemann-sum oracle");
    o.require(conj < 1e-12, "conjugate symmetry");
    o.detail << " riemann=" << riemann << " conj=" << conj << " max|K|=" << modulus;

    charfun::PreflightOptions po;
    po.max_spread = 1.2;
    po.radius_scales = {1e2, 1e3, 1e4};
    const std::pair<const euler::EulerProductSpec*, double> decay[] = {{&zeta, 0.75}, {&zeta, 1.0}, {&sym2, 0.9}};
    for (const auto& [spec, sigma] : decay) {
        const auto r = charfun::decay_preflight(*spec, sigma, po);
        double worst = 0.0;
        for (const auto& p : r.primes)
            if (p.bounded) worst = std::max(worst, p.spread);
        o.require(r.passed, spec->name() + " decay at sigma " + std::to_string(sigma));
        o.detail << " " << spec->name() << "@" << sigma << ":bounded=" << r.bounded_count << ",spread<=" << worst;
    }
}

void c5(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto lam = density::synthetic_charfn(charfun::WGrid{}, [](cplx w) { return std::exp(-std::norm(w) / 2.0); });
    const density::Geometry geo{{-5.0, 5.0, -5.0, 5.0}, 64, 64};
    const auto g = density::invert(lam, geo);
    double gauss = 0.0;
    for (std::size_t i = 0; i < geo.nx; ++i)
        for (std::size_t j = 0; j < geo.ny; ++j)
            gauss = std::max(gauss, std::abs(g.at(i, j) - std::exp(-(geo.x(i) * geo.x(i) + geo.y(j) * geo.y(j)) / 2)));
    o.require(gauss < 1e-6, "Gaussian self-transform");

    pipeline::RunConfig c;
    c.spec = "zeta";
    c.sigma = 1.2;
    c.cache_dir = cache_dir();
    const auto base = pipeline::run_density(c, false);
    const double secs = seconds_since(t0);
    o.require(base.density.norm_defect < 1e-3, "norm_defect");
    o.require(base.density.clip_mass < 5e-3, "clip_mass");
    o.require(base.density.imag_residue < 1e-8, "imaginary residue");
    o.require(secs < 300, "runtime");

    // Reference rectangle: the box of one standard deviation per axis.
    const double sd = std::sqrt(density::component_variance(euler::spec_zeta(c.charfn_cutoff), c.sigma, c.charfn_cutoff));
    const density::Rectangle ref{-sd, sd, -sd, sd};
    const double m0 = density::region_mass(base.density, ref);
    double refine = 0.0;
    for (auto [w_max, nodes] : {std::pair{120.0, std::size_t{1025}}, std::pair{60.0, std::size_t{1025}}}) {
        auto r = c;
        r.w_max = w_max;
        r.w_nodes = nodes;
        const auto run = pipeline::run_density(r, false);
        refine = std::max(refine, std::abs(density::region_mass(run.density, ref) - m0));
    }
    o.require(refine < 1e-3, "refinement stability");
    o.detail << " gauss=" << gauss << " norm_defect=" << base.density.norm_defect
             << " clip=" << base.density.clip_mass << " imag=" << base.density.imag_residue << " ref_mass=" << m0
             << " refine=" << refine << " time=" << secs << "s";
}

void c6(Outcome& o) {
    for (const char* spec : {"zeta", "modular", "sympow:2"}) {
        pipeline::RunConfig c;
        c.spec = spec;
        c.sigma = 1.2;
        c.cache_dir = cache_dir();
        const auto run = pipeline::run_compare(c, false);
        o.require(run.report.sup_rect < 0.02, std::string(spec) + " rectangle discrepancy");
        o.require(run.report.l1 < 0.05, std::string(spec) + " L1");
        o.detail << " " << spec << ":sup=" << run.report.sup_rect << ",l1=" << run.report.l1;
    }
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void c7(Outcome& o) {
    const auto root = std::filesystem::temp_directory_path() / ("mfunc-accept-" + std::to_string(::getpid()));
    std::vector<std::filesystem::path> dirs{root / "a", root / "b"};
    for (const auto& d : dirs) {
        pipeline::RunConfig c;
        c.spec = "modular";
        c.seed = 17;
        c.cache_dir = cache_dir();
        c.out_dir = d;
        pipeline::run_density(c);
        pipeline::run_sample(c);
    }
    std::size_t compared = 0;
    for (const auto& e : std::filesystem::directory_iterator(dirs[0])) {
        if (e.path().extension() != ".csv") continue;
        o.require(slurp(e.path()) == slurp(dirs[1] / e.path().filename()), e.path().filename().string());
        ++compared;
    }
    o.require(compared == 3, "expected charfn, density and histogram CSVs");
    o.detail << " csv_files=" << compared;
    std::filesystem::remove_all(root);
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
        {"C1 exact identities", c1},
        {"C2 tau and Deligne bound", c2},
        {"C3 Sato-Tate fractions", c3},
        {"C4 characteristic functions", c4},
        {"C5 inversion quality", c5},
        {"C6 density vs empirical", c6},
        {"C7 determinism", c7},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ":" << o.detail.str() << std::endl;
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
