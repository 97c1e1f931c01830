#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mfunc/arith.hpp"
#include "mfunc/error.hpp"
#include "oracles/oracles.hpp"

using namespace mfunc;
using boost::multiprecision::cpp_int;

namespace {
cpp_int big(const arith::Int128& v) { return cpp_int(v); }
}  // namespace

TEST_CASE("sieve matches trial division") {
    CHECK(arith::sieve_primes(10).primes == std::vector<std::uint64_t>{2, 3, 5, 7});
    CHECK(arith::sieve_primes(100).size() == 25);
    const auto t = arith::sieve_primes(5000);
    std::vector<std::uint64_t> expect;
    for (std::uint64_t n = 2; n <= 5000; ++n)
        if (oracle::is_prime(n)) expect.push_back(n);
    CHECK(t.primes == expect);
    CHECK(arith::sieve_primes(1000000).size() == 78498);
    CHECK(t.count_upto(100) == 25);
    CHECK_THROWS_AS(arith::sieve_primes(1), Error);
}

TEST_CASE("first_primes covers the requested count") {
    for (std::size_t c : {1u, 2u, 10u, 1000u, 12345u}) {
        const auto t = arith::first_primes(c);
        CHECK(t.size() == c);
    }
}

TEST_CASE("tau agrees with the q-expansion oracle") {
    const std::size_t bound = 200;
    const auto ref = oracle::tau_by_expansion(bound);
    const auto tau = arith::tau_coefficients(bound);
    REQUIRE(tau.size() == bound);
    CHECK(ref[2] == -24);
    CHECK(ref[3] == 252);
    for (std::size_t n = 1; n <= bound; ++n) CHECK(big(tau[n - 1]) == ref[n]);
    CHECK(tau[0] == 1);
    CHECK(tau[5] == tau[1] * tau[2]);
}

TEST_CASE("tau multiplicativity on random coprime pairs") {
    const std::size_t bound = 20000;
    const auto tau = arith::tau_coefficients(bound);
    std::mt19937_64 rng(7);
    int checked = 0;
    while (checked < 100) {
        const std::size_t m = 1 + rng() % 140, n = 1 + rng() % 140;
        if (std::gcd(m, n) != 1 || m * n > bound) continue;
        CHECK(big(tau[m * n - 1]) == big(tau[m - 1]) * big(tau[n - 1]));
        ++checked;
    }
}

TEST_CASE("Hecke relation at p^2") {
    const std::size_t bound = 1000 * 1000;
    const auto tau = arith::tau_coefficients(bound);
    for (auto p : arith::sieve_primes(1000).primes) {
        const cpp_int tp = big(tau[p - 1]);
        CHECK(big(tau[p * p - 1]) == tp * tp - boost::multiprecision::pow(cpp_int(p), 11));
    }
}

TEST_CASE("tau memory budget") {
    arith::TauOptions opts;
    opts.memory_budget_bytes = 1024;
    CHECK_THROWS_AS(arith::tau_coefficients(100000, opts), Error);
    try {
        arith::tau_coefficients(100000, opts);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::resource);
    }
}

TEST_CASE("Hecke table entries") {
    const auto t = arith::hecke_table(2000);
    REQUIRE(t.size() == arith::sieve_primes(2000).size());
    CHECK(t[0].p == 2);
    CHECK(t[0].lambda == doctest::Approx(-24.0 / std::pow(2.0, 5.5)).epsilon(1e-15));
    CHECK(t[0].theta == doctest::Approx(std::acos(-24.0 / std::pow(2.0, 6.5))).epsilon(1e-14));
    for (const auto& e : t.entries) {
        CHECK(std::abs(e.lambda) <= 2.0);
        CHECK(e.theta >= 0.0);
        CHECK(e.theta <= std::numbers::pi);
        CHECK(e.exact);
    }
    CHECK(arith::satake_angle(2.0) == 0.0);
    CHECK(arith::satake_angle(0.0) == doctest::Approx(std::numbers::pi / 2));
    CHECK(arith::satake_angle(2.0 + 1e-15) == 0.0);
    for (double l : {-1.9, -0.3, 0.0, 0.7, 1.4})
        CHECK(arith::satake_angle(-l) == doctest::Approx(std::numbers::pi - arith::satake_angle(l)).epsilon(1e-14));
    CHECK(arith::satake_angle(0.5) < arith::satake_angle(0.4));
    CHECK(t.at_prime(1999).p == 1999);
    CHECK_THROWS_AS(t.at_prime(2003), Error);
}

TEST_CASE("Deligne check is exact") {
    CHECK(arith::deligne_holds(-24, 2));
    CHECK(arith::deligne_holds(90, 2));       // 90^2 = 8100 <= 8192
    CHECK_FALSE(arith::deligne_holds(91, 2)); // 8281 > 8192
    std::vector<arith::Int128> fake{1, 91, 252};
    try {
        arith::hecke_table_from_tau(fake, 3);
        FAIL("expected data corruption");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::data_corruption);
    }
}

TEST_CASE("Hecke CSV round trip and validation") {
    const auto t = arith::hecke_table(500);
    std::stringstream ss;
    arith::write_hecke_csv(t, ss);
    const auto text = ss.str();
    CHECK(text.rfind("p,lambda_num,lambda_is_exact,theta\n", 0) == 0);
    std::istringstream in(text);
    const auto back = arith::read_hecke_csv(in, t.form_id, t.weight, t.level);
    REQUIRE(back.size() == t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(back[i].p == t[i].p);
        CHECK(back[i].lambda == t[i].lambda);
        CHECK(back[i].theta == t[i].theta);
    }
    std::istringstream bad_header("p,lambda\n2,0.1\n");
    CHECK_THROWS_AS(arith::read_hecke_csv(bad_header, "x", 12, 1), Error);
    std::istringstream missing("p,lambda_num,lambda_is_exact,theta\n2,0.1,0,1.5\n5,0.1,0,1.5\n");
    CHECK_THROWS_AS(arith::read_hecke_csv(missing, "x", 12, 1), Error);
    std::istringstream too_big("p,lambda_num,lambda_is_exact,theta\n2,2.5,0,0\n");
    CHECK_THROWS_AS(arith::read_hecke_csv(too_big, "x", 12, 1), Error);
}

TEST_CASE("Hecke cache hit and miss") {
    const auto dir = std::filesystem::temp_directory_path() / "mfunc-unit-cache";
    std::filesystem::remove_all(dir);
    bool hit = true;
    const auto a = arith::cached_hecke_table(3000, dir, &hit);
    CHECK_FALSE(hit);
    CHECK(std::filesystem::exists(arith::hecke_cache_path(dir, 3000)));
    const auto b = arith::cached_hecke_table(3000, dir, &hit);
    CHECK(hit);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].lambda == b[i].lambda);
    std::filesystem::remove_all(dir);
}

TEST_CASE("prime power tail") {
    // Direct partial sum beyond 1000 up to the sieve should sit below the bound.
    double direct = 0.0;
    for (auto p : arith::sieve_primes(2000000).primes)
        if (p > 1000) direct += std::pow(double(p), -2.4) / (1 - std::pow(double(p), -2.4));
    const double bound = arith::prime_power_tail(1000, 2.4);
    CHECK(bound >= direct);
    CHECK(bound < direct * 1.01);
    CHECK(std::isinf(arith::prime_power_tail(10, 1.0)));
}
