#pragma once

// Arithmetic substrate: primes, Ramanujan tau, normalized Hecke eigenvalues.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace mfunc::arith {

using Int128 = boost::multiprecision::int128_t;

struct PrimeTable {
    std::uint64_t limit = 0;
    std::vector<std::uint64_t> primes;  // ascending, all primes <= limit

    std::size_t size() const noexcept { return primes.size(); }
    std::uint64_t operator[](std::size_t i) const { return primes[i]; }
    // Number of primes <= x (x may not exceed limit).
    std::size_t count_upto(std::uint64_t x) const;
};

PrimeTable sieve_primes(std::uint64_t limit);

// Smallest table holding at least `count` primes.
PrimeTable first_primes(std::size_t count);

// Upper bound for sum_{p > after} p^{-s} / (1 - p^{-s}), s > 1: explicit over
// primes up to a sieve limit, then the integer tail integral. +inf when s <= 1.
double prime_power_tail(std::uint64_t after, double s);

struct TauOptions {
    // Upper bound on scratch memory for the series arithmetic.
    std::size_t memory_budget_bytes = std::size_t{2} << 30;
};

// tau(1..bound); element i holds tau(i + 1).
std::vector<Int128> tau_coefficients(std::size_t bound, const TauOptions& opts = {});

// Bytes of scratch memory tau_coefficients(bound) needs.
std::size_t tau_memory_estimate(std::size_t bound);

struct HeckeEntry {
    std::uint64_t p = 0;
    double lambda = 0.0;  // lambda_f(p) = alpha + beta
    double theta = 0.0;   // Satake angle in [0, pi]
    bool exact = false;   // derived from an exact integer coefficient
};

struct HeckeTable {
    std::string form_id = "delta-k12-N1";
    int weight = 12;
    std::uint64_t level = 1;
    std::uint64_t prime_limit = 0;
    std::vector<HeckeEntry> entries;  // one per prime <= prime_limit, ascending

    std::size_t size() const noexcept { return entries.size(); }
    const HeckeEntry& operator[](std::size_t i) const { return entries[i]; }
    bool is_bad(std::uint64_t p) const noexcept { return level % p == 0; }
    // Entry for prime p; throws incomplete_data when absent.
    const HeckeEntry& at_prime(std::uint64_t p) const;
    // Number of entries with p <= x.
    std::size_t count_upto(std::uint64_t x) const;
};

// theta = arccos(lambda / 2), clamped to [0, pi].
double satake_angle(double lambda);

// Hecke table of Delta (weight 12, level 1) from exact tau values.
HeckeTable hecke_table(std::uint64_t prime_limit, const TauOptions& opts = {});

// Same, reusing precomputed tau(1..) values (tau.size() >= prime_limit).
HeckeTable hecke_table_from_tau(std::span<const Int128> tau, std::uint64_t prime_limit);

// tau(p)^2 <= 4 p^11 evaluated in exact integers.
bool deligne_holds(const Int128& tau_p, std::uint64_t p);

// CSV schema `p,lambda_num,lambda_is_exact,theta`.
void write_hecke_csv(const HeckeTable& table, std::ostream& out);
void write_hecke_csv(const HeckeTable& table, const std::filesystem::path& path);
HeckeTable read_hecke_csv(std::istream& in, std::string form_id, int weight, std::uint64_t level);
HeckeTable read_hecke_csv(const std::filesystem::path& path, std::string form_id, int weight,
                          std::uint64_t level);

// Cache directory: $MFUNC_CACHE_DIR, else $XDG_CACHE_HOME/mfunc, else ~/.cache/mfunc.
std::filesystem::path default_cache_dir();
std::filesystem::path hecke_cache_path(const std::filesystem::path& dir, std::uint64_t prime_limit);

// Loads the Delta table from the cache, computing and storing it on a miss.
HeckeTable cached_hecke_table(std::uint64_t prime_limit, const std::filesystem::path& dir,
                              bool* was_hit = nullptr);

}  // namespace mfunc::arith
