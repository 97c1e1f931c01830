#include "mfunc/arith.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "mfunc/error.hpp"
#include "mfunc/io.hpp"
#include "mfunc/parallel.hpp"

namespace mfunc::arith {

namespace {

using Int256 = boost::multiprecision::int256_t;

// ---------------------------------------------------------------------------
// Number-theoretic transform over a word-size prime. Twiddles carry Shoup
// companions so the butterflies need no division.

struct NttPrime {
    std::uint32_t mod;
    std::uint32_t generator;
};

constexpr std::array<NttPrime, 5> kNttPrimes{{
    {998244353u, 3u},   // 119 * 2^23 + 1
    {167772161u, 3u},   // 5 * 2^25 + 1
    {469762049u, 3u},   // 7 * 2^26 + 1
    {754974721u, 11u},  // 45 * 2^24 + 1
    {1004535809u, 3u},  // 479 * 2^21 + 1
}};

constexpr unsigned kMaxLog2 = 21;  // limited by 1004535809

std::uint32_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint32_t mod) {
    std::uint64_t r = 1;
    base %= mod;
    while (exp) {
        if (exp & 1) r = r * base % mod;
        base = base * base % mod;
        exp >>= 1;
    }
    return static_cast<std::uint32_t>(r);
}

class Ntt {
public:
    Ntt(NttPrime prime, std::size_t size) : mod_(prime.mod), size_(size) {
        const std::uint32_t w = pow_mod(prime.generator, (mod_ - 1) / size_, mod_);
        const std::uint32_t wi = pow_mod(w, mod_ - 2, mod_);
        fwd_.resize(size_ / 2);
        inv_.resize(size_ / 2);
        std::uint64_t a = 1, b = 1;
        for (std::size_t i = 0; i < size_ / 2; ++i) {
            fwd_[i] = make(static_cast<std::uint32_t>(a));
            inv_[i] = make(static_cast<std::uint32_t>(b));
            a = a * w % mod_;
            b = b * wi % mod_;
        }
        size_inv_ = pow_mod(size_, mod_ - 2, mod_);
    }

    void forward(std::vector<std::uint32_t>& a) const { transform(a, fwd_); }

    void inverse(std::vector<std::uint32_t>& a) const {
        transform(a, inv_);
        for (auto& x : a) x = static_cast<std::uint32_t>(std::uint64_t{x} * size_inv_ % mod_);
    }

    std::uint32_t mod() const noexcept { return mod_; }

private:
    struct Twiddle {
        std::uint32_t w;
        std::uint32_t shoup;
    };

    Twiddle make(std::uint32_t w) const {
        return {w, static_cast<std::uint32_t>((std::uint64_t{w} << 32) / mod_)};
    }

    std::uint32_t mul(std::uint32_t x, Twiddle t) const {
        const std::uint64_t q = (std::uint64_t{t.shoup} * x) >> 32;
        auto r = static_cast<std::uint32_t>(std::uint64_t{t.w} * x - q * mod_);
        return r >= mod_ ? r - mod_ : r;
    }

    void transform(std::vector<std::uint32_t>& a, const std::vector<Twiddle>& tw) const {
        const std::size_t n = size_;
        for (std::size_t i = 1, j = 0; i < n; ++i) {
            std::size_t bit = n >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(a[i], a[j]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len / 2;
            const std::size_t stride = n / len;
            for (std::size_t start = 0; start < n; start += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    const std::uint32_t u = a[start + k];
                    const std::uint32_t v = mul(a[start + k + half], tw[k * stride]);
                    std::uint32_t s = u + v;
                    a[start + k] = s >= mod_ ? s - mod_ : s;
                    a[start + k + half] = u >= v ? u - v : u + mod_ - v;
                }
            }
        }
    }

    std::uint32_t mod_;
    std::size_t size_;
    std::uint32_t size_inv_ = 1;
    std::vector<Twiddle> fwd_, inv_;
};

std::size_t transform_size(std::size_t len) {
    std::size_t n = 1;
    while (n < 2 * len - 1) n <<= 1;
    return std::max<std::size_t>(n, 2);
}

// Coefficients 0..len-1 of prod_{m>=1} (1 - q^m)^24 modulo one prime.
std::vector<std::uint32_t> eta24_mod(NttPrime prime, std::size_t len) {
    const std::size_t n = transform_size(len);
    const Ntt ntt(prime, n);
    const std::uint32_t mod = prime.mod;

    // Pentagonal number theorem: sum_k (-1)^k q^{k(3k-1)/2}, k over all integers.
    std::vector<std::uint32_t> series(n, 0);
    for (std::int64_t k = 0;; ++k) {
        bool any = false;
        for (std::int64_t kk : {k, -k - 1}) {
            const auto e = static_cast<std::size_t>(kk * (3 * kk - 1) / 2);
            if (e < len) {
                series[e] = (kk & 1) ? mod - 1 : 1;
                any = true;
            }
        }
        if (!any) break;
    }

    auto pointwise = [mod](std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
        for (std::size_t i = 0; i < a.size(); ++i)
            a[i] = static_cast<std::uint32_t>(std::uint64_t{a[i]} * b[i] % mod);
    };
    auto truncate = [len](std::vector<std::uint32_t>& a) {
        std::fill(a.begin() + static_cast<std::ptrdiff_t>(len), a.end(), 0u);
    };

    // E -> E^2 -> E^4 -> E^8 -> E^16, then E^24 = E^16 * E^8 reusing the transform of E^8.
    std::vector<std::uint32_t> e8_hat;
    for (int step = 0; step < 4; ++step) {
        ntt.forward(series);
        if (step == 3) e8_hat = series;
        pointwise(series, series);
        ntt.inverse(series);
        truncate(series);
    }
    ntt.forward(series);
    pointwise(series, e8_hat);
    ntt.inverse(series);
    series.resize(len);
    return series;
}

std::uint64_t inv_mod(std::uint64_t a, std::uint64_t m) {
    return pow_mod(a, m - 2, static_cast<std::uint32_t>(m));
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t PrimeTable::count_upto(std::uint64_t x) const {
    if (x > limit) fail(ErrorKind::incomplete_data, "prime table limit " + std::to_string(limit) +
                                                        " below " + std::to_string(x));
    return static_cast<std::size_t>(std::upper_bound(primes.begin(), primes.end(), x) - primes.begin());
}

PrimeTable sieve_primes(std::uint64_t limit) {
    if (limit < 2) fail(ErrorKind::domain, "sieve_primes: limit must be >= 2 (empty domain)");
    std::vector<std::uint8_t> composite(limit + 1, 0);
    PrimeTable table;
    table.limit = limit;
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (composite[i]) continue;
        table.primes.push_back(i);
        for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = 1;
    }
    return table;
}

PrimeTable first_primes(std::size_t count) {
    if (count == 0) fail(ErrorKind::domain, "first_primes: count must be positive");
    const double n = static_cast<double>(std::max<std::size_t>(count, 6));
    auto limit = static_cast<std::uint64_t>(n * (std::log(n) + std::log(std::log(n)))) + 16;
    PrimeTable t = sieve_primes(limit);
    t.primes.resize(count);
    t.limit = t.primes.back();
    return t;
}

double prime_power_tail(std::uint64_t after, double s) {
    if (!(s > 1.0)) return std::numeric_limits<double>::infinity();
    const std::uint64_t limit = std::max<std::uint64_t>(2'000'000, 16 * after);
    static std::mutex mutex;
    static std::shared_ptr<const PrimeTable> cached;
    std::shared_ptr<const PrimeTable> primes;
    {
        std::lock_guard lock(mutex);
        if (!cached || cached->limit < limit) cached = std::make_shared<const PrimeTable>(sieve_primes(limit));
        primes = cached;
    }
    double sum = 0.0;
    for (auto it = std::upper_bound(primes->primes.begin(), primes->primes.end(), after); it != primes->primes.end(); ++it) {
        const double x = std::pow(static_cast<double>(*it), -s);
        sum += x / (1.0 - x);
    }
    // sum over all integers m > L of m^{-s}/(1 - m^{-s}) <= L^{1-s} / ((s-1)(1 - L^{-s}))
    const double L = static_cast<double>(primes->limit);
    sum += std::pow(L, 1.0 - s) / ((s - 1.0) * (1.0 - std::pow(L, -s)));
    return sum;
}

std::size_t tau_memory_estimate(std::size_t bound) {
    const std::size_t n = transform_size(std::max<std::size_t>(bound, 1));
    // two transform buffers, twiddle tables, residues per prime, final values
    return 2 * n * 4 + n * 8 + kNttPrimes.size() * bound * 4 + bound * sizeof(Int128);
}

std::vector<Int128> tau_coefficients(std::size_t bound, const TauOptions& opts) {
    if (bound < 1) fail(ErrorKind::domain, "tau_coefficients: bound must be >= 1");
    if (transform_size(bound) > (std::size_t{1} << kMaxLog2))
        fail(ErrorKind::resource, "tau_coefficients: bound " + std::to_string(bound) +
                                      " exceeds the transform length supported by the NTT primes");
    const std::size_t need = tau_memory_estimate(bound);
    if (need > opts.memory_budget_bytes)
        fail(ErrorKind::resource, "tau_coefficients: needs " + std::to_string(need) +
                                      " bytes, budget is " + std::to_string(opts.memory_budget_bytes));

    std::array<std::vector<std::uint32_t>, kNttPrimes.size()> residues;
    parallel_for(kNttPrimes.size(), [&](std::size_t i) { residues[i] = eta24_mod(kNttPrimes[i], bound); });

    // Garner mixed-radix reconstruction, then the symmetric representative.
    constexpr std::size_t K = kNttPrimes.size();
    std::array<std::array<std::uint64_t, K>, K> inv{};
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < i; ++j) inv[j][i] = inv_mod(kNttPrimes[j].mod % kNttPrimes[i].mod, kNttPrimes[i].mod);

    Int256 modulus = 1;
    for (auto p : kNttPrimes) modulus *= p.mod;
    const Int256 half = modulus / 2;

    std::vector<Int128> tau(bound);
    parallel_for_blocks(bound, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t n = lo; n < hi; ++n) {
            std::array<std::uint64_t, K> digit{};
            for (std::size_t i = 0; i < K; ++i) {
                const std::uint64_t m = kNttPrimes[i].mod;
                std::uint64_t x = residues[i][n];
                for (std::size_t j = 0; j < i; ++j) {
                    x = (x + m - digit[j] % m) % m;
                    x = x * inv[j][i] % m;
                }
                digit[i] = x;
            }
            Int256 value = 0;
            for (std::size_t i = K; i-- > 0;) value = value * kNttPrimes[i].mod + digit[i];
            if (value > half) value -= modulus;
            tau[n] = static_cast<Int128>(value);
        }
    });
    return tau;
}

// ---------------------------------------------------------------------------

double satake_angle(double lambda) { return std::acos(std::clamp(lambda / 2.0, -1.0, 1.0)); }

bool deligne_holds(const Int128& tau_p, std::uint64_t p) {
    Int256 lhs = static_cast<Int256>(tau_p);
    lhs *= lhs;
    Int256 rhs = 4;
    for (int i = 0; i < 11; ++i) rhs *= p;
    return lhs <= rhs;
}

const HeckeEntry& HeckeTable::at_prime(std::uint64_t p) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), p,
                               [](const HeckeEntry& e, std::uint64_t q) { return e.p < q; });
    if (it == entries.end() || it->p != p)
        fail(ErrorKind::incomplete_data, "Hecke table " + form_id + " has no entry for p=" + std::to_string(p));
    return *it;
}

std::size_t HeckeTable::count_upto(std::uint64_t x) const {
    if (x > prime_limit)
        fail(ErrorKind::incomplete_data, "Hecke table " + form_id + " covers primes <= " +
                                             std::to_string(prime_limit) + ", asked for " + std::to_string(x));
    return static_cast<std::size_t>(
        std::upper_bound(entries.begin(), entries.end(), x,
                         [](std::uint64_t q, const HeckeEntry& e) { return q < e.p; }) -
        entries.begin());
}

HeckeTable hecke_table_from_tau(std::span<const Int128> tau, std::uint64_t prime_limit) {
    if (prime_limit < 2) fail(ErrorKind::domain, "hecke_table: prime_limit must be >= 2");
    if (tau.size() < prime_limit)
        fail(ErrorKind::incomplete_data, "hecke_table: tau known up to " + std::to_string(tau.size()) +
                                             ", need " + std::to_string(prime_limit));
    const PrimeTable primes = sieve_primes(prime_limit);
    HeckeTable table;
    table.prime_limit = prime_limit;
    table.entries.resize(primes.size());
    parallel_for_blocks(primes.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const std::uint64_t p = primes[i];
            const Int128& t = tau[p - 1];
            if (!deligne_holds(t, p))
                fail(ErrorKind::data_corruption,
                     "Deligne bound violated at p=" + std::to_string(p) + ": tau(p)=" + t.str());
            const long double pl = static_cast<long double>(p);
            const long double scale = pl * pl * pl * pl * pl * std::sqrt(pl);
            const double lambda = static_cast<double>(t.convert_to<long double>() / scale);
            table.entries[i] = {p, lambda, satake_angle(lambda), true};
        }
    });
    return table;
}

HeckeTable hecke_table(std::uint64_t prime_limit, const TauOptions& opts) {
    if (prime_limit < 2) fail(ErrorKind::domain, "hecke_table: prime_limit must be >= 2");
    const auto tau = tau_coefficients(static_cast<std::size_t>(prime_limit), opts);
    return hecke_table_from_tau(tau, prime_limit);
}

// ---------------------------------------------------------------------------

void write_hecke_csv(const HeckeTable& table, std::ostream& out) {
    out << "p,lambda_num,lambda_is_exact,theta\n";
    for (const auto& e : table.entries)
        out << e.p << ',' << io::format_double(e.lambda) << ',' << (e.exact ? 1 : 0) << ','
            << io::format_double(e.theta) << '\n';
}

void write_hecke_csv(const HeckeTable& table, const std::filesystem::path& path) {
    std::ostringstream ss;
    write_hecke_csv(table, ss);
    io::write_text(path, ss.str());
}

HeckeTable read_hecke_csv(std::istream& in, std::string form_id, int weight, std::uint64_t level) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("p,lambda_num,lambda_is_exact,theta", 0) != 0)
        fail(ErrorKind::data_corruption, "eigenvalue file: missing header `p,lambda_num,lambda_is_exact,theta`");
    HeckeTable table;
    table.form_id = std::move(form_id);
    table.weight = weight;
    table.level = level;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::istringstream fields(line);
        std::string p_s, l_s, e_s, t_s;
        if (!std::getline(fields, p_s, ',') || !std::getline(fields, l_s, ',') ||
            !std::getline(fields, e_s, ',') || !std::getline(fields, t_s))
            fail(ErrorKind::data_corruption, "eigenvalue file: malformed row " + std::to_string(row));
        HeckeEntry e;
        try {
            e.p = std::stoull(p_s);
            e.lambda = std::stod(l_s);
            e.exact = std::stoi(e_s) != 0;
            e.theta = std::stod(t_s);
        } catch (const std::exception&) {
            fail(ErrorKind::data_corruption, "eigenvalue file: unparsable row " + std::to_string(row));
        }
        if (!table.entries.empty() && e.p <= table.entries.back().p)
            fail(ErrorKind::data_corruption, "eigenvalue file: primes not increasing at row " + std::to_string(row));
        if (!table.is_bad(e.p) && std::abs(e.lambda) > 2.0 + 1e-12)
            fail(ErrorKind::data_corruption, "eigenvalue file: |lambda| > 2 at good prime p=" + std::to_string(e.p));
        if (!(e.theta >= 0.0 && e.theta <= std::numbers::pi))
            fail(ErrorKind::data_corruption, "eigenvalue file: theta outside [0, pi] at p=" + std::to_string(e.p));
        table.entries.push_back(e);
    }
    if (table.entries.empty()) fail(ErrorKind::incomplete_data, "eigenvalue file: no rows");
    table.prime_limit = table.entries.back().p;
    const PrimeTable primes = sieve_primes(std::max<std::uint64_t>(table.prime_limit, 2));
    if (primes.size() != table.entries.size())
        fail(ErrorKind::incomplete_data, "eigenvalue file: expected every prime up to " +
                                             std::to_string(table.prime_limit) + " (" + std::to_string(primes.size()) +
                                             " rows), found " + std::to_string(table.entries.size()));
    for (std::size_t i = 0; i < primes.size(); ++i)
        if (primes[i] != table.entries[i].p)
            fail(ErrorKind::incomplete_data, "eigenvalue file: missing prime " + std::to_string(primes[i]));
    return table;
}

HeckeTable read_hecke_csv(const std::filesystem::path& path, std::string form_id, int weight,
                          std::uint64_t level) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::incomplete_data, "cannot open eigenvalue file " + path.string());
    return read_hecke_csv(in, std::move(form_id), weight, level);
}

std::filesystem::path default_cache_dir() {
    if (const char* d = std::getenv("MFUNC_CACHE_DIR"); d && *d) return d;
    if (const char* d = std::getenv("XDG_CACHE_HOME"); d && *d) return std::filesystem::path(d) / "mfunc";
    if (const char* d = std::getenv("HOME"); d && *d) return std::filesystem::path(d) / ".cache" / "mfunc";
    return std::filesystem::temp_directory_path() / "mfunc";
}

std::filesystem::path hecke_cache_path(const std::filesystem::path& dir, std::uint64_t prime_limit) {
    return dir / ("hecke-delta-k12-N1-" + std::to_string(prime_limit) + ".csv");
}

HeckeTable cached_hecke_table(std::uint64_t prime_limit, const std::filesystem::path& dir, bool* was_hit) {
    const auto path = hecke_cache_path(dir, prime_limit);
    if (std::filesystem::exists(path)) {
        HeckeTable t = read_hecke_csv(path, "delta-k12-N1", 12, 1);
        if (t.prime_limit <= prime_limit && t.size() == sieve_primes(prime_limit).size()) {
            t.prime_limit = prime_limit;
            if (was_hit) *was_hit = true;
            return t;
        }
    }
    HeckeTable t = hecke_table(prime_limit);
    write_hecke_csv(t, path);
    if (was_hit) *was_hit = false;
    return t;
}

}  // namespace mfunc::arith
