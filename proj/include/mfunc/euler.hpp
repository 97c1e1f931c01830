#pragma once

// Euler products with polynomial local factors, stored as per-prime roots
// a_n^{(k)} with every exponent f(k, n) = 1, and the local curves
//   z_n(theta) = -sum_k Log(1 - a_n^{(k)} p_n^{-sigma} e^{2 pi i theta}).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mfunc/arith.hpp"

namespace mfunc::euler {

using cplx = std::complex<double>;

enum class Family { zeta, modular, sympow, custom };

class EulerProductSpec {
public:
    // Synthetic product: roots[n] are the local roots at primes[n].
    static EulerProductSpec custom(std::string name, std::vector<std::uint64_t> primes,
                                   std::vector<std::vector<cplx>> roots, double sigma0);

    const std::string& name() const noexcept { return name_; }
    Family family() const noexcept { return family_; }
    int gamma() const noexcept { return gamma_; }

    // Class data: abscissa below which results are heuristic, and growth constants.
    double sigma0() const noexcept { return sigma0_; }
    double alpha() const noexcept { return 0.0; }
    double beta() const noexcept { return 0.0; }
    double c0() const noexcept { return c0_; }

    // Number of primes with local data available.
    std::size_t prime_count() const noexcept;
    // n is a 0-based prime index: prime(0) == 2 for the built-in families.
    std::uint64_t prime(std::size_t n) const;
    // Local roots; empty when the local factor is excluded (bad prime of a symmetric power).
    std::vector<cplx> roots(std::size_t n) const;
    std::size_t degree(std::size_t n) const;
    bool skipped(std::size_t n) const;
    std::vector<std::uint64_t> skipped_primes(std::size_t count) const;

    // r_{j,n} = (1/j) sum_k (a_n^{(k)})^j for j = 1..J (element j-1).
    std::vector<cplx> taylor(std::size_t n, int J) const;

    // All Taylor coefficients real (roots closed under conjugation).
    bool real_coefficients() const noexcept;

    const arith::HeckeTable* hecke() const noexcept { return table_.get(); }

private:
    friend EulerProductSpec spec_zeta(std::size_t);
    friend EulerProductSpec spec_modular(std::shared_ptr<const arith::HeckeTable>);
    friend EulerProductSpec spec_sympow(std::shared_ptr<const arith::HeckeTable>, int);

    std::string name_;
    Family family_ = Family::custom;
    int gamma_ = 1;
    double sigma0_ = 0.5;
    double c0_ = 1.0;
    std::shared_ptr<const arith::PrimeTable> primes_;
    std::shared_ptr<const arith::HeckeTable> table_;
    std::vector<std::uint64_t> custom_primes_;
    std::vector<std::vector<cplx>> custom_roots_;
};

// zeta(s) = prod (1 - p^{-s})^{-1}, over the first prime_count primes.
EulerProductSpec spec_zeta(std::size_t prime_count = 200000);

// L(f, s) for the form in `table`; at p | N the single root lambda_f(p).
EulerProductSpec spec_modular(std::shared_ptr<const arith::HeckeTable> table);

// Partial symmetric power L(Sym^gamma f, s) with roots alpha^{gamma-h} beta^h; bad primes excluded.
EulerProductSpec spec_sympow(std::shared_ptr<const arith::HeckeTable> table, int gamma);

cplx taylor_r(const EulerProductSpec& spec, int j, std::size_t n);

class LocalCurve {
public:
    // Taylor data kept until the geometric tail drops below `tail_tol`.
    LocalCurve(const EulerProductSpec& spec, std::size_t n, double sigma, double tail_tol = 1e-14);

    std::size_t index() const noexcept { return index_; }
    std::uint64_t prime() const noexcept { return prime_; }
    double sigma() const noexcept { return sigma_; }
    // p^{-sigma}
    double radius() const noexcept { return radius_; }
    std::size_t degree() const noexcept { return roots_.size(); }
    std::span<const cplx> roots() const noexcept { return roots_; }

    int truncation() const noexcept { return static_cast<int>(r_.size()); }
    // r_{j,n}, element j-1
    std::span<const cplx> taylor() const noexcept { return r_; }
    // r_{j,n} p^{-j sigma}, element j-1
    std::span<const cplx> coefficients() const noexcept { return c_; }

    // Direct evaluation with the principal logarithm.
    cplx operator()(double theta) const;
    // Truncated Taylor series.
    cplx series(double theta) const;

    // Upper bound for sup_theta |z_n(theta)|.
    double sup_bound() const noexcept { return sup_bound_; }

    // g_{tau,n}(theta) = <z_n(theta), e^{i tau}> and its first two theta-derivatives.
    double projection(double theta, double tau) const;
    double projection_d1(double theta, double tau) const;
    double projection_d2(double theta, double tau) const;

private:
    std::size_t index_;
    std::uint64_t prime_;
    double sigma_;
    double radius_;
    double sup_bound_ = 0.0;
    std::vector<cplx> roots_;
    std::vector<cplx> r_;
    std::vector<cplx> c_;
};

// Smallest J with g * x^{J+1} / ((J+1)(1-x)) < tol, x = max|a| p^{-sigma}.
int taylor_truncation(std::size_t degree, double x, double tol);

}  // namespace mfunc::euler
