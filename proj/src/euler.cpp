#include "mfunc/euler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfunc/error.hpp"

namespace mfunc::euler {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

EulerProductSpec EulerProductSpec::custom(std::string name, std::vector<std::uint64_t> primes,
                                          std::vector<std::vector<cplx>> roots, double sigma0) {
    if (primes.size() != roots.size())
        fail(ErrorKind::domain, "custom spec: primes and roots differ in length");
    if (!std::is_sorted(primes.begin(), primes.end()))
        fail(ErrorKind::domain, "custom spec: primes must ascend");
    EulerProductSpec s;
    s.name_ = std::move(name);
    s.family_ = Family::custom;
    s.sigma0_ = sigma0;
    std::size_t gmax = 1;
    for (const auto& r : roots) {
        gmax = std::max(gmax, r.size());
        for (auto a : r)
            if (std::abs(a) > 1.0 + 1e-12)
                fail(ErrorKind::domain, "custom spec: |a| must not exceed 1 (class M00 with beta = 0)");
    }
    s.c0_ = static_cast<double>(gmax);
    s.custom_primes_ = std::move(primes);
    s.custom_roots_ = std::move(roots);
    return s;
}

EulerProductSpec spec_zeta(std::size_t prime_count) {
    EulerProductSpec s;
    s.name_ = "zeta";
    s.family_ = Family::zeta;
    s.sigma0_ = 0.5;
    s.c0_ = 1.0;
    s.primes_ = std::make_shared<const arith::PrimeTable>(arith::first_primes(prime_count));
    return s;
}

EulerProductSpec spec_modular(std::shared_ptr<const arith::HeckeTable> table) {
    if (!table || table->size() == 0) fail(ErrorKind::incomplete_data, "spec_modular: empty Hecke table");
    EulerProductSpec s;
    s.name_ = "modular[" + table->form_id + "]";
    s.family_ = Family::modular;
    s.gamma_ = 1;
    s.sigma0_ = 0.5;
    s.c0_ = 2.0;
    s.table_ = std::move(table);
    return s;
}

EulerProductSpec spec_sympow(std::shared_ptr<const arith::HeckeTable> table, int gamma) {
    if (gamma < 2) fail(ErrorKind::domain, "spec_sympow: gamma must be >= 2 (gamma = 1 is spec_modular)");
    if (!table || table->size() == 0) fail(ErrorKind::incomplete_data, "spec_sympow: empty Hecke table");
    EulerProductSpec s;
    s.name_ = "sympow" + std::to_string(gamma) + "[" + table->form_id + "]";
    s.family_ = Family::sympow;
    s.gamma_ = gamma;
    s.sigma0_ = 1.0 - 1.0 / (gamma + 1.0);
    s.c0_ = gamma + 1.0;
    s.table_ = std::move(table);
    return s;
}

std::size_t EulerProductSpec::prime_count() const noexcept {
    switch (family_) {
        case Family::zeta: return primes_->size();
        case Family::modular:
        case Family::sympow: return table_->size();
        case Family::custom: return custom_primes_.size();
    }
    return 0;
}

std::uint64_t EulerProductSpec::prime(std::size_t n) const {
    if (n >= prime_count())
        fail(ErrorKind::incomplete_data, name_ + ": no local data for prime index " + std::to_string(n) + " (have " +
                                             std::to_string(prime_count()) + ")");
    switch (family_) {
        case Family::zeta: return (*primes_)[n];
        case Family::modular:
        case Family::sympow: return (*table_)[n].p;
        case Family::custom: return custom_primes_[n];
    }
    return 0;
}

bool EulerProductSpec::skipped(std::size_t n) const {
    return family_ == Family::sympow && table_->is_bad(prime(n));
}

std::vector<std::uint64_t> EulerProductSpec::skipped_primes(std::size_t count) const {
    std::vector<std::uint64_t> out;
    count = std::min(count, prime_count());
    for (std::size_t n = 0; n < count; ++n)
        if (skipped(n)) out.push_back(prime(n));
    return out;
}

std::vector<cplx> EulerProductSpec::roots(std::size_t n) const {
    const std::uint64_t p = prime(n);
    switch (family_) {
        case Family::zeta: return {cplx(1.0, 0.0)};
        case Family::modular: {
            const auto& e = (*table_)[n];
            if (table_->is_bad(p)) return {cplx(e.lambda, 0.0)};
            return {std::polar(1.0, e.theta), std::polar(1.0, -e.theta)};
        }
        case Family::sympow: {
            if (table_->is_bad(p)) return {};
            const double theta = (*table_)[n].theta;
            std::vector<cplx> r;
            r.reserve(static_cast<std::size_t>(gamma_) + 1);
            for (int h = 0; h <= gamma_; ++h) r.push_back(std::polar(1.0, (gamma_ - 2 * h) * theta));
            return r;
        }
        case Family::custom: return custom_roots_[n];
    }
    return {};
}

std::size_t EulerProductSpec::degree(std::size_t n) const {
    switch (family_) {
        case Family::zeta: return 1;
        case Family::modular: return table_->is_bad(prime(n)) ? 1 : 2;
        case Family::sympow: return table_->is_bad(prime(n)) ? 0 : static_cast<std::size_t>(gamma_) + 1;
        case Family::custom: return custom_roots_[n].size();
    }
    return 0;
}

bool EulerProductSpec::real_coefficients() const noexcept {
    if (family_ != Family::custom) return true;
    for (const auto& roots : custom_roots_) {
        std::vector<bool> used(roots.size(), false);
        for (std::size_t i = 0; i < roots.size(); ++i) {
            if (used[i]) continue;
            bool matched = false;
            for (std::size_t k = 0; k < roots.size() && !matched; ++k) {
                if (used[k] || (k == i && roots[i].imag() != 0.0)) continue;
                if (std::abs(roots[k] - std::conj(roots[i])) < 1e-14) {
                    used[i] = used[k] = true;
                    matched = true;
                }
            }
            if (!matched) return false;
        }
    }
    return true;
}

std::vector<cplx> EulerProductSpec::taylor(std::size_t n, int J) const {
    if (J < 0) fail(ErrorKind::domain, "taylor: J must be non-negative");
    std::vector<cplx> r(static_cast<std::size_t>(J));
    const std::uint64_t p = prime(n);
    for (int j = 1; j <= J; ++j) {
        const double inv_j = 1.0 / j;
        cplx v;
        switch (family_) {
            case Family::zeta: v = inv_j; break;
            case Family::modular:
                if (table_->is_bad(p))
                    v = std::pow((*table_)[n].lambda, j) * inv_j;
                else
                    v = 2.0 * std::cos(j * (*table_)[n].theta) * inv_j;
                break;
            case Family::sympow: {
                if (table_->is_bad(p)) break;
                const double theta = (*table_)[n].theta;
                double s = 0.0;
                for (int h = 0; h <= gamma_; ++h) s += std::cos(j * (gamma_ - 2 * h) * theta);
                v = s * inv_j;
                break;
            }
            case Family::custom: {
                for (auto a : custom_roots_[n]) {
                    cplx pw = 1.0;
                    for (int k = 0; k < j; ++k) pw *= a;
                    v += pw;
                }
                v *= inv_j;
                break;
            }
        }
        r[static_cast<std::size_t>(j - 1)] = v;
    }
    return r;
}

cplx taylor_r(const EulerProductSpec& spec, int j, std::size_t n) {
    if (j < 1) fail(ErrorKind::domain, "taylor_r: j must be >= 1");
    return spec.taylor(n, j).back();
}

int taylor_truncation(std::size_t degree, double x, double tol) {
    if (degree == 0 || x == 0.0) return 0;
    if (!(x < 1.0)) fail(ErrorKind::singularity, "taylor_truncation: series radius reached");
    const double g = static_cast<double>(degree);
    double xp = x;  // x^{J+1} at J = 0
    for (int J = 0; J < 100000; ++J) {
        if (g * xp / ((J + 1) * (1.0 - x)) < tol) return std::max(J, 1);
        xp *= x;
    }
    fail(ErrorKind::accuracy, "taylor_truncation: more than 100000 terms needed");
}

LocalCurve::LocalCurve(const EulerProductSpec& spec, std::size_t n, double sigma, double tail_tol)
    : index_(n), prime_(spec.prime(n)), sigma_(sigma), roots_(spec.roots(n)) {
    if (!(sigma > 0.0)) fail(ErrorKind::domain, "local_curve: sigma must be positive");
    radius_ = std::pow(static_cast<double>(prime_), -sigma);
    double amax = 0.0;
    for (auto a : roots_) amax = std::max(amax, std::abs(a));
    if (!(amax * radius_ < 1.0))
        fail(ErrorKind::singularity, "local_curve: |a| p^{-sigma} >= 1 at p=" + std::to_string(prime_) +
                                         "; principal logarithm undefined");
    for (auto a : roots_) sup_bound_ += -std::log1p(-std::abs(a) * radius_);
    const int J = taylor_truncation(roots_.size(), amax * radius_, tail_tol);
    r_ = spec.taylor(n, J);
    c_.resize(r_.size());
    double xp = 1.0;
    for (std::size_t j = 0; j < r_.size(); ++j) {
        xp *= radius_;
        c_[j] = r_[j] * xp;
    }
}

cplx LocalCurve::operator()(double theta) const {
    const cplx e = std::polar(radius_, kTwoPi * theta);
    cplx z = 0.0;
    for (auto a : roots_) z -= std::log(1.0 - a * e);
    return z;
}

cplx LocalCurve::series(double theta) const {
    const cplx step = std::polar(1.0, kTwoPi * theta);
    cplx e = 1.0, z = 0.0;
    for (auto c : c_) {
        e *= step;
        z += c * e;
    }
    return z;
}

// g = sum_j |c_j| cos(arg c_j + 2 pi j theta - tau); the derivatives follow termwise.
double LocalCurve::projection(double theta, double tau) const {
    double g = 0.0;
    for (std::size_t j = 0; j < c_.size(); ++j)
        g += std::abs(c_[j]) * std::cos(std::arg(c_[j]) + kTwoPi * double(j + 1) * theta - tau);
    return g;
}

double LocalCurve::projection_d1(double theta, double tau) const {
    double g = 0.0;
    for (std::size_t j = 0; j < c_.size(); ++j) {
        const double k = kTwoPi * double(j + 1);
        g -= k * std::abs(c_[j]) * std::sin(std::arg(c_[j]) + k * theta - tau);
    }
    return g;
}

double LocalCurve::projection_d2(double theta, double tau) const {
    double g = 0.0;
    for (std::size_t j = 0; j < c_.size(); ++j) {
        const double k = kTwoPi * double(j + 1);
        g -= k * k * std::abs(c_[j]) * std::cos(std::arg(c_[j]) + k * theta - tau);
    }
    return g;
}

}  // namespace mfunc::euler
