#pragma once

// Independent reference implementations used only by tests.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Coefficients of q * prod_{m >= 1} (1 - q^m)^24 up to q^bound, by repeated
// multiplication with (1 - q^m). Element n holds tau(n); element 0 is unused.
inline std::vector<boost::multiprecision::cpp_int> tau_by_expansion(std::size_t bound) {
    using boost::multiprecision::cpp_int;
    std::vector<cpp_int> c(bound, 0);  // coefficients of prod (1 - q^m)^24, degrees 0..bound-1
    c[0] = 1;
    for (std::size_t m = 1; m < bound; ++m)
        for (int rep = 0; rep < 24; ++rep)
            for (std::size_t d = bound - 1; d >= m; --d) {
                c[d] -= c[d - m];
                if (d == m) break;
            }
    std::vector<cpp_int> tau(bound + 1, 0);
    for (std::size_t n = 1; n <= bound; ++n) tau[n] = c[n - 1];
    return tau;
}

// Left Riemann sum of exp(i <z(theta), w>) over `points` equally spaced theta.
template <class Curve>
std::complex<double> riemann_charfn(const Curve& z, std::complex<double> w, std::size_t points) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t m = 0; m < points; ++m) {
        const std::complex<double> v = z(static_cast<double>(m) / static_cast<double>(points));
        const double ph = v.real() * w.real() + v.imag() * w.imag();
        re += std::cos(ph);
        im += std::sin(ph);
    }
    return {static_cast<double>(re / points), static_cast<double>(im / points)};
}

}  // namespace oracle
