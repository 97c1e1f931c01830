#include "mfunc/charfun.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>

#include "mfunc/error.hpp"
#include "mfunc/io.hpp"
#include "mfunc/parallel.hpp"

namespace mfunc::charfun {

namespace {

constexpr double kPi = std::numbers::pi;

using Matrix = Eigen::MatrixXcd;

cplx cis(double phase) { return {std::cos(phase), std::sin(phase)}; }

cplx sum_phases(const std::vector<cplx>& z, double u, double v) {
    double re = 0.0, im = 0.0;
    for (const auto& zm : z) {
        const double ph = u * zm.real() + v * zm.imag();
        re += std::cos(ph);
        im += std::sin(ph);
    }
    return {re, im};
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t initial_nodes(const euler::LocalCurve& curve, double abs_w, const QuadratureOptions& opts) {
    const double want = std::ceil(opts.oversample * abs_w * curve.radius() * static_cast<double>(curve.degree()));
    return std::max(opts.min_nodes, static_cast<std::size_t>(std::min(want, 1e18)));
}

CurveNodes::CurveNodes(const euler::LocalCurve& curve, std::size_t base_nodes) : curve_(&curve), base_(base_nodes) {
    if (base_nodes == 0) fail(ErrorKind::domain, "CurveNodes: need at least one node");
}

const std::vector<cplx>& CurveNodes::level(std::size_t k) {
    // Levels are appended in order and never move once built.
    while (levels_.size() <= k) {
        const std::size_t next = levels_.size();
        std::vector<cplx> z;
        if (next == 0) {
            z.resize(base_);
            for (std::size_t m = 0; m < base_; ++m) z[m] = (*curve_)(static_cast<double>(m) / static_cast<double>(base_));
        } else {
            const std::size_t count = base_ << (next - 1);
            const double res = static_cast<double>(base_ << next);
            z.resize(count);
            for (std::size_t m = 0; m < count; ++m) z[m] = (*curve_)((2.0 * static_cast<double>(m) + 1.0) / res);
        }
        levels_.push_back(std::move(z));
    }
    return levels_[k];
}

QuadratureResult integrate(CurveNodes& nodes, cplx w, const QuadratureOptions& opts) {
    const double u = w.real(), v = w.imag();
    std::size_t M = nodes.base();
    cplx S = sum_phases(nodes.level(0), u, v);
    cplx T = S / static_cast<double>(M);
    double err = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1;; ++k) {
        if (2 * M > opts.max_nodes)
            throw AccuracyError("local_charfn: node budget " + std::to_string(opts.max_nodes) +
                                    " exhausted; achieved error estimate " + io::format_double(err, 3),
                                err);
        S += sum_phases(nodes.level(k), u, v);
        M *= 2;
        const cplx next = S / static_cast<double>(M);
        err = std::abs(next - T);
        if (err < opts.tol) return {next, M, err};
        T = next;
    }
}

QuadratureResult local_charfn_detail(const euler::LocalCurve& curve, cplx w, const QuadratureOptions& opts) {
    if (curve.degree() == 0) return {1.0, 0, 0.0};
    CurveNodes nodes(curve, initial_nodes(curve, std::abs(w), opts));
    return integrate(nodes, w, opts);
}

cplx local_charfn(const euler::LocalCurve& curve, cplx w, const QuadratureOptions& opts) {
    return local_charfn_detail(curve, w, opts).value;
}

// ---------------------------------------------------------------------------

double decay_normalizer(std::uint64_t p, double sigma, double radius) {
    const double ps = std::pow(static_cast<double>(p), -sigma);
    return std::min(std::sqrt(radius * ps), radius * ps);
}

std::vector<double> uniform_directions(std::size_t count) {
    std::vector<double> d(count);
    for (std::size_t i = 0; i < count; ++i) d[i] = kPi * static_cast<double>(i) / static_cast<double>(count);
    return d;
}

namespace {

double golden_max(const std::function<double(double)>& f, double a, double b, int iterations, double& arg) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < iterations; ++it) {
        if (f1 > f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a); f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a); f2 = f(x2);
        }
    }
    arg = f1 > f2 ? x1 : x2;
    return std::max(f1, f2);
}

}  // namespace

double decay_window(const euler::LocalCurve& curve) { return kPi / curve.sup_bound(); }

std::vector<DecayRow> decay_profile(const euler::LocalCurve& curve, std::span<const double> radii,
                                    std::span<const double> directions, const DecayOptions& opts) {
    if (directions.empty()) fail(ErrorKind::domain, "decay_profile: need at least one direction");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) fail(ErrorKind::domain, "decay_profile: radii must be positive");
        if (i > 0 && radii[i] < radii[i - 1]) fail(ErrorKind::domain, "decay_profile: radii must be sorted");
    }
    std::vector<double> seeds(directions.begin(), directions.end());
    for (auto& t : seeds) t = std::fmod(std::fmod(t, kPi) + kPi, kPi);
    std::sort(seeds.begin(), seeds.end());
    const std::size_t n_dir = seeds.size();

    std::vector<DecayRow> rows;
    for (double radius : radii) {
        const std::size_t n_rad = opts.window_samples > 1 ? opts.window_samples : 1;
        const double step = n_rad > 1 ? decay_window(curve) / static_cast<double>(n_rad) : 0.0;
        CurveNodes nodes(curve, initial_nodes(curve, radius + step * static_cast<double>(n_rad), opts.quad));
        std::size_t max_nodes = 0;
        auto eval = [&](double r, double tau) {
            const auto q = integrate(nodes, std::polar(r, tau), opts.quad);
            max_nodes = std::max(max_nodes, q.nodes);
            return std::abs(q.value);
        };

        // Lattice over (radius offset, direction), then golden-section refinement.
        std::vector<double> values(n_rad * n_dir);
        for (std::size_t k = 0; k < n_rad; ++k)
            for (std::size_t i = 0; i < n_dir; ++i)
                values[k * n_dir + i] = eval(radius + step * static_cast<double>(k), seeds[i]);
        std::vector<std::size_t> order(values.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return values[a] > values[b] || (values[a] == values[b] && a < b);
        });

        DecayRow row;
        row.radius = radius;
        row.sup_abs = values[order[0]];
        row.best_tau = seeds[order[0] % n_dir];
        row.best_radius = radius + step * static_cast<double>(order[0] / n_dir);
        if (opts.refine) {
            for (std::size_t c = 0; c < std::min(opts.refine_candidates, order.size()); ++c) {
                const std::size_t i = order[c] % n_dir;
                const double r = radius + step * static_cast<double>(order[c] / n_dir);
                double tau = seeds[i];
                double best = values[order[c]];
                if (n_dir > 1) {
                    const double left = i > 0 ? seeds[i - 1] : seeds[n_dir - 1] - kPi;
                    const double right = i + 1 < n_dir ? seeds[i + 1] : seeds[0] + kPi;
                    double arg;
                    const double f = golden_max([&](double t) { return eval(r, t); }, left, right,
                                                opts.refine_iterations, arg);
                    if (f > best) {
                        best = f;
                        tau = arg;
                    }
                }
                double rr = r;
                if (step > 0.0) {
                    double arg;
                    const double f = golden_max([&](double x) { return eval(x, tau); }, std::max(radius, r - step),
                                                std::min(radius + step * static_cast<double>(n_rad), r + step),
                                                opts.refine_iterations, arg);
                    if (f > best) {
                        best = f;
                        rr = arg;
                    }
                }
                if (best > row.sup_abs) {
                    row.sup_abs = best;
                    row.best_tau = std::fmod(tau + kPi, kPi);
                    row.best_radius = rr;
                }
            }
        }
        row.nodes = max_nodes;
        row.normalized = row.sup_abs * decay_normalizer(curve.prime(), curve.sigma(), row.best_radius);
        rows.push_back(row);
    }
    return rows;
}

double decay_spread(std::span<const DecayRow> rows) {
    if (rows.empty()) return 1.0;
    double lo = rows[0].normalized, hi = rows[0].normalized;
    for (const auto& r : rows) {
        lo = std::min(lo, r.normalized);
        hi = std::max(hi, r.normalized);
    }
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

DerivativeZeros count_derivative_zeros(const euler::LocalCurve& curve, double tau, std::size_t grid) {
    auto count = [&](auto&& f) {
        int changes = 0;
        int first_sign = 0, prev = 0;
        for (std::size_t m = 0; m < grid; ++m) {
            const double v = f(static_cast<double>(m) / static_cast<double>(grid));
            const int s = (v > 0.0) - (v < 0.0);
            if (s == 0) continue;
            if (first_sign == 0) first_sign = s;
            else if (s != prev) ++changes;
            prev = s;
        }
        if (first_sign != 0 && prev != first_sign) ++changes;  // wrap-around
        return changes;
    };
    DerivativeZeros z;
    z.first = count([&](double t) { return curve.projection_d1(t, tau); });
    z.second = count([&](double t) { return curve.projection_d2(t, tau); });
    return z;
}

bool two_zero_structure(const euler::LocalCurve& curve, std::size_t directions, std::size_t grid) {
    for (std::size_t k = 0; k < directions; ++k) {
        const double tau = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(directions);
        const auto z = count_derivative_zeros(curve, tau, grid);
        if (z.first != 2 || z.second != 2) return false;
    }
    return true;
}

PreflightReport decay_preflight(const euler::EulerProductSpec& spec, double sigma, const PreflightOptions& opts) {
    PreflightReport report;
    std::size_t examined = 0;
    const auto seeds = uniform_directions(opts.directions);
    for (std::size_t n = 0; n < spec.prime_count() && examined < opts.max_candidates; ++n) {
        if (spec.prime(n) < opts.min_prime || spec.degree(n) == 0) continue;
        const double r1 = std::abs(euler::taylor_r(spec, 1, n));
        if (r1 < opts.r1_min) continue;
        euler::LocalCurve curve(spec, n, sigma);
        if (!two_zero_structure(curve, opts.zero_check_directions)) continue;
        ++examined;
        PreflightPrime pp;
        pp.p = curve.prime();
        pp.index = n;
        pp.r1_abs = r1;
        std::vector<double> radii;
        for (double s : opts.radius_scales) radii.push_back(s / curve.radius());
        pp.rows = decay_profile(curve, radii, seeds);
        pp.spread = decay_spread(pp.rows);
        pp.bounded = pp.spread <= opts.max_spread;
        if (pp.bounded) ++report.bounded_count;
        report.primes.push_back(std::move(pp));
        if (report.bounded_count >= opts.required) break;
    }
    report.passed = report.bounded_count >= opts.required;
    return report;
}

// ---------------------------------------------------------------------------

double omitted_second_moment(const euler::EulerProductSpec& spec, double sigma, std::size_t N) {
    // E|z_n|^2 = sum_j |r_j|^2 p^{-2 j sigma} <= g^2 p^{-2 sigma} / (1 - p^{-2 sigma}).
    const std::uint64_t last = N == 0 ? 1 : spec.prime(std::min(N, spec.prime_count()) - 1);
    double sum = 0.0;
    // Primes inside the spec's table beyond N use their actual degree.
    const std::size_t stop = spec.prime_count();
    std::uint64_t after = last;
    for (std::size_t n = N; n < stop && n < N + 100000; ++n) {
        const double x2 = std::pow(static_cast<double>(spec.prime(n)), -2.0 * sigma);
        const double g = static_cast<double>(spec.degree(n));
        sum += g * g * x2 / (1.0 - x2);
        after = spec.prime(n);
    }
    return sum + spec.c0() * spec.c0() * arith::prime_power_tail(after, 2.0 * sigma);
}

namespace {

// log of the moment series of (W x, W y) over one local curve, as a bivariate
// polynomial in (u / W, v / W) truncated at total degree D. Row-major (D+1)^2.
struct SeriesLog {
    std::vector<cplx> coeff;
    double remainder = 0.0;
};

SeriesLog curve_log_series(const euler::LocalCurve& curve, double scale, int D, std::size_t nodes) {
    const std::size_t S = static_cast<std::size_t>(D) + 1;
    std::vector<double> moment(S * S, 0.0);
    std::vector<double> xp(S), yp(S);
    for (std::size_t m = 0; m < nodes; ++m) {
        const cplx z = curve(static_cast<double>(m) / static_cast<double>(nodes)) * scale;
        xp[0] = yp[0] = 1.0;
        for (std::size_t k = 1; k < S; ++k) {
            xp[k] = xp[k - 1] * z.real();
            yp[k] = yp[k - 1] * z.imag();
        }
        for (std::size_t a = 0; a < S; ++a)
            for (std::size_t b = 0; a + b < S; ++b) moment[a * S + b] += xp[a] * yp[b];
    }
    std::vector<double> inv_fact(S);
    inv_fact[0] = 1.0;
    for (std::size_t k = 1; k < S; ++k) inv_fact[k] = inv_fact[k - 1] / static_cast<double>(k);
    const cplx ipow[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};

    std::vector<cplx> P(S * S, 0.0), L(S * S, 0.0);
    for (std::size_t a = 0; a < S; ++a)
        for (std::size_t b = 0; a + b < S; ++b)
            P[a * S + b] = ipow[(a + b) % 4] * (moment[a * S + b] / static_cast<double>(nodes)) * inv_fact[a] * inv_fact[b];

    // P_u = P L_u (or P_v = P L_v on the a = 0 column), solved degree by degree.
    for (std::size_t deg = 1; deg < S; ++deg) {
        for (std::size_t a = 0; a <= deg; ++a) {
            const std::size_t b = deg - a;
            cplx acc;
            if (a >= 1) {
                acc = static_cast<double>(a) * P[a * S + b];
                for (std::size_t i = 1; i <= a; ++i)
                    for (std::size_t j = 0; j <= b; ++j) {
                        if (i == a && j == b) continue;
                        acc -= static_cast<double>(i) * L[i * S + j] * P[(a - i) * S + (b - j)];
                    }
                L[a * S + b] = acc / static_cast<double>(a);
            } else {
                acc = static_cast<double>(b) * P[b];
                for (std::size_t j = 1; j < b; ++j) acc -= static_cast<double>(j) * L[j] * P[b - j];
                L[b] = acc / static_cast<double>(b);
            }
        }
    }
    SeriesLog out;
    out.coeff = std::move(L);
    for (std::size_t top : {S - 2, S - 1}) {
        double r = 0.0;
        for (std::size_t a = 0; a <= top; ++a) r += std::abs(out.coeff[a * S + (top - a)]);
        out.remainder = std::max(out.remainder, r);
    }
    return out;
}

// Trapezoid values of K_n on the whole grid: S = E_u E_v^T with E(a, m) = exp(i u_a x_m).
Matrix direct_grid(const euler::LocalCurve& curve, const std::vector<double>& coord, double abs_w_max,
                   const QuadratureOptions& opts) {
    const auto n = static_cast<Eigen::Index>(coord.size());
    CurveNodes nodes(curve, initial_nodes(curve, abs_w_max, opts));
    auto level_sum = [&](const std::vector<cplx>& z) {
        const auto M = static_cast<Eigen::Index>(z.size());
        Matrix eu(n, M), ev(n, M);
        parallel_for(static_cast<std::size_t>(M), [&](std::size_t mi) {
            const auto m = static_cast<Eigen::Index>(mi);
            for (Eigen::Index a = 0; a < n; ++a) {
                eu(a, m) = cis(coord[static_cast<std::size_t>(a)] * z[mi].real());
                ev(a, m) = cis(coord[static_cast<std::size_t>(a)] * z[mi].imag());
            }
        });
        Matrix s = eu * ev.transpose();
        return s;
    };
    std::size_t M = nodes.base();
    Matrix S = level_sum(nodes.level(0));
    Matrix T = S / static_cast<double>(M);
    double err = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1;; ++k) {
        if (2 * M > opts.max_nodes)
            throw AccuracyError("product_charfn: node budget exhausted at p=" + std::to_string(curve.prime()) +
                                    "; achieved error estimate " + io::format_double(err, 3),
                                err);
        S += level_sum(nodes.level(k));
        M *= 2;
        Matrix next = S / static_cast<double>(M);
        err = (next - T).cwiseAbs().maxCoeff();
        if (err < opts.tol) return next;
        T = std::move(next);
    }
}

}  // namespace

CharFnGrid product_charfn(const euler::EulerProductSpec& spec, double sigma, std::size_t N, const WGrid& grid,
                          const ProductOptions& opts) {
    if (!(sigma > 0.0)) fail(ErrorKind::domain, "product_charfn: sigma must be positive");
    if (N == 0) fail(ErrorKind::domain, "product_charfn: prime cutoff must be positive");
    if (N > spec.prime_count())
        fail(ErrorKind::incomplete_data, "product_charfn: " + spec.name() + " has local data for " +
                                             std::to_string(spec.prime_count()) + " primes, asked for " +
                                             std::to_string(N));
    if (grid.nodes < 3 || grid.nodes % 2 == 0) fail(ErrorKind::domain, "product_charfn: grid nodes must be odd and >= 3");
    if (!(grid.w_max > 0.0)) fail(ErrorKind::domain, "product_charfn: W_max must be positive");

    const std::size_t n = grid.nodes;
    std::vector<double> coord(n);
    for (std::size_t i = 0; i < n; ++i) coord[i] = grid.coordinate(i);
    const double abs_w_max = grid.w_max * std::sqrt(2.0);

    CharFnGrid out;
    out.spec_name = spec.name();
    out.sigma = sigma;
    out.prime_cutoff = N;
    out.grid = grid;
    out.heuristic = sigma <= spec.sigma0();
    out.skipped_primes = spec.skipped_primes(N);

    const int D = opts.series_degree;
    const std::size_t S = static_cast<std::size_t>(D) + 1;
    std::vector<cplx> series_total(S * S, 0.0);
    Matrix lambda = Matrix::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

    for (std::size_t idx = 0; idx < N; ++idx) {
        if (spec.degree(idx) == 0) continue;
        const euler::LocalCurve curve(spec, idx, sigma);
        if (abs_w_max * curve.sup_bound() <= opts.series_threshold) {
            auto log_series = curve_log_series(curve, grid.w_max, D, opts.series_nodes);
            if (log_series.remainder * static_cast<double>(N) <= opts.quad.tol) {
                for (std::size_t k = 0; k < S * S; ++k) series_total[k] += log_series.coeff[k];
                out.series_remainder += log_series.remainder;
                ++out.series_primes;
                continue;
            }
        }
        lambda = lambda.cwiseProduct(direct_grid(curve, coord, abs_w_max, opts.quad));
        ++out.direct_primes;
    }

    if (out.series_primes > 0) {
        Eigen::MatrixXd powers(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(S));
        for (std::size_t a = 0; a < n; ++a) {
            const double t = coord[a] / grid.w_max;
            double p = 1.0;
            for (std::size_t k = 0; k < S; ++k) {
                powers(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) = p;
                p *= t;
            }
        }
        Matrix coeff(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
        for (std::size_t a = 0; a < S; ++a)
            for (std::size_t b = 0; b < S; ++b)
                coeff(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = series_total[a * S + b];
        const Matrix pc = powers.cast<cplx>();
        const Matrix exponent = pc * coeff * pc.transpose();
        lambda = lambda.cwiseProduct(exponent.unaryExpr([](const cplx& e) { return std::exp(e); }));
    }

    out.values.resize(n * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            out.values[a * n + b] = lambda(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    out.values[grid.center() * n + grid.center()] = 1.0;

    // |Lambda - Lambda_N| <= |Lambda_N| sum_{omitted} |K_n - 1| and |K_n - 1| <= |w|^2 E|z_n|^2 / 2.
    auto bound_for = [&](double second_moment) {
        double worst = 0.0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                const double w2 = coord[a] * coord[a] + coord[b] * coord[b];
                worst = std::max(worst, std::abs(out.values[a * n + b]) * std::min(2.0, 0.5 * w2 * second_moment));
            }
        return worst;
    };
    out.tail_bound = bound_for(omitted_second_moment(spec, sigma, N));
    if (opts.enforce_tail && !(out.tail_bound <= opts.tail_tol)) {
        std::size_t suggested = 0;
        for (std::size_t trial = 2 * N; trial <= (std::size_t{1} << 30); trial *= 2) {
            const std::size_t clipped = std::min(trial, spec.prime_count());
            double m2;
            if (trial <= spec.prime_count()) {
                m2 = omitted_second_moment(spec, sigma, clipped);
            } else {
                const double p_est = static_cast<double>(trial) * std::log(static_cast<double>(trial));
                m2 = spec.c0() * spec.c0() * arith::prime_power_tail(static_cast<std::uint64_t>(p_est), 2.0 * sigma);
            }
            if (bound_for(m2) <= opts.tail_tol) {
                suggested = trial;
                break;
            }
        }
        throw CutoffError("product_charfn: tail bound " + io::format_double(out.tail_bound, 4) + " above tolerance " +
                              io::format_double(opts.tail_tol, 4) +
                              (suggested ? "; try N >= " + std::to_string(suggested) : std::string("; sigma too small")),
                          suggested);
    }
    return out;
}

void write_charfn_csv(const CharFnGrid& g, std::ostream& out) {
    out << "re_w,im_w,re_val,im_val\n";
    const std::size_t n = g.grid.nodes;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const cplx v = g.values[a * n + b];
            out << io::format_double(g.grid.coordinate(a)) << ',' << io::format_double(g.grid.coordinate(b)) << ','
                << io::format_double(v.real()) << ',' << io::format_double(v.imag()) << '\n';
        }
}

}  // namespace mfunc::charfun
