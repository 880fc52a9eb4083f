#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "cvteleport/errors.hpp"

namespace cvteleport {

using Complex = std::complex<double>;

/// Physicists' Hermite polynomial H_N(x) by three-term recurrence.
inline double hermite_h(int N, double x) {
    if (N < 0) throw InvalidParameter("hermite_h: N must be >= 0");
    if (N == 0) return 1.0;
    double hm = 1.0, h = 2.0 * x;
    for (int n = 1; n < N; ++n) {
        const double next = 2.0 * x * h - 2.0 * n * hm;
        hm = h;
        h = next;
    }
    return h;
}

/// Normalised Hermite part pi^{-1/4} H_N(x) / sqrt(2^N N!), i.e. the harmonic
/// oscillator eigenfunction without its Gaussian factor. The normalised
/// recurrence keeps every intermediate in range for any N.
inline double scaled_hermite(int N, double x) {
    if (N < 0) throw InvalidParameter("scaled_hermite: N must be >= 0");
    const double pim4 = 0.7511255444649425; // pi^{-1/4}
    double pm = 0.0, p = pim4;
    for (int n = 1; n <= N; ++n) {
        const double next = x * std::sqrt(2.0 / n) * p - std::sqrt((n - 1.0) / n) * pm;
        pm = p;
        p = next;
    }
    return p;
}

/// Harmonic-oscillator eigenfunction f_N(x), unit L2 norm.
inline double fock_wavefunction(int N, double x) {
    return scaled_hermite(N, x) * std::exp(-x * x / 2.0);
}

/// Laguerre polynomial L_n(x).
inline double laguerre(int n, double x) {
    if (n < 0) throw InvalidParameter("laguerre: n must be >= 0");
    if (n == 0) return 1.0;
    double lm = 1.0, l = 1.0 - x;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 - x) * l - k * lm) / (k + 1.0);
        lm = l;
        l = next;
    }
    return l;
}

inline double log_factorial(int n) { return std::lgamma(n + 1.0); }

/// Nodes and weights of the n-point Gauss-Hermite rule for weight e^{-x^2},
/// nodes ascending. Newton iteration on the normalised recurrence.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussHermiteRule compute_gauss_hermite(int n) {
    constexpr double kEps = 1e-14;
    constexpr int kMaxNewton = 100;
    const double pim4 = 0.7511255444649425;
    GaussHermiteRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * rule.nodes[n - 1];
        else if (i == 3)
            z = 1.91 * z - 0.91 * rule.nodes[n - 2];
        else
            z = 2.0 * z - rule.nodes[n - i + 1];
        double pp = 0.0;
        for (int it = 0; it < kMaxNewton; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(j / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= kEps) break;
        }
        rule.nodes[n - 1 - i] = z;     // largest roots at the top
        rule.nodes[i] = -z;
        rule.weights[i] = 2.0 / (pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

/// Cached rule lookup; thread-safe, rules are immutable once built.
inline const GaussHermiteRule& gauss_hermite_rule(int n) {
    static std::map<int, GaussHermiteRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_hermite(n)).first;
    return it->second;
}

/// Quadrature configuration for the Gaussian-weighted integrals.
struct QuadratureGrid {
    enum class Rule { GaussHermite, AdaptiveTensor };
    Rule rule = Rule::GaussHermite;
    int nodes_per_axis = 80;
    double domain_radius = 8.0; // in units of sigma (adaptive-tensor rule)
    double rel_tol = 1e-6;

    void validate() const {
        if (nodes_per_axis < 8)
            throw InvalidParameter("QuadratureGrid: nodes_per_axis must be >= 8");
        if (!(rel_tol > 0.0) || rel_tol > 1e-3)
            throw InvalidParameter("QuadratureGrid: rel_tol must be in (0, 1e-3]");
    }
};

struct IntegralResult {
    double value;
    double err_estimate;
};

namespace detail {

template <class F>
double gh_weighted_sum(F&& f, double sigma, int n) {
    const GaussHermiteRule& rule = gauss_hermite_rule(n);
    const double scale = std::sqrt(2.0) * sigma;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j)
            row += rule.weights[j] * f(scale * rule.nodes[i], scale * rule.nodes[j]);
        total += rule.weights[i] * row;
    }
    return total / M_PI;
}

template <class F>
double tensor_simpson_sum(F&& f, double sigma_sq, double radius_sigma, int n) {
    // Composite Simpson on [-L, L]^2 against the explicit normalised kernel.
    if (n % 2 == 0) ++n;
    const double L = radius_sigma * std::sqrt(sigma_sq);
    const double h = 2.0 * L / (n - 1);
    const double norm = 1.0 / (2.0 * M_PI * sigma_sq);
    auto simpson_w = [n](int i) {
        if (i == 0 || i == n - 1) return 1.0;
        return (i % 2 == 1) ? 4.0 : 2.0;
    };
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = -L + i * h;
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            const double y = -L + j * h;
            row += simpson_w(j) * f(x, y) * std::exp(-(x * x + y * y) / (2.0 * sigma_sq));
        }
        total += simpson_w(i) * row;
    }
    return total * norm * h * h / 9.0;
}

} // namespace detail

/// Integral of f against the normalised 2-D Gaussian kernel of variance
/// sigma_sq per axis. Convergence by node doubling; sigma_sq = 0 degenerates
/// to the point evaluation f(0, 0).
template <class F>
IntegralResult gaussian_weighted_integral_2d(F&& f, double sigma_sq,
                                             const QuadratureGrid& grid = {}) {
    grid.validate();
    if (sigma_sq < 0.0)
        throw InvalidParameter("gaussian_weighted_integral_2d: sigma_sq must be >= 0");
    if (sigma_sq == 0.0) return {f(0.0, 0.0), 0.0};

    auto evaluate = [&](int n) {
        if (grid.rule == QuadratureGrid::Rule::GaussHermite)
            return detail::gh_weighted_sum(f, std::sqrt(sigma_sq), n);
        return detail::tensor_simpson_sum(f, sigma_sq, grid.domain_radius, n);
    };

    int n = grid.nodes_per_axis;
    double value = evaluate(n);
    constexpr int kMaxDoublings = 5;
    for (int round = 0; round < kMaxDoublings; ++round) {
        n *= 2;
        const double refined = evaluate(n);
        const double err = std::abs(refined - value);
        value = refined;
        if (err <= grid.rel_tol * std::max(std::abs(refined), 1e-30))
            return {value, err};
    }
    throw ConvergenceFailure("gaussian_weighted_integral_2d: node doubling did not settle");
}

/// Coherent-state Fock amplitudes <n|alpha> up to dim.
inline Eigen::VectorXcd coherent_amplitudes(Complex alpha, int dim) {
    Eigen::VectorXcd c(dim);
    c(0) = std::exp(-std::norm(alpha) / 2.0);
    for (int n = 1; n < dim; ++n) c(n) = c(n - 1) * alpha / std::sqrt(double(n));
    return c;
}

/// Displacement operator D(alpha) = exp(alpha a^dag - conj(alpha) a) on the
/// truncated Fock space. Built by the diagonal-marching recurrence: every
/// intermediate is itself a matrix element, so nothing leaves [0, 1].
inline Eigen::MatrixXcd displacement_matrix(Complex alpha, int dim) {
    if (dim < 1) throw InvalidParameter("displacement_matrix: dim must be >= 1");
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(dim, dim);
    const double a2 = std::norm(alpha);
    const Complex nconj = -std::conj(alpha);
    const double expa2 = std::exp(-a2 / 2.0);
    d(0, 0) = expa2;
    if (dim == 1) return d;

    // column 1 and row 1 carry the (n - a2) Laguerre factor
    d(1, 1) = expa2;
    for (int n = 2; n < dim; ++n) d(n, 1) = alpha * d(n - 1, 1) / std::sqrt(double(n));
    for (int m = 2; m < dim; ++m) d(1, m) = nconj * d(1, m - 1) / std::sqrt(double(m));
    d(1, 1) = expa2 * (1.0 - a2);
    for (int n = 2; n < dim; ++n) d(n, 1) *= (n - a2);
    for (int m = 2; m < dim; ++m) d(1, m) *= (m - a2);

    for (int i = 2; i < dim; ++i)
        d(i, i) = ((2.0 * i - 1.0 - a2) * d(i - 1, i - 1) - (i - 1.0) * d(i - 2, i - 2)) / double(i);
    for (int n = 1; n < dim; ++n) d(n, 0) = alpha / std::sqrt(double(n)) * d(n - 1, 0);
    for (int m = 1; m < dim; ++m) d(0, m) = nconj / std::sqrt(double(m)) * d(0, m - 1);

    for (int diag = 1; diag < dim; ++diag) {
        for (int n = diag + 2; n < dim; ++n) {
            const int m = n - diag;
            d(n, m) = (m + n - 1.0 - a2) / std::sqrt(double(m) * n) * d(n - 1, m - 1) -
                      std::sqrt((m - 1.0) * (n - 1.0) / (double(m) * n)) * d(n - 2, m - 2);
        }
        for (int m = diag + 2; m < dim; ++m) {
            const int n = m - diag;
            d(n, m) = (m + n - 1.0 - a2) / std::sqrt(double(m) * n) * d(n - 1, m - 1) -
                      std::sqrt((m - 1.0) * (n - 1.0) / (double(m) * n)) * d(n - 2, m - 2);
        }
    }
    return d;
}

/// Squeeze operator S(eps) = exp[eps (a^dag^2 - a^2)/2] on the truncated
/// Fock space, as the exact exponential of the truncated generator. The
/// generator is antisymmetric, so the result is orthogonal; the disentangled
/// three-term recurrence loses orthogonality beyond n ~ 30 and is not used.
inline Eigen::MatrixXd squeeze_matrix(double eps, int dim) {
    if (dim < 1) throw InvalidParameter("squeeze_matrix: dim must be >= 1");
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n + 2 < dim; ++n) {
        const double c = std::sqrt((n + 1.0) * (n + 2.0)) / 2.0;
        k(n + 2, n) = c;  // a^dag^2 / 2
        k(n, n + 2) = -c; // -a^2 / 2
    }
    return (eps * k).exp();
}

/// Fock-basis column of D(alpha)|N>, via D|N> = (a^dag - conj(alpha))^N |alpha> / sqrt(N!).
inline Eigen::VectorXcd displaced_fock_column(Complex alpha, int N, int dim) {
    if (N < 0 || N >= dim) throw InvalidParameter("displaced_fock_column: need 0 <= N < dim");
    Eigen::VectorXcd v = coherent_amplitudes(alpha, dim);
    const Complex c = std::conj(alpha);
    Eigen::VectorXcd next(dim);
    for (int k = 1; k <= N; ++k) {
        next(0) = -c * v(0);
        for (int m = 1; m < dim; ++m) next(m) = std::sqrt(double(m)) * v(m - 1) - c * v(m);
        v = next / std::sqrt(double(k));
    }
    return v;
}

/// Truncated displacement and squeeze operators at a fixed dimension.
struct FockOperators {
    int dim;

    Eigen::MatrixXcd D_matrix(Complex alpha) const { return displacement_matrix(alpha, dim); }
    Eigen::MatrixXcd S_matrix(double eps) const {
        return squeeze_matrix(eps, dim).cast<Complex>();
    }
};

enum class ElementMethod { Integral, Laguerre };

/// Diagonal displacement element <N|D(alpha)|N>. The Laguerre route is the
/// closed form e^{-|a|^2/2} L_N(|a|^2); the integral route evaluates the
/// position-representation overlap and agrees with it in modulus.
inline Complex displacement_element(int N, Complex alpha, ElementMethod method) {
    if (N < 0) throw InvalidParameter("displacement_element: N must be >= 0");
    const double a2 = std::norm(alpha);
    if (method == ElementMethod::Laguerre)
        return Complex(std::exp(-a2 / 2.0) * laguerre(N, a2), 0.0);

    // <N|D|N> = e^{-jxy/4} Int f_N(x') f_N(x' - x/sqrt2) e^{j y x'/sqrt2} dx'
    // with x = 2 Re alpha, y = 2 Im alpha. Centering at v/2 gives an exact
    // e^{-t^2} weight for Gauss-Hermite.
    const double x = 2.0 * alpha.real(), y = 2.0 * alpha.imag();
    const double v = x / std::sqrt(2.0);
    auto evaluate = [&](int n) {
        const GaussHermiteRule& rule = gauss_hermite_rule(n);
        Complex total(0.0, 0.0);
        for (int i = 0; i < n; ++i) {
            const double t = rule.nodes[i];
            const double poly = scaled_hermite(N, t + v / 2.0) * scaled_hermite(N, t - v / 2.0);
            const double phase = y * (t - v / 2.0) / std::sqrt(2.0);
            total += rule.weights[i] * poly * Complex(std::cos(phase), std::sin(phase));
        }
        return total * std::exp(-v * v / 4.0) *
               std::exp(Complex(0.0, -x * y / 4.0));
    };
    int n = std::max(48, N + static_cast<int>(y * y) / 2 + 16);
    Complex value = evaluate(n);
    for (int round = 0; round < 5; ++round) {
        n *= 2;
        const Complex refined = evaluate(n);
        const double err = std::abs(refined - value);
        value = refined;
        if (err <= 1e-11 * std::max(1.0, std::abs(refined))) return value;
    }
    throw ConvergenceFailure("displacement_element: quadrature did not settle");
}

/// <N|S(eps) D(alpha)|N> by Fock truncation, gated on dimension doubling.
inline Complex squeeze_displace_element(int N, Complex alpha, double eps) {
    if (N < 0) throw InvalidParameter("squeeze_displace_element: N must be >= 0");
    if (eps < 0.0) throw InvalidParameter("squeeze_displace_element: eps must be >= 0");
    auto evaluate = [&](int dim) {
        const Eigen::MatrixXd s = squeeze_matrix(eps, dim);
        const Eigen::VectorXcd col = displaced_fock_column(alpha, N, dim);
        Complex total(0.0, 0.0);
        for (int k = 0; k < dim; ++k) total += s(N, k) * col(k);
        return total;
    };
    int dim = std::max(2 * N + 16, 32);
    Complex value = evaluate(dim);
    while (dim < 256) {
        dim *= 2;
        const Complex refined = evaluate(dim);
        const double err = std::abs(refined - value);
        value = refined;
        if (err < 1e-8) return value;
    }
    throw ConvergenceFailure("squeeze_displace_element: truncation did not settle");
}

/// Closed-form overlap <alpha|S(eps)|gamma> of coherent states under the
/// squeeze, used as the thermal P-representation kernel and as an oracle for
/// the truncated route.
inline Complex squeeze_coherent_overlap(Complex alpha, Complex gamma, double eps) {
    const double sech = 1.0 / std::cosh(eps);
    const double th = std::tanh(eps);
    const Complex ac = std::conj(alpha);
    return std::sqrt(sech) *
           std::exp(-0.5 * (std::norm(alpha) + std::norm(gamma)) + ac * gamma * sech +
                    0.5 * th * (ac * ac - gamma * gamma));
}

} // namespace cvteleport
