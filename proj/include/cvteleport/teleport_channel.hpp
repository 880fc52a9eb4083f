#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <utility>

#include "cvteleport/errors.hpp"
#include "cvteleport/fock_numerics.hpp"
#include "cvteleport/gaussian_state.hpp"

namespace cvteleport {

enum class Mixer { BS, PA };

/// Teleportation scheme: Bell-measurement mixer, detection transmissivity,
/// resource squeezing (may be infinite) and, for the PA, the gain parameter.
struct SchemeParams {
    Mixer mixer;
    LossParams eta;
    double s_channel; // resource squeezing; +infinity for the ideal limit
    GainPair gain;    // meaningful for the PA mixer only

    static SchemeParams bs(double eta,
                           double s = std::numeric_limits<double>::infinity()) {
        check_s(s);
        return SchemeParams{Mixer::BS, LossParams(eta), s, GainPair(0.0)};
    }

    static SchemeParams pa(double eta, double R,
                           double s = std::numeric_limits<double>::infinity()) {
        check_s(s);
        if (!(R > 0.0)) throw DegenerateGain("SchemeParams: PA requires R > 0");
        return SchemeParams{Mixer::PA, LossParams(eta), s, GainPair(R)};
    }

  private:
    static void check_s(double s) {
        if (!(s > 0.0)) throw InvalidParameter("SchemeParams: s_channel must be > 0");
    }
};

/// One teleportation pass reduced to phase space: squeeze x by 1/k and y by
/// k, after adding Gaussian noise of variance sigma_sq per quadrature.
/// k = 1 for the BS scheme (pure additive noise).
struct TeleportChannel {
    double k;        // squeeze ratio g/G (1 for BS)
    double sigma_sq; // added noise variance per quadrature
    double epsilon;  // ln(G/g) = -ln k
    double mu;       // cosh(epsilon)
    double nu;       // sinh(epsilon)
};

inline TeleportChannel make_channel(const SchemeParams& p) {
    const double e2s = std::exp(-2.0 * p.s_channel); // 0 for infinite s
    const double eta2 = p.eta.eta * p.eta.eta;
    if (p.mixer == Mixer::BS) {
        const double sigma_sq = 2.0 * ((1.0 - eta2) / eta2 + e2s);
        return TeleportChannel{1.0, sigma_sq, 0.0, 1.0, 0.0};
    }
    if (!(p.gain.R > 0.0)) throw DegenerateGain("make_channel: PA requires R > 0");
    const double G = p.gain.G, g = p.gain.g;
    const double k = g / G;
    const double sigma_sq =
        2.0 * ((1.0 - eta2) / eta2 / (2.0 * G * G) + e2s * g * g / (G * G));
    const double epsilon = std::log(G / g);
    return TeleportChannel{k, sigma_sq, epsilon, std::cosh(epsilon), std::sinh(epsilon)};
}

/// Channel action on mode i of a Gaussian state: add sigma_sq per quadrature,
/// then scale x by 1/k and y by k (means, variances and cross-covariances).
inline GaussianState apply_channel_gaussian(const TeleportChannel& ch,
                                            const GaussianState& st, int i) {
    detail::check_mode(st, i, "apply_channel_gaussian");
    Eigen::MatrixXd cov = st.cov();
    cov(x_index(i), x_index(i)) += ch.sigma_sq;
    cov(y_index(i), y_index(i)) += ch.sigma_sq;
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(st.dim(), st.dim());
    m(x_index(i), x_index(i)) = 1.0 / ch.k;
    m(y_index(i), y_index(i)) = ch.k;
    return GaussianState(st.n_modes(), m * st.mean(), m * cov * m.transpose());
}

/// Classical feed-forward displacement from the homodyne outcomes (iX, iY).
inline std::pair<double, double> displacement_rule(const SchemeParams& p,
                                                   std::pair<double, double> outcome) {
    const auto [ix, iy] = outcome;
    if (p.mixer == Mixer::BS) {
        const double c = std::sqrt(2.0) / p.eta.eta;
        return {c * ix, c * iy};
    }
    return {ix / (p.eta.eta * p.gain.g), -iy / (p.eta.eta * p.gain.G)};
}

namespace detail {

inline void check_density_matrix(const Eigen::MatrixXcd& rho) {
    if (rho.rows() != rho.cols() || rho.rows() < 2)
        throw InvalidDensityMatrix("density matrix must be square, dim >= 2");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
        throw InvalidDensityMatrix("density matrix must be Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > 1e-8 || std::abs(rho.trace().imag()) > 1e-8)
        throw InvalidDensityMatrix("density matrix must have unit trace");
}

} // namespace detail

/// Operator-sum application of the channel on a truncated density matrix:
/// rho_out = Int dx dy S(eps) D((x+yj)/2) rho D^dag S^dag G_sigma(x, y),
/// by Gauss-Hermite quadrature over the noise kernel. Serves as the
/// operator-sum oracle for the fidelity engine.
inline Eigen::MatrixXcd apply_channel_fock(const TeleportChannel& ch,
                                           const Eigen::MatrixXcd& rho_in, int dim,
                                           const QuadratureGrid& grid = {}) {
    detail::check_density_matrix(rho_in);
    if (rho_in.rows() != dim)
        throw InvalidParameter("apply_channel_fock: rho dimension mismatch");
    grid.validate();

    const bool squeezed = ch.epsilon != 0.0;
    Eigen::MatrixXcd s;
    if (squeezed) s = squeeze_matrix(ch.epsilon, dim).cast<Complex>();

    if (ch.sigma_sq == 0.0) {
        if (!squeezed) return rho_in;
        return s * rho_in * s.adjoint();
    }

    auto evaluate = [&](int n) {
        const GaussHermiteRule& rule = gauss_hermite_rule(n);
        const double scale = std::sqrt(2.0 * ch.sigma_sq);
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const Complex alpha(scale * rule.nodes[i] / 2.0, scale * rule.nodes[j] / 2.0);
                const Eigen::MatrixXcd d = displacement_matrix(alpha, dim);
                Eigen::MatrixXcd u = squeezed ? Eigen::MatrixXcd(s * d) : d;
                out.noalias() += (rule.weights[i] * rule.weights[j] / M_PI) *
                                 (u * rho_in * u.adjoint());
            }
        }
        return out;
    };

    int n = std::max(grid.nodes_per_axis / 2, 24);
    Eigen::MatrixXcd out = evaluate(n);
    constexpr int kMaxDoublings = 3;
    for (int round = 0; round < kMaxDoublings; ++round) {
        const Eigen::MatrixXcd refined = evaluate(2 * n);
        const double trace_shift = std::abs((refined - out).trace());
        const double elem_shift = (refined - out).cwiseAbs().maxCoeff();
        out = refined;
        n *= 2;
        if (trace_shift <= 1e-6 && elem_shift <= grid.rel_tol) {
            if (std::abs(out.trace().real() - 1.0) > 1e-6)
                throw ConvergenceFailure(
                    "apply_channel_fock: trace leaked beyond the truncation; raise dim");
            return out;
        }
    }
    throw ConvergenceFailure("apply_channel_fock: quadrature did not settle");
}

} // namespace cvteleport
