#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "cvteleport/errors.hpp"
#include "cvteleport/fock_numerics.hpp"
#include "cvteleport/gaussian_state.hpp"
#include "cvteleport/teleport_channel.hpp"

namespace cvteleport {

enum class FidelityMethod { ClosedForm, Quadrature, FockOracle };

inline std::string to_string(FidelityMethod m) {
    switch (m) {
        case FidelityMethod::ClosedForm: return "closed-form";
        case FidelityMethod::Quadrature: return "quadrature";
        case FidelityMethod::FockOracle: return "fock-oracle";
    }
    return "?";
}

/// Entanglement fidelity F_e in [0, 1] with the numerical route that
/// produced it and an error estimate.
struct FidelityResult {
    double value;
    FidelityMethod method;
    double err_estimate;
};

namespace detail {

inline double clamp_fidelity(double value, const char* who) {
    if (value < -1e-6 || value > 1.0 + 1e-6)
        throw ConvergenceFailure(std::string(who) + ": fidelity escaped [0,1]");
    return std::min(1.0, std::max(0.0, value));
}

} // namespace detail

/// |chi_in(x, y)|^2 of the input state, chi_in = Tr[D((x+yj)/2) rho_in].
/// Coherent inputs give the alpha-independent Gaussian, Fock states the
/// Laguerre-modulated Gaussian, thermal states a broadened Gaussian.
inline double chi_sq_bs(const InputSpec& spec, double x, double y) {
    const double r4 = (x * x + y * y) / 4.0;
    switch (spec.kind) {
        case InputSpec::Kind::Coherent: return std::exp(-r4);
        case InputSpec::Kind::Fock: {
            const double l = laguerre(spec.N, r4);
            return std::exp(-r4) * l * l;
        }
        case InputSpec::Kind::Thermal: return std::exp(-r4 * (2.0 * spec.nbar + 1.0));
        case InputSpec::Kind::Epr:
            throw EprInputUnsupported("chi_sq_bs: score EPR inputs with inseparability");
    }
    throw InvalidParameter("chi_sq_bs: unknown input kind");
}

/// Evaluator of |chi_PA(x, y)|^2 = |Tr[S(eps) D((x+yj)/2) rho_in]|^2 with the
/// epsilon-dependent pieces precomputed. Coherent and Fock inputs go through
/// the truncated Fock route; thermal inputs average the coherent kernel over
/// the P representation by Gauss-Hermite quadrature in the alpha plane.
class PaChiEvaluator {
  public:
    PaChiEvaluator(const InputSpec& spec, double epsilon, int dim = 0,
                   int thermal_nodes = 40)
        : spec_(spec), eps_(epsilon) {
        if (epsilon < 0.0) throw InvalidParameter("PaChiEvaluator: epsilon must be >= 0");
        switch (spec.kind) {
            case InputSpec::Kind::Coherent: {
                const double a2 = std::norm(spec.alpha);
                dim_ = dim > 0 ? dim : pick_dim(a2);
                const Eigen::MatrixXd s = squeeze_matrix(eps_, dim_);
                const Eigen::VectorXcd c = coherent_amplitudes(spec.alpha, dim_);
                bra_row_ = c.adjoint() * s.cast<Complex>(); // row <alpha|S
                break;
            }
            case InputSpec::Kind::Fock: {
                dim_ = dim > 0 ? dim : std::max(64, 4 * spec.N + 32);
                const Eigen::MatrixXd s = squeeze_matrix(eps_, dim_);
                s_row_ = s.row(spec.N);
                break;
            }
            case InputSpec::Kind::Thermal: {
                // grow the alpha grid until probe evaluations settle
                build_thermal_nodes(thermal_nodes);
                for (int n = thermal_nodes; spec_.nbar > 0.0; n *= 2) {
                    const double probe = (*this)(1.5, -0.8) + (*this)(0.3, 0.2);
                    build_thermal_nodes(2 * n);
                    const double refined = (*this)(1.5, -0.8) + (*this)(0.3, 0.2);
                    if (std::abs(refined - probe) <= 1e-8 * std::max(refined, 1e-12)) {
                        build_thermal_nodes(n); // n was already converged
                        break;
                    }
                    if (2 * n >= 160)
                        throw ConvergenceFailure("PaChiEvaluator: alpha grid did not settle");
                }
                break;
            }
            case InputSpec::Kind::Epr:
                throw EprInputUnsupported(
                    "PaChiEvaluator: score EPR inputs with inseparability");
        }
    }

    double operator()(double x, double y) const {
        const Complex beta(x / 2.0, y / 2.0);
        switch (spec_.kind) {
            case InputSpec::Kind::Coherent: {
                const Eigen::VectorXcd c = coherent_amplitudes(spec_.alpha + beta, dim_);
                return std::norm((bra_row_ * c)(0, 0));
            }
            case InputSpec::Kind::Fock: {
                const Eigen::VectorXcd col = displaced_fock_column(beta, spec_.N, dim_);
                Complex chi(0.0, 0.0);
                for (int k = 0; k < dim_; ++k) chi += s_row_(k) * col(k);
                return std::norm(chi);
            }
            default: { // thermal
                // ln[phase * overlap] is quadratic in alpha and beta; the
                // alpha-only part is folded into the node weights, leaving one
                // exponential per node:
                //   kernel = exp(pb) * sum_i c0_i exp(alpha_i u + conj(alpha_i) v)
                const double t = std::tanh(eps_);
                const double sech = 1.0 / std::cosh(eps_);
                const Complex u = -std::conj(beta) - t * beta;
                const Complex v = sech * beta;
                const Complex pb = -0.5 * std::norm(beta) - 0.5 * t * beta * beta;
                Complex chi(0.0, 0.0);
                for (std::size_t i = 0; i < alpha_nodes_.size(); ++i) {
                    const Complex a = alpha_nodes_[i];
                    chi += thermal_prefactor_[i] * std::exp(a * u + std::conj(a) * v);
                }
                return std::norm(chi * std::exp(pb));
            }
        }
    }

    double epsilon() const { return eps_; }

  private:
    static int pick_dim(double a2) {
        const int needed = static_cast<int>(a2 + 8.0 * std::sqrt(a2 + 1.0)) + 16;
        int dim = 32;
        while (dim < needed && dim < 256) dim *= 2;
        return dim;
    }

    void build_thermal_nodes(int nodes) {
        const double t = std::tanh(eps_);
        const double sech = 1.0 / std::cosh(eps_);
        const double root_sech = std::sqrt(sech);
        if (spec_.nbar <= 0.0) {
            // P(alpha) collapses to a delta at the origin: vacuum input.
            alpha_nodes_ = {Complex(0.0, 0.0)};
            thermal_prefactor_ = {Complex(root_sech, 0.0)};
            return;
        }
        const GaussHermiteRule& rule = gauss_hermite_rule(nodes);
        const double scale = std::sqrt(spec_.nbar);
        alpha_nodes_.reserve(static_cast<std::size_t>(nodes) * nodes);
        thermal_prefactor_.reserve(alpha_nodes_.capacity());
        for (int i = 0; i < nodes; ++i)
            for (int k = 0; k < nodes; ++k) {
                const Complex a(scale * rule.nodes[i], scale * rule.nodes[k]);
                const Complex ac = std::conj(a);
                const Complex alpha_part =
                    -std::norm(a) * (1.0 - sech) + 0.5 * t * (ac * ac - a * a);
                alpha_nodes_.push_back(a);
                thermal_prefactor_.push_back(rule.weights[i] * rule.weights[k] / M_PI *
                                             root_sech * std::exp(alpha_part));
            }
    }

    InputSpec spec_;
    double eps_;
    int dim_ = 0;
    Eigen::Matrix<Complex, 1, Eigen::Dynamic> bra_row_;
    Eigen::VectorXd s_row_;
    std::vector<Complex> alpha_nodes_;
    std::vector<Complex> thermal_prefactor_;
};

/// One-off evaluation of |chi_PA|^2; sweeps should reuse a PaChiEvaluator.
inline double chi_sq_pa(const InputSpec& spec, double x, double y, double epsilon) {
    return PaChiEvaluator(spec, epsilon)(x, y);
}

/// Closed forms where they exist: BS coherent and thermal (exact), the
/// large-gain PA coherent form, and the exact lossless PA coherent form.
inline FidelityResult closed_form_fidelity(const SchemeParams& p, const InputSpec& spec) {
    const TeleportChannel ch = make_channel(p);
    if (p.mixer == Mixer::BS) {
        if (spec.kind == InputSpec::Kind::Coherent)
            return {detail::clamp_fidelity(1.0 / (1.0 + ch.sigma_sq / 2.0),
                                           "closed_form_fidelity"),
                    FidelityMethod::ClosedForm, 0.0};
        if (spec.kind == InputSpec::Kind::Thermal)
            return {detail::clamp_fidelity(
                        1.0 / (1.0 + ch.sigma_sq * (2.0 * spec.nbar + 1.0) / 2.0),
                        "closed_form_fidelity"),
                    FidelityMethod::ClosedForm, 0.0};
        throw NoClosedForm("closed_form_fidelity: no BS closed form for this input");
    }
    if (spec.kind != InputSpec::Kind::Coherent)
        throw NoClosedForm("closed_form_fidelity: PA closed forms are coherent-only");
    const double a2b2 = std::norm(spec.alpha);
    if (p.eta.eta == 1.0 && std::isinf(p.s_channel)) {
        const double f = std::exp(-2.0 * (ch.mu - 1.0) / ch.mu * a2b2) / ch.mu;
        return {detail::clamp_fidelity(f, "closed_form_fidelity"),
                FidelityMethod::ClosedForm, 0.0};
    }
    const double ratio = ch.nu / ch.mu;
    const double denom = 1.0 + ch.sigma_sq / 2.0;
    const double f = std::exp(-a2b2 * ratio * ratio / denom) / denom;
    return {detail::clamp_fidelity(f, "closed_form_fidelity"), FidelityMethod::ClosedForm,
            0.0};
}

/// Entanglement fidelity of the teleportation channel for coherent, Fock and
/// thermal inputs: F_e = Int dx dy |chi|^2 G_sigma(x, y), with closed forms
/// where available.
inline FidelityResult entanglement_fidelity(const SchemeParams& p, const InputSpec& spec,
                                            const QuadratureGrid& grid = {}) {
    if (spec.kind == InputSpec::Kind::Epr)
        throw EprInputUnsupported(
            "entanglement_fidelity: score EPR inputs with inseparability");
    const TeleportChannel ch = make_channel(p);
    if (p.mixer == Mixer::BS) {
        if (spec.kind == InputSpec::Kind::Coherent ||
            spec.kind == InputSpec::Kind::Thermal)
            return closed_form_fidelity(p, spec);
        auto integrand = [&](double x, double y) { return chi_sq_bs(spec, x, y); };
        const IntegralResult r = gaussian_weighted_integral_2d(integrand, ch.sigma_sq, grid);
        return {detail::clamp_fidelity(r.value, "entanglement_fidelity"),
                FidelityMethod::Quadrature, r.err_estimate};
    }
    const PaChiEvaluator chi(spec, ch.epsilon);
    const IntegralResult r = gaussian_weighted_integral_2d(
        [&](double x, double y) { return chi(x, y); }, ch.sigma_sq, grid);
    return {detail::clamp_fidelity(r.value, "entanglement_fidelity"),
            FidelityMethod::Quadrature, r.err_estimate};
}

/// Independent operator-sum oracle: push the (pure) input through
/// apply_channel_fock and take <phi_in|rho_out|phi_in>.
inline FidelityResult fidelity_via_fock_oracle(const SchemeParams& p,
                                               const InputSpec& spec, int dim,
                                               const QuadratureGrid& grid = {}) {
    Eigen::VectorXcd phi;
    switch (spec.kind) {
        case InputSpec::Kind::Coherent:
            phi = coherent_amplitudes(spec.alpha, dim);
            break;
        case InputSpec::Kind::Fock:
            if (spec.N >= dim)
                throw InvalidParameter("fidelity_via_fock_oracle: dim too small for N");
            phi = Eigen::VectorXcd::Zero(dim);
            phi(spec.N) = 1.0;
            break;
        default:
            throw InvalidParameter("fidelity_via_fock_oracle: pure inputs only");
    }
    const TeleportChannel ch = make_channel(p);
    Eigen::MatrixXcd rho = phi * phi.adjoint();
    // renormalise the truncated coherent projector before the channel
    rho /= rho.trace().real();
    const Eigen::MatrixXcd rho_out = apply_channel_fock(ch, rho, dim, grid);
    const double f = (phi.adjoint() * rho_out * phi)(0, 0).real();
    const double err = std::abs(1.0 - rho_out.trace().real()) + grid.rel_tol;
    return {detail::clamp_fidelity(f, "fidelity_via_fock_oracle"),
            FidelityMethod::FockOracle, err};
}

} // namespace cvteleport
