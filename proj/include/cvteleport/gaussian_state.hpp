#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "cvteleport/errors.hpp"

namespace cvteleport {

/// Quadrature convention: X = a + a^dag, Y = (a - a^dag)/j, vacuum variance 1
/// per quadrature. Components are ordered (x1, y1, x2, y2, ...).
inline constexpr int x_index(int mode) { return 2 * mode; }
inline constexpr int y_index(int mode) { return 2 * mode + 1; }

/// Gain pair of a parametric amplifier, G = cosh R, g = sinh R.
struct GainPair {
    double R;
    double G;
    double g;

    explicit GainPair(double gain_parameter)
        : R(gain_parameter), G(std::cosh(gain_parameter)), g(std::sinh(gain_parameter)) {
        if (!(R >= 0.0)) throw InvalidParameter("GainPair: R must be >= 0");
    }

    /// Squeeze ratio k = g/G = tanh R.
    double k() const { return g / G; }
};

/// Amplitude transmittance/reflectance of a beam splitter, t^2 + r^2 = 1.
struct BeamSplitterParams {
    double t;
    double r;

    BeamSplitterParams(double transmittance, double reflectance)
        : t(transmittance), r(reflectance) {
        if (t < 0.0 || t > 1.0 || r < 0.0 || r > 1.0 ||
            std::abs(t * t + r * r - 1.0) > 1e-12)
            throw InvalidParameter("BeamSplitterParams: need t,r in [0,1] with t^2+r^2=1");
    }

    static BeamSplitterParams balanced() {
        const double c = 1.0 / std::sqrt(2.0);
        return BeamSplitterParams(c, c);
    }
};

/// Amplitude transmissivity of the detection-loss beam splitter, eta in (0, 1].
struct LossParams {
    double eta;

    explicit LossParams(double transmissivity) : eta(transmissivity) {
        if (!(eta > 0.0) || eta > 1.0)
            throw InvalidParameter("LossParams: eta must be in (0, 1]");
    }
};

/// Tagged description of the state to be teleported.
struct InputSpec {
    enum class Kind { Coherent, Fock, Thermal, Epr };

    Kind kind;
    std::complex<double> alpha{0.0, 0.0}; // coherent amplitude
    int N = 0;                            // Fock occupation
    double nbar = 0.0;                    // thermal mean photon number
    double s = 0.0;                       // EPR squeezing parameter

    static InputSpec coherent(std::complex<double> amplitude) {
        InputSpec spec;
        spec.kind = Kind::Coherent;
        spec.alpha = amplitude;
        return spec;
    }
    static InputSpec fock(int occupation) {
        if (occupation < 0) throw InvalidParameter("InputSpec: Fock N must be >= 0");
        InputSpec spec;
        spec.kind = Kind::Fock;
        spec.N = occupation;
        return spec;
    }
    static InputSpec thermal(double mean_photons) {
        if (mean_photons < 0.0) throw InvalidParameter("InputSpec: nbar must be >= 0");
        InputSpec spec;
        spec.kind = Kind::Thermal;
        spec.nbar = mean_photons;
        return spec;
    }
    static InputSpec epr(double squeezing) {
        InputSpec spec;
        spec.kind = Kind::Epr;
        spec.s = squeezing;
        return spec;
    }
};

/// Multimode Gaussian state held as a mean vector and covariance matrix of
/// second central moments. All operations are pure and return new values.
class GaussianState {
  public:
    GaussianState(int modes, Eigen::VectorXd mean_in, Eigen::MatrixXd cov_in)
        : n_modes_(modes), mean_(std::move(mean_in)), cov_(std::move(cov_in)) {
        if (n_modes_ < 1) throw InvalidParameter("GaussianState: need at least one mode");
        const int d = 2 * n_modes_;
        if (mean_.size() != d || cov_.rows() != d || cov_.cols() != d)
            throw InvalidParameter("GaussianState: dimension mismatch");
        symmetrize();
    }

    int n_modes() const { return n_modes_; }
    int dim() const { return 2 * n_modes_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }

    double mean_x(int mode) const { return mean_(x_index(mode)); }
    double mean_y(int mode) const { return mean_(y_index(mode)); }
    double var_x(int mode) const { return cov_(x_index(mode), x_index(mode)); }
    double var_y(int mode) const { return cov_(y_index(mode), y_index(mode)); }

    /// Full invariant check: symmetry and positive semidefiniteness
    /// (eigenvalues >= -1e-10). Used by tests; operations keep it implicitly.
    bool is_physical() const {
        if (((cov_ - cov_.transpose()).cwiseAbs().maxCoeff()) > 1e-12) return false;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff() >= -1e-10;
    }

  private:
    void symmetrize() { cov_ = ((cov_ + cov_.transpose()) / 2.0).eval(); }

    int n_modes_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
};

/// n-mode vacuum: zero mean, identity covariance.
inline GaussianState vacuum_state(int modes) {
    return GaussianState(modes, Eigen::VectorXd::Zero(2 * modes),
                         Eigen::MatrixXd::Identity(2 * modes, 2 * modes));
}

/// Coherent state |alpha>, alpha = a + bj: mean (2a, 2b), identity covariance.
inline GaussianState coherent_state(std::complex<double> alpha) {
    Eigen::VectorXd mean(2);
    mean << 2.0 * alpha.real(), 2.0 * alpha.imag();
    return GaussianState(1, std::move(mean), Eigen::MatrixXd::Identity(2, 2));
}

/// Thermal state with mean photon number nbar: covariance (2 nbar + 1) I.
inline GaussianState thermal_state(double nbar) {
    if (nbar < 0.0) throw InvalidParameter("thermal_state: nbar must be >= 0");
    return GaussianState(1, Eigen::VectorXd::Zero(2),
                         (2.0 * nbar + 1.0) * Eigen::MatrixXd::Identity(2, 2));
}

/// Two-mode squeezed (EPR) state with squeezing parameter s:
/// var(x1+x2) = var(y1-y2) = 2 e^{-2s}, var(x1-x2) = var(y1+y2) = 2 e^{2s}.
inline GaussianState epr_state(double s) {
    const double c = std::cosh(2.0 * s);
    const double sh = std::sinh(2.0 * s);
    Eigen::MatrixXd cov = c * Eigen::MatrixXd::Identity(4, 4);
    cov(x_index(0), x_index(1)) = cov(x_index(1), x_index(0)) = -sh;
    cov(y_index(0), y_index(1)) = cov(y_index(1), y_index(0)) = sh;
    return GaussianState(2, Eigen::VectorXd::Zero(4), std::move(cov));
}

/// Dispatch on an InputSpec. Fock states are rejected: they are handled on
/// the Fock-basis channel path only.
inline GaussianState prepare_state(const InputSpec& spec) {
    switch (spec.kind) {
        case InputSpec::Kind::Coherent: return coherent_state(spec.alpha);
        case InputSpec::Kind::Thermal: return thermal_state(spec.nbar);
        case InputSpec::Kind::Epr: return epr_state(spec.s);
        case InputSpec::Kind::Fock:
            throw NonGaussianInput("prepare_state: Fock states are not Gaussian");
    }
    throw InvalidParameter("prepare_state: unknown input kind");
}

/// Tensor product: block-diagonal covariance, concatenated means; modes of b
/// are shifted by a.n_modes().
inline GaussianState tensor(const GaussianState& a, const GaussianState& b) {
    const int modes = a.n_modes() + b.n_modes();
    Eigen::VectorXd mean(2 * modes);
    mean << a.mean(), b.mean();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
    cov.topLeftCorner(a.dim(), a.dim()) = a.cov();
    cov.bottomRightCorner(b.dim(), b.dim()) = b.cov();
    return GaussianState(modes, std::move(mean), std::move(cov));
}

namespace detail {

inline void check_mode_pair(const GaussianState& st, int i, int j, const char* who) {
    if (i == j) throw InvalidModePair(std::string(who) + ": modes must differ");
    if (i < 0 || j < 0 || i >= st.n_modes() || j >= st.n_modes())
        throw InvalidModePair(std::string(who) + ": mode index out of range");
}

inline void check_mode(const GaussianState& st, int i, const char* who) {
    if (i < 0 || i >= st.n_modes())
        throw InvalidParameter(std::string(who) + ": mode index out of range");
}

inline GaussianState apply_linear(const GaussianState& st, const Eigen::MatrixXd& m) {
    return GaussianState(st.n_modes(), m * st.mean(),
                         m * st.cov() * m.transpose());
}

} // namespace detail

/// Beam splitter on modes (i, j): X_i -> t X_i + r X_j, X_j -> t X_j - r X_i,
/// same for Y. Symplectic for t^2 + r^2 = 1.
inline GaussianState apply_bs(const GaussianState& st, int i, int j,
                              const BeamSplitterParams& p) {
    detail::check_mode_pair(st, i, j, "apply_bs");
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(st.dim(), st.dim());
    for (int q = 0; q < 2; ++q) {
        const int a = 2 * i + q, b = 2 * j + q;
        m(a, a) = p.t;
        m(a, b) = p.r;
        m(b, b) = p.t;
        m(b, a) = -p.r;
    }
    return detail::apply_linear(st, m);
}

/// Parametric amplifier on modes (i, j): X_i -> G X_i + g X_j,
/// X_j -> G X_j + g X_i, Y_i -> G Y_i - g Y_j, Y_j -> G Y_j - g Y_i.
inline GaussianState apply_pa(const GaussianState& st, int i, int j,
                              const GainPair& gp) {
    detail::check_mode_pair(st, i, j, "apply_pa");
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(st.dim(), st.dim());
    const int xi = x_index(i), xj = x_index(j), yi = y_index(i), yj = y_index(j);
    m(xi, xi) = gp.G;
    m(xi, xj) = gp.g;
    m(xj, xj) = gp.G;
    m(xj, xi) = gp.g;
    m(yi, yi) = gp.G;
    m(yi, yj) = -gp.g;
    m(yj, yj) = gp.G;
    m(yj, yi) = -gp.g;
    return detail::apply_linear(st, m);
}

/// Pure loss on mode i: x -> eta x + sqrt(1-eta^2) x_vac, i.e. the mode's
/// mean and cross-covariances scale by eta and (1 - eta^2) vacuum noise is
/// added on its diagonal.
inline GaussianState apply_loss(const GaussianState& st, int i, const LossParams& p) {
    detail::check_mode(st, i, "apply_loss");
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(st.dim(), st.dim());
    m(x_index(i), x_index(i)) = p.eta;
    m(y_index(i), y_index(i)) = p.eta;
    Eigen::VectorXd mean = m * st.mean();
    Eigen::MatrixXd cov = m * st.cov() * m.transpose();
    const double admix = 1.0 - p.eta * p.eta;
    cov(x_index(i), x_index(i)) += admix;
    cov(y_index(i), y_index(i)) += admix;
    return GaussianState(st.n_modes(), std::move(mean), std::move(cov));
}

/// Phase-space displacement of mode i; covariance untouched.
inline GaussianState displace(const GaussianState& st, int i, double dx, double dy) {
    detail::check_mode(st, i, "displace");
    Eigen::VectorXd mean = st.mean();
    mean(x_index(i)) += dx;
    mean(y_index(i)) += dy;
    return GaussianState(st.n_modes(), std::move(mean), st.cov());
}

enum class Quadrature { X, Y };

struct HomodyneOutcome {
    double marginal_mean;
    double marginal_var;
    GaussianState conditional; // measured mode removed, 2n-2 components
};

/// Homodyne detection of one quadrature of mode i with result `value`:
/// returns the outcome marginal and the conditional Gaussian state on the
/// remaining modes. The conditional covariance is outcome-independent.
inline HomodyneOutcome homodyne_condition(const GaussianState& st, int i,
                                          Quadrature quad, double value) {
    detail::check_mode(st, i, "homodyne_condition");
    if (st.n_modes() < 2)
        throw InvalidModeCount("homodyne_condition: nothing left after measuring the only mode");
    const int m = (quad == Quadrature::X) ? x_index(i) : y_index(i);
    const double marginal_mean = st.mean()(m);
    const double marginal_var = st.cov()(m, m);
    if (marginal_var <= 1e-14)
        throw DegenerateMarginal("homodyne_condition: zero-variance marginal");

    // Keep every component except both quadratures of the measured mode.
    const int keep_dim = st.dim() - 2;
    Eigen::VectorXi keep(keep_dim);
    for (int k = 0, out = 0; k < st.dim(); ++k)
        if (k != x_index(i) && k != y_index(i)) keep(out++) = k;

    Eigen::VectorXd mu(keep_dim);
    Eigen::VectorXd cross(keep_dim);
    Eigen::MatrixXd cov(keep_dim, keep_dim);
    for (int a = 0; a < keep_dim; ++a) {
        mu(a) = st.mean()(keep(a));
        cross(a) = st.cov()(keep(a), m);
        for (int b = 0; b < keep_dim; ++b) cov(a, b) = st.cov()(keep(a), keep(b));
    }
    mu += cross * ((value - marginal_mean) / marginal_var);
    cov -= (cross * cross.transpose()) / marginal_var;
    return HomodyneOutcome{marginal_mean, marginal_var,
                           GaussianState(st.n_modes() - 1, std::move(mu), std::move(cov))};
}

/// Mean and variance of the linear combination coeffs . (x1, y1, ...).
inline std::pair<double, double> quadrature_stats(const GaussianState& st,
                                                  const Eigen::VectorXd& coeffs) {
    if (coeffs.size() != st.dim())
        throw InvalidParameter("quadrature_stats: coefficient length mismatch");
    return {coeffs.dot(st.mean()), coeffs.dot(st.cov() * coeffs)};
}

/// <a^dag a> of mode i in the X = a + a^dag convention.
inline double mean_photon(const GaussianState& st, int i) {
    detail::check_mode(st, i, "mean_photon");
    const double mx = st.mean_x(i), my = st.mean_y(i);
    return (st.var_x(i) + st.var_y(i) + mx * mx + my * my - 2.0) / 4.0;
}

/// Symplectic form in (x1, y1, x2, y2, ...) ordering.
inline Eigen::MatrixXd symplectic_form(int modes) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
    for (int i = 0; i < modes; ++i) {
        omega(x_index(i), y_index(i)) = 1.0;
        omega(y_index(i), x_index(i)) = -1.0;
    }
    return omega;
}

} // namespace cvteleport
