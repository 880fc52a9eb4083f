#pragma once

#include <cmath>

#include "cvteleport/errors.hpp"
#include "cvteleport/gaussian_state.hpp"
#include "cvteleport/teleport_channel.hpp"

namespace cvteleport {

/// Duan-type inseparability: I_s < 4 certifies entanglement in the
/// X = a + a^dag convention (vacuum gives exactly 4).
struct InsepResult {
    double i_s;
    double normalized; // i_s / 4
    bool entangled;    // i_s < 4

    double dB() const { return 10.0 * std::log10(normalized); }
};

/// I_s = var(x1 - x2) + var(y1 + y2) of a two-mode Gaussian state.
inline InsepResult inseparability(const GaussianState& st) {
    if (st.n_modes() != 2)
        throw InvalidModeCount("inseparability: state must have exactly 2 modes");
    Eigen::VectorXd cx = Eigen::VectorXd::Zero(4), cy = Eigen::VectorXd::Zero(4);
    cx(x_index(0)) = 1.0;
    cx(x_index(1)) = -1.0;
    cy(y_index(0)) = 1.0;
    cy(y_index(1)) = 1.0;
    const double i_s = quadrature_stats(st, cx).second + quadrature_stats(st, cy).second;
    return InsepResult{i_s, i_s / 4.0, i_s < 4.0};
}

/// Inseparability of an EPR pair whose signal arm went through one
/// teleportation pass of the given scheme.
inline InsepResult teleported_epr_inseparability(const SchemeParams& p, double s_in) {
    const GaussianState in = epr_state(s_in);
    const TeleportChannel ch = make_channel(p);
    return inseparability(apply_channel_gaussian(ch, in, 1));
}

} // namespace cvteleport
