#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include "cvteleport/errors.hpp"
#include "cvteleport/gaussian_state.hpp"
#include "cvteleport/teleport_channel.hpp"

namespace cvteleport {

/// Seedable Gaussian sampler: mt19937_64 with the Marsaglia polar method, so
/// draws are identical across standard libraries for a given seed.
class GaussianSampler {
  public:
    explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

    double standard_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(q) / q);
        spare_ = v * factor;
        have_spare_ = true;
        return u * factor;
    }

    double normal(double mean, double variance) {
        return mean + std::sqrt(variance) * standard_normal();
    }

  private:
    double uniform() {
        // 53-bit mantissa in [0, 1)
        return (engine_() >> 11) * (1.0 / 9007199254740992.0);
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// One protocol pass: homodyne readings and the displaced conditional state
/// of the remote mode.
struct ProtocolRun {
    std::pair<double, double> outcome; // (iX, iY)
    GaussianState conditional_out;     // 1 mode, after feed-forward
    SchemeParams scheme;
};

namespace detail {

struct MixedState {
    GaussianState state;
    int x_arm; // mode read out in X
    int y_arm; // mode read out in Y
};

/// Modes: 0 = input field, 1 = resource half entering the mixer, 2 = remote
/// half. The arm assignment makes channel_model's displacement rule the
/// faithful feed-forward for this mixer convention.
inline MixedState mix_and_lose(const SchemeParams& p, const GaussianState& input) {
    if (input.n_modes() != 1)
        throw InvalidParameter("protocol: input must be a single mode");
    GaussianState st = tensor(input, epr_state(p.s_channel));
    int x_arm, y_arm;
    if (p.mixer == Mixer::BS) {
        st = apply_bs(st, 1, 0, BeamSplitterParams::balanced());
        x_arm = 1;
        y_arm = 0;
    } else {
        st = apply_pa(st, 0, 1, p.gain);
        x_arm = 0;
        y_arm = 1;
    }
    st = apply_loss(st, 0, p.eta);
    st = apply_loss(st, 1, p.eta);
    return {std::move(st), x_arm, y_arm};
}

/// Deterministic version of the measurement stage: condition on given
/// homodyne values, then feed forward. Shared by sampling and the exact
/// moment computation.
inline GaussianState conditional_output(const SchemeParams& p, const MixedState& mixed,
                                        double ix, double iy) {
    const HomodyneOutcome first =
        homodyne_condition(mixed.state, mixed.x_arm, Quadrature::X, ix);
    const int y_arm_after = (mixed.y_arm > mixed.x_arm) ? mixed.y_arm - 1 : mixed.y_arm;
    const HomodyneOutcome second =
        homodyne_condition(first.conditional, y_arm_after, Quadrature::Y, iy);
    const auto [dx, dy] = displacement_rule(p, {ix, iy});
    return displace(second.conditional, 0, dx, dy);
}

} // namespace detail

/// One Monte-Carlo run of the full protocol: resource preparation, mixing,
/// detection loss, sequential homodyne sampling, feed-forward displacement.
/// Requires finite resource squeezing (the outcome law is improper at s = inf).
inline ProtocolRun run_once(const SchemeParams& p, const GaussianState& input,
                            GaussianSampler& rng) {
    if (std::isinf(p.s_channel))
        throw RequiresFiniteSqueezing("run_once: sampling needs finite s_channel");
    const detail::MixedState mixed = detail::mix_and_lose(p, input);

    const int x_idx = x_index(mixed.x_arm);
    const double ix = rng.normal(mixed.state.mean()(x_idx),
                                 mixed.state.cov()(x_idx, x_idx));
    const HomodyneOutcome first =
        homodyne_condition(mixed.state, mixed.x_arm, Quadrature::X, ix);

    const int y_arm_after = (mixed.y_arm > mixed.x_arm) ? mixed.y_arm - 1 : mixed.y_arm;
    const int y_idx = y_index(y_arm_after);
    const double iy = rng.normal(first.conditional.mean()(y_idx),
                                 first.conditional.cov()(y_idx, y_idx));
    const HomodyneOutcome second =
        homodyne_condition(first.conditional, y_arm_after, Quadrature::Y, iy);

    const auto [dx, dy] = displacement_rule(p, {ix, iy});
    return ProtocolRun{{ix, iy}, displace(second.conditional, 0, dx, dy), p};
}

/// Ensemble moments of the teleported mode together with the channel-model
/// prediction and per-entry z-scores.
struct EnsembleStats {
    long n_runs;
    std::uint64_t seed;
    Eigen::Vector2d mean_est;
    Eigen::Vector2d mean_se;
    Eigen::Matrix2d cov_est;
    Eigen::Matrix2d cov_se;
    Eigen::Vector2d mean_pred;
    Eigen::Matrix2d cov_pred;
    Eigen::Vector2d mean_z;
    Eigen::Matrix2d cov_z;
};

/// Mix the ensemble of displaced conditional states: mean over outcomes and
/// the law of total covariance (conditional covariance is outcome-independent,
/// so only the conditional means scatter).
inline EnsembleStats run_ensemble(const SchemeParams& p, const GaussianState& input,
                                  long n_runs, std::uint64_t seed) {
    if (n_runs < 2) throw InvalidParameter("run_ensemble: need n_runs >= 2");
    GaussianSampler rng(seed);
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    Eigen::Matrix2d sum_sq = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d cond_cov = Eigen::Matrix2d::Zero();
    for (long i = 0; i < n_runs; ++i) {
        const ProtocolRun run = run_once(p, input, rng);
        const Eigen::Vector2d m = run.conditional_out.mean();
        sum += m;
        sum_sq += m * m.transpose();
        if (i == 0) cond_cov = run.conditional_out.cov();
    }
    const double n = static_cast<double>(n_runs);
    EnsembleStats stats;
    stats.n_runs = n_runs;
    stats.seed = seed;
    stats.mean_est = sum / n;
    const Eigen::Matrix2d scatter =
        (sum_sq - sum * stats.mean_est.transpose()) / (n - 1.0);
    stats.cov_est = cond_cov + scatter;
    for (int i = 0; i < 2; ++i) stats.mean_se(i) = std::sqrt(scatter(i, i) / n);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            stats.cov_se(i, j) = std::sqrt(
                (scatter(i, i) * scatter(j, j) + scatter(i, j) * scatter(i, j)) / (n - 1.0));

    const GaussianState pred = apply_channel_gaussian(make_channel(p), input, 0);
    stats.mean_pred = pred.mean();
    stats.cov_pred = pred.cov();
    for (int i = 0; i < 2; ++i)
        stats.mean_z(i) = (stats.mean_est(i) - stats.mean_pred(i)) / stats.mean_se(i);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            stats.cov_z(i, j) =
                (stats.cov_est(i, j) - stats.cov_pred(i, j)) / stats.cov_se(i, j);
    return stats;
}

/// Exact output moments of the protocol at finite s: the displaced
/// conditional mean is affine in the outcomes, so the unconditional moments
/// follow from the outcome covariance without sampling.
struct ProtocolMoments {
    Eigen::Vector2d mean;
    Eigen::Matrix2d cov;
};

inline ProtocolMoments exact_output_moments(const SchemeParams& p,
                                            const GaussianState& input) {
    if (std::isinf(p.s_channel))
        throw RequiresFiniteSqueezing("exact_output_moments: needs finite s_channel");
    const detail::MixedState mixed = detail::mix_and_lose(p, input);

    const GaussianState base = detail::conditional_output(p, mixed, 0.0, 0.0);
    const Eigen::Vector2d b = base.mean();
    Eigen::Matrix2d a;
    a.col(0) = detail::conditional_output(p, mixed, 1.0, 0.0).mean() - b;
    a.col(1) = detail::conditional_output(p, mixed, 0.0, 1.0).mean() - b;

    const int mx = x_index(mixed.x_arm), my = y_index(mixed.y_arm);
    Eigen::Vector2d outcome_mean(mixed.state.mean()(mx), mixed.state.mean()(my));
    Eigen::Matrix2d outcome_cov;
    outcome_cov << mixed.state.cov()(mx, mx), mixed.state.cov()(mx, my),
        mixed.state.cov()(my, mx), mixed.state.cov()(my, my);

    ProtocolMoments moments;
    moments.mean = b + a * outcome_mean;
    moments.cov = base.cov() + a * outcome_cov * a.transpose();
    return moments;
}

} // namespace cvteleport
