// Command-line front end: figure data reproduction and single-point
// computations, emitting deterministic CSV.

#include <CLI11.hpp>

#include <complex>
#include <cstdio>
#include <iostream>
#include <limits>
#include <string>

#include "cvteleport/fidelity.hpp"
#include "cvteleport/figures.hpp"
#include "cvteleport/inseparability.hpp"
#include "cvteleport/protocol.hpp"
#include "cvteleport/version.hpp"

namespace {

using namespace cvteleport;

constexpr int kExitUsage = 2;
constexpr int kExitConvergence = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parse "a+bj" style complex literals: "3+3j", "-1.5j", "2".
std::complex<double> parse_complex(const std::string& text) {
    if (text.empty()) throw UsageError("empty complex literal");
    std::string s = text;
    double re = 0.0, im = 0.0;
    if (s.back() == 'j') {
        s.pop_back();
        // split at the last +/- that is not a leading sign
        std::size_t split = std::string::npos;
        for (std::size_t i = s.size(); i-- > 1;) {
            if (s[i] == '+' || s[i] == '-') {
                split = i;
                break;
            }
        }
        std::size_t used = 0;
        if (split == std::string::npos) {
            im = s.empty() || s == "+" || s == "-" ? (s == "-" ? -1.0 : 1.0)
                                                   : std::stod(s, &used);
            if (used != 0 && used != s.size()) throw UsageError("bad complex: " + text);
        } else {
            re = std::stod(s.substr(0, split), &used);
            if (used != split) throw UsageError("bad complex: " + text);
            const std::string imag_part = s.substr(split);
            im = (imag_part == "+") ? 1.0
                 : (imag_part == "-") ? -1.0
                                      : std::stod(imag_part, &used);
        }
    } else {
        std::size_t used = 0;
        re = std::stod(s, &used);
        if (used != s.size()) throw UsageError("bad complex: " + text);
    }
    return {re, im};
}

double parse_s_channel(const std::string& text) {
    if (text == "inf" || text == "infinite" || text == "Inf")
        return std::numeric_limits<double>::infinity();
    return std::stod(text);
}

struct ComputeFlags {
    std::string scheme = "bs";
    double eta = 1.0;
    double R = 0.0;
    std::string s_channel = "inf";
    std::string input = "coherent";
    std::string alpha = "0";
    int n = 0;
    double nbar = 0.0;
    double s_in = -1.0;
    long runs = 100000;
    std::uint64_t seed = 1;
};

SchemeParams make_scheme(const ComputeFlags& f) {
    const double s = parse_s_channel(f.s_channel);
    if (f.scheme == "bs") return SchemeParams::bs(f.eta, s);
    if (f.scheme == "pa") {
        if (f.R <= 0.0) throw UsageError("--scheme pa requires --R > 0");
        return SchemeParams::pa(f.eta, f.R, s);
    }
    throw UsageError("--scheme must be bs or pa");
}

InputSpec make_input(const ComputeFlags& f) {
    if (f.input == "coherent") return InputSpec::coherent(parse_complex(f.alpha));
    if (f.input == "fock") return InputSpec::fock(f.n);
    if (f.input == "thermal") return InputSpec::thermal(f.nbar);
    throw UsageError("--input must be coherent, fock or thermal");
}

void print_row(const std::vector<std::pair<std::string, std::string>>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i)
        std::printf("%s%s", fields[i].first.c_str(), i + 1 < fields.size() ? "," : "\n");
    for (std::size_t i = 0; i < fields.size(); ++i)
        std::printf("%s%s", fields[i].second.c_str(), i + 1 < fields.size() ? "," : "\n");
}

int run_compute(const std::string& sub, const ComputeFlags& f) {
    if (sub == "channel") {
        const TeleportChannel ch = make_channel(make_scheme(f));
        print_row({{"k", csv::num(ch.k)}, {"sigma_sq", csv::num(ch.sigma_sq)}});
        return 0;
    }
    if (sub == "fidelity") {
        const FidelityResult r = entanglement_fidelity(make_scheme(f), make_input(f));
        print_row({{"value", csv::num(r.value)},
                   {"method", to_string(r.method)},
                   {"err_estimate", csv::num(r.err_estimate)}});
        return 0;
    }
    if (sub == "insep") {
        const InsepResult r = teleported_epr_inseparability(make_scheme(f), f.s_in);
        print_row({{"i_s", csv::num(r.i_s)},
                   {"normalized", csv::num(r.normalized)},
                   {"dB", csv::num(r.dB())},
                   {"entangled", r.entangled ? "true" : "false"}});
        return 0;
    }
    if (sub == "simulate") {
        const SchemeParams p = make_scheme(f);
        const InputSpec spec = make_input(f);
        if (spec.kind == InputSpec::Kind::Fock)
            throw UsageError("simulate covers Gaussian inputs only");
        const EnsembleStats st = run_ensemble(p, prepare_state(spec), f.runs, f.seed);
        std::printf("# cvteleport %s simulate runs=%ld seed=%llu\n", kVersion, st.n_runs,
                    static_cast<unsigned long long>(st.seed));
        std::printf("quantity,estimate,std_error,channel_prediction,z\n");
        const char* mean_names[2] = {"mean_x", "mean_y"};
        for (int i = 0; i < 2; ++i)
            std::printf("%s,%s,%s,%s,%s\n", mean_names[i], csv::num(st.mean_est(i)).c_str(),
                        csv::num(st.mean_se(i)).c_str(), csv::num(st.mean_pred(i)).c_str(),
                        csv::num(st.mean_z(i)).c_str());
        const char* cov_names[2][2] = {{"cov_xx", "cov_xy"}, {"cov_yx", "cov_yy"}};
        for (int i = 0; i < 2; ++i)
            for (int j = i; j < 2; ++j)
                std::printf("%s,%s,%s,%s,%s\n", cov_names[i][j],
                            csv::num(st.cov_est(i, j)).c_str(),
                            csv::num(st.cov_se(i, j)).c_str(),
                            csv::num(st.cov_pred(i, j)).c_str(),
                            csv::num(st.cov_z(i, j)).c_str());
        return 0;
    }
    throw UsageError("unknown compute subcommand: " + sub);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"continuous-variable teleportation simulator (BS / PA Bell measurement)"};
    app.set_version_flag("--version", std::string("cvteleport ") + kVersion);
    app.require_subcommand(1);

    // ----- fig -----
    FigureJob job;
    CLI::App* fig = app.add_subcommand("fig", "reproduce a figure data set as CSV");
    fig->add_option("id", job.figure_id, "fig2|fig3|fig4|fig5|fig6|fig7")->required();
    fig->add_option("--out", job.output_path, "output path (default: stdout)");
    fig->add_option("--eta-min", job.eta.min);
    fig->add_option("--eta-max", job.eta.max);
    fig->add_option("--eta-steps", job.eta.steps);
    fig->add_option("--r-min", job.r.min);
    fig->add_option("--r-max", job.r.max);
    fig->add_option("--r-steps", job.r.steps);
    std::string fig_s = "inf";
    fig->add_option("--s-channel", fig_s, "resource squeezing, number or 'inf'");
    std::uint64_t fig_seed = 0;
    fig->add_option("--seed", fig_seed, "accepted for interface parity; figures are deterministic");

    // ----- compute -----
    ComputeFlags flags;
    std::string compute_sub;
    CLI::App* compute = app.add_subcommand("compute", "single-point computation");
    compute->add_option("sub", compute_sub, "fidelity|insep|simulate|channel")->required();
    compute->add_option("--scheme", flags.scheme, "bs|pa")->required();
    compute->add_option("--eta", flags.eta, "detection transmissivity")->required();
    compute->add_option("--R", flags.R, "PA gain parameter");
    compute->add_option("--s-channel", flags.s_channel, "resource squeezing, number or 'inf'");
    compute->add_option("--input", flags.input, "coherent|fock|thermal");
    compute->add_option("--alpha", flags.alpha, "coherent amplitude, a+bj");
    compute->add_option("--n", flags.n, "Fock occupation");
    compute->add_option("--nbar", flags.nbar, "thermal mean photon number");
    compute->add_option("--s-in", flags.s_in, "input EPR squeezing (insep)");
    compute->add_option("--runs", flags.runs, "ensemble size (simulate)");
    compute->add_option("--seed", flags.seed, "RNG seed (simulate)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (fig->parsed()) {
            job.s_channel = parse_s_channel(fig_s);
            if (job.output_path.empty())
                run_figure(job, std::cout);
            else
                run_figure_to_path(job);
            return 0;
        }
        return run_compute(compute_sub, flags);
    } catch (const ConvergenceFailure& e) {
        std::fprintf(stderr, "convergence failure: %s\n", e.what());
        return kExitConvergence;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
}
