#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cvteleport/errors.hpp"
#include "cvteleport/fidelity.hpp"
#include "cvteleport/inseparability.hpp"
#include "cvteleport/version.hpp"

namespace cvteleport {

/// Inclusive uniform axis: steps values from min to max.
struct GridSpec {
    double min;
    double max;
    int steps;

    void validate() const {
        if (steps < 2) throw InvalidParameter("GridSpec: need at least 2 steps");
        if (!(max > min)) throw InvalidParameter("GridSpec: need max > min");
    }

    double at(int i) const { return min + (max - min) * i / (steps - 1); }
};

/// One figure reproduction job. Grids default to the desk-scale resolution;
/// figures that fix an axis ignore the other grid.
struct FigureJob {
    std::string figure_id;          // fig2 .. fig7
    GridSpec eta{0.5, 1.0, 51};
    GridSpec r{0.05, 4.0, 80};
    double s_channel = std::numeric_limits<double>::infinity();
    std::string output_path;        // empty = stdout
};

namespace csv {

inline std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string cell(const std::optional<double>& v) {
    return v ? num(*v) : std::string();
}

inline std::string grid_echo(const GridSpec& g) {
    return "[" + num(g.min) + "," + num(g.max) + "]x" + std::to_string(g.steps);
}

inline std::string s_channel_echo(double s) {
    return std::isinf(s) ? std::string("inf") : num(s);
}

} // namespace csv

namespace detail {

/// Figure cells are optional: a convergence failure leaves the cell empty
/// and is reported as a '#' warning line, never silently.
struct FigureTable {
    std::string params_echo;
    std::vector<std::string> warnings;
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> rows;
};

template <class Fn>
std::optional<double> guarded_cell(FigureTable& table, const std::string& where, Fn&& fn) {
    try {
        return fn();
    } catch (const ConvergenceFailure& err) {
        table.warnings.push_back("# warning: " + where + ": " + err.what());
        return std::nullopt;
    }
}

inline FigureTable build_fig2(const FigureJob& job) {
    FigureTable t;
    t.params_echo = "scheme=bs inputs=coherent,fock1,fock3,fock5 eta=" +
                    csv::grid_echo(job.eta) + " s_channel=" + csv::s_channel_echo(job.s_channel);
    t.columns = {"eta", "Fe_coherent", "Fe_N1", "Fe_N3", "Fe_N5"};
    const int fock_orders[] = {1, 3, 5};
    for (int i = 0; i < job.eta.steps; ++i) {
        const double eta = job.eta.at(i);
        std::vector<std::optional<double>> row{eta};
        const SchemeParams p = SchemeParams::bs(eta, job.s_channel);
        row.push_back(guarded_cell(t, "fig2 eta=" + csv::num(eta) + " coherent", [&] {
            return entanglement_fidelity(p, InputSpec::coherent({3.0, 3.0})).value;
        }));
        for (int n : fock_orders)
            row.push_back(guarded_cell(
                t, "fig2 eta=" + csv::num(eta) + " fock" + std::to_string(n),
                [&] { return entanglement_fidelity(p, InputSpec::fock(n)).value; }));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline FigureTable build_fig3(const FigureJob& job) {
    FigureTable t;
    t.params_echo = "scheme=pa input=coherent alpha=3+3j eta=" + csv::grid_echo(job.eta) +
                    " R=" + csv::grid_echo(job.r) +
                    " s_channel=" + csv::s_channel_echo(job.s_channel);
    t.columns = {"eta", "R", "Fe"};
    const InputSpec spec = InputSpec::coherent({3.0, 3.0});
    for (int ir = 0; ir < job.r.steps; ++ir) {
        const double r = job.r.at(ir);
        for (int ie = 0; ie < job.eta.steps; ++ie) {
            const double eta = job.eta.at(ie);
            std::vector<std::optional<double>> row{eta, r};
            row.push_back(guarded_cell(
                t, "fig3 eta=" + csv::num(eta) + " R=" + csv::num(r), [&] {
                    return entanglement_fidelity(SchemeParams::pa(eta, r, job.s_channel), spec)
                        .value;
                }));
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

inline FigureTable build_fig4(const FigureJob& job) {
    FigureTable t;
    t.params_echo = "scheme=pa input=fock N=1,5,10 eta=0.700000 R=" + csv::grid_echo(job.r) +
                    " s_channel=" + csv::s_channel_echo(job.s_channel) +
                    " bs_reference=constant";
    t.columns = {"R", "Fe_N1", "Fe_N5", "Fe_N10", "Fe_bs_N1", "Fe_bs_N5", "Fe_bs_N10"};
    const double eta = 0.7;
    const int fock_orders[] = {1, 5, 10};
    std::vector<std::optional<double>> bs_ref;
    for (int n : fock_orders)
        bs_ref.push_back(guarded_cell(t, "fig4 bs fock" + std::to_string(n), [&] {
            return entanglement_fidelity(SchemeParams::bs(eta, job.s_channel),
                                         InputSpec::fock(n))
                .value;
        }));
    for (int ir = 0; ir < job.r.steps; ++ir) {
        const double r = job.r.at(ir);
        std::vector<std::optional<double>> row{r};
        for (int n : fock_orders)
            row.push_back(guarded_cell(
                t, "fig4 R=" + csv::num(r) + " fock" + std::to_string(n), [&] {
                    return entanglement_fidelity(SchemeParams::pa(eta, r, job.s_channel),
                                                 InputSpec::fock(n))
                        .value;
                }));
        for (const auto& v : bs_ref) row.push_back(v);
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline FigureTable build_fig5(const FigureJob& job) {
    FigureTable t;
    t.params_echo = "input=fock N=5 eta=" + csv::grid_echo(job.eta) +
                    " R=1,2,3 s_channel=" + csv::s_channel_echo(job.s_channel);
    t.columns = {"eta", "Fe_R1", "Fe_R2", "Fe_R3", "Fe_bs"};
    const InputSpec spec = InputSpec::fock(5);
    for (int i = 0; i < job.eta.steps; ++i) {
        const double eta = job.eta.at(i);
        std::vector<std::optional<double>> row{eta};
        for (double r : {1.0, 2.0, 3.0})
            row.push_back(guarded_cell(
                t, "fig5 eta=" + csv::num(eta) + " R=" + csv::num(r), [&] {
                    return entanglement_fidelity(SchemeParams::pa(eta, r, job.s_channel), spec)
                        .value;
                }));
        row.push_back(guarded_cell(t, "fig5 eta=" + csv::num(eta) + " bs", [&] {
            return entanglement_fidelity(SchemeParams::bs(eta, job.s_channel), spec).value;
        }));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline FigureTable build_fig6(const FigureJob& job) {
    FigureTable t;
    t.params_echo = "input=epr s_in=-1 eta=" + csv::grid_echo(job.eta) +
                    " R=1,2,3 s_channel=" + csv::s_channel_echo(job.s_channel);
    t.columns = {"eta", "Is_bs", "Is_bs_dB", "Is_R1", "Is_R1_dB",
                 "Is_R2", "Is_R2_dB", "Is_R3", "Is_R3_dB"};
    const double s_in = -1.0;
    for (int i = 0; i < job.eta.steps; ++i) {
        const double eta = job.eta.at(i);
        std::vector<std::optional<double>> row{eta};
        auto push = [&](const SchemeParams& p) {
            const InsepResult r = teleported_epr_inseparability(p, s_in);
            row.push_back(r.normalized);
            row.push_back(r.dB());
        };
        push(SchemeParams::bs(eta, job.s_channel));
        for (double r : {1.0, 2.0, 3.0}) push(SchemeParams::pa(eta, r, job.s_channel));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline FigureTable build_fig7(const FigureJob& job) {
    FigureTable t;
    t.params_echo = "input=thermal nbar=1.381100 eta=" + csv::grid_echo(job.eta) +
                    " R=1,2,3 s_channel=" + csv::s_channel_echo(job.s_channel);
    t.columns = {"eta", "Fe_bs", "Fe_R1", "Fe_R2", "Fe_R3"};
    const InputSpec spec = InputSpec::thermal(1.3811);
    for (int i = 0; i < job.eta.steps; ++i) {
        const double eta = job.eta.at(i);
        std::vector<std::optional<double>> row{eta};
        row.push_back(guarded_cell(t, "fig7 eta=" + csv::num(eta) + " bs", [&] {
            return entanglement_fidelity(SchemeParams::bs(eta, job.s_channel), spec).value;
        }));
        for (double r : {1.0, 2.0, 3.0})
            row.push_back(guarded_cell(
                t, "fig7 eta=" + csv::num(eta) + " R=" + csv::num(r), [&] {
                    return entanglement_fidelity(SchemeParams::pa(eta, r, job.s_channel), spec)
                        .value;
                }));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline FigureTable build_table(const FigureJob& job) {
    job.eta.validate();
    job.r.validate();
    if (job.figure_id == "fig2") return build_fig2(job);
    if (job.figure_id == "fig3") return build_fig3(job);
    if (job.figure_id == "fig4") return build_fig4(job);
    if (job.figure_id == "fig5") return build_fig5(job);
    if (job.figure_id == "fig6") return build_fig6(job);
    if (job.figure_id == "fig7") return build_fig7(job);
    throw InvalidParameter("run_figure: unknown figure id " + job.figure_id);
}

} // namespace detail

/// Compute a figure's data and write deterministic CSV (UTF-8, LF, 6
/// decimals) to the stream. Identical jobs produce identical bytes.
inline void run_figure(const FigureJob& job, std::ostream& out) {
    const detail::FigureTable table = detail::build_table(job);
    out << "# cvteleport " << kVersion << " " << job.figure_id << " "
        << table.params_echo << "\n";
    for (const std::string& w : table.warnings) out << w << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        out << table.columns[c] << (c + 1 < table.columns.size() ? "," : "");
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << csv::cell(row[c]) << (c + 1 < row.size() ? "," : "");
        out << "\n";
    }
}

/// File-writing wrapper used by the CLI.
inline void run_figure_to_path(const FigureJob& job) {
    std::ofstream file(job.output_path, std::ios::binary);
    if (!file) throw Error("run_figure: cannot open " + job.output_path);
    run_figure(job, file);
    if (!file.good()) throw Error("run_figure: write failed for " + job.output_path);
}

} // namespace cvteleport
