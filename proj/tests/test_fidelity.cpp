#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "cvteleport/fidelity.hpp"

using namespace cvteleport;
using Catch::Approx;

TEST_CASE("BS characteristic functions", "[fidelity]") {
    for (const InputSpec& spec : {InputSpec::coherent({2.0, -1.0}), InputSpec::fock(3),
                                  InputSpec::thermal(0.7)})
        REQUIRE(chi_sq_bs(spec, 0.0, 0.0) == Approx(1.0));
    // coherent chi is alpha independent
    REQUIRE(chi_sq_bs(InputSpec::coherent({3.0, 3.0}), 1.2, -0.4) ==
            Approx(chi_sq_bs(InputSpec::coherent({0.0, 0.0}), 1.2, -0.4)));
    // fock(1) zero at r^2/4 = 1
    REQUIRE(chi_sq_bs(InputSpec::fock(1), 2.0, 0.0) == Approx(0.0).margin(1e-14));
    // thermal broadening
    REQUIRE(chi_sq_bs(InputSpec::thermal(1.3811), 2.0, 0.0) ==
            Approx(0.023232572451425775).epsilon(1e-12));
    REQUIRE_THROWS_AS(chi_sq_bs(InputSpec::epr(1.0), 0.0, 0.0), EprInputUnsupported);
}

TEST_CASE("PA characteristic functions", "[fidelity]") {
    SECTION("eps = 0 collapses to the BS form") {
        for (const InputSpec& spec :
             {InputSpec::coherent({0.8, 0.5}), InputSpec::fock(2), InputSpec::thermal(1.3811)}) {
            const PaChiEvaluator chi(spec, 0.0);
            for (auto [x, y] : {std::pair{0.0, 0.0}, {1.0, 0.5}, {-2.0, 1.5}})
                REQUIRE(chi(x, y) == Approx(chi_sq_bs(spec, x, y)).margin(1e-8));
        }
    }
    SECTION("squeezing strictly reduces the coherent overlap") {
        const PaChiEvaluator chi(InputSpec::coherent({1.0, 1.0}), 0.4);
        REQUIRE(chi(0.0, 0.0) < 1.0);
    }
    SECTION("vacuum-squeeze overlap") {
        const double eps = 0.9;
        REQUIRE(chi_sq_pa(InputSpec::fock(0), 0.0, 0.0, eps) ==
                Approx(1.0 / std::cosh(eps)).epsilon(1e-9));
    }
    SECTION("coherent truncation matches the closed-form overlap") {
        const Complex alpha(1.3, -0.7);
        const PaChiEvaluator chi(InputSpec::coherent(alpha), 0.35);
        for (auto [x, y] : {std::pair{0.4, -1.0}, {2.0, 1.0}}) {
            const Complex beta(x / 2.0, y / 2.0);
            const double expect = std::norm(squeeze_coherent_overlap(alpha, alpha + beta, 0.35));
            REQUIRE(chi(x, y) == Approx(expect).margin(1e-10));
        }
    }
}

TEST_CASE("closed-form fidelities", "[fidelity]") {
    SECTION("BS coherent equals eta^2") {
        REQUIRE(closed_form_fidelity(SchemeParams::bs(1.0), InputSpec::coherent({3, 3})).value ==
                Approx(1.0));
        REQUIRE(closed_form_fidelity(SchemeParams::bs(0.9), InputSpec::coherent({3, 3})).value ==
                Approx(0.81).epsilon(1e-12));
    }
    SECTION("BS thermal") {
        const FidelityResult r =
            closed_form_fidelity(SchemeParams::bs(0.9), InputSpec::thermal(1.3811));
        REQUIRE(r.value == Approx(0.5312109379611206).epsilon(1e-12));
        REQUIRE(r.method == FidelityMethod::ClosedForm);
    }
    SECTION("PA lossless exact form and its large-G approximation") {
        const FidelityResult r =
            closed_form_fidelity(SchemeParams::pa(1.0, 3.0), InputSpec::coherent({3, 3}));
        REQUIRE(r.value == Approx(0.9995454343502171).epsilon(1e-12));
        REQUIRE(std::abs(r.value - std::exp(-18.0 / (4.0 * std::pow(std::cosh(3.0), 4)))) <
                1e-4);
    }
    SECTION("PA large-G form") {
        const FidelityResult r =
            closed_form_fidelity(SchemeParams::pa(0.7, 3.0), InputSpec::coherent({3, 3}));
        REQUIRE(r.value == Approx(0.9944540871799437).epsilon(1e-10));
    }
    SECTION("unsupported combinations") {
        REQUIRE_THROWS_AS(closed_form_fidelity(SchemeParams::bs(0.9), InputSpec::fock(2)),
                          NoClosedForm);
        REQUIRE_THROWS_AS(closed_form_fidelity(SchemeParams::pa(0.9, 2.0), InputSpec::fock(2)),
                          NoClosedForm);
        REQUIRE_THROWS_AS(
            closed_form_fidelity(SchemeParams::pa(0.9, 2.0), InputSpec::thermal(1.0)),
            NoClosedForm);
    }
}

TEST_CASE("entanglement fidelity: BS scheme", "[fidelity]") {
    SECTION("lossless channel is faithful for every input") {
        for (const InputSpec& spec :
             {InputSpec::coherent({3, 3}), InputSpec::fock(4), InputSpec::thermal(1.3811)})
            REQUIRE(entanglement_fidelity(SchemeParams::bs(1.0), spec).value == Approx(1.0));
    }
    SECTION("coherent closed form reports itself") {
        const FidelityResult r =
            entanglement_fidelity(SchemeParams::bs(0.9), InputSpec::coherent({3, 3}));
        REQUIRE(r.value == Approx(0.81).epsilon(1e-12));
        REQUIRE(r.method == FidelityMethod::ClosedForm);
    }
    SECTION("fock(1) quadrature against the radial Laguerre oracle") {
        const FidelityResult r =
            entanglement_fidelity(SchemeParams::bs(0.9), InputSpec::fock(1));
        REQUIRE(r.method == FidelityMethod::Quadrature);
        REQUIRE(r.value == Approx(0.560682).margin(1e-5));
    }
    SECTION("fock(N) ordering at fixed loss") {
        double prev = 1.0;
        for (int n : {1, 2, 3, 4, 5}) {
            const double f =
                entanglement_fidelity(SchemeParams::bs(0.9), InputSpec::fock(n)).value;
            REQUIRE(f < prev);
            prev = f;
        }
        // frozen oracle values for N = 3, 5
        REQUIRE(entanglement_fidelity(SchemeParams::bs(0.9), InputSpec::fock(3)).value ==
                Approx(0.3483248699322016).margin(1e-5));
        REQUIRE(entanglement_fidelity(SchemeParams::bs(0.9), InputSpec::fock(5)).value ==
                Approx(0.26541376577509307).margin(1e-5));
    }
    SECTION("quadrature agrees with closed form where both exist") {
        for (double eta : {0.6, 0.75, 0.9}) {
            const TeleportChannel ch = make_channel(SchemeParams::bs(eta));
            const InputSpec coh = InputSpec::coherent({3, 3});
            const IntegralResult quad = gaussian_weighted_integral_2d(
                [&](double x, double y) { return chi_sq_bs(coh, x, y); }, ch.sigma_sq);
            REQUIRE(quad.value == Approx(eta * eta).margin(1e-6));
            const InputSpec th = InputSpec::thermal(1.3811);
            const IntegralResult quad_th = gaussian_weighted_integral_2d(
                [&](double x, double y) { return chi_sq_bs(th, x, y); }, ch.sigma_sq);
            REQUIRE(quad_th.value ==
                    Approx(closed_form_fidelity(SchemeParams::bs(eta), th).value).margin(1e-6));
        }
    }
}

TEST_CASE("entanglement fidelity: PA scheme", "[fidelity]") {
    SECTION("coherent(3+3j) at eta = 0.7, R = 3 (independent quadrature oracle)") {
        const FidelityResult r =
            entanglement_fidelity(SchemeParams::pa(0.7, 3.0), InputSpec::coherent({3, 3}));
        REQUIRE(r.value == Approx(0.9944418646102839).margin(2e-5));
        REQUIRE(std::abs(r.value - 0.9944540871799437) < 1e-3); // large-G form
    }
    SECTION("large R approaches the BS formula with the PA noise") {
        const SchemeParams p = SchemeParams::pa(0.7, 6.0);
        const double f = entanglement_fidelity(p, InputSpec::coherent({3, 3})).value;
        const double sig = make_channel(p).sigma_sq;
        REQUIRE(f == Approx(1.0 / (1.0 + sig / 2.0)).margin(1e-4));
    }
    SECTION("large-R limit restores unit fidelity under loss") {
        const double f1 =
            entanglement_fidelity(SchemeParams::pa(0.7, 1.0), InputSpec::coherent({3, 3})).value;
        const double f3 =
            entanglement_fidelity(SchemeParams::pa(0.7, 3.0), InputSpec::coherent({3, 3})).value;
        const double f6 =
            entanglement_fidelity(SchemeParams::pa(0.7, 6.0), InputSpec::coherent({3, 3})).value;
        REQUIRE(f6 > f3);
        REQUIRE(f3 > f1);
        REQUIRE(f6 > 0.99);
    }
    SECTION("fock inputs through the squeeze-displace sandwich") {
        // frozen matrix-truncation oracle values at eta = 0.7
        REQUIRE(entanglement_fidelity(SchemeParams::pa(0.7, 1.0), InputSpec::fock(1)).value ==
                Approx(0.5239626695157921).margin(2e-5));
        REQUIRE(entanglement_fidelity(SchemeParams::pa(0.7, 3.0), InputSpec::fock(5)).value ==
                Approx(0.945486733991143).margin(2e-5));
    }
    SECTION("thermal input by nested quadrature (frozen oracle)") {
        const FidelityResult r =
            entanglement_fidelity(SchemeParams::pa(0.8, 2.0), InputSpec::thermal(1.3811));
        REQUIRE(r.value == Approx(0.9260210851282484).margin(5e-5));
    }
    SECTION("monotone in eta for both schemes") {
        for (const InputSpec& spec : {InputSpec::coherent({3, 3}), InputSpec::fock(2)}) {
            double prev_bs = 0.0, prev_pa = 0.0;
            for (double eta : {0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
                const double f_bs = entanglement_fidelity(SchemeParams::bs(eta), spec).value;
                const double f_pa =
                    entanglement_fidelity(SchemeParams::pa(eta, 2.0), spec).value;
                REQUIRE(f_bs >= prev_bs - 1e-9);
                REQUIRE(f_pa >= prev_pa - 1e-9);
                prev_bs = f_bs;
                prev_pa = f_pa;
            }
        }
    }
}

TEST_CASE("operator-sum oracle", "[fidelity][oracle]") {
    SECTION("identity channel on a Fock state") {
        const FidelityResult r =
            fidelity_via_fock_oracle(SchemeParams::bs(1.0), InputSpec::fock(3), 32);
        REQUIRE(r.value == Approx(1.0).margin(1e-10));
    }
    SECTION("BS coherent matches the closed form") {
        const FidelityResult r = fidelity_via_fock_oracle(
            SchemeParams::bs(0.9), InputSpec::coherent({0.5, 0.3}), 64);
        REQUIRE(r.value == Approx(0.81).margin(1e-4));
    }
    SECTION("BS fock(1) matches the radial oracle value") {
        const FidelityResult r =
            fidelity_via_fock_oracle(SchemeParams::bs(0.9), InputSpec::fock(1), 64);
        REQUIRE(r.value == Approx(0.560682).margin(1e-3));
    }
    SECTION("mixed inputs are rejected") {
        REQUIRE_THROWS_AS(
            fidelity_via_fock_oracle(SchemeParams::bs(0.9), InputSpec::thermal(1.0), 32),
            InvalidParameter);
    }
}
