#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "varsolve/catalog.hpp"
#include "varsolve/energy.hpp"
#include "varsolve/spike_train.hpp"

using namespace varsolve;

namespace {

ProblemInstance linear_problem(int n, double lambda) {
    return ProblemInstance(second_difference_matrix(n),
                           Nonlinearity::shared(n, polynomial({0.0, 1.0})),
                           Perturbation::none(n), lambda);
}

} // namespace

TEST_CASE("problem instance construction") {
    SECTION("dimension mismatch") {
        REQUIRE_THROWS_AS(ProblemInstance(second_difference_matrix(3),
                                          Nonlinearity::shared(2, zero_function()),
                                          Perturbation::none(3), 1.0),
                          InvalidDimensionError);
    }
    SECTION("lambda must be positive") {
        REQUIRE_THROWS_AS(ProblemInstance(second_difference_matrix(2),
                                          Nonlinearity::shared(2, zero_function()),
                                          Perturbation::none(2), 0.0),
                          StructuralError);
    }
    SECTION("lipschitz check is recorded") {
        auto p = ProblemInstance(second_difference_matrix(2),
                                 Nonlinearity::shared(2, zero_function()),
                                 Perturbation::shared(2, sine(0.5, 1.0), 0.5), 1.0);
        REQUIRE(p.lipschitz_check.pass);
        REQUIRE(p.lipschitz_check.lipschitz == 0.5);
        // T = 1^t A 1 + n L = 2 + 2 * 0.5
        REQUIRE(p.constant_T() == 3.0);
    }
    SECTION("a failing hypothesis is recorded, not thrown") {
        auto p = ProblemInstance(second_difference_matrix(2),
                                 Nonlinearity::shared(2, zero_function()),
                                 Perturbation::shared(2, polynomial({0.0, 5.0}), 5.0), 1.0);
        REQUIRE_FALSE(p.lipschitz_check.pass);
    }
}

TEST_CASE("phi") {
    SECTION("anchored at zero") {
        auto p = linear_problem(4, 1.0);
        EnergyFunctional E(p);
        std::vector<double> zero(4, 0.0);
        REQUIRE(E.phi(zero) == 0.0);
        REQUIRE(E.psi(zero) == 0.0);
        REQUIRE(E.j_lambda(zero) == 0.0);
    }
    SECTION("pure quadratic when h = 0") {
        auto p = linear_problem(2, 1.0);
        EnergyFunctional E(p);
        std::vector<double> u = {1.0, 1.0};
        REQUIRE(E.phi(u) == 1.0);
    }
    SECTION("perturbation primitives subtract") {
        // h_k(t) = t/2: H_k(1) = 1/4 each, so phi = 1 - 2/4 = 1/2
        auto p = ProblemInstance(second_difference_matrix(2),
                                 Nonlinearity::shared(2, polynomial({0.0, 1.0})),
                                 Perturbation::shared(2, polynomial({0.0, 0.5}), 0.5), 1.0);
        EnergyFunctional E(p);
        std::vector<double> u = {1.0, 1.0};
        REQUIRE_THAT(E.phi(u), Catch::Matchers::WithinAbs(0.5, 1e-15));
    }
}

TEST_CASE("j_lambda") {
    SECTION("linear f at lambda 1 on the ones vector") {
        auto p = linear_problem(2, 1.0);
        EnergyFunctional E(p);
        std::vector<double> u = {1.0, 1.0};
        REQUIRE_THAT(E.j_lambda(u), Catch::Matchers::WithinAbs(0.0, 1e-15));
    }
    SECTION("constant-vector bound with T") {
        // J(b 1) <= (T/2) b^2 - lambda sum F_k(b)
        auto p = ProblemInstance(second_difference_matrix(3),
                                 Nonlinearity::shared(3, polynomial({0.0, 0.0, 1.0})),
                                 Perturbation::shared(3, sine(0.2, 1.0), 0.2), 0.7);
        EnergyFunctional E(p);
        const double T = p.constant_T();
        Rng rng(777);
        std::uniform_real_distribution<double> uni(-20.0, 20.0);
        for (int trial = 0; trial < 200; ++trial) {
            const double b = uni(rng);
            std::vector<double> s(3, b);
            const double bound = 0.5 * T * b * b - p.lambda * E.psi(s);
            REQUIRE(E.j_lambda(s) <= bound + 1e-9 * std::max(1.0, std::abs(bound)));
        }
    }
}

TEST_CASE("gradient") {
    SECTION("trivial solution at the origin") {
        auto p = linear_problem(3, 0.7);
        EnergyFunctional E(p);
        std::vector<double> zero(3, 0.0);
        REQUIRE(E.residual(zero) == 0.0);
    }
    SECTION("linear case reduces to (A - lambda I) u") {
        auto p = linear_problem(3, 0.6);
        EnergyFunctional E(p);
        Rng rng(1);
        std::uniform_real_distribution<double> uni(-2.0, 2.0);
        std::vector<double> u(3);
        for (double& v : u) v = uni(rng);
        auto g = E.gradient(u);
        std::vector<double> want(3);
        p.matrix.mul(u, want);
        for (int i = 0; i < 3; ++i) want[i] -= 0.6 * u[i];
        for (int i = 0; i < 3; ++i)
            REQUIRE_THAT(g[i], Catch::Matchers::WithinAbs(want[i], 1e-14));
    }
    SECTION("matches central differences of j_lambda") {
        Rng rng(20250101);
        std::uniform_real_distribution<double> uni(-3.0, 3.0);
        std::uniform_real_distribution<double> lam(0.2, 3.0);
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 2 + static_cast<int>(rng() % 5);
            auto p = ProblemInstance(
                second_difference_matrix(n),
                Nonlinearity::shared(n, polynomial({0.3, -0.7, 0.0, 0.5})),
                Perturbation::shared(n, sine(0.15, 1.3), 0.15 * 1.3), lam(rng));
            EnergyFunctional E(p);
            std::vector<double> u(n);
            for (double& v : u) v = uni(rng);
            auto g = E.gradient(u);
            for (int i = 0; i < n; ++i) {
                const double eps = 1e-5 * std::max(1.0, std::abs(u[i]));
                auto up = u, dn = u;
                up[i] += eps;
                dn[i] -= eps;
                const double fd = (E.j_lambda(up) - E.j_lambda(dn)) / (2.0 * eps);
                REQUIRE_THAT(fd, Catch::Matchers::WithinAbs(
                                     g[i], std::max(1e-6 * std::abs(g[i]), 1e-7)));
            }
        }
    }
}

TEST_CASE("coercivity certificate") {
    SECTION("zero vector is degenerate") {
        auto p = linear_problem(3, 1.0);
        EnergyFunctional E(p);
        auto rep = E.coercivity_certificate(std::vector<double>(3, 0.0));
        REQUIRE(rep.ok());
        REQUIRE(rep.phi == 0.0);
        REQUIRE(rep.lower_bound == 0.0);
    }
    SECTION("h = 0 collapses to the spectral sandwich") {
        auto p = linear_problem(4, 1.0);
        EnergyFunctional E(p);
        Rng rng(5);
        std::uniform_real_distribution<double> uni(-4.0, 4.0);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> u(4);
            for (double& v : u) v = uni(rng);
            auto rep = E.coercivity_certificate(u);
            REQUIRE(rep.ok());
            REQUIRE_THAT(rep.upper_bound,
                         Catch::Matchers::WithinAbs(0.5 * p.matrix.quadratic_form(u), 1e-12));
        }
    }
    SECTION("admissible perturbations keep both bounds, up to large norms") {
        const int n = 5;
        auto A = second_difference_matrix(n);
        const double L = 0.8 * A.lambda_min();
        auto p = ProblemInstance(A, Nonlinearity::shared(n, zero_function()),
                                 Perturbation::shared(n, sine(L, 1.0), L), 1.0);
        EnergyFunctional E(p);
        Rng rng(6);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        std::uniform_real_distribution<double> scale(0.0, 3.0);
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> u(n);
            const double mag = std::pow(10.0, scale(rng));
            for (double& v : u) v = mag * uni(rng);
            auto rep = E.coercivity_certificate(u);
            REQUIRE(rep.lower_ok);
            REQUIRE(rep.upper_ok);
            const double n2 = norm2(u);
            if (n2 >= 1.0)
                REQUIRE(rep.phi / (n2 * n2) >=
                        0.5 * (A.lambda_min() - L) - 1e-9);
        }
    }
}

TEST_CASE("varphi upper bound") {
    SECTION("zero nonlinearity gives zero for all radii") {
        auto p = ProblemInstance(second_difference_matrix(2),
                                 Nonlinearity::shared(2, zero_function()),
                                 Perturbation::none(2), 1.0);
        EnergyFunctional E(p);
        for (double r : {0.5, 1.0, 10.0, 1e4}) REQUIRE(E.varphi_upper_bound(r) == 0.0);
    }
    SECTION("linear f in one dimension") {
        // lambda_1 - L = 2, r = 1 -> c = 1, max F = 1/2, bound = 1/2
        auto p = ProblemInstance(SpdMatrix::dense(1, {2.0}),
                                 Nonlinearity::shared(1, polynomial({0.0, 1.0})),
                                 Perturbation::none(1), 1.0);
        EnergyFunctional E(p);
        REQUIRE_THAT(E.varphi_upper_bound(1.0), Catch::Matchers::WithinAbs(0.5, 1e-9));
    }
    SECTION("spike-train bound vanishes along the plateau radii") {
        const int n = 4;
        auto A = second_difference_matrix(n);
        auto st = SpikeTrain::at_infinity(6);
        auto p = ProblemInstance(A, Nonlinearity::shared(n, st.component()),
                                 Perturbation::none(n), 1.0);
        EnergyFunctional E(p);
        const double gap = A.lambda_min();
        double prev = kInf;
        for (int m = 1; m <= 6; ++m) {
            const double c = st.plateau_ends()[m - 1];
            const double r = 0.5 * gap * c * c;
            const double bound = E.varphi_upper_bound(r);
            // n F(c_m) / r = n (1/m^2) c^2 / (gap c^2 / 2) = 2 n / (gap m^2)
            REQUIRE_THAT(bound, Catch::Matchers::WithinRel(
                                    2.0 * n / (gap * m * m), 1e-6));
            REQUIRE(bound < prev);
            prev = bound;
        }
    }
    SECTION("invalid radius") {
        auto p = linear_problem(2, 1.0);
        EnergyFunctional E(p);
        REQUIRE_THROWS_AS(E.varphi_upper_bound(0.0), InvalidDimensionError);
    }
}

TEST_CASE("evaluation counters tick") {
    auto p = linear_problem(2, 1.0);
    EnergyFunctional E(p);
    std::vector<double> u = {0.5, -0.25};
    const auto before = E.phi_evaluations();
    E.phi(u);
    E.j_lambda(u);
    REQUIRE(E.phi_evaluations() >= before + 2);
    E.gradient(u);
    REQUIRE(E.gradient_evaluations() >= 1);
}
