#include "nnm/densela.hpp"
#include "nnm/error.hpp"
#include "nnm/model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace nnm;

TEST_CASE("lu_solve with the identity returns b") {
    const Vector b{1.5, -2.0, 3.25};
    CHECK(lu_solve(Matrix::identity(3), b) == b);
}

TEST_CASE("lu_solve on a diagonal system") {
    const Vector x = lu_solve(Matrix::diagonal(Vector{2.0, 4.0}), Vector{2.0, 8.0});
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("stiffness of a chain with both end springs broken is singular") {
    const StructureModel m = test::broken5();
    try {
        lu_solve(m.stiffness(), Vector(5, 1.0));
        FAIL("expected a singular-matrix error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularMatrix);
    }
}

TEST_CASE("lu_solve residual on random well-conditioned systems") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> dim(1, 8);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = static_cast<std::size_t>(dim(rng));
        Matrix a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) = test::random_vector(rng, 1)[0];
        for (std::size_t i = 0; i < n; ++i) a(i, i) += static_cast<double>(n); // diagonally dominant
        const LuFactorization lu(a);
        if (lu.condition_1norm() > 1e6) continue;
        const Vector b = test::random_vector(rng, n);
        const Vector x = lu.solve(b);
        const double r = norm2(subtract(a * x, b));
        CHECK(r <= 1e-12 * (frobenius_norm(a) * norm2(x) + norm2(b)));
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("generalized_modes of diag(1, 4)") {
    const ModalSystem modal = generalized_modes(Matrix::diagonal(Vector{1.0, 4.0}), Vector{1.0, 1.0});
    CHECK(modal.omega2[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(modal.omega2[1] == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(std::abs(modal.phi(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(modal.phi(1, 1) - 1.0) < 1e-14);
    CHECK(std::abs(modal.phi(0, 1)) < 1e-14);
    CHECK(std::abs(modal.phi(1, 0)) < 1e-14);
}

TEST_CASE("generalized_modes of the fixed-left two-chain") {
    Matrix k(2, 2);
    k(0, 0) = 2.0, k(0, 1) = -1.0, k(1, 0) = -1.0, k(1, 1) = 1.0;
    const ModalSystem modal = generalized_modes(k, Vector{1.0, 1.0});
    // roots of l^2 - 3 l + 1
    CHECK(modal.omega2[0] == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-13));
    CHECK(modal.omega2[1] == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-13));
}

TEST_CASE("generalized_modes rejects nonpositive masses") {
    CHECK_THROWS_AS(generalized_modes(Matrix::identity(2), Vector{1.0, 0.0}), Error);
}

TEST_CASE("generalized_modes keeps rigid-body modes") {
    const StructureModel m = test::broken5();
    const ModalSystem modal = generalized_modes(m.stiffness(), m.masses);
    CHECK(std::abs(modal.omega2[0]) < 1e-12);
    CHECK(modal.omega2[1] > 0.1);
}

TEST_CASE("property: modal invariants on random chains") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> pos(0.3, 3.0);
    std::uniform_int_distribution<int> dim(1, 9);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = static_cast<std::size_t>(dim(rng));
        Vector masses(n), stiff(n);
        for (double& v : masses) v = pos(rng);
        for (double& v : stiff) v = pos(rng);
        const StructureModel m =
            chain_model(n, Boundary::FixedLeft, masses, stiff, Vector(n, 0.0), 0.0);
        const Matrix k = m.stiffness();
        const ModalSystem modal = generalized_modes(k, masses);
        const Matrix mm = Matrix::diagonal(masses);
        const Matrix ptmp = modal.phi.transposed() * mm * modal.phi;
        const Matrix ptkp = modal.phi.transposed() * k * modal.phi;
        const double knorm = frobenius_norm(k);
        double trace = 0.0, sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            trace += k(i, i) / masses[i];
            sum += modal.omega2[i];
            if (i > 0) CHECK(modal.omega2[i] >= modal.omega2[i - 1]);
            CHECK(modal.omega2[i] >= -1e-10 * knorm);
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(std::abs(ptmp(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-10);
                CHECK(std::abs(ptkp(i, j) - (i == j ? modal.omega2[i] : 0.0)) <= 1e-8 * knorm);
            }
        }
        CHECK(std::abs(sum - trace) <= 1e-10 * std::abs(trace));
    }
}

TEST_CASE("induced_norm2 matches the largest singular value") {
    const Matrix b = chain_incidence(5, Boundary::BrokenBothEnds);
    const Vector sv = singular_values(b);
    CHECK(induced_norm2(b) == doctest::Approx(sv.front()).epsilon(1e-10));
    CHECK(induced_norm2(Matrix::diagonal(Vector{3.0, -7.0, 2.0})) == doctest::Approx(7.0).epsilon(1e-12));
}
