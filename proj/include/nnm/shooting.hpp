#pragma once

/**
 * @file shooting.hpp
 * @brief Strained-coordinate modal systems, fixed-step integration over
 *        [0, 2 pi], and the periodicity residuals F, H and E = F - H.
 *
 * With theta = omega_eps t and 1/omega_eps^2 = (1 - eps eta)/omega_1^2 the
 * modal coordinates obey
 *
 *     x_j'' + r_j x_j + eps phi_j(x, eta, eps) = 0,   r_j = (omega_j/omega_1)^2,
 *
 * where phi is either the full nonlinearity
 *     f_j = -eta r_j x_j + (1 - eps eta) g_j(x)
 * or its linear estimator
 *     h_j = -eta r_j x_j + (1 - eps eta) g^h_j(x),
 * with g_j(x) = Phi_j^T G(Phi x) / omega_1^2 and G the physical nonlinear force.
 *
 * Unknowns are y = (eta, b_1, a_2, b_2, ..., a_n, b_n) for prescribed
 * p = (a_1, eps); x(0) = (a_1, ..., a_n) and x'(0) = (b_1, ..., b_n).
 */

#include "nnm/densela.hpp"
#include "nnm/model.hpp"

#include <functional>
#include <iosfwd>
#include <span>

namespace nnm {

using ForceMap = std::function<Vector(std::span<const double>)>;

/// The physical system M u'' + K u + eps G(u) = 0 behind a modal ODE.
struct PhysicalSystem {
    Vector masses;
    Matrix stiffness;
    ForceMap nonlinear; ///< G(u)
    ForceMap estimator; ///< linear estimator of G
    ForceMap switches;  ///< arguments whose sign flips mark kinks of G; empty if G is smooth
    double epsilon = 0.0;
};

struct ModalOde {
    std::size_t n = 0;
    double omega1 = 0.0;
    Vector ratios;        ///< (omega_j / omega_1)^2, ratios[0] == 1
    Matrix phi;           ///< modal to physical map, selected mode in column 0
    ForceMap nonlinear;   ///< g(x) in modal coordinates, already divided by omega_1^2
    ForceMap estimator;   ///< g^h(x)
    ForceMap switches;    ///< kink arguments of g in modal coordinates, may be empty
    double lipschitz_nonlinear = 0.0;
    double lipschitz_estimator = 0.0;
    double lipschitz_gap = 0.0; ///< declared bound on ||g(x) - g^h(x)|| / ||x||
    PhysicalSystem physical;

    Vector f(std::span<const double> x, double eta, double eps) const;
    Vector h(std::span<const double> x, double eta, double eps) const;
};

/// Index of the lowest mode with omega > 1e-8.
std::size_t lowest_elastic_mode(const ModalSystem& modal);

/// Builds the unilateral-spring modal ODE around `mode_index` (0-based).
ModalOde build_modal_ode(const StructureModel& model, const ModalSystem& modal, const EstimatorConfig& cfg,
                         std::size_t mode_index);
ModalOde build_modal_ode(const StructureModel& model, const EstimatorConfig& cfg);

/// Modal ODE for a general physical nonlinearity G with a linear estimator.
ModalOde build_modal_ode(const PhysicalSystem& system, const ModalSystem& modal, std::size_t mode_index,
                         double lipschitz_nonlinear, double lipschitz_estimator, double lipschitz_gap);

/// x'' + omega^2 x + eps omega^2 g(x) = 0 with estimator slope alpha.
ModalOde make_1dof_ode(const NonlinearLaw& law, double omega, double alpha);

struct ShootingParams {
    double a1 = 0.0;
    double eps = 0.0;
    Vector y; ///< (eta, b_1, a_2, b_2, ..., a_n, b_n)

    static ShootingParams seed(std::size_t n, double a1, double eps, double eta);

    double eta() const { return y.at(0); }
    double a(std::size_t j) const { return j == 0 ? a1 : y.at(2 * j); }
    double b(std::size_t j) const { return y.at(2 * j + 1); }
    std::size_t modes() const noexcept { return y.size() / 2; }
};

enum class Phi { Full, Estimator };

/// A step whose end points differ in the sign pattern of the kink arguments is
/// redone as kKinkSubsteps substeps, recursively up to kKinkDepth levels, so
/// only the piece holding the kink is refined. The output grid stays uniform.
inline constexpr int kKinkSubsteps = 8;
inline constexpr int kKinkDepth = 4;

using Acceleration = std::function<Vector(std::span<const double>)>;

/// One classical four-stage step of x'' = acc(x), split at kinks as above.
void rk4_advance(const Acceleration& acc, const ForceMap& switches, Vector& x, Vector& v, double dt);

struct Trajectory {
    std::size_t n = 0;
    std::size_t steps = 0; ///< N, samples are N + 1
    double step = 0.0;
    Vector theta;
    std::vector<Vector> x;
    std::vector<Vector> v;

    void write_csv(std::ostream& out) const;
};

/// Classical four-stage fixed-step integration on the uniform grid of N steps.
/// Only the full system is split at kinks; the estimator is linear.
/// Throws Error(BlowUp) on a non-finite state.
Trajectory integrate(const ModalOde& ode, const ShootingParams& params, Phi which, std::size_t steps = 2048);

/// Integrates and returns only the final state (x(2 pi), x'(2 pi)).
std::pair<Vector, Vector> shoot(const ModalOde& ode, const ShootingParams& params, Phi which,
                                std::size_t steps = 2048);

enum class Weight { Sin, Cos };

/// Trapezoidal rule of weight(theta) * values over the trajectory grid.
double weighted_integral(const Trajectory& traj, Weight weight, std::span<const double> values);

/// Below this eps the mode-1 components come from quadrature; above it from the
/// exact identity int sin f = (x_1(2 pi) - a_1)/eps, int cos f = (b_1 - x_1'(2 pi))/eps.
inline constexpr double kQuadratureSwitchEps = 1e-3;

Vector periodicity_F(const ModalOde& ode, const ShootingParams& params, std::size_t steps = 2048);
Vector estimator_H(const ModalOde& ode, const ShootingParams& params, std::size_t steps = 2048);
Vector gap_E(const ModalOde& ode, const ShootingParams& params, std::size_t steps = 2048);

/// Central finite-difference Jacobian of y -> H(p, y), step 1e-6 max(1, ||y||).
Matrix jacobian_H(const ModalOde& ode, const ShootingParams& params, std::size_t steps = 2048);

/// Central finite-difference Jacobian of y -> F(p, y).
Matrix jacobian_F(const ModalOde& ode, const ShootingParams& params, std::size_t steps = 2048);

} // namespace nnm
