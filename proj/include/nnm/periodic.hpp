#pragma once

// Periodic solutions (nonlinear normal modes) in strained coordinates.

#include "nnm/shooting.hpp"
#include "nnm/static_solver.hpp"

#include <string>
#include <vector>

namespace nnm {

struct PeriodicSolution {
    ShootingParams params;
    double omega1 = 0.0;
    double omega_eps = 0.0; ///< omega_1 / sqrt(1 - eps eta)
    double period = 0.0;    ///< 2 pi / omega_eps, physical time
    double residual = 0.0;  ///< ||F(p, y*)||
    IterationReport report;
    Trajectory trajectory;
    std::vector<std::string> warnings;
};

struct PeriodicOptions {
    double tol = 1e-10;        // outer stop on ||y_{k+1} - y_k||
    double accept_tol = 1e-8;  // required ||F(p, y*)||
    int max_iter = 200;
    std::size_t grid = 2048;
};

/// (1/(a pi)) int_0^{2pi} cos(s) g(a cos s) ds on an N-point periodic grid.
double eta0(const NonlinearLaw& law, double a, std::size_t grid = 4096);
/// Same with g replaced by the first modal component of ode.nonlinear at x = a cos(s) e_1.
double eta0(const ModalOde& ode, double a, std::size_t grid = 4096);

/// 1 / omega_eps^2 = (1 - eps eta) / omega_1^2. Throws InvalidArgument if 1 - eps eta <= 0.
double strained_frequency(double omega1, double eps, double eta);

/// Fixed-point iteration eta <- (1 - eps eta) int cos g(x) / int cos x with b = 0.
/// `ode` must have a single mode.
PeriodicSolution find_periodic_1dof_fixed_point(const ModalOde& ode, double a, double eps, double eta_guess,
                                                const PeriodicOptions& options = {});
PeriodicSolution find_periodic_1dof_fixed_point(const NonlinearLaw& law, double omega, double a, double eps,
                                                double eta_guess, const PeriodicOptions& options = {});

struct ResonanceViolation {
    std::size_t mode = 0; ///< 0-based index in the input ordering
    double ratio = 0.0;   ///< omega_j / omega_1
    bool hard = false;    ///< ratio is an exact integer
};

struct ResonanceStatus {
    std::vector<ResonanceViolation> violations;
    bool ok() const noexcept { return violations.empty(); }
    bool hard() const noexcept;
};

/// Flags |omega_j/omega_1 - round(omega_j/omega_1)| < tol_res for j != mode_index.
ResonanceStatus check_nonresonance(const ModalSystem& modal, std::size_t mode_index, double tol_res = 1e-3);
/// Frequency ratios omega_j / omega_1 given directly; entry 0 is the reference mode.
ResonanceStatus check_nonresonance(std::span<const double> frequency_ratios, double tol_res = 1e-3);

/// Estimator iteration H(p, y_{k+1}) = -E(p, y_k). The inner solve is damped
/// Newton on H with a finite-difference Jacobian refreshed once per outer step.
PeriodicSolution find_periodic_estimator(const ModalOde& ode, double a1, double eps, const Vector& y0,
                                         const PeriodicOptions& options = {});

using OdeBuilder = std::function<ModalOde(const EstimatorConfig&)>;

/// Builds the ODE with `cfg`; if H's Jacobian at y0 is ill-conditioned
/// (sigma_min < 1e-6 sigma_max) or the inner solve or contraction fails,
/// retries once with all slopes set to 0.25.
PeriodicSolution find_periodic_estimator(const OdeBuilder& build, const EstimatorConfig& cfg, double a1,
                                         double eps, const Vector& y0, const PeriodicOptions& options = {});

/// Starting point (eta0, 0, ..., 0).
Vector linear_mode_seed(const ModalOde& ode, double a1);

/// T = (pi/omega)(1 + 1/sqrt(1 + eps)) for x'' + omega^2 x + eps omega^2 x_- = 0.
double exact_period_piecewise_1dof(double omega, double eps);

class PeriodicContinuationStalled : public Error {
public:
    PeriodicContinuationStalled(const std::string& message, std::vector<PeriodicSolution> partial)
        : Error(ErrorCode::ContinuationStalled, message), partial_(std::move(partial)) {}
    const std::vector<PeriodicSolution>& partial() const noexcept { return partial_; }

private:
    std::vector<PeriodicSolution> partial_;
};

/// Warm-started sweep over an increasing eps schedule, halving the eps step on
/// failure at most `max_bisections` times.
std::vector<PeriodicSolution> continuation_periodic(const ModalOde& ode, double a1,
                                                    std::span<const double> eps_schedule,
                                                    const PeriodicOptions& options = {}, int max_bisections = 6);

struct ReturnCheck {
    double error = 0.0; ///< ||(u(T), u'(T)) - (u(0), u'(0))||
    double bound = 0.0; ///< 10 residual (1 + ||state||)
    bool ok() const noexcept { return error <= bound; }
};

/// Re-integrates M u'' + K u + eps G(u) = 0 over one physical period from
/// (Phi x(0), omega_eps Phi x'(0)) with the same number of steps.
ReturnCheck physical_return_check(const ModalOde& ode, const PeriodicSolution& sol);

/// Median of the outer ratios whose preceding step lies above `floor`.
double observed_contraction(const IterationReport& report, double floor = 1e-8);

} // namespace nnm
