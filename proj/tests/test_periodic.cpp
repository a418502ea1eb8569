#include "nnm/error.hpp"
#include "nnm/periodic.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace nnm;
using std::numbers::pi;

namespace {

const NonlinearLaw kContact = NonlinearLaw::unilateral();

ModalOde contact_ode(double alpha = 0.25) { return make_1dof_ode(kContact, 1.0, alpha); }

ModalOde chain3_ode(double eps, double lambda = 0.25) {
    return build_modal_ode(test::chain3(eps), EstimatorConfig::uniform(3, lambda));
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double exact_omega(double eps) { return 2.0 * pi / exact_period_piecewise_1dof(1.0, eps); }

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidArgument;
}

// sup over the grid of ||x(theta) - a1 cos(theta) e_1||
double mode_deviation(const PeriodicSolution& s) {
    double d = 0.0;
    for (std::size_t i = 0; i < s.trajectory.x.size(); ++i) {
        Vector x = s.trajectory.x[i];
        x[0] -= s.params.a1 * std::cos(s.trajectory.theta[i]);
        d = std::max(d, norm_inf(x));
    }
    return d;
}

} // namespace

TEST_CASE("eta0 examples") {
    for (double a : {0.3, 1.0, -2.0}) CHECK(std::abs(eta0(kContact, a) - 0.5) <= 1e-6);
    CHECK(eta0(NonlinearLaw::make_custom([](double x) { return x; }, 1.0), 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eta0(NonlinearLaw::make_custom([](double x) { return x * x * x; }, 3.0), 1.0) ==
          doctest::Approx(0.75).epsilon(1e-12));
    CHECK(std::abs(eta0(contact_ode(), 1.0) - 0.5) <= 1e-6);
    CHECK(code_of([] { eta0(kContact, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("exact period of the piecewise oscillator") {
    CHECK(exact_period_piecewise_1dof(2.0, 0.0) == doctest::Approx(pi).epsilon(1e-15));
    CHECK(exact_period_piecewise_1dof(1.0, 3.0) == doctest::Approx(1.5 * pi).epsilon(1e-15));
    CHECK(exact_period_piecewise_1dof(1.0, 0.1) == doctest::Approx(6.1369837194364489).epsilon(1e-15));
    CHECK(code_of([] { exact_period_piecewise_1dof(1.0, -1.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { exact_period_piecewise_1dof(0.0, 0.1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("strained frequency") {
    CHECK(strained_frequency(2.0, 0.0, 7.0) == 2.0);
    CHECK(strained_frequency(1.0, 0.5, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(code_of([] { strained_frequency(1.0, 1.0, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("non-resonance guard") {
    CHECK(check_nonresonance(Vector{1.0, std::sqrt(2.0), std::sqrt(5.0)}).ok());

    const ResonanceStatus hard = check_nonresonance(Vector{1.0, 2.0});
    REQUIRE(hard.violations.size() == 1);
    CHECK(hard.violations[0].mode == 1);
    CHECK(hard.hard());

    const ResonanceStatus soft = check_nonresonance(Vector{1.0, 2.0005}, 1e-3);
    REQUIRE(soft.violations.size() == 1);
    CHECK_FALSE(soft.hard());

    const StructureModel m = test::chain3();
    CHECK(check_nonresonance(generalized_modes(m.stiffness(), m.masses), 0).ok());
}

TEST_CASE("fixed point at eps = 0 returns eta0 at once") {
    const PeriodicSolution s = find_periodic_1dof_fixed_point(kContact, 1.0, 1.0, 0.0, 0.3);
    CHECK(std::abs(s.params.eta() - 0.5) <= 1e-6);
    CHECK(s.report.iterations() <= 2);
}

TEST_CASE("fixed point matches the exact period") {
    for (double eps : {0.05, 0.1, 0.2}) {
        const PeriodicSolution s = find_periodic_1dof_fixed_point(kContact, 1.0, 1.0, eps, 0.5);
        CHECK(rel(s.omega_eps, exact_omega(eps)) <= 1e-6);
        CHECK(s.params.b(0) == 0.0);
        CHECK(s.warnings.empty());
    }
}

TEST_CASE("fixed-point contraction halves with eps") {
    const auto run = [](double eps) {
        return observed_contraction(find_periodic_1dof_fixed_point(kContact, 1.0, 1.0, eps, 0.5).report);
    };
    for (double eps : {0.2, 0.1}) {
        const double q = run(eps / 2.0) / run(eps);
        CHECK(q >= 0.3);
        CHECK(q <= 0.7);
    }
}

TEST_CASE("fixed-point failures") {
    const NonlinearLaw cubic = NonlinearLaw::make_custom([](double x) { return x * x * x; }, 3.0);
    CHECK(code_of([&] { find_periodic_1dof_fixed_point(cubic, 1.0, 1.5, 0.5, 0.75); }) == ErrorCode::NonContraction);
    CHECK(code_of([] { find_periodic_1dof_fixed_point(kContact, 1.0, 0.0, 0.1, 0.5); }) ==
          ErrorCode::DegenerateAmplitude);
    CHECK(code_of([] { find_periodic_1dof_fixed_point(chain3_ode(0.1), 1.0, 0.1, 0.5); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("estimator iteration at eps = 0") {
    for (const ModalOde& ode : {contact_ode(), chain3_ode(0.0)}) {
        const PeriodicSolution s = find_periodic_estimator(ode, 1.0, 0.0, linear_mode_seed(ode, 1.0));
        CHECK(s.report.iterations() <= 2);
        CHECK(s.residual <= 1e-8);
    }
}

TEST_CASE("estimator iteration on the unilateral oscillator") {
    for (double eps : {0.05, 0.1, 0.2}) {
        const ModalOde ode = contact_ode(0.25);
        const PeriodicSolution s = find_periodic_estimator(ode, 1.0, eps, linear_mode_seed(ode, 1.0));
        CHECK(rel(s.omega_eps, exact_omega(eps)) <= 1e-6);
        CHECK(s.residual <= 1e-8);
        CHECK(1.0 / (s.omega_eps * s.omega_eps) ==
              doctest::Approx((1.0 - eps * s.params.eta()) / (s.omega1 * s.omega1)).epsilon(1e-15));
        CHECK(s.period == doctest::Approx(2.0 * pi / s.omega_eps).epsilon(1e-15));
    }
}

TEST_CASE("eta does not depend on the amplitude for the contact law") {
    const ModalOde ode = contact_ode();
    const PeriodicSolution s1 = find_periodic_estimator(ode, 1.0, 0.1, linear_mode_seed(ode, 1.0));
    const PeriodicSolution s2 = find_periodic_estimator(ode, 2.0, 0.1, linear_mode_seed(ode, 2.0));
    CHECK(std::abs(s1.params.eta() - s2.params.eta()) <= 1e-8);
}

TEST_CASE("three-mass chain: residual, return check and mode limit") {
    std::vector<double> eps{0.0125, 0.025, 0.05}, dev;
    for (double e : eps) {
        const ModalOde ode = chain3_ode(e);
        const PeriodicSolution s = find_periodic_estimator(ode, 1.0, e, linear_mode_seed(ode, 1.0));
        CHECK(s.residual <= 1e-8);
        const ReturnCheck rc = physical_return_check(ode, s);
        CHECK(rc.error <= rc.bound);
        dev.push_back(mode_deviation(s));
    }
    // least-squares slope of log(dev) against log(eps)
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < 3; ++i) mx += std::log(eps[i]) / 3.0, my += std::log(dev[i]) / 3.0;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        sxy += (std::log(eps[i]) - mx) * (std::log(dev[i]) - my);
        sxx += (std::log(eps[i]) - mx) * (std::log(eps[i]) - mx);
    }
    CHECK(sxy / sxx >= 0.9);
}

TEST_CASE("a degenerate slope choice falls back to 0.25") {
    const double eps = 0.05;
    const OdeBuilder build = [&](const EstimatorConfig& cfg) { return build_modal_ode(test::chain3(eps), cfg); };
    const ModalOde seed_ode = build(EstimatorConfig::uniform(3, 0.5));
    const PeriodicSolution s =
        find_periodic_estimator(build, EstimatorConfig::uniform(3, 0.5), 1.0, eps, linear_mode_seed(seed_ode, 1.0));
    CHECK(s.residual <= 1e-8);
}

TEST_CASE("resonant spectra are refused") {
    // Two uncoupled unit masses on springs 1 and 4: omega ratio exactly 2.
    StructureModel m;
    m.n_dof = 2;
    m.masses = {1.0, 1.0};
    m.incidence = Matrix(2, 2);
    m.incidence(0, 0) = 1.0;
    m.incidence(1, 1) = 1.0;
    m.linear_stiffness = {1.0, 4.0};
    m.unilateral_stiffness = {1.0, 0.0};
    m.gaps = {0.0, 0.0};
    m.epsilon = 0.1;
    m.validate();
    const ModalOde ode = build_modal_ode(m, EstimatorConfig::uniform(2, 0.25));
    CHECK(code_of([&] { find_periodic_estimator(ode, 1.0, 0.1, linear_mode_seed(ode, 1.0)); }) ==
          ErrorCode::Resonance);
}

TEST_CASE("continuation: single stage equals a direct solve") {
    const ModalOde ode = contact_ode();
    const auto stages = continuation_periodic(ode, 1.0, Vector{0.1});
    const PeriodicSolution direct = find_periodic_estimator(ode, 1.0, 0.1, linear_mode_seed(ode, 1.0));
    REQUIRE(stages.size() == 1);
    CHECK(stages[0].params.y == direct.params.y);
    CHECK(stages[0].omega_eps == direct.omega_eps);
}

TEST_CASE("continuation sweep of the unilateral oscillator") {
    const Vector schedule{0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
    const auto stages = continuation_periodic(contact_ode(), 1.0, schedule);
    REQUIRE(stages.size() == schedule.size());
    for (std::size_t i = 0; i < stages.size(); ++i) {
        CHECK(stages[i].params.eps == schedule[i]);
        CHECK(rel(stages[i].omega_eps, exact_omega(schedule[i])) <= 1e-6);
    }
}

TEST_CASE("eta is Lipschitz in eps along a chain sweep") {
    const Vector schedule{0.0125, 0.025, 0.05, 0.1};
    const ModalOde ode = chain3_ode(0.0);
    const double e0 = eta0(ode, 1.0);
    const auto stages = continuation_periodic(ode, 1.0, schedule);
    REQUIRE(stages.size() == schedule.size());
    double prev_eps = 0.0, prev_eta = e0, max_slope = 0.0;
    for (const auto& s : stages) {
        max_slope = std::max(max_slope, std::abs(s.params.eta() - prev_eta) / (s.params.eps - prev_eps));
        CHECK(std::abs(s.params.eta() - e0) <= 2.0 * s.params.eps);
        prev_eps = s.params.eps;
        prev_eta = s.params.eta();
    }
    CHECK(std::isfinite(max_slope));
    CHECK(max_slope < 2.0);
}

TEST_CASE("outer contraction grows with eps") {
    std::vector<double> rho;
    for (double eps : {0.025, 0.05, 0.1}) {
        const ModalOde ode = chain3_ode(eps);
        rho.push_back(observed_contraction(find_periodic_estimator(ode, 1.0, eps, linear_mode_seed(ode, 1.0)).report));
    }
    CHECK(rho[0] < rho[1]);
    CHECK(rho[1] < rho[2]);
    CHECK(rho[2] < 1.0);
}

TEST_CASE("return check on the oscillator in physical time") {
    const ModalOde ode = contact_ode();
    const PeriodicSolution s = find_periodic_estimator(ode, 1.0, 0.1, linear_mode_seed(ode, 1.0));
    CHECK(physical_return_check(ode, s).ok());
}
