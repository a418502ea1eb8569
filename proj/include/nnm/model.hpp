#pragma once

/**
 * @file model.hpp
 * @brief Spring-mass models with unilateral springs.
 *
 * A model is a set of free masses joined by springs. Spring j has strain
 * gamma_j = (B u)_j, a linear stiffness E_j and an optional unilateral
 * stiffness E'_j that only acts in compression through the negative part
 * (gamma_j + d_j)_- with backlash d_j. The internal force is
 *
 *     f(u) = B^T E B u + eps B^T E' (B u + d)_-
 *
 * and the linear estimator replaces (.)_- by a diagonal slope Lambda:
 *
 *     h(u) = B^T E B u + eps B^T E' Lambda (B u + d).
 */

#include "nnm/densela.hpp"

#include <functional>
#include <string>

namespace nnm {

/// (x)_- = (x - |x|) / 2
inline double negative_part(double x) noexcept { return x < 0.0 ? x : 0.0; }

enum class Boundary { FixedLeft, BrokenBothEnds };

struct StructureModel {
    std::size_t n_dof = 0;
    Vector masses;
    Matrix incidence;           ///< springs x dofs, entries in {-1, 0, 1}
    Vector linear_stiffness;    ///< E_j >= 0
    Vector unilateral_stiffness;///< E'_j >= 0, zero means purely linear
    Vector gaps;                ///< d_j
    double epsilon = 0.0;

    std::size_t n_springs() const noexcept { return incidence.rows(); }

    /// Throws Error(InvalidArgument) on any broken invariant.
    void validate() const;

    /// K = B^T E B
    Matrix stiffness() const;
};

struct EstimatorConfig {
    Vector lambda;      ///< one slope per spring, each in (0, 1)
    double alpha = 0.25;///< 1-DOF slope, in (0, 1) and != 1/2

    static EstimatorConfig uniform(std::size_t n_springs, double lambda, double alpha = 0.25);

    void validate(std::size_t n_springs) const;
};

/// A scalar Lipschitz law g for one-degree-of-freedom oscillators
/// x'' + omega^2 x + eps omega^2 g(x) = 0.
struct NonlinearLaw {
    enum class Kind { Unilateral, Custom };

    Kind kind = Kind::Unilateral;
    double stiffness = 1.0; ///< E' for the unilateral kind
    double gap = 0.0;       ///< d for the unilateral kind
    std::function<double(double)> custom;
    double lipschitz = 1.0; ///< declared constant k

    static NonlinearLaw unilateral(double stiffness = 1.0, double gap = 0.0);
    static NonlinearLaw make_custom(std::function<double(double)> g, double lipschitz);

    double operator()(double x) const;

    /// Largest |g(x2)-g(x1)|/|x2-x1| over `pairs` random pairs in [-range, range].
    double observed_lipschitz(std::size_t pairs, double range, unsigned seed) const;
};

Matrix chain_incidence(std::size_t n, Boundary boundary);

/// Builds a chain model with uniform spring data on top of chain_incidence.
StructureModel chain_model(std::size_t n, Boundary boundary, Vector masses, Vector linear_stiffness,
                           Vector unilateral_stiffness, double epsilon, Vector gaps = {});

Vector internal_force(const StructureModel& model, std::span<const double> u);

Vector estimator_force(const StructureModel& model, const EstimatorConfig& cfg, std::span<const double> u);

/// K_eps = B^T E B + eps B^T E' Lambda B, the matrix part of the estimator.
Matrix estimator_matrix(const StructureModel& model, const EstimatorConfig& cfg);

/// e(u) = f(u) - h(u)
Vector gap_force(const StructureModel& model, const EstimatorConfig& cfg, std::span<const double> u);

/// eps * max_j max(lambda_j, 1 - lambda_j) * ||B||_2 * max_j E'_j
double lipschitz_gap_bound(const StructureModel& model, const EstimatorConfig& cfg);

/// The scalar version for e(x) = x_- - alpha x scaled by eps.
double lipschitz_gap_bound_scalar(double alpha, double epsilon = 1.0);

// JSON model files.
StructureModel parse_model(const std::string& json_text);
StructureModel load_model(const std::string& path);
std::string serialize_model(const StructureModel& model);

} // namespace nnm
