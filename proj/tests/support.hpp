#pragma once

#include "nnm/model.hpp"

#include <random>

namespace nnm::test {

inline StructureModel one_dof(double eps = 0.1) {
    StructureModel m;
    m.n_dof = 1;
    m.masses = {1.0};
    m.incidence = Matrix(1, 1, 1.0);
    m.linear_stiffness = {1.0};
    m.unilateral_stiffness = {1.0};
    m.gaps = {0.0};
    m.epsilon = eps;
    return m;
}

// Fixed-left chain, masses (1, 1.3, 0.7); springs 1 and 3 are unilateral.
// Frequency ratios are about (1, 2.902, 3.796), away from integers.
inline StructureModel chain3(double eps = 0.05) {
    return chain_model(3, Boundary::FixedLeft, {1.0, 1.3, 0.7}, {1.0, 1.0, 1.0}, {1.0, 0.0, 1.0}, eps);
}

// Five unit masses, both end springs broken: no linear stiffness, contact only.
inline StructureModel broken5(double eps = 0.1) {
    return chain_model(5, Boundary::BrokenBothEnds, Vector(5, 1.0), {0.0, 1.0, 1.0, 1.0, 1.0, 0.0},
                       {1.0, 0.0, 0.0, 0.0, 0.0, 1.0}, eps);
}

// Self-equilibrated and pressing both ends onto their supports.
inline Vector broken5_load() { return {-0.7, 0.2, -0.1, 0.1, 0.5}; }

inline Vector random_vector(std::mt19937& rng, std::size_t n, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Vector v(n);
    for (double& x : v) x = u(rng);
    return v;
}

} // namespace nnm::test
