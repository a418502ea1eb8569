#pragma once

// JSON records for solver results. Numbers are printed with 17 significant
// digits so equal inputs give byte-identical files.

#include "nnm/error.hpp"
#include "nnm/periodic.hpp"
#include "nnm/static_solver.hpp"

#include <string>

namespace nnm {

std::string format_double(double v);

std::string periodic_json(const PeriodicSolution& sol);
std::string static_json(const StaticSolution& sol, double epsilon);
std::string error_json(const Error& err);

} // namespace nnm
