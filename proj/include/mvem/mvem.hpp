#pragma once

// Umbrella header.

#include "mvem/errors.hpp"
#include "mvem/mesh.hpp"
#include "mvem/quadrature.hpp"
#include "mvem/scalar_basis.hpp"
#include "mvem/vector_basis.hpp"
#include "mvem/problems.hpp"
#include "mvem/local_assembly.hpp"
#include "mvem/global_solver.hpp"
#include "mvem/diagnostics.hpp"
#include "mvem/experiment.hpp"
