#pragma once

#include "zdrd/model.hpp"

namespace zdrd {

/// Exhaustive validation oracle for the steady-state rate at distortion
/// D, independent of solve_nrdf: grid search over all SPD posteriors
/// (delta_1, delta_2, rotation angle) for p = 2, scalar delta for p = 1,
/// subject to trace <= D and pi_post <= A pi_post A^T + B B^T (min
/// eigenvalue of the difference >= -1e-9). Returns the grid minimum of
/// 1/2 log2 max(1, det(A pi_post A^T + B B^T)/det pi_post).
///
/// Note this searches posteriors of arbitrary orientation, i.e. it
/// minimizes over test channels the feedback realization cannot
/// represent; see the nrdf tests for how the two quantities relate.
/// Throws DimensionTooLarge for p > 2.
double grid_oracle_nrdf(const ValidatedModel& m, double D, int resolution);

}  // namespace zdrd
