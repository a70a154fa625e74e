#pragma once

#include "gpiter/linear_system.hpp"
#include "gpiter/pivoted_cholesky.hpp"

namespace gpiter {

// Batched preconditioned conjugate gradients. One iteration costs one full
// pass over H and counts as one epoch. `precond` may be null (identity).
SolverReport solve_cg(LinearSystemBatch& batch, const SolverConfig& config,
                      const PivotedCholeskyPreconditioner* precond = nullptr);

// Block alternating projections over contiguous blocks of `block_size` rows.
// Each iteration projects onto the block whose summed residual columns have
// the largest norm and costs block_size / n epochs. Block Cholesky factors
// are computed at most once per call and cached.
SolverReport solve_ap(LinearSystemBatch& batch, const SolverConfig& config);

// Minibatch stochastic gradient descent on the quadratic objective with
// momentum, with the sparse residual-tracking heuristic: residual entries are
// only refreshed at visited rows, so reported norms are estimates.
SolverReport solve_sgd(LinearSystemBatch& batch, const SolverConfig& config);

/// Dispatch on config.kind; builds the CG preconditioner internally.
SolverReport solve(LinearSystemBatch& batch, const SolverConfig& config);

}  // namespace gpiter
