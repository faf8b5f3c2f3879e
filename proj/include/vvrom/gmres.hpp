#pragma once

#include <functional>

#include "vvrom/common.hpp"

namespace vvrom {

using LinearOp = std::function<void(const VecX&, VecX&)>;  // y = A x

struct GmresOptions {
    double rel_tol = 1e-10;
    int restart = 80;
    int max_iters = 2000;
};

struct GmresResult {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

// Restarted GMRES with right preconditioning: solves A (M^-1 u) = b and
// returns x = M^-1 u, so the reported residual is the true one. `precond` may
// be empty (identity).
GmresResult gmres(const LinearOp& apply, const LinearOp& precond, const VecX& b, VecX& x,
                  const GmresOptions& opts = {});

}  // namespace vvrom
