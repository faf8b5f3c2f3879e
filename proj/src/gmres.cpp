#include "vvrom/gmres.hpp"

#include <cmath>

namespace vvrom {

GmresResult gmres(const LinearOp& apply, const LinearOp& precond, const VecX& b, VecX& x,
                  const GmresOptions& opts) {
    GmresResult result;
    const int n = static_cast<int>(b.size());
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x = VecX::Zero(n);
        result.converged = true;
        return result;
    }
    if (x.size() != n) x = VecX::Zero(n);

    const int m = std::max(1, opts.restart);
    MatX V(n, m + 1);
    MatX H = MatX::Zero(m + 1, m);
    VecX cs(m), sn(m), g(m + 1);
    VecX w(n), z(n), r(n);

    auto apply_precond = [&](const VecX& in, VecX& out) {
        if (precond)
            precond(in, out);
        else
            out = in;
    };

    while (result.iterations < opts.max_iters) {
        apply(x, w);
        r = b - w;
        double beta = r.norm();
        result.rel_residual = beta / bnorm;
        if (result.rel_residual <= opts.rel_tol) {
            result.converged = true;
            return result;
        }
        V.col(0) = r / beta;
        g.setZero();
        g[0] = beta;

        int k = 0;
        for (; k < m && result.iterations < opts.max_iters; ++k, ++result.iterations) {
            apply_precond(V.col(k), z);
            apply(z, w);
            // modified Gram-Schmidt
            for (int i = 0; i <= k; ++i) {
                H(i, k) = w.dot(V.col(i));
                w -= H(i, k) * V.col(i);
            }
            H(k + 1, k) = w.norm();
            if (H(k + 1, k) > 0.0) V.col(k + 1) = w / H(k + 1, k);

            // apply accumulated Givens rotations, then form a new one
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
                H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
                H(i, k) = t;
            }
            const double denom = std::hypot(H(k, k), H(k + 1, k));
            if (denom == 0.0) {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = H(k, k) / denom;
                sn[k] = H(k + 1, k) / denom;
            }
            H(k, k) = cs[k] * H(k, k) + sn[k] * H(k + 1, k);
            H(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];

            result.rel_residual = std::abs(g[k + 1]) / bnorm;
            if (result.rel_residual <= opts.rel_tol) {
                ++k;
                ++result.iterations;
                break;
            }
        }

        // back-substitute y and update x += M^-1 (V y)
        VecX y(k);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
            y[i] = s / H(i, i);
        }
        w.setZero();
        for (int i = 0; i < k; ++i) w += y[i] * V.col(i);
        apply_precond(w, z);
        x += z;

        if (result.rel_residual <= opts.rel_tol) {
            // confirm with the true residual(right preconditioning keeps them
            // equal up to round-off)
            apply(x, w);
            result.rel_residual = (b - w).norm() / bnorm;
            if (result.rel_residual <= opts.rel_tol * 4.0) {
                result.converged = true;
                return result;
            }
        }
    }
    return result;
}

}  // namespace vvrom
