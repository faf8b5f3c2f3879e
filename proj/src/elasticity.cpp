#include "vvrom/elasticity.hpp"

#include <cmath>

namespace vvrom {

namespace {

// gradients of the four linear shape functions, rows of G
Eigen::Matrix<double, 4, 3> shape_gradients(const Mesh& mesh, int elem) {
    const auto v = mesh.element_vertices(elem);
    Mat3 jac;
    jac.col(0) = v[1] - v[0];
    jac.col(1) = v[2] - v[0];
    jac.col(2) = v[3] - v[0];
    const Mat3 inv = jac.inverse();
    Eigen::Matrix<double, 4, 3> g;
    for (int i = 0; i < 3; ++i) g.row(i + 1) = inv.row(i);
    g.row(0) = -(g.row(1) + g.row(2) + g.row(3));
    return g;
}

// engineering-strain B (gamma = 2*eps on the shear rows), used for K = B'CB
Eigen::Matrix<double, 6, 12> b_matrix(const Eigen::Matrix<double, 4, 3>& g) {
    Eigen::Matrix<double, 6, 12> b = Eigen::Matrix<double, 6, 12>::Zero();
    for (int i = 0; i < 4; ++i) {
        const double gx = g(i, 0), gy = g(i, 1), gz = g(i, 2);
        const int c = 3 * i;
        b(0, c) = gx;
        b(1, c + 1) = gy;
        b(2, c + 2) = gz;
        b(3, c) = gy;
        b(3, c + 1) = gx;
        b(4, c + 1) = gz;
        b(4, c + 2) = gy;
        b(5, c) = gz;
        b(5, c + 2) = gx;
    }
    return b;
}

Eigen::Matrix<double, 6, 6> isotropic_c(const Material& m) {
    const double lambda = m.young * m.poisson / ((1.0 + m.poisson) * (1.0 - 2.0 * m.poisson));
    const double mu = m.young / (2.0 * (1.0 + m.poisson));
    Eigen::Matrix<double, 6, 6> c = Eigen::Matrix<double, 6, 6>::Zero();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) c(i, j) = lambda;
        c(i, i) += 2.0 * mu;
        c(i + 3, i + 3) = mu;
    }
    return c;
}

}  // namespace

StructFom::StructFom(const Mesh& mesh, const Material& material, std::vector<int> dirichlet_dofs)
    : dirichlet_(std::move(dirichlet_dofs)), material_(material), n_dofs_(3 * mesh.n_nodes()) {
    if (material.young <= 0.0) throw ConfigError("Young's modulus must be positive");
    if (material.poisson <= 0.0 || material.poisson >= 0.5)
        throw ConfigError("Poisson ratio out of range");
    if (material.poisson >= 0.49)
        throw ConfigError("near-incompressible material (nu >= 0.49): linear tets lock");

    const auto c = isotropic_c(material);
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(mesh.n_elements()) * 144);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto g = shape_gradients(mesh, e);
        const auto b = b_matrix(g);
        const Eigen::Matrix<double, 12, 12> ke = mesh.volumes[e] * (b.transpose() * c * b);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int a = 0; a < 3; ++a)
                    for (int d = 0; d < 3; ++d)
                        trip.emplace_back(3 * mesh.elements(e, i) + a, 3 * mesh.elements(e, j) + d,
                                          ke(3 * i + a, 3 * j + d));
    }
    S_.resize(n_dofs_, n_dofs_);
    S_.setFromTriplets(trip.begin(), trip.end());

    std::sort(dirichlet_.begin(), dirichlet_.end());
    dirichlet_.erase(std::unique(dirichlet_.begin(), dirichlet_.end()), dirichlet_.end());
    for (int d : dirichlet_)
        if (d < 0 || d >= n_dofs_) throw ConfigError("Dirichlet DoF out of range");
    if (dirichlet_.empty()) return;  // unconstrained assembly only; no factor

    free_of_full_.assign(n_dofs_, -1);
    std::vector<char> constrained(n_dofs_, 0);
    for (int d : dirichlet_) constrained[d] = 1;
    for (int i = 0; i < n_dofs_; ++i)
        if (!constrained[i]) {
            free_of_full_[i] = static_cast<int>(full_of_free_.size());
            full_of_free_.push_back(i);
        }

    const int nf = static_cast<int>(full_of_free_.size());
    const int nc = static_cast<int>(dirichlet_.size());
    std::vector<int> cons_index(n_dofs_, -1);
    for (int k = 0; k < nc; ++k) cons_index[dirichlet_[k]] = k;

    std::vector<Triplet> tff, tfc;
    for (int k = 0; k < S_.outerSize(); ++k)
        for (SpMat::InnerIterator it(S_, k); it; ++it) {
            const int fi = free_of_full_[it.row()];
            if (fi < 0) continue;
            const int fj = free_of_full_[it.col()];
            if (fj >= 0)
                tff.emplace_back(fi, fj, it.value());
            else
                tfc.emplace_back(fi, cons_index[it.col()], it.value());
        }
    S_ff_.resize(nf, nf);
    S_ff_.setFromTriplets(tff.begin(), tff.end());
    S_fc_.resize(nf, nc);
    S_fc_.setFromTriplets(tfc.begin(), tfc.end());
    factor_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>();
    factor_->compute(S_ff_);
    if (factor_->info() != Eigen::Success)
        throw NumericalError("stiffness factorization failed (constrained system not SPD)");
}

VecX StructFom::solve(const VecX& f) const { return solve(f, VecX()); }

VecX StructFom::solve(const VecX& f, const VecX& prescribed) const {
    if (!factor_) throw NumericalError("empty Dirichlet set leaves rigid-body modes; cannot solve");
    if (f.size() != n_dofs_) throw ConfigError("load vector size mismatch");
    if (!f.allFinite()) throw NumericalError("load vector has non-finite entries");
    const int nc = static_cast<int>(dirichlet_.size());
    VecX uc = VecX::Zero(nc);
    if (prescribed.size() == nc)
        uc = prescribed;
    else if (prescribed.size() != 0)
        throw ConfigError("prescribed-value vector size mismatch");

    VecX rhs(full_of_free_.size());
    for (std::size_t i = 0; i < full_of_free_.size(); ++i) rhs[i] = f[full_of_free_[i]];
    if (nc > 0 && prescribed.size() == nc) rhs.noalias() -= S_fc_ * uc;
    const VecX uf = factor_->solve(rhs);
    VecX u = VecX::Zero(n_dofs_);
    for (std::size_t i = 0; i < full_of_free_.size(); ++i) u[full_of_free_[i]] = uf[i];
    for (int k = 0; k < nc; ++k) u[dirichlet_[k]] = uc[k];
    return u;
}

StructFom assemble_stiffness(const Mesh& mesh, const Material& material,
                             const std::vector<int>& dirichlet_dofs) {
    return StructFom(mesh, material, dirichlet_dofs);
}

Mat3 recover_strain(const Mesh& mesh, const VecX& u, int elem) {
    if (u.size() != 3 * mesh.n_nodes()) throw ConfigError("displacement size mismatch");
    const auto g = shape_gradients(mesh, elem);
    Mat3 grad = Mat3::Zero();  // grad(a,b) = du_a/dx_b
    for (int i = 0; i < 4; ++i) {
        const int n = mesh.elements(elem, i);
        grad += u.segment<3>(3 * n) * g.row(i);
    }
    return 0.5 * (grad + grad.transpose());
}

Eigen::Matrix<double, 6, 12> strain_operator(const Mesh& mesh, int elem) {
    const auto g = shape_gradients(mesh, elem);
    Eigen::Matrix<double, 6, 12> b = Eigen::Matrix<double, 6, 12>::Zero();
    for (int i = 0; i < 4; ++i) {
        const double gx = g(i, 0), gy = g(i, 1), gz = g(i, 2);
        const int c = 3 * i;
        b(0, c) = gx;
        b(1, c + 1) = gy;
        b(2, c + 2) = gz;
        b(3, c) = 0.5 * gy;   // eps_xy
        b(3, c + 1) = 0.5 * gx;
        b(4, c + 1) = 0.5 * gz;  // eps_yz
        b(4, c + 2) = 0.5 * gy;
        b(5, c) = 0.5 * gz;   // eps_xz
        b(5, c + 2) = 0.5 * gx;
    }
    return b;
}

}  // namespace vvrom
