#pragma once

#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "vvrom/mesh.hpp"

namespace vvrom {

struct Material {
    double young = 0.0;    // Pa
    double poisson = 0.0;
    double density = 0.0;  // kg/m^3
};

// Constrained linear-elasticity stiffness system S u = f on linear tets.
// Dirichlet DoFs are eliminated symmetrically; the reduced SPD factor is
// computed once and reused across solves.
class StructFom {
public:
    StructFom() = default;
    StructFom(const Mesh& mesh, const Material& material, std::vector<int> dirichlet_dofs);

    int n_dofs() const { return n_dofs_; }
    const SpMat& stiffness() const { return S_; }  // unconstrained, symmetric
    const std::vector<int>& dirichlet_dofs() const { return dirichlet_; }
    const Material& material() const { return material_; }

    // solve with optional prescribed values on the Dirichlet DoFs (zero by
    // default); constrained entries of the result carry exactly those values
    VecX solve(const VecX& f) const;
    VecX solve(const VecX& f, const VecX& prescribed) const;

private:
    SpMat S_;
    std::vector<int> dirichlet_;
    std::vector<int> free_of_full_;  // full dof -> free index or -1
    std::vector<int> full_of_free_;
    Material material_;
    int n_dofs_ = 0;
    SpMat S_ff_, S_fc_;
    std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> factor_;
};

StructFom assemble_stiffness(const Mesh& mesh, const Material& material,
                             const std::vector<int>& dirichlet_dofs);

// Per-element constant strain tensor from the linear shape-function gradient.
Mat3 recover_strain(const Mesh& mesh, const VecX& u, int elem);

// 6x12 strain-displacement operator of one element in Voigt order
// (xx, yy, zz, xy, yz, xz) with tensor (not engineering) shear components.
Eigen::Matrix<double, 6, 12> strain_operator(const Mesh& mesh, int elem);

}  // namespace vvrom
