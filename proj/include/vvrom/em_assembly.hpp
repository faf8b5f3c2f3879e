#pragma once

#include <memory>
#include <vector>

#include "vvrom/gmres.hpp"
#include "vvrom/hmatrix.hpp"
#include "vvrom/loop_field.hpp"
#include "vvrom/mesh.hpp"

namespace vvrom {

// Static Green kernel 1/(4*pi*|r-r'|).
template <class Scalar>
Scalar green(const Vector3<Scalar>& r, const Vector3<Scalar>& rp) {
    const Scalar d = (r - rp).norm();
    if (d <= Scalar(0)) throw NumericalError("green kernel at coincident points");
    return Scalar(1) / (Scalar(4) * Scalar(pi) * d);
}

struct Coil {
    Loop loop;
    bool dynamic = false;  // time-varying excitation vs static background
    std::string name;
};

struct CoilSet {
    std::vector<Coil> coils;
    int size() const { return static_cast<int>(coils.size()); }
    std::vector<int> dynamic_indices() const;
    std::vector<int> static_indices() const;
};

// Galerkin inductance entries L_ij = mu0 ∬ G(x,y) w_i(x)·w_j(y).
// Element-pair integrals use three tiers: Gauss tensor rules at 4 and 11
// points when the pair is separated, and an exact analytic inner integral
// (volume potentials of the Green kernel) under the 11-point outer rule for
// pairs sharing nodes or nearly touching. Tier selection is canonical in the
// element pair, which makes the assembled entries exactly symmetric.
class InductanceKernel {
public:
    explicit InductanceKernel(const Mesh& mesh);

    double entry(int face_i, int face_j) const;

    struct PairMoments {
        double t0 = 0.0;
        Vec3 ta = Vec3::Zero();  // couples the outer opposite vertex
        Vec3 tb = Vec3::Zero();  // couples the inner opposite vertex
        double tsum = 0.0;
    };
    // moments of the canonical ordered pair (e_outer <= e_inner)
    PairMoments pair_moments(int e_outer, int e_inner) const;

    // raw ∬ G (x-a_i)·(y-a_j) for face i in element e_i, face j in element
    // e_j, given the canonical pair moments
    double face_term(const PairMoments& m, bool swapped, const Vec3& a_out, const Vec3& a_in) const;

    const Mesh& mesh() const { return mesh_; }

private:
    const Mesh& mesh_;
    MatX3 pts4_, pts11_;  // mapped Gauss points, N_v*npts rows
    VecX diam_;
    double mean_diam_ = 0.0;

    bool share_node(int e0, int e1) const;
    std::vector<std::array<int, 4>> sorted_nodes_;

    PairMoments tensor_moments(int e0, int e1, const MatX3& pts_outer, const VecX& w_outer,
                               const MatX3& pts_inner, const VecX& w_inner) const;
    PairMoments analytic_inner_moments(int e0, int e1) const;

    VecX w4_, w11_;  // rule weights scaled later by element volume
};

class InductanceOracle : public MatrixOracle {
public:
    explicit InductanceOracle(const InductanceKernel& kernel);
    int rows() const override { return n_; }
    int cols() const override { return n_; }
    void eval_row(int i, const int* col_idx, int n, double* out) const override;
    void eval_col(int j, const int* row_idx, int n, double* out) const override;
    void eval_block(const int* row_idx, int n_rows, const int* col_idx, int n_cols,
                    MatX& out) const override;

private:
    const InductanceKernel& kernel_;
    int n_;
};

// Full-order descriptor model of the eddy-current problem:
//   E d/dt [j; phi] = A [j; phi] + B_u dI/dt,
//   E = blkdiag(L, 0),  A = -[R, D^T; D, 0],  B_u = -[B_i; 0].
// One potential entry per connected component is grounded (its constraint row
// is replaced by phi_g = 0), which removes the constant null space.
struct EmFom {
    HMatrix L;       // N_f x N_f [H]
    SpMat R;         // N_f x N_f [ohm]
    SpMat L_near;    // same-element couplings of L, preconditioner material
    SpMat D;         // N_v x N_f
    SpMat Dt;        // cached transpose
    MatX B_i;        // N_f x n_coils [Wb/A]
    std::vector<int> grounded;     // one element per connected component
    std::vector<int> component;    // element -> component id
    double resistivity = 0.0;
    int n_faces = 0;
    int n_elements = 0;

    int n_states() const { return n_faces + n_elements; }

    // y = (s E - A) x with the grounded-row convention above
    void apply_shifted(double s, const VecX& x, VecX& y) const;
    // B_u column for one coil (negative flux-linkage map, zero potential part)
    VecX input_column(int coil) const;

    void save(const std::string& dir) const;
    static EmFom load(const std::string& dir);
};

struct EmAssemblyOptions {
    double eps = 1e-6;
    double eta_adm = 2.0;
    int n_min = 32;
    int threads = 1;
};

EmFom assemble_em_fom(const Mesh& mesh, double resistivity, const CoilSet& coils,
                      const EmAssemblyOptions& opts = {});

// Flux-linkage input map: column k holds ∫ A_k · w_i dΩ for the unit-current
// vector potential of coil k.
MatX assemble_input_map(const Mesh& mesh, const CoilSet& coils);

SpMat assemble_resistance(const Mesh& mesh, double resistivity);

std::vector<int> connected_components(const Mesh& mesh);

// Krylov solve of (s E - A) x = rhs. The preconditioner is a sparse LU of the
// saddle system [R + s*L_near, D^T; D, 0]; `use_near_l=false` drops the
// near-field inductance term.
class ShiftedEmSolver {
public:
    ShiftedEmSolver(const EmFom& fom, double s, GmresOptions opts = {}, bool use_near_l = true);
    VecX solve(const VecX& rhs, const VecX* guess = nullptr) const;
    double shift() const { return s_; }
    int last_iterations() const { return last_iters_; }

private:
    const EmFom& fom_;
    double s_;
    GmresOptions opts_;
    std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
    mutable int last_iters_ = 0;
};

}  // namespace vvrom
