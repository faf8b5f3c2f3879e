#pragma once

#include <array>

#include "vvrom/em_assembly.hpp"
#include "vvrom/hmatrix.hpp"
#include "vvrom/mesh.hpp"

namespace vvrom {

// Current-to-density maps W_{x,y,z} (sparse), current-to-field maps K_{x,y,z}
// (compressed, evaluated at element centroids through the analytic field of
// uniform tetrahedral sources), the nodal-load projector P, and the static
// background field. Everything here is geometry-only and built once.
struct CouplingMaps {
    std::array<SpMat, 3> W;     // N_v x N_f [1/m^2]
    std::array<HMatrix, 3> K;   // N_v x N_f [T/A]
    SpMat P;                    // 3N_n x 3N_v [m^3]; force density stacked [Fx;Fy;Fz]
    MatX B_static;              // N_v x 3 [T] from the static coils at their set currents
    std::vector<MatX> B_dyn_unit;  // per dynamic coil, N_v x 3 [T/A]
    VecX volumes;               // N_v, convenience copy for force integration

    int n_elements() const { return static_cast<int>(volumes.size()); }

    void save(const std::string& dir) const;
    static CouplingMaps load(const std::string& dir);
};

std::array<SpMat, 3> build_W(const Mesh& mesh);

std::array<HMatrix, 3> build_K(const Mesh& mesh, double eps, double eta_adm, int n_min = 32,
                               int threads = 1);

SpMat build_load_projector(const Mesh& mesh);

// Superposed analytic loop fields at the given points (rows) [T].
MatX eval_Bext(const CoilSet& coils, const VecX& currents, const MatX3& points);

CouplingMaps build_coupling(const Mesh& mesh, const CoilSet& coils, const VecX& static_currents,
                            double eps, double eta_adm, int n_min = 32, int threads = 1);

// J = W j, B = K j + B_ext, F = J x B per element. Rows of the result are
// force densities [N/m^3].
MatX compute_force_density(const CouplingMaps& maps, const VecX& j, const MatX& b_ext);

// Nodal Lorentz loads f = P F [N].
VecX assemble_load(const CouplingMaps& maps, const VecX& j, const MatX& b_ext);

Vec3 total_force(const MatX& force_density, const VecX& volumes);

}  // namespace vvrom
