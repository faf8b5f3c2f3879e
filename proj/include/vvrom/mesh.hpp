#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vvrom/common.hpp"

namespace vvrom {

// Oriented internal face. The unit normal points out of elem_front into
// elem_back, and the incidence matrix carries +1 for elem_front.
struct Face {
    std::array<int, 3> nodes;  // sorted node ids
    int elem_front = -1;
    int elem_back = -1;
    int opp_front = -1;  // vertex of elem_front opposite this face
    int opp_back = -1;
    double area = 0.0;
    Vec3 normal = Vec3::Zero();
    Vec3 centroid = Vec3::Zero();
};

struct BoundaryFace {
    std::array<int, 3> nodes;
    int elem = -1;
};

enum class MeshFormat { GmshV2, FlatText };

// Shared tetrahedral discretization. Current DoFs live on internal faces
// (one net flux per face, zero on the boundary); element potentials are
// piecewise constant. Immutable once built.
class Mesh {
public:
    MatX3 nodes;          // N_n x 3 [m]
    MatX4i elements;      // N_v x 4, positively oriented
    std::vector<int> element_tags;
    VecX volumes;         // N_v, strictly positive [m^3]
    MatX3 centroids;      // N_v x 3
    std::vector<Face> faces;                // internal faces, lexicographic by node triple
    std::vector<BoundaryFace> boundary_faces;

    int n_nodes() const { return static_cast<int>(nodes.rows()); }
    int n_elements() const { return static_cast<int>(elements.rows()); }
    int n_faces() const { return static_cast<int>(faces.size()); }

    // up to 4 internal faces per element with their incidence signs
    struct ElemFace {
        int face = -1;
        double sign = 0.0;
    };
    std::vector<std::array<ElemFace, 4>> elem_faces;
    std::vector<int> elem_face_count;

    std::array<Vec3, 4> element_vertices(int e) const;
    double element_diameter(int e) const;  // longest edge

    // Orientation sign of face k seen from element e (+1 if the face normal
    // exits e). Throws if the face is not adjacent to e.
    double face_sign(int face, int elem) const;
    // Vertex of element e opposite face k.
    int opposite_node(int face, int elem) const;
};

// ∫_e w_k dΩ for the unit-flux lowest-order face basis restricted to element
// e: sign * (centroid_e - opposite_vertex) / 3. Units: meters.
Vec3 face_basis_moment(const Mesh& mesh, int face, int elem);

// N_v x N_f incidence matrix; column of an internal face holds +1 at
// elem_front and -1 at elem_back (discrete divergence).
SpMat build_incidence(const Mesh& mesh);

Mesh load_mesh(const std::string& path);
Mesh load_mesh(const std::string& path, MeshFormat format);
void write_flat_mesh(const Mesh& mesh, const std::string& path);

// Build a mesh from raw arrays: fixes element orientation, enumerates faces
// deterministically and checks manifoldness. The entry point used by all
// readers and generators.
Mesh mesh_from_arrays(const MatX3& nodes, const MatX4i& tets,
                      const std::vector<int>& tags = {});

// Structured torus-shell fixture: circular cross-section shell of mid-surface
// minor radius `minor_radius` and radial thickness `thickness`, revolved at
// `major_radius`. Freudenthal tet decomposition, conforming and periodic.
// Counts: N_n = nt*np*(nr+1), N_v = 6*nt*np*nr, N_f = 2*nt*np*(6*nr - 1).
Mesh make_torus_shell(double major_radius, double minor_radius, double thickness,
                      int n_toroidal, int n_poloidal, int n_radial);

// Rectangular bar [0,L]x[0,W]x[0,H], used by the elasticity fixtures.
Mesh make_box_bar(double length, double width, double height, int nx, int ny, int nz);

std::uint64_t mesh_hash(const Mesh& mesh);

}  // namespace vvrom
