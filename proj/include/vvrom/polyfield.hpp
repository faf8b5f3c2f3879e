#pragma once

#include <array>

#include "vvrom/common.hpp"

namespace vvrom {

// Closed-form surface/volume potentials of uniform sources over triangles and
// tetrahedra. These back the current-to-field maps (field of a uniform
// current-density element assembled facet by facet) and the weakly singular
// inner integrals of the inductance assembly.

// Signed solid angle subtended by triangle (v0,v1,v2) at r (van Oosterom /
// Strackee). Sign follows the vertex orientation; range (-2*pi, 2*pi).
double triangle_solid_angle(const Vec3& v0, const Vec3& v1, const Vec3& v2, const Vec3& r);

// ∫_tri 1/|y-r| dS. Finite for r anywhere off the triangle's edges; values on
// an edge are the integrable singularity and are the caller's guard case.
double triangle_inv_distance(const Vec3& v0, const Vec3& v1, const Vec3& v2, const Vec3& r);

// ∫_tri |y-r| dS.
double triangle_distance(const Vec3& v0, const Vec3& v1, const Vec3& v2, const Vec3& r);

// ∫_tet 1/|y-r| dV, exact for r inside or outside.
double tet_inv_distance(const std::array<Vec3, 4>& verts, const Vec3& r);

// ∫_tet (y-r)/|y-r| dV.
Vec3 tet_distance_gradient(const std::array<Vec3, 4>& verts, const Vec3& r);

// Both volume potentials in one face sweep; the hot path of the singular
// inductance integrals.
struct TetPotentials {
    double inv_r = 0.0;            // ∫ 1/R dV
    Vec3 dist_grad = Vec3::Zero(); // ∫ (y-r)/R dV
};
TetPotentials tet_potentials(const std::array<Vec3, 4>& verts, const Vec3& r);

// Field matrix M with B(r) = M * J for a uniform current density J [A/m^2]
// over the tet; includes the mu0/(4*pi) factor. Exact away from the tet's
// faces/edges (interior points included).
Mat3 uniform_tet_field(const std::array<Vec3, 4>& verts, const Vec3& r);

// Biot-Avart quadrature of the same field by recursive subdivision; the
// fallback when r sits within the guard shell of a face or edge, and the
// brute-force oracle in the tests.
Mat3 uniform_tet_field_quadrature(const std::array<Vec3, 4>& verts, const Vec3& r,
                                  int max_depth = 6, double rel_tol = 1e-9);

// Distance from r to the closest point of the tet's boundary.
double tet_boundary_distance(const std::array<Vec3, 4>& verts, const Vec3& r);

}  // namespace vvrom
