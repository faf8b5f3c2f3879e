#pragma once

#include <array>
#include <vector>

#include "vvrom/common.hpp"

namespace vvrom {

// Tetrahedron quadrature in barycentric coordinates. Weights sum to 1, so
//   ∫_T f dV ≈ V_T · Σ_q w_q f(x_q),  x_q = Σ_i λ_qi v_i.
struct TetRule {
    struct Point {
        std::array<double, 4> bary;
        double weight;
    };
    std::vector<Point> points;

    static const TetRule& degree2();  // 4 points
    static const TetRule& degree4();  // 11 points (Keast)
    static const TetRule& degree5();  // 14 points, positive weights
};

// Physical quadrature points of a rule on a tet given by its 4 vertices.
MatX3 map_rule(const TetRule& rule, const std::array<Vec3, 4>& verts);

double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

// Uniform refinement into 8 sub-tets (4 corner tets + octahedron split).
std::array<std::array<Vec3, 4>, 8> subdivide_tet(const std::array<Vec3, 4>& verts);

}  // namespace vvrom
