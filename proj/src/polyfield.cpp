#include "vvrom/polyfield.hpp"

#include <cmath>

#include "vvrom/quadrature.hpp"

namespace vvrom {

namespace {

Mat3 crossmat(const Vec3& n) {
    Mat3 c;
    c << 0, -n.z(), n.y(), n.z(), 0, -n.x(), -n.y(), 0, n.x();
    return c;
}

struct TriPotentials {
    double inv_r = 0.0;  // ∫ 1/R dS
    double r = 0.0;      // ∫ R dS
};

// Edge-wise evaluation (Wilton et al. style): per edge, with rho_e the
// distance from r to the edge line,
//   ∫_edge 1/R dl = asinh(s_b/rho_e) - asinh(s_a/rho_e)
//   ∫_edge R dl  = (s R)/2 |_a^b + rho_e^2/2 * ∫_edge 1/R dl
// and the face values assemble as
//   ∫ 1/R dS = sum_e t_e W_e - |w0| * Omega
//   ∫ R dS   = (sum_e t_e J_e + w0^2 * ∫ 1/R dS) / 3.
TriPotentials triangle_potentials(const Vec3& v0, const Vec3& v1, const Vec3& v2, const Vec3& r,
                                  bool need_dist) {
    Vec3 n = (v1 - v0).cross(v2 - v0);
    const double two_area = n.norm();
    TriPotentials out;
    if (two_area <= 0.0) return out;
    n /= two_area;
    const double w0 = n.dot(r - v0);
    const double scale = std::sqrt(two_area);

    const Vec3 verts[3] = {v0, v1, v2};
    double sum_w = 0.0, sum_j = 0.0;
    for (int e = 0; e < 3; ++e) {
        const Vec3& a = verts[e];
        const Vec3& b = verts[(e + 1) % 3];
        const double len = (b - a).norm();
        if (len <= 0.0) continue;
        const Vec3 u = (b - a) / len;
        const Vec3 m = u.cross(n);  // outward in-plane edge normal
        const double t = m.dot(a - r);
        const double sa = u.dot(a - r);
        const double sb = u.dot(b - r);
        const double rho2 = t * t + w0 * w0;
        const double rho = std::sqrt(rho2);
        const double ra = std::sqrt(sa * sa + rho2);
        const double rb = std::sqrt(sb * sb + rho2);
        double we = 0.0;
        if (rho > 1e-14 * scale) {
            we = std::asinh(sb / rho) - std::asinh(sa / rho);
        } else if (sa > 0.0 || sb < 0.0) {
            // r on the edge line but outside the segment
            we = std::log(std::abs(sb) / std::abs(sa));
            if (sb < 0.0) we = -we;
        }
        // else: r on the segment itself; t -> 0 kills the contribution
        sum_w += t * we;
        if (need_dist) sum_j += t * 0.5 * ((sb * rb - sa * ra) + rho2 * we);
    }
    double omega = 0.0;
    if (std::abs(w0) > 0.0) omega = std::abs(triangle_solid_angle(v0, v1, v2, r));
    out.inv_r = sum_w - std::abs(w0) * omega;
    if (need_dist) out.r = (sum_j + w0 * w0 * out.inv_r) / 3.0;
    return out;
}

// faces of a positively oriented tet with outward orientation
struct TetFace {
    Vec3 a, b, c;
    Vec3 n;  // outward unit normal
};

std::array<TetFace, 4> tet_faces(const std::array<Vec3, 4>& v) {
    std::array<TetFace, 4> out;
    static const int idx[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    for (int f = 0; f < 4; ++f) {
        TetFace& tf = out[f];
        tf.a = v[idx[f][0]];
        tf.b = v[idx[f][1]];
        tf.c = v[idx[f][2]];
        Vec3 n = (tf.b - tf.a).cross(tf.c - tf.a);
        n.normalize();
        if (n.dot(tf.a - v[f]) < 0.0) n = -n;  // away from the opposite vertex
        tf.n = n;
    }
    return out;
}

}  // namespace

double triangle_solid_angle(const Vec3& v0, const Vec3& v1, const Vec3& v2, const Vec3& r) {
    const Vec3 a = v0 - r, b = v1 - r, c = v2 - r;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    return 2.0 * std::atan2(num, den);
}

double triangle_inv_distance(const Vec3& v0, const Vec3& v1, const Vec3& v2, const Vec3& r) {
    return triangle_potentials(v0, v1, v2, r, false).inv_r;
}

double triangle_distance(const Vec3& v0, const Vec3& v1, const Vec3& v2, const Vec3& r) {
    return triangle_potentials(v0, v1, v2, r, true).r;
}

double tet_inv_distance(const std::array<Vec3, 4>& verts, const Vec3& r) {
    // ∫ 2/R dV = ∮ (y-r)·n / R dS with (y-r)·n constant per face
    double acc = 0.0;
    for (const TetFace& f : tet_faces(verts)) {
        const double h = f.n.dot(f.a - r);
        if (h != 0.0) acc += h * triangle_potentials(f.a, f.b, f.c, r, false).inv_r;
    }
    return 0.5 * acc;
}

Vec3 tet_distance_gradient(const std::array<Vec3, 4>& verts, const Vec3& r) {
    // ∫ ∇R dV = ∮ R n dS
    Vec3 acc = Vec3::Zero();
    for (const TetFace& f : tet_faces(verts))
        acc += f.n * triangle_potentials(f.a, f.b, f.c, r, true).r;
    return acc;
}

TetPotentials tet_potentials(const std::array<Vec3, 4>& verts, const Vec3& r) {
    TetPotentials out;
    for (const TetFace& f : tet_faces(verts)) {
        const TriPotentials tp = triangle_potentials(f.a, f.b, f.c, r, true);
        out.inv_r += 0.5 * f.n.dot(f.a - r) * tp.inv_r;
        out.dist_grad += f.n * tp.r;
    }
    return out;
}

Mat3 uniform_tet_field(const std::array<Vec3, 4>& verts, const Vec3& r) {
    Mat3 m = Mat3::Zero();
    for (const TetFace& f : tet_faces(verts)) {
        const double wf = triangle_potentials(f.a, f.b, f.c, r, false).inv_r;
        m -= wf * crossmat(f.n);  // (J x n) wf
    }
    return (mu0 / (4.0 * pi)) * m;
}

namespace {

Mat3 field_quad_rec(const std::array<Vec3, 4>& verts, const Vec3& r, double diam, int depth) {
    // distance from r to the tet's circumscribing ball, cheap separation test
    const Vec3 c = 0.25 * (verts[0] + verts[1] + verts[2] + verts[3]);
    const double dist = (r - c).norm();
    if (dist > 1.5 * diam || depth == 0) {
        const auto& rule = TetRule::degree5();
        const double vol = std::abs(
            tet_signed_volume(verts[0], verts[1], verts[2], verts[3]));
        Mat3 m = Mat3::Zero();
        for (const auto& p : rule.points) {
            const Vec3 y = p.bary[0] * verts[0] + p.bary[1] * verts[1] + p.bary[2] * verts[2] +
                           p.bary[3] * verts[3];
            const Vec3 d = r - y;
            const double rn = d.norm();
            if (rn <= 0.0) continue;
            // J x d / |d|^3 as a matrix acting on J
            m -= (p.weight * vol / (rn * rn * rn)) * crossmat(d);
        }
        return m;
    }
    Mat3 m = Mat3::Zero();
    for (const auto& child : subdivide_tet(verts)) m += field_quad_rec(child, r, 0.5 * diam, depth - 1);
    return m;
}

}  // namespace

Mat3 uniform_tet_field_quadrature(const std::array<Vec3, 4>& verts, const Vec3& r, int max_depth,
                                  double rel_tol) {
    double diam = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) diam = std::max(diam, (verts[i] - verts[j]).norm());
    Mat3 prev = field_quad_rec(verts, r, diam, 0);
    for (int depth = 1; depth <= max_depth; ++depth) {
        Mat3 cur = field_quad_rec(verts, r, diam, depth);
        if ((cur - prev).norm() <= rel_tol * cur.norm())
            return (mu0 / (4.0 * pi)) * cur;
        prev = cur;
    }
    return (mu0 / (4.0 * pi)) * prev;
}

namespace {

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    // project onto the plane, clamp into the triangle (Ericson-style)
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + ab * (d1 / (d1 - d3)))).norm();
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + ac * (d2 / (d2 - d6)))).norm();
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + w * (c - b))).norm();
    }
    const Vec3 n = ab.cross(ac).normalized();
    return std::abs(n.dot(ap));
}

}  // namespace

double tet_boundary_distance(const std::array<Vec3, 4>& verts, const Vec3& r) {
    double d = std::numeric_limits<double>::max();
    static const int idx[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    for (const auto& f : idx)
        d = std::min(d, point_triangle_distance(r, verts[f[0]], verts[f[1]], verts[f[2]]));
    return d;
}

}  // namespace vvrom
