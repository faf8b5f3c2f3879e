#include "vvrom/quadrature.hpp"

namespace vvrom {

namespace {

void add_perm4(std::vector<TetRule::Point>& pts, double a, double b, double w) {
    // all placements of a among (a,b,b,b)
    for (int i = 0; i < 4; ++i) {
        TetRule::Point p{};
        p.bary = {b, b, b, b};
        p.bary[i] = a;
        p.weight = w;
        pts.push_back(p);
    }
}

void add_perm22(std::vector<TetRule::Point>& pts, double a, double b, double w) {
    // all placements of (a,a,b,b)
    static const int idx[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (const auto& ij : idx) {
        TetRule::Point p{};
        p.bary = {b, b, b, b};
        p.bary[ij[0]] = a;
        p.bary[ij[1]] = a;
        p.weight = w;
        pts.push_back(p);
    }
}

}  // namespace

const TetRule& TetRule::degree2() {
    static const TetRule rule = [] {
        TetRule r;
        const double a = 0.58541019662496845446;
        const double b = 0.13819660112501051518;
        add_perm4(r.points, a, b, 0.25);
        return r;
    }();
    return rule;
}

const TetRule& TetRule::degree4() {
    static const TetRule rule = [] {
        TetRule r;
        // Keast 11-point rule, degree 4
        TetRule::Point c{};
        c.bary = {0.25, 0.25, 0.25, 0.25};
        c.weight = -0.07893333333333333333;
        r.points.push_back(c);
        add_perm4(r.points, 11.0 / 14.0, 1.0 / 14.0, 0.04573333333333333333);
        add_perm22(r.points, 0.39940357616679920500, 0.10059642383320079500,
                   0.14933333333333333333);
        return r;
    }();
    return rule;
}

const TetRule& TetRule::degree5() {
    static const TetRule rule = [] {
        TetRule r;
        add_perm4(r.points, 0.06734224221009831620, 0.31088591926330060980,
                  0.11268792571801585080);
        add_perm4(r.points, 0.72179424906732632079, 0.09273525031089122640,
                  0.07349304311636194954);
        add_perm22(r.points, 0.45449629587435035051, 0.04550370412564964949,
                   0.04254602077708146643);
        return r;
    }();
    return rule;
}

MatX3 map_rule(const TetRule& rule, const std::array<Vec3, 4>& verts) {
    MatX3 out(static_cast<int>(rule.points.size()), 3);
    for (int q = 0; q < out.rows(); ++q) {
        const auto& b = rule.points[q].bary;
        Vec3 x = b[0] * verts[0] + b[1] * verts[1] + b[2] * verts[2] + b[3] * verts[3];
        out.row(q) = x.transpose();
    }
    return out;
}

double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

std::array<std::array<Vec3, 4>, 8> subdivide_tet(const std::array<Vec3, 4>& v) {
    const Vec3 m01 = 0.5 * (v[0] + v[1]), m02 = 0.5 * (v[0] + v[2]), m03 = 0.5 * (v[0] + v[3]);
    const Vec3 m12 = 0.5 * (v[1] + v[2]), m13 = 0.5 * (v[1] + v[3]), m23 = 0.5 * (v[2] + v[3]);
    std::array<std::array<Vec3, 4>, 8> out = {{
        {v[0], m01, m02, m03},
        {v[1], m01, m12, m13},
        {v[2], m02, m12, m23},
        {v[3], m03, m13, m23},
        // octahedron split along the (m01, m23) diagonal
        {m01, m23, m02, m03},
        {m01, m23, m03, m13},
        {m01, m23, m13, m12},
        {m01, m23, m12, m02},
    }};
    // orient all children positively
    for (auto& t : out) {
        if (tet_signed_volume(t[0], t[1], t[2], t[3]) < 0.0) std::swap(t[2], t[3]);
    }
    return out;
}

}  // namespace vvrom
