#include "vvrom/cluster_tree.hpp"

#include <algorithm>
#include <numeric>

namespace vvrom {

ClusterTree ClusterTree::build(const MatX3& points, int n_min) {
    if (points.rows() < 1) throw ConfigError("cluster tree: empty point set");
    if (n_min < 2) throw ConfigError("cluster tree: n_min must be >= 2");
    ClusterTree tree;
    tree.n_min_ = n_min;
    tree.perm_.resize(points.rows());
    std::iota(tree.perm_.begin(), tree.perm_.end(), 0);

    struct Work {
        int node;
    };
    auto make_node = [&](int begin, int end) {
        Node n;
        n.begin = begin;
        n.end = end;
        Vec3 lo = points.row(tree.perm_[begin]).transpose();
        Vec3 hi = lo;
        for (int k = begin + 1; k < end; ++k) {
            const Vec3 p = points.row(tree.perm_[k]).transpose();
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        n.box_lo = lo;
        n.box_hi = hi;
        return n;
    };

    tree.nodes_.push_back(make_node(0, static_cast<int>(points.rows())));
    std::vector<int> stack = {0};
    while (!stack.empty()) {
        const int ni = stack.back();
        stack.pop_back();
        Node n = tree.nodes_[ni];
        if (n.size() <= n_min) continue;
        // split the longest axis at the median; ties broken by index so the
        // result is a pure function of the input order
        int axis = 0;
        (n.box_hi - n.box_lo).maxCoeff(&axis);
        const int mid = n.begin + n.size() / 2;
        std::sort(tree.perm_.begin() + n.begin, tree.perm_.begin() + n.end, [&](int a, int b) {
            const double pa = points(a, axis), pb = points(b, axis);
            return pa < pb || (pa == pb && a < b);
        });
        n.left = static_cast<int>(tree.nodes_.size());
        tree.nodes_.push_back(make_node(n.begin, mid));
        n.right = static_cast<int>(tree.nodes_.size());
        tree.nodes_.push_back(make_node(mid, n.end));
        tree.nodes_[ni] = n;
        stack.push_back(n.left);
        stack.push_back(n.right);
    }
    return tree;
}

double box_distance(const Vec3& lo_a, const Vec3& hi_a, const Vec3& lo_b, const Vec3& hi_b) {
    Vec3 d = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
        if (lo_b[i] > hi_a[i])
            d[i] = lo_b[i] - hi_a[i];
        else if (lo_a[i] > hi_b[i])
            d[i] = lo_a[i] - hi_b[i];
    }
    return d.norm();
}

bool admissible(const ClusterTree::Node& a, const ClusterTree::Node& b, double eta) {
    const double dist = box_distance(a.box_lo, a.box_hi, b.box_lo, b.box_hi);
    if (dist <= 0.0) return false;
    return std::min(a.diameter(), b.diameter()) <= eta * dist;
}

}  // namespace vvrom
