#pragma once

#include <vector>

#include "vvrom/common.hpp"

namespace vvrom {

// Geometric cluster tree over a point set: recursive median bisection along
// the longest bounding-box axis. Node index sets are contiguous ranges of the
// permutation array, so children partition the parent by construction.
class ClusterTree {
public:
    struct Node {
        int begin = 0, end = 0;     // range into perm
        int left = -1, right = -1;  // children, -1 for a leaf
        Vec3 box_lo = Vec3::Zero();
        Vec3 box_hi = Vec3::Zero();
        double diameter() const { return (box_hi - box_lo).norm(); }
        int size() const { return end - begin; }
        bool is_leaf() const { return left < 0; }
    };

    static ClusterTree build(const MatX3& points, int n_min);

    const Node& node(int i) const { return nodes_[i]; }
    const Node& root() const { return nodes_[0]; }
    int n_nodes() const { return static_cast<int>(nodes_.size()); }
    int n_points() const { return static_cast<int>(perm_.size()); }
    int n_min() const { return n_min_; }
    // perm[k] = original index stored at permuted slot k
    const std::vector<int>& perm() const { return perm_; }

private:
    std::vector<Node> nodes_;
    std::vector<int> perm_;
    int n_min_ = 0;
};

// min(diam σ, diam τ) <= eta * dist(σ, τ) on the bounding boxes. Touching or
// overlapping boxes (distance zero) are never admissible.
bool admissible(const ClusterTree::Node& a, const ClusterTree::Node& b, double eta);

double box_distance(const Vec3& lo_a, const Vec3& hi_a, const Vec3& lo_b, const Vec3& hi_b);

}  // namespace vvrom
