#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vvrom/cluster_tree.hpp"
#include "vvrom/common.hpp"

namespace vvrom {

// Entry generator for a kernel matrix in the original (unpermuted) index
// space. Batched row/column access keeps per-entry setup amortized.
class MatrixOracle {
public:
    virtual ~MatrixOracle() = default;
    virtual int rows() const = 0;
    virtual int cols() const = 0;
    virtual void eval_row(int i, const int* col_idx, int n, double* out) const = 0;
    virtual void eval_col(int j, const int* row_idx, int n, double* out) const = 0;
    // dense sub-block, row-major fill; overriders can share setup across rows
    virtual void eval_block(const int* row_idx, int n_rows, const int* col_idx, int n_cols,
                            MatX& out) const {
        out.resize(n_rows, n_cols);
        std::vector<double> buf(n_cols);
        for (int i = 0; i < n_rows; ++i) {
            eval_row(row_idx[i], col_idx, n_cols, buf.data());
            for (int j = 0; j < n_cols; ++j) out(i, j) = buf[j];
        }
    }
    double entry(int i, int j) const {
        double v = 0.0;
        eval_row(i, &j, 1, &v);
        return v;
    }
};

struct LowRankBlock {
    MatX U;  // #sigma x r
    MatX V;  // #tau x r
    bool converged = true;
    int rank() const { return static_cast<int>(U.cols()); }
};

// Partial-pivot ACA with incremental Frobenius tracking. Stops once
// ||u_k|| * ||v_k|| <= eps * ||UV'||_F or the rank cap is hit (the block is
// then flagged and the caller stores it densely).
LowRankBlock aca_factorize(const MatrixOracle& oracle, const int* row_idx, int n_rows,
                           const int* col_idx, int n_cols, double eps, int r_max);

// Block-tree-structured operator: admissible leaves hold U*V' factors,
// non-admissible leaves are dense. Leaves tile I x J exactly once.
class HMatrix {
public:
    struct Block {
        int row_begin = 0, row_end = 0;  // permuted row range
        int col_begin = 0, col_end = 0;
        bool low_rank = false;
        MatX full;
        MatX U, V;
        std::size_t bytes() const {
            return sizeof(double) *
                   (low_rank ? U.size() + V.size() : static_cast<std::size_t>(full.size()));
        }
    };

    struct Stats {
        int rows = 0, cols = 0;
        int full_blocks = 0;
        int low_rank_blocks = 0;
        int demoted_blocks = 0;  // ACA failures stored densely
        std::size_t compressed_bytes = 0;
        std::size_t dense_bytes = 0;
        double ratio = 0.0;  // compressed / dense
        std::map<int, int> rank_histogram;
        std::string to_json() const;
    };

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double tolerance() const { return eps_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    const std::vector<int>& row_perm() const { return row_perm_; }
    const std::vector<int>& col_perm() const { return col_perm_; }

    VecX apply(const Eigen::Ref<const VecX>& x) const;
    // y += alpha * H * x, scatter into an existing accumulator
    void apply_add(const Eigen::Ref<const VecX>& x, VecX& y, double alpha = 1.0) const;

    Stats stats() const;

    void save(const std::string& path) const;
    static HMatrix load(const std::string& path);

    friend HMatrix hbuild(const MatrixOracle&, const ClusterTree&, const ClusterTree&, double,
                          double, int, int);

private:
    int rows_ = 0, cols_ = 0;
    double eps_ = 0.0;
    std::vector<int> row_perm_, col_perm_;
    std::vector<Block> blocks_;
};

// Recursive descent over the block cluster tree: admissible pairs go through
// ACA, pairs where either side is a leaf are stored densely, everything else
// recurses on the 2x2 children.
HMatrix hbuild(const MatrixOracle& oracle, const ClusterTree& row_tree,
               const ClusterTree& col_tree, double eta_adm, double eps, int r_max = 0,
               int threads = 1);

}  // namespace vvrom
