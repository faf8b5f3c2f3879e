#include "vvrom/hmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace vvrom {

LowRankBlock aca_factorize(const MatrixOracle& oracle, const int* row_idx, int n_rows,
                           const int* col_idx, int n_cols, double eps, int r_max) {
    if (eps <= 0.0 || eps >= 1.0) throw ConfigError("aca: tolerance must be in (0,1)");
    const int max_rank = std::min({r_max, n_rows, n_cols});
    LowRankBlock blk;
    blk.U.resize(n_rows, 0);
    blk.V.resize(n_cols, 0);

    std::vector<VecX> us, vs;
    std::vector<char> row_used(n_rows, 0);
    VecX row(n_cols), col(n_rows);
    double frob2 = 0.0;
    int next_row = 0;
    int zero_streak = 0;

    auto scale = [&]() {
        double m = 0.0;
        for (const auto& u : us) m = std::max(m, u.lpNorm<Eigen::Infinity>());
        return m;
    };

    while (static_cast<int>(us.size()) < max_rank) {
        // find a usable pivot row
        int pivot_row = -1;
        double pivot_val = 0.0;
        int pivot_col = -1;
        int attempts = 0;
        while (attempts < n_rows && zero_streak < 8) {
            if (next_row >= n_rows) next_row = 0;
            if (row_used[next_row]) {
                ++next_row;
                ++attempts;
                continue;
            }
            oracle.eval_row(row_idx[next_row], col_idx, n_cols, row.data());
            for (std::size_t l = 0; l < us.size(); ++l) row -= us[l][next_row] * vs[l];
            int jmax = 0;
            const double vmax = row.cwiseAbs().maxCoeff(&jmax);
            const double floor_val = std::max(1e-280, 1e-15 * scale());
            if (vmax > floor_val) {
                pivot_row = next_row;
                pivot_val = row[jmax];
                pivot_col = jmax;
                zero_streak = 0;
                break;
            }
            row_used[next_row] = 1;  // numerically zero residual row
            ++zero_streak;
            ++next_row;
            ++attempts;
        }
        if (pivot_row < 0) break;  // residual exhausted: block resolved at current rank

        row_used[pivot_row] = 1;
        VecX v = row / pivot_val;
        oracle.eval_col(col_idx[pivot_col], row_idx, n_rows, col.data());
        for (std::size_t l = 0; l < us.size(); ++l) col -= vs[l][pivot_col] * us[l];
        VecX u = col;

        const double nu = u.norm(), nv = v.norm();
        double cross = 0.0;
        for (std::size_t l = 0; l < us.size(); ++l) cross += u.dot(us[l]) * v.dot(vs[l]);
        frob2 += nu * nu * nv * nv + 2.0 * cross;
        us.push_back(std::move(u));
        vs.push_back(std::move(v));

        if (nu * nv <= eps * std::sqrt(std::max(frob2, 0.0))) break;

        // next pivot row: largest remaining entry of the new column
        int best = -1;
        double best_val = -1.0;
        for (int i = 0; i < n_rows; ++i) {
            if (row_used[i]) continue;
            const double a = std::abs(us.back()[i]);
            if (a > best_val) {
                best_val = a;
                best = i;
            }
        }
        if (best < 0) break;
        next_row = best;
    }

    const int r = static_cast<int>(us.size());
    blk.U.resize(n_rows, r);
    blk.V.resize(n_cols, r);
    for (int l = 0; l < r; ++l) {
        blk.U.col(l) = us[l];
        blk.V.col(l) = vs[l];
    }
    if (r >= max_rank && r > 0) {
        // did the last step actually converge?
        const double tail = us.back().norm() * vs.back().norm();
        blk.converged = tail <= eps * std::sqrt(std::max(frob2, 0.0));
    }
    return blk;
}

namespace {

struct BlockTask {
    int row_node, col_node;
    bool admissible_pair;
};

void collect_tasks(const ClusterTree& rt, const ClusterTree& ct, int rn, int cn, double eta,
                   std::vector<BlockTask>& out) {
    const auto& a = rt.node(rn);
    const auto& b = ct.node(cn);
    if (admissible(a, b, eta)) {
        out.push_back({rn, cn, true});
        return;
    }
    if (a.is_leaf() || b.is_leaf()) {
        out.push_back({rn, cn, false});
        return;
    }
    collect_tasks(rt, ct, a.left, b.left, eta, out);
    collect_tasks(rt, ct, a.left, b.right, eta, out);
    collect_tasks(rt, ct, a.right, b.left, eta, out);
    collect_tasks(rt, ct, a.right, b.right, eta, out);
}

}  // namespace

HMatrix hbuild(const MatrixOracle& oracle, const ClusterTree& row_tree,
               const ClusterTree& col_tree, double eta_adm, double eps, int r_max, int threads) {
    if (oracle.rows() != row_tree.n_points() || oracle.cols() != col_tree.n_points())
        throw ConfigError("hbuild: tree sizes do not match the oracle");
    HMatrix h;
    h.rows_ = oracle.rows();
    h.cols_ = oracle.cols();
    h.eps_ = eps;
    h.row_perm_ = row_tree.perm();
    h.col_perm_ = col_tree.perm();

    std::vector<BlockTask> tasks;
    collect_tasks(row_tree, col_tree, 0, 0, eta_adm, tasks);
    h.blocks_.resize(tasks.size());

    const int cap = r_max > 0 ? r_max : 512;
    parallel_for(static_cast<long>(tasks.size()), threads, [&](long t) {
        const BlockTask& task = tasks[t];
        const auto& a = row_tree.node(task.row_node);
        const auto& b = col_tree.node(task.col_node);
        HMatrix::Block& blk = h.blocks_[t];
        blk.row_begin = a.begin;
        blk.row_end = a.end;
        blk.col_begin = b.begin;
        blk.col_end = b.end;
        const int* rows = row_tree.perm().data() + a.begin;
        const int* cols = col_tree.perm().data() + b.begin;
        if (task.admissible_pair) {
            LowRankBlock lr =
                aca_factorize(oracle, rows, a.size(), cols, b.size(), eps, cap);
            const bool worthwhile =
                lr.rank() * (a.size() + b.size()) < a.size() * b.size();
            if (lr.converged && worthwhile) {
                blk.low_rank = true;
                blk.U = std::move(lr.U);
                blk.V = std::move(lr.V);
                return;
            }
            // fall through: densify (failed or not actually compressible)
            blk.low_rank = false;
        }
        oracle.eval_block(rows, a.size(), cols, b.size(), blk.full);
    });
    return h;
}

void HMatrix::apply_add(const Eigen::Ref<const VecX>& x, VecX& y, double alpha) const {
    if (x.size() != cols_ || y.size() != rows_)
        throw ConfigError("hmatrix apply: dimension mismatch");
    VecX xp(cols_);
    for (int k = 0; k < cols_; ++k) xp[k] = x[col_perm_[k]];
    VecX yp = VecX::Zero(rows_);
    for (const Block& b : blocks_) {
        const auto xs = xp.segment(b.col_begin, b.col_end - b.col_begin);
        auto ys = yp.segment(b.row_begin, b.row_end - b.row_begin);
        if (b.low_rank) {
            if (b.U.cols() > 0) ys.noalias() += b.U * (b.V.transpose() * xs);
        } else {
            ys.noalias() += b.full * xs;
        }
    }
    for (int k = 0; k < rows_; ++k) y[row_perm_[k]] += alpha * yp[k];
}

VecX HMatrix::apply(const Eigen::Ref<const VecX>& x) const {
    VecX y = VecX::Zero(rows_);
    apply_add(x, y);
    return y;
}

HMatrix::Stats HMatrix::stats() const {
    Stats s;
    s.rows = rows_;
    s.cols = cols_;
    s.dense_bytes = sizeof(double) * static_cast<std::size_t>(rows_) * cols_;
    for (const Block& b : blocks_) {
        s.compressed_bytes += b.bytes();
        if (b.low_rank) {
            ++s.low_rank_blocks;
            ++s.rank_histogram[static_cast<int>(b.U.cols())];
        } else {
            ++s.full_blocks;
        }
    }
    s.ratio = static_cast<double>(s.compressed_bytes) / static_cast<double>(s.dense_bytes);
    return s;
}

std::string HMatrix::Stats::to_json() const {
    std::ostringstream os;
    os << "{\"rows\":" << rows << ",\"cols\":" << cols << ",\"full_blocks\":" << full_blocks
       << ",\"low_rank_blocks\":" << low_rank_blocks << ",\"compressed_bytes\":" << compressed_bytes
       << ",\"dense_bytes\":" << dense_bytes << ",\"ratio\":" << ratio << ",\"rank_histogram\":{";
    bool first = true;
    for (const auto& [rank, count] : rank_histogram) {
        if (!first) os << ",";
        os << "\"" << rank << "\":" << count;
        first = false;
    }
    os << "}}";
    return os.str();
}

namespace {

constexpr std::uint32_t kMagic = 0x564d4848;  // "HHMV"
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw NumericalError("hmatrix load: truncated stream");
    return v;
}

void put_mat(std::ostream& os, const MatX& m) {
    put<std::int64_t>(os, m.rows());
    put<std::int64_t>(os, m.cols());
    os.write(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
}

MatX get_mat(std::istream& is) {
    const auto r = get<std::int64_t>(is);
    const auto c = get<std::int64_t>(is);
    if (r < 0 || c < 0) throw NumericalError("hmatrix load: bad matrix header");
    MatX m(r, c);
    is.read(reinterpret_cast<char*>(m.data()), sizeof(double) * m.size());
    if (!is) throw NumericalError("hmatrix load: truncated matrix");
    return m;
}

}  // namespace

void HMatrix::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path);
    put(os, kMagic);
    put(os, kVersion);
    put<std::int64_t>(os, rows_);
    put<std::int64_t>(os, cols_);
    put(os, eps_);
    os.write(reinterpret_cast<const char*>(row_perm_.data()), sizeof(int) * row_perm_.size());
    os.write(reinterpret_cast<const char*>(col_perm_.data()), sizeof(int) * col_perm_.size());
    put<std::int64_t>(os, static_cast<std::int64_t>(blocks_.size()));
    for (const Block& b : blocks_) {
        put<std::int32_t>(os, b.row_begin);
        put<std::int32_t>(os, b.row_end);
        put<std::int32_t>(os, b.col_begin);
        put<std::int32_t>(os, b.col_end);
        put<std::int8_t>(os, b.low_rank ? 1 : 0);
        if (b.low_rank) {
            put_mat(os, b.U);
            put_mat(os, b.V);
        } else {
            put_mat(os, b.full);
        }
    }
}

HMatrix HMatrix::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read " + path);
    if (get<std::uint32_t>(is) != kMagic) throw ConfigError("not an hmatrix file: " + path);
    if (get<std::uint32_t>(is) != kVersion) throw ConfigError("unsupported hmatrix version");
    HMatrix h;
    h.rows_ = static_cast<int>(get<std::int64_t>(is));
    h.cols_ = static_cast<int>(get<std::int64_t>(is));
    h.eps_ = get<double>(is);
    h.row_perm_.resize(h.rows_);
    h.col_perm_.resize(h.cols_);
    is.read(reinterpret_cast<char*>(h.row_perm_.data()), sizeof(int) * h.rows_);
    is.read(reinterpret_cast<char*>(h.col_perm_.data()), sizeof(int) * h.cols_);
    const auto nb = get<std::int64_t>(is);
    h.blocks_.resize(nb);
    for (auto& b : h.blocks_) {
        b.row_begin = get<std::int32_t>(is);
        b.row_end = get<std::int32_t>(is);
        b.col_begin = get<std::int32_t>(is);
        b.col_end = get<std::int32_t>(is);
        b.low_rank = get<std::int8_t>(is) != 0;
        if (b.low_rank) {
            b.U = get_mat(is);
            b.V = get_mat(is);
        } else {
            b.full = get_mat(is);
        }
    }
    return h;
}

}  // namespace vvrom
