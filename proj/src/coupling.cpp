#include "vvrom/coupling.hpp"

#include <unordered_map>

#include "vvrom/io.hpp"
#include "vvrom/polyfield.hpp"

namespace vvrom {

std::array<SpMat, 3> build_W(const Mesh& mesh) {
    std::array<std::vector<Triplet>, 3> trip;
    for (auto& t : trip) t.reserve(mesh.n_elements() * 4);
    for (int e = 0; e < mesh.n_elements(); ++e)
        for (int k = 0; k < mesh.elem_face_count[e]; ++k) {
            const auto& ef = mesh.elem_faces[e][k];
            const Vec3 w = face_basis_moment(mesh, ef.face, e) / mesh.volumes[e];
            for (int c = 0; c < 3; ++c) trip[c].emplace_back(e, ef.face, w[c]);
        }
    std::array<SpMat, 3> out;
    for (int c = 0; c < 3; ++c) {
        out[c].resize(mesh.n_elements(), mesh.n_faces());
        out[c].setFromTriplets(trip[c].begin(), trip[c].end());
    }
    return out;
}

namespace {

// K entry generator for one Cartesian component: field at target-element
// centroids from the unit-flux face currents, each source element
// contributing the exact uniform-current field. Targets hugging a source
// face fall back to subdivided quadrature.
class FieldMapOracle : public MatrixOracle {
public:
    FieldMapOracle(const Mesh& mesh, int component) : mesh_(mesh), comp_(component) {
        verts_.resize(mesh.n_elements());
        guard_.resize(mesh.n_elements());
        for (int e = 0; e < mesh.n_elements(); ++e) {
            verts_[e] = mesh.element_vertices(e);
            guard_[e] = 1e-3 * mesh.element_diameter(e);
        }
    }

    int rows() const override { return mesh_.n_elements(); }
    int cols() const override { return mesh_.n_faces(); }

    void eval_row(int i, const int* col_idx, int n, double* out) const override {
        std::unordered_map<int, Mat3> cache;
        cache.reserve(64);
        for (int k = 0; k < n; ++k) out[k] = entry_cached(i, col_idx[k], cache);
    }

    void eval_col(int j, const int* row_idx, int n, double* out) const override {
        std::unordered_map<int, Mat3> cache;
        for (int k = 0; k < n; ++k) {
            cache.clear();
            out[k] = entry_cached(row_idx[k], j, cache);
        }
    }

    void eval_block(const int* row_idx, int n_rows, const int* col_idx, int n_cols,
                    MatX& out) const override {
        out.resize(n_rows, n_cols);
        std::unordered_map<int, Mat3> cache;
        for (int i = 0; i < n_rows; ++i) {
            cache.clear();
            for (int j = 0; j < n_cols; ++j) out(i, j) = entry_cached(row_idx[i], col_idx[j], cache);
        }
    }

private:
    double entry_cached(int target, int face, std::unordered_map<int, Mat3>& cache) const {
        const Vec3 r = mesh_.centroids.row(target).transpose();
        const Face& f = mesh_.faces[face];
        double acc = 0.0;
        const int elems[2] = {f.elem_front, f.elem_back};
        for (int side = 0; side < 2; ++side) {
            const int e = elems[side];
            auto it = cache.find(e);
            if (it == cache.end()) it = cache.emplace(e, field_matrix(e, r)).first;
            const Vec3 j_unit = face_basis_moment(mesh_, face, e) / mesh_.volumes[e];
            acc += (it->second * j_unit)[comp_];
        }
        return acc;
    }

    Mat3 field_matrix(int e, const Vec3& r) const {
        if (tet_boundary_distance(verts_[e], r) < guard_[e])
            return uniform_tet_field_quadrature(verts_[e], r);
        return uniform_tet_field(verts_[e], r);
    }

    const Mesh& mesh_;
    int comp_;
    std::vector<std::array<Vec3, 4>> verts_;
    std::vector<double> guard_;
};

}  // namespace

std::array<HMatrix, 3> build_K(const Mesh& mesh, double eps, double eta_adm, int n_min,
                               int threads) {
    MatX3 face_pts(mesh.n_faces(), 3);
    for (int k = 0; k < mesh.n_faces(); ++k) face_pts.row(k) = mesh.faces[k].centroid.transpose();
    const ClusterTree col_tree = ClusterTree::build(face_pts, n_min);
    const ClusterTree row_tree = ClusterTree::build(mesh.centroids, n_min);
    std::array<HMatrix, 3> out;
    for (int c = 0; c < 3; ++c) {
        FieldMapOracle oracle(mesh, c);
        out[c] = hbuild(oracle, row_tree, col_tree, eta_adm, eps, 0, threads);
    }
    return out;
}

SpMat build_load_projector(const Mesh& mesh) {
    const int nv = mesh.n_elements();
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(nv) * 12);
    for (int e = 0; e < nv; ++e) {
        const double w = mesh.volumes[e] / 4.0;
        for (int i = 0; i < 4; ++i) {
            const int n = mesh.elements(e, i);
            for (int c = 0; c < 3; ++c) trip.emplace_back(3 * n + c, c * nv + e, w);
        }
    }
    SpMat p(3 * mesh.n_nodes(), 3 * nv);
    p.setFromTriplets(trip.begin(), trip.end());
    return p;
}

MatX eval_Bext(const CoilSet& coils, const VecX& currents, const MatX3& points) {
    if (currents.size() != coils.size()) throw ConfigError("eval_Bext: current count mismatch");
    if (!currents.allFinite()) throw NumericalError("eval_Bext: non-finite currents");
    MatX b = MatX::Zero(points.rows(), 3);
    for (int c = 0; c < coils.size(); ++c) {
        if (currents[c] == 0.0) continue;
        for (int p = 0; p < points.rows(); ++p)
            b.row(p) +=
                loop_flux_density(coils.coils[c].loop, currents[c], points.row(p).transpose())
                    .transpose();
    }
    return b;
}

CouplingMaps build_coupling(const Mesh& mesh, const CoilSet& coils, const VecX& static_currents,
                            double eps, double eta_adm, int n_min, int threads) {
    CouplingMaps maps;
    maps.W = build_W(mesh);
    maps.K = build_K(mesh, eps, eta_adm, n_min, threads);
    maps.P = build_load_projector(mesh);
    maps.volumes = mesh.volumes;

    const auto stat = coils.static_indices();
    if (static_cast<int>(stat.size()) != static_currents.size())
        throw ConfigError("static current table does not match the static coil count");
    maps.B_static = MatX::Zero(mesh.n_elements(), 3);
    for (std::size_t k = 0; k < stat.size(); ++k) {
        if (static_currents[k] == 0.0) continue;
        for (int p = 0; p < mesh.n_elements(); ++p)
            maps.B_static.row(p) += loop_flux_density(coils.coils[stat[k]].loop,
                                                      static_currents[k],
                                                      mesh.centroids.row(p).transpose())
                                        .transpose();
    }
    for (int idx : coils.dynamic_indices()) {
        MatX b = MatX::Zero(mesh.n_elements(), 3);
        for (int p = 0; p < mesh.n_elements(); ++p)
            b.row(p) += loop_flux_density(coils.coils[idx].loop, 1.0,
                                          mesh.centroids.row(p).transpose())
                            .transpose();
        maps.B_dyn_unit.push_back(std::move(b));
    }
    return maps;
}

MatX compute_force_density(const CouplingMaps& maps, const VecX& j, const MatX& b_ext) {
    const int nv = maps.n_elements();
    if (j.size() != maps.W[0].cols()) throw ConfigError("force density: current size mismatch");
    if (b_ext.rows() != nv || b_ext.cols() != 3)
        throw ConfigError("force density: external field shape mismatch");
    MatX jd(nv, 3), b(nv, 3);
    for (int c = 0; c < 3; ++c) {
        jd.col(c) = maps.W[c] * j;
        VecX eddy = VecX::Zero(nv);
        maps.K[c].apply_add(j, eddy);
        b.col(c) = eddy + b_ext.col(c);
    }
    MatX f(nv, 3);
    f.col(0) = jd.col(1).cwiseProduct(b.col(2)) - jd.col(2).cwiseProduct(b.col(1));
    f.col(1) = jd.col(2).cwiseProduct(b.col(0)) - jd.col(0).cwiseProduct(b.col(2));
    f.col(2) = jd.col(0).cwiseProduct(b.col(1)) - jd.col(1).cwiseProduct(b.col(0));
    return f;
}

VecX assemble_load(const CouplingMaps& maps, const VecX& j, const MatX& b_ext) {
    const MatX f = compute_force_density(maps, j, b_ext);
    const Eigen::Map<const VecX> f_vec(f.data(), f.size());
    return maps.P * f_vec;
}

Vec3 total_force(const MatX& force_density, const VecX& volumes) {
    if (force_density.rows() != volumes.size()) throw ConfigError("total force: size mismatch");
    return force_density.transpose() * volumes;
}

void CouplingMaps::save(const std::string& dir) const {
    for (int c = 0; c < 3; ++c) {
        const std::string suffix = std::string(1, "xyz"[c]);
        write_sparse(dir + "/W" + suffix + ".bin", W[c]);
        K[c].save(dir + "/K" + suffix + ".hm");
    }
    write_sparse(dir + "/P.bin", P);
    write_dense(dir + "/B_static.bin", B_static);
    write_vector(dir + "/volumes.bin", volumes);
    VecX n(1);
    n << static_cast<double>(B_dyn_unit.size());
    write_vector(dir + "/n_dyn.bin", n);
    for (std::size_t k = 0; k < B_dyn_unit.size(); ++k)
        write_dense(dir + "/B_dyn_" + std::to_string(k) + ".bin", B_dyn_unit[k]);
}

CouplingMaps CouplingMaps::load(const std::string& dir) {
    CouplingMaps maps;
    for (int c = 0; c < 3; ++c) {
        const std::string suffix = std::string(1, "xyz"[c]);
        maps.W[c] = read_sparse(dir + "/W" + suffix + ".bin");
        maps.K[c] = HMatrix::load(dir + "/K" + suffix + ".hm");
    }
    maps.P = read_sparse(dir + "/P.bin");
    maps.B_static = read_dense(dir + "/B_static.bin");
    maps.volumes = read_vector(dir + "/volumes.bin");
    const int n_dyn = static_cast<int>(read_vector(dir + "/n_dyn.bin")[0]);
    for (int k = 0; k < n_dyn; ++k)
        maps.B_dyn_unit.push_back(read_dense(dir + "/B_dyn_" + std::to_string(k) + ".bin"));
    return maps;
}

}  // namespace vvrom
