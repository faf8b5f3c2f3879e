#include "vvrom/em_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "vvrom/io.hpp"
#include "vvrom/polyfield.hpp"
#include "vvrom/quadrature.hpp"

namespace vvrom {

std::vector<int> CoilSet::dynamic_indices() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (coils[i].dynamic) out.push_back(i);
    return out;
}

std::vector<int> CoilSet::static_indices() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (!coils[i].dynamic) out.push_back(i);
    return out;
}

// ---------------------------------------------------------------------------
// inductance kernel

InductanceKernel::InductanceKernel(const Mesh& mesh) : mesh_(mesh) {
    const auto& r4 = TetRule::degree2();
    const auto& r11 = TetRule::degree4();
    const int nv = mesh.n_elements();
    pts4_.resize(nv * 4, 3);
    pts11_.resize(nv * 11, 3);
    w4_.resize(4);
    w11_.resize(11);
    for (int q = 0; q < 4; ++q) w4_[q] = r4.points[q].weight;
    for (int q = 0; q < 11; ++q) w11_[q] = r11.points[q].weight;
    diam_.resize(nv);
    sorted_nodes_.resize(nv);
    for (int e = 0; e < nv; ++e) {
        const auto v = mesh.element_vertices(e);
        pts4_.middleRows(e * 4, 4) = map_rule(r4, v);
        pts11_.middleRows(e * 11, 11) = map_rule(r11, v);
        diam_[e] = mesh.element_diameter(e);
        for (int k = 0; k < 4; ++k) sorted_nodes_[e][k] = mesh.elements(e, k);
        std::sort(sorted_nodes_[e].begin(), sorted_nodes_[e].end());
    }
    mean_diam_ = diam_.mean();
}

bool InductanceKernel::share_node(int e0, int e1) const {
    const auto& a = sorted_nodes_[e0];
    const auto& b = sorted_nodes_[e1];
    int i = 0, j = 0;
    while (i < 4 && j < 4) {
        if (a[i] == b[j]) return true;
        if (a[i] < b[j])
            ++i;
        else
            ++j;
    }
    return false;
}

InductanceKernel::PairMoments InductanceKernel::tensor_moments(int e0, int e1,
                                                               const MatX3& pts_outer,
                                                               const VecX& w_outer,
                                                               const MatX3& pts_inner,
                                                               const VecX& w_inner) const {
    const int np = static_cast<int>(w_outer.size());
    const int nq = static_cast<int>(w_inner.size());
    const double v0 = mesh_.volumes[e0], v1 = mesh_.volumes[e1];
    PairMoments m;
    for (int p = 0; p < np; ++p) {
        const Vec3 x = pts_outer.row(e0 * np + p).transpose();
        const double gp = w_outer[p] * v0;
        for (int q = 0; q < nq; ++q) {
            const Vec3 y = pts_inner.row(e1 * nq + q).transpose();
            const double a = gp * w_inner[q] * v1 / (4.0 * pi * (x - y).norm());
            m.t0 += a * x.dot(y);
            m.ta += a * y;
            m.tb += a * x;
            m.tsum += a;
        }
    }
    return m;
}

InductanceKernel::PairMoments InductanceKernel::analytic_inner_moments(int e0, int e1) const {
    // outer 11-point rule on e0, exact Green volume potentials over e1
    const auto inner = mesh_.element_vertices(e1);
    const double v0 = mesh_.volumes[e0];
    PairMoments m;
    for (int p = 0; p < 11; ++p) {
        const Vec3 x = pts11_.row(e0 * 11 + p).transpose();
        const TetPotentials pot = tet_potentials(inner, x);
        const double alpha = w11_[p] * v0 * pot.inv_r / (4.0 * pi);
        const Vec3 beta = w11_[p] * v0 * pot.dist_grad / (4.0 * pi);
        m.t0 += x.dot(beta) + alpha * x.squaredNorm();
        m.ta += beta + alpha * x;
        m.tb += alpha * x;
        m.tsum += alpha;
    }
    return m;
}

InductanceKernel::PairMoments InductanceKernel::pair_moments(int e0, int e1) const {
    const double sep = (mesh_.centroids.row(e0) - mesh_.centroids.row(e1)).norm();
    const double d = 0.5 * (diam_[e0] + diam_[e1]);
    if (e0 == e1 || sep < 1.5 * d || share_node(e0, e1)) return analytic_inner_moments(e0, e1);
    if (sep < 12.0 * d) return tensor_moments(e0, e1, pts11_, w11_, pts11_, w11_);
    return tensor_moments(e0, e1, pts4_, w4_, pts4_, w4_);
}

double InductanceKernel::face_term(const PairMoments& m, bool swapped, const Vec3& a_out,
                                   const Vec3& a_in) const {
    // raw = t0 - a_out·ta - a_in·tb + (a_out·a_in) tsum, with the roles of the
    // outer/inner opposite vertices exchanged when the canonical order is
    // being read backwards
    if (!swapped) return m.t0 - a_out.dot(m.ta) - a_in.dot(m.tb) + a_out.dot(a_in) * m.tsum;
    return m.t0 - a_in.dot(m.ta) - a_out.dot(m.tb) + a_out.dot(a_in) * m.tsum;
}

double InductanceKernel::entry(int face_i, int face_j) const {
    const Face& fi = mesh_.faces[face_i];
    const Face& fj = mesh_.faces[face_j];
    const int ei[2] = {fi.elem_front, fi.elem_back};
    const int oi[2] = {fi.opp_front, fi.opp_back};
    const double si[2] = {1.0, -1.0};
    const int ej[2] = {fj.elem_front, fj.elem_back};
    const int oj[2] = {fj.opp_front, fj.opp_back};
    const double sj[2] = {1.0, -1.0};
    double acc = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const int e0 = ei[a], e1 = ej[b];
            const bool swapped = e0 > e1;
            const PairMoments m =
                swapped ? pair_moments(e1, e0) : pair_moments(e0, e1);
            const Vec3 a_out = mesh_.nodes.row(oi[a]).transpose();
            const Vec3 a_in = mesh_.nodes.row(oj[b]).transpose();
            acc += si[a] * sj[b] * face_term(m, swapped, a_out, a_in) /
                   (9.0 * mesh_.volumes[e0] * mesh_.volumes[e1]);
        }
    return mu0 * acc;
}

// ---------------------------------------------------------------------------
// oracle with per-call element-pair caching

namespace {

struct PairCache {
    const InductanceKernel& kernel;
    std::unordered_map<std::uint64_t, InductanceKernel::PairMoments> map;

    explicit PairCache(const InductanceKernel& k) : kernel(k) { map.reserve(256); }

    const InductanceKernel::PairMoments& get(int e0, int e1) {
        const std::uint64_t key =
            (static_cast<std::uint64_t>(e0) << 32) | static_cast<std::uint32_t>(e1);
        auto it = map.find(key);
        if (it == map.end()) it = map.emplace(key, kernel.pair_moments(e0, e1)).first;
        return it->second;
    }
};

double cached_entry(PairCache& cache, const Mesh& mesh, const InductanceKernel& kernel, int face_i,
                    int face_j) {
    const Face& fi = mesh.faces[face_i];
    const Face& fj = mesh.faces[face_j];
    const int ei[2] = {fi.elem_front, fi.elem_back};
    const int oi[2] = {fi.opp_front, fi.opp_back};
    const int ej[2] = {fj.elem_front, fj.elem_back};
    const int oj[2] = {fj.opp_front, fj.opp_back};
    double acc = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const int e0 = ei[a], e1 = ej[b];
            const bool swapped = e0 > e1;
            const auto& m = swapped ? cache.get(e1, e0) : cache.get(e0, e1);
            const Vec3 a_out = mesh.nodes.row(oi[a]).transpose();
            const Vec3 a_in = mesh.nodes.row(oj[b]).transpose();
            const double sign = (a == 0 ? 1.0 : -1.0) * (b == 0 ? 1.0 : -1.0);
            acc += sign * kernel.face_term(m, swapped, a_out, a_in) /
                   (9.0 * mesh.volumes[e0] * mesh.volumes[e1]);
        }
    return mu0 * acc;
}

}  // namespace

InductanceOracle::InductanceOracle(const InductanceKernel& kernel)
    : kernel_(kernel), n_(kernel.mesh().n_faces()) {}

void InductanceOracle::eval_row(int i, const int* col_idx, int n, double* out) const {
    PairCache cache(kernel_);
    for (int k = 0; k < n; ++k) out[k] = cached_entry(cache, kernel_.mesh(), kernel_, i, col_idx[k]);
}

void InductanceOracle::eval_col(int j, const int* row_idx, int n, double* out) const {
    PairCache cache(kernel_);
    for (int k = 0; k < n; ++k) out[k] = cached_entry(cache, kernel_.mesh(), kernel_, row_idx[k], j);
}

void InductanceOracle::eval_block(const int* row_idx, int n_rows, const int* col_idx, int n_cols,
                                  MatX& out) const {
    // one moment cache for the whole block; near blocks revisit the same
    // element pairs many times
    PairCache cache(kernel_);
    out.resize(n_rows, n_cols);
    for (int i = 0; i < n_rows; ++i)
        for (int j = 0; j < n_cols; ++j)
            out(i, j) = cached_entry(cache, kernel_.mesh(), kernel_, row_idx[i], col_idx[j]);
}

// ---------------------------------------------------------------------------
// sparse pieces

SpMat assemble_resistance(const Mesh& mesh, double resistivity) {
    if (resistivity <= 0.0) throw ConfigError("resistivity must be positive");
    const auto& rule = TetRule::degree2();  // exact for the quadratic integrand
    std::vector<Triplet> trip;
    trip.reserve(mesh.n_elements() * 16);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const int nf = mesh.elem_face_count[e];
        const auto verts = mesh.element_vertices(e);
        const double ve = mesh.volumes[e];
        for (int a = 0; a < nf; ++a)
            for (int b = 0; b < nf; ++b) {
                const auto& fa = mesh.elem_faces[e][a];
                const auto& fb = mesh.elem_faces[e][b];
                const Vec3 na = mesh.nodes.row(mesh.opposite_node(fa.face, e)).transpose();
                const Vec3 nb = mesh.nodes.row(mesh.opposite_node(fb.face, e)).transpose();
                double acc = 0.0;
                for (const auto& p : rule.points) {
                    const Vec3 x = p.bary[0] * verts[0] + p.bary[1] * verts[1] +
                                   p.bary[2] * verts[2] + p.bary[3] * verts[3];
                    acc += p.weight * (x - na).dot(x - nb);
                }
                const double val =
                    resistivity * fa.sign * fb.sign * acc * ve / (9.0 * ve * ve);
                trip.emplace_back(fa.face, fb.face, val);
            }
    }
    SpMat r(mesh.n_faces(), mesh.n_faces());
    r.setFromTriplets(trip.begin(), trip.end());
    return r;
}

std::vector<int> connected_components(const Mesh& mesh) {
    std::vector<int> comp(mesh.n_elements(), -1);
    int n_comp = 0;
    std::vector<int> stack;
    for (int seed = 0; seed < mesh.n_elements(); ++seed) {
        if (comp[seed] >= 0) continue;
        comp[seed] = n_comp;
        stack.push_back(seed);
        while (!stack.empty()) {
            const int e = stack.back();
            stack.pop_back();
            for (int k = 0; k < mesh.elem_face_count[e]; ++k) {
                const Face& f = mesh.faces[mesh.elem_faces[e][k].face];
                const int other = f.elem_front == e ? f.elem_back : f.elem_front;
                if (comp[other] < 0) {
                    comp[other] = n_comp;
                    stack.push_back(other);
                }
            }
        }
        ++n_comp;
    }
    return comp;
}

MatX assemble_input_map(const Mesh& mesh, const CoilSet& coils) {
    MatX b = MatX::Zero(mesh.n_faces(), coils.size());
    const auto& rule = TetRule::degree4();
    for (int c = 0; c < coils.size(); ++c) {
        const Coil& coil = coils.coils[c];
        for (int e = 0; e < mesh.n_elements(); ++e) {
            const auto verts = mesh.element_vertices(e);
            // quadrature of A at the element, then one pass per face
            std::array<Vec3, 11> a_vals;
            std::array<Vec3, 11> x_vals;
            for (int q = 0; q < 11; ++q) {
                const auto& p = rule.points[q];
                x_vals[q] = p.bary[0] * verts[0] + p.bary[1] * verts[1] + p.bary[2] * verts[2] +
                            p.bary[3] * verts[3];
                a_vals[q] = loop_vector_potential(coil.loop, 1.0, x_vals[q]);
            }
            for (int k = 0; k < mesh.elem_face_count[e]; ++k) {
                const auto& ef = mesh.elem_faces[e][k];
                const Vec3 opp = mesh.nodes.row(mesh.opposite_node(ef.face, e)).transpose();
                double acc = 0.0;
                for (int q = 0; q < 11; ++q)
                    acc += rule.points[q].weight * a_vals[q].dot(x_vals[q] - opp);
                b(ef.face, c) += ef.sign * acc / 3.0;  // V_e cancels the 1/(3V_e)
            }
        }
    }
    return b;
}

// ---------------------------------------------------------------------------
// FOM assembly

namespace {

SpMat near_field_inductance(const Mesh& mesh, const InductanceKernel& kernel) {
    // entries restricted to face pairs that share an element (the resistance
    // pattern); used by the shifted saddle preconditioner
    std::vector<Triplet> trip;
    std::vector<char> seen;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const int nf = mesh.elem_face_count[e];
        for (int a = 0; a < nf; ++a)
            for (int b = 0; b < nf; ++b) {
                const int fa = mesh.elem_faces[e][a].face;
                const int fb = mesh.elem_faces[e][b].face;
                // a face pair can share two elements; count it once
                if (a != b && fa > fb) continue;
                trip.emplace_back(fa, fb, kernel.entry(fa, fb));
                if (a != b) trip.emplace_back(fb, fa, kernel.entry(fb, fa));
            }
    }
    SpMat m(mesh.n_faces(), mesh.n_faces());
    // duplicate (two shared elements) entries must overwrite, not accumulate
    m.setFromTriplets(trip.begin(), trip.end(),
                      [](const double&, const double& b) { return b; });
    return m;
}

}  // namespace

EmFom assemble_em_fom(const Mesh& mesh, double resistivity, const CoilSet& coils,
                      const EmAssemblyOptions& opts) {
    if (mesh.n_faces() < 1) throw ConfigError("mesh has no internal faces (no current DoFs)");
    EmFom fom;
    fom.n_faces = mesh.n_faces();
    fom.n_elements = mesh.n_elements();
    fom.resistivity = resistivity;

    InductanceKernel kernel(mesh);
    InductanceOracle oracle(kernel);
    MatX3 face_centroids(mesh.n_faces(), 3);
    for (int k = 0; k < mesh.n_faces(); ++k)
        face_centroids.row(k) = mesh.faces[k].centroid.transpose();
    const ClusterTree tree = ClusterTree::build(face_centroids, opts.n_min);
    fom.L = hbuild(oracle, tree, tree, opts.eta_adm, opts.eps, 0, opts.threads);

    fom.R = assemble_resistance(mesh, resistivity);
    fom.L_near = near_field_inductance(mesh, kernel);
    fom.D = build_incidence(mesh);
    fom.Dt = fom.D.transpose();
    fom.B_i = assemble_input_map(mesh, coils);

    fom.component = connected_components(mesh);
    const int n_comp = 1 + *std::max_element(fom.component.begin(), fom.component.end());
    fom.grounded.assign(n_comp, -1);
    for (int e = 0; e < mesh.n_elements(); ++e)
        if (fom.grounded[fom.component[e]] < 0) fom.grounded[fom.component[e]] = e;

    // positivity probes through the compressed operator
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> gauss;
    for (int probe = 0; probe < 3; ++probe) {
        VecX x(fom.n_faces);
        for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);
        const double quad = x.dot(fom.L.apply(x));
        if (!(quad > 0.0))
            throw NumericalError("compressed inductance lost positive definiteness");
        if (!(x.dot(fom.R * x) > 0.0))
            throw NumericalError("resistance matrix is not positive definite");
    }
    return fom;
}

void EmFom::apply_shifted(double s, const VecX& x, VecX& y) const {
    if (x.size() != n_states()) throw ConfigError("apply_shifted: dimension mismatch");
    y.resize(n_states());
    const auto j = x.head(n_faces);
    const auto phi = x.tail(n_elements);
    VecX top = VecX::Zero(n_faces);
    L.apply_add(j, top, s);
    top.noalias() += R * j;
    top.noalias() += Dt * phi;
    y.head(n_faces) = top;
    y.tail(n_elements).noalias() = D * j;
    for (int g : grounded) y[n_faces + g] = phi[g];
}

VecX EmFom::input_column(int coil) const {
    VecX b = VecX::Zero(n_states());
    b.head(n_faces) = -B_i.col(coil);
    return b;
}

// ---------------------------------------------------------------------------
// shifted solver

ShiftedEmSolver::ShiftedEmSolver(const EmFom& fom, double s, GmresOptions opts, bool use_near_l)
    : fom_(fom), s_(s), opts_(opts) {
    const int nf = fom.n_faces, nv = fom.n_elements;
    std::vector<Triplet> trip;
    trip.reserve(fom.R.nonZeros() + fom.L_near.nonZeros() + 2 * fom.D.nonZeros() + nv);
    for (int k = 0; k < fom.R.outerSize(); ++k)
        for (SpMat::InnerIterator it(fom.R, k); it; ++it)
            trip.emplace_back(it.row(), it.col(), it.value());
    if (use_near_l)
        for (int k = 0; k < fom.L_near.outerSize(); ++k)
            for (SpMat::InnerIterator it(fom.L_near, k); it; ++it)
                trip.emplace_back(it.row(), it.col(), s * it.value());
    std::vector<char> is_grounded(nv, 0);
    for (int g : fom.grounded) is_grounded[g] = 1;
    for (int k = 0; k < fom.D.outerSize(); ++k)
        for (SpMat::InnerIterator it(fom.D, k); it; ++it) {
            trip.emplace_back(nf + it.row(), it.col(), it.value());  // D row
            trip.emplace_back(it.col(), nf + it.row(), it.value());  // D^T column
        }
    // grounded constraint rows become identity rows
    std::vector<Triplet> kept;
    kept.reserve(trip.size());
    for (const auto& t : trip)
        if (!(t.row() >= nf && is_grounded[t.row() - nf])) kept.push_back(t);
    for (int g : fom.grounded) kept.emplace_back(nf + g, nf + g, 1.0);

    SpMat p(nf + nv, nf + nv);
    p.setFromTriplets(kept.begin(), kept.end());
    lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
    lu_->compute(p);
    if (lu_->info() != Eigen::Success)
        throw NumericalError("saddle preconditioner factorization failed");
}

VecX ShiftedEmSolver::solve(const VecX& rhs, const VecX* guess) const {
    VecX x = guess ? *guess : VecX::Zero(rhs.size());
    VecX tmp;
    auto apply = [this](const VecX& in, VecX& out) { fom_.apply_shifted(s_, in, out); };
    auto precond = [this](const VecX& in, VecX& out) { out = lu_->solve(in); };
    const GmresResult res = gmres(apply, precond, rhs, x, opts_);
    last_iters_ = res.iterations;
    if (!res.converged)
        throw NumericalError("shifted EM solve stalled at relative residual " +
                             std::to_string(res.rel_residual));
    return x;
}

// ---------------------------------------------------------------------------
// persistence

void EmFom::save(const std::string& dir) const {
    L.save(dir + "/L.hm");
    write_sparse(dir + "/R.bin", R);
    write_sparse(dir + "/L_near.bin", L_near);
    write_sparse(dir + "/D.bin", D);
    write_dense(dir + "/B_i.bin", B_i);
    write_int_vector(dir + "/grounded.bin", grounded);
    write_int_vector(dir + "/component.bin", component);
    VecX meta(3);
    meta << resistivity, n_faces, n_elements;
    write_vector(dir + "/meta.bin", meta);
}

EmFom EmFom::load(const std::string& dir) {
    EmFom fom;
    fom.L = HMatrix::load(dir + "/L.hm");
    fom.R = read_sparse(dir + "/R.bin");
    fom.L_near = read_sparse(dir + "/L_near.bin");
    fom.D = read_sparse(dir + "/D.bin");
    fom.Dt = fom.D.transpose();
    fom.B_i = read_dense(dir + "/B_i.bin");
    fom.grounded = read_int_vector(dir + "/grounded.bin");
    fom.component = read_int_vector(dir + "/component.bin");
    const VecX meta = read_vector(dir + "/meta.bin");
    fom.resistivity = meta[0];
    fom.n_faces = static_cast<int>(meta[1]);
    fom.n_elements = static_cast<int>(meta[2]);
    return fom;
}

}  // namespace vvrom
