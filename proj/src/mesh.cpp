#include "vvrom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "vvrom/quadrature.hpp"

namespace vvrom {

namespace {

constexpr double kMinVolume = 1e-18;  // m^3

std::array<int, 3> sorted_triple(int a, int b, int c) {
    std::array<int, 3> t = {a, b, c};
    std::sort(t.begin(), t.end());
    return t;
}

}  // namespace

std::array<Vec3, 4> Mesh::element_vertices(int e) const {
    std::array<Vec3, 4> v;
    for (int i = 0; i < 4; ++i) v[i] = nodes.row(elements(e, i)).transpose();
    return v;
}

double Mesh::element_diameter(int e) const {
    const auto v = element_vertices(e);
    double d = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) d = std::max(d, (v[i] - v[j]).norm());
    return d;
}

double Mesh::face_sign(int face, int elem) const {
    const Face& f = faces.at(face);
    if (f.elem_front == elem) return 1.0;
    if (f.elem_back == elem) return -1.0;
    throw ConfigError("face " + std::to_string(face) + " not adjacent to element " +
                      std::to_string(elem));
}

int Mesh::opposite_node(int face, int elem) const {
    const Face& f = faces.at(face);
    if (f.elem_front == elem) return f.opp_front;
    if (f.elem_back == elem) return f.opp_back;
    throw ConfigError("face " + std::to_string(face) + " not adjacent to element " +
                      std::to_string(elem));
}

Vec3 face_basis_moment(const Mesh& mesh, int face, int elem) {
    const double s = mesh.face_sign(face, elem);
    const Vec3 opp = mesh.nodes.row(mesh.opposite_node(face, elem)).transpose();
    return s * (mesh.centroids.row(elem).transpose() - opp) / 3.0;
}

SpMat build_incidence(const Mesh& mesh) {
    std::vector<Triplet> trip;
    trip.reserve(2 * mesh.n_faces());
    for (int k = 0; k < mesh.n_faces(); ++k) {
        trip.emplace_back(mesh.faces[k].elem_front, k, 1.0);
        trip.emplace_back(mesh.faces[k].elem_back, k, -1.0);
    }
    SpMat d(mesh.n_elements(), mesh.n_faces());
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
}

Mesh mesh_from_arrays(const MatX3& nodes, const MatX4i& tets, const std::vector<int>& tags) {
    if (tets.rows() < 1) throw ConfigError("mesh has no tetrahedra");
    Mesh m;
    m.nodes = nodes;
    m.elements = tets;
    m.element_tags = tags.empty() ? std::vector<int>(tets.rows(), 0) : tags;
    if (static_cast<int>(m.element_tags.size()) != tets.rows())
        throw ConfigError("element tag count mismatch");

    const int nv = m.n_elements();
    m.volumes.resize(nv);
    m.centroids.resize(nv, 3);
    for (int e = 0; e < nv; ++e) {
        for (int i = 0; i < 4; ++i) {
            const int n = m.elements(e, i);
            if (n < 0 || n >= m.n_nodes()) throw ConfigError("element references missing node");
        }
        auto v = m.element_vertices(e);
        double vol = tet_signed_volume(v[0], v[1], v[2], v[3]);
        if (vol < 0.0) {  // orientation fix-up
            std::swap(m.elements(e, 2), m.elements(e, 3));
            vol = -vol;
        }
        if (vol < kMinVolume)
            throw ConfigError("degenerate element " + std::to_string(e) + " (volume " +
                              std::to_string(vol) + ")");
        m.volumes[e] = vol;
        v = m.element_vertices(e);
        m.centroids.row(e) = 0.25 * (v[0] + v[1] + v[2] + v[3]).transpose();
    }

    // enumerate faces: map sorted node triple -> adjacency
    struct Adj {
        int elems[2] = {-1, -1};
        int opp[2] = {-1, -1};
        int count = 0;
    };
    std::map<std::array<int, 3>, Adj> table;
    for (int e = 0; e < nv; ++e) {
        for (int i = 0; i < 4; ++i) {
            const std::array<int, 3> tri = sorted_triple(
                m.elements(e, (i + 1) % 4), m.elements(e, (i + 2) % 4), m.elements(e, (i + 3) % 4));
            Adj& a = table[tri];
            if (a.count >= 2)
                throw ConfigError("non-manifold face (more than two adjacent elements)");
            a.elems[a.count] = e;
            a.opp[a.count] = m.elements(e, i);
            ++a.count;
        }
    }

    m.elem_faces.assign(nv, {});
    m.elem_face_count.assign(nv, 0);
    // std::map iterates in lexicographic node-triple order, which fixes the
    // face (DoF) numbering as a pure function of geometry/connectivity.
    for (const auto& [tri, adj] : table) {
        if (adj.count == 1) {
            m.boundary_faces.push_back({tri, adj.elems[0]});
            continue;
        }
        Face f;
        f.nodes = tri;
        // front = lower element index
        const int lo = adj.elems[0] <= adj.elems[1] ? 0 : 1;
        f.elem_front = adj.elems[lo];
        f.elem_back = adj.elems[1 - lo];
        f.opp_front = adj.opp[lo];
        f.opp_back = adj.opp[1 - lo];
        const Vec3 a = m.nodes.row(tri[0]).transpose();
        const Vec3 b = m.nodes.row(tri[1]).transpose();
        const Vec3 c = m.nodes.row(tri[2]).transpose();
        Vec3 n = (b - a).cross(c - a);
        const double doubled = n.norm();
        if (doubled <= 0.0) throw ConfigError("zero-area face");
        f.area = 0.5 * doubled;
        n /= doubled;
        f.centroid = (a + b + c) / 3.0;
        // normal exits the front element
        if (n.dot(f.centroid - m.centroids.row(f.elem_front).transpose()) < 0.0) n = -n;
        f.normal = n;
        const int id = static_cast<int>(m.faces.size());
        for (int side = 0; side < 2; ++side) {
            const int e = side == 0 ? f.elem_front : f.elem_back;
            auto& slot = m.elem_faces[e][m.elem_face_count[e]++];
            slot.face = id;
            slot.sign = side == 0 ? 1.0 : -1.0;
        }
        m.faces.push_back(f);
    }

    // Euler-type consistency: every tet contributes exactly 4 faces
    if (4 * static_cast<std::size_t>(nv) !=
        2 * m.faces.size() + m.boundary_faces.size())
        throw NumericalError("face bookkeeping is inconsistent");
    return m;
}

namespace {

Mesh read_flat(std::istream& in) {
    int nn = 0;
    if (!(in >> nn) || nn < 4) throw ConfigError("flat mesh: bad node count");
    MatX3 nodes(nn, 3);
    for (int i = 0; i < nn; ++i)
        if (!(in >> nodes(i, 0) >> nodes(i, 1) >> nodes(i, 2)))
            throw ConfigError("flat mesh: bad node line " + std::to_string(i));
    int nv = 0;
    if (!(in >> nv) || nv < 1) throw ConfigError("flat mesh: bad element count");
    MatX4i tets(nv, 4);
    for (int e = 0; e < nv; ++e)
        if (!(in >> tets(e, 0) >> tets(e, 1) >> tets(e, 2) >> tets(e, 3)))
            throw ConfigError("flat mesh: bad element line " + std::to_string(e));
    return mesh_from_arrays(nodes, tets);
}

Mesh read_gmsh_v2(std::istream& in) {
    std::string line;
    std::vector<Vec3> coords;
    std::map<long, int> id_map;
    std::vector<std::array<int, 4>> tets;
    std::vector<int> tags;
    bool saw_nodes = false, saw_elements = false;
    while (std::getline(in, line)) {
        if (line.rfind("$MeshFormat", 0) == 0) {
            double version = 0.0;
            int file_type = 0, data_size = 0;
            in >> version >> file_type >> data_size;
            if (version < 2.0 || version >= 3.0 || file_type != 0)
                throw ConfigError("gmsh: only ASCII v2 is supported");
            std::getline(in, line);
        } else if (line.rfind("$Nodes", 0) == 0) {
            saw_nodes = true;
            long count = 0;
            in >> count;
            for (long i = 0; i < count; ++i) {
                long id;
                double x, y, z;
                if (!(in >> id >> x >> y >> z)) throw ConfigError("gmsh: bad node line");
                id_map[id] = static_cast<int>(coords.size());
                coords.push_back(Vec3(x, y, z));
            }
            std::getline(in, line);
        } else if (line.rfind("$Elements", 0) == 0) {
            saw_elements = true;
            long count = 0;
            in >> count;
            std::getline(in, line);
            for (long i = 0; i < count; ++i) {
                if (!std::getline(in, line)) throw ConfigError("gmsh: truncated elements");
                std::istringstream ls(line);
                long id;
                int type, ntags;
                if (!(ls >> id >> type >> ntags)) throw ConfigError("gmsh: bad element line");
                int physical = 0;
                for (int t = 0; t < ntags; ++t) {
                    int tag;
                    if (!(ls >> tag)) throw ConfigError("gmsh: bad element tags");
                    if (t == 0) physical = tag;
                }
                if (type != 4) continue;  // keep 4-node tets, skip the rest
                std::array<int, 4> conn;
                for (int k = 0; k < 4; ++k) {
                    long n;
                    if (!(ls >> n)) throw ConfigError("gmsh: bad tet connectivity");
                    auto it = id_map.find(n);
                    if (it == id_map.end()) throw ConfigError("gmsh: tet references missing node");
                    conn[k] = it->second;
                }
                tets.push_back(conn);
                tags.push_back(physical);
            }
        }
    }
    if (!saw_nodes || !saw_elements) throw ConfigError("gmsh: missing $Nodes or $Elements");
    if (tets.empty()) throw ConfigError("gmsh: no tetrahedra found");
    MatX3 nodes(static_cast<int>(coords.size()), 3);
    for (int i = 0; i < nodes.rows(); ++i) nodes.row(i) = coords[i].transpose();
    MatX4i conn(static_cast<int>(tets.size()), 4);
    for (int e = 0; e < conn.rows(); ++e)
        for (int k = 0; k < 4; ++k) conn(e, k) = tets[e][k];
    return mesh_from_arrays(nodes, conn, tags);
}

}  // namespace

Mesh load_mesh(const std::string& path, MeshFormat format) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mesh file: " + path);
    return format == MeshFormat::GmshV2 ? read_gmsh_v2(in) : read_flat(in);
}

Mesh load_mesh(const std::string& path) {
    const bool gmsh = path.size() > 4 && path.substr(path.size() - 4) == ".msh";
    return load_mesh(path, gmsh ? MeshFormat::GmshV2 : MeshFormat::FlatText);
}

void write_flat_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write mesh file: " + path);
    out.precision(17);
    out << mesh.n_nodes() << "\n";
    for (int i = 0; i < mesh.n_nodes(); ++i)
        out << mesh.nodes(i, 0) << " " << mesh.nodes(i, 1) << " " << mesh.nodes(i, 2) << "\n";
    out << mesh.n_elements() << "\n";
    for (int e = 0; e < mesh.n_elements(); ++e)
        out << mesh.elements(e, 0) << " " << mesh.elements(e, 1) << " " << mesh.elements(e, 2)
            << " " << mesh.elements(e, 3) << "\n";
}

Mesh make_torus_shell(double major_radius, double minor_radius, double thickness,
                      int n_toroidal, int n_poloidal, int n_radial) {
    if (n_toroidal < 3 || n_poloidal < 3 || n_radial < 1)
        throw ConfigError("torus fixture: need n_toroidal,n_poloidal >= 3 and n_radial >= 1");
    if (minor_radius <= 0.5 * thickness || major_radius <= minor_radius + 0.5 * thickness)
        throw ConfigError("torus fixture: radii/thickness are inconsistent");
    const int nt = n_toroidal, np = n_poloidal, nr = n_radial;
    const int nn = nt * np * (nr + 1);
    MatX3 nodes(nn, 3);
    auto node_id = [&](int it, int ip, int ir) {
        return (it % nt) * np * (nr + 1) + (ip % np) * (nr + 1) + ir;
    };
    for (int it = 0; it < nt; ++it) {
        const double phi = 2.0 * pi * it / nt;
        for (int ip = 0; ip < np; ++ip) {
            const double theta = 2.0 * pi * ip / np;
            for (int ir = 0; ir <= nr; ++ir) {
                const double r = minor_radius - 0.5 * thickness + thickness * ir / nr;
                const double rho = major_radius + r * std::cos(theta);
                nodes.row(node_id(it, ip, ir)) =
                    Vec3(rho * std::cos(phi), rho * std::sin(phi), r * std::sin(theta)).transpose();
            }
        }
    }
    // Freudenthal decomposition: the same 6-tet pattern in every hex cell is
    // conforming across cells, including the two periodic wraps.
    static const int kTets[6][4] = {{0, 1, 3, 7}, {0, 1, 7, 5}, {0, 5, 7, 4},
                                    {0, 3, 2, 7}, {0, 2, 6, 7}, {0, 6, 4, 7}};
    const int nv = 6 * nt * np * nr;
    MatX4i tets(nv, 4);
    int e = 0;
    for (int it = 0; it < nt; ++it)
        for (int ip = 0; ip < np; ++ip)
            for (int ir = 0; ir < nr; ++ir) {
                // hex corner numbering: bit0 -> it+1, bit1 -> ip+1, bit2 -> ir+1
                int corner[8];
                for (int c = 0; c < 8; ++c)
                    corner[c] = node_id(it + (c & 1), ip + ((c >> 1) & 1), ir + ((c >> 2) & 1));
                for (const auto& t : kTets) {
                    for (int k = 0; k < 4; ++k) tets(e, k) = corner[t[k]];
                    ++e;
                }
            }
    return mesh_from_arrays(nodes, tets);
}

Mesh make_box_bar(double length, double width, double height, int nx, int ny, int nz) {
    if (nx < 1 || ny < 1 || nz < 1) throw ConfigError("box fixture: bad resolution");
    const int nn = (nx + 1) * (ny + 1) * (nz + 1);
    MatX3 nodes(nn, 3);
    auto node_id = [&](int i, int j, int k) { return (i * (ny + 1) + j) * (nz + 1) + k; };
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j <= ny; ++j)
            for (int k = 0; k <= nz; ++k)
                nodes.row(node_id(i, j, k)) =
                    Vec3(length * i / nx, width * j / ny, height * k / nz).transpose();
    static const int kTets[6][4] = {{0, 1, 3, 7}, {0, 1, 7, 5}, {0, 5, 7, 4},
                                    {0, 3, 2, 7}, {0, 2, 6, 7}, {0, 6, 4, 7}};
    MatX4i tets(6 * nx * ny * nz, 4);
    int e = 0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                int corner[8];
                for (int c = 0; c < 8; ++c)
                    corner[c] = node_id(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                for (const auto& t : kTets) {
                    for (int q = 0; q < 4; ++q) tets(e, q) = corner[t[q]];
                    ++e;
                }
            }
    return mesh_from_arrays(nodes, tets);
}

std::uint64_t mesh_hash(const Mesh& mesh) {
    std::uint64_t h = fnv1a(mesh.nodes.data(), sizeof(double) * mesh.nodes.size());
    h = fnv1a(mesh.elements.data(), sizeof(int) * mesh.elements.size(), h);
    return h;
}

}  // namespace vvrom
