#include "vvrom/scenario.hpp"

#include <Eigen/QR>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace vvrom {

using nlohmann::ordered_json;

std::vector<int> DirichletSpec::select_nodes(const Mesh& mesh) const {
    std::vector<int> out;
    switch (kind) {
        case Kind::Nodes:
            out = nodes;
            break;
        case Kind::Box:
            for (int n = 0; n < mesh.n_nodes(); ++n) {
                const Vec3 p = mesh.nodes.row(n).transpose();
                if ((p.array() >= box_lo.array()).all() && (p.array() <= box_hi.array()).all())
                    out.push_back(n);
            }
            break;
        case Kind::PoloidalBand: {
            const double lo = (center_deg - halfwidth_deg) * pi / 180.0;
            const double hi = (center_deg + halfwidth_deg) * pi / 180.0;
            for (int n = 0; n < mesh.n_nodes(); ++n) {
                const Vec3 p = mesh.nodes.row(n).transpose();
                const double rho = std::hypot(p.x(), p.y());
                const double ang = std::atan2(p.z(), rho - major_radius);
                if (ang >= lo && ang <= hi) out.push_back(n);
            }
            break;
        }
    }
    if (out.empty()) throw ConfigError("Dirichlet predicate selected no nodes");
    return out;
}

std::vector<int> DirichletSpec::select_dofs(const Mesh& mesh) const {
    std::vector<int> dofs;
    for (int n : select_nodes(mesh))
        for (int c = 0; c < 3; ++c) dofs.push_back(3 * n + c);
    return dofs;
}

ProbeSpec::Resolved ProbeSpec::resolve(const Mesh& mesh) const {
    Resolved r;
    r.nodes = nodes;
    r.elements = elements;
    for (const Vec3& p : points) {
        int best_node = 0;
        double best = (mesh.nodes.row(0).transpose() - p).norm();
        for (int n = 1; n < mesh.n_nodes(); ++n) {
            const double d = (mesh.nodes.row(n).transpose() - p).norm();
            if (d < best) {
                best = d;
                best_node = n;
            }
        }
        r.nodes.push_back(best_node);
        int best_elem = 0;
        best = (mesh.centroids.row(0).transpose() - p).norm();
        for (int e = 1; e < mesh.n_elements(); ++e) {
            const double d = (mesh.centroids.row(e).transpose() - p).norm();
            if (d < best) {
                best = d;
                best_elem = e;
            }
        }
        r.elements.push_back(best_elem);
    }
    for (int n : r.nodes)
        if (n < 0 || n >= mesh.n_nodes()) throw ConfigError("probe node out of range");
    for (int e : r.elements)
        if (e < 0 || e >= mesh.n_elements()) throw ConfigError("probe element out of range");
    return r;
}

namespace {

double interp1(const MatX& samples, double t) {
    // piecewise linear on (t, value) rows; clamped at the ends
    const int n = static_cast<int>(samples.rows());
    if (n == 0) return 0.0;
    if (t <= samples(0, 0)) return samples(0, 1);
    if (t >= samples(n - 1, 0)) return samples(n - 1, 1);
    for (int i = 1; i < n; ++i) {
        if (t <= samples(i, 0)) {
            const double w = (t - samples(i - 1, 0)) / (samples(i, 0) - samples(i - 1, 0));
            return (1.0 - w) * samples(i - 1, 1) + w * samples(i, 1);
        }
    }
    return samples(n - 1, 1);
}

}  // namespace

double Scenario::plasma_current_at(double t) const { return interp1(plasma_current, t); }

Vec3 Scenario::centroid_at(double t) const {
    MatX r(trajectory.rows(), 2), z(trajectory.rows(), 2);
    r.col(0) = trajectory.col(0);
    r.col(1) = trajectory.col(1);
    z.col(0) = trajectory.col(0);
    z.col(1) = trajectory.col(2);
    return Vec3(interp1(r, t), interp1(z, t), 0.0);
}

VecX Scenario::dynamic_currents(double t) const {
    const int nd = n_dynamic();
    if (!has_plasma()) return VecX::Zero(nd);
    return fit_equivalent_currents(*this, t);
}

VecX fit_equivalent_currents(const Scenario& scenario, double t) {
    const auto dyn = scenario.coils.dynamic_indices();
    const int n = static_cast<int>(dyn.size());
    if (n < 3) throw ConfigError("equivalent-current fit needs at least 3 loops");
    const Vec3 cen = scenario.centroid_at(t);
    const double ip = scenario.plasma_current_at(t);

    // interior of the crown polygon (inradius of the regular loop polygon)
    const double dr = cen[0] - scenario.crown_r, dz = cen[1] - scenario.crown_z;
    const double inradius = scenario.crown_radius * std::cos(pi / n);
    if (std::hypot(dr, dz) > inradius)
        throw ConfigError("plasma centroid leaves the equivalent-loop crown at t = " +
                          std::to_string(t));

    // constraints: total current, current-weighted r and z centroids
    MatX c(3, n);
    for (int k = 0; k < n; ++k) {
        const Loop& loop = scenario.coils.coils[dyn[k]].loop;
        c(0, k) = 1.0;
        c(1, k) = loop.radius;     // loop radial position
        c(2, k) = loop.center.z();
    }
    Vec3 b(ip, ip * cen[0], ip * cen[1]);
    const VecX i_eq = c.completeOrthogonalDecomposition().solve(b);
    if ((c * i_eq - b).norm() > 1e-9 * std::max(1.0, std::abs(ip)))
        throw ConfigError("equivalent-current fit infeasible at t = " + std::to_string(t));
    return i_eq;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

ordered_json coil_to_json(const Coil& coil, double current) {
    ordered_json j;
    j["name"] = coil.name;
    j["center"] = {coil.loop.center.x(), coil.loop.center.y(), coil.loop.center.z()};
    j["radius"] = coil.loop.radius;
    j["axis"] = {coil.loop.axis.x(), coil.loop.axis.y(), coil.loop.axis.z()};
    j["turns"] = coil.loop.turns;
    if (!coil.dynamic) j["current"] = current;
    return j;
}

MatX json_to_samples(const ordered_json& j, int cols) {
    MatX m(j.size(), cols);
    int r = 0;
    for (const auto& row : j) {
        if (static_cast<int>(row.size()) != cols)
            throw ConfigError("scenario: sample row has wrong arity");
        for (int c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
        ++r;
    }
    return m;
}

ordered_json samples_to_json(const MatX& m) {
    ordered_json j = ordered_json::array();
    for (int r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        j.push_back(row);
    }
    return j;
}

void add_crown_loops(Scenario& s) {
    for (int k = 0; k < s.n_eq; ++k) {
        const double ang = 2.0 * pi * k / s.n_eq;
        Coil coil;
        coil.dynamic = true;
        coil.name = "eq" + std::to_string(k + 1);
        coil.loop.radius = s.crown_r + s.crown_radius * std::cos(ang);
        coil.loop.center = Vec3(0, 0, s.crown_z + s.crown_radius * std::sin(ang));
        coil.loop.axis = Vec3::UnitZ();
        coil.loop.turns = 1.0;
        s.coils.coils.push_back(coil);
    }
}

Scenario from_json(const ordered_json& j) {
    Scenario s;
    s.name = j.value("name", "scenario");
    if (j.contains("static_coils")) {
        std::vector<double> currents;
        for (const auto& cj : j.at("static_coils")) {
            Coil coil;
            coil.dynamic = false;
            coil.name = cj.value("name", "");
            const auto c = cj.at("center");
            coil.loop.center = Vec3(c[0], c[1], c[2]);
            coil.loop.radius = cj.at("radius").get<double>();
            if (coil.loop.radius <= 0.0) throw ConfigError("scenario: coil radius must be positive");
            if (cj.contains("axis")) {
                const auto a = cj.at("axis");
                coil.loop.axis = Vec3(a[0], a[1], a[2]).normalized();
            }
            coil.loop.turns = cj.value("turns", 1.0);
            currents.push_back(cj.value("current", 0.0));
            s.coils.coils.push_back(coil);
        }
        s.static_currents = Eigen::Map<VecX>(currents.data(), currents.size());
    } else {
        s.static_currents = VecX::Zero(0);
    }
    if (j.contains("plasma")) {
        const auto& p = j.at("plasma");
        s.crown_r = p.at("crown_center")[0].get<double>();
        s.crown_z = p.at("crown_center")[1].get<double>();
        s.crown_radius = p.at("crown_radius").get<double>();
        s.n_eq = p.value("n_loops", 12);
        if (s.n_eq < 3) throw ConfigError("scenario: need at least 3 equivalent loops");
        add_crown_loops(s);
        if (p.contains("trajectory")) s.trajectory = json_to_samples(p.at("trajectory"), 3);
        if (p.contains("current")) s.plasma_current = json_to_samples(p.at("current"), 2);
        if (s.trajectory.rows() > 0 && s.plasma_current.rows() == 0)
            throw ConfigError("scenario: trajectory without a plasma current waveform");
    }
    s.horizon = j.value("horizon", 0.0);
    if (j.contains("probes")) {
        const auto& p = j.at("probes");
        if (p.contains("points"))
            for (const auto& pt : p.at("points"))
                s.probes.points.push_back(Vec3(pt[0], pt[1], pt[2]));
        if (p.contains("nodes"))
            for (const auto& n : p.at("nodes")) s.probes.nodes.push_back(n.get<int>());
        if (p.contains("elements"))
            for (const auto& e : p.at("elements")) s.probes.elements.push_back(e.get<int>());
    }
    if (j.contains("dirichlet")) {
        const auto& d = j.at("dirichlet");
        const std::string kind = d.value("type", "poloidal_band");
        if (kind == "poloidal_band") {
            s.dirichlet.kind = DirichletSpec::Kind::PoloidalBand;
            s.dirichlet.major_radius = d.at("major_radius").get<double>();
            s.dirichlet.center_deg = d.value("center_deg", -60.0);
            s.dirichlet.halfwidth_deg = d.value("halfwidth_deg", 15.0);
        } else if (kind == "box") {
            s.dirichlet.kind = DirichletSpec::Kind::Box;
            const auto lo = d.at("lo"), hi = d.at("hi");
            s.dirichlet.box_lo = Vec3(lo[0], lo[1], lo[2]);
            s.dirichlet.box_hi = Vec3(hi[0], hi[1], hi[2]);
        } else if (kind == "nodes") {
            s.dirichlet.kind = DirichletSpec::Kind::Nodes;
            for (const auto& n : d.at("nodes")) s.dirichlet.nodes.push_back(n.get<int>());
        } else {
            throw ConfigError("scenario: unknown dirichlet type " + kind);
        }
    }
    const auto& m = j.at("material");
    s.material.young = m.at("young").get<double>();
    s.material.poisson = m.at("poisson").get<double>();
    s.material.density = m.at("density").get<double>();
    s.resistivity = m.at("resistivity").get<double>();
    if (j.contains("stepper")) {
        s.stepper.theta = j.at("stepper").value("theta", 0.5);
        s.stepper.tau = j.at("stepper").value("tau", 1e-3);
    }
    if (j.contains("training")) {
        const auto& t = j.at("training");
        s.training.n_scenarios = t.value("n_scenarios", 3);
        s.training.n_segments = t.value("n_segments", 6);
        s.training.seed = t.value("seed", 1234ull);
        s.training.amplitude_scale = t.value("amplitude_scale", 1.2);
        s.training.snapshot_stride = t.value("snapshot_stride", 5);
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        s.tolerances.eps = t.value("eps", 1e-6);
        s.tolerances.eta_adm = t.value("eta_adm", 2.0);
        s.tolerances.eta_rom = t.value("eta_rom", 1e-3);
    }

    // eager crown feasibility over all trajectory samples
    if (s.has_plasma())
        for (int r = 0; r < s.trajectory.rows(); ++r) fit_equivalent_currents(s, s.trajectory(r, 0));
    return s;
}

ordered_json to_json(const Scenario& s) {
    ordered_json j;
    j["name"] = s.name;
    ordered_json coils = ordered_json::array();
    const auto stat = s.coils.static_indices();
    for (std::size_t k = 0; k < stat.size(); ++k)
        coils.push_back(coil_to_json(s.coils.coils[stat[k]], s.static_currents[k]));
    j["static_coils"] = coils;
    if (s.n_eq > 0) {
        ordered_json p;
        p["crown_center"] = {s.crown_r, s.crown_z};
        p["crown_radius"] = s.crown_radius;
        p["n_loops"] = s.n_eq;
        if (s.trajectory.rows() > 0) p["trajectory"] = samples_to_json(s.trajectory);
        if (s.plasma_current.rows() > 0) p["current"] = samples_to_json(s.plasma_current);
        j["plasma"] = p;
    }
    j["horizon"] = s.horizon;
    ordered_json probes;
    ordered_json pts = ordered_json::array();
    for (const Vec3& p : s.probes.points) pts.push_back({p.x(), p.y(), p.z()});
    probes["points"] = pts;
    if (!s.probes.nodes.empty()) probes["nodes"] = s.probes.nodes;
    if (!s.probes.elements.empty()) probes["elements"] = s.probes.elements;
    j["probes"] = probes;
    ordered_json d;
    switch (s.dirichlet.kind) {
        case DirichletSpec::Kind::PoloidalBand:
            d["type"] = "poloidal_band";
            d["major_radius"] = s.dirichlet.major_radius;
            d["center_deg"] = s.dirichlet.center_deg;
            d["halfwidth_deg"] = s.dirichlet.halfwidth_deg;
            break;
        case DirichletSpec::Kind::Box:
            d["type"] = "box";
            d["lo"] = {s.dirichlet.box_lo.x(), s.dirichlet.box_lo.y(), s.dirichlet.box_lo.z()};
            d["hi"] = {s.dirichlet.box_hi.x(), s.dirichlet.box_hi.y(), s.dirichlet.box_hi.z()};
            break;
        case DirichletSpec::Kind::Nodes:
            d["type"] = "nodes";
            d["nodes"] = s.dirichlet.nodes;
            break;
    }
    j["dirichlet"] = d;
    ordered_json m;
    m["young"] = s.material.young;
    m["poisson"] = s.material.poisson;
    m["density"] = s.material.density;
    m["resistivity"] = s.resistivity;
    j["material"] = m;
    j["stepper"] = {{"theta", s.stepper.theta}, {"tau", s.stepper.tau}};
    j["training"] = {{"n_scenarios", s.training.n_scenarios},
                     {"n_segments", s.training.n_segments},
                     {"seed", s.training.seed},
                     {"amplitude_scale", s.training.amplitude_scale},
                     {"snapshot_stride", s.training.snapshot_stride}};
    j["tolerances"] = {{"eps", s.tolerances.eps},
                       {"eta_adm", s.tolerances.eta_adm},
                       {"eta_rom", s.tolerances.eta_rom}};
    return j;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("scenario parse error: ") + e.what());
    }
    try {
        return from_json(j);
    } catch (const ordered_json::exception& e) {
        throw ConfigError(std::string("scenario schema error: ") + e.what());
    }
}

std::string scenario_to_json(const Scenario& scenario) { return to_json(scenario).dump(2); }

void save_scenario(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write scenario file: " + path);
    out << scenario_to_json(scenario) << "\n";
}

namespace {

Scenario torus_fixture_preset() {
    Scenario s;
    s.name = "torus-fixture";
    // CS stack and PF ring around the desk-scale shell (major radius 3 m)
    const double cs_z[6] = {-1.5, -0.9, -0.3, 0.3, 0.9, 1.5};
    const double cs_i[6] = {-4.8e6, -4.0e6, -20.8e6, -20.8e6, -10.0e6, 5.2e6};
    const double pf_r[6] = {1.8, 3.2, 4.6, 4.6, 3.2, 1.8};
    const double pf_z[6] = {2.4, 2.6, 1.4, -1.4, -2.6, -2.4};
    const double pf_i[6] = {5.7e6, -2.8e6, -5.8e6, -4.8e6, -7.8e6, 16.8e6};
    std::vector<double> currents;
    for (int k = 0; k < 6; ++k) {
        Coil c;
        c.name = "CS" + std::to_string(k + 1);
        c.loop.radius = 0.8;
        c.loop.center = Vec3(0, 0, cs_z[k]);
        s.coils.coils.push_back(c);
        currents.push_back(cs_i[k]);
    }
    for (int k = 0; k < 6; ++k) {
        Coil c;
        c.name = "PF" + std::to_string(k + 1);
        c.loop.radius = pf_r[k];
        c.loop.center = Vec3(0, 0, pf_z[k]);
        s.coils.coils.push_back(c);
        currents.push_back(pf_i[k]);
    }
    s.static_currents = Eigen::Map<VecX>(currents.data(), currents.size());

    s.crown_r = 3.0;
    s.crown_z = 0.0;
    s.crown_radius = 0.25;
    s.n_eq = 12;
    add_crown_loops(s);

    s.trajectory.resize(4, 3);
    s.trajectory << 0.0, 3.0, 0.0,  //
        0.2, 3.0, -0.05,            //
        0.4, 2.98, -0.13,           //
        0.63, 2.97, -0.21;
    s.plasma_current.resize(5, 2);
    s.plasma_current << 0.0, 1.0e6,  //
        0.1, 0.98e6,                 //
        0.3, 0.75e6,                 //
        0.5, 0.30e6,                 //
        0.63, 0.05e6;
    s.horizon = 0.63;

    s.probes.points = {Vec3(3.55, 0, 0), Vec3(3.0, 0, 0.55), Vec3(-3.55, 0, 0)};
    s.dirichlet.kind = DirichletSpec::Kind::PoloidalBand;
    s.dirichlet.major_radius = 3.0;
    s.dirichlet.center_deg = -60.0;
    s.dirichlet.halfwidth_deg = 18.0;

    s.material = {193e9, 0.25, 8000.0};
    s.resistivity = 7.4e-7;
    return s;
}

Scenario dshape_preset() {
    Scenario s = torus_fixture_preset();
    s.name = "d-shape";
    // machine-scale layout: 6.2 m major radius, MA-class plasma
    const double cs_z[6] = {-4.25, -2.55, -0.85, 0.85, 2.55, 4.25};
    const double pf_r[6] = {3.9, 8.3, 11.9, 11.9, 8.3, 4.3};
    const double pf_z[6] = {7.6, 6.7, 3.2, -2.3, -6.7, -7.6};
    for (int k = 0; k < 6; ++k) {
        s.coils.coils[k].loop.radius = 1.7;
        s.coils.coils[k].loop.center = Vec3(0, 0, cs_z[k]);
        s.coils.coils[6 + k].loop.radius = pf_r[k];
        s.coils.coils[6 + k].loop.center = Vec3(0, 0, pf_z[k]);
    }
    // rebuild the crown at machine scale
    s.coils.coils.resize(12);
    s.crown_r = 6.2;
    s.crown_z = 0.0;
    s.crown_radius = 1.0;
    s.n_eq = 12;
    add_crown_loops(s);
    s.trajectory.resize(4, 3);
    s.trajectory << 0.0, 6.2, 0.0,  //
        0.2, 6.2, -0.2,             //
        0.4, 6.15, -0.5,            //
        0.63, 6.1, -0.85;
    s.plasma_current.resize(5, 2);
    s.plasma_current << 0.0, 15e6,  //
        0.1, 14.7e6,                //
        0.3, 11.2e6,                //
        0.5, 4.5e6,                 //
        0.63, 0.7e6;
    s.probes.points = {Vec3(6.2 + 1.1, 0, 0), Vec3(6.2, 0, 1.6), Vec3(-(6.2 + 1.1), 0, 0)};
    s.dirichlet.major_radius = 6.2;
    return s;
}

}  // namespace

Scenario builtin_scenario(const std::string& name) {
    if (name == "torus-fixture") return torus_fixture_preset();
    if (name == "d-shape") return dshape_preset();
    throw ConfigError("unknown scenario preset: " + name);
}

Scenario resolve_scenario(const std::string& path_or_name) {
    std::ifstream probe(path_or_name);
    if (probe.good()) return load_scenario(path_or_name);
    return builtin_scenario(path_or_name);
}

}  // namespace vvrom
