#pragma once

#include <optional>
#include <string>

#include "vvrom/elasticity.hpp"
#include "vvrom/em_assembly.hpp"

namespace vvrom {

// Support predicate: which nodes carry the zero-displacement condition.
struct DirichletSpec {
    enum class Kind { PoloidalBand, Box, Nodes };
    Kind kind = Kind::PoloidalBand;
    // poloidal band on the shell: angle measured around the ring axis at
    // major_radius, zero at the outboard midplane, positive upward
    double major_radius = 0.0;
    double center_deg = -60.0;
    double halfwidth_deg = 15.0;
    Vec3 box_lo = Vec3::Zero(), box_hi = Vec3::Zero();
    std::vector<int> nodes;

    std::vector<int> select_nodes(const Mesh& mesh) const;
    std::vector<int> select_dofs(const Mesh& mesh) const;  // 3 per node
};

struct ProbeSpec {
    std::vector<Vec3> points;  // snapped to nearest node and element centroid
    std::vector<int> nodes;    // explicit additions
    std::vector<int> elements;

    struct Resolved {
        std::vector<int> nodes;
        std::vector<int> elements;
    };
    Resolved resolve(const Mesh& mesh) const;
};

struct StepperConfig {
    double theta = 0.5;
    double tau = 1e-3;  // s
};

struct TrainingConfig {
    int n_scenarios = 3;   // randomized waveform sets besides the nominal one
    int n_segments = 6;    // piecewise-linear breakpoints per waveform
    std::uint64_t seed = 1234;
    double amplitude_scale = 1.2;
    int snapshot_stride = 5;  // keep every n-th step as a snapshot
};

struct ToleranceConfig {
    double eps = 1e-6;      // block compression
    double eta_adm = 2.0;   // admissibility ratio
    double eta_rom = 1e-3;  // ROM accuracy target
};

// Excitation description: static background coils with fixed currents plus a
// crown of equivalent loops standing in for the moving plasma centroid.
struct Scenario {
    std::string name;
    CoilSet coils;
    VecX static_currents;  // [A], one per static coil

    // crown geometry (dynamic loops live on it)
    double crown_r = 0.0, crown_z = 0.0, crown_radius = 0.0;
    int n_eq = 0;

    MatX trajectory;  // rows (t, r_p, z_p)
    MatX plasma_current;  // rows (t, I_p)
    double horizon = 0.0;

    ProbeSpec probes;
    DirichletSpec dirichlet;
    Material material;
    double resistivity = 0.0;
    StepperConfig stepper;
    TrainingConfig training;
    ToleranceConfig tolerances;

    bool has_plasma() const { return trajectory.rows() > 0; }
    int n_dynamic() const { return static_cast<int>(coils.dynamic_indices().size()); }

    // piecewise-linear interpolants of the plasma samples
    double plasma_current_at(double t) const;
    Vec3 centroid_at(double t) const;  // (r, z, 0-padded)

    // dynamic coil currents at time t (zero when no plasma is defined)
    VecX dynamic_currents(double t) const;
};

// Minimum-norm currents on the crown loops reproducing the plasma current and
// its centroid at time t. Hard error when the centroid leaves the crown.
VecX fit_equivalent_currents(const Scenario& scenario, double t);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);
std::string scenario_to_json(const Scenario& scenario);

// Built-in presets: "torus-fixture" (desk scale) and "d-shape".
Scenario builtin_scenario(const std::string& name);
// Resolves a path or a built-in name.
Scenario resolve_scenario(const std::string& path_or_name);

}  // namespace vvrom
