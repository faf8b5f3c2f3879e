#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "vvrom/common.hpp"

namespace vvrom {

// Per-step outputs of a transient run (ROM or FOM chain). One row per time
// step; columns follow the CSV layout documented in the README: time, dynamic
// coil currents, total force, probe displacements, probe strains.
struct ResultTable {
    VecX times;        // n
    MatX currents;     // n x n_dyn [A]
    MatX total_force;  // n x 3 [N]
    MatX probe_disp;   // n x 3*n_probe_nodes [m]
    MatX probe_strain; // n x 6*n_probe_elems (xx, yy, zz, xy, yz, xz)
    std::vector<int> probe_nodes;
    std::vector<int> probe_elements;
    double wall_seconds = 0.0;
    double horizon = 0.0;

    int n_rows() const { return static_cast<int>(times.size()); }

    void write_csv(std::ostream& os) const;
    std::string summary_json() const;

    double peak_force_norm() const;
    int peak_force_row() const;
    double peak_displacement() const;
};

}  // namespace vvrom
