#pragma once

#include <memory>

#include "vvrom/coupling.hpp"
#include "vvrom/elasticity.hpp"
#include "vvrom/em_assembly.hpp"
#include "vvrom/result_table.hpp"
#include "vvrom/scenario.hpp"

namespace vvrom {

// Theta-method stepping of the full descriptor system. Each step is one
// Krylov solve of (s E - A) with s = 1/(theta*tau); the saddle preconditioner
// is factored once. Inputs enter through the exact step integral
// B_u (I_k - I_{k-1})/tau, so no derivative estimates are needed.
class EmFomStepper {
public:
    EmFomStepper(const EmFom& fom, std::vector<int> input_coils, double theta, double tau,
                 GmresOptions gmres = {});

    // Start from zero, or from a given divergence-free current pattern. A
    // nonzero start takes one tiny backward-Euler substep to settle the
    // potentials onto the constraint manifold.
    void reset();
    void reset(const VecX& j0);

    // advance one step; u = (I_k - I_{k-1})/tau per input coil
    const VecX& step(const VecX& u);

    const VecX& state() const { return x_; }
    VecX currents() const { return x_.head(fom_.n_faces); }
    int gmres_iterations() const { return total_iters_; }

private:
    const EmFom& fom_;
    std::vector<int> input_coils_;
    double theta_, tau_;
    std::unique_ptr<ShiftedEmSolver> solver_;
    GmresOptions gmres_;
    VecX x_, rhs_, ax_;
    int total_iters_ = 0;
};

// Reference chain at full order: step the DAE, reconstruct the Lorentz load
// through the coupling maps, solve the constrained stiffness system, sample
// the probes. The ROM path is validated against this chain.
ResultTable run_fom_chain(const Mesh& mesh, const EmFom& fom, const CouplingMaps& maps,
                          const StructFom& structure, const Scenario& scenario, double theta,
                          double tau, GmresOptions gmres = {});

}  // namespace vvrom
