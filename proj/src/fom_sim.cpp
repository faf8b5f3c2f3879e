#include "vvrom/fom_sim.hpp"

#include <chrono>

namespace vvrom {

EmFomStepper::EmFomStepper(const EmFom& fom, std::vector<int> input_coils, double theta,
                           double tau, GmresOptions gmres)
    : fom_(fom), input_coils_(std::move(input_coils)), theta_(theta), tau_(tau), gmres_(gmres) {
    if (tau <= 0.0) throw ConfigError("step width must be positive");
    if (theta <= 0.0 || theta > 1.0)
        throw ConfigError("theta must be in (0,1]: the descriptor matrix is singular");
    solver_ = std::make_unique<ShiftedEmSolver>(fom, 1.0 / (theta * tau), gmres_);
    reset();
}

void EmFomStepper::reset() {
    x_ = VecX::Zero(fom_.n_states());
    rhs_.resize(fom_.n_states());
    ax_.resize(fom_.n_states());
}

void EmFomStepper::reset(const VecX& j0) {
    reset();
    if (j0.size() != fom_.n_faces) throw ConfigError("initial current size mismatch");
    x_.head(fom_.n_faces) = j0;
    // settle the potentials: one backward-Euler substep much shorter than tau
    const double tau0 = 1e-3 * tau_;
    ShiftedEmSolver settle(fom_, 1.0 / tau0, gmres_);
    VecX rhs = VecX::Zero(fom_.n_states());
    VecX lj = VecX::Zero(fom_.n_faces);
    fom_.L.apply_add(j0, lj);
    rhs.head(fom_.n_faces) = lj / tau0;
    x_ = settle.solve(rhs, &x_);
}

const VecX& EmFomStepper::step(const VecX& u) {
    if (u.size() != static_cast<int>(input_coils_.size()))
        throw ConfigError("input width mismatch");
    const int nf = fom_.n_faces;
    // rhs = E x/tau + (1-theta) A x + B_u u, then solve theta (sE - A) x = rhs
    fom_.apply_shifted(0.0, x_, ax_);  // = -A x (grounded rows give phi_g)
    rhs_.setZero();
    VecX lj = VecX::Zero(nf);
    fom_.L.apply_add(x_.head(nf), lj);
    rhs_.head(nf) = lj / tau_;
    rhs_ -= (1.0 - theta_) * ax_;
    for (int g : fom_.grounded) rhs_[nf + g] = 0.0;
    for (std::size_t k = 0; k < input_coils_.size(); ++k)
        rhs_.head(nf).noalias() -= fom_.B_i.col(input_coils_[k]) * u[k];
    rhs_ /= theta_;
    x_ = solver_->solve(rhs_, &x_);
    total_iters_ += solver_->last_iterations();
    return x_;
}

ResultTable run_fom_chain(const Mesh& mesh, const EmFom& fom, const CouplingMaps& maps,
                          const StructFom& structure, const Scenario& scenario, double theta,
                          double tau, GmresOptions gmres) {
    const auto t_start = std::chrono::steady_clock::now();
    const auto dyn = scenario.coils.dynamic_indices();
    const int nd = static_cast<int>(dyn.size());
    const int n_steps = static_cast<int>(std::floor(scenario.horizon / tau + 0.5));
    const auto probes = scenario.probes.resolve(mesh);
    const int np = static_cast<int>(probes.nodes.size());
    const int ne = static_cast<int>(probes.elements.size());

    std::vector<Eigen::Matrix<double, 6, 12>> strain_ops;
    for (int e : probes.elements) strain_ops.push_back(strain_operator(mesh, e));

    EmFomStepper stepper(fom, dyn, theta, tau, gmres);

    ResultTable table;
    table.horizon = scenario.horizon;
    table.probe_nodes = probes.nodes;
    table.probe_elements = probes.elements;
    table.times.resize(n_steps);
    table.currents.resize(n_steps, nd);
    table.total_force.resize(n_steps, 3);
    table.probe_disp.resize(n_steps, 3 * np);
    table.probe_strain.resize(n_steps, 6 * ne);

    VecX i_prev = scenario.dynamic_currents(0.0);
    MatX b_ext(maps.n_elements(), 3);
    for (int k = 1; k <= n_steps; ++k) {
        const double t = k * tau;
        const VecX i_now = scenario.dynamic_currents(t);
        const VecX u = (i_now - i_prev) / tau;
        const VecX& x = stepper.step(u);
        const VecX j = x.head(fom.n_faces);

        b_ext = maps.B_static;
        for (int c = 0; c < nd; ++c)
            if (i_now[c] != 0.0) b_ext += i_now[c] * maps.B_dyn_unit[c];
        const MatX f_density = compute_force_density(maps, j, b_ext);
        const Eigen::Map<const VecX> f_vec(f_density.data(), f_density.size());
        const VecX f = maps.P * f_vec;
        const VecX um = structure.solve(f);

        const int row = k - 1;
        table.times[row] = t;
        table.currents.row(row) = i_now.transpose();
        table.total_force.row(row) = total_force(f_density, maps.volumes).transpose();
        for (int p = 0; p < np; ++p)
            table.probe_disp.block<1, 3>(row, 3 * p) =
                um.segment<3>(3 * probes.nodes[p]).transpose();
        for (int p = 0; p < ne; ++p) {
            Eigen::Matrix<double, 12, 1> ue;
            for (int i = 0; i < 4; ++i)
                ue.segment<3>(3 * i) = um.segment<3>(3 * mesh.elements(probes.elements[p], i));
            table.probe_strain.block<1, 6>(row, 6 * p) = (strain_ops[p] * ue).transpose();
        }
        i_prev = i_now;
        if (!x.allFinite())
            throw NumericalError("FOM state lost finiteness at step " + std::to_string(k));
    }
    table.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return table;
}

}  // namespace vvrom
