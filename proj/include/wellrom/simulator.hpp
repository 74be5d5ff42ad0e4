#pragma once

#include "wellrom/model.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <string>
#include <vector>

namespace wellrom {

/// Primary unknowns x = [p_o, S_w] per cell.
struct State {
    std::vector<double> pressure; // psi
    std::vector<double> sw;       // fraction

    static State uniform(int cells, double pressure, double sw);
    int cells() const noexcept { return static_cast<int>(pressure.size()); }
};

/// Surface-free volumetric well rates, bbl/day. Producers report production
/// as positive; injectors report injected water as positive.
struct WellRates {
    double oil = 0.0;
    double water = 0.0;

    double liquid() const noexcept { return oil + water; }
};

/// States and well rates at a fixed list of report times.
struct StateSeries {
    int nx = 0;
    int ny = 0;
    std::vector<double> times;
    std::vector<State> states;
    std::vector<std::vector<WellRates>> rates; // [time][well]
};

/// Binary container: magic "WRSS", version, then nx, ny, n_times, n_wells as
/// u64 followed by little-endian doubles (times, per-time pressure and Sw, rates).
void write_state_series(const std::string& path, const StateSeries& series);
StateSeries read_state_series(const std::string& path);
/// Long-format CSV with columns cell,time,p,sw.
void write_state_series_csv(const std::string& path, const StateSeries& series);

/// Signed Peaceman source terms (positive = leaving the reservoir) and their
/// derivatives with respect to the well-block pressure and saturation.
struct WellSource {
    double water;
    double oil;
    double dwater_dp;
    double dwater_ds;
    double doil_dp;
    double doil_ds;
};

/// Injectors inject water only, using the total mobility of the well block.
WellSource well_source(const Well& well, const FluidProps& fluid, double pressure, double sw,
                       double bhp);

/// Peaceman rates on a stored state with sign normalisation.
WellRates peaceman_rates(const ReservoirModel& model, const State& state, const Well& well,
                         double time);

/// Residual of the backward-Euler two-point-flux system. Row 2c is the water
/// balance of cell c, row 2c+1 the oil balance; both in bbl/day.
Eigen::VectorXd assemble_residual(const ReservoirModel& model, const WellConfiguration& wells,
                                  const State& current, const State& previous, double dt,
                                  double time);

/// Analytic Jacobian d R / d x with unknown 2c = p_c and 2c+1 = Sw_c. The
/// sparsity pattern is the same for every state.
Eigen::SparseMatrix<double> assemble_jacobian(const ReservoirModel& model,
                                              const WellConfiguration& wells,
                                              const State& current, const State& previous,
                                              double dt, double time);

/// Max-norm of the residual scaled by dt / pore volume (a saturation measure).
double scaled_residual_norm(const ReservoirModel& model, const Eigen::VectorXd& residual,
                            double dt);

/// Sparse LU reused across Newton iterations of one run. The symbolic
/// analysis is done once since the Jacobian pattern never changes.
class NewtonWorkspace {
public:
    NewtonWorkspace();
    ~NewtonWorkspace();
    NewtonWorkspace(const NewtonWorkspace&) = delete;
    NewtonWorkspace& operator=(const NewtonWorkspace&) = delete;

    /// Returns an empty vector when the factorization fails.
    Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& jacobian, const Eigen::VectorXd& rhs);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct StepResult {
    State state;
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
};

/// One fully-implicit step from `previous` over [time, time + dt]. A
/// non-converged result is the signal to cut the step.
StepResult solve_timestep(const ReservoirModel& model, const WellConfiguration& wells,
                          const State& previous, double dt, double time, double tol,
                          int max_iters, NewtonWorkspace* workspace = nullptr);

struct SimulationStats {
    int steps = 0;
    int newton_iterations = 0;
    int cuts = 0;
    double wall_seconds = 0.0;
};

/// Runs from the initial state to every report time. Throws SimulationFailure
/// when a step still fails after `max_step_cuts` halvings.
StateSeries run_simulation(const ReservoirModel& model, const WellConfiguration& wells,
                           const SimulationSpec& spec, SimulationStats* stats = nullptr);

} // namespace wellrom
