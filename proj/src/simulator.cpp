#include "wellrom/simulator.hpp"

#include "binary_io.hpp"
#include "wellrom/errors.hpp"

#ifdef WELLROM_HAVE_KLU
#include <Eigen/KLUSupport>
#else
#include <Eigen/SparseLU>
#endif

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

namespace wellrom {

State State::uniform(int cells, double pressure, double sw)
{
    const auto n = static_cast<std::size_t>(cells);
    return {std::vector<double>(n, pressure), std::vector<double>(n, sw)};
}

namespace {

constexpr char kSeriesMagic[4] = {'W', 'R', 'S', 'S'};
// Per-iteration cap on |dSw| in any cell.
constexpr double kMaxSaturationUpdate = 0.2;

} // namespace

void write_state_series(const std::string& path, const StateSeries& series)
{
    const std::size_t nt = series.times.size();
    if (series.states.size() != nt || series.rates.size() != nt)
        throw InputError("state series lengths disagree");
    const std::size_t nw = nt > 0 ? series.rates.front().size() : 0;
    const auto cells = static_cast<std::size_t>(series.nx) * static_cast<std::size_t>(series.ny);

    detail::BinaryWriter w(path, kSeriesMagic, 1);
    w.u64(static_cast<std::uint64_t>(series.nx));
    w.u64(static_cast<std::uint64_t>(series.ny));
    w.u64(nt);
    w.u64(nw);
    w.f64s(series.times.data(), nt);
    for (const State& s : series.states) {
        if (s.pressure.size() != cells || s.sw.size() != cells)
            throw InputError("state size does not match nx*ny");
        w.f64s(s.pressure.data(), cells);
        w.f64s(s.sw.data(), cells);
    }
    for (const auto& row : series.rates) {
        if (row.size() != nw)
            throw InputError("inconsistent well count in state series");
        for (const WellRates& r : row) {
            w.f64(r.oil);
            w.f64(r.water);
        }
    }
    w.finish();
}

StateSeries read_state_series(const std::string& path)
{
    detail::BinaryReader r(path, kSeriesMagic, 1);
    StateSeries series;
    series.nx = static_cast<int>(r.u64());
    series.ny = static_cast<int>(r.u64());
    const auto nt = static_cast<std::size_t>(r.u64());
    const auto nw = static_cast<std::size_t>(r.u64());
    const auto cells = static_cast<std::size_t>(series.nx) * static_cast<std::size_t>(series.ny);
    if (cells == 0 || cells > (std::size_t{1} << 26) || nt > (std::size_t{1} << 20)
        || nw > 4096)
        throw InputError("corrupt state series header: " + path);
    series.times.resize(nt);
    r.f64s(series.times.data(), nt);
    series.states.resize(nt);
    for (State& s : series.states) {
        s.pressure.resize(cells);
        s.sw.resize(cells);
        r.f64s(s.pressure.data(), cells);
        r.f64s(s.sw.data(), cells);
    }
    series.rates.assign(nt, std::vector<WellRates>(nw));
    for (auto& row : series.rates)
        for (WellRates& q : row) {
            q.oil = r.f64();
            q.water = r.f64();
        }
    return series;
}

void write_state_series_csv(const std::string& path, const StateSeries& series)
{
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot open for writing: " + path);
    out << "cell,time,p,sw\n";
    out.precision(12);
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const State& s = series.states[k];
        for (std::size_t c = 0; c < s.pressure.size(); ++c)
            out << c << ',' << series.times[k] << ',' << s.pressure[c] << ',' << s.sw[c] << '\n';
    }
}

WellSource well_source(const Well& well, const FluidProps& fluid, double pressure, double sw,
                       double bhp)
{
    const Mobility mob = mobility(sw, fluid);
    const double drawdown = pressure - bhp;
    const double wi = well.well_index;
    if (well.is_injector()) {
        return {wi * mob.total() * drawdown, 0.0, wi * mob.total(), wi * mob.dtotal() * drawdown,
                0.0, 0.0};
    }
    return {wi * mob.water * drawdown, wi * mob.oil * drawdown, wi * mob.water,
            wi * mob.dwater * drawdown, wi * mob.oil, wi * mob.doil * drawdown};
}

WellRates peaceman_rates(const ReservoirModel& model, const State& state, const Well& well,
                         double time)
{
    const auto c = static_cast<std::size_t>(well.cell);
    const WellSource q =
        well_source(well, model.fluid(), state.pressure[c], state.sw[c], well.bhp.at(time));
    if (well.is_injector())
        return {0.0, -q.water};
    return {q.oil, q.water};
}

namespace {

void check_dimensions(const ReservoirModel& model, const State& a, const State& b)
{
    const auto n = static_cast<std::size_t>(model.grid().cells());
    if (a.pressure.size() != n || a.sw.size() != n || b.pressure.size() != n || b.sw.size() != n)
        throw InputError("state dimension does not match the grid");
}

} // namespace

Eigen::VectorXd assemble_residual(const ReservoirModel& model, const WellConfiguration& wells,
                                  const State& current, const State& previous, double dt,
                                  double time)
{
    check_dimensions(model, current, previous);
    const int n = model.grid().cells();
    const auto& fluid = model.fluid();
    const auto& pv = model.pore_volume();

    Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * n);
    for (int c = 0; c < n; ++c) {
        const auto cs = static_cast<std::size_t>(c);
        const double acc = pv[cs] / dt * (current.sw[cs] - previous.sw[cs]);
        r[2 * c] += acc;
        r[2 * c + 1] -= acc;
    }

    for (const Face& f : model.faces()) {
        const auto a = static_cast<std::size_t>(f.a);
        const auto b = static_cast<std::size_t>(f.b);
        const double dp = current.pressure[a] - current.pressure[b];
        const std::size_t up = dp >= 0.0 ? a : b;
        const Mobility mob = mobility(current.sw[up], fluid);
        const double fw = f.transmissibility * mob.water * dp;
        const double fo = f.transmissibility * mob.oil * dp;
        r[2 * f.a] += fw;
        r[2 * f.a + 1] += fo;
        r[2 * f.b] -= fw;
        r[2 * f.b + 1] -= fo;
    }

    for (const Well& w : wells.wells) {
        const auto c = static_cast<std::size_t>(w.cell);
        const WellSource q =
            well_source(w, fluid, current.pressure[c], current.sw[c], w.bhp.at(time));
        r[2 * w.cell] += q.water;
        r[2 * w.cell + 1] += q.oil;
    }
    return r;
}

Eigen::SparseMatrix<double> assemble_jacobian(const ReservoirModel& model,
                                              const WellConfiguration& wells,
                                              const State& current, const State& previous,
                                              double dt, double time)
{
    check_dimensions(model, current, previous);
    const int n = model.grid().cells();
    const auto& fluid = model.fluid();
    const auto& pv = model.pore_volume();

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(8 * n + 16 * model.faces().size() + 4 * wells.wells.size()));

    for (int c = 0; c < n; ++c) {
        const double a = pv[static_cast<std::size_t>(c)] / dt;
        t.emplace_back(2 * c, 2 * c, 0.0);
        t.emplace_back(2 * c, 2 * c + 1, a);
        t.emplace_back(2 * c + 1, 2 * c, 0.0);
        t.emplace_back(2 * c + 1, 2 * c + 1, -a);
    }

    // Every face contributes a full 2x2 block to all four (a, b) pairs so the
    // pattern does not depend on the upstream direction.
    for (const Face& f : model.faces()) {
        const auto a = static_cast<std::size_t>(f.a);
        const auto b = static_cast<std::size_t>(f.b);
        const double dp = current.pressure[a] - current.pressure[b];
        const bool a_up = dp >= 0.0;
        const int up = a_up ? f.a : f.b;
        const int dn = a_up ? f.b : f.a;
        const Mobility mob = mobility(current.sw[static_cast<std::size_t>(up)], fluid);
        const double tw = f.transmissibility * mob.water;
        const double to = f.transmissibility * mob.oil;
        const double dfw_ds = f.transmissibility * mob.dwater * dp;
        const double dfo_ds = f.transmissibility * mob.doil * dp;

        // Flux F = T lambda(S_up) (p_a - p_b) leaves a and enters b.
        for (int side = 0; side < 2; ++side) {
            const int row = side == 0 ? f.a : f.b;
            const double sign = side == 0 ? 1.0 : -1.0;
            t.emplace_back(2 * row, 2 * f.a, sign * tw);
            t.emplace_back(2 * row, 2 * f.b, -sign * tw);
            t.emplace_back(2 * row + 1, 2 * f.a, sign * to);
            t.emplace_back(2 * row + 1, 2 * f.b, -sign * to);
            t.emplace_back(2 * row, 2 * up + 1, sign * dfw_ds);
            t.emplace_back(2 * row + 1, 2 * up + 1, sign * dfo_ds);
            t.emplace_back(2 * row, 2 * dn + 1, 0.0);
            t.emplace_back(2 * row + 1, 2 * dn + 1, 0.0);
        }
    }

    for (const Well& w : wells.wells) {
        const auto c = static_cast<std::size_t>(w.cell);
        const WellSource q =
            well_source(w, fluid, current.pressure[c], current.sw[c], w.bhp.at(time));
        t.emplace_back(2 * w.cell, 2 * w.cell, q.dwater_dp);
        t.emplace_back(2 * w.cell, 2 * w.cell + 1, q.dwater_ds);
        t.emplace_back(2 * w.cell + 1, 2 * w.cell, q.doil_dp);
        t.emplace_back(2 * w.cell + 1, 2 * w.cell + 1, q.doil_ds);
    }

    Eigen::SparseMatrix<double> jac(2 * n, 2 * n);
    jac.setFromTriplets(t.begin(), t.end());
    jac.makeCompressed();
    return jac;
}

double scaled_residual_norm(const ReservoirModel& model, const Eigen::VectorXd& residual, double dt)
{
    const auto& pv = model.pore_volume();
    double norm = 0.0;
    for (Eigen::Index k = 0; k < residual.size(); ++k)
        norm = std::max(norm, std::abs(residual[k]) * dt / pv[static_cast<std::size_t>(k / 2)]);
    return norm;
}

struct NewtonWorkspace::Impl {
#ifdef WELLROM_HAVE_KLU
    Eigen::KLU<Eigen::SparseMatrix<double>> lu;
#else
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
#endif
    bool analyzed = false;
};

NewtonWorkspace::NewtonWorkspace() : impl_(std::make_unique<Impl>()) {}
NewtonWorkspace::~NewtonWorkspace() = default;

Eigen::VectorXd NewtonWorkspace::solve(const Eigen::SparseMatrix<double>& jacobian,
                                       const Eigen::VectorXd& rhs)
{
    auto& lu = impl_->lu;
    if (!impl_->analyzed) {
        lu.analyzePattern(jacobian);
        impl_->analyzed = true;
    }
    lu.factorize(jacobian);
    if (lu.info() != Eigen::Success)
        return {};
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite())
        return {};
    return x;
}

StepResult solve_timestep(const ReservoirModel& model, const WellConfiguration& wells,
                          const State& previous, double dt, double time, double tol,
                          int max_iters, NewtonWorkspace* workspace)
{
    if (!(dt > 0.0))
        throw InputError("time step must be positive");
    NewtonWorkspace local;
    NewtonWorkspace& ws = workspace != nullptr ? *workspace : local;

    StepResult result;
    result.state = previous;
    State& x = result.state;
    const int n = model.grid().cells();

    for (int it = 0; it <= max_iters; ++it) {
        const Eigen::VectorXd r = assemble_residual(model, wells, x, previous, dt, time);
        result.residual_norm = scaled_residual_norm(model, r, dt);
        if (!std::isfinite(result.residual_norm))
            return result;
        if (result.residual_norm < tol) {
            result.converged = true;
            result.iterations = it;
            return result;
        }
        if (it == max_iters)
            break;
        const Eigen::SparseMatrix<double> jac =
            assemble_jacobian(model, wells, x, previous, dt, time);
        const Eigen::VectorXd delta = ws.solve(jac, -r);
        if (delta.size() != 2 * n)
            return result;
        for (int c = 0; c < n; ++c) {
            const auto cs = static_cast<std::size_t>(c);
            x.pressure[cs] += delta[2 * c];
            const double ds = std::clamp(delta[2 * c + 1], -kMaxSaturationUpdate, kMaxSaturationUpdate);
            x.sw[cs] = std::clamp(x.sw[cs] + ds, 0.0, 1.0);
        }
    }
    result.iterations = max_iters;
    return result;
}

StateSeries run_simulation(const ReservoirModel& model, const WellConfiguration& wells,
                           const SimulationSpec& spec, SimulationStats* stats)
{
    const auto start = std::chrono::steady_clock::now();
    spec.validate();
    wells.validate(model.grid());

    StateSeries series;
    series.nx = model.grid().nx;
    series.ny = model.grid().ny;

    auto record = [&](double t, const State& s) {
        series.times.push_back(t);
        series.states.push_back(s);
        std::vector<WellRates> rates;
        rates.reserve(wells.wells.size());
        for (const Well& w : wells.wells)
            rates.push_back(peaceman_rates(model, s, w, t));
        series.rates.push_back(std::move(rates));
    };

    std::set<double> breaks;
    for (const Well& w : wells.wells)
        for (double b : w.bhp.breakpoints(spec.report_times.back()))
            breaks.insert(b);

    SimulationStats local;
    NewtonWorkspace ws;
    State state = State::uniform(model.grid().cells(), spec.initial_pressure, spec.initial_sw);
    double t = spec.report_times.front();
    record(t, state);

    double dt_nominal = 0.0;
    for (std::size_t k = 1; k < spec.report_times.size(); ++k) {
        const double target = spec.report_times[k];
        double interval = target - spec.report_times[k - 1];
        if (spec.max_dt > 0.0)
            interval = std::min(interval, spec.max_dt);
        if (dt_nominal <= 0.0)
            dt_nominal = interval;
        double dt_try = std::min(dt_nominal, interval);

        while (t < target - 1e-10) {
            double stop = target;
            for (double b : breaks)
                if (b > t + 1e-10 && b < stop)
                    stop = b;
            int cuts = 0;
            for (;;) {
                const double dt = std::min(dt_try, stop - t);
                const bool last = dt >= stop - t - 1e-10;
                StepResult step = solve_timestep(model, wells, state, dt, t, spec.newton_tol,
                                                 spec.max_newton_iters, &ws);
                local.newton_iterations += step.iterations;
                if (step.converged) {
                    state = std::move(step.state);
                    t = last ? stop : t + dt;
                    ++local.steps;
                    // Recover toward the nominal step after a cut.
                    dt_try = std::min(interval, 2.0 * dt_try);
                    dt_nominal = dt_try;
                    break;
                }
                ++local.cuts;
                if (++cuts > spec.max_step_cuts)
                    throw SimulationFailure("Newton failed to converge at t = " + std::to_string(t)
                                            + " days after " + std::to_string(spec.max_step_cuts)
                                            + " step cuts (configuration " + wells.key() + ")");
                dt_try = 0.5 * dt;
            }
        }
        record(target, state);
    }

    local.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (stats != nullptr)
        *stats = local;
    return series;
}

} // namespace wellrom
