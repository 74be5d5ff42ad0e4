#include "oracles/impes.hpp"
#include "wellrom/errors.hpp"
#include "wellrom/simulator.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

using namespace wellrom;

namespace {

ReservoirModel homogeneous(int nx, int ny, double k = 100.0)
{
    Grid2D g{nx, ny, 20.0, 20.0, 50.0};
    const auto n = static_cast<std::size_t>(g.cells());
    return ReservoirModel(g, RockProps{std::vector<double>(n, k), std::vector<double>(n, 0.2)},
                          FluidProps{});
}

ReservoirModel random_model(int nx, int ny, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::lognormal_distribution<double> perm(std::log(100.0), 1.0);
    std::uniform_real_distribution<double> poro(0.1, 0.3);
    Grid2D g{nx, ny, 20.0, 20.0, 50.0};
    RockProps r;
    for (int c = 0; c < g.cells(); ++c) {
        r.permeability.push_back(perm(rng));
        r.porosity.push_back(poro(rng));
    }
    return ReservoirModel(g, r, FluidProps{});
}

// Injector at the top-right corner, producer at 1-based (3,13) on a 20x20 grid.
WellConfiguration quarter_spot(const ReservoirModel& m, int pi = 2, int pj = 12)
{
    const auto& g = m.grid();
    WellConfiguration wc;
    wc.wells.push_back(m.make_well("INJ", g.index(g.nx - 1, 0), WellRole::Injector, BhpSchedule(7200.0)));
    wc.wells.push_back(m.make_well("PROD", g.index(pi, pj), WellRole::Producer, BhpSchedule(2425.0)));
    return wc;
}

SimulationSpec year_spec(double interval = 10.0)
{
    SimulationSpec s;
    s.total_time = 360.0;
    s.report_times = SimulationSpec::uniform_reports(360.0, interval);
    return s;
}

State random_state(int n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> p(3000.0, 6000.0);
    std::uniform_real_distribution<double> s(0.05, 0.95);
    State x = State::uniform(n, 0.0, 0.0);
    for (int c = 0; c < n; ++c) {
        x.pressure[static_cast<std::size_t>(c)] = p(rng);
        x.sw[static_cast<std::size_t>(c)] = s(rng);
    }
    return x;
}

} // namespace

TEST(Residual, ZeroAtNoFlowEquilibrium)
{
    auto m = homogeneous(5, 4);
    State s = State::uniform(20, 4200.0, 0.3);
    auto r = assemble_residual(m, WellConfiguration{}, s, s, 10.0, 0.0);
    EXPECT_EQ(r.size(), 40);
    EXPECT_EQ(r.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Residual, InjectorSourceEntersWaterEquationOnly)
{
    auto m = homogeneous(4, 4);
    WellConfiguration wc;
    wc.wells.push_back(m.make_well("I", 5, WellRole::Injector, BhpSchedule(5000.0)));
    State s = State::uniform(16, 4200.0, 0.0);
    auto r = assemble_residual(m, wc, s, s, 10.0, 0.0);
    for (int k = 0; k < r.size(); ++k) {
        if (k == 10)
            EXPECT_LT(r[k], 0.0);
        else
            EXPECT_EQ(r[k], 0.0) << "entry " << k;
    }
    const double wi = wc.wells[0].well_index;
    EXPECT_NEAR(r[10], wi * (1.0 / 5.0) * (4200.0 - 5000.0), 1e-9);
}

TEST(Residual, TwoCellHandComputation)
{
    // Cell 0 (200 mD, phi 0.25) east of cell 1 (50 mD, phi 0.15); producer in cell 1.
    Grid2D g{2, 1, 30.0, 10.0, 8.0};
    FluidProps f; // n = 2, mu_w = 1, mu_o = 5
    ReservoirModel m(g, RockProps{{200.0, 50.0}, {0.25, 0.15}}, f);
    WellConfiguration wc;
    wc.wells.push_back(m.make_well("P", 1, WellRole::Producer, BhpSchedule(1000.0)));

    State prev{{3000.0, 2000.0}, {0.2, 0.1}};
    State cur{{2900.0, 2100.0}, {0.4, 0.3}};
    const double dt = 2.5;
    auto r = assemble_residual(m, wc, cur, prev, dt, 0.0);

    const double pv0 = 0.25 * 30 * 10 * 8 / 5.614583;
    const double pv1 = 0.15 * 30 * 10 * 8 / 5.614583;
    const double trans = 0.001127 * 10.0 * 8.0 / 30.0 * (2 * 200.0 * 50.0 / 250.0);
    // p0 > p1, so cell 0 is upstream: krw = 0.16, kro = 0.36.
    const double fw = trans * (0.16 / 1.0) * 800.0;
    const double fo = trans * (0.36 / 5.0) * 800.0;
    const double wi = 2 * 3.141592653589793 * 50.0 * 8.0 * 0.001127 / std::log(0.2 * 30.0 / 0.25);
    const double qw = wi * (0.09 / 1.0) * 1100.0;
    const double qo = wi * (0.49 / 5.0) * 1100.0;

    EXPECT_NEAR(r[0], pv0 / dt * 0.2 + fw, 1e-12 * std::abs(fw) + 1e-12);
    EXPECT_NEAR(r[1], -pv0 / dt * 0.2 + fo, 1e-12 * std::abs(fo) + 1e-12);
    EXPECT_NEAR(r[2], pv1 / dt * 0.2 - fw + qw, 1e-11);
    EXPECT_NEAR(r[3], -pv1 / dt * 0.2 - fo + qo, 1e-11);
}

TEST(Jacobian, MatchesCentralFiniteDifferences)
{
    for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
        auto m = random_model(4, 4, seed);
        std::mt19937_64 rng(seed * 31u);
        WellConfiguration wc;
        wc.wells.push_back(m.make_well("I", 3, WellRole::Injector, BhpSchedule(7000.0)));
        wc.wells.push_back(m.make_well("P", 12, WellRole::Producer, BhpSchedule(2500.0)));
        State prev = random_state(16, rng);
        State cur = random_state(16, rng);
        const double dt = 3.0;

        Eigen::MatrixXd ja(assemble_jacobian(m, wc, cur, prev, dt, 0.0));
        Eigen::MatrixXd jf(32, 32);
        for (int k = 0; k < 32; ++k) {
            const auto c = static_cast<std::size_t>(k / 2);
            const double h = k % 2 == 0 ? 1e-3 : 1e-6;
            State up = cur;
            State dn = cur;
            (k % 2 == 0 ? up.pressure : up.sw)[c] += h;
            (k % 2 == 0 ? dn.pressure : dn.sw)[c] -= h;
            jf.col(k) = (assemble_residual(m, wc, up, prev, dt, 0.0)
                         - assemble_residual(m, wc, dn, prev, dt, 0.0))
                / (2.0 * h);
        }
        // Entries are compared relative to their own magnitude, with a floor
        // of 1e-6 of the largest entry for structurally tiny ones.
        const double floor = 1e-6 * jf.cwiseAbs().maxCoeff();
        double worst = 0.0;
        for (int i = 0; i < 32; ++i)
            for (int j = 0; j < 32; ++j)
                worst = std::max(worst, std::abs(ja(i, j) - jf(i, j))
                                            / std::max(std::abs(jf(i, j)), floor));
        EXPECT_LT(worst, 1e-6) << "seed " << seed;
    }
}

TEST(Jacobian, NoFlowFluxBlocksCancelPairwise)
{
    auto m = homogeneous(3, 3);
    State s = State::uniform(9, 4200.0, 0.4);
    Eigen::MatrixXd j(assemble_jacobian(m, WellConfiguration{}, s, s, 5.0, 0.0));
    const double acc = m.pore_volume()[0] / 5.0;
    for (int c = 0; c < 9; ++c) {
        double wsum = 0.0;
        double osum = 0.0;
        for (int d = 0; d < 9; ++d) {
            wsum += j(2 * c, 2 * d);
            osum += j(2 * c + 1, 2 * d);
            EXPECT_DOUBLE_EQ(j(2 * c, 2 * d), j(2 * d, 2 * c));
            if (d != c) {
                EXPECT_EQ(j(2 * c, 2 * d + 1), 0.0);
                EXPECT_EQ(j(2 * c + 1, 2 * d + 1), 0.0);
            }
        }
        EXPECT_NEAR(wsum, 0.0, 1e-12);
        EXPECT_NEAR(osum, 0.0, 1e-12);
        EXPECT_DOUBLE_EQ(j(2 * c, 2 * c + 1), acc);
        EXPECT_DOUBLE_EQ(j(2 * c + 1, 2 * c + 1), -acc);
    }
    // Stencil: cells 0 and 4 are not neighbours.
    EXPECT_EQ(j(0, 8), 0.0);
    EXPECT_LT(j(0, 2), 0.0);
}

TEST(Jacobian, WellDiagonalCarriesWellIndexTimesMobility)
{
    auto m = homogeneous(3, 3);
    WellConfiguration wc;
    wc.wells.push_back(m.make_well("P", 4, WellRole::Producer, BhpSchedule(2000.0)));
    State s = State::uniform(9, 4200.0, 0.3);
    Eigen::MatrixXd j(assemble_jacobian(m, wc, s, s, 5.0, 0.0)
                      - assemble_jacobian(m, WellConfiguration{}, s, s, 5.0, 0.0));
    const double wi = wc.wells[0].well_index;
    EXPECT_NEAR(j(8, 8), wi * 0.09, 1e-12);
    EXPECT_NEAR(j(9, 8), wi * 0.49 / 5.0, 1e-12);
    EXPECT_NEAR(j(8, 9), wi * 0.6 * 2200.0, 1e-9);
    EXPECT_NEAR(j(9, 9), -wi * 2.0 * 0.7 / 5.0 * 2200.0, 1e-9);
    EXPECT_EQ(j.cwiseAbs().sum(), std::abs(j(8, 8)) + std::abs(j(9, 8)) + std::abs(j(8, 9))
                                      + std::abs(j(9, 9)));
}

TEST(Jacobian, PatternIndependentOfState)
{
    auto m = homogeneous(4, 3);
    auto wc = quarter_spot(homogeneous(20, 20));
    WellConfiguration w;
    w.wells.push_back(m.make_well("I", 3, WellRole::Injector, BhpSchedule(7000.0)));
    w.wells.push_back(m.make_well("P", 8, WellRole::Producer, BhpSchedule(2000.0)));
    std::mt19937_64 rng(9);
    auto a = assemble_jacobian(m, w, random_state(12, rng), random_state(12, rng), 1.0, 0.0);
    auto b = assemble_jacobian(m, w, random_state(12, rng), random_state(12, rng), 1.0, 0.0);
    ASSERT_EQ(a.nonZeros(), b.nonZeros());
    EXPECT_EQ(0, std::memcmp(a.outerIndexPtr(), b.outerIndexPtr(), sizeof(int) * 25));
    EXPECT_EQ(0, std::memcmp(a.innerIndexPtr(), b.innerIndexPtr(), sizeof(int) * a.nonZeros()));
}

TEST(PeacemanRates, Examples)
{
    auto m = homogeneous(20, 20);
    Well w = m.make_well("P", 0, WellRole::Producer, BhpSchedule(2425.0));
    State s = State::uniform(400, 2425.0, 0.5);
    auto q = peaceman_rates(m, s, w, 0.0);
    EXPECT_EQ(q.oil, 0.0);
    EXPECT_EQ(q.water, 0.0);

    State dry = State::uniform(400, 3000.0, 0.0);
    EXPECT_EQ(peaceman_rates(m, dry, w, 0.0).water, 0.0);
    EXPECT_GT(peaceman_rates(m, dry, w, 0.0).oil, 0.0);

    // WI = 12.77 with lambda_o = 0.25 (mu_o = 1, Sw = 0.5) over 100 psi.
    FluidProps unit;
    unit.mu_oil = 1.0;
    Grid2D g{20, 20, 20.0, 20.0, 50.0};
    ReservoirModel mu(g, RockProps{std::vector<double>(400, 100.0), std::vector<double>(400, 0.2)},
                      unit);
    Well wu = mu.make_well("P", 0, WellRole::Producer, BhpSchedule(2425.0));
    wu.well_index = 12.77;
    auto qo = peaceman_rates(mu, State::uniform(400, 2525.0, 0.5), wu, 0.0);
    EXPECT_NEAR(qo.oil, 319.25, 1e-9);
}

TEST(PeacemanRates, InjectorReportsPositiveWater)
{
    auto m = homogeneous(20, 20);
    Well w = m.make_well("I", 0, WellRole::Injector, BhpSchedule(7200.0));
    auto q = peaceman_rates(m, State::uniform(400, 4200.0, 0.0), w, 0.0);
    EXPECT_EQ(q.oil, 0.0);
    EXPECT_NEAR(q.water, w.well_index * 0.2 * 3000.0, 1e-9);
}

TEST(SolveTimestep, SinglePhaseLimitConvergesInOneIteration)
{
    auto m = random_model(6, 6, 11);
    WellConfiguration wc;
    wc.wells.push_back(m.make_well("P1", 0, WellRole::Producer, BhpSchedule(3000.0)));
    wc.wells.push_back(m.make_well("P2", 35, WellRole::Producer, BhpSchedule(5000.0)));
    State s = State::uniform(36, 4200.0, 0.0);
    auto step = solve_timestep(m, wc, s, 10.0, 0.0, 1e-6, 20);
    ASSERT_TRUE(step.converged);
    EXPECT_EQ(step.iterations, 1);
    for (double sw : step.state.sw)
        EXPECT_EQ(sw, 0.0);
}

TEST(SolveTimestep, VanishingStepLeavesSaturationUnchanged)
{
    auto m = homogeneous(20, 20);
    auto wc = quarter_spot(m);
    SimulationSpec spec = year_spec();
    spec.total_time = 60.0;
    spec.report_times = SimulationSpec::uniform_reports(60.0, 10.0);
    const State start = run_simulation(m, wc, spec).states.back();
    double prev_change = 1e300;
    for (double dt : {1e-1, 1e-2, 1e-3, 1e-4}) {
        auto step = solve_timestep(m, wc, start, dt, 60.0, 1e-10, 20);
        ASSERT_TRUE(step.converged);
        double change = 0.0;
        for (std::size_t c = 0; c < start.sw.size(); ++c)
            change = std::max(change, std::abs(step.state.sw[c] - start.sw[c]));
        EXPECT_LT(change, prev_change);
        prev_change = change;
    }
    EXPECT_LT(prev_change, 1e-5);
}

TEST(SolveTimestep, MatchesImpesOracleOnQuarterSpot)
{
    auto m = homogeneous(20, 20);
    auto wc = quarter_spot(m);
    SimulationSpec spec = year_spec();
    spec.total_time = 100.0;
    spec.report_times = SimulationSpec::uniform_reports(100.0, 10.0);
    const State start = run_simulation(m, wc, spec).states.back();

    const double dt = 0.1;
    auto fi = solve_timestep(m, wc, start, dt, 100.0, 1e-10, 20);
    ASSERT_TRUE(fi.converged);
    auto ref = oracle::impes_advance(m, wc, {start.pressure, start.sw}, dt, 100, 100.0);

    double num = 0.0;
    double den = 0.0;
    for (std::size_t c = 0; c < start.sw.size(); ++c) {
        num += std::pow(fi.state.sw[c] - ref.sw[c], 2);
        den += std::pow(fi.state.sw[c], 2);
    }
    EXPECT_LT(std::sqrt(num / den), 1e-3);
}

TEST(SolveTimestep, NonPositiveStepThrows)
{
    auto m = homogeneous(3, 3);
    State s = State::uniform(9, 4200.0, 0.0);
    EXPECT_THROW(solve_timestep(m, WellConfiguration{}, s, 0.0, 0.0, 1e-6, 20), InputError);
}

TEST(RunSimulation, ReportsExactlyAtReportTimes)
{
    auto m = homogeneous(10, 10);
    WellConfiguration wc;
    wc.wells.push_back(m.make_well("I", 9, WellRole::Injector, BhpSchedule(7200.0)));
    wc.wells.push_back(m.make_well("P", 90, WellRole::Producer, BhpSchedule(2425.0)));
    SimulationSpec spec;
    spec.total_time = 50.0;
    spec.report_times = {0.0, 3.0, 17.5, 50.0};
    auto s = run_simulation(m, wc, spec);
    EXPECT_EQ(s.times, spec.report_times);
    EXPECT_EQ(s.states.size(), 4u);
    EXPECT_EQ(s.rates.size(), 4u);
    for (std::size_t k = 0; k < s.times.size(); ++k)
        for (std::size_t w = 0; w < wc.wells.size(); ++w) {
            auto q = peaceman_rates(m, s.states[k], wc.wells[w], s.times[k]);
            EXPECT_EQ(q.oil, s.rates[k][w].oil);
            EXPECT_EQ(q.water, s.rates[k][w].water);
        }
}

TEST(RunSimulation, NoDrivingForceKeepsInitialSaturation)
{
    auto m = homogeneous(8, 8);
    WellConfiguration wc;
    wc.wells.push_back(m.make_well("I", 7, WellRole::Injector, BhpSchedule(4200.0)));
    wc.wells.push_back(m.make_well("P", 56, WellRole::Producer, BhpSchedule(4200.0)));
    SimulationSpec spec = year_spec(30.0);
    spec.initial_sw = 0.15;
    auto s = run_simulation(m, wc, spec);
    for (const auto& st : s.states)
        for (double sw : st.sw)
            EXPECT_EQ(sw, 0.15);
}

TEST(RunSimulation, VolumetricBalanceAndBoundsAtEveryReport)
{
    auto m = homogeneous(20, 20);
    auto wc = quarter_spot(m);
    auto s = run_simulation(m, wc, year_spec());
    for (std::size_t k = 1; k < s.times.size(); ++k) {
        const double inj = s.rates[k][0].water;
        const double prod = s.rates[k][1].liquid();
        EXPECT_LT(std::abs(inj - prod) / inj, 1e-6) << "t = " << s.times[k];
        for (double sw : s.states[k].sw) {
            ASSERT_GE(sw, 0.0);
            ASSERT_LE(sw, 1.0);
        }
    }
}

TEST(RunSimulation, VolumetricBalanceOnHeterogeneousField)
{
    auto m = random_model(15, 15, 21);
    WellConfiguration wc;
    wc.wells.push_back(m.make_well("I", 0, WellRole::Injector, BhpSchedule(7000.0)));
    wc.wells.push_back(m.make_well("P1", 224, WellRole::Producer, BhpSchedule(2500.0)));
    wc.wells.push_back(m.make_well("P2", 14, WellRole::Producer, BhpSchedule(3000.0)));
    auto s = run_simulation(m, wc, year_spec(20.0));
    for (std::size_t k = 1; k < s.times.size(); ++k) {
        const double inj = s.rates[k][0].water;
        const double prod = s.rates[k][1].liquid() + s.rates[k][2].liquid();
        EXPECT_LT(std::abs(inj - prod) / inj, 1e-6) << "t = " << s.times[k];
    }
}

TEST(RunSimulation, HomogeneousQuarterSpotShowsBreakthroughWithinAYear)
{
    auto m = homogeneous(20, 20);
    auto wc = quarter_spot(m);
    auto s = run_simulation(m, wc, year_spec());
    const auto& q = s.rates.back()[1];
    EXPECT_GT(q.water / q.liquid(), 0.05);
    EXPECT_EQ(s.rates[1][1].water, 0.0);
}

TEST(RunSimulation, Deterministic)
{
    auto m = random_model(12, 12, 5);
    WellConfiguration wc;
    wc.wells.push_back(m.make_well("I", 11, WellRole::Injector, BhpSchedule(7000.0)));
    wc.wells.push_back(m.make_well("P", 130, WellRole::Producer, BhpSchedule(2500.0)));
    auto a = run_simulation(m, wc, year_spec(30.0));
    auto b = run_simulation(m, wc, year_spec(30.0));
    for (std::size_t k = 0; k < a.times.size(); ++k) {
        EXPECT_EQ(0, std::memcmp(a.states[k].pressure.data(), b.states[k].pressure.data(),
                                 sizeof(double) * 144));
        EXPECT_EQ(0, std::memcmp(a.states[k].sw.data(), b.states[k].sw.data(), sizeof(double) * 144));
    }
}

TEST(RunSimulation, HalvingStepChangesSaturationBelowOnePercent)
{
    // Space-time relative L2 over all report times; see the README for the
    // per-report-time behaviour at early times.
    auto m = homogeneous(20, 20);
    auto wc = quarter_spot(m);
    SimulationSpec coarse = year_spec();
    coarse.max_dt = 2.5;
    SimulationSpec fine = coarse;
    fine.max_dt = 1.25;
    auto a = run_simulation(m, wc, coarse);
    auto b = run_simulation(m, wc, fine);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 1; k < a.times.size(); ++k)
        for (std::size_t c = 0; c < 400; ++c) {
            num += std::pow(a.states[k].sw[c] - b.states[k].sw[c], 2);
            den += std::pow(b.states[k].sw[c], 2);
        }
    EXPECT_LT(std::sqrt(num / den), 0.01);
    // At the final report the per-time difference is also below 1%.
    double fn = 0.0;
    double fd = 0.0;
    for (std::size_t c = 0; c < 400; ++c) {
        fn += std::pow(a.states.back().sw[c] - b.states.back().sw[c], 2);
        fd += std::pow(b.states.back().sw[c], 2);
    }
    EXPECT_LT(std::sqrt(fn / fd), 0.01);
}

TEST(RunSimulation, BhpBreakpointIsHonoured)
{
    auto m = homogeneous(10, 10);
    WellConfiguration wc;
    wc.wells.push_back(m.make_well("I", 9, WellRole::Injector, BhpSchedule(7200.0)));
    wc.wells.push_back(m.make_well("P", 90, WellRole::Producer,
                                   BhpSchedule({{0.0, 2425.0}, {15.0, 4000.0}})));
    SimulationSpec spec;
    spec.total_time = 30.0;
    spec.report_times = {0.0, 10.0, 20.0, 30.0};
    auto s = run_simulation(m, wc, spec);
    EXPECT_GT(s.rates[1][1].liquid(), s.rates[2][1].liquid() * 1.3);
}

TEST(RunSimulation, UnconvergeableStepRaisesSimulationFailure)
{
    auto m = homogeneous(20, 20);
    auto wc = quarter_spot(m);
    SimulationSpec spec = year_spec();
    spec.max_newton_iters = 1;
    spec.max_step_cuts = 2;
    EXPECT_THROW(run_simulation(m, wc, spec), SimulationFailure);
}

TEST(StateSeriesIo, BinaryRoundTripAndCsv)
{
    auto m = homogeneous(6, 5);
    WellConfiguration wc;
    wc.wells.push_back(m.make_well("I", 5, WellRole::Injector, BhpSchedule(7200.0)));
    wc.wells.push_back(m.make_well("P", 24, WellRole::Producer, BhpSchedule(2425.0)));
    SimulationSpec spec;
    spec.total_time = 40.0;
    spec.report_times = SimulationSpec::uniform_reports(40.0, 10.0);
    auto s = run_simulation(m, wc, spec);

    const auto dir = std::filesystem::temp_directory_path() / "wellrom_series_io";
    std::filesystem::create_directories(dir);
    write_state_series((dir / "s.bin").string(), s);
    auto t = read_state_series((dir / "s.bin").string());
    EXPECT_EQ(t.nx, 6);
    EXPECT_EQ(t.ny, 5);
    EXPECT_EQ(t.times, s.times);
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        EXPECT_EQ(t.states[k].pressure, s.states[k].pressure);
        EXPECT_EQ(t.states[k].sw, s.states[k].sw);
        EXPECT_EQ(t.rates[k][1].oil, s.rates[k][1].oil);
    }
    EXPECT_EQ(std::filesystem::file_size(dir / "s.bin"),
              4u + 4u + 4 * 8u + 8u * (5 + 5 * 2 * 30 + 5 * 2 * 2));

    write_state_series_csv((dir / "s.csv").string(), s);
    std::ifstream in(dir / "s.csv");
    std::string line;
    int rows = 0;
    std::getline(in, line);
    EXPECT_EQ(line, "cell,time,p,sw");
    while (std::getline(in, line))
        ++rows;
    EXPECT_EQ(rows, 30 * 5);

    std::ofstream(dir / "bad.bin") << "nope";
    EXPECT_THROW(read_state_series((dir / "bad.bin").string()), InputError);
    std::filesystem::remove_all(dir);
}
