#include "oracles/pollock.hpp"
#include "wellrom/errors.hpp"
#include "wellrom/fields.hpp"
#include "wellrom/flowdiag.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using namespace wellrom;

namespace {

ReservoirModel uniform_model(int nx, int ny, double k = 100.0, double phi = 0.2)
{
    Grid2D g{nx, ny, 20.0, 20.0, 50.0};
    const auto n = static_cast<std::size_t>(g.cells());
    return ReservoirModel(g, RockProps{std::vector<double>(n, k), std::vector<double>(n, phi)},
                          FluidProps{});
}

ReservoirModel lognormal_model(int nx, int ny, std::uint64_t seed, double scale = 1.0)
{
    Grid2D g{nx, ny, 20.0, 20.0, 50.0};
    SyntheticFieldSpec s;
    s.generator = FieldGenerator::Lognormal;
    s.mean_perm = 50.0;
    s.log_std = 1.5;
    s.seed = seed;
    RockProps r = generate_field(g, s);
    for (double& k : r.permeability)
        k *= scale;
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> phi(0.1, 0.3);
    for (double& p : r.porosity)
        p = phi(rng);
    return ReservoirModel(g, r, FluidProps{});
}

WellConfiguration pair(const ReservoirModel& m, int inj, int prod, double pi = 7000.0,
                       double pp = 2500.0)
{
    WellConfiguration wc;
    wc.wells.push_back(m.make_well("I", inj, WellRole::Injector, BhpSchedule(pi)));
    wc.wells.push_back(m.make_well("P", prod, WellRole::Producer, BhpSchedule(pp)));
    return wc;
}

std::vector<double> divergence(const ReservoirModel& m, const FluxField& f)
{
    std::vector<double> div(static_cast<std::size_t>(m.grid().cells()), 0.0);
    for (std::size_t k = 0; k < m.faces().size(); ++k) {
        div[static_cast<std::size_t>(m.faces()[k].a)] += f.face_flux[k];
        div[static_cast<std::size_t>(m.faces()[k].b)] -= f.face_flux[k];
    }
    return div;
}

} // namespace

TEST(SinglePhase, OneDimensionalColumnIsLinear)
{
    auto m = uniform_model(30, 1);
    auto wc = pair(m, 0, 29);
    auto f = solve_single_phase(m, wc);
    for (std::size_t k = 1; k < f.face_flux.size(); ++k)
        EXPECT_NEAR(f.face_flux[k], f.face_flux[0], 1e-9 * f.face_flux[0]);
    for (int c = 1; c < 29; ++c)
        EXPECT_NEAR(f.pressure[c] - f.pressure[c + 1], f.pressure[0] - f.pressure[1], 1e-8);
    EXPECT_NEAR(-f.well_rate[0], f.face_flux[0], 1e-9 * f.face_flux[0]);
    EXPECT_NEAR(f.well_rate[1], f.face_flux[0], 1e-9 * f.face_flux[0]);
}

TEST(SinglePhase, QuarterSpotIsMirrorSymmetric)
{
    auto m = uniform_model(20, 20);
    const auto& g = m.grid();
    auto f = solve_single_phase(m, pair(m, 0, g.index(19, 19)));
    for (int j = 0; j < 20; ++j)
        for (int i = 0; i < 20; ++i)
            EXPECT_NEAR(f.pressure[g.index(i, j)], f.pressure[g.index(j, i)], 1e-8);
}

TEST(SinglePhase, DiscreteConservationAwayFromWells)
{
    for (std::uint64_t seed : {3u, 8u}) {
        auto m = lognormal_model(25, 20, seed);
        auto wc = pair(m, 0, 437);
        auto f = solve_single_phase(m, wc);
        const auto div = divergence(m, f);
        double fmax = 0.0;
        for (double q : f.face_flux)
            fmax = std::max(fmax, std::abs(q));
        for (int c = 0; c < m.grid().cells(); ++c) {
            if (c == 0 || c == 437)
                continue;
            EXPECT_LT(std::abs(div[static_cast<std::size_t>(c)]), 1e-8 * fmax);
        }
        EXPECT_NEAR(div[0], -f.well_rate[0], 1e-8 * fmax);
    }
}

TEST(SinglePhase, MissingWellsIsAConfigError)
{
    auto m = uniform_model(4, 4);
    EXPECT_THROW(solve_single_phase(m, WellConfiguration{}), ConfigError);
    WellConfiguration only_producer;
    only_producer.wells.push_back(m.make_well("P", 3, WellRole::Producer, BhpSchedule(2000.0)));
    EXPECT_THROW(solve_single_phase(m, only_producer), ConfigError);
}

TEST(TimeOfFlight, MatchesOneDimensionalPlugFlow)
{
    // Inflow enters at the left face of cell 0, so the cell centre sits at
    // x = (c + 1/2) dx and tau = phi x A / q.
    auto m = uniform_model(40, 1, 100.0, 0.2);
    auto wc = pair(m, 0, 39);
    auto f = solve_single_phase(m, wc);
    const double q = f.face_flux[0];
    const double area = 20.0 * 50.0;
    auto tof = compute_tof(m, wc, f, TofDirection::Forward);
    for (int c = 0; c < 40; ++c) {
        const double x = (c + 0.5) * 20.0;
        const double analytic = 0.2 * x * area / (q * 5.614583);
        EXPECT_NEAR(tof.tof[static_cast<std::size_t>(c)], analytic, 0.01 * analytic) << "cell " << c;
    }
    EXPECT_NEAR(tof.tof[0], 0.5 * m.pore_volume()[0] / q, 1e-9);
    auto back = compute_tof(m, wc, f, TofDirection::Backward);
    for (int c = 0; c < 40; ++c) {
        const double x = (39 - c + 0.5) * 20.0;
        EXPECT_NEAR(back.tof[static_cast<std::size_t>(c)], 0.2 * x * area / (q * 5.614583),
                    1e-9 * x);
    }
}

TEST(TimeOfFlight, ResidenceTimeMatchesStreamlineTracingOnLayeredLineDrive)
{
    // Rows with distinct K and phi between a column of injectors and a column
    // of producers: no crossflow, so every streamline stays in its row.
    Grid2D g{5, 5, 20.0, 20.0, 50.0};
    const std::vector<double> row_k{50.0, 200.0, 80.0, 400.0, 120.0};
    const std::vector<double> row_phi{0.12, 0.25, 0.18, 0.3, 0.15};
    RockProps rock;
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 5; ++i) {
            rock.permeability.push_back(row_k[static_cast<std::size_t>(j)]);
            rock.porosity.push_back(row_phi[static_cast<std::size_t>(j)]);
        }
    ReservoirModel m(g, rock, FluidProps{});
    WellConfiguration wc;
    std::vector<bool> is_inj(25, false), is_prod(25, false);
    for (int j = 0; j < 5; ++j) {
        wc.wells.push_back(m.make_well("I" + std::to_string(j), g.index(0, j), WellRole::Injector,
                                       BhpSchedule(7000.0)));
        wc.wells.push_back(m.make_well("P" + std::to_string(j), g.index(4, j), WellRole::Producer,
                                       BhpSchedule(2500.0)));
        is_inj[static_cast<std::size_t>(g.index(0, j))] = true;
        is_prod[static_cast<std::size_t>(g.index(4, j))] = true;
    }
    auto f = solve_single_phase(m, wc);
    auto fwd = compute_tof(m, wc, f, TofDirection::Forward);
    auto bwd = compute_tof(m, wc, f, TofDirection::Backward);
    const auto faces = oracle::cell_faces(m, f);

    for (int j = 0; j < 5; ++j) {
        const int inj = g.index(0, j);
        const int prod = g.index(4, j);
        const double fill_inj = m.pore_volume()[inj] / -f.well_rate[2 * j];
        const double fill_prod = m.pore_volume()[prod] / f.well_rate[2 * j + 1];
        std::vector<double> row;
        for (int i = 1; i < 4; ++i) {
            const int c = g.index(i, j);
            const double streamline = oracle::trace(m, faces, c, is_prod, 1.0) + fill_prod
                                      + oracle::trace(m, faces, c, is_inj, -1.0) + fill_inj;
            const double fv = fwd.tof[c] + bwd.tof[c];
            EXPECT_NEAR(fv, streamline, 0.05 * streamline) << "cell " << c;
            row.push_back(fv);
        }
        for (double v : row)
            EXPECT_NEAR(v, row.front(), 1e-9 * row.front());
    }
}

TEST(TimeOfFlight, QuarterSpotApproachesStreamlineTracingUnderRefinement)
{
    // First-order upwinding smears TOF on coarse grids; the cell-wise gap to
    // centre-launched streamlines must shrink as the grid is refined.
    auto worst_gap = [](int n) {
        Grid2D g{n, n, 100.0 / n, 100.0 / n, 50.0};
        const auto nc = static_cast<std::size_t>(g.cells());
        ReservoirModel m(g, RockProps{std::vector<double>(nc, 100.0), std::vector<double>(nc, 0.2)},
                         FluidProps{});
        const int inj = 0;
        const int prod = g.index(n - 1, n - 1);
        auto wc = pair(m, inj, prod);
        auto f = solve_single_phase(m, wc);
        auto fwd = compute_tof(m, wc, f, TofDirection::Forward);
        auto bwd = compute_tof(m, wc, f, TofDirection::Backward);
        const auto faces = oracle::cell_faces(m, f);
        std::vector<bool> is_inj(nc, false), is_prod(nc, false);
        is_inj[static_cast<std::size_t>(inj)] = true;
        is_prod[static_cast<std::size_t>(prod)] = true;
        const double fills = m.pore_volume()[prod] / f.well_rate[1]
                             + m.pore_volume()[inj] / -f.well_rate[0];
        double worst = 0.0;
        // Cells on the anti-diagonal band, away from the stagnant corners.
        for (int i = 1; i < n - 1; ++i) {
            const int c = g.index(i, n - 1 - i);
            const double s = oracle::trace(m, faces, c, is_prod, 1.0)
                             + oracle::trace(m, faces, c, is_inj, -1.0) + fills;
            worst = std::max(worst, std::abs((fwd.tof[c] + bwd.tof[c]) / s - 1.0));
        }
        return worst;
    };
    const double coarse = worst_gap(5);
    const double fine = worst_gap(21);
    EXPECT_LT(fine, coarse);
    EXPECT_LT(fine, 0.1);
}

TEST(TimeOfFlight, NonNegativeAndTotalIsSum)
{
    auto m = lognormal_model(20, 20, 4);
    auto wc = pair(m, 19, 380);
    auto d = compute_diagnostics(m, wc);
    for (std::size_t c = 0; c < 400; ++c) {
        EXPECT_GE(d.forward.tof[c], 0.0);
        EXPECT_GE(d.backward.tof[c], 0.0);
        EXPECT_DOUBLE_EQ(d.tof_total[c], d.forward.tof[c] + d.backward.tof[c]);
    }
}

TEST(TimeOfFlight, ZeroFlowIsCappedAndFlagged)
{
    auto m = uniform_model(6, 6);
    auto wc = pair(m, 0, 35, 3000.0, 3000.0);
    auto f = solve_single_phase(m, wc);
    auto tof = compute_tof(m, wc, f, TofDirection::Forward);
    for (std::size_t c = 0; c < 36; ++c) {
        EXPECT_EQ(tof.tof[c], kTofCap);
        EXPECT_TRUE(tof.stagnant[c]);
    }
    auto d = compute_diagnostics(m, wc);
    EXPECT_EQ(d.lorenz, 0.0);
}

TEST(TimeOfFlight, ScalesInverselyWithPermeability)
{
    auto a = lognormal_model(15, 15, 6, 1.0);
    auto b = lognormal_model(15, 15, 6, 7.0);
    auto da = compute_diagnostics(a, pair(a, 0, 224));
    auto db = compute_diagnostics(b, pair(b, 0, 224));
    for (std::size_t c = 0; c < 225; ++c) {
        EXPECT_NEAR(db.forward.tof[c] * 7.0, da.forward.tof[c], 1e-8 * da.forward.tof[c]);
        EXPECT_NEAR(db.tracer[c], da.tracer[c], 1e-9);
    }
    EXPECT_NEAR(da.lorenz, db.lorenz, 1e-10);
}

TEST(Tracer, SingleInjectorReachesEverywhere)
{
    auto m = lognormal_model(12, 12, 2);
    auto wc = pair(m, 0, 143);
    auto f = solve_single_phase(m, wc);
    auto c = stationary_tracer(m, wc, f, 0);
    for (double v : c)
        EXPECT_NEAR(v, 1.0, 1e-9);
    EXPECT_THROW(stationary_tracer(m, wc, f, 1), InputError);
}

TEST(Tracer, SymmetricInjectorsSplitAtMidlineProducer)
{
    auto m = uniform_model(5, 5);
    const auto& g = m.grid();
    WellConfiguration wc;
    wc.wells.push_back(m.make_well("I1", g.index(0, 0), WellRole::Injector, BhpSchedule(7000.0)));
    wc.wells.push_back(m.make_well("I2", g.index(4, 0), WellRole::Injector, BhpSchedule(7000.0)));
    wc.wells.push_back(m.make_well("P", g.index(2, 4), WellRole::Producer, BhpSchedule(2500.0)));
    auto f = solve_single_phase(m, wc);
    auto c1 = stationary_tracer(m, wc, f, 0);
    auto c2 = stationary_tracer(m, wc, f, 1);
    EXPECT_NEAR(c1[g.index(2, 4)], 0.5, 1e-9);
    EXPECT_NEAR(c1[g.index(0, 0)], 1.0, 1e-9);
    for (std::size_t k = 0; k < 25; ++k)
        EXPECT_NEAR(c1[k] + c2[k], 1.0, 1e-9);
}

TEST(Tracer, BoundedByMaximumPrinciple)
{
    for (std::uint64_t seed = 10; seed < 20; ++seed) {
        auto m = lognormal_model(14, 11, seed);
        WellConfiguration wc;
        wc.wells.push_back(m.make_well("I1", 0, WellRole::Injector, BhpSchedule(7000.0)));
        wc.wells.push_back(m.make_well("I2", 13, WellRole::Injector, BhpSchedule(6000.0)));
        wc.wells.push_back(m.make_well("P1", 150, WellRole::Producer, BhpSchedule(2500.0)));
        wc.wells.push_back(m.make_well("P2", 77, WellRole::Producer, BhpSchedule(3000.0)));
        auto f = solve_single_phase(m, wc);
        for (double v : stationary_tracer(m, wc, f, 1)) {
            EXPECT_GE(v, -1e-12);
            EXPECT_LE(v, 1.0 + 1e-12);
        }
    }
}

TEST(FPhi, EqualTimesGiveTheDiagonal)
{
    std::vector<double> tau(10, 3.0), pv{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    auto c = f_phi_curve(tau, pv);
    for (std::size_t k = 0; k < c.phi.size(); ++k)
        EXPECT_NEAR(c.f[k], c.phi[k], 1e-14);
    EXPECT_NEAR(lorenz_coefficient(c), 0.0, 1e-14);
}

TEST(FPhi, TwoBinHandComputation)
{
    auto c = f_phi_curve({9.0, 1.0}, {5.0, 5.0});
    ASSERT_EQ(c.phi.size(), 3u);
    EXPECT_DOUBLE_EQ(c.phi[1], 0.5);
    EXPECT_NEAR(c.f[1], 0.9, 1e-14);
    EXPECT_NEAR(lorenz_coefficient(c), 0.4, 1e-14);
}

TEST(FPhi, MonotoneWithExactEndpointsOnRandomInputs)
{
    std::mt19937_64 rng(17);
    std::lognormal_distribution<double> t(0.0, 2.0);
    std::uniform_real_distribution<double> v(0.1, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> tau(200), pv(200);
        std::vector<bool> cap(200, false);
        for (std::size_t k = 0; k < 200; ++k) {
            tau[k] = t(rng);
            pv[k] = v(rng);
            if (k % 37 == 0) {
                tau[k] = kTofCap;
                cap[k] = true;
            }
        }
        auto c = f_phi_curve(tau, pv, cap);
        EXPECT_EQ(c.phi.front(), 0.0);
        EXPECT_EQ(c.f.front(), 0.0);
        EXPECT_EQ(c.phi.back(), 1.0);
        EXPECT_EQ(c.f.back(), 1.0);
        for (std::size_t k = 1; k < c.phi.size(); ++k) {
            EXPECT_GE(c.phi[k], c.phi[k - 1]);
            EXPECT_GE(c.f[k], c.f[k - 1]);
            EXPECT_GE(c.f[k], c.phi[k] - 1e-12);
        }
        const double lc = lorenz_coefficient(c);
        EXPECT_GE(lc, 0.0);
        EXPECT_LT(lc, 1.0);
    }
}

TEST(Lorenz, ExtremeHeterogeneityApproachesOne)
{
    FPhiCurve c{{0.0, 1e-6, 1.0}, {0.0, 1.0, 1.0}};
    EXPECT_NEAR(lorenz_coefficient(c), 1.0, 1e-5);
    EXPECT_LT(lorenz_coefficient(c), 1.0);
}

TEST(Lorenz, PistonLimitOnHomogeneousColumn)
{
    auto m = uniform_model(1, 30);
    auto d = compute_diagnostics(m, pair(m, 0, 29));
    EXPECT_LT(d.lorenz, 0.01);
}

TEST(Lorenz, HeterogeneousFieldIsAboveHomogeneous)
{
    auto h = uniform_model(20, 20);
    auto r = lognormal_model(20, 20, 3);
    const double lh = compute_diagnostics(h, pair(h, 19, 380)).lorenz;
    const double lr = compute_diagnostics(r, pair(r, 19, 380)).lorenz;
    EXPECT_GT(lr, lh);
    EXPECT_GT(lh, 0.0);
}

TEST(DiagnosticsCsv, RowCounts)
{
    auto m = uniform_model(6, 4);
    auto d = compute_diagnostics(m, pair(m, 0, 23));
    const auto dir = std::filesystem::temp_directory_path() / "wellrom_diag_csv";
    std::filesystem::create_directories(dir);
    write_diagnostics_csv((dir / "cells.csv").string(), m.grid(), d);
    write_f_phi_csv((dir / "fphi.csv").string(), d.f_phi);
    auto count = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        std::string line;
        int n = -1;
        while (std::getline(in, line))
            ++n;
        return n;
    };
    EXPECT_EQ(count(dir / "cells.csv"), 24);
    EXPECT_EQ(count(dir / "fphi.csv"), 25);
    std::filesystem::remove_all(dir);
}
