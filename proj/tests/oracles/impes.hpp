#pragma once

// Explicit-saturation / implicit-pressure reference integrator. Written from
// the governing equations without any of the library's residual code; it only
// reads grid geometry, rock arrays and well data from the model.

#include "wellrom/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

struct ImpesState {
    std::vector<double> p;
    std::vector<double> sw;
};

inline double corey(double s, double n) { return std::pow(std::clamp(s, 0.0, 1.0), n); }

// Advances `s` over dt with `substeps` IMPES steps. Zero residual saturations only.
inline ImpesState impes_advance(const wellrom::ReservoirModel& model,
                                const wellrom::WellConfiguration& wells, ImpesState s, double dt,
                                int substeps, double time)
{
    const auto& g = model.grid();
    const auto& f = model.fluid();
    const int n = g.cells();
    const double c = 0.001127;
    const double bbl = 1.0 / 5.614583;
    const auto& k = model.rock().permeability;

    struct Link {
        int a, b;
        double t;
    };
    std::vector<Link> links;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int a = j * g.nx + i;
            if (i + 1 < g.nx) {
                const int b = a + 1;
                links.push_back({a, b, c * g.dy * g.dz / g.dx * 2 * k[a] * k[b] / (k[a] + k[b])});
            }
            if (j + 1 < g.ny) {
                const int b = a + g.nx;
                links.push_back({a, b, c * g.dx * g.dz / g.dy * 2 * k[a] * k[b] / (k[a] + k[b])});
            }
        }

    std::vector<double> pv(n);
    for (int i = 0; i < n; ++i)
        pv[i] = model.rock().porosity[i] * g.dx * g.dy * g.dz * bbl;

    auto lw = [&](double sw) { return corey(sw, f.corey_exponent) / f.mu_water; };
    auto lo = [&](double sw) { return corey(1.0 - sw, f.corey_exponent) / f.mu_oil; };

    const double h = dt / substeps;
    for (int step = 0; step < substeps; ++step) {
        const double t_now = time + step * h;
        // Pressure with total mobility frozen at the current saturation; the
        // upstream direction is iterated to a fixed point.
        std::vector<double> p = s.p;
        for (int sweep = 0; sweep < 20; ++sweep) {
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
            for (const auto& L : links) {
                const int up = p[L.a] >= p[L.b] ? L.a : L.b;
                const double tt = L.t * (lw(s.sw[up]) + lo(s.sw[up]));
                A(L.a, L.a) += tt;
                A(L.a, L.b) -= tt;
                A(L.b, L.b) += tt;
                A(L.b, L.a) -= tt;
            }
            for (const auto& w : wells.wells) {
                const double wi = 2 * std::numbers::pi * k[w.cell] * g.dz * c
                    / std::log(0.2 * g.dx / model.well_radius());
                const double lt = lw(s.sw[w.cell]) + lo(s.sw[w.cell]);
                A(w.cell, w.cell) += wi * lt;
                rhs[w.cell] += wi * lt * w.bhp.at(t_now);
            }
            Eigen::VectorXd x = A.partialPivLu().solve(rhs);
            bool same = true;
            for (const auto& L : links)
                if ((p[L.a] >= p[L.b]) != (x[L.a] >= x[L.b]))
                    same = false;
            for (int i = 0; i < n; ++i)
                p[i] = x[i];
            if (same && sweep > 0)
                break;
        }

        std::vector<double> out(n, 0.0); // net water leaving each cell, bbl/day
        for (const auto& L : links) {
            const int up = p[L.a] >= p[L.b] ? L.a : L.b;
            const double q = L.t * lw(s.sw[up]) * (p[L.a] - p[L.b]);
            out[L.a] += q;
            out[L.b] -= q;
        }
        for (const auto& w : wells.wells) {
            const double wi = 2 * std::numbers::pi * k[w.cell] * g.dz * c
                / std::log(0.2 * g.dx / model.well_radius());
            const double mob = w.is_injector() ? lw(s.sw[w.cell]) + lo(s.sw[w.cell])
                                               : lw(s.sw[w.cell]);
            out[w.cell] += wi * mob * (p[w.cell] - w.bhp.at(t_now));
        }
        for (int i = 0; i < n; ++i)
            s.sw[i] = std::clamp(s.sw[i] - h / pv[i] * out[i], 0.0, 1.0);
        s.p = p;
    }
    return s;
}

} // namespace oracle
