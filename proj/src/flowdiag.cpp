#include "wellrom/flowdiag.hpp"

#include "wellrom/errors.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace wellrom {

FluxField solve_single_phase(const ReservoirModel& model, const WellConfiguration& wells)
{
    wells.validate(model.grid());
    const int n = model.grid().cells();

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(n + 4 * model.faces().size()));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (const Face& f : model.faces()) {
        t.emplace_back(f.a, f.a, f.transmissibility);
        t.emplace_back(f.b, f.b, f.transmissibility);
        t.emplace_back(f.a, f.b, -f.transmissibility);
        t.emplace_back(f.b, f.a, -f.transmissibility);
    }
    for (const Well& w : wells.wells) {
        t.emplace_back(w.cell, w.cell, w.well_index);
        rhs[w.cell] += w.well_index * w.bhp.at(0.0);
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(t.begin(), t.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
    if (ldlt.info() != Eigen::Success)
        throw ConfigError("single-phase pressure system is singular");
    const Eigen::VectorXd p = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !p.allFinite())
        throw ConfigError("single-phase pressure solve failed");

    FluxField out;
    out.pressure.assign(p.data(), p.data() + n);
    out.face_flux.reserve(model.faces().size());
    for (const Face& f : model.faces())
        out.face_flux.push_back(f.transmissibility * (p[f.a] - p[f.b]));
    for (const Well& w : wells.wells)
        out.well_rate.push_back(w.well_index * (p[w.cell] - w.bhp.at(0.0)));
    return out;
}

namespace {

// Per-cell inflow/outflow bookkeeping for the upwind transport operator. In
// the backward direction every flux changes sign.
struct Transport {
    Eigen::SparseMatrix<double> matrix; // diag = throughflow, off-diag = -inflow
    std::vector<double> outflow;        // faces + sinks
    std::vector<double> source_inflow;  // per cell, from wells acting as sources
    std::vector<bool> stagnant;
};

Transport build_transport(const ReservoirModel& model, const WellConfiguration& wells,
                          const FluxField& flux, double sign)
{
    const int n = model.grid().cells();
    const auto ns = static_cast<std::size_t>(n);
    if (flux.face_flux.size() != model.faces().size() || flux.well_rate.size() != wells.wells.size())
        throw InputError("flux field does not match the model and wells");

    Transport tr;
    tr.outflow.assign(ns, 0.0);
    tr.source_inflow.assign(ns, 0.0);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(ns + model.faces().size());

    double scale = 0.0;
    for (std::size_t k = 0; k < model.faces().size(); ++k) {
        const Face& f = model.faces()[k];
        const double q = sign * flux.face_flux[k];
        scale = std::max(scale, std::abs(q));
        if (q > 0.0) {
            tr.outflow[static_cast<std::size_t>(f.a)] += q;
            t.emplace_back(f.b, f.a, -q);
        } else if (q < 0.0) {
            tr.outflow[static_cast<std::size_t>(f.b)] -= q;
            t.emplace_back(f.a, f.b, q);
        }
    }
    for (std::size_t w = 0; w < wells.wells.size(); ++w) {
        const double q = sign * flux.well_rate[w];
        const auto c = static_cast<std::size_t>(wells.wells[w].cell);
        scale = std::max(scale, std::abs(q));
        if (q > 0.0)
            tr.outflow[c] += q;
        else
            tr.source_inflow[c] -= q;
    }

    const double eps = 1e-12 * scale;
    tr.stagnant.assign(ns, false);
    for (std::size_t c = 0; c < ns; ++c) {
        if (tr.outflow[c] <= eps) {
            tr.stagnant[c] = true;
            t.emplace_back(static_cast<int>(c), static_cast<int>(c), 1.0);
        } else {
            t.emplace_back(static_cast<int>(c), static_cast<int>(c), tr.outflow[c]);
        }
    }
    // Stagnant rows carry only their identity entry.
    std::vector<Eigen::Triplet<double>> kept;
    kept.reserve(t.size());
    for (const auto& e : t)
        if (!tr.stagnant[static_cast<std::size_t>(e.row())] || e.row() == e.col())
            kept.push_back(e);
    tr.matrix.resize(n, n);
    tr.matrix.setFromTriplets(kept.begin(), kept.end());
    tr.matrix.makeCompressed();
    return tr;
}

Eigen::VectorXd solve_transport(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b)
{
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu(a);
    if (lu.info() != Eigen::Success)
        throw InputError("upwind transport system is singular");
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success)
        throw InputError("upwind transport solve failed");
    return x;
}

} // namespace

TofResult compute_tof(const ReservoirModel& model, const WellConfiguration& wells,
                      const FluxField& flux, TofDirection direction, double cap)
{
    const double sign = direction == TofDirection::Forward ? 1.0 : -1.0;
    Transport tr = build_transport(model, wells, flux, sign);
    const auto& pv = model.pore_volume();
    const int n = model.grid().cells();

    Eigen::VectorXd b(n);
    for (int c = 0; c < n; ++c)
        b[c] = tr.stagnant[static_cast<std::size_t>(c)] ? cap : pv[static_cast<std::size_t>(c)];
    const Eigen::VectorXd exit = solve_transport(tr.matrix, b);

    TofResult out;
    out.tof.resize(static_cast<std::size_t>(n));
    out.stagnant = tr.stagnant;
    for (int c = 0; c < n; ++c) {
        const auto cs = static_cast<std::size_t>(c);
        if (tr.stagnant[cs]) {
            out.tof[cs] = cap;
            continue;
        }
        const double centre = exit[c] - 0.5 * pv[cs] / tr.outflow[cs];
        if (!(centre < cap)) {
            out.tof[cs] = cap;
            out.stagnant[cs] = true;
        } else {
            out.tof[cs] = std::max(0.0, centre);
        }
    }
    return out;
}

std::vector<double> stationary_tracer(const ReservoirModel& model, const WellConfiguration& wells,
                                      const FluxField& flux, std::size_t injector_well)
{
    if (injector_well >= wells.wells.size() || !wells.wells[injector_well].is_injector())
        throw InputError("tracer source must be an injector of the configuration");
    Transport tr = build_transport(model, wells, flux, 1.0);
    const int n = model.grid().cells();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    const Well& src = wells.wells[injector_well];
    const double q = -flux.well_rate[injector_well];
    if (q > 0.0 && !tr.stagnant[static_cast<std::size_t>(src.cell)])
        b[src.cell] = q;
    const Eigen::VectorXd c = solve_transport(tr.matrix, b);
    return {c.data(), c.data() + n};
}

FPhiCurve f_phi_curve(const std::vector<double>& tof_total, const std::vector<double>& pore_volume,
                      const std::vector<bool>& capped)
{
    const std::size_t n = tof_total.size();
    if (pore_volume.size() != n || (!capped.empty() && capped.size() != n) || n == 0)
        throw InputError("F-Phi inputs must be non-empty and of equal length");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return tof_total[a] < tof_total[b]; });

    double total_pv = 0.0;
    double total_flux = 0.0;
    std::vector<double> flux(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        total_pv += pore_volume[c];
        const bool dead = (!capped.empty() && capped[c]) || !(tof_total[c] > 0.0);
        if (!dead) {
            flux[c] = pore_volume[c] / tof_total[c];
            total_flux += flux[c];
        }
    }

    FPhiCurve curve;
    curve.phi.reserve(n + 1);
    curve.f.reserve(n + 1);
    curve.phi.push_back(0.0);
    curve.f.push_back(0.0);
    double cp = 0.0;
    double cf = 0.0;
    for (std::size_t k : order) {
        cp += pore_volume[k];
        cf += flux[k];
        curve.phi.push_back(cp / total_pv);
        curve.f.push_back(std::min(1.0, total_flux > 0.0 ? cf / total_flux : cp / total_pv));
        curve.phi.back() = std::min(1.0, curve.phi.back());
    }
    curve.phi.back() = 1.0;
    curve.f.back() = 1.0;
    return curve;
}

double lorenz_coefficient(const FPhiCurve& curve)
{
    if (curve.phi.size() != curve.f.size() || curve.phi.size() < 2)
        throw InputError("F-Phi curve needs at least two points");
    double area = 0.0;
    for (std::size_t k = 1; k < curve.phi.size(); ++k)
        area += 0.5 * (curve.f[k] + curve.f[k - 1]) * (curve.phi[k] - curve.phi[k - 1]);
    return std::clamp(2.0 * (area - 0.5), 0.0, 1.0);
}

Diagnostics compute_diagnostics(const ReservoirModel& model, const WellConfiguration& wells)
{
    Diagnostics d;
    d.flux = solve_single_phase(model, wells);
    d.forward = compute_tof(model, wells, d.flux, TofDirection::Forward);
    d.backward = compute_tof(model, wells, d.flux, TofDirection::Backward);
    const std::size_t n = d.forward.tof.size();
    d.tof_total.resize(n);
    std::vector<bool> capped(n);
    for (std::size_t c = 0; c < n; ++c) {
        capped[c] = d.forward.stagnant[c] || d.backward.stagnant[c];
        d.tof_total[c] = capped[c] ? kTofCap : d.forward.tof[c] + d.backward.tof[c];
    }
    d.tracer = stationary_tracer(model, wells, d.flux, wells.injector_indices().front());
    d.f_phi = f_phi_curve(d.tof_total, model.pore_volume(), capped);
    d.lorenz = lorenz_coefficient(d.f_phi);
    return d;
}

void write_diagnostics_csv(const std::string& path, const Grid2D& grid, const Diagnostics& d)
{
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot open for writing: " + path);
    out << "cell,i,j,tof_forward,tof_backward,tof_total,tracer,stagnant\n";
    out.precision(12);
    for (int c = 0; c < grid.cells(); ++c) {
        const auto cs = static_cast<std::size_t>(c);
        const auto [i, j] = grid.ij(c);
        out << c << ',' << i << ',' << j << ',' << d.forward.tof[cs] << ',' << d.backward.tof[cs]
            << ',' << d.tof_total[cs] << ',' << d.tracer[cs] << ','
            << (d.forward.stagnant[cs] || d.backward.stagnant[cs] ? 1 : 0) << '\n';
    }
}

void write_f_phi_csv(const std::string& path, const FPhiCurve& curve)
{
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot open for writing: " + path);
    out << "phi,f\n";
    out.precision(12);
    for (std::size_t k = 0; k < curve.phi.size(); ++k)
        out << curve.phi[k] << ',' << curve.f[k] << '\n';
}

} // namespace wellrom
