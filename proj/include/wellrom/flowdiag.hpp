#pragma once

#include "wellrom/model.hpp"

#include <string>
#include <vector>

namespace wellrom {

/// Steady single-phase (unit viscosity) flow solution.
struct FluxField {
    std::vector<double> pressure;  // psi, per cell
    std::vector<double> face_flux; // bbl/day, per model face, positive from face.a to face.b
    std::vector<double> well_rate; // bbl/day, per well, positive = leaving the reservoir
};

FluxField solve_single_phase(const ReservoirModel& model, const WellConfiguration& wells);

enum class TofDirection { Forward, Backward };

inline constexpr double kTofCap = 1e6; // days

struct TofResult {
    std::vector<double> tof;      // days, per cell centre
    std::vector<bool> stagnant;   // true where the cap was applied
};

/// Upwind finite-volume solution of div(v tau) = phi. The cell value is the
/// time at the cell centre: exit-face time minus half the cell transit time.
TofResult compute_tof(const ReservoirModel& model, const WellConfiguration& wells,
                      const FluxField& flux, TofDirection direction, double cap = kTofCap);

/// Steady neutral-tracer concentration from injector `injector_well` (index
/// into wells.wells). Unreached cells get 0.
std::vector<double> stationary_tracer(const ReservoirModel& model, const WellConfiguration& wells,
                                      const FluxField& flux, std::size_t injector_well);

struct FPhiCurve {
    std::vector<double> phi; // storage capacity, starts at 0, ends at 1
    std::vector<double> f;   // flow capacity, starts at 0, ends at 1
};

/// Cells sorted by ascending residence time; capped cells add pore volume
/// but no flux.
FPhiCurve f_phi_curve(const std::vector<double>& tof_total, const std::vector<double>& pore_volume,
                      const std::vector<bool>& capped = {});

/// Twice the trapezoid area between F and the diagonal.
double lorenz_coefficient(const FPhiCurve& curve);

struct Diagnostics {
    FluxField flux;
    TofResult forward;
    TofResult backward;
    std::vector<double> tof_total;
    std::vector<double> tracer; // first injector
    FPhiCurve f_phi;
    double lorenz = 0.0;
};

/// The full diagnostics set; L_c is built from the total residence time.
Diagnostics compute_diagnostics(const ReservoirModel& model, const WellConfiguration& wells);

/// Columns: cell,i,j,tof_forward,tof_backward,tof_total,tracer,stagnant
void write_diagnostics_csv(const std::string& path, const Grid2D& grid, const Diagnostics& d);
/// Columns: phi,f
void write_f_phi_csv(const std::string& path, const FPhiCurve& curve);

} // namespace wellrom
