#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace wellrom {

/// Field-unit Darcy constant, (bbl cp) / (day mD psi ft).
inline constexpr double kDarcyConstant = 0.001127;
/// Barrels per cubic foot.
inline constexpr double kBblPerCubicFoot = 1.0 / 5.614583;

/// Uniform 2D Cartesian grid. Cells are numbered row-major, idx = j*nx + i.
struct Grid2D {
    int nx = 1;
    int ny = 1;
    double dx = 1.0; // ft
    double dy = 1.0; // ft
    double dz = 1.0; // ft

    int cells() const noexcept { return nx * ny; }
    int index(int i, int j) const noexcept { return j * nx + i; }
    std::pair<int, int> ij(int idx) const noexcept { return {idx % nx, idx / nx}; }
    bool contains(int i, int j) const noexcept { return i >= 0 && i < nx && j >= 0 && j < ny; }
    double cell_volume() const noexcept { return dx * dy * dz; }

    void validate() const;
};

struct RockProps {
    std::vector<double> permeability; // mD, isotropic
    std::vector<double> porosity;     // fraction
};

struct FluidProps {
    double mu_water = 1.0; // cp
    double mu_oil = 5.0;   // cp
    double corey_exponent = 2.0;
    double swc = 0.0;
    double sor = 0.0;

    void validate() const;
};

struct RelPerm {
    double krw;
    double kro;
    double dkrw; // d krw / d Sw
    double dkro; // d kro / d Sw
};

struct Mobility {
    double water;
    double oil;
    double dwater; // d lambda_w / d Sw
    double doil;   // d lambda_o / d Sw

    double total() const noexcept { return water + oil; }
    double dtotal() const noexcept { return dwater + doil; }
};

/// Corey relative permeabilities and their saturation derivatives.
/// Throws DomainError for Sw outside [0, 1].
RelPerm rel_perm(double sw, const FluidProps& fluid);

/// Phase mobilities k_rl / mu_l.
Mobility mobility(double sw, const FluidProps& fluid);

/// Peaceman well index for an isotropic square cell, r_eq = 0.2 dx.
/// Throws ConfigError when r_eq <= r_w.
double peaceman_well_index(const Grid2D& grid, double permeability, double well_radius);

enum class WellRole { Injector, Producer };

/// Piecewise-constant bottom-hole pressure. Segment k applies on [start_k, start_{k+1}).
class BhpSchedule {
public:
    BhpSchedule() = default;
    explicit BhpSchedule(double constant_bhp) : segments_{{0.0, constant_bhp}} {}
    explicit BhpSchedule(std::vector<std::pair<double, double>> segments);

    double at(double time) const;
    const std::vector<std::pair<double, double>>& segments() const noexcept { return segments_; }
    /// Times strictly inside (0, horizon) where the BHP changes.
    std::vector<double> breakpoints(double horizon) const;

private:
    std::vector<std::pair<double, double>> segments_;
};

struct Well {
    std::string name;
    int cell = 0;
    WellRole role = WellRole::Producer;
    BhpSchedule bhp;
    double well_index = 0.0;

    bool is_injector() const noexcept { return role == WellRole::Injector; }
};

/// An ordered set of wells. The producer cells form the location parameter.
struct WellConfiguration {
    std::vector<Well> wells;

    std::vector<std::size_t> producer_indices() const;
    std::vector<std::size_t> injector_indices() const;
    /// Producer cells in well order; identifies a configuration.
    std::vector<int> producer_cells() const;
    /// Stable text key built from the producer cells, e.g. "52" or "52;1310".
    std::string key() const;

    void validate(const Grid2D& grid) const;
};

struct SimulationSpec {
    double total_time = 360.0; // days
    std::vector<double> report_times;
    double newton_tol = 1e-6;
    int max_newton_iters = 20;
    int max_step_cuts = 5;
    double max_dt = 0.0; // days; 0 means one step per report interval
    double initial_pressure = 4200.0;
    double initial_sw = 0.0;

    /// Report times 0, interval, 2*interval, ..., total_time.
    static std::vector<double> uniform_reports(double total_time, double interval);
    void validate() const;
};

/// Face between two neighbouring cells, with its two-point transmissibility
/// in bbl/(day psi) per unit mobility.
struct Face {
    int a;
    int b;
    double transmissibility;
};

/// Static reservoir description. Immutable after construction.
class ReservoirModel {
public:
    ReservoirModel(Grid2D grid, RockProps rock, FluidProps fluid, double well_radius = 0.25);

    const Grid2D& grid() const noexcept { return grid_; }
    const RockProps& rock() const noexcept { return rock_; }
    const FluidProps& fluid() const noexcept { return fluid_; }
    double well_radius() const noexcept { return well_radius_; }

    const std::vector<Face>& faces() const noexcept { return faces_; }
    /// Pore volume per cell in bbl.
    const std::vector<double>& pore_volume() const noexcept { return pore_volume_; }
    double total_pore_volume() const noexcept { return total_pore_volume_; }

    Well make_well(std::string name, int cell, WellRole role, BhpSchedule bhp) const;

private:
    Grid2D grid_;
    RockProps rock_;
    FluidProps fluid_;
    double well_radius_;
    std::vector<Face> faces_;
    std::vector<double> pore_volume_;
    double total_pore_volume_ = 0.0;
};

/// Per-cell scalar field as read from a grid file.
struct GridField {
    int nx = 0;
    int ny = 0;
    std::vector<double> values;
};

/// Reads a plain-text field: header line "nx ny", then one value per line in
/// linear-index order.
GridField read_grid_field(const std::string& path);
void write_grid_field(const std::string& path, const GridField& field);

} // namespace wellrom
