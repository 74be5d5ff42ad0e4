#include "wellrom/model.hpp"

#include "wellrom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

namespace wellrom {

void Grid2D::validate() const
{
    if (nx < 1 || ny < 1)
        throw ConfigError("grid needs at least one cell in each direction");
    if (!(dx > 0.0) || !(dy > 0.0) || !(dz > 0.0))
        throw ConfigError("grid cell sizes must be positive");
}

void FluidProps::validate() const
{
    if (!(mu_water > 0.0) || !(mu_oil > 0.0))
        throw ConfigError("viscosities must be positive");
    if (!(corey_exponent >= 1.0))
        throw ConfigError("Corey exponent must be >= 1");
    if (swc < 0.0 || sor < 0.0 || !(swc + sor < 1.0))
        throw ConfigError("residual saturations must satisfy 0 <= Swc + Sor < 1");
}

RelPerm rel_perm(double sw, const FluidProps& fluid)
{
    if (!(sw >= 0.0 && sw <= 1.0))
        throw DomainError("water saturation outside [0, 1]: " + std::to_string(sw));

    const double span = 1.0 - fluid.swc - fluid.sor;
    const double n = fluid.corey_exponent;

    RelPerm kr{};
    const double sew = (sw - fluid.swc) / span;
    if (sew <= 0.0) {
        kr.krw = 0.0;
        kr.dkrw = 0.0;
    } else if (sew >= 1.0) {
        kr.krw = 1.0;
        kr.dkrw = 0.0;
    } else {
        kr.krw = std::pow(sew, n);
        kr.dkrw = n * std::pow(sew, n - 1.0) / span;
    }

    const double seo = (1.0 - sw - fluid.sor) / span;
    if (seo <= 0.0) {
        kr.kro = 0.0;
        kr.dkro = 0.0;
    } else if (seo >= 1.0) {
        kr.kro = 1.0;
        kr.dkro = 0.0;
    } else {
        kr.kro = std::pow(seo, n);
        kr.dkro = -n * std::pow(seo, n - 1.0) / span;
    }
    return kr;
}

Mobility mobility(double sw, const FluidProps& fluid)
{
    const RelPerm kr = rel_perm(sw, fluid);
    return {kr.krw / fluid.mu_water, kr.kro / fluid.mu_oil,
            kr.dkrw / fluid.mu_water, kr.dkro / fluid.mu_oil};
}

double peaceman_well_index(const Grid2D& grid, double permeability, double well_radius)
{
    const double r_eq = 0.2 * grid.dx;
    if (!(r_eq > well_radius))
        throw ConfigError("Peaceman equivalent radius must exceed the well radius");
    if (!(permeability > 0.0))
        throw ConfigError("well cell permeability must be positive");
    return 2.0 * std::numbers::pi * permeability * grid.dz * kDarcyConstant
        / std::log(r_eq / well_radius);
}

BhpSchedule::BhpSchedule(std::vector<std::pair<double, double>> segments)
    : segments_(std::move(segments))
{
    if (segments_.empty())
        throw ConfigError("BHP schedule needs at least one segment");
    if (segments_.front().first > 0.0)
        throw ConfigError("BHP schedule must start at t = 0");
    for (std::size_t k = 1; k < segments_.size(); ++k)
        if (!(segments_[k].first > segments_[k - 1].first))
            throw ConfigError("BHP schedule start times must increase");
}

double BhpSchedule::at(double time) const
{
    if (segments_.empty())
        throw ConfigError("BHP schedule is empty");
    double value = segments_.front().second;
    for (const auto& [start, bhp] : segments_) {
        if (start <= time)
            value = bhp;
        else
            break;
    }
    return value;
}

std::vector<double> BhpSchedule::breakpoints(double horizon) const
{
    std::vector<double> out;
    for (const auto& [start, bhp] : segments_)
        if (start > 0.0 && start < horizon)
            out.push_back(start);
    return out;
}

std::vector<std::size_t> WellConfiguration::producer_indices() const
{
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < wells.size(); ++w)
        if (!wells[w].is_injector())
            out.push_back(w);
    return out;
}

std::vector<std::size_t> WellConfiguration::injector_indices() const
{
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < wells.size(); ++w)
        if (wells[w].is_injector())
            out.push_back(w);
    return out;
}

std::vector<int> WellConfiguration::producer_cells() const
{
    std::vector<int> out;
    for (const auto& w : wells)
        if (!w.is_injector())
            out.push_back(w.cell);
    return out;
}

std::string WellConfiguration::key() const
{
    std::string out;
    for (int cell : producer_cells()) {
        if (!out.empty())
            out += ';';
        out += std::to_string(cell);
    }
    return out;
}

void WellConfiguration::validate(const Grid2D& grid) const
{
    if (injector_indices().empty() || producer_indices().empty())
        throw ConfigError("configuration needs at least one injector and one producer");
    std::set<int> used;
    for (const auto& w : wells) {
        if (w.cell < 0 || w.cell >= grid.cells())
            throw ConfigError("well '" + w.name + "' is outside the grid");
        if (!used.insert(w.cell).second)
            throw ConfigError("two wells share cell " + std::to_string(w.cell));
        if (!(w.well_index > 0.0))
            throw ConfigError("well '" + w.name + "' has a non-positive well index");
        if (w.bhp.segments().empty())
            throw ConfigError("well '" + w.name + "' has no BHP schedule");
    }
}

std::vector<double> SimulationSpec::uniform_reports(double total_time, double interval)
{
    if (!(interval > 0.0) || !(total_time > 0.0))
        throw ConfigError("report interval and horizon must be positive");
    std::vector<double> out{0.0};
    const auto steps = static_cast<int>(std::llround(total_time / interval));
    for (int k = 1; k <= steps; ++k)
        out.push_back(std::min(total_time, k * interval));
    if (out.back() < total_time - 1e-9)
        out.push_back(total_time);
    return out;
}

void SimulationSpec::validate() const
{
    if (report_times.empty())
        throw ConfigError("no report times");
    for (std::size_t k = 1; k < report_times.size(); ++k)
        if (!(report_times[k] > report_times[k - 1]))
            throw ConfigError("report times must be strictly increasing");
    if (report_times.front() < 0.0)
        throw ConfigError("report times must be non-negative");
    if (!(newton_tol > 0.0))
        throw ConfigError("Newton tolerance must be positive");
    if (max_newton_iters < 1)
        throw ConfigError("need at least one Newton iteration");
    if (initial_sw < 0.0 || initial_sw > 1.0)
        throw ConfigError("initial water saturation outside [0, 1]");
}

ReservoirModel::ReservoirModel(Grid2D grid, RockProps rock, FluidProps fluid, double well_radius)
    : grid_(grid), rock_(std::move(rock)), fluid_(fluid), well_radius_(well_radius)
{
    grid_.validate();
    fluid_.validate();
    const auto n = static_cast<std::size_t>(grid_.cells());
    if (rock_.permeability.size() != n || rock_.porosity.size() != n)
        throw ConfigError("rock property arrays do not match the grid");
    for (std::size_t c = 0; c < n; ++c) {
        if (!(rock_.permeability[c] > 0.0))
            throw ConfigError("permeability must be positive everywhere");
        if (!(rock_.porosity[c] > 0.0 && rock_.porosity[c] < 1.0))
            throw ConfigError("porosity must lie in (0, 1)");
    }
    if (!(well_radius_ > 0.0))
        throw ConfigError("well radius must be positive");

    pore_volume_.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        pore_volume_[c] = rock_.porosity[c] * grid_.cell_volume() * kBblPerCubicFoot;
        total_pore_volume_ += pore_volume_[c];
    }

    // Harmonic averaging of the two half-cell transmissibilities.
    const auto& k = rock_.permeability;
    const double tx = kDarcyConstant * grid_.dy * grid_.dz / grid_.dx;
    const double ty = kDarcyConstant * grid_.dx * grid_.dz / grid_.dy;
    for (int j = 0; j < grid_.ny; ++j) {
        for (int i = 0; i < grid_.nx; ++i) {
            const int c = grid_.index(i, j);
            if (i + 1 < grid_.nx) {
                const int e = grid_.index(i + 1, j);
                faces_.push_back({c, e, tx * 2.0 * k[c] * k[e] / (k[c] + k[e])});
            }
            if (j + 1 < grid_.ny) {
                const int nb = grid_.index(i, j + 1);
                faces_.push_back({c, nb, ty * 2.0 * k[c] * k[nb] / (k[c] + k[nb])});
            }
        }
    }
}

Well ReservoirModel::make_well(std::string name, int cell, WellRole role, BhpSchedule bhp) const
{
    if (cell < 0 || cell >= grid_.cells())
        throw ConfigError("well cell " + std::to_string(cell) + " is outside the grid");
    Well w;
    w.name = std::move(name);
    w.cell = cell;
    w.role = role;
    w.bhp = std::move(bhp);
    w.well_index = peaceman_well_index(grid_, rock_.permeability[static_cast<std::size_t>(cell)],
                                       well_radius_);
    return w;
}

GridField read_grid_field(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open grid field file: " + path);
    GridField field;
    std::string header;
    if (!std::getline(in, header))
        throw ConfigError("grid field file is empty: " + path);
    std::istringstream hs(header);
    if (!(hs >> field.nx >> field.ny) || field.nx < 1 || field.ny < 1)
        throw ConfigError("bad header in grid field file (expected \"nx ny\"): " + path);
    const auto n = static_cast<std::size_t>(field.nx) * static_cast<std::size_t>(field.ny);
    field.values.reserve(n);
    double v = 0.0;
    while (field.values.size() < n && in >> v)
        field.values.push_back(v);
    if (field.values.size() != n)
        throw ConfigError("grid field file has " + std::to_string(field.values.size())
                          + " values, expected " + std::to_string(n) + ": " + path);
    return field;
}

void write_grid_field(const std::string& path, const GridField& field)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write grid field file: " + path);
    out << field.nx << ' ' << field.ny << '\n';
    out << std::setprecision(10);
    for (double v : field.values)
        out << v << '\n';
}

} // namespace wellrom
