#pragma once

#include "wellrom/simulator.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace wellrom {

enum class StateField { Pressure, Saturation };

const char* to_string(StateField field) noexcept;

struct SnapshotColumn {
    int config = 0; // position of the series in the assembled list
    double time = 0.0;
};

/// Columns ordered configuration-major, time-minor.
struct SnapshotMatrix {
    StateField field = StateField::Pressure;
    Eigen::MatrixXd data; // cells x (configs * times)
    std::vector<SnapshotColumn> columns;
};

/// Every series must share the grid and report times; t = 0 is included
/// when the series carries it.
SnapshotMatrix assemble_snapshots(const std::vector<const StateSeries*>& series, StateField field);
SnapshotMatrix assemble_snapshots(const std::vector<StateSeries>& series, StateField field);

struct PodBasis {
    StateField field = StateField::Pressure;
    Eigen::VectorXd mean;          // column mean of the snapshots
    Eigen::MatrixXd modes;         // cells x r, orthonormal columns
    std::vector<double> sigma;     // all singular values, descending, >= 0
    int rank = 0;                  // number of sigma above the noise floor
    double energy_fraction = 1.0;  // requested
    double energy = 0.0;           // captured by the retained modes
    std::vector<std::string> warnings;

    int retained() const noexcept { return static_cast<int>(modes.cols()); }
    int cells() const noexcept { return static_cast<int>(mean.size()); }
};

/// Relative noise floor below which singular values are treated as zero.
double sigma_floor(double sigma1, int gram_size);

/// Mean-subtracted thin SVD through the smaller Gram matrix. Retains the
/// smallest r with sum(sigma_1..r) / sum(sigma) >= energy_fraction.
PodBasis compute_basis(const SnapshotMatrix& snapshots, double energy_fraction);

/// Fraction sum(sigma_1..r) / sum(sigma) over the singular values above the floor.
double energy_captured(const PodBasis& basis, int r);

Eigen::VectorXd project(const PodBasis& basis, const Eigen::VectorXd& state);
Eigen::VectorXd reconstruct(const PodBasis& basis, const Eigen::VectorXd& coefficients);

struct ProjectionError {
    Eigen::VectorXd field;
    double norm = 0.0;
};

ProjectionError orthogonal_projection_error(const PodBasis& basis, const Eigen::VectorXd& state);

/// Binary container "WRPB": field, energy settings, rank, sigma, mean, modes.
void write_basis(const std::string& path, const PodBasis& basis);
PodBasis read_basis(const std::string& path);

/// Columns: index,sigma,energy (cumulative linear-sigma fraction).
void write_sigma_csv(const std::string& path, const PodBasis& basis);

} // namespace wellrom
