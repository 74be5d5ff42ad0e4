#pragma once

#include "wellrom/fields.hpp"
#include "wellrom/pmor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wellrom {

struct InjectorSpec {
    std::string name;
    int x = 1; // 1-based
    int y = 1;
    double bhp = 0.0;
};

/// Inclusive 1-based cell rectangle.
struct Region {
    int x0 = 1, x1 = 1, y0 = 1, y1 = 1;

    bool contains(int x, int y) const noexcept { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

struct ExperimentConfig {
    std::string name;
    std::string source_path; // file the config was read from
    std::uint64_t hash = 0;  // FNV-1a of the file bytes

    Grid2D grid;
    // Rock: either both files or a generator.
    std::string permeability_file;
    std::string porosity_file;
    SyntheticFieldSpec field;
    FluidProps fluid;
    double well_radius = 0.25;

    std::vector<InjectorSpec> injectors;
    double producer_bhp = 0.0;
    int producers = 1;
    double min_permeability = 0.0;  // candidate cells need K > this
    std::vector<Region> regions;    // one per producer; empty = whole grid
    int region_samples = 0;         // > 0: cells drawn per region before pairing

    int pmor_train = 0;
    int error_train = 0;
    int test = 0;
    std::uint64_t seed = 1;

    PmorOptions pmor;
    ErrorModelOptions error;

    double total_time = 360.0;
    double report_interval = 10.0;
    double max_dt = 0.0;
    int max_step_cuts = 5;
    int max_newton_iters = 20;
    std::string output;
};

/// Parses and validates a JSON experiment file. Relative field paths are
/// resolved against the config's directory. Throws ConfigError.
ExperimentConfig load_experiment(const std::string& path);

std::uint64_t fnv1a(const std::string& bytes) noexcept;

PlacementStudy build_study(const ExperimentConfig& config);

/// "x,y" per producer, producers separated by ';' (1-based).
Placement parse_placement(const std::string& text, const Grid2D& grid);
std::string format_placement(const Placement& p, const Grid2D& grid);

/// All admissible placements. Single producer: every candidate cell.
/// Several producers: `region_samples` cells drawn per region, then every
/// combination across regions.
std::vector<Placement> candidate_pool(const ExperimentConfig& config, const PlacementStudy& study);

struct PlacementSets {
    std::vector<Placement> pmor_train;
    std::vector<Placement> error_train;
    std::vector<Placement> test;
};

/// Seeded disjoint draw. Test placements are taken first and training
/// placements last, so studies differing only in the training count share
/// their test and error sets. Throws ConfigError when the pool is too small.
PlacementSets sample_placements(const ExperimentConfig& config, const std::vector<Placement>& pool);

/// Fine simulations with an optional on-disk cache keyed by study and
/// placement.
class SimulationCache {
public:
    explicit SimulationCache(std::string directory = {});

    std::vector<SimulatedPlacement> run(const ExperimentConfig& config, const PlacementStudy& study,
                                        const std::vector<Placement>& placements, int workers);

private:
    std::string directory_;
};

/// Identifies the fine-simulation setup (model, wells, schedule) of a config.
std::uint64_t study_hash(const ExperimentConfig& config);

struct ExperimentResult {
    PlacementSets sets;
    PmorModel pmor;
    ErrorModel error_model;
    EvaluationReport report;
    double simulate_seconds = 0.0;
    double pmor_seconds = 0.0;
    double error_seconds = 0.0;
    double evaluate_seconds = 0.0;
};

/// Full offline + online run of one experiment.
ExperimentResult run_experiment(const ExperimentConfig& config, int workers, SimulationCache& cache);

} // namespace wellrom
