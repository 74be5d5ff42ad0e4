#pragma once

#include "wellrom/ann.hpp"
#include "wellrom/flowdiag.hpp"
#include "wellrom/forest.hpp"
#include "wellrom/model_selection.hpp"
#include "wellrom/pod.hpp"
#include "wellrom/simulator.hpp"

#include <string>
#include <vector>

namespace wellrom {

/// Producer cells of one configuration, in fixed well order.
using Placement = std::vector<int>;

std::string placement_key(const Placement& p);

/// Everything shared by the configurations of a well-placement study: the
/// reservoir, the fixed injectors and the producer control.
struct PlacementStudy {
    ReservoirModel model;
    std::vector<Well> injectors;
    BhpSchedule producer_bhp;
    SimulationSpec sim;

    WellConfiguration configuration(const Placement& producers) const;
};

/// Features per producer: x, y (1-based cell coordinates), r (cells), theta
/// (rad, injector to producer), K (mD), TOF (forward, days), index (linear
/// cell index); then LC and t once.
struct FeatureSchema {
    int producers = 1;

    int width() const noexcept { return 7 * producers + 2; }
    std::vector<std::string> names() const;
};

/// Time-independent part of the feature vector (everything but t).
Eigen::VectorXd placement_features(const PlacementStudy& study, const WellConfiguration& wells,
                                   const Diagnostics& diagnostics);
Eigen::VectorXd with_time(const Eigen::VectorXd& placement_features, double t);

struct SimulatedPlacement {
    Placement placement;
    StateSeries series;
    double wall_seconds = 0.0;
};

/// Fine simulations of every placement on `workers` threads. A failure names
/// the offending placement.
std::vector<SimulatedPlacement> simulate_placements(const PlacementStudy& study,
                                                    const std::vector<Placement>& placements,
                                                    int workers);

struct PmorOptions {
    double energy_p = 0.99;
    double energy_s = 0.90;
    std::vector<TreeParams> rf_grid{{3, 2}};
    int n_trees = 200;
    int cv_trees = 50; // trees per forest during the grid search
    int cv_folds = 5;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct PmorModel {
    FeatureSchema schema;
    std::vector<double> report_times;
    PodBasis pod_p;
    PodBasis pod_s;
    ForestModel forest_p;
    ForestModel forest_s;
    std::vector<Placement> training;
    std::uint64_t seed = 0;
    CvResult cv_p;
    CvResult cv_s;
};

/// Bases, coefficient targets and cross-validated forests from already
/// simulated training placements.
PmorModel train_pmor(const PlacementStudy& study, const std::vector<SimulatedPlacement>& training,
                     const PmorOptions& options);

void write_pmor(const std::string& directory, const PmorModel& model);
PmorModel read_pmor(const std::string& directory);

struct Prediction {
    Placement placement;
    Eigen::VectorXd features; // time-independent part
    StateSeries series; // states at the requested times, Peaceman well rates
    double wall_seconds = 0.0;
};

/// Online stage. Each time is predicted independently; Sw is clamped to
/// [0, 1]. Throws InputError for times outside the training report grid.
Prediction predict_states(const PmorModel& pmor, const PlacementStudy& study,
                          const Placement& placement, const std::vector<double>& times);
Prediction predict_states(const PmorModel& pmor, const PlacementStudy& study,
                          const Placement& placement);

/// Pore volumes injected from injector rates on the given states,
/// trapezoid-integrated over the series times.
std::vector<double> compute_pvi(const PlacementStudy& study, const StateSeries& series);

struct ErrorModelOptions {
    std::vector<AnnParams> ann_grid{AnnParams{}};
    int cv_folds = 5;
    std::uint64_t seed = 1;
    int workers = 1;
};

/// One network pair per producer, predicting the fine minus reduced
/// well-block pressure and saturation.
struct ErrorModel {
    FeatureSchema schema;
    std::vector<NeuralNet> ann_p;
    std::vector<NeuralNet> ann_s;
    std::vector<Placement> training;
    std::vector<CvResult> cv_p;
    std::vector<CvResult> cv_s;

    /// Placement features, t, then per producer (p_wb, S_wb), then PVI_r.
    int input_width() const noexcept { return schema.width() + 2 * schema.producers + 1; }
};

/// Error-model inputs, one row per predicted time.
Eigen::MatrixXd error_inputs(const PlacementStudy& study, const Prediction& prediction);

/// Rows of the error-model dataset for one placement.
Dataset error_dataset(const PlacementStudy& study, const Prediction& prediction,
                      const StateSeries& truth, int producer, StateField field);

/// Throws LeakageError when any two sets share a placement.
void check_disjoint(const std::vector<std::vector<Placement>>& sets);

ErrorModel train_error_model(const PmorModel& pmor, const PlacementStudy& study,
                             const std::vector<SimulatedPlacement>& error_set,
                             const ErrorModelOptions& options);

void write_error_model(const std::string& directory, const ErrorModel& model);
ErrorModel read_error_model(const std::string& directory);

/// Oil and water production and water cut per producer at each report time.
struct QoISeries {
    std::vector<double> times;
    std::vector<std::vector<double>> oil;   // [producer][time], bbl/day
    std::vector<std::vector<double>> water; // [producer][time], bbl/day
    std::vector<std::vector<double>> water_cut;
};

/// QoI from well-block states through the Peaceman relation.
QoISeries qoi_from_wellblocks(const PlacementStudy& study, const Placement& placement,
                              const std::vector<double>& times,
                              const std::vector<std::vector<double>>& p_wb,
                              const std::vector<std::vector<double>>& s_wb);
QoISeries qoi_from_series(const PlacementStudy& study, const Placement& placement,
                          const StateSeries& series);

struct CorrectedPrediction {
    std::vector<std::vector<double>> p_wb; // [producer][time]
    std::vector<std::vector<double>> s_wb;
    QoISeries qoi;
};

CorrectedPrediction apply_correction(const PmorModel& pmor, const ErrorModel& error_model,
                                     const PlacementStudy& study, const Prediction& prediction);

/// 100 (1 - sum|y - y_hat| / sum|y|) over times t > 0. Returns NaN when
/// sum|y| = 0.
double accuracy(const std::vector<double>& times, const std::vector<double>& truth,
                const std::vector<double>& predicted, double min_total = 0.0);

/// Water-cut accuracy is skipped when sum|wcut| over t > 0 stays at or below
/// this value (no breakthrough).
inline constexpr double kWaterCutFloor = 1e-6;

struct PlacementEvaluation {
    Placement placement;
    // [producer]; NaN marks an excluded metric (no water produced).
    std::vector<double> oil_pre, oil_post, wcut_pre, wcut_post;
    double fine_seconds = 0.0;
    double surrogate_seconds = 0.0;
    double wb_pressure_error = 0.0;    // mean relative error at producer cells
    double field_pressure_error = 0.0; // mean relative field error
    double wb_saturation_error = 0.0;  // mean absolute error at producer cells
    double field_saturation_error = 0.0;
    double wb_projection_ratio = 0.0; // well-block / field RMS projection error
    QoISeries truth, pre, post;
};

struct MetricSummary {
    double mean = 0.0;
    int counted = 0;
    int excluded = 0;
};

struct EvaluationReport {
    std::vector<PlacementEvaluation> placements;
    MetricSummary oil_pre, oil_post, wcut_pre, wcut_post;
    // Per producer, same order as the schema.
    std::vector<MetricSummary> oil_post_by_producer, wcut_post_by_producer;
    std::vector<MetricSummary> oil_pre_by_producer, wcut_pre_by_producer;
    double fine_seconds = 0.0;      // mean
    double surrogate_seconds = 0.0; // mean
    double speedup = 0.0;
    double worsened_fraction = 0.0; // placements whose mean post accuracy < pre
    std::vector<double> worsened_by_producer;
    double wb_dominance_fraction = 0.0;
};

PlacementEvaluation evaluate_placement(const PmorModel& pmor, const ErrorModel& error_model,
                                       const PlacementStudy& study, const SimulatedPlacement& truth);

EvaluationReport summarize(std::vector<PlacementEvaluation> placements, int producers);

/// Per-placement table sorted by uncorrected oil accuracy (worst first).
void write_evaluation_csv(const std::string& path, const EvaluationReport& report);
void write_qoi_csv(const std::string& path, const PlacementEvaluation& e);
void write_summary(const std::string& path, const EvaluationReport& report);

} // namespace wellrom
