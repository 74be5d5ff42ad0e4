#include "wellrom/pmor.hpp"

#include "wellrom/errors.hpp"
#include "wellrom/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace wellrom {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr double kTimeMatch = 1e-9;

std::size_t time_slot(const std::vector<double>& grid, double t)
{
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (std::abs(grid[k] - t) <= kTimeMatch * std::max(1.0, std::abs(t)))
            return k;
    std::ostringstream msg;
    msg << "time " << t << " is not on the training report grid";
    throw InputError(msg.str());
}

Eigen::VectorXd column(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v)
{
    return {v.data(), v.data() + v.size()};
}

const std::vector<double>& field_of(const State& s, StateField f)
{
    return f == StateField::Pressure ? s.pressure : s.sw;
}

} // namespace

std::string placement_key(const Placement& p)
{
    std::string out;
    for (int c : p) {
        if (!out.empty())
            out += ';';
        out += std::to_string(c);
    }
    return out;
}

WellConfiguration PlacementStudy::configuration(const Placement& producers) const
{
    if (producers.empty())
        throw ConfigError("placement has no producers");
    WellConfiguration cfg;
    cfg.wells = injectors;
    for (std::size_t k = 0; k < producers.size(); ++k) {
        const int cell = producers[k];
        if (cell < 0 || cell >= model.grid().cells())
            throw ConfigError("producer cell " + std::to_string(cell) + " is outside the grid");
        cfg.wells.push_back(
            model.make_well("P" + std::to_string(k + 1), cell, WellRole::Producer, producer_bhp));
    }
    cfg.validate(model.grid());
    return cfg;
}

std::vector<std::string> FeatureSchema::names() const
{
    static const char* block[] = {"x", "y", "r", "theta", "K", "TOF", "index"};
    std::vector<std::string> out;
    for (int k = 0; k < producers; ++k)
        for (const char* b : block)
            out.push_back(producers == 1 ? std::string(b) : std::string(b) + "_" + std::to_string(k + 1));
    out.emplace_back("LC");
    out.emplace_back("t");
    return out;
}

Eigen::VectorXd placement_features(const PlacementStudy& study, const WellConfiguration& wells,
                                   const Diagnostics& diagnostics)
{
    const Grid2D& g = study.model.grid();
    const auto n = static_cast<std::size_t>(g.cells());
    if (diagnostics.forward.tof.size() != n || diagnostics.f_phi.phi.empty())
        throw InputError("flow diagnostics missing or computed on another grid");
    const auto inj = wells.injector_indices();
    const auto prod = wells.producer_indices();
    if (inj.empty() || prod.empty())
        throw InputError("configuration needs an injector and a producer");
    if (diagnostics.flux.well_rate.size() != wells.wells.size())
        throw InputError("flow diagnostics belong to a different configuration");

    const auto [i0, j0] = g.ij(wells.wells[inj.front()].cell);
    Eigen::VectorXd f(7 * static_cast<Eigen::Index>(prod.size()) + 1);
    Eigen::Index at = 0;
    for (std::size_t w : prod) {
        const int c = wells.wells[w].cell;
        const auto [i, j] = g.ij(c);
        const double dx = i - i0;
        const double dy = j - j0;
        f[at++] = i + 1;
        f[at++] = j + 1;
        f[at++] = std::hypot(dx, dy);
        f[at++] = std::atan2(dy, dx);
        f[at++] = study.model.rock().permeability[static_cast<std::size_t>(c)];
        f[at++] = diagnostics.forward.tof[static_cast<std::size_t>(c)];
        f[at++] = c;
    }
    f[at] = diagnostics.lorenz;
    if (!f.allFinite())
        throw InputError("non-finite placement feature");
    return f;
}

Eigen::VectorXd with_time(const Eigen::VectorXd& placement_features, double t)
{
    Eigen::VectorXd f(placement_features.size() + 1);
    f << placement_features, t;
    return f;
}

std::vector<SimulatedPlacement> simulate_placements(const PlacementStudy& study,
                                                    const std::vector<Placement>& placements,
                                                    int workers)
{
    std::vector<SimulatedPlacement> out(placements.size());
    parallel_for(placements.size(), workers, [&](std::size_t k) {
        const auto start = Clock::now();
        try {
            const auto cfg = study.configuration(placements[k]);
            out[k].series = run_simulation(study.model, cfg, study.sim);
        } catch (const SimulationFailure& e) {
            throw SimulationFailure("placement " + placement_key(placements[k]) + ": " + e.what());
        }
        out[k].placement = placements[k];
        out[k].wall_seconds = seconds_since(start);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Offline stage

namespace {

ForestModel fit_coefficients(const Dataset& data, const PmorOptions& o, std::uint64_t stream,
                             CvResult& cv)
{
    auto params_for = [&](std::size_t c, int trees, std::uint64_t seed) {
        ForestParams p;
        p.n_trees = trees;
        p.tree = o.rf_grid[c];
        p.seed = seed;
        p.workers = o.workers;
        return p;
    };
    cv = CvResult{};
    if (o.rf_grid.size() > 1) {
        const auto cv_seed = derive_seed(o.seed, stream + 100);
        cv = kfold_cv(
            data, o.rf_grid.size(),
            [&](const Dataset& train, const Eigen::MatrixXd& test_x, std::size_t c) {
                return fit_forest(train, params_for(c, o.cv_trees, cv_seed)).predict(test_x);
            },
            o.cv_folds, cv_seed);
    }
    return fit_forest(data, params_for(cv.best, o.n_trees, derive_seed(o.seed, stream)));
}

} // namespace

PmorModel train_pmor(const PlacementStudy& study, const std::vector<SimulatedPlacement>& training,
                     const PmorOptions& options)
{
    if (training.size() < 2)
        throw InputError("PMOR training needs at least two placements");
    if (options.rf_grid.empty())
        throw InputError("random-forest grid is empty");
    const std::size_t producers = training.front().placement.size();
    for (const auto& t : training)
        if (t.placement.size() != producers)
            throw InputError("training placements differ in producer count");
    check_disjoint({[&] {
        std::vector<Placement> ps;
        for (const auto& t : training)
            ps.push_back(t.placement);
        return ps;
    }()});

    std::vector<const StateSeries*> series;
    for (const auto& t : training)
        series.push_back(&t.series);

    PmorModel m;
    m.schema.producers = static_cast<int>(producers);
    m.report_times = training.front().series.times;
    m.seed = options.seed;
    m.pod_p = compute_basis(assemble_snapshots(series, StateField::Pressure), options.energy_p);
    m.pod_s = compute_basis(assemble_snapshots(series, StateField::Saturation), options.energy_s);
    for (const auto& t : training)
        m.training.push_back(t.placement);

    std::vector<Eigen::VectorXd> features(training.size());
    parallel_for(training.size(), options.workers, [&](std::size_t z) {
        const auto cfg = study.configuration(training[z].placement);
        features[z] = placement_features(study, cfg, compute_diagnostics(study.model, cfg));
    });

    const auto nt = static_cast<Eigen::Index>(m.report_times.size());
    const auto rows = static_cast<Eigen::Index>(training.size()) * nt;
    Dataset dp, ds;
    dp.x.resize(rows, m.schema.width());
    dp.y.resize(rows, m.pod_p.retained());
    ds.y.resize(rows, m.pod_s.retained());
    dp.feature_names = m.schema.names();
    Eigen::Index row = 0;
    for (std::size_t z = 0; z < training.size(); ++z)
        for (Eigen::Index k = 0; k < nt; ++k, ++row) {
            const State& s = training[z].series.states[static_cast<std::size_t>(k)];
            dp.x.row(row) = with_time(features[z], m.report_times[static_cast<std::size_t>(k)]).transpose();
            dp.y.row(row) = project(m.pod_p, column(s.pressure)).transpose();
            ds.y.row(row) = project(m.pod_s, column(s.sw)).transpose();
            dp.groups.push_back(static_cast<int>(z));
        }
    ds.x = dp.x;
    ds.feature_names = dp.feature_names;
    ds.groups = dp.groups;

    m.forest_p = fit_coefficients(dp, options, 1, m.cv_p);
    m.forest_s = fit_coefficients(ds, options, 2, m.cv_s);
    return m;
}

// ---------------------------------------------------------------------------
// Online stage

Prediction predict_states(const PmorModel& pmor, const PlacementStudy& study,
                          const Placement& placement, const std::vector<double>& times)
{
    const auto start = Clock::now();
    if (static_cast<int>(placement.size()) != pmor.schema.producers)
        throw InputError("placement producer count does not match the trained schema");
    for (double t : times)
        time_slot(pmor.report_times, t);
    const auto cfg = study.configuration(placement);

    Prediction out;
    out.placement = placement;
    out.features = placement_features(study, cfg, compute_diagnostics(study.model, cfg));
    StateSeries& s = out.series;
    s.nx = study.model.grid().nx;
    s.ny = study.model.grid().ny;
    s.times = times;
    s.states.resize(times.size());
    s.rates.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const Eigen::VectorXd x = with_time(out.features, times[k]);
        State& st = s.states[k];
        st.pressure = to_std(reconstruct(pmor.pod_p, pmor.forest_p.predict(x)));
        st.sw = to_std(reconstruct(pmor.pod_s, pmor.forest_s.predict(x)));
        for (double& v : st.sw)
            v = std::clamp(v, 0.0, 1.0);
        for (const Well& w : cfg.wells)
            s.rates[k].push_back(peaceman_rates(study.model, st, w, times[k]));
    }
    out.wall_seconds = seconds_since(start);
    return out;
}

Prediction predict_states(const PmorModel& pmor, const PlacementStudy& study,
                          const Placement& placement)
{
    return predict_states(pmor, study, placement, pmor.report_times);
}

std::vector<double> compute_pvi(const PlacementStudy& study, const StateSeries& series)
{
    const std::size_t nt = series.times.size();
    std::vector<double> rate(nt, 0.0), pvi(nt, 0.0);
    for (std::size_t k = 0; k < nt; ++k)
        for (const Well& w : study.injectors)
            rate[k] += peaceman_rates(study.model, series.states[k], w, series.times[k]).water;
    for (std::size_t k = 1; k < nt; ++k)
        pvi[k] = pvi[k - 1] + 0.5 * (rate[k] + rate[k - 1]) * (series.times[k] - series.times[k - 1]);
    for (double& v : pvi)
        v /= study.model.total_pore_volume();
    return pvi;
}

// ---------------------------------------------------------------------------
// Error model

Eigen::MatrixXd error_inputs(const PlacementStudy& study, const Prediction& prediction)
{
    const StateSeries& s = prediction.series;
    const auto np = static_cast<Eigen::Index>(prediction.placement.size());
    const auto base = prediction.features.size() + 1;
    const auto pvi = compute_pvi(study, s);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(s.times.size()), base + 2 * np + 1);
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        x.row(r).head(base) = with_time(prediction.features, s.times[k]).transpose();
        for (Eigen::Index w = 0; w < np; ++w) {
            const auto c = static_cast<std::size_t>(prediction.placement[static_cast<std::size_t>(w)]);
            x(r, base + 2 * w) = s.states[k].pressure[c];
            x(r, base + 2 * w + 1) = s.states[k].sw[c];
        }
        x(r, base + 2 * np) = pvi[k];
    }
    return x;
}

Dataset error_dataset(const PlacementStudy& study, const Prediction& prediction,
                      const StateSeries& truth, int producer, StateField field)
{
    const StateSeries& s = prediction.series;
    if (producer < 0 || producer >= static_cast<int>(prediction.placement.size()))
        throw InputError("producer index out of range");
    const auto c = static_cast<std::size_t>(prediction.placement[static_cast<std::size_t>(producer)]);
    Dataset d;
    d.x = error_inputs(study, prediction);
    d.y.resize(d.x.rows(), 1);
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        const std::size_t kt = time_slot(truth.times, s.times[k]);
        d.y(static_cast<Eigen::Index>(k), 0) =
            field_of(truth.states[kt], field)[c] - field_of(s.states[k], field)[c];
    }
    return d;
}

void check_disjoint(const std::vector<std::vector<Placement>>& sets)
{
    std::set<Placement> seen;
    for (std::size_t a = 0; a < sets.size(); ++a) {
        std::set<Placement> own;
        for (const auto& p : sets[a]) {
            if (!own.insert(p).second)
                throw LeakageError("placement " + placement_key(p) + " repeats within set " +
                                   std::to_string(a));
            if (seen.count(p))
                throw LeakageError("placement " + placement_key(p) + " appears in more than one set");
        }
        seen.insert(own.begin(), own.end());
    }
}

namespace {

NeuralNet fit_error_net(const Dataset& data, const ErrorModelOptions& o, std::uint64_t stream,
                        CvResult& cv)
{
    auto params_for = [&](std::size_t c, std::uint64_t seed) {
        AnnParams p = o.ann_grid[c];
        p.seed = seed;
        return p;
    };
    cv = CvResult{};
    if (o.ann_grid.size() > 1) {
        const auto cv_seed = derive_seed(o.seed, stream + 100);
        cv = kfold_cv(
            data, o.ann_grid.size(),
            [&](const Dataset& train, const Eigen::MatrixXd& test_x, std::size_t c) {
                return fit_ann(train, params_for(c, cv_seed)).predict(test_x);
            },
            o.cv_folds, cv_seed);
    }
    return fit_ann(data, params_for(cv.best, derive_seed(o.seed, stream)));
}

Dataset stack(const std::vector<Dataset>& parts)
{
    Dataset d;
    Eigen::Index rows = 0;
    for (const auto& p : parts)
        rows += p.rows();
    d.x.resize(rows, parts.front().features());
    d.y.resize(rows, parts.front().outputs());
    Eigen::Index at = 0;
    for (std::size_t g = 0; g < parts.size(); ++g) {
        d.x.middleRows(at, parts[g].rows()) = parts[g].x;
        d.y.middleRows(at, parts[g].rows()) = parts[g].y;
        d.groups.insert(d.groups.end(), static_cast<std::size_t>(parts[g].rows()), static_cast<int>(g));
        at += parts[g].rows();
    }
    return d;
}

} // namespace

ErrorModel train_error_model(const PmorModel& pmor, const PlacementStudy& study,
                             const std::vector<SimulatedPlacement>& error_set,
                             const ErrorModelOptions& options)
{
    if (error_set.empty())
        throw InputError("error-model training set is empty");
    if (options.ann_grid.empty())
        throw InputError("ANN grid is empty");
    std::vector<Placement> placements;
    for (const auto& e : error_set)
        placements.push_back(e.placement);
    check_disjoint({pmor.training, placements});

    std::vector<Prediction> predictions(error_set.size());
    parallel_for(error_set.size(), options.workers, [&](std::size_t z) {
        predictions[z] = predict_states(pmor, study, error_set[z].placement, pmor.report_times);
    });

    ErrorModel em;
    em.schema = pmor.schema;
    em.training = placements;
    const int np = pmor.schema.producers;
    for (int w = 0; w < np; ++w) {
        for (StateField f : {StateField::Pressure, StateField::Saturation}) {
            std::vector<Dataset> parts;
            for (std::size_t z = 0; z < error_set.size(); ++z)
                parts.push_back(error_dataset(study, predictions[z], error_set[z].series, w, f));
            const Dataset data = stack(parts);
            CvResult cv;
            const auto stream = static_cast<std::uint64_t>(2 * w + (f == StateField::Saturation ? 1 : 0));
            NeuralNet net = fit_error_net(data, options, stream, cv);
            if (f == StateField::Pressure) {
                em.ann_p.push_back(std::move(net));
                em.cv_p.push_back(cv);
            } else {
                em.ann_s.push_back(std::move(net));
                em.cv_s.push_back(cv);
            }
        }
    }
    return em;
}

// ---------------------------------------------------------------------------
// Quantities of interest

QoISeries qoi_from_wellblocks(const PlacementStudy& study, const Placement& placement,
                              const std::vector<double>& times,
                              const std::vector<std::vector<double>>& p_wb,
                              const std::vector<std::vector<double>>& s_wb)
{
    const auto cfg = study.configuration(placement);
    const auto prod = cfg.producer_indices();
    QoISeries q;
    q.times = times;
    q.oil.assign(prod.size(), std::vector<double>(times.size()));
    q.water = q.oil;
    q.water_cut = q.oil;
    for (std::size_t w = 0; w < prod.size(); ++w) {
        const Well& well = cfg.wells[prod[w]];
        for (std::size_t k = 0; k < times.size(); ++k) {
            const WellSource src = well_source(well, study.model.fluid(), p_wb[w][k], s_wb[w][k],
                                               well.bhp.at(times[k]));
            // Producers are open to inflow only.
            const double oil = std::max(0.0, src.oil);
            const double water = std::max(0.0, src.water);
            q.oil[w][k] = oil;
            q.water[w][k] = water;
            q.water_cut[w][k] = oil + water > 0.0 ? water / (oil + water) : 0.0;
        }
    }
    return q;
}

QoISeries qoi_from_series(const PlacementStudy& study, const Placement& placement,
                          const StateSeries& series)
{
    std::vector<std::vector<double>> p(placement.size()), s(placement.size());
    for (std::size_t w = 0; w < placement.size(); ++w)
        for (const State& st : series.states) {
            p[w].push_back(st.pressure[static_cast<std::size_t>(placement[w])]);
            s[w].push_back(st.sw[static_cast<std::size_t>(placement[w])]);
        }
    return qoi_from_wellblocks(study, placement, series.times, p, s);
}

CorrectedPrediction apply_correction(const PmorModel& pmor, const ErrorModel& error_model,
                                     const PlacementStudy& study, const Prediction& prediction)
{
    if (error_model.schema.producers != pmor.schema.producers ||
        static_cast<int>(prediction.placement.size()) != pmor.schema.producers)
        throw InputError("error model schema does not match the prediction");
    const Eigen::MatrixXd x = error_inputs(study, prediction);
    if (x.cols() != error_model.input_width())
        throw InputError("error model input width mismatch");

    CorrectedPrediction out;
    const StateSeries& s = prediction.series;
    for (std::size_t w = 0; w < prediction.placement.size(); ++w) {
        const auto c = static_cast<std::size_t>(prediction.placement[w]);
        const Eigen::MatrixXd dp = error_model.ann_p[w].predict(x);
        const Eigen::MatrixXd ds = error_model.ann_s[w].predict(x);
        std::vector<double> p(s.times.size()), sw(s.times.size());
        for (std::size_t k = 0; k < s.times.size(); ++k) {
            const auto r = static_cast<Eigen::Index>(k);
            p[k] = s.states[k].pressure[c] + dp(r, 0);
            sw[k] = std::clamp(s.states[k].sw[c] + ds(r, 0), 0.0, 1.0);
        }
        out.p_wb.push_back(std::move(p));
        out.s_wb.push_back(std::move(sw));
    }
    out.qoi = qoi_from_wellblocks(study, prediction.placement, s.times, out.p_wb, out.s_wb);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

double accuracy(const std::vector<double>& times, const std::vector<double>& truth,
                const std::vector<double>& predicted, double min_total)
{
    if (truth.size() != times.size() || predicted.size() != times.size())
        throw InputError("accuracy series lengths differ");
    double err = 0.0, total = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] > 0.0))
            continue;
        err += std::abs(truth[k] - predicted[k]);
        total += std::abs(truth[k]);
    }
    if (!(total > min_total))
        return std::numeric_limits<double>::quiet_NaN();
    return 100.0 * (1.0 - err / total);
}

PlacementEvaluation evaluate_placement(const PmorModel& pmor, const ErrorModel& error_model,
                                       const PlacementStudy& study, const SimulatedPlacement& truth)
{
    PlacementEvaluation e;
    e.placement = truth.placement;
    e.fine_seconds = truth.wall_seconds;

    const auto start = Clock::now();
    const Prediction pred = predict_states(pmor, study, truth.placement, truth.series.times);
    const CorrectedPrediction corr = apply_correction(pmor, error_model, study, pred);
    e.surrogate_seconds = seconds_since(start);

    e.truth = qoi_from_series(study, truth.placement, truth.series);
    e.pre = qoi_from_series(study, truth.placement, pred.series);
    e.post = corr.qoi;
    const auto& t = truth.series.times;
    for (std::size_t w = 0; w < truth.placement.size(); ++w) {
        e.oil_pre.push_back(accuracy(t, e.truth.oil[w], e.pre.oil[w]));
        e.oil_post.push_back(accuracy(t, e.truth.oil[w], e.post.oil[w]));
        e.wcut_pre.push_back(accuracy(t, e.truth.water_cut[w], e.pre.water_cut[w], kWaterCutFloor));
        e.wcut_post.push_back(accuracy(t, e.truth.water_cut[w], e.post.water_cut[w], kWaterCutFloor));
    }

    // Uncorrected state errors at the producer cells against the whole field.
    int counted = 0;
    double proj_wb = 0.0, proj_field = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(t[k] > 0.0))
            continue;
        const State& a = truth.series.states[k];
        const State& b = pred.series.states[k];
        const Eigen::VectorXd pa = column(a.pressure), pb = column(b.pressure);
        const Eigen::VectorXd sa = column(a.sw), sb = column(b.sw);
        const double n = static_cast<double>(pa.size());
        e.field_pressure_error += (pa - pb).norm() / pa.norm();
        e.field_saturation_error += (sa - sb).norm() / std::sqrt(n);
        const ProjectionError pe = orthogonal_projection_error(pmor.pod_p, pa);
        proj_field += pe.field.norm() / std::sqrt(n);
        for (int c : truth.placement) {
            const auto i = static_cast<Eigen::Index>(c);
            e.wb_pressure_error += std::abs(pa[i] - pb[i]) / std::abs(pa[i]) / truth.placement.size();
            e.wb_saturation_error += std::abs(sa[i] - sb[i]) / truth.placement.size();
            proj_wb += std::abs(pe.field[i]) / truth.placement.size();
        }
        ++counted;
    }
    if (counted > 0) {
        e.field_pressure_error /= counted;
        e.field_saturation_error /= counted;
        e.wb_pressure_error /= counted;
        e.wb_saturation_error /= counted;
        e.wb_projection_ratio = proj_field > 0.0 ? proj_wb / proj_field : 0.0;
    }
    return e;
}

namespace {

void add(MetricSummary& m, double v)
{
    if (std::isnan(v)) {
        ++m.excluded;
        return;
    }
    m.mean += (v - m.mean) / ++m.counted;
}

double mean_finite(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (!std::isnan(a[k]) && !std::isnan(b[k])) {
            s += a[k];
            ++n;
        }
    return n > 0 ? s / n : std::numeric_limits<double>::quiet_NaN();
}

double pick(const std::vector<double>& v, int producer)
{
    return producer < 0 ? 0.0 : v[static_cast<std::size_t>(producer)];
}

// Mean accuracy over the metrics available both before and after correction,
// for one producer or (producer < 0) all of them.
double combined(const PlacementEvaluation& e, bool post, int producer = -1)
{
    auto sel = [&](const std::vector<double>& v) {
        return producer < 0 ? v : std::vector<double>{pick(v, producer)};
    };
    const auto oil = sel(post ? e.oil_post : e.oil_pre);
    const auto wc = sel(post ? e.wcut_post : e.wcut_pre);
    const auto oil_o = sel(post ? e.oil_pre : e.oil_post);
    const auto wc_o = sel(post ? e.wcut_pre : e.wcut_post);
    const double a = mean_finite(oil, oil_o);
    const double b = mean_finite(wc, wc_o);
    if (std::isnan(a))
        return b;
    return std::isnan(b) ? a : 0.5 * (a + b);
}

double mean_pre_oil(const PlacementEvaluation& e)
{
    double s = 0.0;
    int n = 0;
    for (double v : e.oil_pre)
        if (!std::isnan(v)) {
            s += v;
            ++n;
        }
    return n > 0 ? s / n : std::numeric_limits<double>::infinity();
}

} // namespace

EvaluationReport summarize(std::vector<PlacementEvaluation> placements, int producers)
{
    EvaluationReport r;
    const auto np = static_cast<std::size_t>(producers);
    r.oil_pre_by_producer.resize(np);
    r.oil_post_by_producer.resize(np);
    r.wcut_pre_by_producer.resize(np);
    r.wcut_post_by_producer.resize(np);
    int worsened = 0, dominant = 0;
    std::vector<int> worsened_w(np, 0);
    for (const auto& e : placements) {
        if (e.oil_pre.size() != np)
            throw InputError("evaluation producer count mismatch");
        for (std::size_t w = 0; w < np; ++w) {
            add(r.oil_pre, e.oil_pre[w]);
            add(r.oil_post, e.oil_post[w]);
            add(r.wcut_pre, e.wcut_pre[w]);
            add(r.wcut_post, e.wcut_post[w]);
            add(r.oil_pre_by_producer[w], e.oil_pre[w]);
            add(r.oil_post_by_producer[w], e.oil_post[w]);
            add(r.wcut_pre_by_producer[w], e.wcut_pre[w]);
            add(r.wcut_post_by_producer[w], e.wcut_post[w]);
        }
        r.fine_seconds += e.fine_seconds;
        r.surrogate_seconds += e.surrogate_seconds;
        if (combined(e, true) < combined(e, false))
            ++worsened;
        for (std::size_t w = 0; w < np; ++w)
            if (combined(e, true, static_cast<int>(w)) < combined(e, false, static_cast<int>(w)))
                ++worsened_w[w];
        if (e.wb_pressure_error >= e.field_pressure_error)
            ++dominant;
    }
    if (!placements.empty()) {
        const double n = static_cast<double>(placements.size());
        r.fine_seconds /= n;
        r.surrogate_seconds /= n;
        r.worsened_fraction = worsened / n;
        for (int k : worsened_w)
            r.worsened_by_producer.push_back(k / n);
        r.wb_dominance_fraction = dominant / n;
    }
    r.speedup = r.surrogate_seconds > 0.0 ? r.fine_seconds / r.surrogate_seconds : 0.0;
    std::stable_sort(placements.begin(), placements.end(),
                     [](const auto& a, const auto& b) { return mean_pre_oil(a) < mean_pre_oil(b); });
    r.placements = std::move(placements);
    return r;
}

namespace {

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot open for writing: " + path);
    out.precision(10);
    return out;
}

} // namespace

void write_evaluation_csv(const std::string& path, const EvaluationReport& report)
{
    auto out = open_out(path);
    out << "rank,placement,producer,oil_pre,oil_post,wcut_pre,wcut_post,fine_s,surrogate_s,"
           "wb_p_err,field_p_err\n";
    int rank = 0;
    for (const auto& e : report.placements) {
        ++rank;
        for (std::size_t w = 0; w < e.placement.size(); ++w)
            out << rank << ',' << placement_key(e.placement) << ',' << w + 1 << ',' << e.oil_pre[w]
                << ',' << e.oil_post[w] << ',' << e.wcut_pre[w] << ',' << e.wcut_post[w] << ','
                << e.fine_seconds << ',' << e.surrogate_seconds << ',' << e.wb_pressure_error << ','
                << e.field_pressure_error << '\n';
    }
}

void write_qoi_csv(const std::string& path, const PlacementEvaluation& e)
{
    auto out = open_out(path);
    out << "time,producer,oil_true,oil_pre,oil_post,water_true,water_pre,water_post,"
           "wcut_true,wcut_pre,wcut_post\n";
    for (std::size_t w = 0; w < e.placement.size(); ++w)
        for (std::size_t k = 0; k < e.truth.times.size(); ++k) {
            if (!(e.truth.times[k] > 0.0))
                continue;
            out << e.truth.times[k] << ',' << w + 1 << ',' << e.truth.oil[w][k] << ','
                << e.pre.oil[w][k] << ',' << e.post.oil[w][k] << ',' << e.truth.water[w][k] << ','
                << e.pre.water[w][k] << ',' << e.post.water[w][k] << ',' << e.truth.water_cut[w][k]
                << ',' << e.pre.water_cut[w][k] << ',' << e.post.water_cut[w][k] << '\n';
        }
}

void write_summary(const std::string& path, const EvaluationReport& report)
{
    auto out = open_out(path);
    auto line = [&](const char* name, const MetricSummary& m) {
        out << name << ": " << m.mean << " (" << m.counted << " counted, " << m.excluded
            << " excluded)\n";
    };
    out << "accuracy A = 100 (1 - sum_t |y - y_hat| / sum_t |y|) over report times t > 0\n";
    out << "placements: " << report.placements.size() << '\n';
    line("oil accuracy, uncorrected", report.oil_pre);
    line("oil accuracy, corrected", report.oil_post);
    line("water cut accuracy, uncorrected", report.wcut_pre);
    line("water cut accuracy, corrected", report.wcut_post);
    for (std::size_t w = 0; w < report.oil_post_by_producer.size() && report.oil_post_by_producer.size() > 1; ++w) {
        out << "producer " << w + 1 << ":\n";
        line("  oil accuracy, uncorrected", report.oil_pre_by_producer[w]);
        line("  oil accuracy, corrected", report.oil_post_by_producer[w]);
        line("  water cut accuracy, uncorrected", report.wcut_pre_by_producer[w]);
        line("  water cut accuracy, corrected", report.wcut_post_by_producer[w]);
        out << "  worsened after correction: " << report.worsened_by_producer[w] << '\n';
    }
    out << "worsened after correction: " << report.worsened_fraction << '\n';
    out << "well-block error dominance: " << report.wb_dominance_fraction << '\n';
    out << "mean fine simulation time (s): " << report.fine_seconds << '\n';
    out << "mean surrogate time (s): " << report.surrogate_seconds << '\n';
    out << "speedup: " << report.speedup << '\n';
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json cv_json(const CvResult& cv)
{
    return {{"best", cv.best}, {"mean_scores", cv.mean_scores}, {"fold_scores", cv.fold_scores}};
}

CvResult cv_from(const json& j)
{
    CvResult cv;
    cv.best = j.at("best").get<std::size_t>();
    cv.mean_scores = j.at("mean_scores").get<std::vector<double>>();
    cv.fold_scores = j.at("fold_scores").get<std::vector<std::vector<double>>>();
    return cv;
}

void write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

} // namespace

void write_pmor(const std::string& directory, const PmorModel& model)
{
    const fs::path dir(directory);
    fs::create_directories(dir);
    write_basis((dir / "pod_p.bin").string(), model.pod_p);
    write_basis((dir / "pod_s.bin").string(), model.pod_s);
    write_forest((dir / "forest_p.bin").string(), model.forest_p);
    write_forest((dir / "forest_s.bin").string(), model.forest_s);
    write_json(dir / "pmor.json", {{"producers", model.schema.producers},
                                   {"features", model.schema.names()},
                                   {"report_times", model.report_times},
                                   {"training", model.training},
                                   {"seed", model.seed},
                                   {"cv_p", cv_json(model.cv_p)},
                                   {"cv_s", cv_json(model.cv_s)}});
}

PmorModel read_pmor(const std::string& directory)
{
    const fs::path dir(directory);
    const json j = read_json(dir / "pmor.json");
    PmorModel m;
    try {
        m.schema.producers = j.at("producers").get<int>();
        m.report_times = j.at("report_times").get<std::vector<double>>();
        m.training = j.at("training").get<std::vector<Placement>>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.cv_p = cv_from(j.at("cv_p"));
        m.cv_s = cv_from(j.at("cv_s"));
    } catch (const json::exception& e) {
        throw InputError("pmor.json: " + std::string(e.what()));
    }
    m.pod_p = read_basis((dir / "pod_p.bin").string());
    m.pod_s = read_basis((dir / "pod_s.bin").string());
    m.forest_p = read_forest((dir / "forest_p.bin").string());
    m.forest_s = read_forest((dir / "forest_s.bin").string());
    if (m.forest_p.outputs() != m.pod_p.retained() || m.forest_s.outputs() != m.pod_s.retained() ||
        m.forest_p.n_features != m.schema.width() || m.forest_s.n_features != m.schema.width())
        throw InputError(directory + ": forests do not match the bases or feature schema");
    return m;
}

void write_error_model(const std::string& directory, const ErrorModel& model)
{
    const fs::path dir(directory);
    fs::create_directories(dir);
    json cvp = json::array(), cvs = json::array();
    for (std::size_t w = 0; w < model.ann_p.size(); ++w) {
        write_net((dir / ("ann_p_" + std::to_string(w + 1) + ".bin")).string(), model.ann_p[w]);
        write_net((dir / ("ann_s_" + std::to_string(w + 1) + ".bin")).string(), model.ann_s[w]);
        cvp.push_back(cv_json(model.cv_p[w]));
        cvs.push_back(cv_json(model.cv_s[w]));
    }
    write_json(dir / "error_model.json", {{"producers", model.schema.producers},
                                          {"input_width", model.input_width()},
                                          {"training", model.training},
                                          {"cv_p", cvp},
                                          {"cv_s", cvs}});
}

ErrorModel read_error_model(const std::string& directory)
{
    const fs::path dir(directory);
    const json j = read_json(dir / "error_model.json");
    ErrorModel m;
    try {
        m.schema.producers = j.at("producers").get<int>();
        m.training = j.at("training").get<std::vector<Placement>>();
        for (const auto& c : j.at("cv_p"))
            m.cv_p.push_back(cv_from(c));
        for (const auto& c : j.at("cv_s"))
            m.cv_s.push_back(cv_from(c));
    } catch (const json::exception& e) {
        throw InputError("error_model.json: " + std::string(e.what()));
    }
    for (int w = 0; w < m.schema.producers; ++w) {
        m.ann_p.push_back(read_net((dir / ("ann_p_" + std::to_string(w + 1) + ".bin")).string()));
        m.ann_s.push_back(read_net((dir / ("ann_s_" + std::to_string(w + 1) + ".bin")).string()));
        if (m.ann_p.back().layer_sizes().front() != m.input_width() ||
            m.ann_s.back().layer_sizes().front() != m.input_width())
            throw InputError(directory + ": error-model nets do not match the input schema");
    }
    return m;
}

} // namespace wellrom
