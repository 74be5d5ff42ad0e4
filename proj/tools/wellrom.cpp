#include "wellrom/errors.hpp"
#include "wellrom/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#ifndef WELLROM_VERSION
#define WELLROM_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wellrom;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kSimulation = 3, kLeakage = 4 };

struct Options {
    std::string config;
    std::string out;
    std::string placement;
    std::string cache;
    int workers = 1;
    std::optional<std::uint64_t> seed_override;
};

std::string hex(std::uint64_t v)
{
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

ExperimentConfig load(const Options& o)
{
    ExperimentConfig c = load_experiment(o.config);
    if (o.seed_override) {
        c.seed = *o.seed_override;
        c.pmor.seed = derive_seed(c.seed, 1);
        c.error.seed = derive_seed(c.seed, 2);
    }
    if (o.workers < 1)
        throw ConfigError("--workers must be >= 1");
    return c;
}

fs::path out_dir(const Options& o, const ExperimentConfig& c)
{
    fs::path dir = o.out.empty() ? fs::path(c.output) : fs::path(o.out);
    fs::create_directories(dir);
    return dir;
}

json manifest(const std::string& command, const ExperimentConfig& c)
{
    return {{"tool", "wellrom"},
            {"version", WELLROM_VERSION},
            {"command", command},
            {"config", c.source_path},
            {"config_hash", hex(c.hash)},
            {"study_hash", hex(study_hash(c))},
            {"seed", c.seed}};
}

void write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

json placements_json(const std::vector<Placement>& ps, const Grid2D& g)
{
    json a = json::array();
    for (const auto& p : ps)
        a.push_back(format_placement(p, g));
    return a;
}

void write_single_qoi(const fs::path& path, const QoISeries& q)
{
    std::ofstream out(path);
    out.precision(10);
    out << "time,producer,oil_rate,water_rate,water_cut\n";
    for (std::size_t w = 0; w < q.oil.size(); ++w)
        for (std::size_t k = 0; k < q.times.size(); ++k)
            if (q.times[k] > 0.0)
                out << q.times[k] << ',' << w + 1 << ',' << q.oil[w][k] << ',' << q.water[w][k] << ','
                    << q.water_cut[w][k] << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Options& o)
{
    const auto c = load(o);
    const auto study = build_study(c);
    const Placement p = parse_placement(o.placement, c.grid);
    if (static_cast<int>(p.size()) != c.producers)
        throw ConfigError("placement has " + std::to_string(p.size()) + " producers, config expects " +
                          std::to_string(c.producers));
    const auto cfg = study.configuration(p);
    const auto series = run_simulation(study.model, cfg, study.sim);
    const auto dir = out_dir(o, c);
    write_state_series((dir / "series.wrss").string(), series);
    write_state_series_csv((dir / "states.csv").string(), series);
    write_single_qoi(dir / "qoi.csv", qoi_from_series(study, p, series));
    auto m = manifest("simulate", c);
    m["placement"] = format_placement(p, c.grid);
    write_json(dir / "manifest.json", m);
    std::cout << "simulated " << format_placement(p, c.grid) << " -> " << dir.string() << '\n';
    return kOk;
}

int cmd_diagnose(const Options& o)
{
    const auto c = load(o);
    const auto study = build_study(c);
    const Placement p = parse_placement(o.placement, c.grid);
    const auto cfg = study.configuration(p);
    const auto d = compute_diagnostics(study.model, cfg);
    const auto dir = out_dir(o, c);
    write_diagnostics_csv((dir / "diagnostics.csv").string(), study.model.grid(), d);
    write_f_phi_csv((dir / "f_phi.csv").string(), d.f_phi);
    auto m = manifest("diagnose", c);
    m["placement"] = format_placement(p, c.grid);
    m["lorenz"] = d.lorenz;
    write_json(dir / "manifest.json", m);
    std::cout << "L_c = " << std::setprecision(6) << d.lorenz << '\n';
    return kOk;
}

int cmd_train(const Options& o)
{
    using Clock = std::chrono::steady_clock;
    const auto c = load(o);
    const auto study = build_study(c);
    const auto dir = out_dir(o, c);
    SimulationCache cache(o.cache.empty() ? (dir / "simulations").string() : o.cache);

    const auto sets = sample_placements(c, candidate_pool(c, study));
    auto t0 = Clock::now();
    const auto train = cache.run(c, study, sets.pmor_train, o.workers);
    const auto err = cache.run(c, study, sets.error_train, o.workers);
    const double t_sim = seconds_since(t0);

    PmorOptions po = c.pmor;
    po.workers = o.workers;
    t0 = Clock::now();
    const auto pmor = train_pmor(study, train, po);
    const double t_pmor = seconds_since(t0);

    ErrorModelOptions eo = c.error;
    eo.workers = o.workers;
    t0 = Clock::now();
    const auto em = train_error_model(pmor, study, err, eo);
    const double t_err = seconds_since(t0);

    write_pmor((dir / "pmor").string(), pmor);
    write_error_model((dir / "error_model").string(), em);
    write_sigma_csv((dir / "sigma_p.csv").string(), pmor.pod_p);
    write_sigma_csv((dir / "sigma_s.csv").string(), pmor.pod_s);
    auto rf_labels = [&] {
        std::vector<std::string> l;
        for (const auto& t : c.pmor.rf_grid)
            l.push_back("Nfmax=" + std::to_string(t.max_features) + " Nl=" + std::to_string(t.min_leaf));
        return l;
    }();
    if (!pmor.cv_p.mean_scores.empty()) {
        write_cv_csv((dir / "cv_forest_p.csv").string(), rf_labels, pmor.cv_p);
        write_cv_csv((dir / "cv_forest_s.csv").string(), rf_labels, pmor.cv_s);
    }

    auto m = manifest("train", c);
    m["sets"] = {{"pmor_train", placements_json(sets.pmor_train, c.grid)},
                 {"error_train", placements_json(sets.error_train, c.grid)},
                 {"test", placements_json(sets.test, c.grid)}};
    m["disjoint"] = true;
    m["basis"] = {{"r_p", pmor.pod_p.retained()}, {"r_s", pmor.pod_s.retained()},
                  {"energy_p", pmor.pod_p.energy}, {"energy_s", pmor.pod_s.energy}};
    m["selected"] = {{"forest_p", rf_labels[pmor.cv_p.best]}, {"forest_s", rf_labels[pmor.cv_s.best]}};
    m["seconds"] = {{"simulate", t_sim}, {"pmor", t_pmor}, {"error_model", t_err}};
    write_json(dir / "train_manifest.json", m);

    std::ofstream rep(dir / "training_report.txt");
    rep << "placements: pmor " << sets.pmor_train.size() << ", error " << sets.error_train.size()
        << ", test " << sets.test.size() << " (pairwise disjoint)\n";
    rep << "basis: r_p " << pmor.pod_p.retained() << " (energy " << pmor.pod_p.energy << "), r_s "
        << pmor.pod_s.retained() << " (energy " << pmor.pod_s.energy << ")\n";
    for (const auto& w : pmor.pod_p.warnings)
        rep << "warning (pressure basis): " << w << '\n';
    for (const auto& w : pmor.pod_s.warnings)
        rep << "warning (saturation basis): " << w << '\n';
    rep << "forest hyperparameters: pressure " << rf_labels[pmor.cv_p.best] << ", saturation "
        << rf_labels[pmor.cv_s.best] << '\n';
    rep << "wall time (s): simulate " << t_sim << ", pmor " << t_pmor << ", error model " << t_err << '\n';
    std::cout << std::ifstream(dir / "training_report.txt").rdbuf();
    return kOk;
}

int cmd_evaluate(const Options& o)
{
    using Clock = std::chrono::steady_clock;
    const auto c = load(o);
    const auto study = build_study(c);
    const auto dir = out_dir(o, c);
    const auto pmor = read_pmor((dir / "pmor").string());
    const auto em = read_error_model((dir / "error_model").string());
    const auto sets = sample_placements(c, candidate_pool(c, study));
    check_disjoint({pmor.training, em.training, sets.test});

    SimulationCache cache(o.cache.empty() ? (dir / "simulations").string() : o.cache);
    auto t0 = Clock::now();
    const auto test = cache.run(c, study, sets.test, o.workers);
    const double t_sim = seconds_since(t0);

    t0 = Clock::now();
    std::vector<PlacementEvaluation> evals;
    for (const auto& t : test)
        evals.push_back(evaluate_placement(pmor, em, study, t));
    const double t_eval = seconds_since(t0);
    const auto report = summarize(std::move(evals), c.producers);

    write_evaluation_csv((dir / "evaluation.csv").string(), report);
    fs::create_directories(dir / "qoi");
    for (const auto& e : report.placements)
        write_qoi_csv((dir / "qoi" / ("qoi_" + placement_key(e.placement) + ".csv")).string(), e);
    write_summary((dir / "summary.txt").string(), report);

    auto m = manifest("evaluate", c);
    m["test"] = placements_json(sets.test, c.grid);
    m["seconds"] = {{"simulate", t_sim}, {"evaluate", t_eval}};
    write_json(dir / "evaluate_manifest.json", m);
    std::cout << std::ifstream(dir / "summary.txt").rdbuf();
    return kOk;
}

int cmd_report(const Options& o)
{
    const fs::path dir(o.out);
    bool any = false;
    for (const char* f : {"training_report.txt", "summary.txt"}) {
        std::ifstream in(dir / f);
        if (in) {
            std::cout << "== " << f << '\n' << in.rdbuf();
            any = true;
        }
    }
    if (!any)
        throw ConfigError("no training or evaluation report under " + dir.string());
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Well-placement surrogate: fine simulation, flow diagnostics, PMOR training and evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", WELLROM_VERSION);
    Options o;

    auto common = [&](CLI::App* s, bool placement) {
        s->add_option("--config", o.config, "Experiment JSON file")->required()->check(CLI::ExistingFile);
        s->add_option("--out", o.out, "Output directory (default: run.output of the config)");
        s->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
        s->add_option("--seed-override", o.seed_override, "Replace sampling.seed");
        if (placement)
            s->add_option("--placement", o.placement, "Producer cells, 1-based: 'x,y' or 'x1,y1;x2,y2'")
                ->required();
    };
    auto* sim = app.add_subcommand("simulate", "Fine simulation of one placement");
    common(sim, true);
    auto* diag = app.add_subcommand("diagnose", "Flow diagnostics of one placement");
    common(diag, true);
    auto* train = app.add_subcommand("train", "Offline PMOR and error-model training");
    common(train, false);
    train->add_option("--cache", o.cache, "Simulation cache directory");
    auto* eval = app.add_subcommand("evaluate", "Evaluate trained models on the test placements");
    common(eval, false);
    eval->add_option("--cache", o.cache, "Simulation cache directory");
    auto* rep = app.add_subcommand("report", "Print the reports of a run directory");
    rep->add_option("--out", o.out, "Run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*sim)
            return cmd_simulate(o);
        if (*diag)
            return cmd_diagnose(o);
        if (*train)
            return cmd_train(o);
        if (*eval)
            return cmd_evaluate(o);
        return cmd_report(o);
    } catch (const LeakageError& e) {
        std::cerr << "leakage guard: " << e.what() << '\n';
        return kLeakage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const SimulationFailure& e) {
        std::cerr << "simulation failure: " << e.what() << '\n';
        return kSimulation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
