#include "wellrom/experiment.hpp"

#include "wellrom/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

namespace wellrom {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a(const std::string& bytes) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

TreeParams tree_params(const json& j)
{
    TreeParams p;
    p.max_features = get_or(j, "max_features", p.max_features);
    p.min_leaf = get_or(j, "min_leaf", p.min_leaf);
    if (p.max_features < 1 || p.min_leaf < 1)
        throw ConfigError("rf_grid entries need max_features >= 1 and min_leaf >= 1");
    return p;
}

AnnParams ann_params(const json& j)
{
    AnnParams p;
    p.hidden = get_or(j, "hidden", p.hidden);
    p.lambda = get_or(j, "lambda", p.lambda);
    p.epochs = get_or(j, "epochs", p.epochs);
    p.learning_rate = get_or(j, "learning_rate", p.learning_rate);
    p.momentum = get_or(j, "momentum", p.momentum);
    p.batch_size = get_or(j, "batch_size", p.batch_size);
    if (p.epochs < 1 || p.batch_size < 1 || !(p.learning_rate > 0.0) || p.lambda < 0.0)
        throw ConfigError("invalid ann_grid entry");
    return p;
}

void parse(const json& j, ExperimentConfig& c, const fs::path& base)
{
    c.name = j.at("name").get<std::string>();

    const json& m = j.at("model");
    const json& g = m.at("grid");
    c.grid.nx = g.at("nx").get<int>();
    c.grid.ny = g.at("ny").get<int>();
    c.grid.dx = g.at("dx").get<double>();
    c.grid.dy = g.at("dy").get<double>();
    c.grid.dz = g.at("dz").get<double>();
    c.grid.validate();

    const json& r = m.at("rock");
    if (r.contains("permeability_file")) {
        c.permeability_file = (base / r.at("permeability_file").get<std::string>()).string();
        c.porosity_file = (base / r.at("porosity_file").get<std::string>()).string();
        for (const auto& f : {c.permeability_file, c.porosity_file})
            if (!fs::exists(f))
                throw ConfigError("field file not found: " + f);
    } else {
        SyntheticFieldSpec& f = c.field;
        f.generator = parse_field_generator(r.at("generator").get<std::string>());
        f.mean_perm = get_or(r, "permeability", f.mean_perm);
        f.porosity = get_or(r, "porosity", f.porosity);
        f.log_std = get_or(r, "log_std", f.log_std);
        f.corr_length_x = get_or(r, "corr_length_x", f.corr_length_x);
        f.corr_length_y = get_or(r, "corr_length_y", f.corr_length_y);
        f.channels = get_or(r, "channels", f.channels);
        f.channel_width = get_or(r, "channel_width", f.channel_width);
        f.channel_perm = get_or(r, "channel_permeability", f.channel_perm);
        f.background_perm = get_or(r, "background_permeability", f.background_perm);
        f.background_porosity = get_or(r, "background_porosity", f.background_porosity);
        f.meander_amplitude = get_or(r, "meander_amplitude", f.meander_amplitude);
        f.meander_wavelength = get_or(r, "meander_wavelength", f.meander_wavelength);
        f.anchor_i = get_or(r, "anchor_i", f.anchor_i);
        f.seed = get_or(r, "seed", f.seed);
    }
    if (m.contains("fluid")) {
        const json& f = m.at("fluid");
        c.fluid.mu_water = get_or(f, "mu_water", c.fluid.mu_water);
        c.fluid.mu_oil = get_or(f, "mu_oil", c.fluid.mu_oil);
        c.fluid.corey_exponent = get_or(f, "corey_exponent", c.fluid.corey_exponent);
        c.fluid.swc = get_or(f, "swc", c.fluid.swc);
        c.fluid.sor = get_or(f, "sor", c.fluid.sor);
    }
    c.fluid.validate();
    c.well_radius = get_or(m, "well_radius", c.well_radius);

    const json& w = j.at("wells");
    for (const auto& i : w.at("injectors")) {
        InjectorSpec s{i.at("name").get<std::string>(), i.at("x").get<int>(), i.at("y").get<int>(),
                       i.at("bhp").get<double>()};
        if (!c.grid.contains(s.x - 1, s.y - 1))
            throw ConfigError("injector '" + s.name + "' is outside the grid");
        c.injectors.push_back(s);
    }
    if (c.injectors.empty())
        throw ConfigError("at least one injector is required");
    c.producer_bhp = w.at("producer_bhp").get<double>();
    c.producers = get_or(w, "producers", 1);
    if (c.producers < 1)
        throw ConfigError("producers must be >= 1");
    if (w.contains("candidates")) {
        const json& cand = w.at("candidates");
        c.min_permeability = get_or(cand, "min_permeability", 0.0);
        c.region_samples = get_or(cand, "region_samples", 0);
        if (cand.contains("regions"))
            for (const auto& reg : cand.at("regions")) {
                const auto v = reg.get<std::vector<int>>();
                if (v.size() != 4 || v[0] > v[1] || v[2] > v[3])
                    throw ConfigError("region must be [x0, x1, y0, y1] with x0 <= x1, y0 <= y1");
                c.regions.push_back({v[0], v[1], v[2], v[3]});
            }
    }
    if (!c.regions.empty() && static_cast<int>(c.regions.size()) != c.producers)
        throw ConfigError("need one candidate region per producer");
    if (c.producers > 1 && c.regions.empty())
        throw ConfigError("multi-producer studies need candidate regions");

    const json& s = j.at("sampling");
    c.pmor_train = s.at("pmor_train").get<int>();
    c.error_train = s.at("error_train").get<int>();
    c.test = s.at("test").get<int>();
    if (!s.contains("seed"))
        throw ConfigError("sampling.seed is required");
    c.seed = s.at("seed").get<std::uint64_t>();
    if (c.pmor_train < 2 || c.error_train < 1 || c.test < 1)
        throw ConfigError("sample counts must be pmor_train >= 2, error_train >= 1, test >= 1");

    const json& pod = j.at("pod");
    c.pmor.energy_p = pod.at("energy_p").get<double>();
    c.pmor.energy_s = pod.at("energy_s").get<double>();
    for (double e : {c.pmor.energy_p, c.pmor.energy_s})
        if (!(e > 0.0 && e <= 1.0))
            throw ConfigError("energy fractions must lie in (0, 1]");

    const json& ml = j.at("ml");
    c.pmor.rf_grid.clear();
    for (const auto& t : ml.at("rf_grid"))
        c.pmor.rf_grid.push_back(tree_params(t));
    c.pmor.n_trees = get_or(ml, "n_trees", c.pmor.n_trees);
    c.pmor.cv_trees = get_or(ml, "cv_trees", c.pmor.cv_trees);
    c.pmor.cv_folds = get_or(ml, "cv_folds", c.pmor.cv_folds);
    c.error.cv_folds = c.pmor.cv_folds;
    c.error.ann_grid.clear();
    for (const auto& a : ml.at("ann_grid"))
        c.error.ann_grid.push_back(ann_params(a));
    if (c.pmor.rf_grid.empty() || c.error.ann_grid.empty())
        throw ConfigError("rf_grid and ann_grid must be non-empty");
    if (c.pmor.n_trees < 1 || c.pmor.cv_trees < 1 || c.pmor.cv_folds < 2)
        throw ConfigError("n_trees, cv_trees >= 1 and cv_folds >= 2 required");

    const json& run = j.at("run");
    c.total_time = run.at("total_time").get<double>();
    c.report_interval = run.at("report_interval").get<double>();
    c.max_dt = get_or(run, "max_dt", 0.0);
    c.max_step_cuts = get_or(run, "max_step_cuts", c.max_step_cuts);
    c.max_newton_iters = get_or(run, "max_newton_iters", c.max_newton_iters);
    c.output = get_or<std::string>(run, "output", "runs/" + c.name);
}

} // namespace

ExperimentConfig load_experiment(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    ExperimentConfig c;
    c.source_path = path;
    c.hash = fnv1a(text);
    try {
        parse(json::parse(text), c, fs::path(path).parent_path());
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    } catch (const InputError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    c.pmor.seed = derive_seed(c.seed, 1);
    c.error.seed = derive_seed(c.seed, 2);
    return c;
}

PlacementStudy build_study(const ExperimentConfig& c)
{
    RockProps rock;
    if (!c.permeability_file.empty()) {
        const GridField k = read_grid_field(c.permeability_file);
        const GridField phi = read_grid_field(c.porosity_file);
        if (k.nx != c.grid.nx || k.ny != c.grid.ny || phi.nx != c.grid.nx || phi.ny != c.grid.ny)
            throw ConfigError("field files do not match the grid");
        rock = {k.values, phi.values};
    } else {
        rock = generate_field(c.grid, c.field);
    }
    ReservoirModel model(c.grid, rock, c.fluid, c.well_radius);

    std::vector<Well> injectors;
    for (const auto& i : c.injectors)
        injectors.push_back(model.make_well(i.name, c.grid.index(i.x - 1, i.y - 1), WellRole::Injector,
                                            BhpSchedule(i.bhp)));
    SimulationSpec sim;
    sim.total_time = c.total_time;
    sim.report_times = SimulationSpec::uniform_reports(c.total_time, c.report_interval);
    sim.max_dt = c.max_dt;
    sim.max_step_cuts = c.max_step_cuts;
    sim.max_newton_iters = c.max_newton_iters;
    sim.validate();
    return {std::move(model), std::move(injectors), BhpSchedule(c.producer_bhp), sim};
}

Placement parse_placement(const std::string& text, const Grid2D& grid)
{
    Placement p;
    std::stringstream all(text);
    std::string item;
    while (std::getline(all, item, ';')) {
        int x = 0, y = 0;
        char comma = 0;
        std::stringstream one(item);
        if (!(one >> x >> comma >> y) || comma != ',' || !(one >> std::ws).eof())
            throw ConfigError("placement must look like 'x,y' or 'x1,y1;x2,y2': " + text);
        if (!grid.contains(x - 1, y - 1))
            throw ConfigError("placement (" + std::to_string(x) + "," + std::to_string(y) +
                              ") is outside the grid");
        p.push_back(grid.index(x - 1, y - 1));
    }
    if (p.empty())
        throw ConfigError("empty placement");
    return p;
}

std::string format_placement(const Placement& p, const Grid2D& grid)
{
    std::string out;
    for (int c : p) {
        const auto [i, j] = grid.ij(c);
        if (!out.empty())
            out += ';';
        out += std::to_string(i + 1) + "," + std::to_string(j + 1);
    }
    return out;
}

std::vector<Placement> candidate_pool(const ExperimentConfig& c, const PlacementStudy& study)
{
    const Grid2D& g = study.model.grid();
    std::set<int> taken;
    for (const auto& w : study.injectors)
        taken.insert(w.cell);
    auto admissible = [&](int cell, const Region* region) {
        const auto [i, j] = g.ij(cell);
        return !taken.count(cell) &&
               study.model.rock().permeability[static_cast<std::size_t>(cell)] > c.min_permeability &&
               (region == nullptr || region->contains(i + 1, j + 1));
    };

    std::vector<Placement> pool;
    if (c.producers == 1) {
        const Region* region = c.regions.empty() ? nullptr : &c.regions.front();
        for (int cell = 0; cell < g.cells(); ++cell)
            if (admissible(cell, region))
                pool.push_back({cell});
        return pool;
    }

    std::mt19937_64 rng(derive_seed(c.seed, 3));
    std::vector<std::vector<int>> per_region;
    for (const Region& region : c.regions) {
        std::vector<int> cells;
        for (int cell = 0; cell < g.cells(); ++cell)
            if (admissible(cell, &region))
                cells.push_back(cell);
        if (c.region_samples > 0) {
            if (static_cast<int>(cells.size()) < c.region_samples)
                throw ConfigError("candidate region has fewer cells than region_samples");
            std::shuffle(cells.begin(), cells.end(), rng);
            cells.resize(static_cast<std::size_t>(c.region_samples));
            std::sort(cells.begin(), cells.end());
        }
        per_region.push_back(std::move(cells));
    }
    pool.push_back({});
    for (const auto& cells : per_region) {
        std::vector<Placement> next;
        for (const auto& partial : pool)
            for (int cell : cells)
                if (std::find(partial.begin(), partial.end(), cell) == partial.end()) {
                    Placement p = partial;
                    p.push_back(cell);
                    next.push_back(std::move(p));
                }
        pool = std::move(next);
    }
    return pool;
}

PlacementSets sample_placements(const ExperimentConfig& c, const std::vector<Placement>& pool)
{
    const auto need = static_cast<std::size_t>(c.test + c.error_train + c.pmor_train);
    if (need > pool.size())
        throw ConfigError("sample counts (" + std::to_string(need) + ") exceed the candidate pool (" +
                          std::to_string(pool.size()) + ")");
    std::vector<Placement> order = pool;
    std::mt19937_64 rng(derive_seed(c.seed, 4));
    std::shuffle(order.begin(), order.end(), rng);
    PlacementSets s;
    auto it = order.begin();
    s.test.assign(it, it + c.test);
    it += c.test;
    s.error_train.assign(it, it + c.error_train);
    it += c.error_train;
    s.pmor_train.assign(it, it + c.pmor_train);
    check_disjoint({s.pmor_train, s.error_train, s.test});
    return s;
}

std::uint64_t study_hash(const ExperimentConfig& c)
{
    std::ostringstream s;
    s << std::setprecision(17) << c.grid.nx << ' ' << c.grid.ny << ' ' << c.grid.dx << ' ' << c.grid.dy
      << ' ' << c.grid.dz << '|';
    if (!c.permeability_file.empty()) {
        for (const auto& f : {c.permeability_file, c.porosity_file}) {
            std::ifstream in(f, std::ios::binary);
            std::stringstream b;
            b << in.rdbuf();
            s << fnv1a(b.str()) << ' ';
        }
    } else {
        const auto& f = c.field;
        s << static_cast<int>(f.generator) << ' ' << f.mean_perm << ' ' << f.log_std << ' '
          << f.corr_length_x << ' ' << f.corr_length_y << ' ' << f.porosity << ' ' << f.channels << ' '
          << f.channel_width << ' ' << f.channel_perm << ' ' << f.background_perm << ' '
          << f.background_porosity << ' ' << f.meander_amplitude << ' ' << f.meander_wavelength
          << ' ' << f.anchor_i << ' ' << f.seed;
    }
    s << '|' << c.fluid.mu_water << ' ' << c.fluid.mu_oil << ' ' << c.fluid.corey_exponent << ' '
      << c.fluid.swc << ' ' << c.fluid.sor << ' ' << c.well_radius << '|';
    for (const auto& i : c.injectors)
        s << i.x << ',' << i.y << ',' << i.bhp << ';';
    s << '|' << c.producer_bhp << ' ' << c.total_time << ' ' << c.report_interval << ' ' << c.max_dt
      << ' ' << c.max_step_cuts << ' ' << c.max_newton_iters;
    return fnv1a(s.str());
}

SimulationCache::SimulationCache(std::string directory) : directory_(std::move(directory)) {}

std::vector<SimulatedPlacement> SimulationCache::run(const ExperimentConfig& config,
                                                     const PlacementStudy& study,
                                                     const std::vector<Placement>& placements,
                                                     int workers)
{
    if (directory_.empty())
        return simulate_placements(study, placements, workers);

    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << study_hash(config);
    const fs::path dir = fs::path(directory_) / hex.str();
    fs::create_directories(dir);

    std::vector<SimulatedPlacement> out(placements.size());
    std::vector<Placement> missing;
    std::vector<std::size_t> slots;
    for (std::size_t k = 0; k < placements.size(); ++k) {
        const std::string key = placement_key(placements[k]);
        const fs::path series = dir / (key + ".wrss");
        const fs::path timing = dir / (key + ".time");
        std::ifstream t(timing);
        double seconds = 0.0;
        if (fs::exists(series) && t >> seconds) {
            out[k] = {placements[k], read_state_series(series.string()), seconds};
        } else {
            missing.push_back(placements[k]);
            slots.push_back(k);
        }
    }
    // Chunked so an interrupted run keeps the simulations already finished.
    const std::size_t chunk = 8 * static_cast<std::size_t>(std::max(1, workers));
    for (std::size_t begin = 0; begin < missing.size(); begin += chunk) {
        const std::size_t end = std::min(missing.size(), begin + chunk);
        auto fresh = simulate_placements(
            study, std::vector<Placement>(missing.begin() + static_cast<std::ptrdiff_t>(begin),
                                          missing.begin() + static_cast<std::ptrdiff_t>(end)),
            workers);
        for (std::size_t m = 0; m < fresh.size(); ++m) {
            const std::string key = placement_key(fresh[m].placement);
            write_state_series((dir / (key + ".wrss")).string(), fresh[m].series);
            std::ofstream t(dir / (key + ".time"));
            t << std::setprecision(17) << fresh[m].wall_seconds << '\n';
            out[slots[begin + m]] = std::move(fresh[m]);
        }
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, int workers, SimulationCache& cache)
{
    using Clock = std::chrono::steady_clock;
    auto since = [](Clock::time_point t0) {
        return std::chrono::duration<double>(Clock::now() - t0).count();
    };
    const PlacementStudy study = build_study(config);
    ExperimentResult r;
    r.sets = sample_placements(config, candidate_pool(config, study));

    auto t0 = Clock::now();
    const auto train = cache.run(config, study, r.sets.pmor_train, workers);
    const auto err = cache.run(config, study, r.sets.error_train, workers);
    const auto test = cache.run(config, study, r.sets.test, workers);
    r.simulate_seconds = since(t0);

    PmorOptions po = config.pmor;
    po.workers = workers;
    t0 = Clock::now();
    r.pmor = train_pmor(study, train, po);
    r.pmor_seconds = since(t0);

    ErrorModelOptions eo = config.error;
    eo.workers = workers;
    t0 = Clock::now();
    r.error_model = train_error_model(r.pmor, study, err, eo);
    r.error_seconds = since(t0);

    t0 = Clock::now();
    check_disjoint({r.sets.pmor_train, r.sets.error_train, r.sets.test});
    std::vector<PlacementEvaluation> evals;
    for (const auto& t : test)
        evals.push_back(evaluate_placement(r.pmor, r.error_model, study, t));
    r.report = summarize(std::move(evals), config.producers);
    r.evaluate_seconds = since(t0);
    return r;
}

} // namespace wellrom
