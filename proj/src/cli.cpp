#include "pinn/cli.hpp"

#include "pinn/report.hpp"
#include "pinn/schrodinger.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>

namespace pinn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct HelpRequest {
    std::string text;
};

struct Flags {
    std::optional<std::string> config, problem, mode, activation, out_dir, save, input, grid;
    std::optional<double> lr, lambda_init, gap_threshold, error_threshold, regime_factor, dt;
    std::optional<int> width, depth;
    std::optional<std::size_t> iterations, nf, ng, nh, m, seeds, ranks, cadence, min_eval_points,
        n_x, n_t;
    std::optional<std::uint64_t> seed;
    std::vector<std::size_t> n_list, sizes;
};

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config, "JSON configuration file");
    app->add_option("--out-dir", f.out_dir, "Output directory (default $PINN_OUT_DIR or ./pinn_out)");
}

void add_thresholds(CLI::App* app, Flags& f) {
    app->add_option("--gap-threshold", f.gap_threshold, "Permanent regime: median gap below this");
    app->add_option("--error-threshold", f.error_threshold, "Pre-asymptotic: median error above this");
    app->add_option("--regime-factor", f.regime_factor,
                    "Permanent regime: error within this factor of the largest-N error");
}

void add_training(CLI::App* app, Flags& f) {
    add_common(app, f);
    app->add_option("--problem", f.problem, "laplace, laplace-inverse or schrodinger");
    app->add_option("--lr", f.lr, "ADAM learning rate");
    app->add_option("--width", f.width, "Hidden-layer width");
    app->add_option("--depth", f.depth, "Number of hidden layers");
    app->add_option("--iterations", f.iterations, "ADAM iterations");
    app->add_option("--activation", f.activation, "tanh or identity");
    app->add_option("--nf", f.nf, "Interior collocation points (per rank in weak mode)");
    app->add_option("--ng", f.ng, "Boundary points");
    app->add_option("--nh", f.nh, "Initial-condition points");
    app->add_option("--m", f.m, "Observations (inverse problem)");
    app->add_option("--seed", f.seed, "Base seed");
    app->add_option("--cadence", f.cadence, "Iterations between loss records");
    app->add_option("--lambda-init", f.lambda_init, "Initial material parameter (inverse problem)");
    app->add_option("--min-eval-points", f.min_eval_points, "Lower bound on the error-set size");
    app->add_option("--ranks", f.ranks, "Number of data-parallel ranks");
    app->add_option("--mode", f.mode, "serial, weak or strong");
    add_thresholds(app, f);
}

json load_json(const fs::path& path) {
    if (!fs::exists(path)) {
        throw ConfigError("config file '" + path.string() + "' does not exist");
    }
    std::ifstream is(path);
    if (!is) throw ConfigError("config file '" + path.string() + "' cannot be read");
    try {
        json j = json::parse(is);
        if (!j.is_object()) throw ConfigError("config file '" + path.string() + "' must hold a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

template <class T>
T field(const json& j, const std::string& key) {
    try {
        if constexpr (std::is_unsigned_v<T>) {
            if (j.is_number_integer() && j.get<long long>() < 0) {
                throw ConfigError("config key '" + key + "' must be non-negative");
            }
            if (!j.is_number_integer() && !j.is_number_unsigned()) {
                throw ConfigError("config key '" + key + "' must be a non-negative integer");
            }
        }
        if constexpr (std::is_same_v<T, int>) {
            if (!j.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
        }
        if constexpr (std::is_same_v<T, double>) {
            if (!j.is_number()) throw ConfigError("config key '" + key + "' must be a number");
        }
        return j.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + key + "' has the wrong type: " + e.what());
    }
}

std::vector<std::size_t> size_list(const json& j, const std::string& key) {
    if (!j.is_array()) throw ConfigError("config key '" + key + "' must be an array of integers");
    std::vector<std::size_t> out;
    for (const auto& v : j) out.push_back(field<std::size_t>(v, key));
    return out;
}

Activation parse_activation(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "identity") return Activation::Identity;
    throw ConfigError("unknown activation '" + s + "' (expected tanh or identity)");
}

ProblemKind problem_of(const std::string& s) {
    try {
        return parse_problem_kind(s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

ScaleMode mode_of(const std::string& s) {
    try {
        return parse_scale_mode(s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

void apply_bounds(Config& c, const json& j) {
    if (!j.is_object()) throw ConfigError("config key 'bounds' must be an object");
    BoundInputs b;
    for (const auto& [k, v] : j.items()) {
        const std::string key = "bounds." + k;
        if (k == "C_pde") b.c_pde = field<double>(v, key);
        else if (k == "C_quad_Y") b.c_quad_y = field<double>(v, key);
        else if (k == "C_quad_X") b.c_quad_x = field<double>(v, key);
        else if (k == "alpha") b.alpha = field<double>(v, key);
        else if (k == "beta") b.beta = field<double>(v, key);
        else if (k == "omega_u") b.omega_u = field<double>(v, key);
        else if (k == "mu_hat") b.mu_hat = field<double>(v, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    c.bounds = b;
}

void apply_json(Config& c, const json& j) {
    for (const auto& [k, v] : j.items()) {
        if (k == "problem") continue; // applied first
        if (k == "mode") c.mode = mode_of(field<std::string>(v, k));
        else if (k == "size" || k == "ranks") c.ranks = field<std::size_t>(v, k);
        else if (k == "N_f") c.train.counts.n_f = field<std::size_t>(v, k);
        else if (k == "N_g") c.train.counts.n_g = field<std::size_t>(v, k);
        else if (k == "N_h") c.train.counts.n_h = field<std::size_t>(v, k);
        else if (k == "M") c.train.counts.m = field<std::size_t>(v, k);
        else if (k == "seed") c.train.seed = field<std::uint64_t>(v, k);
        else if (k == "seeds") c.seeds = field<std::size_t>(v, k);
        else if (k == "iterations") c.train.iterations = field<std::size_t>(v, k);
        else if (k == "lr") c.train.lr = field<double>(v, k);
        else if (k == "width") c.train.width = field<int>(v, k);
        else if (k == "depth") c.train.depth = field<int>(v, k);
        else if (k == "activation") c.train.activation = parse_activation(field<std::string>(v, k));
        else if (k == "cadence") c.train.cadence = field<std::size_t>(v, k);
        else if (k == "lambda_init") c.train.lambda_init = field<double>(v, k);
        else if (k == "min_eval_points") c.train.min_eval_points = field<std::size_t>(v, k);
        else if (k == "N_list") c.n_list = size_list(v, k);
        else if (k == "sizes") c.sizes = size_list(v, k);
        else if (k == "out_dir") c.out_dir = field<std::string>(v, k);
        else if (k == "gap_threshold") c.thresholds.gap = field<double>(v, k);
        else if (k == "error_threshold") c.thresholds.error = field<double>(v, k);
        else if (k == "regime_factor") c.thresholds.factor = field<double>(v, k);
        else if (k == "n_x") c.n_x = field<std::size_t>(v, k);
        else if (k == "n_t") c.n_t = field<std::size_t>(v, k);
        else if (k == "dt") c.dt = field<double>(v, k);
        else if (k == "bounds") apply_bounds(c, v);
        else throw ConfigError("unknown config key '" + k + "'");
    }
}

void apply_flags(Config& c, const Flags& f) {
    if (f.mode) c.mode = mode_of(*f.mode);
    if (f.ranks) c.ranks = *f.ranks;
    if (f.nf) c.train.counts.n_f = *f.nf;
    if (f.ng) c.train.counts.n_g = *f.ng;
    if (f.nh) c.train.counts.n_h = *f.nh;
    if (f.m) c.train.counts.m = *f.m;
    if (f.seed) c.train.seed = *f.seed;
    if (f.seeds) c.seeds = *f.seeds;
    if (f.iterations) c.train.iterations = *f.iterations;
    if (f.lr) c.train.lr = *f.lr;
    if (f.width) c.train.width = *f.width;
    if (f.depth) c.train.depth = *f.depth;
    if (f.activation) c.train.activation = parse_activation(*f.activation);
    if (f.cadence) c.train.cadence = *f.cadence;
    if (f.lambda_init) c.train.lambda_init = *f.lambda_init;
    if (f.min_eval_points) c.train.min_eval_points = *f.min_eval_points;
    if (!f.n_list.empty()) c.n_list = f.n_list;
    if (!f.sizes.empty()) c.sizes = f.sizes;
    if (f.out_dir) c.out_dir = *f.out_dir;
    if (f.gap_threshold) c.thresholds.gap = *f.gap_threshold;
    if (f.error_threshold) c.thresholds.error = *f.error_threshold;
    if (f.regime_factor) c.thresholds.factor = *f.regime_factor;
    if (f.n_x) c.n_x = *f.n_x;
    if (f.n_t) c.n_t = *f.n_t;
    if (f.dt) c.dt = *f.dt;
    if (f.save) c.save = *f.save;
    if (f.input) c.input = *f.input;
    if (f.grid) c.grid = *f.grid;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

std::vector<std::size_t> default_sizes(std::size_t ranks) {
    std::vector<std::size_t> out;
    for (std::size_t s = 1; s < ranks; s *= 2) out.push_back(s);
    out.push_back(ranks);
    return out;
}

} // namespace

Config default_config(ProblemKind problem) {
    Config c;
    c.train.problem = problem;
    c.train.lr = 1e-4;
    c.train.depth = 4;
    c.train.activation = Activation::Tanh;
    if (problem == ProblemKind::Schrodinger1d) {
        c.train.width = 100;
        c.train.iterations = 30000;
        c.train.counts = default_counts(problem, 2000);
        c.n_list = {250, 500, 1000, 2000, 4000};
    } else {
        c.train.width = 50;
        c.train.iterations = 20000;
        c.train.counts = default_counts(problem, 512);
        c.n_list = {8, 16, 32, 64, 100, 200, 400, 512, 4096};
    }
    c.train.lambda_init = 0.0;
    return c;
}

Config parse_config(const std::vector<std::string>& args) {
    CLI::App app{"Physics-informed neural network trainer", "pinn"};
    app.require_subcommand(1, 1);
    Flags f;

    auto* train = app.add_subcommand("train", "Train one model and print its final error");
    add_training(train, f);
    train->add_option("--save", f.save, "Write the trained parameters to this file");

    auto* sweep = app.add_subcommand("sweep", "h-analysis: train over a list of N_f and seeds");
    add_training(sweep, f);
    sweep->add_option("--n-list", f.n_list, "Interior point counts")->delimiter(',');
    sweep->add_option("--seeds", f.seeds, "Seeds per N_f");

    auto* scale = app.add_subcommand("scale", "Weak or strong scaling study");
    add_training(scale, f);
    scale->add_option("--sizes", f.sizes, "Rank counts")->delimiter(',');
    scale->add_option("--seeds", f.seeds, "Seeds per size");

    auto* report = app.add_subcommand("report", "Summarize sweep.csv and draw SVG plots");
    add_common(report, f);
    add_thresholds(report, f);
    report->add_option("--input,--sweep", f.input, "sweep.csv to read (default <out-dir>/sweep.csv)");

    auto* oracle = app.add_subcommand("oracle", "Write the Schrodinger reference grid");
    add_common(oracle, f);
    oracle->add_option("--n-x", f.n_x, "Grid points in x (power of two)");
    oracle->add_option("--n-t", f.n_t, "Time samples");
    oracle->add_option("--dt", f.dt, "Largest integrator step");
    oracle->add_option("--output", f.grid, "Grid file (default <out-dir>/schrodinger_reference.bin)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        throw HelpRequest{sub->help()};
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    const std::string command = app.get_subcommands().front()->get_name();

    json file = json::object();
    if (f.config) file = load_json(*f.config);

    std::string problem = "laplace";
    if (file.contains("problem")) problem = field<std::string>(file["problem"], "problem");
    if (f.problem) problem = *f.problem;

    Config c = default_config(problem_of(problem));
    c.command = command;
    if (command == "scale") c.mode = ScaleMode::Weak;
    apply_json(c, file);
    apply_flags(c, f);
    if (command == "train" && c.ranks > 1 && c.mode == ScaleMode::Serial) c.mode = ScaleMode::Weak;
    if (command == "scale" && c.sizes.empty()) c.sizes = default_sizes(c.ranks);

    if (c.out_dir.empty()) {
        const char* env = std::getenv("PINN_OUT_DIR");
        c.out_dir = env && *env ? fs::path(env) : fs::path("pinn_out");
    }
    if (c.command == "report" && c.input.empty()) c.input = c.out_dir / "sweep.csv";
    if (c.command == "oracle" && c.grid.empty()) c.grid = c.out_dir / "schrodinger_reference.bin";
    validate(c);
    return c;
}

void validate(const Config& c) {
    const TrainConfig& t = c.train;
    const SetCounts& n = t.counts;
    require(std::isfinite(t.lr) && t.lr > 0.0, "lr must be a positive number");
    require(t.width >= 1, "width must be at least 1");
    require(t.depth >= 1, "depth must be at least 1 hidden layer");
    require(t.iterations >= 1, "iterations must be at least 1");
    require(t.cadence >= 1, "cadence must be at least 1");
    require(n.n_f >= 1, "N_f must be at least 1");
    switch (t.problem) {
    case ProblemKind::Laplace1d:
        require(n.n_g == 2, "laplace uses N_g = 2 (the endpoints -1 and 7)");
        require(n.n_h == 0, "laplace has no initial condition; N_h must be 0");
        require(n.m == 0, "laplace has no observations; M must be 0 (use laplace-inverse)");
        break;
    case ProblemKind::Laplace1dInverse:
        require(n.n_g == 2, "laplace-inverse uses N_g = 2 (the endpoints -1 and 7)");
        require(n.n_h == 0, "laplace-inverse has no initial condition; N_h must be 0");
        require(n.m >= 1, "laplace-inverse needs M >= 1 observations");
        require(std::isfinite(t.lambda_init), "lambda_init must be finite");
        break;
    case ProblemKind::Schrodinger1d:
        require(n.n_g >= 1 && n.n_h >= 1, "schrodinger needs N_g >= 1 and N_h >= 1");
        require(n.m == 0, "schrodinger has no observations; M must be 0");
        break;
    }
    require(c.ranks >= 1, "ranks must be at least 1");
    require(c.seeds >= 1, "seeds must be at least 1");
    require(c.thresholds.gap > 0.0 && c.thresholds.error > 0.0 && c.thresholds.factor > 0.0,
            "regime thresholds must be positive");
    if (c.command == "train" && c.mode == ScaleMode::Serial) {
        require(c.ranks == 1, "serial mode runs on one rank; use --mode weak or strong");
    }
    auto check_strong = [&](std::size_t size) {
        require(n.n_f % size == 0 && n.m % size == 0,
                "strong mode needs N_f and M divisible by the rank count " + std::to_string(size));
    };
    if (c.command == "train" && c.mode == ScaleMode::Strong) check_strong(c.ranks);
    if (c.command == "sweep") {
        require(!c.n_list.empty(), "N_list must not be empty");
        for (std::size_t v : c.n_list) require(v >= 1, "every N_list entry must be at least 1");
    }
    if (c.command == "scale") {
        require(c.mode != ScaleMode::Serial, "scale needs --mode weak or strong");
        require(!c.sizes.empty(), "sizes must not be empty");
        for (std::size_t s : c.sizes) {
            require(s >= 1, "every size must be at least 1");
            if (c.mode == ScaleMode::Strong) check_strong(s);
        }
    }
    if (c.command == "oracle") {
        require(c.n_x >= 2 && (c.n_x & (c.n_x - 1)) == 0, "n_x must be a power of two");
        require(c.n_t >= 2, "n_t must be at least 2");
        require(c.dt > 0.0 && c.dt <= 1e-3, "dt must lie in (0, 1e-3]");
    }
    if (c.bounds) {
        const BoundInputs& b = *c.bounds;
        require(b.c_pde >= 0 && b.c_quad_y >= 0 && b.c_quad_x >= 0 && b.omega_u >= 0 && b.mu_hat >= 0,
                "bound constants must be non-negative");
        require(b.alpha > 0 && b.beta > 0, "bound rates alpha and beta must be positive");
    }
}

namespace {

void check_writable(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path probe = dir / ".pinn_write_probe";
    std::ofstream os(probe);
    if (ec || !os) {
        throw ConfigError("output directory '" + dir.string() +
                          "' is not writable; pass --out-dir or set PINN_OUT_DIR");
    }
    os.close();
    fs::remove(probe, ec);
}

void write_rank_logs(const std::vector<RunRecord>& records, const fs::path& dir,
                     const std::string& id) {
    for (const auto& r : records) {
        const fs::path path = dir / ("rank" + std::to_string(r.rank) + "_" + id + ".log");
        std::ofstream os(path);
        if (!os) throw std::runtime_error(path.string() + ": cannot open for writing");
        os.precision(10);
        os << "rank " << r.rank << " of " << r.size << " (" << to_string(r.mode) << ")\n";
        os << "time_total_s " << r.time_total_s << "\nt500_mean " << r.t500_mean << "\nt500_std "
           << r.t500_std << "\n";
        os << "windows";
        for (double w : r.windows) os << ' ' << w;
        os << "\n";
        for (const auto& h : r.history) {
            os << "iter " << h.iter << " loss_train " << h.loss_train << " loss_test "
               << h.loss_test << " error " << h.error << "\n";
        }
    }
}

std::ostream& print_run(std::ostream& out, const RunRecord& r) {
    out << to_string(r.config.problem) << ' ' << to_string(r.mode) << " size=" << r.size
        << " N_f=" << r.counts.n_f << " seed=" << r.config.seed;
    if (r.failed) {
        return out << " FAILED: " << r.failure << '\n';
    }
    out << " error=" << r.error << " gap_rel=" << r.gap_rel << " time=" << r.time_total_s << "s";
    if (r.lambda) out << " lambda=" << *r.lambda;
    return out << '\n';
}

int cmd_train(const Config& c, std::ostream& out) {
    const ProblemSpec spec = problem_for(c.train);
    std::vector<RunRecord> records;
    if (c.mode == ScaleMode::Serial) {
        records.push_back(train_serial(c.train, spec));
    } else {
        records = train_distributed(c.train, spec, c.mode, c.ranks);
    }
    const RunRecord& r = records.front();
    const PersistedRun saved = persist_run(r, c.out_dir);
    if (records.size() > 1) write_rank_logs(records, c.out_dir, saved.id);
    if (!c.save.empty()) save_params(r.params, c.save);

    out.precision(6);
    print_run(out, r);
    out << "error " << std::scientific << r.error << std::defaultfloat << '\n';
    if (r.lambda) out << "lambda " << *r.lambda << '\n';
    if (c.bounds) {
        const TrainingSet set = build_training_set(spec, r.counts, c.train.seed);
        const LossReport rep = assemble_loss(r.params, spec, set, c.train.omega, c.train.activation);
        BoundInputs b = *c.bounds;
        b.n_hat = static_cast<double>(set.collocation_count());
        b.m = static_cast<double>(set.observation_count());
        out << "generalization_bound " << generalization_bound(b, rep.eps_train_pde, rep.eps_train_obs)
            << '\n';
    }
    out << "wrote " << saved.config.string() << '\n';
    return 0;
}

int cmd_sweep(const Config& c, std::ostream& out) {
    out.precision(4);
    auto records = run_h_sweep(c.train, c.n_list, c.seeds, c.thresholds,
                               [&](const RunRecord& r) { print_run(out, r) << std::flush; });
    std::vector<SweepRow> rows;
    for (const auto& r : records) {
        persist_run(r, c.out_dir);
        rows.push_back(to_sweep_row(r));
    }
    out << '\n' << format_summary(summarize(rows, c.thresholds));
    out << "wrote " << (c.out_dir / "sweep.csv").string() << '\n';
    return std::any_of(records.begin(), records.end(), [](auto& r) { return r.failed; }) ? 2 : 0;
}

int cmd_scale(const Config& c, std::ostream& out) {
    out.precision(4);
    const ScalingStudy study = run_scaling(c.train, c.mode, c.sizes, c.seeds,
                                           [&](const RunRecord& r) { print_run(out, r) << std::flush; });
    for (const auto& r : study.runs) persist_run(r, c.out_dir);
    for (const auto& r : study.baselines) persist_run(r, c.out_dir);
    const fs::path path = c.out_dir / "scaling.csv";
    std::ofstream os(path);
    if (!os) throw std::runtime_error(path.string() + ": cannot open for writing");
    os.precision(10);
    os << "mode,size,seed,t500_mean,efficiency,speedup,pointsec,error,baseline_error\n";
    out << "\nmode    size  seed      t500_s    E_ff    S_up    pointsec   error     baseline\n";
    for (const auto& row : study.rows) {
        os << to_string(row.mode) << ',' << row.size << ',' << row.seed << ',' << row.t500_mean << ','
           << row.efficiency << ',' << row.speedup << ',' << row.pointsec << ',' << row.error << ','
           << row.baseline_error << '\n';
        out << std::left << std::setw(8) << to_string(row.mode) << std::right << std::setw(4)
            << row.size << std::setw(6) << row.seed << std::setw(12) << row.t500_mean
            << std::setw(8) << row.efficiency << std::setw(8) << row.speedup << std::setw(12)
            << row.pointsec << std::setw(10) << row.error << std::setw(10) << row.baseline_error
            << '\n';
    }
    out << "wrote " << path.string() << '\n';
    return 0;
}

int cmd_report(const Config& c, std::ostream& out, std::ostream& err) {
    if (!fs::exists(c.input)) {
        throw ConfigError("sweep file '" + c.input.string() + "' does not exist; run sweep first or pass --input");
    }
    const auto rows = read_sweep_csv(c.input);
    if (rows.empty()) {
        err << "error: sweep file '" << c.input.string() << "' has no rows; nothing to report\n";
        return 1;
    }
    const auto summary = summarize(rows, c.thresholds);
    out << format_summary(summary);

    std::set<std::string> problems;
    for (const auto& s : summary) problems.insert(s.problem);
    for (const auto& p : problems) {
        std::vector<Regime> labels;
        std::vector<std::size_t> ns;
        for (const auto& s : summary) {
            if (s.problem != p || s.mode != "serial") continue;
            try {
                labels.push_back(parse_regime(s.regime));
                ns.push_back(s.n_f);
            } catch (const std::invalid_argument&) {
            }
        }
        for (std::size_t i : regime_violations(labels)) {
            out << "warning: " << p << " regime regresses to " << to_string(labels[i])
                << " at N_f=" << ns[i] << '\n';
        }
    }
    const ReportFiles files = write_report(rows, c.out_dir, c.thresholds);
    out << "wrote " << files.summary.string() << '\n';
    for (const auto& plot : files.plots) out << "wrote " << plot.string() << '\n';
    return 0;
}

int cmd_oracle(const Config& c, std::ostream& out) {
    const ReferenceGrid grid = schrodinger_reference(c.n_x, c.n_t, c.dt);
    grid.save(c.grid);
    double peak0 = 0.0, peak = 0.0, t_peak = 0.0;
    for (std::size_t j = 0; j < grid.n_t(); ++j) {
        for (std::size_t i = 0; i < grid.n_x(); ++i) {
            const double a = std::abs(grid.value(j, i));
            if (j == 0) peak0 = std::max(peak0, a);
            if (a > peak) {
                peak = a;
                t_peak = grid.t(j);
            }
        }
    }
    out << "reference grid " << grid.n_x() << " x " << grid.n_t() << ", peak |u| " << peak
        << " at t=" << t_peak << " (initial " << peak0 << ")\n";
    out << "wrote " << c.grid.string() << '\n';
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Config c;
    try {
        c = parse_config(args);
    } catch (const HelpRequest& h) {
        out << h.text;
        return 0;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    try {
        if (c.command == "report") {
            check_writable(c.out_dir);
            return cmd_report(c, out, err);
        }
        if (c.command == "oracle") {
            check_writable(c.grid.has_parent_path() ? c.grid.parent_path() : fs::path("."));
            return cmd_oracle(c, out);
        }
        check_writable(c.out_dir);
        if (c.command == "train") return cmd_train(c, out);
        if (c.command == "sweep") return cmd_sweep(c, out);
        if (c.command == "scale") return cmd_scale(c, out);
        err << "error: unknown command '" << c.command << "'\n";
        return 1;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace pinn
