#include "pinn/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace pinn {

namespace fs = std::filesystem;

namespace {

RunRecord failed_record(const TrainConfig& config, const std::string& what) {
    RunRecord r;
    r.config = config;
    r.counts = config.counts;
    r.failed = true;
    r.failure = what;
    r.error = r.best_error = std::numeric_limits<double>::quiet_NaN();
    r.loss_train = r.loss_test = r.gap_rel = std::numeric_limits<double>::quiet_NaN();
    r.regime = "failed";
    return r;
}

std::string problem_name(const RunRecord& r) { return std::string(to_string(r.config.problem)); }

} // namespace

std::vector<RunRecord> run_h_sweep(const TrainConfig& base, const std::vector<std::size_t>& n_list,
                                   std::size_t seeds, const RegimeThresholds& thresholds,
                                   const Progress& progress) {
    if (n_list.empty()) throw std::invalid_argument("h-sweep needs at least one N_f");
    if (seeds == 0) throw std::invalid_argument("h-sweep needs at least one seed");
    const ProblemSpec spec = problem_for(base);
    std::vector<RunRecord> records;
    for (std::size_t n : n_list) {
        for (std::size_t i = 0; i < seeds; ++i) {
            TrainConfig cfg = base;
            cfg.counts.n_f = n;
            cfg.seed = base.seed + i;
            try {
                records.push_back(train_serial(cfg, spec));
            } catch (const std::exception& e) {
                records.push_back(failed_record(cfg, e.what()));
            }
            if (progress) progress(records.back());
        }
    }
    label_regimes(records, thresholds);
    return records;
}

void label_regimes(std::vector<RunRecord>& records, const RegimeThresholds& thresholds) {
    std::map<std::size_t, SweepPoint> by_n;
    for (const auto& r : records) {
        if (r.failed) continue;
        auto& p = by_n[r.counts.n_f];
        p.n = static_cast<double>(r.counts.n_f);
        p.errors.push_back(r.error);
        p.gaps.push_back(r.gap_rel);
    }
    std::vector<SweepPoint> points;
    for (auto& [n, p] : by_n) points.push_back(p);

    std::map<std::size_t, std::string> labels;
    const bool enough = !points.empty() && std::all_of(points.begin(), points.end(), [](const auto& p) {
        return p.errors.size() >= 2;
    });
    if (enough) {
        const auto regimes = classify_regime(points, thresholds);
        for (std::size_t i = 0; i < points.size(); ++i) {
            labels[static_cast<std::size_t>(points[i].n)] = std::string(to_string(regimes[i]));
        }
    }
    for (auto& r : records) {
        if (r.failed) continue;
        r.regime = enough ? labels[r.counts.n_f] : "n/a";
    }
}

ScalingStudy run_scaling(const TrainConfig& base, ScaleMode mode, const std::vector<std::size_t>& sizes,
                         std::size_t seeds, const Progress& progress) {
    if (mode == ScaleMode::Serial) throw std::invalid_argument("scaling needs weak or strong mode");
    if (sizes.empty() || seeds == 0) throw std::invalid_argument("scaling needs sizes and seeds");
    std::vector<std::size_t> all = sizes;
    if (std::find(all.begin(), all.end(), 1) == all.end()) all.push_back(1);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    for (std::size_t s : all) {
        if (s == 0) throw std::invalid_argument("scaling sizes must be positive");
    }
    const ProblemSpec spec = problem_for(base);

    ScalingStudy study;
    for (std::size_t i = 0; i < seeds; ++i) {
        TrainConfig cfg = base;
        cfg.seed = base.seed + i;
        std::map<std::size_t, RunRecord> runs;
        for (std::size_t size : all) {
            runs[size] = train_distributed(cfg, spec, mode, size).front();
            if (progress) progress(runs[size]);
        }

        std::map<std::size_t, RunRecord> baselines;
        for (std::size_t size : all) {
            if (size == 1) {
                RunRecord b = runs[1];
                b.mode = ScaleMode::Serial;
                baselines[1] = b;
                continue;
            }
            if (mode == ScaleMode::Strong) {
                baselines[size] = baselines[1];
                continue;
            }
            TrainConfig serial = cfg;
            serial.counts = global_counts(cfg.counts, mode, size);
            baselines[size] = train_serial(serial, spec);
            if (progress) progress(baselines[size]);
        }

        const auto timing = [](const RunRecord& r) {
            return r.t500_mean > 0.0 ? r.t500_mean : r.time_total_s;
        };
        const double t1 = timing(runs[1]);
        for (std::size_t size : all) {
            const RunRecord& run = runs[size];
            ScalingRow row;
            row.mode = mode;
            row.size = size;
            row.seed = cfg.seed;
            row.t500_mean = run.t500_mean;
            const Scaling sc = efficiency_speedup(t1, timing(run), size);
            row.efficiency = sc.efficiency;
            row.speedup = sc.speedup;
            row.pointsec = run.pointsec;
            row.error = run.error;
            row.baseline_error = baselines[size].error;
            study.rows.push_back(row);
            study.runs.push_back(run);
            if (size == 1 || mode == ScaleMode::Weak) study.baselines.push_back(baselines[size]);
        }
    }
    return study;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("slope fit needs at least two (x, y) pairs");
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("log-log fit needs positive data");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw std::invalid_argument("slope fit needs at least two distinct x values");
    return sxy / sxx;
}

McRate mc_rate_study(const std::function<double(double)>& g, double lo, double hi, double exact,
                     const std::vector<std::size_t>& n_list, std::size_t repeats, Sampler sampler,
                     std::uint64_t seed) {
    std::vector<std::size_t> distinct = n_list;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2 || distinct.front() == 0) {
        throw std::invalid_argument("rate study needs at least two distinct positive sample sizes");
    }
    if (repeats == 0) throw std::invalid_argument("rate study needs at least one repeat");
    if (!(hi > lo)) throw std::invalid_argument("rate study needs a non-degenerate interval");

    const Box box{{lo}, {hi}};
    McRate out;
    for (std::size_t n : n_list) {
        double ss = 0.0;
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            const std::uint64_t s = seed + 7919 * rep + 1000003 * n;
            const Matrix x = sampler == Sampler::Lhs ? lhs(n, box, s, streams::kMonteCarlo)
                                                     : uniform_points(n, box, s);
            double sum = 0.0;
            for (Eigen::Index i = 0; i < x.rows(); ++i) sum += g(x(i, 0));
            const double estimate = (hi - lo) * sum / static_cast<double>(n);
            ss += (estimate - exact) * (estimate - exact);
        }
        out.n.push_back(static_cast<double>(n));
        out.rms_error.push_back(std::sqrt(ss / static_cast<double>(repeats)));
    }
    const double tiny = 1e-12 * std::max(1.0, std::abs(exact));
    out.exact = std::all_of(out.rms_error.begin(), out.rms_error.end(),
                            [&](double e) { return e <= tiny; });
    out.slope = out.exact ? std::numeric_limits<double>::quiet_NaN()
                          : loglog_slope(out.n, out.rms_error);
    return out;
}

GapRate train_test_gap_study(const MlpParams& params, const ProblemSpec& spec,
                             const std::vector<std::size_t>& n_list, std::size_t repeats,
                             std::uint64_t seed) {
    if (repeats == 0) throw std::invalid_argument("gap study needs at least one repeat");
    const ComponentWeights interior_only = {1.0, 0.0, 0.0, 0.0};
    auto interior_eps = [&](std::size_t n, std::uint64_t s) {
        TrainingSet set;
        auto& f = set[Component::F];
        f.points = uniform_points(n, spec.domain, s);
        f.weights = Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
        return assemble_loss(params, spec, set, interior_only).eps_train_pde;
    };
    GapRate out;
    for (std::size_t n : n_list) {
        double sum = 0.0;
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            const std::uint64_t s = seed + 1000003 * n + 2 * rep;
            sum += std::abs(interior_eps(n, s) - interior_eps(n, s + 1));
        }
        out.n.push_back(static_cast<double>(n));
        out.mean_gap.push_back(sum / static_cast<double>(repeats));
    }
    out.slope = loglog_slope(out.n, out.mean_gap);
    return out;
}

SweepRow to_sweep_row(const RunRecord& r) {
    SweepRow row;
    row.problem = problem_name(r);
    row.mode = std::string(to_string(r.mode));
    row.size = r.size;
    row.n_f = r.counts.n_f;
    row.n_g = r.counts.n_g;
    row.n_h = r.counts.n_h;
    row.m = r.counts.m;
    row.seed = r.config.seed;
    row.iterations = r.config.iterations;
    row.lr = r.config.lr;
    row.width = r.config.width;
    row.depth = r.config.depth;
    row.error = r.error;
    row.best_iter = r.best_iter;
    row.loss_train = r.loss_train;
    row.loss_test = r.loss_test;
    row.gap_rel = r.gap_rel;
    row.time_total_s = r.time_total_s;
    row.t500_mean = r.t500_mean;
    row.t500_std = r.t500_std;
    row.pointsec = r.pointsec;
    row.regime = r.regime.empty() ? "n/a" : r.regime;
    return row;
}

std::string format_sweep_row(const SweepRow& r) {
    std::ostringstream os;
    os.precision(17);
    os << r.problem << ',' << r.mode << ',' << r.size << ',' << r.n_f << ',' << r.n_g << ','
       << r.n_h << ',' << r.m << ',' << r.seed << ',' << r.iterations << ',' << r.lr << ','
       << r.width << ',' << r.depth << ',' << r.error << ',' << r.best_iter << ','
       << r.loss_train << ',' << r.loss_test << ',' << r.gap_rel << ',' << r.time_total_s << ','
       << r.t500_mean << ',' << r.t500_std << ',' << r.pointsec << ',' << r.regime;
    return os.str();
}

SweepRow parse_sweep_row(const std::string& line) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 22) {
        throw std::runtime_error("sweep row has " + std::to_string(f.size()) + " fields, expected 22");
    }
    const auto u = [](const std::string& s) { return static_cast<std::size_t>(std::stoull(s)); };
    const auto d = [](const std::string& s) { return std::stod(s); };
    SweepRow r;
    r.problem = f[0];
    r.mode = f[1];
    r.size = u(f[2]);
    r.n_f = u(f[3]);
    r.n_g = u(f[4]);
    r.n_h = u(f[5]);
    r.m = u(f[6]);
    r.seed = std::stoull(f[7]);
    r.iterations = u(f[8]);
    r.lr = d(f[9]);
    r.width = std::stoi(f[10]);
    r.depth = std::stoi(f[11]);
    r.error = d(f[12]);
    r.best_iter = u(f[13]);
    r.loss_train = d(f[14]);
    r.loss_test = d(f[15]);
    r.gap_rel = d(f[16]);
    r.time_total_s = d(f[17]);
    r.t500_mean = d(f[18]);
    r.t500_std = d(f[19]);
    r.pointsec = d(f[20]);
    r.regime = f[21];
    return r;
}

std::vector<SweepRow> read_sweep_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error(path.string() + ": cannot open sweep file");
    std::string line;
    std::vector<SweepRow> rows;
    if (!std::getline(is, line)) return rows;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSweepHeader) throw std::runtime_error(path.string() + ": unexpected header");
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            rows.push_back(parse_sweep_row(line));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

PersistedRun persist_run(const RunRecord& r, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error(out_dir.string() + ": cannot create directory: " + ec.message());

    const std::string stem = problem_name(r) + "_" + std::string(to_string(r.mode)) + "_s" +
                             std::to_string(r.size) + "_nf" + std::to_string(r.counts.n_f) +
                             "_seed" + std::to_string(r.config.seed);
    PersistedRun out;
    for (std::size_t k = 0;; ++k) {
        out.id = k == 0 ? stem : stem + "_" + std::to_string(k);
        out.config = out_dir / ("run_" + out.id + ".json");
        if (!fs::exists(out.config)) break;
    }
    out.losses = out_dir / ("losses_" + out.id + ".csv");

    const fs::path sweep = out_dir / "sweep.csv";
    const bool fresh = !fs::exists(sweep) || fs::file_size(sweep) == 0;
    {
        std::ofstream os(sweep, std::ios::app);
        if (!os) throw std::runtime_error(sweep.string() + ": cannot open for appending");
        if (fresh) os << kSweepHeader << '\n';
        os << format_sweep_row(to_sweep_row(r)) << '\n';
        if (!os) throw std::runtime_error(sweep.string() + ": write failed");
    }
    {
        std::ofstream os(out.losses);
        if (!os) throw std::runtime_error(out.losses.string() + ": cannot open for writing");
        os.precision(17);
        os << "iter,loss_train,loss_test,error,lambda\n";
        for (const auto& h : r.history) {
            os << h.iter << ',' << h.loss_train << ',' << h.loss_test << ',' << h.error << ','
               << h.lambda << '\n';
        }
        if (!os) throw std::runtime_error(out.losses.string() + ": write failed");
    }
    {
        const TrainConfig& c = r.config;
        nlohmann::json j;
        j["id"] = out.id;
        j["problem"] = problem_name(r);
        j["mode"] = std::string(to_string(r.mode));
        j["size"] = r.size;
        j["N_f"] = r.counts.n_f;
        j["N_g"] = r.counts.n_g;
        j["N_h"] = r.counts.n_h;
        j["M"] = r.counts.m;
        j["seed"] = c.seed;
        j["iterations"] = c.iterations;
        j["lr"] = c.lr;
        j["width"] = c.width;
        j["depth"] = c.depth;
        j["activation"] = c.activation == Activation::Tanh ? "tanh" : "identity";
        j["cadence"] = c.cadence;
        j["omega"] = c.omega;
        j["lambda_init"] = c.lambda_init;
        j["error"] = r.failed ? nlohmann::json(nullptr) : nlohmann::json(r.error);
        j["best_error"] = r.failed ? nlohmann::json(nullptr) : nlohmann::json(r.best_error);
        j["best_iter"] = r.best_iter;
        j["regime"] = r.regime;
        j["failed"] = r.failed;
        if (r.failed) j["failure"] = r.failure;
        if (r.lambda) j["lambda"] = *r.lambda;
        j["t500_windows"] = r.windows;
        std::ofstream os(out.config);
        if (!os) throw std::runtime_error(out.config.string() + ": cannot open for writing");
        os << j.dump(2) << '\n';
        if (!os) throw std::runtime_error(out.config.string() + ": write failed");
    }
    return out;
}

} // namespace pinn
