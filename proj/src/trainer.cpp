#include "pinn/trainer.hpp"

#include "pinn/schrodinger.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace pinn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::shared_ptr<const ReferenceGrid> shared_reference() {
    static std::once_flag once;
    static std::shared_ptr<const ReferenceGrid> grid;
    std::call_once(once, [] { grid = std::make_shared<ReferenceGrid>(schrodinger_reference()); });
    return grid;
}

void window_stats(const std::vector<double>& windows, std::size_t warmup, double& mean,
                  double& stddev) {
    mean = stddev = 0.0;
    if (windows.empty()) return;
    // Fall back to every window when the run is too short for a warm-up.
    const std::size_t skip = windows.size() > warmup ? warmup : 0;
    const auto first = windows.begin() + static_cast<std::ptrdiff_t>(skip);
    const double n = static_cast<double>(windows.end() - first);
    mean = std::accumulate(first, windows.end(), 0.0) / n;
    if (n < 2) return;
    double ss = 0.0;
    for (auto it = first; it != windows.end(); ++it) ss += (*it - mean) * (*it - mean);
    stddev = std::sqrt(ss / (n - 1));
}

} // namespace

std::string_view to_string(ScaleMode mode) {
    switch (mode) {
    case ScaleMode::Serial: return "serial";
    case ScaleMode::Weak: return "weak";
    case ScaleMode::Strong: return "strong";
    }
    return "?";
}

ScaleMode parse_scale_mode(std::string_view name) {
    if (name == "serial") return ScaleMode::Serial;
    if (name == "weak") return ScaleMode::Weak;
    if (name == "strong") return ScaleMode::Strong;
    throw std::invalid_argument("unknown mode '" + std::string(name) +
                                "' (expected serial, weak or strong)");
}

std::vector<int> TrainConfig::dims() const {
    const ProblemSpec spec = make_problem(problem);
    std::vector<int> d{spec.input_dim};
    for (int i = 0; i < depth; ++i) d.push_back(width);
    d.push_back(spec.output_dim);
    return d;
}

void tune_allocator() {
#ifdef __GLIBC__
    static std::once_flag once;
    std::call_once(once, [] {
        mallopt(M_MMAP_THRESHOLD, 32 << 20);
        mallopt(M_TRIM_THRESHOLD, 1 << 30);
    });
#endif
}

ProblemSpec problem_for(const TrainConfig& config) {
    if (config.problem == ProblemKind::Schrodinger1d) {
        return make_problem(config.problem, shared_reference());
    }
    return make_problem(config.problem);
}

MlpParams initial_params(const TrainConfig& config) {
    std::vector<std::pair<std::string, double>> extras;
    if (config.problem == ProblemKind::Laplace1dInverse) extras.emplace_back(kLambdaName, config.lambda_init);
    return glorot_init(config.dims(), extras, config.seed);
}

LossAndGradient loss_and_gradient(const MlpParams& params, const ProblemSpec& spec,
                                  const TrainingSet& set, const ComponentWeights& omega,
                                  Activation activation) {
    ad::Graph g;
    const ParamNodes nodes = register_params(g, params);
    const LossNodes loss = build_loss(g, nodes, spec, set, omega, activation);
    const auto vars = nodes.all();
    const auto grads = g.grad(loss.total, vars);
    return {loss_report(g, loss, omega), flatten_gradient(g, params, grads)};
}

Matrix predict(const MlpParams& params, const Matrix& x, Activation activation) {
    ad::Graph g;
    const ForwardResult r = forward(params, x, activation, g);
    return g.value(r.output);
}

ErrorParts error_parts(const MlpParams& params, const Matrix& points, const Matrix& exact,
                       Activation activation) {
    if (points.rows() == 0) return {};
    const Matrix pred = predict(params, points, activation);
    return {(pred - exact).squaredNorm(), exact.squaredNorm()};
}

Matrix evaluation_points(const ProblemSpec& spec, const TrainConfig& config, std::size_t n_f) {
    const std::size_t n = std::max(n_f, config.min_eval_points);
    return lhs(n, spec.domain, config.seed + kTestSeedOffset, streams::kInterior);
}

RunRecord train_rank(const TrainConfig& config, RankData data, Communicator& comm,
                     ScaleMode mode, const SetCounts& global_counts) {
    tune_allocator();
    try {
        if (config.iterations == 0) throw std::invalid_argument("iterations must be positive");
        if (config.cadence == 0) throw std::invalid_argument("cadence must be positive");
        const double size = static_cast<double>(comm.size());

        TrainConfig local = config;
        local.seed = worker_seed(config.seed, comm.rank());
        MlpParams params = initial_params(local);
        AdamState state(params.flat_size(), config.lr);

        std::vector<double> flat = params.flatten();
        const std::size_t n = flat.size();
        {
            std::vector<double> packed = flat;
            const auto adam = state.pack();
            packed.insert(packed.end(), adam.begin(), adam.end());
            comm.broadcast(packed);
            std::copy(packed.begin(), packed.begin() + static_cast<std::ptrdiff_t>(n), flat.begin());
            state.unpack(std::span<const double>(packed).subspan(n));
            params.unflatten(flat);
        }

        RunRecord rec;
        rec.config = config;
        rec.mode = mode;
        rec.size = comm.size();
        rec.rank = comm.rank();
        rec.counts = global_counts;

        const bool has_lambda = params.has_extra(kLambdaName);
        std::vector<double> buffer(n + 1);
        std::vector<double> guard(2 * n);

        auto record = [&](std::size_t iter, double train_loss) {
            const LossReport test = assemble_loss(params, data.spec, data.test, config.omega,
                                                  config.activation);
            const ErrorParts e =
                error_parts(params, data.eval_points, data.eval_exact, config.activation);
            std::vector<double> stats{test.total, e.diff2, e.ref2};
            comm.allreduce(stats);
            if (!(stats[2] > 0.0)) throw std::runtime_error("exact solution vanishes on the error set");
            HistoryPoint h;
            h.iter = iter;
            h.loss_train = train_loss;
            h.loss_test = stats[0] / size;
            h.error = std::sqrt(stats[1] / stats[2]);
            h.lambda = has_lambda ? params.extra(kLambdaName) : 0.0;
            rec.history.push_back(h);

            if (comm.size() > 1) {
                for (std::size_t i = 0; i < n; ++i) {
                    guard[i] = flat[i];
                    guard[n + i] = -flat[i];
                }
                comm.allreduce(guard, ReduceOp::Max);
                double spread = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    spread = std::max(spread, guard[i] + guard[n + i]);
                }
                if (spread > config.divergence_tolerance) {
                    throw DivergenceError("replicas diverged by " + std::to_string(spread) +
                                          " at iteration " + std::to_string(iter));
                }
            }
        };

        const auto start = Clock::now();
        auto window_start = Clock::now();
        double window_paused = 0.0;
        for (std::size_t it = 0; it < config.iterations; ++it) {
            LossAndGradient lg =
                loss_and_gradient(params, data.spec, data.train, config.omega, config.activation);
            std::copy(lg.gradient.begin(), lg.gradient.end(), buffer.begin());
            buffer[n] = lg.report.total;
            comm.allreduce(buffer);
            for (double& v : buffer) v /= size;

            if (it % config.cadence == 0) {
                const auto pause = Clock::now();
                record(it, buffer[n]);
                window_paused += seconds_since(pause);
            }

            adam_step(flat, std::span<const double>(buffer).first(n), state);
            params.unflatten(flat);

            if ((it + 1) % config.window == 0) {
                rec.windows.push_back(seconds_since(window_start) - window_paused);
                window_start = Clock::now();
                window_paused = 0.0;
            }
        }

        {
            const LossReport final_train = assemble_loss(params, data.spec, data.train, config.omega,
                                                         config.activation);
            std::vector<double> loss{final_train.total};
            comm.allreduce(loss);
            record(config.iterations, loss[0] / size);
        }
        rec.time_total_s = seconds_since(start);

        const auto best = std::min_element(
            rec.history.begin(), rec.history.end(),
            [](const HistoryPoint& a, const HistoryPoint& b) { return a.loss_train < b.loss_train; });
        rec.best_iter = best->iter;
        rec.loss_train = best->loss_train;
        rec.loss_test = best->loss_test;
        rec.gap_rel = relative_gap(best->loss_train, best->loss_test);
        rec.error = rec.history.back().error;
        rec.best_error = std::min_element(rec.history.begin(), rec.history.end(),
                                          [](const HistoryPoint& a, const HistoryPoint& b) {
                                              return a.error < b.error;
                                          })->error;
        if (has_lambda) rec.lambda = params.extra(kLambdaName);

        window_stats(rec.windows, config.warmup_windows, rec.t500_mean, rec.t500_std);
        if (rec.t500_mean > 0.0) {
            rec.pointsec = pointsec(static_cast<double>(config.window),
                                    static_cast<double>(global_counts.n_f), rec.t500_mean);
        } else if (rec.time_total_s > 0.0) {
            rec.pointsec = pointsec(static_cast<double>(config.iterations),
                                    static_cast<double>(global_counts.n_f), rec.time_total_s);
        }
        rec.params = std::move(params);
        return rec;
    } catch (...) {
        comm.abort();
        throw;
    }
}

RunRecord train_serial(const TrainConfig& config, const ProblemSpec& spec) {
    RankData data;
    data.spec = spec;
    data.train = build_training_set(spec, config.counts, config.seed);
    data.test = build_test_set(spec, config.counts, config.seed);
    data.eval_points = evaluation_points(spec, config, config.counts.n_f);
    data.eval_exact = spec.exact(data.eval_points);
    Communicator comm = Communicator::solo();
    return train_rank(config, std::move(data), comm, ScaleMode::Serial, config.counts);
}

RunRecord train_serial(const TrainConfig& config) { return train_serial(config, problem_for(config)); }

} // namespace pinn
