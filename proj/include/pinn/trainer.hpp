#pragma once

#include "pinn/communicator.hpp"
#include "pinn/metrics.hpp"
#include "pinn/model.hpp"
#include "pinn/optim.hpp"
#include "pinn/problems.hpp"
#include "pinn/sampling.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pinn {

enum class ScaleMode { Serial, Weak, Strong };
std::string_view to_string(ScaleMode mode);
ScaleMode parse_scale_mode(std::string_view name);

struct TrainConfig {
    ProblemKind problem = ProblemKind::Laplace1d;
    double lr = 1e-4;
    int width = 50;
    int depth = 4; // hidden layers
    std::size_t iterations = 20000;
    Activation activation = Activation::Tanh;
    // Global counts. In weak mode n_f and m are per rank.
    SetCounts counts = default_counts(ProblemKind::Laplace1d, 512);
    std::uint64_t seed = 1234;
    std::size_t cadence = 100;
    ComponentWeights omega = kUnitWeights;
    double lambda_init = 0.0;
    // The error is measured on the interior points of the test set, enlarged
    // to min_eval_points when that is larger than N_f.
    std::size_t min_eval_points = 0;
    std::size_t window = 500;       // iterations per timing window
    std::size_t warmup_windows = 3; // discarded windows
    double divergence_tolerance = 1e-6;

    std::vector<int> dims() const;
};

struct HistoryPoint {
    std::size_t iter = 0;
    double loss_train = 0.0;
    double loss_test = 0.0;
    double error = 0.0;
    double lambda = 0.0; // trainable material parameter, 0 when absent
};

struct RunRecord {
    TrainConfig config;
    ScaleMode mode = ScaleMode::Serial;
    std::size_t size = 1;
    std::size_t rank = 0;
    SetCounts counts; // global training-set sizes
    double error = 0.0;      // relative L2 error after the last iteration
    double best_error = 0.0; // smallest recorded error
    std::size_t best_iter = 0;
    double loss_train = 0.0; // at best_iter
    double loss_test = 0.0;  // at best_iter
    double gap_rel = 0.0;    // at best_iter
    double time_total_s = 0.0;
    double t500_mean = 0.0;
    double t500_std = 0.0;
    double pointsec = 0.0;
    std::optional<double> lambda;
    std::string regime;
    bool failed = false;
    std::string failure;
    std::vector<HistoryPoint> history;
    std::vector<double> windows; // seconds per timing window
    MlpParams params;
};

// Everything one rank needs to evaluate its share of the objective.
struct RankData {
    ProblemSpec spec;
    TrainingSet train;
    TrainingSet test;
    Matrix eval_points;
    Matrix eval_exact;
};

struct LossAndGradient {
    LossReport report;
    std::vector<double> gradient; // flat layout of MlpParams
};

LossAndGradient loss_and_gradient(const MlpParams& params, const ProblemSpec& spec,
                                  const TrainingSet& set, const ComponentWeights& omega,
                                  Activation activation);

Matrix predict(const MlpParams& params, const Matrix& x, Activation activation);

// Squared error and squared reference norms, summed over the rows.
struct ErrorParts {
    double diff2 = 0.0;
    double ref2 = 0.0;
};
ErrorParts error_parts(const MlpParams& params, const Matrix& points, const Matrix& exact,
                       Activation activation);

// Points where the relative L2 error is measured.
Matrix evaluation_points(const ProblemSpec& spec, const TrainConfig& config, std::size_t n_f);

// Problem with the Schrodinger reference grid attached when needed.
ProblemSpec problem_for(const TrainConfig& config);

MlpParams initial_params(const TrainConfig& config);

// Training loop of one rank. With a solo communicator this is the serial
// trainer; with a ring it is one replica of the data-parallel trainer.
RunRecord train_rank(const TrainConfig& config, RankData data, Communicator& comm,
                     ScaleMode mode, const SetCounts& global_counts);

RunRecord train_serial(const TrainConfig& config);
RunRecord train_serial(const TrainConfig& config, const ProblemSpec& spec);

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raises the glibc mmap and trim thresholds once per process.
void tune_allocator();

} // namespace pinn
