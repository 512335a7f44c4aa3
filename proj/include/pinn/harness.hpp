#pragma once

#include "pinn/metrics.hpp"
#include "pinn/parallel.hpp"
#include "pinn/trainer.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace pinn {

using Progress = std::function<void(const RunRecord&)>;

// Trains one model per (N_f, seed) with seeds base.seed, base.seed + 1, ...
// and labels every record with the regime of its N_f. A run that throws is
// kept as a failed record.
std::vector<RunRecord> run_h_sweep(const TrainConfig& base, const std::vector<std::size_t>& n_list,
                                   std::size_t seeds, const RegimeThresholds& thresholds = {},
                                   const Progress& progress = {});

// Groups successful records by N_f and writes the regime label into each
// record; labels are "n/a" when some N_f has fewer than two seeds.
void label_regimes(std::vector<RunRecord>& records, const RegimeThresholds& thresholds = {});

struct ScalingRow {
    ScaleMode mode = ScaleMode::Weak;
    std::size_t size = 1;
    std::uint64_t seed = 0;
    double t500_mean = 0.0;
    double efficiency = 0.0;
    double speedup = 0.0;
    double pointsec = 0.0;
    double error = 0.0;
    double baseline_error = 0.0; // serial run on size * N_1 (weak) or the full set (strong)
};

struct ScalingStudy {
    std::vector<RunRecord> runs;      // rank-0 record of every distributed run
    std::vector<RunRecord> baselines; // unaccelerated runs
    std::vector<ScalingRow> rows;
};

// For every size and seed: one distributed run and its serial baseline.
// base.counts holds N_1 per rank in weak mode and the full set in strong
// mode. Efficiency is measured against the size-1 run of the same seed.
ScalingStudy run_scaling(const TrainConfig& base, ScaleMode mode, const std::vector<std::size_t>& sizes,
                         std::size_t seeds = 1, const Progress& progress = {});

enum class Sampler { Uniform, Lhs };

struct McRate {
    std::vector<double> n;
    std::vector<double> rms_error;
    double slope = 0.0;
    bool exact = false; // every estimate hit the integral; slope undefined
};

// RMS error of the quadrature vol * mean g(x_i) over `repeats` draws per N,
// and the least-squares slope of log(rms) against log(N).
McRate mc_rate_study(const std::function<double(double)>& g, double lo, double hi, double exact,
                     const std::vector<std::size_t>& n_list, std::size_t repeats,
                     Sampler sampler = Sampler::Uniform, std::uint64_t seed = 1234);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct GapRate {
    std::vector<double> n;
    std::vector<double> mean_gap;
    double slope = 0.0;
};

// |L_train - L_test| for fixed parameters over `repeats` pairs of
// independently drawn uniform interior sets of each size.
GapRate train_test_gap_study(const MlpParams& params, const ProblemSpec& spec,
                             const std::vector<std::size_t>& n_list, std::size_t repeats,
                             std::uint64_t seed = 1234);

// One row of sweep.csv.
struct SweepRow {
    std::string problem;
    std::string mode;
    std::size_t size = 1;
    std::size_t n_f = 0;
    std::size_t n_g = 0;
    std::size_t n_h = 0;
    std::size_t m = 0;
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
    double lr = 0.0;
    int width = 0;
    int depth = 0;
    double error = 0.0;
    std::size_t best_iter = 0;
    double loss_train = 0.0;
    double loss_test = 0.0;
    double gap_rel = 0.0;
    double time_total_s = 0.0;
    double t500_mean = 0.0;
    double t500_std = 0.0;
    double pointsec = 0.0;
    std::string regime;

    bool operator==(const SweepRow&) const = default;
};

inline constexpr const char* kSweepHeader =
    "problem,mode,size,N_f,N_g,N_h,M,seed,iterations,lr,width,depth,error,best_iter,loss_train,"
    "loss_test,gap_rel,time_total_s,t500_mean,t500_std,pointsec,regime";

SweepRow to_sweep_row(const RunRecord& record);
std::string format_sweep_row(const SweepRow& row);
SweepRow parse_sweep_row(const std::string& line);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);

struct PersistedRun {
    std::string id;
    std::filesystem::path losses;
    std::filesystem::path config;
};

// Appends to sweep.csv (writing the header for a new file) and writes
// losses_<id>.csv and run_<id>.json with a fresh id.
PersistedRun persist_run(const RunRecord& record, const std::filesystem::path& out_dir);

} // namespace pinn
