#pragma once

#include "pinn/communicator.hpp"
#include "pinn/model.hpp"
#include "pinn/optim.hpp"
#include "pinn/sampling.hpp"
#include "pinn/trainer.hpp"

#include <functional>
#include <vector>

namespace pinn {

// Runs fn(comm) on `size` threads connected as a ring. If any rank throws,
// the ring is closed and the first genuine error is rethrown after joining.
void run_ranks(std::size_t size, const std::function<void(Communicator&)>& fn);

// Weak: rank r samples `counts` with worker_seed(seed, r).
std::vector<TrainingSet> shard_weak(const ProblemSpec& spec, const SetCounts& counts,
                                    std::size_t size, std::uint64_t seed);

// Strong: interior and observation rows are cut into equal contiguous blocks
// with local weights 1 / N_v,1. Boundary and initial points are replicated on
// every rank, so their mean is unchanged.
std::vector<TrainingSet> shard_strong(const TrainingSet& full, std::size_t size);

std::vector<TrainingSet> shard(ScaleMode mode, const ProblemSpec& spec, const SetCounts& counts,
                               std::size_t size, std::uint64_t seed);

struct AllreduceCounts {
    std::vector<std::uint64_t> sends;
    std::vector<std::uint64_t> receives;
};

// Threaded ring allreduce over one buffer per rank; buffers hold the result.
AllreduceCounts ring_allreduce(std::vector<std::vector<double>>& buffers,
                               ReduceOp op = ReduceOp::Sum);

// Copies rank 0's parameters and optimizer state into every replica.
void broadcast_params(std::vector<MlpParams>& params, std::vector<AdamState>& states);

std::vector<RunRecord> train_distributed(const TrainConfig& config, ScaleMode mode,
                                         std::size_t size);
std::vector<RunRecord> train_distributed(const TrainConfig& config, const ProblemSpec& spec,
                                         ScaleMode mode, std::size_t size);

// Global training-set sizes of a run.
SetCounts global_counts(const SetCounts& counts, ScaleMode mode, std::size_t size);

struct Scaling {
    double efficiency = 0.0; // t_1 / t_size
    double speedup = 0.0;    // size * t_1 / t_size
};
Scaling efficiency_speedup(double t1, double t_size, std::size_t size);

} // namespace pinn
