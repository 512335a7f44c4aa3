#include "pinn/parallel.hpp"

#include <exception>
#include <thread>

namespace pinn {

void run_ranks(std::size_t size, const std::function<void(Communicator&)>& fn) {
    if (size == 0) throw std::invalid_argument("need at least one rank");
    if (size == 1) {
        Communicator comm = Communicator::solo();
        fn(comm);
        return;
    }
    auto comms = Communicator::ring(size);
    std::vector<std::exception_ptr> errors(size);
    std::vector<bool> closed(size, false);
    std::vector<std::thread> threads;
    threads.reserve(size);
    for (std::size_t r = 0; r < size; ++r) {
        threads.emplace_back([&, r] {
            try {
                fn(comms[r]);
            } catch (const LinkClosed&) {
                closed[r] = true;
                errors[r] = std::current_exception();
                comms[r].abort();
            } catch (...) {
                errors[r] = std::current_exception();
                comms[r].abort();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (std::size_t r = 0; r < size; ++r) {
        if (errors[r] && !closed[r]) std::rethrow_exception(errors[r]);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::vector<TrainingSet> shard_weak(const ProblemSpec& spec, const SetCounts& counts,
                                    std::size_t size, std::uint64_t seed) {
    if (size == 0) throw std::invalid_argument("shard: size must be positive");
    if (counts.n_f == 0) throw std::invalid_argument("weak shard: N_f per rank must be positive");
    std::vector<TrainingSet> out;
    out.reserve(size);
    for (std::size_t r = 0; r < size; ++r) {
        out.push_back(build_training_set(spec, counts, worker_seed(seed, r)));
    }
    return out;
}

std::vector<TrainingSet> shard_strong(const TrainingSet& full, std::size_t size) {
    if (size == 0) throw std::invalid_argument("shard: size must be positive");
    for (Component c : {Component::F, Component::U}) {
        if (full.count(c) % size != 0) {
            throw std::invalid_argument("strong shard: " + std::to_string(full.count(c)) + " " +
                                        std::string(to_string(c)) + "-points do not split into " +
                                        std::to_string(size) + " equal blocks");
        }
    }
    std::vector<TrainingSet> out(size, full);
    for (Component c : {Component::F, Component::U}) {
        const auto& src = full[c];
        if (src.empty()) continue;
        const Eigen::Index block = src.points.rows() / static_cast<Eigen::Index>(size);
        for (std::size_t r = 0; r < size; ++r) {
            auto& dst = out[r][c];
            const Eigen::Index begin = static_cast<Eigen::Index>(r) * block;
            dst.points = src.points.middleRows(begin, block);
            dst.weights = Vector::Constant(block, 1.0 / static_cast<double>(block));
            if (src.observations.rows() > 0) dst.observations = src.observations.middleRows(begin, block);
        }
    }
    return out;
}

std::vector<TrainingSet> shard(ScaleMode mode, const ProblemSpec& spec, const SetCounts& counts,
                               std::size_t size, std::uint64_t seed) {
    switch (mode) {
    case ScaleMode::Weak: return shard_weak(spec, counts, size, seed);
    case ScaleMode::Strong: return shard_strong(build_training_set(spec, counts, seed), size);
    case ScaleMode::Serial:
        if (size != 1) throw std::invalid_argument("serial mode runs on one rank");
        return {build_training_set(spec, counts, seed)};
    }
    return {};
}

AllreduceCounts ring_allreduce(std::vector<std::vector<double>>& buffers, ReduceOp op) {
    const std::size_t size = buffers.size();
    if (size == 0) throw std::invalid_argument("ring_allreduce: no buffers");
    for (const auto& b : buffers) {
        if (b.size() != buffers[0].size()) {
            throw std::invalid_argument("ring_allreduce: buffer lengths differ across ranks");
        }
    }
    AllreduceCounts counts{std::vector<std::uint64_t>(size), std::vector<std::uint64_t>(size)};
    run_ranks(size, [&](Communicator& comm) {
        comm.allreduce(buffers[comm.rank()], op);
        counts.sends[comm.rank()] = comm.sends();
        counts.receives[comm.rank()] = comm.receives();
    });
    return counts;
}

void broadcast_params(std::vector<MlpParams>& params, std::vector<AdamState>& states) {
    if (params.size() != states.size() || params.empty()) {
        throw std::invalid_argument("broadcast_params: need one optimizer state per replica");
    }
    const std::size_t n = params[0].flat_size();
    run_ranks(params.size(), [&](Communicator& comm) {
        const std::size_t r = comm.rank();
        std::vector<double> buffer = params[r].flatten();
        if (buffer.size() != n || states[r].size() != n) {
            comm.abort();
            throw std::invalid_argument("broadcast_params: replica shapes differ");
        }
        const auto adam = states[r].pack();
        buffer.insert(buffer.end(), adam.begin(), adam.end());
        comm.broadcast(buffer);
        params[r].unflatten(std::span<const double>(buffer).first(n));
        states[r].unpack(std::span<const double>(buffer).subspan(n));
        states[r].lr = states[0].lr;
        states[r].beta1 = states[0].beta1;
        states[r].beta2 = states[0].beta2;
        states[r].eps = states[0].eps;
    });
}

SetCounts global_counts(const SetCounts& counts, ScaleMode mode, std::size_t size) {
    if (mode != ScaleMode::Weak) return counts;
    SetCounts g = counts;
    g.n_f *= size;
    g.m *= size;
    return g;
}

std::vector<RunRecord> train_distributed(const TrainConfig& config, const ProblemSpec& spec,
                                         ScaleMode mode, std::size_t size) {
    if (mode == ScaleMode::Serial && size != 1) {
        throw std::invalid_argument("serial mode runs on one rank; use weak or strong");
    }
    const SetCounts total = global_counts(config.counts, mode, size);
    const auto train = shard(mode, spec, config.counts, size, config.seed);
    const auto test = shard(mode, spec, config.counts, size, config.seed + kTestSeedOffset);
    const Matrix eval = evaluation_points(spec, config, total.n_f);
    const auto blocks = segment_bounds(static_cast<std::size_t>(eval.rows()), size);

    std::vector<RankData> data(size);
    for (std::size_t r = 0; r < size; ++r) {
        data[r].spec = spec;
        data[r].train = train[r];
        data[r].test = test[r];
        const auto [begin, end] = blocks[r];
        data[r].eval_points = eval.middleRows(static_cast<Eigen::Index>(begin),
                                              static_cast<Eigen::Index>(end - begin));
        data[r].eval_exact = spec.exact(data[r].eval_points);
    }

    std::vector<RunRecord> records(size);
    run_ranks(size, [&](Communicator& comm) {
        const std::size_t r = comm.rank();
        records[r] = train_rank(config, std::move(data[r]), comm, mode, total);
    });
    return records;
}

std::vector<RunRecord> train_distributed(const TrainConfig& config, ScaleMode mode,
                                         std::size_t size) {
    return train_distributed(config, problem_for(config), mode, size);
}

Scaling efficiency_speedup(double t1, double t_size, std::size_t size) {
    if (!(t1 > 0.0) || !(t_size > 0.0)) throw std::invalid_argument("timings must be positive");
    if (size == 0) throw std::invalid_argument("size must be positive");
    const double e = t1 / t_size;
    return {e, static_cast<double>(size) * e};
}

} // namespace pinn
