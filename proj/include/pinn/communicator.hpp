#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace pinn {

enum class RingPhase : std::uint8_t { ScatterReduce, Allgather, Broadcast };

// One segment of a flat buffer travelling to the next rank on the ring.
struct RingMsg {
    RingPhase phase = RingPhase::ScatterReduce;
    std::uint32_t step = 0;
    std::uint32_t segment = 0;
    std::vector<double> payload;
};

class LinkClosed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unbounded FIFO between two ranks. Sends never block; receives block until a
// message arrives or the link is closed.
class Channel {
public:
    void send(RingMsg msg);
    RingMsg receive();
    void close();

private:
    std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<RingMsg> queue_;
    bool closed_ = false;
};

enum class ReduceOp { Sum, Max };

// Half-open [begin, end) ranges splitting `length` into `parts` pieces whose
// sizes differ by at most one; the first length % parts pieces are longer.
std::vector<std::pair<std::size_t, std::size_t>> segment_bounds(std::size_t length,
                                                                std::size_t parts);

// A rank's view of the ring: it receives from rank - 1 and sends to rank + 1.
class Communicator {
public:
    struct Links {
        std::vector<Channel> inbox; // inbox[r] is read by rank r
        explicit Links(std::size_t size) : inbox(size) {}
        void close_all();
    };

    Communicator(std::size_t rank, std::size_t size, std::shared_ptr<Links> links);

    // Single-rank communicator; every collective is a no-op.
    static Communicator solo();
    // Connected communicators for ranks 0..size-1.
    static std::vector<Communicator> ring(std::size_t size);

    std::size_t rank() const { return rank_; }
    std::size_t size() const { return size_; }

    // Segmented ring allreduce: size - 1 scatter-reduce steps followed by
    // size - 1 allgather steps. Every rank must call it with equal lengths.
    void allreduce(std::span<double> buffer, ReduceOp op = ReduceOp::Sum);

    // Pipelined copy of rank 0's buffer along the ring.
    void broadcast(std::span<double> buffer);

    // Closes every link so blocked peers fail instead of waiting forever.
    void abort();

    std::uint64_t sends() const { return sends_; }
    std::uint64_t receives() const { return receives_; }

private:
    void send(RingMsg msg);
    RingMsg receive(RingPhase phase, std::uint32_t step);

    std::size_t rank_;
    std::size_t size_;
    std::shared_ptr<Links> links_;
    std::uint64_t sends_ = 0;
    std::uint64_t receives_ = 0;
};

} // namespace pinn
