#include "pinn/communicator.hpp"

#include <algorithm>
#include <string>

namespace pinn {

void Channel::send(RingMsg msg) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) throw LinkClosed("ring link closed");
        queue_.push_back(std::move(msg));
    }
    ready_.notify_one();
}

RingMsg Channel::receive() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return closed_ || !queue_.empty(); });
    if (queue_.empty()) throw LinkClosed("ring link closed");
    RingMsg msg = std::move(queue_.front());
    queue_.pop_front();
    return msg;
}

void Channel::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    ready_.notify_all();
}

void Communicator::Links::close_all() {
    for (auto& c : inbox) c.close();
}

std::vector<std::pair<std::size_t, std::size_t>> segment_bounds(std::size_t length,
                                                                std::size_t parts) {
    if (parts == 0) throw std::invalid_argument("segment_bounds: zero parts");
    std::vector<std::pair<std::size_t, std::size_t>> out(parts);
    const std::size_t base = length / parts;
    const std::size_t extra = length % parts;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < parts; ++i) {
        const std::size_t len = base + (i < extra ? 1 : 0);
        out[i] = {begin, begin + len};
        begin += len;
    }
    return out;
}

Communicator::Communicator(std::size_t rank, std::size_t size, std::shared_ptr<Links> links)
    : rank_(rank), size_(size), links_(std::move(links)) {
    if (size == 0 || rank >= size) throw std::invalid_argument("communicator: rank out of range");
    if (size > 1 && (!links_ || links_->inbox.size() != size)) {
        throw std::invalid_argument("communicator: links do not match the ring size");
    }
}

Communicator Communicator::solo() { return Communicator(0, 1, nullptr); }

std::vector<Communicator> Communicator::ring(std::size_t size) {
    auto links = std::make_shared<Links>(size);
    std::vector<Communicator> out;
    out.reserve(size);
    for (std::size_t r = 0; r < size; ++r) out.emplace_back(r, size, links);
    return out;
}

void Communicator::send(RingMsg msg) {
    links_->inbox[(rank_ + 1) % size_].send(std::move(msg));
    ++sends_;
}

RingMsg Communicator::receive(RingPhase phase, std::uint32_t step) {
    RingMsg msg = links_->inbox[rank_].receive();
    ++receives_;
    if (msg.phase != phase || msg.step != step) {
        abort();
        throw std::logic_error("rank " + std::to_string(rank_) + ": out-of-order ring message");
    }
    return msg;
}

void Communicator::abort() {
    if (links_) links_->close_all();
}

void Communicator::allreduce(std::span<double> buffer, ReduceOp op) {
    if (size_ == 1) return;
    const auto seg = segment_bounds(buffer.size(), size_);
    const auto P = size_;
    auto slice = [&](std::size_t s) {
        return buffer.subspan(seg[s].first, seg[s].second - seg[s].first);
    };

    for (std::uint32_t s = 0; s + 1 < P; ++s) {
        const std::size_t out_seg = (rank_ + P - s) % P;
        const std::size_t in_seg = (rank_ + 2 * P - s - 1) % P;
        const auto src = slice(out_seg);
        send({RingPhase::ScatterReduce, s, static_cast<std::uint32_t>(out_seg),
              {src.begin(), src.end()}});
        RingMsg msg = receive(RingPhase::ScatterReduce, s);
        auto dst = slice(in_seg);
        if (msg.segment != in_seg || msg.payload.size() != dst.size()) {
            abort();
            throw std::invalid_argument("allreduce: buffer length differs between ranks");
        }
        if (op == ReduceOp::Sum) {
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += msg.payload[i];
        } else {
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::max(dst[i], msg.payload[i]);
        }
    }

    for (std::uint32_t s = 0; s + 1 < P; ++s) {
        const std::size_t out_seg = (rank_ + 1 + P - s) % P;
        const std::size_t in_seg = (rank_ + P - s) % P;
        const auto src = slice(out_seg);
        send({RingPhase::Allgather, s, static_cast<std::uint32_t>(out_seg),
              {src.begin(), src.end()}});
        RingMsg msg = receive(RingPhase::Allgather, s);
        auto dst = slice(in_seg);
        if (msg.segment != in_seg || msg.payload.size() != dst.size()) {
            abort();
            throw std::invalid_argument("allreduce: buffer length differs between ranks");
        }
        std::copy(msg.payload.begin(), msg.payload.end(), dst.begin());
    }
}

void Communicator::broadcast(std::span<double> buffer) {
    if (size_ == 1) return;
    if (rank_ != 0) {
        RingMsg msg = receive(RingPhase::Broadcast, 0);
        if (msg.payload.size() != buffer.size()) {
            abort();
            throw std::invalid_argument("broadcast: buffer length differs between ranks");
        }
        std::copy(msg.payload.begin(), msg.payload.end(), buffer.begin());
    }
    if (rank_ + 1 < size_) send({RingPhase::Broadcast, 0, 0, {buffer.begin(), buffer.end()}});
}

} // namespace pinn
