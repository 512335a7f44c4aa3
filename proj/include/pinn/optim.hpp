#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pinn {

struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t t = 0;
    std::vector<double> m;
    std::vector<double> v;

    AdamState() = default;
    AdamState(std::size_t n, double lr_ = 1e-4) : lr(lr_), m(n, 0.0), v(n, 0.0) {}

    std::size_t size() const { return m.size(); }
    bool operator==(const AdamState&) const = default;

    // m, v and t laid out as one vector, used for broadcasts.
    std::vector<double> pack() const;
    void unpack(std::span<const double> flat);
};

// One bias-corrected ADAM update in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

} // namespace pinn
