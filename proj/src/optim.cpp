#include "pinn/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pinn {

std::vector<double> AdamState::pack() const {
    std::vector<double> out;
    out.reserve(2 * m.size() + 1);
    out.insert(out.end(), m.begin(), m.end());
    out.insert(out.end(), v.begin(), v.end());
    out.push_back(static_cast<double>(t));
    return out;
}

void AdamState::unpack(std::span<const double> flat) {
    if (flat.size() != 2 * m.size() + 1) throw std::invalid_argument("AdamState::unpack: wrong length");
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = flat[i];
        v[i] = flat[n + i];
    }
    t = static_cast<std::uint64_t>(flat[2 * n]);
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& s) {
    if (params.size() != grads.size() || params.size() != s.m.size() || s.v.size() != s.m.size()) {
        throw std::invalid_argument("adam_step: length mismatch (params " +
                                    std::to_string(params.size()) + ", grads " +
                                    std::to_string(grads.size()) + ", state " +
                                    std::to_string(s.m.size()) + ")");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw std::domain_error("adam_step: non-finite gradient at index " + std::to_string(i));
        }
    }
    ++s.t;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
    for (std::size_t i = 0; i < grads.size(); ++i) {
        const double g = grads[i];
        s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g;
        s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g * g;
        const double m_hat = s.m[i] / c1;
        const double v_hat = s.v[i] / c2;
        params[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
    }
}

} // namespace pinn
