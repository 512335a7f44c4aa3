#pragma once

#include "pinn/autodiff.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace pinn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { Tanh, Identity };

// Weights and biases of a feed-forward network plus named trainable scalars
// (material parameters). The flat layout is, per layer l = 1..L, the weight
// matrix W^l (W_l x W_{l-1}) in row-major order followed by b^l, and then the
// extras in insertion order.
struct MlpParams {
    std::vector<int> dims;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    std::vector<std::pair<std::string, double>> extras;

    std::size_t layers() const { return weights.size(); }
    std::size_t flat_size() const;
    bool has_extra(const std::string& name) const;
    double extra(const std::string& name) const;

    std::vector<double> flatten() const;
    // Overwrites all values from `flat`, keeping the shapes.
    void unflatten(std::span<const double> flat);

    bool operator==(const MlpParams&) const = default;
};

// Number of weight and bias entries: sum over layers of W_l * W_{l-1} + W_l.
std::size_t param_count(const std::vector<int>& dims);

// Uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
MlpParams glorot_init(const std::vector<int>& dims,
                      const std::vector<std::pair<std::string, double>>& extras,
                      std::uint64_t seed);

double glorot_bound(int fan_in, int fan_out);

// Parameters registered as variables of one graph.
struct ParamNodes {
    std::vector<ad::NodeId> weights;
    std::vector<ad::NodeId> biases;
    std::vector<std::pair<std::string, ad::NodeId>> extras;

    // Every variable in flat-layout order.
    std::vector<ad::NodeId> all() const;
    ad::NodeId extra(const std::string& name) const;
};

ParamNodes register_params(ad::Graph& graph, const MlpParams& params);

// Hidden layers z = act(z W^T + b), linear output layer. Input rows are
// samples; the result is batch x W_L.
ad::NodeId forward(ad::Graph& graph, const ParamNodes& params, ad::NodeId input,
                   Activation activation = Activation::Tanh);

struct ForwardResult {
    ad::NodeId output;
    ad::NodeId input;
    ParamNodes params;
};

ForwardResult forward(const MlpParams& params, const Matrix& x, Activation activation,
                      ad::Graph& graph);

// Gathers per-variable gradient nodes into the flat layout.
std::vector<double> flatten_gradient(const ad::Graph& graph, const MlpParams& shape,
                                     std::span<const ad::NodeId> grads);

// Binary snapshot, see README for the byte layout.
void save_params(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_params(const std::filesystem::path& path);

} // namespace pinn
