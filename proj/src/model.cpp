#include "pinn/model.hpp"

#include "pinn/rng.hpp"

#include "binary_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pinn {

namespace {

void validate_dims(const std::vector<int>& dims) {
    if (dims.size() < 2) throw std::invalid_argument("dims needs at least input and output width");
    for (int w : dims) {
        if (w < 1) throw std::invalid_argument("layer widths must be >= 1");
    }
}

} // namespace

std::size_t param_count(const std::vector<int>& dims) {
    validate_dims(dims);
    std::size_t n = 0;
    for (std::size_t l = 1; l < dims.size(); ++l) {
        n += static_cast<std::size_t>(dims[l]) * static_cast<std::size_t>(dims[l - 1]) +
             static_cast<std::size_t>(dims[l]);
    }
    return n;
}

double glorot_bound(int fan_in, int fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

MlpParams glorot_init(const std::vector<int>& dims,
                      const std::vector<std::pair<std::string, double>>& extras,
                      std::uint64_t seed) {
    validate_dims(dims);
    MlpParams p;
    p.dims = dims;
    p.extras = extras;
    CounterRng rng(seed, streams::kGlorot);
    for (std::size_t l = 1; l < dims.size(); ++l) {
        const double bound = glorot_bound(dims[l - 1], dims[l]);
        Matrix w(dims[l], dims[l - 1]);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
        }
        p.weights.push_back(std::move(w));
        p.biases.push_back(Vector::Zero(dims[l]));
    }
    return p;
}

std::size_t MlpParams::flat_size() const {
    std::size_t n = extras.size();
    for (std::size_t l = 0; l < weights.size(); ++l) {
        n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    }
    return n;
}

bool MlpParams::has_extra(const std::string& name) const {
    for (const auto& [key, _] : extras) {
        if (key == name) return true;
    }
    return false;
}

double MlpParams::extra(const std::string& name) const {
    for (const auto& [key, value] : extras) {
        if (key == name) return value;
    }
    throw std::out_of_range("no trainable extra named '" + name + "'");
}

std::vector<double> MlpParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(flat_size());
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const Matrix& w = weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
        }
        for (Eigen::Index i = 0; i < biases[l].size(); ++i) flat.push_back(biases[l](i));
    }
    for (const auto& [_, value] : extras) flat.push_back(value);
    return flat;
}

void MlpParams::unflatten(std::span<const double> flat) {
    if (flat.size() != flat_size()) {
        throw std::invalid_argument("unflatten: expected " + std::to_string(flat_size()) +
                                    " values, got " + std::to_string(flat.size()));
    }
    std::size_t k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        Matrix& w = weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[k++];
        }
        for (Eigen::Index i = 0; i < biases[l].size(); ++i) biases[l](i) = flat[k++];
    }
    for (auto& [_, value] : extras) value = flat[k++];
}

std::vector<ad::NodeId> ParamNodes::all() const {
    std::vector<ad::NodeId> ids;
    ids.reserve(weights.size() * 2 + extras.size());
    for (std::size_t l = 0; l < weights.size(); ++l) {
        ids.push_back(weights[l]);
        ids.push_back(biases[l]);
    }
    for (const auto& [_, id] : extras) ids.push_back(id);
    return ids;
}

ad::NodeId ParamNodes::extra(const std::string& name) const {
    for (const auto& [key, id] : extras) {
        if (key == name) return id;
    }
    throw std::out_of_range("no trainable extra named '" + name + "'");
}

ParamNodes register_params(ad::Graph& graph, const MlpParams& params) {
    ParamNodes nodes;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        nodes.weights.push_back(graph.variable(params.weights[l]));
        nodes.biases.push_back(graph.variable(params.biases[l].transpose()));
    }
    for (const auto& [name, value] : params.extras) {
        nodes.extras.emplace_back(name, graph.variable(Matrix::Constant(1, 1, value)));
    }
    return nodes;
}

ad::NodeId forward(ad::Graph& graph, const ParamNodes& params, ad::NodeId input,
                   Activation activation) {
    const std::size_t layers = params.weights.size();
    ad::NodeId z = input;
    for (std::size_t l = 0; l < layers; ++l) {
        z = graph.add_bias(graph.matmul(z, params.weights[l], false, true), params.biases[l]);
        if (l + 1 < layers && activation == Activation::Tanh) z = graph.tanh(z);
    }
    return z;
}

ForwardResult forward(const MlpParams& params, const Matrix& x, Activation activation,
                      ad::Graph& graph) {
    if (params.dims.empty() || x.cols() != params.dims.front()) {
        throw std::invalid_argument("forward: input has " + std::to_string(x.cols()) +
                                    " columns, network expects " +
                                    std::to_string(params.dims.empty() ? 0 : params.dims.front()));
    }
    ForwardResult r;
    r.params = register_params(graph, params);
    r.input = graph.variable(x);
    r.output = forward(graph, r.params, r.input, activation);
    return r;
}

std::vector<double> flatten_gradient(const ad::Graph& graph, const MlpParams& shape,
                                     std::span<const ad::NodeId> grads) {
    const std::size_t layers = shape.weights.size();
    if (grads.size() != 2 * layers + shape.extras.size()) {
        throw std::invalid_argument("flatten_gradient: gradient list does not match parameters");
    }
    std::vector<double> flat;
    flat.reserve(shape.flat_size());
    for (std::size_t l = 0; l < layers; ++l) {
        const Matrix& w = graph.value(grads[2 * l]);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
        }
        const Matrix& b = graph.value(grads[2 * l + 1]);
        for (Eigen::Index i = 0; i < b.size(); ++i) flat.push_back(b(i));
    }
    for (std::size_t e = 0; e < shape.extras.size(); ++e) {
        flat.push_back(graph.value(grads[2 * layers + e])(0, 0));
    }
    return flat;
}

// Snapshot layout, all integers and floats little-endian:
//   "PINNPRM1" | u32 n_dims | u32 n_extras | u32 dims[n_dims]
//   | n_extras x (u32 len | len bytes name) | u64 count | f64 values[count]
namespace {
constexpr char kMagic[8] = {'P', 'I', 'N', 'N', 'P', 'R', 'M', '1'};
}

using detail::read_le;
using detail::write_le;

void save_params(const MlpParams& params, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error(path.string() + ": cannot open for writing");
    os.write(kMagic, sizeof(kMagic));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.dims.size()));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.extras.size()));
    for (int d : params.dims) write_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    for (const auto& [name, _] : params.extras) {
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
    }
    const auto flat = params.flatten();
    write_le<std::uint64_t>(os, flat.size());
    for (double v : flat) write_le<double>(os, v);
    if (!os) throw std::runtime_error(path.string() + ": write failed");
}

MlpParams load_params(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error(path.string() + ": cannot open for reading");
    char magic[8];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error(path.string() + ": not a parameter snapshot");
    }
    const auto n_dims = read_le<std::uint32_t>(is, path);
    const auto n_extras = read_le<std::uint32_t>(is, path);
    std::vector<int> dims(n_dims);
    for (auto& d : dims) d = static_cast<int>(read_le<std::uint32_t>(is, path));
    std::vector<std::pair<std::string, double>> extras;
    for (std::uint32_t e = 0; e < n_extras; ++e) {
        const auto len = read_le<std::uint32_t>(is, path);
        std::string name(len, '\0');
        if (!is.read(name.data(), len)) throw std::runtime_error(path.string() + ": truncated name");
        extras.emplace_back(std::move(name), 0.0);
    }
    MlpParams p = glorot_init(dims, extras, 0);
    const auto count = read_le<std::uint64_t>(is, path);
    if (count != p.flat_size()) {
        throw std::runtime_error(path.string() + ": value count does not match dims");
    }
    std::vector<double> flat(count);
    for (auto& v : flat) v = read_le<double>(is, path);
    p.unflatten(flat);
    return p;
}

} // namespace pinn
