#include "pinn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pinn {

namespace {

ad::NodeId weighted_square_sum(ad::Graph& g, ad::NodeId residual, const Vector& weights) {
    const auto rows = g.value(residual).rows();
    const auto cols = g.value(residual).cols();
    if (rows != weights.size()) {
        throw std::invalid_argument("residual has " + std::to_string(rows) + " rows but " +
                                    std::to_string(weights.size()) + " quadrature weights");
    }
    ad::NodeId sq = g.square(residual);
    if (cols > 1) sq = g.matmul(sq, g.constant(Matrix::Ones(cols, 1)));
    return g.matmul(g.constant(Matrix(weights.transpose())), sq);
}

bool required(const ProblemSpec& spec, Component c) {
    switch (c) {
    case Component::F:
    case Component::G: return true;
    case Component::H: return !spec.is_laplace();
    case Component::U: return spec.is_inverse();
    }
    return false;
}

} // namespace

LossNodes build_loss(ad::Graph& g, const ParamNodes& params, const ProblemSpec& spec,
                     const TrainingSet& set, const ComponentWeights& omega,
                     Activation activation) {
    LossNodes out;
    std::optional<ad::NodeId> total;
    for (Component c : kComponents) {
        const double w = omega[static_cast<int>(c)];
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("loss weight for component " + std::string(to_string(c)) +
                                        " must be finite and non-negative");
        }
        const ComponentSet& part = set[c];
        if (part.empty()) {
            if (w > 0.0 && required(spec, c)) {
                throw std::invalid_argument("component " + std::string(to_string(c)) +
                                            " is empty but has a nonzero loss weight");
            }
            continue;
        }

        std::vector<ad::NodeId> residuals;
        switch (c) {
        case Component::F:
            if (spec.is_laplace()) {
                residuals.push_back(residual_laplace(g, params, part.points, spec.kind, activation));
            } else {
                const auto r = residual_schrodinger(g, params, part.points, activation);
                residuals = {r.real, r.imag};
            }
            break;
        case Component::G:
            residuals = boundary_residuals(g, params, spec, part.points, activation);
            break;
        case Component::H:
            residuals.push_back(initial_residual(g, params, part.points, activation));
            break;
        case Component::U: {
            const ad::NodeId u = forward(g, params, g.variable(part.points), activation);
            residuals.push_back(g.sub(u, g.constant(part.observations)));
            break;
        }
        }

        ad::NodeId loss = weighted_square_sum(g, residuals.front(), part.weights);
        for (std::size_t k = 1; k < residuals.size(); ++k) {
            loss = g.add(loss, weighted_square_sum(g, residuals[k], part.weights));
        }
        out.parts[static_cast<int>(c)] = loss;
        const ad::NodeId term = w == 1.0 ? loss : g.scale(loss, w);
        total = total ? g.add(*total, term) : term;
    }
    if (!total) throw std::invalid_argument("training set has no points");
    out.total = *total;
    return out;
}

LossReport loss_report(const ad::Graph& graph, const LossNodes& nodes,
                       const ComponentWeights& omega) {
    LossReport r;
    double pde = 0.0;
    for (Component c : kComponents) {
        const int k = static_cast<int>(c);
        if (nodes.parts[k]) r.components[k] = graph.value(*nodes.parts[k])(0, 0);
        if (c != Component::U) pde += omega[k] * r.components[k];
    }
    r.total = graph.value(nodes.total)(0, 0);
    r.eps_train_pde = std::sqrt(pde);
    r.eps_train_obs = std::sqrt(r.components[static_cast<int>(Component::U)]);
    return r;
}

LossReport assemble_loss(const MlpParams& params, const ProblemSpec& spec, const TrainingSet& set,
                         const ComponentWeights& omega, Activation activation) {
    ad::Graph g;
    const ParamNodes nodes = register_params(g, params);
    return loss_report(g, build_loss(g, nodes, spec, set, omega, activation), omega);
}

double relative_gap(double train_loss, double test_loss) {
    return std::abs(test_loss - train_loss) / std::max(std::abs(train_loss), kGapFloor);
}

void attach_validation(LossReport& train, const LossReport& test) {
    train.eps_val_pde = test.eps_train_pde;
    train.eps_val_obs = test.eps_train_obs;
    train.gap_rel = relative_gap(train.total, test.total);
}

double relative_l2_error(const Matrix& pred, const Matrix& exact) {
    if (pred.rows() != exact.rows() || pred.cols() != exact.cols()) {
        throw std::invalid_argument("relative_l2_error: shape mismatch");
    }
    const double denom = exact.norm();
    if (!(denom > 0.0)) throw std::invalid_argument("relative_l2_error: exact values have zero norm");
    return (pred - exact).norm() / denom;
}

double rho(double n_f, double volume, int input_dim) {
    if (!(n_f > 0.0) || !(volume > 0.0) || input_dim < 1) {
        throw std::invalid_argument("rho: N_f, volume and input dimension must be positive");
    }
    if (input_dim == 1) return n_f / volume;
    return std::pow(n_f / volume, 1.0 / static_cast<double>(input_dim));
}

double pointsec(double iterations, double n_f, double seconds) {
    if (!(seconds > 0.0)) throw std::invalid_argument("pointsec: time must be positive");
    return iterations * n_f / seconds;
}

double generalization_bound(const BoundInputs& b, double eps_train_pde, double eps_train_obs) {
    for (double v : {b.c_pde, b.c_quad_y, b.c_quad_x, b.omega_u, b.mu_hat, eps_train_pde,
                     eps_train_obs, b.n_hat, b.m}) {
        if (!(v >= 0.0)) throw std::invalid_argument("bound inputs must be non-negative");
    }
    if (!(b.alpha > 0.0) || !(b.beta > 0.0)) {
        throw std::invalid_argument("quadrature rates alpha and beta must be positive");
    }
    const double scale = 1.0 / (1.0 + b.omega_u);
    double first = 0.0;
    if (b.c_pde != 0.0) {
        if (b.n_hat == 0.0) throw std::invalid_argument("bound needs N_hat >= 1 when C_pde != 0");
        first = b.c_pde * scale *
                (eps_train_pde + std::sqrt(b.c_quad_y) * std::pow(b.n_hat, -b.alpha / 2.0));
    }
    double second = 0.0;
    if (b.omega_u != 0.0) {
        if (b.m == 0.0) throw std::invalid_argument("bound needs M >= 1 when omega_u != 0");
        second = b.omega_u * scale *
                 (eps_train_obs + std::sqrt(b.c_quad_x) * std::pow(b.m, -b.beta / 2.0) + b.mu_hat);
    }
    return first + second;
}

double gap_bound(double c_quad, double rate, double count) {
    if (!(count >= 1.0)) throw std::invalid_argument("gap_bound: count must be >= 1");
    if (!(c_quad >= 0.0) || !(rate > 0.0)) {
        throw std::invalid_argument("gap_bound: need C_quad >= 0 and rate > 0");
    }
    return 2.0 * std::sqrt(c_quad) * std::pow(count, -rate / 2.0);
}

std::string_view to_string(Regime r) {
    switch (r) {
    case Regime::PreAsymptotic: return "pre-asymptotic";
    case Regime::Transition: return "transition";
    case Regime::Permanent: return "permanent";
    }
    return "?";
}

Regime parse_regime(std::string_view name) {
    if (name == "pre-asymptotic") return Regime::PreAsymptotic;
    if (name == "transition") return Regime::Transition;
    if (name == "permanent") return Regime::Permanent;
    throw std::invalid_argument("unknown regime '" + std::string(name) + "'");
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<Regime> classify_regime(std::span<const SweepPoint> sweep,
                                    const RegimeThresholds& thresholds) {
    if (sweep.empty()) throw std::invalid_argument("classify_regime: empty sweep");
    for (const auto& p : sweep) {
        if (p.errors.empty() || p.gaps.empty()) {
            throw std::invalid_argument("classify_regime: every N needs errors and gaps");
        }
    }
    const double reference = median(sweep.back().errors);
    std::vector<Regime> labels;
    labels.reserve(sweep.size());
    for (const auto& p : sweep) {
        const double err = median(p.errors);
        const double gap = median(p.gaps);
        if (err > thresholds.error) {
            labels.push_back(Regime::PreAsymptotic);
        } else if (gap < thresholds.gap && err <= thresholds.factor * reference) {
            labels.push_back(Regime::Permanent);
        } else {
            labels.push_back(Regime::Transition);
        }
    }
    return labels;
}

std::vector<std::size_t> regime_violations(std::span<const Regime> labels) {
    std::vector<std::size_t> out;
    int highest = -1;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int level = static_cast<int>(labels[i]);
        if (level < highest) out.push_back(i);
        highest = std::max(highest, level);
    }
    return out;
}

} // namespace pinn
