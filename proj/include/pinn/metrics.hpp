#pragma once

#include "pinn/autodiff.hpp"
#include "pinn/model.hpp"
#include "pinn/problems.hpp"
#include "pinn/sampling.hpp"

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace pinn {

// Per-component loss weights omega_v, indexed by Component.
using ComponentWeights = std::array<double, 4>;
inline constexpr ComponentWeights kUnitWeights = {1.0, 1.0, 1.0, 1.0};

struct LossNodes {
    ad::NodeId total;
    std::array<std::optional<ad::NodeId>, 4> parts;
};

// Builds L = sum_v omega_v L^v with L^v = sum_i w_v^i |xi_v(tau_v^i)|^2.
// Vector residuals contribute their squared Euclidean norm per point.
LossNodes build_loss(ad::Graph& graph, const ParamNodes& params, const ProblemSpec& spec,
                     const TrainingSet& set, const ComponentWeights& omega = kUnitWeights,
                     Activation activation = Activation::Tanh);

struct LossReport {
    std::array<double, 4> components{}; // L^f, L^g, L^h, L^u
    double total = 0.0;
    // Training errors: eps_T,D^2 = sum over f, g, h of omega_v L^v and
    // eps_T,u^2 = L^u. Validation counterparts are filled from a test set.
    double eps_train_pde = 0.0;
    double eps_train_obs = 0.0;
    double eps_val_pde = 0.0;
    double eps_val_obs = 0.0;
    double gap_rel = 0.0;
    std::size_t best_iter = 0;
};

LossReport loss_report(const ad::Graph& graph, const LossNodes& nodes,
                       const ComponentWeights& omega = kUnitWeights);

LossReport assemble_loss(const MlpParams& params, const ProblemSpec& spec, const TrainingSet& set,
                         const ComponentWeights& omega = kUnitWeights,
                         Activation activation = Activation::Tanh);

// Adds validation errors and the relative gap |L_test - L_train| / L_train.
void attach_validation(LossReport& train, const LossReport& test);

inline constexpr double kGapFloor = 1e-30;
double relative_gap(double train_loss, double test_loss);

// ||pred - exact||_2 / ||exact||_2 over all entries.
double relative_l2_error(const Matrix& pred, const Matrix& exact);

// Points per unit length per input coordinate: (N_f / volume)^(1 / D_in).
double rho(double n_f, double volume, int input_dim);

// Training points processed per second, k N_f / t_k.
double pointsec(double iterations, double n_f, double seconds);

struct BoundInputs {
    double c_pde = 1.0;
    double c_quad_y = 1.0;
    double c_quad_x = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double omega_u = 0.0;
    double mu_hat = 0.0; // ||u - u_obs||
    double n_hat = 0.0;  // collocation points
    double m = 0.0;      // observations
};

// Generalization error bound
//   C_pde/(1+w_u) (eps_TD + C_quad,Y^1/2 N^-a/2)
//   + w_u/(1+w_u) (eps_Tu + C_quad,X^1/2 M^-b/2 + mu).
double generalization_bound(const BoundInputs& b, double eps_train_pde, double eps_train_obs);

// Train-test gap bound 2 C_quad^1/2 count^(-rate/2).
double gap_bound(double c_quad, double rate, double count);

enum class Regime { PreAsymptotic, Transition, Permanent };
std::string_view to_string(Regime r);
Regime parse_regime(std::string_view name);

struct RegimeThresholds {
    double gap = 1e-2;   // permanent needs median relative gap below this
    double error = 0.3;  // pre-asymptotic above this median error
    double factor = 2.0; // permanent needs error <= factor * error at the largest N
};

// Statistics of all runs sharing one training-set size.
struct SweepPoint {
    double n = 0.0;
    std::vector<double> errors;
    std::vector<double> gaps;
};

// One label per point, in the order given. Points must be sorted by n.
std::vector<Regime> classify_regime(std::span<const SweepPoint> sweep,
                                    const RegimeThresholds& thresholds = {});

// Indices i where labels[i] is less advanced than some earlier label.
std::vector<std::size_t> regime_violations(std::span<const Regime> labels);

double median(std::vector<double> values);

} // namespace pinn
