#pragma once

#include "pinn/autodiff.hpp"
#include "pinn/model.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pinn {

class ReferenceGrid;

enum class ProblemKind { Laplace1d, Laplace1dInverse, Schrodinger1d };

std::string_view to_string(ProblemKind kind);
ProblemKind parse_problem_kind(std::string_view name);

// Axis-aligned box; one entry per input coordinate.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }
    double volume() const;
    bool contains(std::span<const double> point, double tol = 0.0) const;
};

struct ProblemSpec {
    ProblemKind kind = ProblemKind::Laplace1d;
    Box domain;
    int input_dim = 1;
    int output_dim = 1;
    // Reference field for the Schrodinger case; null for Laplace.
    std::shared_ptr<const ReferenceGrid> reference;

    bool is_laplace() const { return kind != ProblemKind::Schrodinger1d; }
    bool is_inverse() const { return kind == ProblemKind::Laplace1dInverse; }
    // Exact solution at each row of `x`, batch x output_dim.
    Matrix exact(const Matrix& x) const;
};

ProblemSpec make_problem(ProblemKind kind, std::shared_ptr<const ReferenceGrid> reference = {});

inline constexpr const char* kLambdaName = "lambda";

// -lambda * u_xx - pi^2 sin(pi x) for a field u given as a node depending on
// the input variable x (batch x 1). lambda is a 1 x 1 node or absent (= 1).
ad::NodeId laplace_residual(ad::Graph& graph, ad::NodeId x, ad::NodeId u,
                            std::optional<ad::NodeId> lambda = std::nullopt);

// Pointwise form of the same residual with u_xx supplied directly.
double laplace_residual_value(double x, double u_xx, double lambda = 1.0);

// Network residual; reads lambda from the trainable extras for the inverse
// variant.
ad::NodeId residual_laplace(ad::Graph& graph, const ParamNodes& params, const Matrix& x,
                            ProblemKind kind = ProblemKind::Laplace1d,
                            Activation activation = Activation::Tanh);

struct SchrodingerResidual {
    ad::NodeId real; // -u1_t + 0.5 u0_xx + |u|^2 u0
    ad::NodeId imag; //  u0_t + 0.5 u1_xx + |u|^2 u1
};

// Residual of i u_t + 0.5 u_xx + |u|^2 u = 0 for a two-channel field
// u = (u0, u1) given as a batch x 2 node of the input variable (x, t).
SchrodingerResidual schrodinger_residual(ad::Graph& graph, ad::NodeId xt, ad::NodeId u);

SchrodingerResidual residual_schrodinger(ad::Graph& graph, const ParamNodes& params,
                                         const Matrix& xt,
                                         Activation activation = Activation::Tanh);

// Boundary and initial-condition residuals, one node per group. Laplace:
// {u(points)}; Schrodinger periodic: {value gap, x-derivative gap}, both
// batch x 2, for left points (-5, t) against their mirror (5, t).
std::vector<ad::NodeId> boundary_residuals(ad::Graph& graph, const ParamNodes& params,
                                           const ProblemSpec& spec, const Matrix& points,
                                           Activation activation = Activation::Tanh);

// Schrodinger initial condition gap u(x, 0) - (2 sech x, 0), batch x 2.
ad::NodeId initial_residual(ad::Graph& graph, const ParamNodes& params, const Matrix& points,
                            Activation activation = Activation::Tanh);

Matrix exact_laplace(const Matrix& x);
double sech(double x);

} // namespace pinn
