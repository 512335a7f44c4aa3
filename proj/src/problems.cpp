#include "pinn/problems.hpp"

#include "pinn/schrodinger.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pinn {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;

Matrix row_vector(double a, double b) {
    Matrix m(1, 2);
    m << a, b;
    return m;
}

// Places two batch x 1 columns side by side using only matmul and add.
ad::NodeId stack_columns(ad::Graph& g, ad::NodeId c0, ad::NodeId c1) {
    return g.add(g.matmul(c0, g.constant(row_vector(1.0, 0.0))),
                 g.matmul(c1, g.constant(row_vector(0.0, 1.0))));
}
} // namespace

std::string_view to_string(ProblemKind kind) {
    switch (kind) {
    case ProblemKind::Laplace1d: return "laplace";
    case ProblemKind::Laplace1dInverse: return "laplace-inverse";
    case ProblemKind::Schrodinger1d: return "schrodinger";
    }
    return "?";
}

ProblemKind parse_problem_kind(std::string_view name) {
    if (name == "laplace" || name == "laplace1d") return ProblemKind::Laplace1d;
    if (name == "laplace-inverse" || name == "laplace1d-inverse") return ProblemKind::Laplace1dInverse;
    if (name == "schrodinger" || name == "schrodinger1d") return ProblemKind::Schrodinger1d;
    throw std::invalid_argument("unknown problem '" + std::string(name) +
                                "' (expected laplace, laplace-inverse or schrodinger)");
}

double Box::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
}

bool Box::contains(std::span<const double> point, double tol) const {
    if (point.size() != lo.size()) return false;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (point[i] < lo[i] - tol || point[i] > hi[i] + tol) return false;
    }
    return true;
}

ProblemSpec make_problem(ProblemKind kind, std::shared_ptr<const ReferenceGrid> reference) {
    ProblemSpec spec;
    spec.kind = kind;
    if (kind == ProblemKind::Schrodinger1d) {
        spec.domain = Box{{-5.0, 0.0}, {5.0, kPi / 2.0}};
        spec.input_dim = 2;
        spec.output_dim = 2;
        spec.reference = std::move(reference);
    } else {
        spec.domain = Box{{-1.0}, {7.0}};
        spec.input_dim = 1;
        spec.output_dim = 1;
    }
    return spec;
}

Matrix ProblemSpec::exact(const Matrix& x) const {
    if (is_laplace()) return exact_laplace(x);
    if (!reference) throw std::logic_error("schrodinger exact solution needs a reference grid");
    Matrix out(x.rows(), 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto v = reference->interpolate(x(i, 0), x(i, 1));
        out(i, 0) = v.real();
        out(i, 1) = v.imag();
    }
    return out;
}

Matrix exact_laplace(const Matrix& x) { return (kPi * x.array()).sin().matrix(); }

double sech(double x) { return 2.0 / (std::exp(x) + std::exp(-x)); }

double laplace_residual_value(double x, double u_xx, double lambda) {
    return -lambda * u_xx - kPi2 * std::sin(kPi * x);
}

ad::NodeId laplace_residual(ad::Graph& graph, ad::NodeId x, ad::NodeId u,
                            std::optional<ad::NodeId> lambda) {
    const ad::NodeId u_x = graph.grad(u, x);
    const ad::NodeId u_xx = graph.grad(u_x, x);
    const Matrix forcing = (kPi2 * (kPi * graph.value(x).array()).sin()).matrix();
    const ad::NodeId term = lambda ? graph.matmul(u_xx, *lambda) : u_xx;
    return graph.sub(graph.neg(term), graph.constant(forcing));
}

ad::NodeId residual_laplace(ad::Graph& graph, const ParamNodes& params, const Matrix& x,
                            ProblemKind kind, Activation activation) {
    if (x.cols() != 1) throw std::invalid_argument("laplace residual expects batch x 1 input");
    const ad::NodeId xv = graph.variable(x);
    const ad::NodeId u = forward(graph, params, xv, activation);
    std::optional<ad::NodeId> lambda;
    if (kind == ProblemKind::Laplace1dInverse) lambda = params.extra(kLambdaName);
    return laplace_residual(graph, xv, u, lambda);
}

SchrodingerResidual schrodinger_residual(ad::Graph& g, ad::NodeId xt, ad::NodeId u) {
    if (g.value(u).cols() != 2) {
        throw std::invalid_argument("schrodinger residual needs a two-channel field (m = 2)");
    }
    const ad::NodeId u0 = g.column(u, 0);
    const ad::NodeId u1 = g.column(u, 1);

    const ad::NodeId grad0 = g.grad(u0, xt);
    const ad::NodeId u0_x = g.column(grad0, 0);
    const ad::NodeId u0_t = g.column(grad0, 1);
    const ad::NodeId u0_xx = g.column(g.grad(u0_x, xt), 0);

    const ad::NodeId grad1 = g.grad(u1, xt);
    const ad::NodeId u1_x = g.column(grad1, 0);
    const ad::NodeId u1_t = g.column(grad1, 1);
    const ad::NodeId u1_xx = g.column(g.grad(u1_x, xt), 0);

    const ad::NodeId mag2 = g.add(g.square(u0), g.square(u1));
    SchrodingerResidual r;
    r.real = g.add(g.add(g.neg(u1_t), g.scale(u0_xx, 0.5)), g.mul(mag2, u0));
    r.imag = g.add(g.add(u0_t, g.scale(u1_xx, 0.5)), g.mul(mag2, u1));
    return r;
}

SchrodingerResidual residual_schrodinger(ad::Graph& graph, const ParamNodes& params,
                                         const Matrix& xt, Activation activation) {
    if (xt.cols() != 2) throw std::invalid_argument("schrodinger residual expects batch x 2 input");
    const ad::NodeId xv = graph.variable(xt);
    const ad::NodeId u = forward(graph, params, xv, activation);
    return schrodinger_residual(graph, xv, u);
}

std::vector<ad::NodeId> boundary_residuals(ad::Graph& g, const ParamNodes& params,
                                           const ProblemSpec& spec, const Matrix& points,
                                           Activation activation) {
    if (points.rows() == 0) throw std::invalid_argument("boundary set is empty");
    if (spec.is_laplace()) {
        return {forward(g, params, g.variable(points), activation)};
    }

    Matrix right = points;
    right.col(0).setConstant(spec.domain.hi[0]);
    const ad::NodeId left_in = g.variable(points);
    const ad::NodeId right_in = g.variable(right);
    const ad::NodeId left_u = forward(g, params, left_in, activation);
    const ad::NodeId right_u = forward(g, params, right_in, activation);
    const ad::NodeId value_gap = g.sub(left_u, right_u);

    ad::NodeId slope_gap[2];
    for (int c = 0; c < 2; ++c) {
        const ad::NodeId left_x = g.column(g.grad(g.column(left_u, c), left_in), 0);
        const ad::NodeId right_x = g.column(g.grad(g.column(right_u, c), right_in), 0);
        slope_gap[c] = g.sub(left_x, right_x);
    }
    return {value_gap, stack_columns(g, slope_gap[0], slope_gap[1])};
}

ad::NodeId initial_residual(ad::Graph& g, const ParamNodes& params, const Matrix& points,
                            Activation activation) {
    if (points.rows() == 0) throw std::invalid_argument("initial-condition set is empty");
    Matrix target = Matrix::Zero(points.rows(), 2);
    for (Eigen::Index i = 0; i < points.rows(); ++i) target(i, 0) = 2.0 * sech(points(i, 0));
    const ad::NodeId u = forward(g, params, g.variable(points), activation);
    return g.sub(u, g.constant(std::move(target)));
}

} // namespace pinn
