#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace pinn::ad {

using Matrix = Eigen::MatrixXd;

// Index of a node inside one Graph. Ids are dense and monotone.
struct NodeId {
    std::uint32_t index = 0;
    auto operator<=>(const NodeId&) const = default;
};

enum class OpKind : std::uint8_t {
    Constant,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    PowI,
    Sin,
    Cos,
    Exp,
    Tanh,
    MatMul,
    AddBias,
    ReduceSum,
    Square,
};

const char* op_name(OpKind kind);

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a node would hold NaN or Inf.
class NonFiniteError : public GraphError {
public:
    using GraphError::GraphError;
};

struct Node {
    OpKind kind = OpKind::Constant;
    std::uint8_t arity = 0;
    NodeId lhs{};
    NodeId rhs{};
    int exponent = 0;           // PowI only
    bool transpose_lhs = false; // MatMul only
    bool transpose_rhs = false; // MatMul only
    Matrix value;

    std::span<const NodeId> parents() const { return {&lhs, arity}; }
};

// Append-only computation graph over dense row-major-batch matrices.
//
// Values are computed eagerly when a node is appended. grad() appends the
// adjoint computation as ordinary nodes, so its results can be
// differentiated again. Rows of a matrix are independent samples; elementwise
// ops need equal shapes, add_bias broadcasts a 1 x C row over the rows and
// reduce_sum collapses the rows into a 1 x C row.
class Graph {
public:
    Graph() { nodes_.reserve(1024); }

    NodeId constant(Matrix value);
    NodeId constant(double value);
    NodeId variable(Matrix value);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId div(NodeId a, NodeId b);
    NodeId neg(NodeId a);
    NodeId powi(NodeId a, int k);
    NodeId sin(NodeId a);
    NodeId cos(NodeId a);
    NodeId exp(NodeId a);
    NodeId tanh(NodeId a);
    NodeId square(NodeId a);
    // op(a) * op(b) where op transposes when the matching flag is set.
    NodeId matmul(NodeId a, NodeId b, bool transpose_a = false, bool transpose_b = false);
    NodeId add_bias(NodeId a, NodeId bias_row);
    NodeId reduce_sum(NodeId a);

    // Composite helpers built from the primitives above.
    NodeId scale(NodeId a, double c);
    NodeId sum_all(NodeId a);
    NodeId column(NodeId a, Eigen::Index col);
    NodeId sech(NodeId a);

    // Reverse-mode derivative of `output` with respect to each id in `wrt`.
    // A non-scalar output is seeded with ones, i.e. the sum of its entries is
    // differentiated. With row-independent samples this yields the per-row
    // input derivatives. Every returned node is freshly appended and can be
    // differentiated again.
    std::vector<NodeId> grad(NodeId output, std::span<const NodeId> wrt);
    NodeId grad(NodeId output, NodeId wrt);

    const Matrix& value(NodeId id) const { return at(id).value; }
    const Node& node(NodeId id) const { return at(id); }
    std::size_t size() const { return nodes_.size(); }
    bool is_variable(NodeId id) const;

    // Recomputes every value from the leaves. Used to check that the stored
    // values are reproducible.
    std::vector<Matrix> replay() const;

private:
    const Node& at(NodeId id) const;
    NodeId push(Node node);
    Matrix evaluate(const Node& node) const;
    NodeId accumulate(NodeId existing, NodeId incoming);
    // 1 - tanh^2, built once per tanh node and shared by every later grad().
    NodeId tanh_derivative(NodeId tanh_node);

    std::vector<Node> nodes_;
    std::unordered_map<std::uint32_t, NodeId> tanh_derivatives_;
};

struct FdCheck {
    double ad = 0.0;
    double fd = 0.0;
    double rel_error = 0.0;
};

// Builds a scalar function of a 1 x 1 variable inside a graph.
using ScalarBuilder = std::function<NodeId(Graph&, NodeId)>;

// Compares the AD derivative of `f` at `x` (order 1 or 2) with a central
// difference of step h. Relative error is |AD - FD| / max(|AD|, floor).
FdCheck finite_difference_check(const ScalarBuilder& f, double x, int order, double h,
                                double floor = 1e-6);

} // namespace pinn::ad
