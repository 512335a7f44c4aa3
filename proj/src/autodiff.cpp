#include "pinn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace pinn::ad {

namespace {

std::string shape_of(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Matrix int_power(const Matrix& x, int k) {
    if (k == 0) return Matrix::Ones(x.rows(), x.cols());
    const bool invert = k < 0;
    unsigned n = static_cast<unsigned>(invert ? -k : k);
    return x.unaryExpr([n, invert](double v) {
        double result = 1.0;
        double base = v;
        for (unsigned e = n; e != 0; e >>= 1) {
            if (e & 1u) result *= base;
            base *= base;
        }
        return invert ? 1.0 / result : result;
    });
}

// x * 0 is NaN exactly when x is NaN or +-Inf; this vectorizes where
// allFinite() does not.
bool all_finite(const Matrix& m) {
    return (m.array() * 0.0).sum() == 0.0;
}

void require_same_shape(OpKind kind, const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw GraphError(std::string(op_name(kind)) + ": shape mismatch " + shape_of(a) + " vs " +
                         shape_of(b));
    }
}

// Computes the value of `node` from its parents' values.
Matrix compute(const Node& node, const Matrix* a, const Matrix* b) {
    switch (node.kind) {
    case OpKind::Constant:
    case OpKind::Variable:
        return node.value;
    case OpKind::Add:
        require_same_shape(node.kind, *a, *b);
        return *a + *b;
    case OpKind::Sub:
        require_same_shape(node.kind, *a, *b);
        return *a - *b;
    case OpKind::Mul:
        require_same_shape(node.kind, *a, *b);
        return a->cwiseProduct(*b);
    case OpKind::Div:
        require_same_shape(node.kind, *a, *b);
        return a->cwiseQuotient(*b);
    case OpKind::Neg:
        return -*a;
    case OpKind::PowI:
        return int_power(*a, node.exponent);
    case OpKind::Sin:
        return a->array().sin().matrix();
    case OpKind::Cos:
        return a->array().cos().matrix();
    case OpKind::Exp:
        return a->array().exp().matrix();
    case OpKind::Tanh:
        return a->array().tanh().matrix();
    case OpKind::Square:
        return a->array().square().matrix();
    case OpKind::MatMul: {
        const auto inner_a = node.transpose_lhs ? a->rows() : a->cols();
        const auto inner_b = node.transpose_rhs ? b->cols() : b->rows();
        if (inner_a != inner_b) {
            throw GraphError("matmul: inner dimensions differ (" + shape_of(*a) +
                             (node.transpose_lhs ? "^T" : "") + " * " + shape_of(*b) +
                             (node.transpose_rhs ? "^T" : "") + ")");
        }
        Matrix r;
        if (!node.transpose_lhs && !node.transpose_rhs) r.noalias() = *a * *b;
        else if (node.transpose_lhs && !node.transpose_rhs) r.noalias() = a->transpose() * *b;
        else if (!node.transpose_lhs) r.noalias() = *a * b->transpose();
        else r.noalias() = a->transpose() * b->transpose();
        return r;
    }
    case OpKind::AddBias:
        if (b->rows() != 1 || b->cols() != a->cols()) {
            throw GraphError("add_bias: bias " + shape_of(*b) + " does not match " + shape_of(*a));
        }
        return a->rowwise() + b->row(0);
    case OpKind::ReduceSum:
        return a->colwise().sum();
    }
    throw GraphError("unknown op");
}

} // namespace

const char* op_name(OpKind kind) {
    switch (kind) {
    case OpKind::Constant: return "constant";
    case OpKind::Variable: return "variable";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Div: return "div";
    case OpKind::Neg: return "neg";
    case OpKind::PowI: return "powi";
    case OpKind::Sin: return "sin";
    case OpKind::Cos: return "cos";
    case OpKind::Exp: return "exp";
    case OpKind::Tanh: return "tanh";
    case OpKind::MatMul: return "matmul";
    case OpKind::AddBias: return "add_bias";
    case OpKind::ReduceSum: return "reduce_sum";
    case OpKind::Square: return "square";
    }
    return "?";
}

const Node& Graph::at(NodeId id) const {
    if (id.index >= nodes_.size()) {
        throw GraphError("unknown node id " + std::to_string(id.index));
    }
    return nodes_[id.index];
}

bool Graph::is_variable(NodeId id) const { return at(id).kind == OpKind::Variable; }

NodeId Graph::push(Node node) {
    if (node.arity > 0) {
        const Matrix* a = &at(node.lhs).value;
        const Matrix* b = node.arity > 1 ? &at(node.rhs).value : nullptr;
        node.value = compute(node, a, b);
    }
    if (!all_finite(node.value)) {
        throw NonFiniteError(std::string(op_name(node.kind)) + ": non-finite value at node " +
                             std::to_string(nodes_.size()));
    }
    nodes_.push_back(std::move(node));
    return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId Graph::constant(Matrix value) {
    Node n;
    n.kind = OpKind::Constant;
    n.value = std::move(value);
    return push(std::move(n));
}

NodeId Graph::constant(double value) { return constant(Matrix::Constant(1, 1, value)); }

NodeId Graph::variable(Matrix value) {
    Node n;
    n.kind = OpKind::Variable;
    n.value = std::move(value);
    return push(std::move(n));
}

namespace {
Node unary(OpKind kind, NodeId a) {
    Node n;
    n.kind = kind;
    n.arity = 1;
    n.lhs = a;
    return n;
}
Node binary(OpKind kind, NodeId a, NodeId b) {
    Node n;
    n.kind = kind;
    n.arity = 2;
    n.lhs = a;
    n.rhs = b;
    return n;
}
} // namespace

NodeId Graph::add(NodeId a, NodeId b) { return push(binary(OpKind::Add, a, b)); }
NodeId Graph::sub(NodeId a, NodeId b) { return push(binary(OpKind::Sub, a, b)); }
NodeId Graph::mul(NodeId a, NodeId b) { return push(binary(OpKind::Mul, a, b)); }
NodeId Graph::div(NodeId a, NodeId b) { return push(binary(OpKind::Div, a, b)); }
NodeId Graph::neg(NodeId a) { return push(unary(OpKind::Neg, a)); }
NodeId Graph::sin(NodeId a) { return push(unary(OpKind::Sin, a)); }
NodeId Graph::cos(NodeId a) { return push(unary(OpKind::Cos, a)); }
NodeId Graph::exp(NodeId a) { return push(unary(OpKind::Exp, a)); }
NodeId Graph::tanh(NodeId a) { return push(unary(OpKind::Tanh, a)); }
NodeId Graph::square(NodeId a) { return push(unary(OpKind::Square, a)); }
NodeId Graph::reduce_sum(NodeId a) { return push(unary(OpKind::ReduceSum, a)); }
NodeId Graph::add_bias(NodeId a, NodeId bias_row) {
    return push(binary(OpKind::AddBias, a, bias_row));
}

NodeId Graph::powi(NodeId a, int k) {
    Node n = unary(OpKind::PowI, a);
    n.exponent = k;
    return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b, bool transpose_a, bool transpose_b) {
    Node n = binary(OpKind::MatMul, a, b);
    n.transpose_lhs = transpose_a;
    n.transpose_rhs = transpose_b;
    return push(std::move(n));
}

NodeId Graph::scale(NodeId a, double c) {
    const Matrix& v = value(a);
    return mul(a, constant(Matrix::Constant(v.rows(), v.cols(), c)));
}

NodeId Graph::sum_all(NodeId a) {
    NodeId rows = reduce_sum(a);
    const auto cols = value(rows).cols();
    if (cols == 1) return rows;
    return matmul(rows, constant(Matrix::Ones(cols, 1)));
}

NodeId Graph::column(NodeId a, Eigen::Index col) {
    const auto cols = value(a).cols();
    if (col < 0 || col >= cols) {
        throw GraphError("column: index " + std::to_string(col) + " out of range");
    }
    Matrix selector = Matrix::Zero(cols, 1);
    selector(col, 0) = 1.0;
    return matmul(a, constant(std::move(selector)));
}

NodeId Graph::sech(NodeId a) {
    NodeId denom = add(exp(a), exp(neg(a)));
    const Matrix& v = value(denom);
    return div(constant(Matrix::Constant(v.rows(), v.cols(), 2.0)), denom);
}

NodeId Graph::tanh_derivative(NodeId tanh_node) {
    if (auto it = tanh_derivatives_.find(tanh_node.index); it != tanh_derivatives_.end()) {
        return it->second;
    }
    const Matrix& y = value(tanh_node);
    NodeId d = sub(constant(Matrix::Ones(y.rows(), y.cols())), square(tanh_node));
    tanh_derivatives_.emplace(tanh_node.index, d);
    return d;
}

NodeId Graph::accumulate(NodeId existing, NodeId incoming) {
    const Matrix& a = value(existing);
    const Matrix& b = value(incoming);
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw GraphError("adjoint accumulation: shape mismatch " + shape_of(a) + " vs " +
                         shape_of(b));
    }
    return add(existing, incoming);
}

NodeId Graph::grad(NodeId output, NodeId wrt) {
    const NodeId ids[] = {wrt};
    return grad(output, ids).front();
}

std::vector<NodeId> Graph::grad(NodeId output, std::span<const NodeId> wrt) {
    at(output);
    for (NodeId w : wrt) {
        if (!is_variable(w)) {
            throw GraphError("grad: node " + std::to_string(w.index) + " is not a variable");
        }
    }
    const std::size_t end = output.index + 1;

    // Nodes on a path from some wrt variable.
    std::vector<char> depends(end, 0);
    for (NodeId w : wrt) {
        if (w.index < end) depends[w.index] = 1;
    }
    for (std::size_t i = 0; i < end; ++i) {
        const Node& n = nodes_[i];
        for (NodeId p : n.parents()) {
            if (depends[p.index]) depends[i] = 1;
        }
    }

    // Contributions are summed in ascending consumer order, so the adjoint of
    // a sum of independent subgraphs is the sum of their adjoints.
    std::vector<std::vector<std::pair<std::size_t, NodeId>>> pending(end);
    std::size_t consumer = end;
    if (depends[output.index]) {
        const Matrix& out = value(output);
        pending[output.index].emplace_back(end, constant(Matrix::Ones(out.rows(), out.cols())));
    }

    auto contribute = [&](NodeId parent, NodeId delta) {
        pending[parent.index].emplace_back(consumer, delta);
    };
    auto resolve = [&](std::size_t idx) -> std::optional<NodeId> {
        auto& parts = pending[idx];
        if (parts.empty()) return std::nullopt;
        std::stable_sort(parts.begin(), parts.end(),
                         [](const auto& x, const auto& y) { return x.first < y.first; });
        NodeId sum = parts.front().second;
        for (std::size_t j = 1; j < parts.size(); ++j) sum = accumulate(sum, parts[j].second);
        parts.clear();
        return sum;
    };

    std::vector<std::optional<NodeId>> adjoint(end);
    for (std::size_t i = end; i-- > 0;) {
        if (!depends[i]) continue;
        adjoint[i] = resolve(i);
        if (!adjoint[i]) continue;
        consumer = i;
        // Copy what we need: pushing may reallocate nodes_.
        const OpKind kind = nodes_[i].kind;
        const NodeId a = nodes_[i].lhs;
        const NodeId b = nodes_[i].rhs;
        const int k = nodes_[i].exponent;
        const bool ta = nodes_[i].transpose_lhs;
        const bool tb = nodes_[i].transpose_rhs;
        const NodeId self{static_cast<std::uint32_t>(i)};
        const NodeId g = *adjoint[i];
        const bool da = nodes_[i].arity > 0 && depends[a.index];
        const bool db = nodes_[i].arity > 1 && depends[b.index];

        switch (kind) {
        case OpKind::Constant:
        case OpKind::Variable:
            break;
        case OpKind::Add:
            if (da) contribute(a, g);
            if (db) contribute(b, g);
            break;
        case OpKind::Sub:
            if (da) contribute(a, g);
            if (db) contribute(b, neg(g));
            break;
        case OpKind::Mul:
            if (da) contribute(a, mul(g, b));
            if (db) contribute(b, mul(g, a));
            break;
        case OpKind::Div:
            if (da) contribute(a, div(g, b));
            if (db) contribute(b, neg(div(mul(g, self), b)));
            break;
        case OpKind::Neg:
            if (da) contribute(a, neg(g));
            break;
        case OpKind::PowI:
            if (!da || k == 0) break;
            if (k == 1) contribute(a, g);
            else contribute(a, mul(g, scale(powi(a, k - 1), static_cast<double>(k))));
            break;
        case OpKind::Sin:
            if (da) contribute(a, mul(g, cos(a)));
            break;
        case OpKind::Cos:
            if (da) contribute(a, neg(mul(g, sin(a))));
            break;
        case OpKind::Exp:
            if (da) contribute(a, mul(g, self));
            break;
        case OpKind::Tanh:
            if (da) contribute(a, mul(g, tanh_derivative(self)));
            break;
        case OpKind::Square:
            if (da) contribute(a, mul(g, add(a, a)));
            break;
        case OpKind::MatMul:
            // C = op(A) op(B): d op(A) = G op(B)^T, d op(B) = op(A)^T G.
            if (da) contribute(a, ta ? matmul(b, g, tb, true) : matmul(g, b, false, !tb));
            if (db) contribute(b, tb ? matmul(g, a, true, ta) : matmul(a, g, !ta, false));
            break;
        case OpKind::AddBias:
            if (da) contribute(a, g);
            if (db) contribute(b, reduce_sum(g));
            break;
        case OpKind::ReduceSum:
            if (da) {
                const Matrix& x = value(a);
                contribute(a, add_bias(constant(Matrix::Zero(x.rows(), x.cols())), g));
            }
            break;
        }
    }

    std::vector<NodeId> result;
    result.reserve(wrt.size());
    for (NodeId w : wrt) {
        if (w.index < end && adjoint[w.index]) {
            result.push_back(*adjoint[w.index]);
        } else {
            const Matrix& x = value(w);
            result.push_back(constant(Matrix::Zero(x.rows(), x.cols())));
        }
    }
    return result;
}

std::vector<Matrix> Graph::replay() const {
    std::vector<Matrix> values;
    values.reserve(nodes_.size());
    for (const Node& n : nodes_) {
        const Matrix* a = n.arity > 0 ? &values[n.lhs.index] : nullptr;
        const Matrix* b = n.arity > 1 ? &values[n.rhs.index] : nullptr;
        values.push_back(compute(n, a, b));
    }
    return values;
}

FdCheck finite_difference_check(const ScalarBuilder& f, double x, int order, double h,
                                double floor) {
    if (order != 1 && order != 2) throw std::invalid_argument("order must be 1 or 2");
    if (!(h > 0.0)) throw std::invalid_argument("step h must be positive");

    auto eval = [&f](double at) {
        Graph g;
        NodeId out = f(g, g.variable(Matrix::Constant(1, 1, at)));
        if (g.value(out).size() != 1) throw GraphError("finite_difference_check: non-scalar output");
        return g.value(out)(0, 0);
    };

    Graph g;
    NodeId xv = g.variable(Matrix::Constant(1, 1, x));
    NodeId y = f(g, xv);
    NodeId d = g.grad(y, xv);
    if (order == 2) d = g.grad(d, xv);

    FdCheck check;
    check.ad = g.value(d)(0, 0);
    const double plus = eval(x + h);
    const double minus = eval(x - h);
    if (order == 1) {
        check.fd = (plus - minus) / (2.0 * h);
    } else {
        check.fd = (plus - 2.0 * g.value(y)(0, 0) + minus) / (h * h);
    }
    if (!std::isfinite(check.fd)) throw NonFiniteError("finite_difference_check: non-finite FD");
    check.rel_error = std::abs(check.ad - check.fd) / std::max(std::abs(check.ad), floor);
    return check;
}

} // namespace pinn::ad
