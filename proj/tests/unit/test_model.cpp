#include "pinn/model.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace pinn;

namespace {

MlpParams zero_params(const std::vector<int>& dims) {
    MlpParams p = glorot_init(dims, {}, 1);
    std::vector<double> zeros(p.flat_size(), 0.0);
    p.unflatten(zeros);
    return p;
}

double loss_value(const MlpParams& p, const Matrix& x) {
    ad::Graph g;
    const auto r = forward(p, x, Activation::Tanh, g);
    return g.value(g.sum_all(g.square(r.output)))(0, 0);
}

} // namespace

TEST_CASE("parameter counts") {
    CHECK(param_count({1, 50, 50, 50, 50, 1}) == 7801);
    CHECK(param_count({2, 100, 100, 100, 100, 2}) == 30802);
    CHECK(param_count({1, 1}) == 2);
    CHECK_THROWS(param_count({}));
    CHECK_THROWS(param_count({1, 0, 1}));
}

TEST_CASE("glorot initialization") {
    const std::vector<int> dims{1, 50, 50, 50, 50, 1};
    const MlpParams a = glorot_init(dims, {}, 1234);
    const MlpParams b = glorot_init(dims, {}, 1234);
    CHECK(a == b);
    CHECK(a.flatten() == b.flatten());
    CHECK(glorot_init(dims, {}, 1235).flatten() != a.flatten());

    CHECK(glorot_bound(1, 50) == doctest::Approx(0.3430).epsilon(1e-4));
    REQUIRE(a.layers() == 5);
    for (std::size_t l = 0; l < a.layers(); ++l) {
        const double bound = glorot_bound(dims[l], dims[l + 1]);
        CHECK(a.weights[l].rows() == dims[l + 1]);
        CHECK(a.weights[l].cols() == dims[l]);
        CHECK(a.weights[l].cwiseAbs().maxCoeff() <= bound);
        CHECK(a.biases[l].isZero(0.0));
    }
    CHECK(a.weights[0].cwiseAbs().maxCoeff() <= 0.3430);
    CHECK_THROWS(glorot_init({}, {}, 1));
    CHECK_THROWS(glorot_init({1, 0}, {}, 1));
}

TEST_CASE("extras flow through the flat vector") {
    const std::vector<int> dims{1, 50, 50, 50, 50, 1};
    MlpParams p = glorot_init(dims, {{"lambda", 0.0}}, 7);
    const auto flat = p.flatten();
    CHECK(flat.size() == param_count(dims) + 1);
    CHECK(flat.back() == 0.0);
    CHECK(p.extra("lambda") == 0.0);
    CHECK_THROWS(p.extra("mu"));
}

TEST_CASE("flatten and unflatten round-trip") {
    for (const auto& dims : std::vector<std::vector<int>>{{1, 1}, {1, 5, 1}, {2, 3, 4, 2}, {3, 7, 1}}) {
        MlpParams p = glorot_init(dims, {{"a", 1.5}, {"b", -2.0}}, 3);
        CHECK(p.flat_size() == param_count(dims) + 2);
        std::vector<double> v(p.flat_size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(1.0 + static_cast<double>(i));
        p.unflatten(v);
        CHECK(p.flatten() == v);
        CHECK_THROWS(p.unflatten(std::vector<double>(v.size() + 1)));
    }
}

TEST_CASE("forward examples") {
    SUBCASE("zero network outputs zero") {
        const MlpParams p = zero_params({1, 50, 50, 1});
        ad::Graph g;
        Matrix x(3, 1);
        x << -1.0, 0.0, 2.0;
        const auto r = forward(p, x, Activation::Tanh, g);
        CHECK(g.value(r.output).isZero(0.0));
    }
    SUBCASE("affine map without hidden layer") {
        MlpParams p = zero_params({1, 1});
        p.weights[0](0, 0) = 2.0;
        p.biases[0](0) = 3.0;
        ad::Graph g;
        const auto r = forward(p, Matrix::Constant(1, 1, 5.0), Activation::Tanh, g);
        CHECK(g.value(r.output)(0, 0) == 13.0);
    }
    SUBCASE("one hidden layer by hand") {
        MlpParams p = zero_params({1, 2, 1});
        p.weights[0] << 0.7, -1.3;
        p.biases[0] << 0.4, -0.2;
        p.weights[1] << 1.5, 0.5;
        p.biases[1] << 0.1;
        ad::Graph g;
        const auto r = forward(p, Matrix::Zero(1, 1), Activation::Tanh, g);
        const double expected = 1.5 * std::tanh(0.4) + 0.5 * std::tanh(-0.2) + 0.1;
        CHECK(g.value(r.output)(0, 0) == doctest::Approx(expected).epsilon(1e-15));
    }
    SUBCASE("identity activation composes linearly") {
        MlpParams p = zero_params({1, 2, 1});
        p.weights[0] << 2.0, 3.0;
        p.weights[1] << 1.0, -1.0;
        ad::Graph g;
        const auto r = forward(p, Matrix::Constant(1, 1, 4.0), Activation::Identity, g);
        CHECK(g.value(r.output)(0, 0) == -4.0);
    }
    SUBCASE("shape mismatch") {
        const MlpParams p = zero_params({2, 3, 1});
        ad::Graph g;
        CHECK_THROWS(forward(p, Matrix::Zero(4, 1), Activation::Tanh, g));
    }
}

TEST_CASE("forward is deterministic") {
    const MlpParams p = glorot_init({2, 8, 8, 2}, {}, 11);
    Matrix x(5, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::cos(static_cast<double>(i));
    ad::Graph g1, g2;
    const auto a = forward(p, x, Activation::Tanh, g1);
    const auto b = forward(p, x, Activation::Tanh, g2);
    CHECK(g1.value(a.output) == g2.value(b.output));
}

TEST_CASE("weight gradients match finite differences on a [1,5,1] network") {
    const MlpParams p = glorot_init({1, 5, 1}, {}, 5);
    Matrix x(4, 1);
    x << -0.8, -0.1, 0.3, 1.1;
    ad::Graph g;
    const auto r = forward(p, x, Activation::Tanh, g);
    const auto loss = g.sum_all(g.square(r.output));
    const auto vars = r.params.all();
    const auto grads = flatten_gradient(g, p, g.grad(loss, vars));
    const auto flat = p.flatten();
    REQUIRE(grads.size() == flat.size());
    const double h = 1e-6;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        MlpParams plus = p, minus = p;
        auto fp = flat, fm = flat;
        fp[i] += h;
        fm[i] -= h;
        plus.unflatten(fp);
        minus.unflatten(fm);
        const double fd = (loss_value(plus, x) - loss_value(minus, x)) / (2 * h);
        CHECK(std::abs(grads[i] - fd) / std::max(std::abs(fd), 1e-6) < 1e-5);
    }
}

TEST_CASE("parameter snapshot round-trip") {
    const auto path = std::filesystem::temp_directory_path() / "pinn_model_snapshot.bin";
    const MlpParams p = glorot_init({1, 6, 6, 1}, {{"lambda", 0.25}}, 9);
    save_params(p, path);
    const MlpParams q = load_params(path);
    CHECK(q == p);
    std::filesystem::remove(path);
    CHECK_THROWS(load_params(path));
}
