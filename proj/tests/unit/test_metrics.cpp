#include "pinn/harness.hpp"
#include "pinn/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pinn;

namespace {

constexpr double kPi = std::numbers::pi;

// Hidden weights zero, output bias c: u == c everywhere.
MlpParams constant_net(const std::vector<int>& dims, double c) {
    MlpParams p = glorot_init(dims, {}, 1);
    std::vector<double> flat(p.flat_size(), 0.0);
    p.unflatten(flat);
    p.biases.back().setConstant(c);
    return p;
}

TrainingSet laplace_set(std::initializer_list<double> xs) {
    TrainingSet set;
    auto& f = set[Component::F];
    f.points = Matrix(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double x : xs) f.points(i++, 0) = x;
    f.weights = Vector::Constant(f.points.rows(), 1.0 / static_cast<double>(xs.size()));
    auto& g = set[Component::G];
    g.points = Matrix(2, 1);
    g.points << -1.0, 7.0;
    g.weights = Vector::Constant(2, 0.5);
    set[Component::H].points = Matrix(0, 1);
    set[Component::U].points = Matrix(0, 1);
    return set;
}

} // namespace

TEST_CASE("loss of the zero network on four known points") {
    const auto spec = make_problem(ProblemKind::Laplace1d);
    const auto set = laplace_set({0.5, 0.25, 1.5, -0.75});
    const auto rep = assemble_loss(constant_net({1, 4, 1}, 0.0), spec, set);
    double hand = 0.0;
    for (double x : {0.5, 0.25, 1.5, -0.75}) hand += std::pow(kPi, 4) * std::pow(std::sin(kPi * x), 2);
    hand /= 4.0;
    CHECK(rep.components[0] == doctest::Approx(hand).epsilon(1e-14));
    CHECK(rep.components[1] == 0.0);
    CHECK(rep.total == doctest::Approx(hand).epsilon(1e-14));
    CHECK(rep.eps_train_pde == doctest::Approx(std::sqrt(hand)).epsilon(1e-14));
}

TEST_CASE("single point with residual 3 gives loss 9") {
    const auto spec = make_problem(ProblemKind::Laplace1d);
    TrainingSet set = laplace_set({0.5});
    set[Component::G].points = Matrix::Constant(1, 1, -1.0);
    set[Component::G].weights = Vector::Constant(1, 1.0);
    const auto rep = assemble_loss(constant_net({1, 3, 1}, 3.0), spec, set, {0.0, 1.0, 1.0, 1.0});
    CHECK(rep.components[1] == 9.0);
    CHECK(rep.total == 9.0);
}

TEST_CASE("all residuals zero gives zero loss") {
    auto spec = make_problem(ProblemKind::Laplace1d);
    TrainingSet set = laplace_set({0.0, 1.0, 2.0, 3.0});
    const auto rep = assemble_loss(constant_net({1, 3, 1}, 0.0), spec, set);
    CHECK(rep.components[0] < 1e-28);
    CHECK(rep.components[1] == 0.0);
}

TEST_CASE("unit weights equal the mean of squared residuals") {
    const auto spec = make_problem(ProblemKind::Laplace1d);
    const auto set = build_training_set(spec, default_counts(spec.kind, 64), 11);
    const MlpParams p = glorot_init({1, 10, 10, 1}, {}, 2);
    const auto rep = assemble_loss(p, spec, set);
    ad::Graph g;
    const auto r = residual_laplace(g, register_params(g, p), set[Component::F].points);
    const double mean = g.value(r).array().square().mean();
    CHECK(rep.components[0] == doctest::Approx(mean).epsilon(1e-13));
    const Matrix ub = predict(p, set[Component::G].points, Activation::Tanh);
    CHECK(rep.components[1] == doctest::Approx(ub.array().square().mean()).epsilon(1e-13));
    CHECK(rep.total == doctest::Approx(rep.components[0] + rep.components[1]).epsilon(1e-14));
}

TEST_CASE("weighted total and validation") {
    const auto spec = make_problem(ProblemKind::Laplace1d);
    const auto set = build_training_set(spec, default_counts(spec.kind, 32), 3);
    const MlpParams p = glorot_init({1, 8, 1}, {}, 4);
    const auto unit = assemble_loss(p, spec, set);
    const auto w = assemble_loss(p, spec, set, {2.0, 0.5, 1.0, 1.0});
    CHECK(w.total == doctest::Approx(2.0 * unit.components[0] + 0.5 * unit.components[1]));
    for (double c : w.components) CHECK(c >= 0.0);
    CHECK_THROWS(assemble_loss(p, spec, set, {-1.0, 1.0, 1.0, 1.0}));

    auto test = assemble_loss(p, spec, build_test_set(spec, default_counts(spec.kind, 32), 3));
    auto train = unit;
    attach_validation(train, test);
    CHECK(train.eps_val_pde == test.eps_train_pde);
    CHECK(train.gap_rel == doctest::Approx(std::abs(test.total - unit.total) / unit.total));
}

TEST_CASE("empty component with nonzero weight is an error") {
    const auto spec = make_problem(ProblemKind::Laplace1dInverse);
    auto set = build_training_set(spec, default_counts(spec.kind, 16, 8), 1);
    set[Component::U].points = Matrix(0, 1);
    set[Component::U].weights = Vector(0);
    set[Component::U].observations = Matrix(0, 1);
    const MlpParams p = glorot_init({1, 4, 1}, {{kLambdaName, 0.0}}, 1);
    CHECK_THROWS(assemble_loss(p, spec, set));
    CHECK_NOTHROW(assemble_loss(p, spec, set, {1.0, 1.0, 1.0, 0.0}));
}

TEST_CASE("observation loss") {
    const auto spec = make_problem(ProblemKind::Laplace1dInverse);
    const auto set = build_training_set(spec, default_counts(spec.kind, 16, 8), 1);
    MlpParams p = constant_net({1, 4, 1}, 0.0);
    p.extras = {{kLambdaName, 1.0}};
    const auto rep = assemble_loss(p, spec, set);
    const Matrix& obs = set[Component::U].observations;
    CHECK(rep.components[3] == doctest::Approx(obs.array().square().mean()).epsilon(1e-14));
    CHECK(rep.eps_train_obs == doctest::Approx(std::sqrt(rep.components[3])).epsilon(1e-14));
}

TEST_CASE("relative l2 error") {
    Matrix e(3, 1);
    e << 1.0, -2.0, 0.5;
    CHECK(relative_l2_error(e, e) == 0.0);
    CHECK(relative_l2_error(Matrix::Zero(3, 1), e) == 1.0);
    CHECK(relative_l2_error(2.0 * e, e) == 1.0);
    CHECK_THROWS(relative_l2_error(e, Matrix::Zero(3, 1)));
    CHECK_THROWS(relative_l2_error(Matrix::Zero(2, 1), e));
}

TEST_CASE("density") {
    CHECK(rho(64, 8, 1) == 8.0);
    CHECK(rho(350, 10.0 * kPi / 2.0, 2) == doctest::Approx(4.72).epsilon(1e-3));
    CHECK(rho(8, 8, 1) == 1.0);
    CHECK(rho(15.7, 15.7, 2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS(rho(0, 8, 1));
    CHECK_THROWS(rho(8, 0, 1));
    CHECK_THROWS(rho(8, 8, 0));
}

TEST_CASE("points per second") {
    CHECK(pointsec(500, 64, 4.08) == doctest::Approx(7843.14).epsilon(1e-5));
    CHECK(pointsec(500, 512, 4.19) == doctest::Approx(61097.85).epsilon(1e-5));
    CHECK(pointsec(0, 512, 1.0) == 0.0);
    CHECK_THROWS(pointsec(500, 64, 0.0));
    CHECK_THROWS(pointsec(500, 64, -1.0));
}

TEST_CASE("generalization bound examples") {
    BoundInputs b;
    b.n_hat = 100;
    CHECK(generalization_bound(b, 0.01, 0.0) == doctest::Approx(0.11).epsilon(1e-14));

    b.c_pde = 3.0;
    b.c_quad_y = 4.0;
    b.alpha = 2.0;
    CHECK(generalization_bound(b, 0.2, 0.7) == doctest::Approx(3.0 * (0.2 + 2.0 / 100.0)));

    BoundInputs z;
    z.c_quad_y = 0.0;
    z.c_quad_x = 0.0;
    z.omega_u = 3.0;
    z.mu_hat = 0.4;
    z.n_hat = 10;
    z.m = 5;
    CHECK(generalization_bound(z, 0.0, 0.0) == doctest::Approx(3.0 * 0.4 / 4.0).epsilon(1e-15));

    BoundInputs bad;
    bad.n_hat = 0;
    CHECK_THROWS(generalization_bound(bad, 0.1, 0.0));
    bad.n_hat = 10;
    bad.omega_u = 1.0;
    bad.m = 0;
    CHECK_THROWS(generalization_bound(bad, 0.1, 0.0));
    bad.m = 3;
    bad.alpha = 0.0;
    CHECK_THROWS(generalization_bound(bad, 0.1, 0.0));
}

TEST_CASE("generalization bound monotonicity") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        BoundInputs b;
        b.c_pde = u(rng);
        b.c_quad_y = u(rng);
        b.c_quad_x = u(rng);
        b.alpha = 0.1 + u(rng);
        b.beta = 0.1 + u(rng);
        b.omega_u = u(rng);
        b.mu_hat = u(rng);
        b.n_hat = 1.0 + std::floor(100 * u(rng));
        b.m = 1.0 + std::floor(100 * u(rng));
        const double e1 = u(rng), e2 = u(rng);
        const double base = generalization_bound(b, e1, e2);
        const double tol = 1e-14 * (1.0 + base);

        auto more_n = b;
        more_n.n_hat *= 2;
        CHECK(generalization_bound(more_n, e1, e2) <= base + tol);
        auto more_m = b;
        more_m.m *= 2;
        CHECK(generalization_bound(more_m, e1, e2) <= base + tol);
        auto more_mu = b;
        more_mu.mu_hat += 0.5;
        CHECK(generalization_bound(more_mu, e1, e2) >= base - tol);
        CHECK(generalization_bound(b, e1 + 0.1, e2) >= base - tol);
        CHECK(generalization_bound(b, e1, e2 + 0.1) >= base - tol);
    }
}

TEST_CASE("gap bound") {
    CHECK(gap_bound(1, 1, 4) == 1.0);
    CHECK(gap_bound(0, 1, 9) == 0.0);
    CHECK(gap_bound(4, 2, 100) == doctest::Approx(0.04).epsilon(1e-15));
    CHECK_THROWS(gap_bound(1, 1, 0));
    CHECK(gap_bound(1, 1, 400) < gap_bound(1, 1, 100));
}

TEST_CASE("relative gap") {
    CHECK(relative_gap(2.0, 3.0) == 0.5);
    CHECK(relative_gap(2.0, 1.0) == 0.5);
    CHECK(std::isfinite(relative_gap(0.0, 1.0)));
}

TEST_CASE("regime classification") {
    SUBCASE("rule application") {
        std::vector<SweepPoint> sweep = {
            {8, {0.9, 0.95}, {0.5, 0.6}},
            {64, {0.1, 0.12}, {0.05, 0.04}},
            {512, {0.011, 0.01}, {1e-5, 1e-5}},
        };
        const auto labels = classify_regime(sweep);
        CHECK(labels[0] == Regime::PreAsymptotic);
        CHECK(labels[1] == Regime::Transition);
        CHECK(labels[2] == Regime::Permanent);
        CHECK(regime_violations(labels).empty());
    }
    SUBCASE("gap 1e-5 with error ratio 1.1 is permanent") {
        std::vector<SweepPoint> sweep = {{400, {0.011}, {1e-5}}, {512, {0.01}, {1e-5}}};
        CHECK(classify_regime(sweep)[0] == Regime::Permanent);
    }
    SUBCASE("error ratio above the factor is transition") {
        std::vector<SweepPoint> sweep = {{400, {0.05}, {1e-5}}, {512, {0.01}, {1e-5}}};
        CHECK(classify_regime(sweep)[0] == Regime::Transition);
    }
    SUBCASE("thresholds are configurable") {
        std::vector<SweepPoint> sweep = {{400, {0.5}, {1e-3}}};
        CHECK(classify_regime(sweep)[0] == Regime::PreAsymptotic);
        CHECK(classify_regime(sweep, RegimeThresholds{1e-2, 0.6, 2.0})[0] == Regime::Permanent);
    }
    CHECK_THROWS(classify_regime(std::vector<SweepPoint>{}));
    CHECK(regime_violations(std::vector<Regime>{Regime::Permanent, Regime::Transition}) ==
          std::vector<std::size_t>{1});
    CHECK(parse_regime(to_string(Regime::Transition)) == Regime::Transition);
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("train-test gap decays at the Monte-Carlo rate") {
    const auto spec = make_problem(ProblemKind::Laplace1d);
    const MlpParams p = glorot_init({1, 10, 10, 1}, {}, 17);
    const auto rate = train_test_gap_study(p, spec, {64, 256, 1024, 4096}, 32, 5);
    CAPTURE(rate.slope);
    CHECK(rate.slope >= -0.8);
    CHECK(rate.slope <= -0.2);
}
