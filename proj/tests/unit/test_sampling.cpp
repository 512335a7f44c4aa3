#include "pinn/sampling.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace pinn;

namespace {

// Every coordinate has exactly one point per stratum.
bool stratified(const Matrix& pts, const Box& box) {
    const auto n = static_cast<std::size_t>(pts.rows());
    for (std::size_t d = 0; d < box.dim(); ++d) {
        std::vector<int> hits(n, 0);
        const double width = (box.hi[d] - box.lo[d]) / static_cast<double>(n);
        for (Eigen::Index i = 0; i < pts.rows(); ++i) {
            const double v = pts(i, static_cast<Eigen::Index>(d));
            if (v < box.lo[d] || v >= box.hi[d]) return false;
            auto k = static_cast<std::size_t>(std::floor((v - box.lo[d]) / width));
            k = std::min(k, n - 1);
            ++hits[k];
        }
        if (std::any_of(hits.begin(), hits.end(), [](int h) { return h != 1; })) return false;
    }
    return true;
}

} // namespace

TEST_CASE("lhs stratification") {
    const Box line{{-1.0}, {7.0}};
    const Box plane{{-5.0, 0.0}, {5.0, 1.5707963267948966}};
    for (std::size_t n : {1, 2, 7, 64, 1000}) {
        CAPTURE(n);
        for (std::uint64_t seed : {1ULL, 42ULL, 1234ULL}) {
            const Matrix a = lhs(n, line, seed);
            CHECK(a.rows() == static_cast<Eigen::Index>(n));
            CHECK(stratified(a, line));
            const Matrix b = lhs(n, plane, seed);
            CHECK(b.cols() == 2);
            CHECK(stratified(b, plane));
        }
    }
}

TEST_CASE("lhs with one point lies in the box") {
    const Matrix p = lhs(1, Box{{-1.0}, {7.0}}, 9);
    CHECK(p(0, 0) >= -1.0);
    CHECK(p(0, 0) < 7.0);
}

TEST_CASE("lhs determinism and seed dependence") {
    const Box line{{-1.0}, {7.0}};
    CHECK(lhs(64, line, 5) == lhs(64, line, 5));
    CHECK(lhs(64, line, 5) != lhs(64, line, 6));
    CHECK(lhs(64, line, 5, streams::kInterior) != lhs(64, line, 5, streams::kObservations));
}

TEST_CASE("lhs errors") {
    CHECK_THROWS(lhs(0, Box{{-1.0}, {7.0}}, 1));
    CHECK_THROWS(lhs(4, Box{{1.0}, {1.0}}, 1));
    CHECK_THROWS(lhs(4, Box{{0.0, 0.0}, {1.0}}, 1));
}

TEST_CASE("linspace") {
    const Vector v = linspace(-1.0, 7.0, 5);
    CHECK(v(0) == -1.0);
    CHECK(v(4) == 7.0);
    CHECK(v(2) == 3.0);
    CHECK(linspace(0.0, 1.0, 1)(0) == 0.5);
}

TEST_CASE("worker seeds") {
    CHECK(worker_seed(1234, 0) == 1234);
    CHECK(worker_seed(1234, 3) == 4234);
    const Box line{{-1.0}, {7.0}};
    std::set<double> seen;
    for (std::uint64_t r = 0; r < 8; ++r) {
        const Matrix p = lhs(128, line, worker_seed(1234, r));
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            CHECK(seen.insert(p(i, 0)).second);
        }
    }
}

TEST_CASE("laplace training set") {
    const auto spec = make_problem(ProblemKind::Laplace1d);
    const auto set = build_training_set(spec, default_counts(spec.kind, 512), 1234);
    CHECK(set.count(Component::F) == 512);
    CHECK(set.count(Component::G) == 2);
    CHECK(set.count(Component::H) == 0);
    CHECK(set.count(Component::U) == 0);
    CHECK(set[Component::G].points(0, 0) == -1.0);
    CHECK(set[Component::G].points(1, 0) == 7.0);
    CHECK(set.collocation_count() == 514);
    for (Component c : {Component::F, Component::G}) {
        CHECK(set[c].weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS(build_training_set(spec, {512, 3, 0, 0}, 1));
    CHECK_THROWS(build_training_set(spec, {512, 2, 0, 4}, 1));
}

TEST_CASE("inverse training set has exact observations") {
    const auto spec = make_problem(ProblemKind::Laplace1dInverse);
    const auto set = build_training_set(spec, default_counts(spec.kind, 256, 64), 7);
    REQUIRE(set.count(Component::U) == 64);
    const auto& u = set[Component::U];
    for (Eigen::Index i = 0; i < u.points.rows(); ++i) {
        CHECK(u.observations(i, 0) == std::sin(3.141592653589793 * u.points(i, 0)));
    }
    CHECK(u.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS(build_training_set(spec, {256, 2, 0, 0}, 1));
}

TEST_CASE("schrodinger training set layout") {
    const auto spec = make_problem(ProblemKind::Schrodinger1d);
    const auto set = build_training_set(spec, default_counts(spec.kind, 2000), 3);
    CHECK(set.count(Component::F) == 2000);
    CHECK(set.count(Component::G) == 200);
    CHECK(set.count(Component::H) == 200);
    const auto& g = set[Component::G].points;
    const auto& h = set[Component::H].points;
    CHECK((g.col(0).array() == -5.0).all());
    CHECK(g(0, 1) == 0.0);
    CHECK(g(199, 1) == spec.domain.hi[1]);
    CHECK((h.col(1).array() == 0.0).all());
    CHECK(h(0, 0) == -5.0);
    CHECK(h(199, 0) == 5.0);
    for (Component c : {Component::F, Component::G, Component::H}) {
        CHECK(set[c].weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS(build_training_set(spec, {100, 0, 10, 0}, 1));
}

TEST_CASE("test set differs from training set with the same counts") {
    const auto spec = make_problem(ProblemKind::Laplace1d);
    const auto counts = default_counts(spec.kind, 128);
    const auto train = build_training_set(spec, counts, 1234);
    const auto test = build_test_set(spec, counts, 1234);
    CHECK(test.count(Component::F) == train.count(Component::F));
    CHECK(test[Component::F].points != train[Component::F].points);
    CHECK(test[Component::F].points ==
          build_training_set(spec, counts, 1234 + kTestSeedOffset)[Component::F].points);
}

TEST_CASE("uniform points stay in the box") {
    const Box plane{{-5.0, 0.0}, {5.0, 1.5}};
    const Matrix p = uniform_points(500, plane, 3);
    CHECK((p.col(0).array() >= -5.0).all());
    CHECK((p.col(0).array() < 5.0).all());
    CHECK((p.col(1).array() >= 0.0).all());
    CHECK((p.col(1).array() < 1.5).all());
}
