#include "pinn/parallel.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pinn;

namespace {

std::vector<std::vector<double>> random_buffers(std::size_t size, std::size_t len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<std::vector<double>> b(size, std::vector<double>(len));
    for (auto& v : b)
        for (auto& x : v) x = n(rng);
    return b;
}

// Max-norm relative deviation ||a - b||_inf / ||b||_inf.
double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return diff / std::max(scale, 1e-300);
}

TrainConfig small_config() {
    TrainConfig c;
    c.width = 10;
    c.depth = 2;
    c.iterations = 30;
    c.cadence = 1;
    c.lr = 1e-3;
    c.counts = default_counts(ProblemKind::Laplace1d, 64);
    return c;
}

} // namespace

TEST_CASE("segment bounds") {
    const auto s = segment_bounds(10, 4);
    REQUIRE(s.size() == 4);
    CHECK(s[0] == std::pair<std::size_t, std::size_t>{0, 3});
    CHECK(s[1] == std::pair<std::size_t, std::size_t>{3, 6});
    CHECK(s[2] == std::pair<std::size_t, std::size_t>{6, 8});
    CHECK(s[3] == std::pair<std::size_t, std::size_t>{8, 10});
    const auto t = segment_bounds(1, 3);
    CHECK(t[0].second - t[0].first == 1);
    CHECK(t[2].second - t[2].first == 0);
}

TEST_CASE("ring allreduce matches serial summation with exact message counts") {
    for (std::size_t size = 2; size <= 8; ++size) {
        for (std::size_t len : {1, 7, 1000, 7801}) {
            CAPTURE(size);
            CAPTURE(len);
            auto buffers = random_buffers(size, len, size * 131 + len);
            std::vector<double> expected(len, 0.0);
            for (const auto& b : buffers)
                for (std::size_t i = 0; i < len; ++i) expected[i] += b[i];
            const auto counts = ring_allreduce(buffers);
            for (const auto& b : buffers) CHECK(max_rel(b, expected) <= 1e-12);
            for (std::size_t r = 0; r < size; ++r) {
                CHECK(counts.sends[r] == 2 * (size - 1));
                CHECK(counts.receives[r] == 2 * (size - 1));
            }
        }
    }
}

TEST_CASE("allreduce trivial cases") {
    std::vector<std::vector<double>> one = {{1.0, 2.0, 3.0}};
    const auto c = ring_allreduce(one);
    CHECK(one[0] == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(c.sends[0] == 0);

    std::vector<std::vector<double>> same(5, std::vector<double>{0.5, -1.25, 3.0});
    ring_allreduce(same);
    for (const auto& b : same) CHECK(b == std::vector<double>{2.5, -6.25, 15.0});

    auto mx = random_buffers(4, 33, 2);
    std::vector<double> expect(33, -INFINITY);
    for (const auto& b : mx)
        for (std::size_t i = 0; i < 33; ++i) expect[i] = std::max(expect[i], b[i]);
    ring_allreduce(mx, ReduceOp::Max);
    for (const auto& b : mx) CHECK(b == expect);
}

TEST_CASE("allreduce is invariant under ring rotation") {
    const std::size_t size = 6;
    const auto base = random_buffers(size, 1001, 77);
    auto a = base;
    ring_allreduce(a);
    for (std::size_t k = 1; k < size; ++k) {
        std::vector<std::vector<double>> rotated(size);
        for (std::size_t r = 0; r < size; ++r) rotated[(r + k) % size] = base[r];
        ring_allreduce(rotated);
        CHECK(max_rel(rotated[0], a[0]) <= 1e-12);
    }
}

TEST_CASE("allreduce length mismatch is an error") {
    std::vector<std::vector<double>> b = {{1.0, 2.0}, {1.0}};
    CHECK_THROWS(ring_allreduce(b));
}

TEST_CASE("a failing rank aborts the ring") {
    CHECK_THROWS_WITH(run_ranks(4,
                                [](Communicator& c) {
                                    if (c.rank() == 2) throw std::runtime_error("rank 2 failed");
                                    std::vector<double> v(10, 1.0);
                                    c.allreduce(v);
                                }),
                      "rank 2 failed");
}

TEST_CASE("broadcast of parameters and optimizer state") {
    for (std::size_t size : {1, 2, 8}) {
        std::vector<MlpParams> params;
        std::vector<AdamState> states;
        for (std::size_t r = 0; r < size; ++r) {
            params.push_back(glorot_init({1, 20, 20, 1}, {{kLambdaName, double(r)}}, 100 + r));
            AdamState s(params.back().flat_size(), 1e-4 * double(r + 1));
            std::vector<double> flat = params.back().flatten();
            std::vector<double> g(flat.size(), double(r) + 0.5);
            adam_step(flat, g, s);
            states.push_back(s);
        }
        const MlpParams p0 = params[0];
        const AdamState s0 = states[0];
        broadcast_params(params, states);
        for (std::size_t r = 0; r < size; ++r) {
            CHECK(params[r] == p0);
            CHECK(states[r] == s0);
        }
    }
}

TEST_CASE("sharding") {
    const auto spec = make_problem(ProblemKind::Laplace1d);
    SUBCASE("weak") {
        const auto counts = default_counts(spec.kind, 64);
        const auto shards = shard(ScaleMode::Weak, spec, counts, 8, 1234);
        REQUIRE(shards.size() == 8);
        CHECK(global_counts(counts, ScaleMode::Weak, 8).n_f == 512);
        for (std::size_t r = 0; r < 8; ++r) {
            CHECK(shards[r].count(Component::F) == 64);
            CHECK(shards[r][Component::F].points ==
                  build_training_set(spec, counts, worker_seed(1234, r))[Component::F].points);
        }
        const auto solo = shard(ScaleMode::Weak, spec, counts, 1, 1234);
        CHECK(solo[0][Component::F].points ==
              build_training_set(spec, counts, 1234)[Component::F].points);
    }
    SUBCASE("strong") {
        const auto counts = default_counts(spec.kind, 512);
        const auto full = build_training_set(spec, counts, 1234);
        const auto shards = shard(ScaleMode::Strong, spec, counts, 4, 1234);
        REQUIRE(shards.size() == 4);
        CHECK(global_counts(counts, ScaleMode::Strong, 4).n_f == 512);
        for (std::size_t r = 0; r < 4; ++r) {
            const auto& f = shards[r][Component::F];
            CHECK(f.size() == 128);
            CHECK(f.points == full[Component::F].points.middleRows(static_cast<Eigen::Index>(128 * r), 128));
            CHECK(f.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK_THROWS(shard(ScaleMode::Strong, spec, default_counts(spec.kind, 510), 4, 1234));
    }
}

TEST_CASE("mean of shard gradients equals the global gradient") {
    const auto spec = make_problem(ProblemKind::Laplace1dInverse);
    const auto counts = default_counts(spec.kind, 512, 64);
    const auto full = build_training_set(spec, counts, 9);
    const MlpParams p = glorot_init({1, 20, 20, 1}, {{kLambdaName, 0.3}}, 9);
    const auto global = loss_and_gradient(p, spec, full, kUnitWeights, Activation::Tanh);
    const auto shards = shard_strong(full, 4);
    std::vector<double> mean(global.gradient.size(), 0.0);
    double loss = 0.0;
    for (const auto& s : shards) {
        const auto local = loss_and_gradient(p, spec, s, kUnitWeights, Activation::Tanh);
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += local.gradient[i] / 4.0;
        loss += local.report.total / 4.0;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        num += (mean[i] - global.gradient[i]) * (mean[i] - global.gradient[i]);
        den += global.gradient[i] * global.gradient[i];
    }
    CHECK(std::sqrt(num / den) <= 1e-10);
    CHECK(loss == doctest::Approx(global.report.total).epsilon(1e-12));
}

TEST_CASE("size 1 reproduces the serial trainer bitwise") {
    const TrainConfig c = small_config();
    const auto serial = train_serial(c);
    const auto dist = train_distributed(c, ScaleMode::Weak, 1);
    REQUIRE(dist.size() == 1);
    CHECK(dist[0].params == serial.params);
    REQUIRE(dist[0].history.size() == serial.history.size());
    for (std::size_t i = 0; i < serial.history.size(); ++i) {
        CHECK(dist[0].history[i].loss_train == serial.history[i].loss_train);
        CHECK(dist[0].history[i].error == serial.history[i].error);
    }
}

TEST_CASE("strong mode follows the serial loss trajectory and replicas stay equal") {
    TrainConfig c = small_config();
    c.counts = default_counts(ProblemKind::Laplace1d, 128);
    const auto serial = train_serial(c);
    const auto dist = train_distributed(c, ScaleMode::Strong, 4);
    REQUIRE(dist.size() == 4);
    REQUIRE(dist[0].history.size() == serial.history.size());
    for (std::size_t i = 0; i < serial.history.size(); ++i) {
        const double a = dist[0].history[i].loss_train, b = serial.history[i].loss_train;
        CHECK(std::abs(a - b) / b <= 1e-8);
    }
    for (std::size_t r = 1; r < 4; ++r) {
        const auto p0 = dist[0].params.flatten();
        const auto pr = dist[r].params.flatten();
        double worst = 0.0;
        for (std::size_t i = 0; i < p0.size(); ++i) worst = std::max(worst, std::abs(p0[i] - pr[i]));
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("weak mode runs every rank on its own data") {
    TrainConfig c = small_config();
    c.counts = default_counts(ProblemKind::Laplace1d, 16);
    const auto dist = train_distributed(c, ScaleMode::Weak, 3);
    REQUIRE(dist.size() == 3);
    CHECK(dist[0].counts.n_f == 48);
    CHECK(dist[1].params == dist[0].params);
    CHECK(dist[2].params == dist[0].params);
    CHECK(std::isfinite(dist[0].error));
}

TEST_CASE("efficiency and speed-up") {
    const auto a = efficiency_speedup(4.08, 6.12, 8);
    CHECK(std::abs(a.efficiency * 100 - 66.67) <= 0.01);
    CHECK(a.speedup == doctest::Approx(8 * 4.08 / 6.12));
    const auto b = efficiency_speedup(4.08, 5.23, 2);
    CHECK(std::abs(b.efficiency * 100 - 78.01) <= 0.01);
    const auto c = efficiency_speedup(3.0, 3.0, 4);
    CHECK(c.efficiency == 1.0);
    CHECK(c.speedup == 4.0);
    CHECK_THROWS(efficiency_speedup(0.0, 1.0, 2));
    CHECK_THROWS(efficiency_speedup(1.0, -1.0, 2));
}
