#include "pinn/harness.hpp"
#include "pinn/schrodinger.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace pinn;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("pinn_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

TrainConfig tiny() {
    TrainConfig c;
    c.width = 8;
    c.depth = 2;
    c.iterations = 40;
    c.cadence = 10;
    c.lr = 1e-3;
    c.counts = default_counts(ProblemKind::Laplace1d, 16);
    return c;
}

double max_diff(std::span<const Complex> a, std::span<const Complex> b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

} // namespace

TEST_CASE("plane wave integrates to exp(i t)") {
    SplitStepNls solver(64, 10.0, 1e-4);
    std::vector<Complex> u(64, Complex(1.0, 0.0));
    solver.advance(u, 1.0);
    const Complex expected = std::polar(1.0, 1.0);
    for (const Complex& v : u) CHECK(std::abs(v - expected) < 1e-8);
}

TEST_CASE("soliton mass is conserved") {
    const std::size_t n = 256;
    SplitStepNls solver(n, 10.0, 1e-4);
    std::vector<Complex> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = 2.0 * sech(-5.0 + 10.0 * double(i) / double(n));
    const double m0 = solver.mass(u);
    solver.advance(u, kPi / 2.0);
    CHECK(std::abs(solver.mass(u) - m0) / m0 < 1e-8);
}

TEST_CASE("reference grid is step-size independent and focuses") {
    const auto coarse = schrodinger_reference(256, 11);
    const auto fine = schrodinger_reference(256, 11, 2.5e-5);
    CHECK(coarse.n_x() == 256);
    CHECK(coarse.n_t() == 11);
    CHECK(max_diff(coarse.values(), fine.values()) < 1e-6);

    double peak0 = 0.0, peak_mid = 0.0;
    const std::size_t mid = 5; // t = pi/4
    for (std::size_t i = 0; i < coarse.n_x(); ++i) {
        peak0 = std::max(peak0, std::abs(coarse.value(0, i)));
        peak_mid = std::max(peak_mid, std::abs(coarse.value(mid, i)));
    }
    CHECK(peak0 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(peak_mid > peak0);
}

TEST_CASE("reference grid interpolation and file round-trip") {
    const auto grid = schrodinger_reference(64, 5, 1e-3);
    CHECK(grid.interpolate(grid.x(3), grid.t(2)) == grid.value(2, 3));
    CHECK(std::abs(grid.interpolate(0.0, 0.0) - Complex(2.0, 0.0)) < 1e-12);
    const fs::path dir = scratch("ref");
    grid.save(dir / "ref.bin");
    const auto back = ReferenceGrid::load(dir / "ref.bin");
    CHECK(back.values() == grid.values());
    CHECK(back.t_max() == grid.t_max());
    CHECK_THROWS(ReferenceGrid::load(dir / "missing.bin"));
    CHECK_THROWS(SplitStepNls(100, 10.0, 1e-4));
    CHECK_THROWS(SplitStepNls(64, 10.0, 1e-2));
}

TEST_CASE("Monte-Carlo rate") {
    const auto g = [](double x) { return std::pow(std::sin(kPi * x), 2); };
    const auto uni = mc_rate_study(g, -1.0, 7.0, 4.0, {100, 1000, 10000, 100000}, 64);
    CAPTURE(uni.slope);
    CHECK(!uni.exact);
    CHECK(uni.slope >= -0.7);
    CHECK(uni.slope <= -0.3);

    const auto lat = mc_rate_study(g, -1.0, 7.0, 4.0, {100, 1000, 10000, 100000}, 64, Sampler::Lhs);
    CHECK(median(lat.rms_error) <= median(uni.rms_error));
    for (std::size_t i = 0; i < lat.rms_error.size(); ++i) CHECK(lat.rms_error[i] <= uni.rms_error[i]);

    const auto flat = mc_rate_study([](double) { return 3.0; }, -1.0, 7.0, 24.0, {10, 100}, 8);
    CHECK(flat.exact);
    CHECK(std::isnan(flat.slope));

    CHECK_THROWS(mc_rate_study(g, -1.0, 7.0, 4.0, {100}, 8));
}

TEST_CASE("loglog slope") {
    CHECK(loglog_slope({1, 10, 100}, {1, 0.1, 0.01}) == doctest::Approx(-1.0));
    CHECK(loglog_slope({2, 4, 8}, {3, 6, 12}) == doctest::Approx(1.0));
}

TEST_CASE("persisted runs round-trip through sweep.csv") {
    const fs::path dir = scratch("persist");
    const auto record = train_serial(tiny());
    const auto a = persist_run(record, dir);
    const auto b = persist_run(record, dir);
    CHECK(a.id != b.id);
    CHECK(fs::exists(a.losses));
    CHECK(fs::exists(a.config));

    std::ifstream in(dir / "sweep.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == kSweepHeader);

    const auto rows = read_sweep_csv(dir / "sweep.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == to_sweep_row(record));
    CHECK(rows[1] == rows[0]);
    CHECK(parse_sweep_row(format_sweep_row(rows[0])) == rows[0]);

    std::ifstream losses(a.losses);
    std::string line;
    std::getline(losses, line);
    CHECK(line == "iter,loss_train,loss_test,error,lambda");
    std::size_t n = 0;
    while (std::getline(losses, line)) ++n;
    CHECK(n == record.history.size());
}

TEST_CASE("h-sweep is deterministic and labelled") {
    const auto run = [] { return run_h_sweep(tiny(), {8, 32}, 2); };
    const auto first = run();
    const auto second = run();
    REQUIRE(first.size() == 4);
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].error == second[i].error);
        CHECK(first[i].loss_train == second[i].loss_train);
        CHECK(first[i].loss_test == second[i].loss_test);
        CHECK(first[i].best_iter == second[i].best_iter);
        CHECK(first[i].config.seed == tiny().seed + i % 2);
        CHECK(!first[i].regime.empty());
        CHECK(first[i].regime != "n/a");
        CHECK(first[i].best_error <= first[i].error);
    }
}

TEST_CASE("single-seed sweep matches a direct run") {
    const auto recs = run_h_sweep(tiny(), {16}, 1);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].regime == "n/a");
    CHECK(recs[0].error == train_serial(tiny()).error);
}

TEST_CASE("diverging runs are recorded as failed") {
    TrainConfig c = tiny();
    c.lr = 1e300;
    const auto recs = run_h_sweep(c, {8}, 1);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].failed);
    CHECK(!recs[0].failure.empty());
}

TEST_CASE("weak scaling study") {
    TrainConfig c = tiny();
    c.counts = default_counts(ProblemKind::Laplace1d, 8);
    const auto study = run_scaling(c, ScaleMode::Weak, {2}, 1);
    REQUIRE(study.rows.size() == 2);
    CHECK(study.rows[0].size == 1);
    CHECK(study.rows[0].efficiency == 1.0);
    CHECK(study.rows[0].speedup == 1.0);
    CHECK(study.rows[1].size == 2);
    CHECK(study.rows[1].efficiency > 0.0);
    CHECK(study.rows[1].speedup == doctest::Approx(2.0 * study.rows[1].efficiency));
    CHECK(study.rows[1].pointsec > 0.0);
    REQUIRE(study.baselines.size() == 2);
    CHECK(study.baselines[1].counts.n_f == 16);
}
