#include "pinn/schrodinger.hpp"

#include "binary_io.hpp"
#include "pinn/problems.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>

namespace pinn {

ReferenceGrid::ReferenceGrid(std::size_t n_x, std::size_t n_t, double x_min, double x_max,
                             double t_min, double t_max, std::vector<Complex> values)
    : n_x_(n_x), n_t_(n_t), x_min_(x_min), x_max_(x_max), t_min_(t_min), t_max_(t_max),
      values_(std::move(values)) {
    if (n_x_ < 2 || n_t_ < 2) throw std::invalid_argument("reference grid needs n_x, n_t >= 2");
    if (!(x_max_ > x_min_) || !(t_max_ > t_min_)) {
        throw std::invalid_argument("reference grid bounds are degenerate");
    }
    if (values_.size() != n_x_ * n_t_) {
        throw std::invalid_argument("reference grid holds " + std::to_string(values_.size()) +
                                    " values, expected " + std::to_string(n_x_ * n_t_));
    }
}

double ReferenceGrid::x(std::size_t i) const {
    return x_min_ + static_cast<double>(i) * (x_max_ - x_min_) / static_cast<double>(n_x_);
}

double ReferenceGrid::t(std::size_t j) const {
    return t_min_ + static_cast<double>(j) * (t_max_ - t_min_) / static_cast<double>(n_t_ - 1);
}

std::span<const Complex> ReferenceGrid::time_slice(std::size_t j) const {
    return {values_.data() + j * n_x_, n_x_};
}

Complex ReferenceGrid::interpolate(double x, double t) const {
    const double dx = (x_max_ - x_min_) / static_cast<double>(n_x_);
    double s = std::fmod((x - x_min_) / dx, static_cast<double>(n_x_));
    if (s < 0) s += static_cast<double>(n_x_);
    auto i0 = static_cast<std::size_t>(s);
    if (i0 >= n_x_) i0 = n_x_ - 1;
    const std::size_t i1 = (i0 + 1) % n_x_;
    const double wx = s - static_cast<double>(i0);

    const double dt = (t_max_ - t_min_) / static_cast<double>(n_t_ - 1);
    const double r = std::clamp((t - t_min_) / dt, 0.0, static_cast<double>(n_t_ - 1));
    const std::size_t j0 = std::min(static_cast<std::size_t>(r), n_t_ - 2);
    const double wt = r - static_cast<double>(j0);

    const Complex lower = (1.0 - wx) * value(j0, i0) + wx * value(j0, i1);
    const Complex upper = (1.0 - wx) * value(j0 + 1, i0) + wx * value(j0 + 1, i1);
    return (1.0 - wt) * lower + wt * upper;
}

namespace {
constexpr char kGridMagic[8] = {'P', 'I', 'N', 'N', 'R', 'E', 'F', '1'};
}

void ReferenceGrid::save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error(path.string() + ": cannot open for writing");
    os.write(kGridMagic, sizeof(kGridMagic));
    detail::write_le<std::uint64_t>(os, n_x_);
    detail::write_le<std::uint64_t>(os, n_t_);
    for (double b : {x_min_, x_max_, t_min_, t_max_}) detail::write_le<double>(os, b);
    for (const Complex& v : values_) {
        detail::write_le<double>(os, v.real());
        detail::write_le<double>(os, v.imag());
    }
    if (!os) throw std::runtime_error(path.string() + ": write failed");
}

ReferenceGrid ReferenceGrid::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error(path.string() + ": cannot open for reading");
    char magic[8];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kGridMagic, sizeof(magic)) != 0) {
        throw std::runtime_error(path.string() + ": not a reference grid file");
    }
    const auto n_x = detail::read_le<std::uint64_t>(is, path);
    const auto n_t = detail::read_le<std::uint64_t>(is, path);
    double bounds[4];
    for (double& b : bounds) b = detail::read_le<double>(is, path);
    if (n_x == 0 || n_t == 0 || n_x > (1u << 24) || n_t > (1u << 24)) {
        throw std::runtime_error(path.string() + ": implausible grid size");
    }
    std::vector<Complex> values(n_x * n_t);
    for (Complex& v : values) {
        const double re = detail::read_le<double>(is, path);
        const double im = detail::read_le<double>(is, path);
        v = {re, im};
    }
    return ReferenceGrid(n_x, n_t, bounds[0], bounds[1], bounds[2], bounds[3], std::move(values));
}

SplitStepNls::SplitStepNls(std::size_t n, double length, double max_dt, double mass_tolerance)
    : n_(n), length_(length), max_dt_(max_dt), mass_tolerance_(mass_tolerance) {
    if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("n_x must be a power of two");
    if (!(length > 0.0)) throw std::invalid_argument("period length must be positive");
    if (!(max_dt > 0.0) || max_dt > 1e-3) {
        throw std::invalid_argument("time step must lie in (0, 1e-3]");
    }
    wavenumbers_.resize(n);
    const double base = 2.0 * std::numbers::pi / length;
    const auto half = static_cast<long>(n / 2);
    for (std::size_t j = 0; j < n; ++j) {
        const long m = static_cast<long>(j) < half ? static_cast<long>(j)
                                                   : static_cast<long>(j) - static_cast<long>(n);
        wavenumbers_[j] = base * static_cast<double>(m);
    }
}

double SplitStepNls::mass(std::span<const Complex> u) const {
    double sum = 0.0;
    for (const Complex& v : u) sum += std::norm(v);
    return sum * length_ / static_cast<double>(n_);
}

void SplitStepNls::advance(std::vector<Complex>& u, double duration) const {
    if (u.size() != n_) throw std::invalid_argument("field size does not match the solver");
    if (duration <= 0.0) return;
    const auto steps = static_cast<std::size_t>(std::ceil(duration / max_dt_ - 1e-9));
    const double dt = duration / static_cast<double>(steps);

    std::vector<Complex> linear(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        const double k = wavenumbers_[j];
        linear[j] = std::polar(1.0, -0.5 * k * k * dt);
    }

    const double mass0 = mass(u);
    Eigen::FFT<double> fft;
    std::vector<Complex> spectrum(n_);
    auto nonlinear_half = [&](std::vector<Complex>& field) {
        for (Complex& v : field) v *= std::polar(1.0, std::norm(v) * 0.5 * dt);
    };
    for (std::size_t s = 0; s < steps; ++s) {
        nonlinear_half(u);
        fft.fwd(spectrum, u);
        for (std::size_t j = 0; j < n_; ++j) spectrum[j] *= linear[j];
        fft.inv(u, spectrum);
        nonlinear_half(u);
    }
    steps_ += steps;

    const double drift = std::abs(mass(u) - mass0) / std::max(mass0, 1e-300);
    if (drift > mass_tolerance_) {
        throw MassDriftError("split-step solver: relative mass drift " + std::to_string(drift) +
                             " exceeds " + std::to_string(mass_tolerance_));
    }
}

ReferenceGrid schrodinger_reference(std::size_t n_x, std::size_t n_t, double max_dt) {
    const double x_min = -5.0;
    const double x_max = 5.0;
    const double t_max = std::numbers::pi / 2.0;
    if (n_t < 2) throw std::invalid_argument("n_t must be >= 2");
    SplitStepNls solver(n_x, x_max - x_min, max_dt);

    std::vector<Complex> u(n_x);
    for (std::size_t i = 0; i < n_x; ++i) {
        const double x = x_min + static_cast<double>(i) * (x_max - x_min) / static_cast<double>(n_x);
        u[i] = {2.0 * sech(x), 0.0};
    }
    std::vector<Complex> values;
    values.reserve(n_x * n_t);
    values.insert(values.end(), u.begin(), u.end());
    const double mass0 = solver.mass(u);
    const double interval = t_max / static_cast<double>(n_t - 1);
    for (std::size_t j = 1; j < n_t; ++j) {
        solver.advance(u, interval);
        if (std::abs(solver.mass(u) - mass0) > 1e-6 * mass0) {
            throw MassDriftError("reference solve: mass drift beyond 1e-6 relative at t = " +
                                 std::to_string(interval * static_cast<double>(j)));
        }
        values.insert(values.end(), u.begin(), u.end());
    }
    return ReferenceGrid(n_x, n_t, x_min, x_max, 0.0, t_max, std::move(values));
}

} // namespace pinn
