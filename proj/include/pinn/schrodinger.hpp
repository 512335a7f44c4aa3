#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace pinn {

using Complex = std::complex<double>;

// Complex field sampled on a periodic x-grid (x_min inclusive, x_max
// exclusive) at n_t uniformly spaced times from t_min to t_max inclusive.
// Storage is time-major: value(j, i) is time j, position i.
class ReferenceGrid {
public:
    ReferenceGrid(std::size_t n_x, std::size_t n_t, double x_min, double x_max, double t_min,
                  double t_max, std::vector<Complex> values);

    std::size_t n_x() const { return n_x_; }
    std::size_t n_t() const { return n_t_; }
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    double t_min() const { return t_min_; }
    double t_max() const { return t_max_; }
    double x(std::size_t i) const;
    double t(std::size_t j) const;
    const Complex& value(std::size_t j, std::size_t i) const { return values_[j * n_x_ + i]; }
    std::span<const Complex> time_slice(std::size_t j) const;
    const std::vector<Complex>& values() const { return values_; }

    // Bilinear interpolation, periodic in x and clamped in t.
    Complex interpolate(double x, double t) const;

    // File layout (little-endian): "PINNREF1" | u64 n_x | u64 n_t
    // | f64 x_min | f64 x_max | f64 t_min | f64 t_max
    // | n_t * n_x pairs (f64 re, f64 im), time-major.
    void save(const std::filesystem::path& path) const;
    static ReferenceGrid load(const std::filesystem::path& path);

private:
    std::size_t n_x_;
    std::size_t n_t_;
    double x_min_;
    double x_max_;
    double t_min_;
    double t_max_;
    std::vector<Complex> values_;
};

class MassDriftError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Strang split-step Fourier integrator for i u_t + 0.5 u_xx + |u|^2 u = 0 on a
// periodic interval: half nonlinear phase rotation, exact linear step in
// Fourier space, half nonlinear rotation. n must be a power of two.
class SplitStepNls {
public:
    SplitStepNls(std::size_t n, double length, double max_dt, double mass_tolerance = 1e-6);

    // Advances `u` by `duration` using the smallest number of equal steps not
    // exceeding max_dt. Throws MassDriftError if the discrete mass drifts
    // beyond the relative tolerance.
    void advance(std::vector<Complex>& u, double duration) const;

    double mass(std::span<const Complex> u) const;
    std::size_t steps_taken() const { return steps_; }

private:
    std::size_t n_;
    double length_;
    double max_dt_;
    double mass_tolerance_;
    std::vector<double> wavenumbers_;
    mutable std::size_t steps_ = 0;
};

// Reference field for u(x, 0) = 2 sech(x) on [-5, 5) x [0, pi/2].
ReferenceGrid schrodinger_reference(std::size_t n_x = 256, std::size_t n_t = 201,
                                    double max_dt = 5e-5);

} // namespace pinn
