#pragma once

#include "pinn/model.hpp"
#include "pinn/problems.hpp"
#include "pinn/rng.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>

namespace pinn {

// Loss components: PDE interior (f), boundary (g), initial condition (h),
// observations (u).
enum class Component : int { F = 0, G = 1, H = 2, U = 3 };

inline constexpr std::array<Component, 4> kComponents = {Component::F, Component::G, Component::H,
                                                         Component::U};

std::string_view to_string(Component c);

struct ComponentSet {
    Matrix points;       // N_v x D_in
    Vector weights;      // quadrature weights, N_v
    Matrix observations; // N_u x m, only for Component::U

    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
    bool empty() const { return points.rows() == 0; }
};

struct TrainingSet {
    std::array<ComponentSet, 4> parts;

    ComponentSet& operator[](Component c) { return parts[static_cast<int>(c)]; }
    const ComponentSet& operator[](Component c) const { return parts[static_cast<int>(c)]; }

    std::size_t count(Component c) const { return (*this)[c].size(); }
    std::size_t collocation_count() const; // N_f + N_g + N_h
    std::size_t observation_count() const { return count(Component::U); }
    std::size_t total_count() const { return collocation_count() + observation_count(); }
};

struct SetCounts {
    std::size_t n_f = 0;
    std::size_t n_g = 0;
    std::size_t n_h = 0;
    std::size_t m = 0;
};

// Default counts for a problem: Laplace {N_f, 2, 0, 0}, inverse adds M,
// Schrodinger {N_f, 200, 200, 0}.
SetCounts default_counts(ProblemKind kind, std::size_t n_f, std::size_t m = 64);

inline constexpr std::uint64_t kTestSeedOffset = 500000;

// Latin hypercube sample: in every coordinate each of the n equal strata of
// the box edge holds exactly one point. Strata are matched by a seeded random
// permutation per coordinate; the offset inside a stratum is uniform.
Matrix lhs(std::size_t n, const Box& box, std::uint64_t seed,
           std::uint64_t stream = streams::kInterior);

// Independent uniform points (plain Monte-Carlo).
Matrix uniform_points(std::size_t n, const Box& box, std::uint64_t seed,
                      std::uint64_t stream = streams::kMonteCarlo);

// n points from lo to hi inclusive (n == 1 gives the midpoint).
Vector linspace(double lo, double hi, std::size_t n);

std::uint64_t worker_seed(std::uint64_t seed, std::uint64_t rank);

// Interior points by LHS, boundary and initial points on uniform grids,
// observations from the exact solution at LHS points. Weights are 1/N_v.
TrainingSet build_training_set(const ProblemSpec& spec, const SetCounts& counts,
                               std::uint64_t seed);

// Same cardinality as the training set, sampled with seed + kTestSeedOffset.
TrainingSet build_test_set(const ProblemSpec& spec, const SetCounts& counts, std::uint64_t seed);

// Rows: component, coord0[, coord1], weight, obs0[, obs1].
void write_training_set_csv(const TrainingSet& set, const ProblemSpec& spec,
                            const std::filesystem::path& path);

} // namespace pinn
