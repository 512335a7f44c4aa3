#include "pinn/sampling.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pinn {

std::string_view to_string(Component c) {
    switch (c) {
    case Component::F: return "f";
    case Component::G: return "g";
    case Component::H: return "h";
    case Component::U: return "u";
    }
    return "?";
}

std::size_t TrainingSet::collocation_count() const {
    return count(Component::F) + count(Component::G) + count(Component::H);
}

SetCounts default_counts(ProblemKind kind, std::size_t n_f, std::size_t m) {
    switch (kind) {
    case ProblemKind::Laplace1d: return {n_f, 2, 0, 0};
    case ProblemKind::Laplace1dInverse: return {n_f, 2, 0, m};
    case ProblemKind::Schrodinger1d: return {n_f, 200, 200, 0};
    }
    return {};
}

namespace {
void check_box(const Box& box) {
    if (box.lo.size() != box.hi.size() || box.lo.empty()) {
        throw std::invalid_argument("box bounds are malformed");
    }
    for (std::size_t d = 0; d < box.dim(); ++d) {
        if (!(box.hi[d] > box.lo[d])) {
            throw std::invalid_argument("degenerate box: zero width in coordinate " +
                                        std::to_string(d));
        }
    }
}

Vector uniform_weights(std::size_t n) {
    return Vector::Constant(static_cast<Eigen::Index>(n), n ? 1.0 / static_cast<double>(n) : 0.0);
}
} // namespace

Matrix lhs(std::size_t n, const Box& box, std::uint64_t seed, std::uint64_t stream) {
    if (n == 0) throw std::invalid_argument("lhs: need at least one point");
    check_box(box);
    CounterRng rng(seed, stream);
    Matrix points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(box.dim()));
    for (std::size_t d = 0; d < box.dim(); ++d) {
        const double width = (box.hi[d] - box.lo[d]) / static_cast<double>(n);
        const auto strata = rng.permutation(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double offset = rng.uniform();
            double v = box.lo[d] + (static_cast<double>(strata[i]) + offset) * width;
            // Rounding may land exactly on the upper edge of the stratum.
            const double upper = box.lo[d] + static_cast<double>(strata[i] + 1) * width;
            if (v >= upper) v = std::nextafter(upper, box.lo[d]);
            points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = v;
        }
    }
    return points;
}

Matrix uniform_points(std::size_t n, const Box& box, std::uint64_t seed, std::uint64_t stream) {
    check_box(box);
    CounterRng rng(seed, stream);
    Matrix points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(box.dim()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (std::size_t d = 0; d < box.dim(); ++d) {
            points(i, static_cast<Eigen::Index>(d)) = rng.uniform(box.lo[d], box.hi[d]);
        }
    }
    return points;
}

Vector linspace(double lo, double hi, std::size_t n) {
    if (n == 1) return Vector::Constant(1, 0.5 * (lo + hi));
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        v(static_cast<Eigen::Index>(i)) =
            i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

std::uint64_t worker_seed(std::uint64_t seed, std::uint64_t rank) { return seed + 1000 * rank; }

TrainingSet build_training_set(const ProblemSpec& spec, const SetCounts& counts,
                               std::uint64_t seed) {
    TrainingSet set;
    auto& f = set[Component::F];
    auto& g = set[Component::G];
    auto& h = set[Component::H];
    auto& u = set[Component::U];

    if (spec.is_laplace()) {
        if (counts.n_g != 2) {
            throw std::invalid_argument("laplace uses exactly N_g = 2 boundary points {-1, 7}");
        }
        if (counts.n_h != 0) throw std::invalid_argument("laplace has no initial condition (N_h = 0)");
        if (!spec.is_inverse() && counts.m != 0) {
            throw std::invalid_argument("forward laplace takes no observations (M = 0)");
        }
        if (spec.is_inverse() && counts.m == 0) {
            throw std::invalid_argument("inverse laplace needs observations (M >= 1)");
        }
        g.points = Matrix(2, 1);
        g.points << spec.domain.lo[0], spec.domain.hi[0];
    } else {
        if (counts.n_g == 0 || counts.n_h == 0) {
            throw std::invalid_argument("schrodinger needs periodic (N_g) and initial (N_h) points");
        }
        if (counts.m != 0) throw std::invalid_argument("schrodinger takes no observations (M = 0)");
        // Periodic pairs are stored by their left end (x = -5, t); the
        // residual builder mirrors them to x = 5.
        g.points = Matrix(static_cast<Eigen::Index>(counts.n_g), 2);
        g.points.col(0).setConstant(spec.domain.lo[0]);
        g.points.col(1) = linspace(spec.domain.lo[1], spec.domain.hi[1], counts.n_g);
        h.points = Matrix(static_cast<Eigen::Index>(counts.n_h), 2);
        h.points.col(0) = linspace(spec.domain.lo[0], spec.domain.hi[0], counts.n_h);
        h.points.col(1).setConstant(spec.domain.lo[1]);
    }

    f.points = counts.n_f ? lhs(counts.n_f, spec.domain, seed, streams::kInterior)
                          : Matrix(0, spec.input_dim);
    if (counts.m > 0) {
        u.points = lhs(counts.m, spec.domain, seed, streams::kObservations);
        u.observations = spec.exact(u.points);
    } else {
        u.points = Matrix(0, spec.input_dim);
    }
    if (h.points.size() == 0) h.points = Matrix(0, spec.input_dim);

    for (Component c : kComponents) set[c].weights = uniform_weights(set.count(c));
    return set;
}

TrainingSet build_test_set(const ProblemSpec& spec, const SetCounts& counts, std::uint64_t seed) {
    return build_training_set(spec, counts, seed + kTestSeedOffset);
}

void write_training_set_csv(const TrainingSet& set, const ProblemSpec& spec,
                            const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error(path.string() + ": cannot open for writing");
    os << "component";
    for (int d = 0; d < spec.input_dim; ++d) os << ",coord" << d;
    os << ",weight";
    for (int k = 0; k < spec.output_dim; ++k) os << ",obs" << k;
    os << '\n' << std::setprecision(17);
    for (Component c : kComponents) {
        const auto& part = set[c];
        for (Eigen::Index i = 0; i < part.points.rows(); ++i) {
            os << to_string(c);
            for (Eigen::Index d = 0; d < part.points.cols(); ++d) os << ',' << part.points(i, d);
            os << ',' << part.weights(i);
            for (int k = 0; k < spec.output_dim; ++k) {
                os << ',';
                if (part.observations.rows() > i) os << part.observations(i, k);
            }
            os << '\n';
        }
    }
    if (!os) throw std::runtime_error(path.string() + ": write failed");
}

} // namespace pinn
