#include "pinn/cli.hpp"
#include "pinn/harness.hpp"
#include "pinn/metrics.hpp"
#include "pinn/model.hpp"
#include "pinn/optim.hpp"
#include "pinn/parallel.hpp"
#include "pinn/sampling.hpp"
#include "pinn/schrodinger.hpp"
#include "pinn/trainer.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace pinn;

namespace {

py::dict record_to_dict(const RunRecord& r) {
    py::dict d;
    d["problem"] = std::string(to_string(r.config.problem));
    d["mode"] = std::string(to_string(r.mode));
    d["size"] = r.size;
    d["rank"] = r.rank;
    d["N_f"] = r.counts.n_f;
    d["N_g"] = r.counts.n_g;
    d["N_h"] = r.counts.n_h;
    d["M"] = r.counts.m;
    d["seed"] = r.config.seed;
    d["error"] = r.error;
    d["best_error"] = r.best_error;
    d["best_iter"] = r.best_iter;
    d["loss_train"] = r.loss_train;
    d["loss_test"] = r.loss_test;
    d["gap_rel"] = r.gap_rel;
    d["time_total_s"] = r.time_total_s;
    d["t500_mean"] = r.t500_mean;
    d["t500_std"] = r.t500_std;
    d["pointsec"] = r.pointsec;
    d["lambda"] = r.lambda ? py::cast(*r.lambda) : py::none();
    d["regime"] = r.regime;
    d["failed"] = r.failed;
    py::list history;
    for (const auto& h : r.history) {
        history.append(py::make_tuple(h.iter, h.loss_train, h.loss_test, h.error, h.lambda));
    }
    d["history"] = history;
    d["params"] = r.params.flatten();
    d["dims"] = r.params.dims;
    return d;
}

TrainConfig make_config(const std::string& problem, std::size_t n_f, std::size_t iterations,
                        std::uint64_t seed, double lr, int width, int depth, std::size_t m,
                        std::size_t cadence) {
    const Config defaults = default_config(parse_problem_kind(problem));
    TrainConfig c = defaults.train;
    c.counts = default_counts(c.problem, n_f, m);
    c.iterations = iterations;
    c.seed = seed;
    if (lr > 0.0) c.lr = lr;
    if (width > 0) c.width = width;
    if (depth > 0) c.depth = depth;
    c.cadence = cadence;
    return c;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Physics-informed neural network training engine";

    m.def("param_count", &param_count, py::arg("dims"));
    m.def("glorot_bound", &glorot_bound, py::arg("fan_in"), py::arg("fan_out"));
    m.def(
        "glorot_init",
        [](const std::vector<int>& dims, std::uint64_t seed, std::optional<double> lambda) {
            std::vector<std::pair<std::string, double>> extras;
            if (lambda) extras.emplace_back(kLambdaName, *lambda);
            return glorot_init(dims, extras, seed).flatten();
        },
        py::arg("dims"), py::arg("seed"), py::arg("lambda_init") = py::none(),
        "Flat parameter vector: per layer W (row-major) then b, extras last.");
    m.def(
        "forward",
        [](const std::vector<int>& dims, const std::vector<double>& flat, const Matrix& x) {
            MlpParams p = glorot_init(dims, {}, 0);
            p.unflatten(flat);
            return predict(p, x, Activation::Tanh);
        },
        py::arg("dims"), py::arg("params"), py::arg("x"));

    m.def(
        "lhs",
        [](std::size_t n, const std::vector<double>& lo, const std::vector<double>& hi,
           std::uint64_t seed) { return lhs(n, Box{lo, hi}, seed); },
        py::arg("n"), py::arg("lo"), py::arg("hi"), py::arg("seed"));
    m.def("worker_seed", &worker_seed, py::arg("seed"), py::arg("rank"));

    m.def("relative_l2_error", &relative_l2_error, py::arg("pred"), py::arg("exact"));
    m.def("rho", &rho, py::arg("n_f"), py::arg("volume"), py::arg("input_dim"));
    m.def("pointsec", &pointsec, py::arg("iterations"), py::arg("n_f"), py::arg("seconds"));
    m.def("gap_bound", &gap_bound, py::arg("c_quad"), py::arg("rate"), py::arg("count"));
    m.def(
        "generalization_bound",
        [](double c_pde, double c_quad_y, double c_quad_x, double alpha, double beta, double omega_u,
           double mu_hat, double n_hat, double m_obs, double eps_pde, double eps_obs) {
            return generalization_bound({c_pde, c_quad_y, c_quad_x, alpha, beta, omega_u, mu_hat,
                                         n_hat, m_obs},
                                        eps_pde, eps_obs);
        },
        py::arg("c_pde"), py::arg("c_quad_y"), py::arg("c_quad_x"), py::arg("alpha"),
        py::arg("beta"), py::arg("omega_u"), py::arg("mu_hat"), py::arg("n_hat"), py::arg("m"),
        py::arg("eps_pde"), py::arg("eps_obs"));
    m.def(
        "efficiency_speedup",
        [](double t1, double t_size, std::size_t size) {
            const Scaling s = efficiency_speedup(t1, t_size, size);
            return py::make_tuple(s.efficiency, s.speedup);
        },
        py::arg("t1"), py::arg("t_size"), py::arg("size"));

    m.def(
        "adam_steps",
        [](std::vector<double> params, const std::vector<std::vector<double>>& grads, double lr) {
            AdamState state(params.size(), lr);
            for (const auto& g : grads) adam_step(params, g, state);
            return params;
        },
        py::arg("params"), py::arg("grads"), py::arg("lr") = 1e-4,
        "Applies one ADAM step per gradient from a fresh state.");

    m.def(
        "ring_allreduce",
        [](std::vector<std::vector<double>> buffers, const std::string& op) {
            const ReduceOp reduce = op == "max" ? ReduceOp::Max : ReduceOp::Sum;
            const AllreduceCounts counts = ring_allreduce(buffers, reduce);
            return py::make_tuple(buffers, counts.sends, counts.receives);
        },
        py::arg("buffers"), py::arg("op") = "sum",
        "Returns (buffers, sends per rank, receives per rank).");

    m.def(
        "mc_rate_study",
        [](const std::function<double(double)>& g, double lo, double hi, double exact,
           const std::vector<std::size_t>& n_list, std::size_t repeats, bool use_lhs,
           std::uint64_t seed) {
            const McRate r = mc_rate_study(g, lo, hi, exact, n_list, repeats,
                                           use_lhs ? Sampler::Lhs : Sampler::Uniform, seed);
            return py::make_tuple(r.rms_error, r.slope, r.exact);
        },
        py::arg("g"), py::arg("lo"), py::arg("hi"), py::arg("exact"), py::arg("n_list"),
        py::arg("repeats"), py::arg("lhs") = false, py::arg("seed") = 1234);

    m.def(
        "schrodinger_reference",
        [](std::size_t n_x, std::size_t n_t, double max_dt) {
            const ReferenceGrid g = schrodinger_reference(n_x, n_t, max_dt);
            py::array_t<std::complex<double>> out({g.n_t(), g.n_x()});
            auto view = out.mutable_unchecked<2>();
            for (std::size_t j = 0; j < g.n_t(); ++j) {
                for (std::size_t i = 0; i < g.n_x(); ++i) {
                    view(static_cast<py::ssize_t>(j), static_cast<py::ssize_t>(i)) = g.value(j, i);
                }
            }
            return out;
        },
        py::arg("n_x") = 256, py::arg("n_t") = 201, py::arg("max_dt") = 5e-5,
        "Complex field u[t, x] on [-5, 5) x [0, pi/2].");

    m.def(
        "train",
        [](const std::string& problem, std::size_t n_f, std::size_t iterations, std::uint64_t seed,
           double lr, int width, int depth, std::size_t m_obs, std::size_t cadence,
           std::size_t ranks, const std::string& mode) {
            const TrainConfig c = make_config(problem, n_f, iterations, seed, lr, width, depth,
                                              m_obs, cadence);
            const ScaleMode sm = parse_scale_mode(mode);
            RunRecord r;
            {
                py::gil_scoped_release release;
                r = sm == ScaleMode::Serial ? train_serial(c) : train_distributed(c, sm, ranks).front();
            }
            return record_to_dict(r);
        },
        py::arg("problem") = "laplace", py::arg("n_f") = 512, py::arg("iterations") = 20000,
        py::arg("seed") = 1234, py::arg("lr") = 0.0, py::arg("width") = 0, py::arg("depth") = 0,
        py::arg("m") = 64, py::arg("cadence") = 100, py::arg("ranks") = 1,
        py::arg("mode") = "serial",
        "Trains one model; zero lr, width or depth select the problem defaults.");

    m.def(
        "read_sweep_csv",
        [](const std::filesystem::path& path) {
            py::list rows;
            for (const auto& r : read_sweep_csv(path)) {
                py::dict d;
                d["problem"] = r.problem;
                d["mode"] = r.mode;
                d["size"] = r.size;
                d["N_f"] = r.n_f;
                d["seed"] = r.seed;
                d["error"] = r.error;
                d["gap_rel"] = r.gap_rel;
                d["regime"] = r.regime;
                rows.append(d);
            }
            return rows;
        },
        py::arg("path"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool; returns (exit code, stdout, stderr).");
}
