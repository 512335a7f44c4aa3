#pragma once

#include "pinn/harness.hpp"
#include "pinn/metrics.hpp"
#include "pinn/trainer.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinn {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string command;
    TrainConfig train;
    std::vector<std::size_t> n_list; // sweep
    std::size_t seeds = 4;           // sweep and scale: seeds seed, seed + 1, ...
    std::size_t ranks = 1;
    ScaleMode mode = ScaleMode::Serial;
    std::vector<std::size_t> sizes; // scale
    std::filesystem::path out_dir;
    RegimeThresholds thresholds;
    std::optional<BoundInputs> bounds;
    std::filesystem::path save;  // train: parameter snapshot
    std::filesystem::path input; // report: sweep.csv
    std::filesystem::path grid;  // oracle: output file
    std::size_t n_x = 256;
    std::size_t n_t = 201;
    double dt = 5e-5;
};

// Defaults for one problem: 4 x 50 tanh network, lr 1e-4, 20000 iterations
// for Laplace; width 100 and 30000 iterations for Schrodinger.
Config default_config(ProblemKind problem);

// argv without the program name: a subcommand followed by flags. A JSON
// file given by --config is applied first and flags override it.
Config parse_config(const std::vector<std::string>& args);

// Checks ranges and cross-field consistency.
void validate(const Config& config);

// Full command-line entry point. Returns 0 on success, 1 on a configuration
// error and 2 on a runtime failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

} // namespace pinn
