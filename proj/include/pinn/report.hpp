#pragma once

#include "pinn/harness.hpp"
#include "pinn/metrics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pinn {

// Statistics of all rows sharing (problem, mode, size, N_f).
struct SummaryRow {
    std::string problem;
    std::string mode;
    std::size_t size = 1;
    std::size_t n_f = 0;
    std::size_t runs = 0;
    std::size_t failed = 0;
    double median_error = 0.0;
    double min_error = 0.0;
    double max_error = 0.0;
    double median_gap = 0.0;
    double median_t500 = 0.0;
    double efficiency = 0.0; // against size 1 of the same problem and mode, 0 if unknown
    std::string regime;
};

std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows,
                                  const RegimeThresholds& thresholds = {});

std::string format_summary(const std::vector<SummaryRow>& summary);

// Log-log error against N_f for the serial rows of one problem: every run as
// a dot, per-N medians joined by a line, regime bands behind.
std::string svg_error_vs_nf(const std::vector<SummaryRow>& summary,
                            const std::vector<SweepRow>& rows, const std::string& problem);

// Efficiency bars against size, one group per scaling mode.
std::string svg_efficiency(const std::vector<SummaryRow>& summary, const std::string& problem);

struct ReportFiles {
    std::filesystem::path summary;
    std::vector<std::filesystem::path> plots;
};

// Writes summary.csv and the SVG plots into out_dir. Throws on an empty input.
ReportFiles write_report(const std::vector<SweepRow>& rows, const std::filesystem::path& out_dir,
                         const RegimeThresholds& thresholds = {});

} // namespace pinn
