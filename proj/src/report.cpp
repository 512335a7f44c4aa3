#include "pinn/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace pinn {

namespace fs = std::filesystem;

namespace {

struct GroupKey {
    std::string problem;
    std::string mode;
    std::size_t size;
    std::size_t n_f;
    auto operator<=>(const GroupKey&) const = default;
};

double median_or_nan(std::vector<double> v) {
    std::erase_if(v, [](double x) { return !std::isfinite(x); });
    return v.empty() ? std::nan("") : median(std::move(v));
}

std::size_t per_rank(const SummaryRow& s) {
    return s.mode == "weak" ? s.n_f / std::max<std::size_t>(s.size, 1) : s.n_f;
}

const char* band_color(const std::string& regime) {
    if (regime == "pre-asymptotic") return "#f4c2d7";
    if (regime == "transition") return "#c6d9f5";
    if (regime == "permanent") return "#c8ecc8";
    return "#eeeeee";
}

std::string num(double v, int precision = 4) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

// Maps a value on a log10 axis to pixels.
struct LogAxis {
    double lo, hi, p0, p1;
    double operator()(double v) const {
        return p0 + (std::log10(v) - lo) / (hi - lo) * (p1 - p0);
    }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error(path.string() + ": cannot open for writing");
    os << text;
    if (!os) throw std::runtime_error(path.string() + ": write failed");
}

} // namespace

std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows,
                                  const RegimeThresholds& thresholds) {
    std::map<GroupKey, std::vector<const SweepRow*>> groups;
    for (const auto& r : rows) groups[{r.problem, r.mode, r.size, r.n_f}].push_back(&r);

    std::vector<SummaryRow> out;
    for (const auto& [key, members] : groups) {
        SummaryRow s;
        s.problem = key.problem;
        s.mode = key.mode;
        s.size = key.size;
        s.n_f = key.n_f;
        s.runs = members.size();
        std::vector<double> errors, gaps, t500;
        for (const SweepRow* r : members) {
            if (r->regime == "failed" || !std::isfinite(r->error)) {
                ++s.failed;
                continue;
            }
            errors.push_back(r->error);
            gaps.push_back(r->gap_rel);
            if (r->t500_mean > 0.0) t500.push_back(r->t500_mean);
        }
        s.median_error = median_or_nan(errors);
        s.min_error = errors.empty() ? std::nan("") : *std::min_element(errors.begin(), errors.end());
        s.max_error = errors.empty() ? std::nan("") : *std::max_element(errors.begin(), errors.end());
        s.median_gap = median_or_nan(gaps);
        s.median_t500 = median_or_nan(t500);
        s.regime = members.front()->regime;
        out.push_back(s);
    }

    // Regimes of serial sweeps are recomputed when every N_f has two seeds.
    std::set<std::string> problems;
    for (const auto& s : out) problems.insert(s.problem);
    for (const auto& problem : problems) {
        std::vector<SummaryRow*> serial;
        std::vector<SweepPoint> points;
        for (auto& s : out) {
            if (s.problem != problem || s.mode != "serial") continue;
            SweepPoint p;
            p.n = static_cast<double>(s.n_f);
            for (const auto& r : rows) {
                if (r.problem == problem && r.mode == "serial" && r.n_f == s.n_f &&
                    r.regime != "failed" && std::isfinite(r.error)) {
                    p.errors.push_back(r.error);
                    p.gaps.push_back(r.gap_rel);
                }
            }
            serial.push_back(&s);
            points.push_back(std::move(p));
        }
        const bool enough = !points.empty() && std::all_of(points.begin(), points.end(), [](auto& p) {
            return p.errors.size() >= 2;
        });
        if (!enough) continue;
        const auto labels = classify_regime(points, thresholds);
        for (std::size_t i = 0; i < serial.size(); ++i) {
            serial[i]->regime = std::string(to_string(labels[i]));
        }
    }

    for (auto& s : out) {
        if (s.mode == "serial" || !(s.median_t500 > 0.0)) continue;
        for (const auto& ref : out) {
            if (ref.problem == s.problem && ref.mode == s.mode && ref.size == 1 &&
                per_rank(ref) == per_rank(s) && ref.median_t500 > 0.0) {
                s.efficiency = ref.median_t500 / s.median_t500;
            }
        }
    }
    return out;
}

std::string format_summary(const std::vector<SummaryRow>& summary) {
    std::ostringstream os;
    os << std::left << std::setw(16) << "problem" << std::setw(8) << "mode" << std::right
       << std::setw(5) << "size" << std::setw(8) << "N_f" << std::setw(6) << "runs"
       << std::setw(12) << "err_median" << std::setw(12) << "err_min" << std::setw(12)
       << "err_max" << std::setw(12) << "gap_median" << std::setw(11) << "t500_s"
       << std::setw(8) << "E_ff" << "  regime\n";
    for (const auto& s : summary) {
        os << std::left << std::setw(16) << s.problem << std::setw(8) << s.mode << std::right
           << std::setw(5) << s.size << std::setw(8) << s.n_f << std::setw(6) << s.runs
           << std::scientific << std::setprecision(3) << std::setw(12) << s.median_error
           << std::setw(12) << s.min_error << std::setw(12) << s.max_error << std::setw(12)
           << s.median_gap << std::defaultfloat << std::setw(11) << std::setprecision(4)
           << s.median_t500 << std::setw(8) << std::setprecision(3)
           << (s.efficiency > 0.0 ? s.efficiency : std::nan("")) << "  " << s.regime;
        if (s.failed) os << " (" << s.failed << " failed)";
        os << '\n';
    }
    return os.str();
}

std::string svg_error_vs_nf(const std::vector<SummaryRow>& summary,
                            const std::vector<SweepRow>& rows, const std::string& problem) {
    std::vector<const SummaryRow*> points;
    for (const auto& s : summary) {
        if (s.problem == problem && s.mode == "serial" && std::isfinite(s.median_error)) {
            points.push_back(&s);
        }
    }
    if (points.empty()) return {};
    std::sort(points.begin(), points.end(), [](auto a, auto b) { return a->n_f < b->n_f; });

    double emin = 1e300, emax = 0.0;
    for (const auto& r : rows) {
        if (r.problem == problem && r.mode == "serial" && std::isfinite(r.error) && r.error > 0.0) {
            emin = std::min(emin, r.error);
            emax = std::max(emax, r.error);
        }
    }
    if (emax <= 0.0) return {};
    const double nmin = static_cast<double>(points.front()->n_f);
    const double nmax = static_cast<double>(points.back()->n_f);
    const LogAxis x{std::floor(std::log10(nmin)), std::ceil(std::log10(nmax) + 1e-9), 70.0, 620.0};
    const LogAxis y{std::floor(std::log10(emin)), std::ceil(std::log10(emax) + 1e-9), 380.0, 30.0};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"660\" height=\"430\" "
          "font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"660\" height=\"430\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double n = static_cast<double>(points[i]->n_f);
        const double left = i == 0 ? x.p0 : x(std::sqrt(n * static_cast<double>(points[i - 1]->n_f)));
        const double right = i + 1 == points.size()
                                 ? x.p1
                                 : x(std::sqrt(n * static_cast<double>(points[i + 1]->n_f)));
        os << "<rect x=\"" << num(left, 6) << "\" y=\"30\" width=\"" << num(right - left, 6)
           << "\" height=\"350\" fill=\"" << band_color(points[i]->regime) << "\"/>\n";
    }
    os << "<rect x=\"70\" y=\"30\" width=\"550\" height=\"350\" fill=\"none\" stroke=\"black\"/>\n";
    for (int d = static_cast<int>(x.lo); d <= static_cast<int>(x.hi); ++d) {
        const double px = x(std::pow(10.0, d));
        os << "<line x1=\"" << px << "\" y1=\"380\" x2=\"" << px << "\" y2=\"386\" stroke=\"black\"/>"
           << "<text x=\"" << px << "\" y=\"400\" text-anchor=\"middle\">1e" << d << "</text>\n";
    }
    for (int d = static_cast<int>(y.lo); d <= static_cast<int>(y.hi); ++d) {
        const double py = y(std::pow(10.0, d));
        os << "<line x1=\"64\" y1=\"" << py << "\" x2=\"70\" y2=\"" << py << "\" stroke=\"black\"/>"
           << "<text x=\"60\" y=\"" << py + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
    }
    os << "<text x=\"345\" y=\"422\" text-anchor=\"middle\">N_f</text>\n";
    os << "<text x=\"16\" y=\"205\" text-anchor=\"middle\" transform=\"rotate(-90 16 205)\">"
          "relative L2 error</text>\n";
    os << "<text x=\"345\" y=\"20\" text-anchor=\"middle\">" << problem << "</text>\n";
    for (const auto& r : rows) {
        if (r.problem != problem || r.mode != "serial" || !std::isfinite(r.error) || r.error <= 0.0) {
            continue;
        }
        os << "<circle cx=\"" << num(x(static_cast<double>(r.n_f)), 6) << "\" cy=\""
           << num(y(r.error), 6) << "\" r=\"2.5\" fill=\"#555555\" fill-opacity=\"0.6\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"#b00020\" stroke-width=\"1.5\" points=\"";
    for (const auto* p : points) {
        os << num(x(static_cast<double>(p->n_f)), 6) << ',' << num(y(p->median_error), 6) << ' ';
    }
    os << "\"/>\n";
    for (const auto* p : points) {
        os << "<rect x=\"" << num(x(static_cast<double>(p->n_f)) - 4, 6) << "\" y=\""
           << num(y(p->median_error) - 4, 6)
           << "\" width=\"8\" height=\"8\" fill=\"#b00020\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_efficiency(const std::vector<SummaryRow>& summary, const std::string& problem) {
    std::vector<const SummaryRow*> bars;
    for (const auto& s : summary) {
        if (s.problem == problem && s.mode != "serial" && s.efficiency > 0.0) bars.push_back(&s);
    }
    if (bars.empty()) return {};
    std::sort(bars.begin(), bars.end(), [](auto a, auto b) {
        return std::tie(a->mode, a->size, a->n_f) < std::tie(b->mode, b->size, b->n_f);
    });
    double top = 1.0;
    for (const auto* b : bars) top = std::max(top, b->efficiency);
    top *= 1.1;

    const double width = 550.0 / static_cast<double>(bars.size());
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"660\" height=\"430\" "
          "font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"660\" height=\"430\" fill=\"white\"/>\n";
    os << "<text x=\"345\" y=\"20\" text-anchor=\"middle\">" << problem << " efficiency</text>\n";
    const double y1 = 380.0 - 350.0 / top;
    os << "<line x1=\"70\" y1=\"" << y1 << "\" x2=\"620\" y2=\"" << y1
       << "\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const auto* b = bars[i];
        const double h = 350.0 * b->efficiency / top;
        const double x0 = 70.0 + static_cast<double>(i) * width;
        os << "<rect x=\"" << num(x0 + 0.15 * width, 6) << "\" y=\"" << num(380.0 - h, 6)
           << "\" width=\"" << num(0.7 * width, 6) << "\" height=\"" << num(h, 6) << "\" fill=\""
           << (b->mode == "weak" ? "#4c72b0" : "#dd8452") << "\"/>\n";
        os << "<text x=\"" << num(x0 + 0.5 * width, 6) << "\" y=\"" << num(374.0 - h, 6)
           << "\" text-anchor=\"middle\">" << num(100.0 * b->efficiency, 4) << "%</text>\n";
        os << "<text x=\"" << num(x0 + 0.5 * width, 6)
           << "\" y=\"398\" text-anchor=\"middle\">" << b->mode << " " << b->size << "</text>\n";
    }
    os << "<line x1=\"70\" y1=\"380\" x2=\"620\" y2=\"380\" stroke=\"black\"/>\n";
    os << "<text x=\"345\" y=\"422\" text-anchor=\"middle\">mode and size</text>\n";
    os << "</svg>\n";
    return os.str();
}

ReportFiles write_report(const std::vector<SweepRow>& rows, const fs::path& out_dir,
                         const RegimeThresholds& thresholds) {
    if (rows.empty()) throw std::invalid_argument("sweep file has no rows");
    const auto summary = summarize(rows, thresholds);

    std::map<fs::path, std::string> files;
    std::set<std::string> problems;
    for (const auto& s : summary) problems.insert(s.problem);
    for (const auto& p : problems) {
        if (auto svg = svg_error_vs_nf(summary, rows, p); !svg.empty()) {
            files[out_dir / ("error_vs_nf_" + p + ".svg")] = std::move(svg);
        }
        if (auto svg = svg_efficiency(summary, p); !svg.empty()) {
            files[out_dir / ("efficiency_" + p + ".svg")] = std::move(svg);
        }
    }
    std::ostringstream csv;
    csv.precision(17);
    csv << "problem,mode,size,N_f,runs,failed,median_error,min_error,max_error,median_gap,"
           "median_t500,efficiency,regime\n";
    for (const auto& s : summary) {
        csv << s.problem << ',' << s.mode << ',' << s.size << ',' << s.n_f << ',' << s.runs << ','
            << s.failed << ',' << s.median_error << ',' << s.min_error << ',' << s.max_error << ','
            << s.median_gap << ',' << s.median_t500 << ',' << s.efficiency << ',' << s.regime
            << '\n';
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error(out_dir.string() + ": cannot create directory: " + ec.message());
    ReportFiles out;
    out.summary = out_dir / "summary.csv";
    write_text(out.summary, csv.str());
    for (const auto& [path, text] : files) {
        write_text(path, text);
        out.plots.push_back(path);
    }
    return out;
}

} // namespace pinn
