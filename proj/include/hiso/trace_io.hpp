#pragma once

#include "hiso/dhiso.hpp"
#include "hiso/flows.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hiso {

/// One row of the trace file schema. Fields that do not apply to a run kind
/// (e.g. consensus norms of a centralized run) are zero.
struct TraceRow {
    double t = 0.0;
    double f_gap = 0.0;
    double cons_x = 0.0;
    double cons_z = 0.0;
    double sum_z = 0.0;
    double sum_v = 0.0;
    double max_opt_err = 0.0;
    double max_field_norm = 0.0;
};

inline constexpr const char* kTraceHeader = "t,f_gap,cons_x,cons_z,sum_z,sum_v,max_opt_err,max_field_norm";

inline std::vector<TraceRow> to_rows(const FlowTrace& trace) {
    std::vector<TraceRow> rows;
    rows.reserve(trace.steps.size());
    for (const auto& s : trace.steps) {
        TraceRow r;
        r.t = s.t;
        r.f_gap = s.f_gap;
        r.max_field_norm = s.field_norm;
        rows.push_back(r);
    }
    return rows;
}

inline std::vector<TraceRow> to_rows(const DistTrace& trace) {
    std::vector<TraceRow> rows;
    rows.reserve(trace.steps.size());
    for (const auto& s : trace.steps) {
        TraceRow r;
        r.t = s.t;
        r.f_gap = s.f_gap;
        r.cons_x = s.diag.cons_x;
        r.cons_z = s.diag.cons_z;
        r.sum_z = s.diag.sum_z;
        r.sum_v = s.diag.sum_v;
        r.max_opt_err = s.max_opt_err;
        r.max_field_norm = s.max_field_norm;
        rows.push_back(r);
    }
    return rows;
}

namespace detail {

/// Shortest round-tripping decimal form, locale-independent.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error("trace parse: bad number '" + std::string(s) + "'");
    return v;
}

/// Keeps at most max_rows rows: every stride-th row plus the final one.
inline std::vector<TraceRow> decimate(const std::vector<TraceRow>& rows, size_t max_rows = 10000) {
    if (rows.size() <= max_rows) return rows;
    const size_t stride = (rows.size() + max_rows - 2) / (max_rows - 1);
    std::vector<TraceRow> out;
    for (size_t k = 0; k < rows.size(); k += stride) out.push_back(rows[k]);
    if (out.back().t != rows.back().t) out.push_back(rows.back());
    return out;
}

}  // namespace detail

/// Writes the trace CSV (decimated to at most 10,000 rows, final row always
/// kept). Byte output is deterministic for identical traces.
inline void write_trace(const std::vector<TraceRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_trace: cannot open " + path);
    out << kTraceHeader << "\n";
    for (const auto& r : detail::decimate(rows)) {
        out << detail::format_double(r.t) << ',' << detail::format_double(r.f_gap) << ','
            << detail::format_double(r.cons_x) << ',' << detail::format_double(r.cons_z) << ','
            << detail::format_double(r.sum_z) << ',' << detail::format_double(r.sum_v) << ','
            << detail::format_double(r.max_opt_err) << ','
            << detail::format_double(r.max_field_norm) << "\n";
    }
    if (!out) throw std::runtime_error("write_trace: write failed for " + path);
}

inline std::vector<TraceRow> read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_trace: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        throw std::runtime_error("read_trace: bad header in " + path);

    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<double, 8> vals{};
        size_t pos = 0;
        for (int k = 0; k < 8; ++k) {
            const size_t next = (k == 7) ? line.size() : line.find(',', pos);
            if (next == std::string::npos)
                throw std::runtime_error("read_trace: short row in " + path);
            vals[k] = detail::parse_double(std::string_view(line).substr(pos, next - pos));
            pos = next + 1;
        }
        rows.push_back({vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6], vals[7]});
    }
    return rows;
}

/// Named trace set for plotting.
struct NamedTrace {
    std::string name;
    std::vector<TraceRow> rows;
};

/// Emits a self-contained SVG with f_gap versus t on a log10 y-axis, one
/// polyline per named trace. Non-positive gaps are clamped to 1e-16 before
/// the log transform.
inline void emit_plot(const std::vector<NamedTrace>& traces, const std::string& path,
                      const std::string& title = "objective gap") {
    if (traces.empty()) throw std::invalid_argument("emit_plot: need at least one trace");

    constexpr double kFloor = 1e-16;
    const double width = 880, height = 560;
    const double ml = 70, mr = 160, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double t_max = 0.0, y_lo = 0.0, y_hi = -16.0;
    for (const auto& tr : traces) {
        for (const auto& r : tr.rows) {
            t_max = std::max(t_max, r.t);
            const double ly = std::log10(std::max(r.f_gap, kFloor));
            y_lo = std::min(y_lo, ly);
            y_hi = std::max(y_hi, ly);
        }
    }
    if (t_max <= 0.0) t_max = 1.0;
    y_lo = std::floor(y_lo) - 0.5;
    y_hi = std::ceil(y_hi) + 0.5;

    const auto px = [&](double t) { return ml + pw * t / t_max; };
    const auto py = [&](double ly) { return mt + ph * (y_hi - ly) / (y_hi - y_lo); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << ml + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    // axes box and decade grid
    svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int dec = static_cast<int>(std::ceil(y_lo)); dec <= static_cast<int>(std::floor(y_hi));
         ++dec) {
        const double y = py(dec);
        svg << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw << "\" y2=\"" << y
            << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << dec
            << "</text>\n";
    }
    const int n_xticks = 6;
    for (int k = 0; k <= n_xticks; ++k) {
        const double t = t_max * k / n_xticks;
        const double x = px(t);
        svg << "<line x1=\"" << x << "\" y1=\"" << mt + ph << "\" x2=\"" << x << "\" y2=\""
            << mt + ph + 5 << "\" stroke=\"black\"/>\n";
        std::ostringstream lab;
        lab.precision(3);
        lab << t;
        svg << "<text x=\"" << x << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << lab.str()
            << "</text>\n";
    }
    svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">t</text>\n";

    for (size_t i = 0; i < traces.size(); ++i) {
        const char* color = palette[i % (sizeof(palette) / sizeof(palette[0]))];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& r : traces[i].rows)
            svg << px(r.t) << ',' << py(std::log10(std::max(r.f_gap, kFloor))) << ' ';
        svg << "\"/>\n";
        const double ly = mt + 16 + 18 * static_cast<double>(i);
        svg << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 36
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << ml + pw + 42 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << traces[i].name << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_plot: cannot open " + path);
    out << svg.str();
    if (!out) throw std::runtime_error("emit_plot: write failed for " + path);
}

}  // namespace hiso
