// Sweep serialization: CSV tables and a minimal standalone SVG chart.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "experiments.hpp"

namespace mflux {

class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// 17 significant digits: enough to round-trip any double.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline double parse_double(const std::string& s) {
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw FormatError("not a number: '" + s + "'");
    return x;
}

inline constexpr const char* sweep_csv_header = "f,e0_full,e0_even,e0_odd,gap,node_amp,current,status";

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
    const auto field = [&](const std::optional<double>& v) {
        os << ',';
        if (v) os << format_double(*v);
    };
    os << sweep_csv_header << '\n';
    for (const auto& r : records) {
        os << format_double(r.f);
        field(r.e0_full);
        field(r.e0_even);
        field(r.e0_odd);
        field(r.gap);
        field(r.node_amp);
        field(r.current);
        os << ',' << (r.ok ? "ok" : "failed") << '\n';
    }
}

inline std::vector<SweepRecord> parse_sweep_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != sweep_csv_header) throw FormatError("missing sweep CSV header");
    std::vector<SweepRecord> records;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (cells.size() != 8) throw FormatError("sweep CSV row has " + std::to_string(cells.size()) + " fields");
        const auto opt = [](const std::string& c) -> std::optional<double> {
            if (c.empty()) return std::nullopt;
            return parse_double(c);
        };
        SweepRecord r;
        r.f = parse_double(cells[0]);
        r.e0_full = opt(cells[1]);
        r.e0_even = opt(cells[2]);
        r.e0_odd = opt(cells[3]);
        r.gap = opt(cells[4]);
        r.node_amp = opt(cells[5]);
        r.current = opt(cells[6]);
        if (cells[7] != "ok" && cells[7] != "failed") throw FormatError("unknown status '" + cells[7] + "'");
        r.ok = cells[7] == "ok";
        records.push_back(std::move(r));
    }
    return records;
}

/// Line chart of the ground-energy columns against f.
inline void write_sweep_svg(std::ostream& os, const std::vector<SweepRecord>& records, const std::string& title) {
    constexpr double width = 720, height = 480, left = 80, right = 150, top = 40, bottom = 60;
    struct Series {
        const char* name;
        const char* color;
        EnergyColumn column;
    };
    const Series series[] = {{"e0_full", "#000000", EnergyColumn::full},
                             {"e0_even", "#1f77b4", EnergyColumn::even},
                             {"e0_odd", "#d62728", EnergyColumn::odd}};
    double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
    double emin = fmin, emax = -fmin;
    for (const auto& r : records) {
        fmin = std::min(fmin, r.f);
        fmax = std::max(fmax, r.f);
        for (const auto& s : series) {
            if (const auto v = column_value(r, s.column)) {
                emin = std::min(emin, *v);
                emax = std::max(emax, *v);
            }
        }
    }
    if (!std::isfinite(fmin)) fmin = 0.0;
    if (!(fmax > fmin)) fmax = fmin + 1.0;
    if (!(emax > emin)) {
        emin = std::isfinite(emin) ? emin - 0.5 : 0.0;
        emax = emin + 1.0;
    }
    const double pw = width - left - right, ph = height - top - bottom;
    const auto px = [&](double f) { return left + (f - fmin) / (fmax - fmin) * pw; };
    const auto py = [&](double e) { return top + (emax - e) / (emax - emin) * ph; };
    char buf[64];
    const auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.2f", x);
        return std::string(buf);
    };
    const auto tick = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.4g", x);
        return std::string(buf);
    };

    os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
       << "</text>\n"
       << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double f = fmin + (fmax - fmin) * t / 4.0;
        const double e = emin + (emax - emin) * t / 4.0;
        os << "<text x=\"" << num(px(f)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\" font-size=\"11\">"
           << tick(f) << "</text>\n";
        os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(e) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
           << tick(e) << "</text>\n";
    }
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 16)
       << "\" text-anchor=\"middle\" font-size=\"13\">flux f = Phi/Phi0</text>\n"
       << "<text x=\"18\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
       << num(top + ph / 2) << ")\">ground energy (units of tx)</text>\n";
    int legend = 0;
    for (const auto& s : series) {
        std::string points;
        for (const auto& r : records) {
            if (const auto v = column_value(r, s.column)) {
                points += num(px(r.f)) + ',' + num(py(*v)) + ' ';
            }
        }
        if (points.empty()) continue;
        points.pop_back();
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
        const double ly = top + 16 + 20 * legend++;
        os << "<line x1=\"" << num(width - right + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(width - right + 36)
           << "\" y2=\"" << num(ly) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n"
           << "<text x=\"" << num(width - right + 42) << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">" << s.name
           << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace mflux
