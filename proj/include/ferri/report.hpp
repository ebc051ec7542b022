#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace ferri {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Provenance lines prepended to every exported table.
struct ProvenanceHeader {
    std::string tool;
    std::string config_hash;
    uint64_t seed = 0;

    void write(std::ostream& os) const {
        os << "# " << tool << '\n';
        os << "# config-hash=" << config_hash << '\n';
        os << "# seed=" << seed << '\n';
    }
};

struct ScanColumn {
    std::string name;
    std::vector<double> values;
};

inline void write_scan_csv(std::ostream& os, const ProvenanceHeader& header,
                           const std::vector<ScanColumn>& columns) {
    header.write(os);
    for (size_t c = 0; c < columns.size(); ++c) {
        if (c) os << ',';
        os << columns[c].name;
    }
    os << '\n';
    const size_t rows = columns.empty() ? 0 : columns[0].values.size();
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < columns.size(); ++c) {
            if (c) os << ',';
            os << format_double(columns[c].values[r]);
        }
        os << '\n';
    }
}

/// Minimal line chart of the first column against each further column.
inline void write_scan_svg(std::ostream& os, const std::string& title,
                           const std::vector<ScanColumn>& columns) {
    const int width = 640, height = 420, margin = 60;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\">\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\">" << title << "</text>\n";
    if (columns.size() < 2 || columns[0].values.size() < 2) {
        os << "</svg>\n";
        return;
    }
    const auto& xs = columns[0].values;
    double xmin = *std::min_element(xs.begin(), xs.end());
    double xmax = *std::max_element(xs.begin(), xs.end());
    double ymin = columns[1].values[0], ymax = ymin;
    for (size_t c = 1; c < columns.size(); ++c)
        for (double v : columns[c].values) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const auto px = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
    const auto py = [&](double y) {
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
    };
    os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin
       << "\" height=\"" << height - 2 * margin << "\" fill=\"none\" stroke=\"black\"/>\n";
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    for (size_t c = 1; c < columns.size(); ++c) {
        os << "<polyline fill=\"none\" stroke=\"" << palette[(c - 1) % 4] << "\" points=\"";
        for (size_t r = 0; r < xs.size(); ++r)
            os << px(xs[r]) << ',' << py(columns[c].values[r]) << ' ';
        os << "\"/>\n";
        os << "<text x=\"" << width - margin + 4 << "\" y=\""
           << py(columns[c].values.back()) << "\" font-size=\"11\">" << columns[c].name << "</text>\n";
    }
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
       << columns[0].name << "</text>\n";
    os << "</svg>\n";
}

} // namespace ferri
