#pragma once

#include <map>
#include <string>
#include <vector>

namespace qspec::io {

inline constexpr const char* kVersion = "0.1.0";

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;  // non-finite points break the line
    std::string color;      // empty: palette
    bool dashed = false;
};

struct LinePlot {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<Series> series;
    std::map<std::string, std::string> metadata;
    bool log_y = false;
    bool legend = true;
};

struct HeatMap {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  // row-major
    std::map<std::string, std::string> metadata;
};

/// Deterministic SVG text. Only the version comment depends on the build.
std::string render(const LinePlot& plot);
std::string render(const HeatMap& map);

}  // namespace qspec::io
