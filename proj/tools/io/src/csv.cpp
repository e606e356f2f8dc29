#include "qspec/io/csv.hpp"

#include "qspec/io/svg.hpp"

#include <fmt/format.h>

#include <cmath>

namespace qspec::io {

namespace {

std::string quote(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

CsvWriter::CsvWriter(std::string command, std::string units, const Json& input) {
    text_ = fmt::format("# qspec {} {}\n# units: {}\n# input: {}\n", command, kVersion, units, input.dump());
}

void CsvWriter::columns(std::vector<std::string> names) {
    row(names);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ',';
        text_ += quote(cells[i]);
    }
    text_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    row(cells);
}

std::string CsvWriter::str() const { return text_; }

}  // namespace qspec::io
