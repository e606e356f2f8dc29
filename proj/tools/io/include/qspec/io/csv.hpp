#pragma once

#include "qspec/io/json.hpp"

#include <string>
#include <vector>

namespace qspec::io {

/// Shortest round-trip text; non-finite values as inf, -inf, nan.
std::string format_number(double v);

/// CSV with a "#" provenance header naming the command, units and resolved input.
class CsvWriter {
public:
    CsvWriter(std::string command, std::string units, const Json& input);

    void columns(std::vector<std::string> names);
    void row(const std::vector<std::string>& cells);
    void row(const std::vector<double>& values);

    std::string str() const;

private:
    std::string text_;
};

}  // namespace qspec::io
