#pragma once

#include "qspec/composite.hpp"
#include "qspec/qubits.hpp"
#include "qspec/sweep.hpp"
#include "qspec/units.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace qspec::io {

using Json = nlohmann::json;

/// Finite numbers as JSON numbers, everything else as "inf", "-inf" or "nan".
Json num(double v);
/// Accepts numbers and the strings written by num().
double to_double(const Json& j, const std::string& path);
int to_int(const Json& j, const std::string& path);
bool to_bool(const Json& j, const std::string& path);
std::string to_string_value(const Json& j, const std::string& path);

/// Parses JSON text; syntax errors carry line and column.
Json parse_document(const std::string& text);
Json load_document(const std::filesystem::path& file);

/// [..] or {"linspace": [start, stop, count]}.
std::vector<double> values_from_json(const Json& j, const std::string& path);
std::vector<int> int_list(const Json& j, const std::string& path);

// Conversions. Failures throw qspec::Error whose field is the JSON path.

QubitSpec qubit_from_json(const Json& j, const std::string& path = "qubit");
Json to_json(const QubitSpec& spec);

/// {"re": [[..]], "im": [[..]]} or a plain real [[..]].
CMatrix matrix_from_json(const Json& j, const std::string& path);
Json to_json(const CMatrix& m);

HilbertSpaceDef hilbertspace_from_json(const Json& j, const std::string& path = "hilbertspace");
Json to_json(const HilbertSpaceDef& def);

SweepDef sweep_from_json(const Json& j, const std::string& path = "sweep");
Json to_json(const SweepDef& def);

Json to_json(const Axis& axis);

/// "units" member of a document, GHz when absent.
UnitContext units_from_document(const Json& doc);

/// Row-major nested arrays of the given shape.
Json nested(const std::vector<double>& data, const std::vector<std::size_t>& shape);
Json nested(const std::vector<int>& data, const std::vector<std::size_t>& shape);

}  // namespace qspec::io
