#pragma once

#include "qspec/io/json.hpp"
#include "qspec/noise.hpp"
#include "qspec/sweep.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qspec::io {

// Payload builders shared by the CLI and the service. Each takes a request
// document, resolves it completely and returns a payload whose "input"
// member echoes the resolved request. Payloads serialize with dump_payload.

std::string dump_payload(const Json& payload);

/// {"qubit", "scan"?: {"param", "values"}, "evals_count"?, "units"?,
///  "matrix_elements"?: {"operator", "select"?},
///  "wavefunctions"?: {"which", "representation"?, "mode"?, "grid"?}}
Json spectrum_payload(const Json& request, int workers = 1);

/// {"qubit", "which"?, "representation"?, "mode"?, "grid"?, "units"?}
Json wavefunction_payload(const Json& request);

/// {"qubit", "operator", "evals_count"?, "scan"?, "units"?}
Json matelem_payload(const Json& request, int workers = 1);

/// {"qubit", "noise": {"channels"?, "effective"?, "param"?, "values"?,
///  "options"?, "i"?, "j"?, "total"?, "get_rate"?}, "units"?}
Json noise_payload(const Json& request, int workers = 1);

/// {"hilbertspace" | "qubit", "storage"?: "dense" | "coo" | "auto", "units"?}
Json hamiltonian_export(const Json& request);

/// Schema and invariant check of a document without computation.
Json validation_report(const std::string& text);

// ---- sweeps ---------------------------------------------------------------

/// A sweep document is {"sweep": SweepDef, "units"?} or a bare SweepDef.
struct SweepRequest {
    SweepDef def;
    UnitContext units;
    Json input;  // resolved sweep definition
};

SweepRequest sweep_request(const Json& doc);

struct SliceQuery {
    std::vector<std::pair<std::string, double>> fixes;
    std::string view = "evals";
    /// View parameters; values may be JSON-typed or query strings.
    Json params = Json::object();
};

/// View of a sweep result after applying the fixes in axis order.
Json slice_view_payload(const SweepRequest& request, const SweepResult& result, const SliceQuery& query);

/// Transition options from view parameters ("initial", "photon_number",
/// "sidebands", "subsystems", "coloring").
TransitionOptions transition_options(const Json& params);

}  // namespace qspec::io
