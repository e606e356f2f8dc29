#pragma once

#include "qspec/composite.hpp"
#include "qspec/grid_array.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qspec {

/// target = offset + scale * axis value. The target is either a subsystem
/// field or an interaction parameter ("g" of a product term, or a named
/// constant of an expression term).
struct UpdateBinding {
    std::string axis;
    std::optional<int> subsystem;
    std::optional<int> interaction;
    std::string field;
    double offset = 0.0;
    double scale = 1.0;
};

struct SweepDef {
    HilbertSpaceDef hilbertspace;
    std::vector<Axis> axes;
    std::vector<UpdateBinding> bindings;
    int evals_count = 6;
    /// axis name -> subsystems whose bare spectrum depends on that axis. Axes
    /// not listed affect every subsystem.
    std::optional<std::map<std::string, std::vector<int>>> subsys_update_info;
    int worker_count = 1;
    double label_threshold = kDefaultLabelThreshold;
    bool store_evecs = true;
};

void validate(const SweepDef& def);

/// The HilbertSpaceDef at one grid point (`values` ordered like def.axes).
HilbertSpaceDef resolve_point(const SweepDef& def, const std::vector<double>& values);

struct SweepResult {
    std::vector<Axis> axes;
    std::vector<int> dims;
    int evals_count = 0;

    NamedGridArray<double> evals;                   // grid x evals_count
    NamedGridArray<cplx> evecs;                     // grid x bare_dim x evals_count (may be empty)
    std::vector<NamedGridArray<double>> bare_evals; // per subsystem: grid x truncated_dim
    std::vector<NamedGridArray<cplx>> bare_evecs;   // per subsystem: grid x native_dim x truncated_dim
    NamedGridArray<int> labels;                     // grid x evals_count: bare index or -1
    NamedGridArray<double> lamb;                    // grid x nsub x L
    NamedGridArray<double> chi;                     // grid x nsub x nsub x L x L
    NamedGridArray<double> kerr;                    // grid x nsub x nsub
    std::map<std::string, NamedGridArray<double>> custom;

    /// Fixes one axis at the grid value nearest to `value` (ties to the lower index).
    SweepResult slice(const std::string& axis, double value) const;
    SweepResult slice_index(const std::string& axis, std::size_t index) const;

    std::size_t grid_size() const { return evals.grid_size(); }
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Throws PointFailure naming the grid coordinates of the first failing point.
SweepResult run_sweep(const SweepDef& def, const ProgressFn& progress = {});

/// Stored data of one grid point.
struct PointContext {
    std::map<std::string, double> axis_values;
    std::vector<int> dims;
    Eigensystem dressed;
    std::vector<Eigensystem> bare;
    std::vector<std::optional<DressedLabel>> labels;
};

PointContext point_context(const SweepResult& result, std::size_t flat_point);

using CustomSweepFn = std::function<std::vector<double>(const PointContext&)>;

/// Adds result.custom[name]: grid x datum size (taken from the first point).
void add_custom_sweep(SweepResult& result, const std::string& name, const CustomSweepFn& fn);

enum class Coloring { Labeled, Plain };

struct TransitionOptions {
    std::optional<std::vector<int>> initial;  // default: ground (0, ..., 0)
    int photon_number = 1;
    bool sidebands = false;
    std::optional<std::vector<int>> subsystems;
    Coloring coloring = Coloring::Labeled;
};

struct Transition {
    std::optional<std::vector<int>> final_state;  // empty for plain coloring
    int dressed_index = -1;                      // plain coloring only
    std::vector<int> changed_subsystems;
    bool sideband = false;
    std::vector<double> energies;  // NaN where a label does not resolve
};

struct TransitionSet {
    Axis axis;
    std::vector<int> initial;
    int photon_number = 1;
    Coloring coloring = Coloring::Labeled;
    std::vector<Transition> transitions;
};

/// `sliced` must have exactly one axis left.
TransitionSet transitions(const SweepResult& sliced, const TransitionOptions& options = {});

}  // namespace qspec
