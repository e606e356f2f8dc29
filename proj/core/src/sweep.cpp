#include "qspec/sweep.hpp"

#include "qspec/error.hpp"
#include "qspec/parallel.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>

namespace qspec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::set<std::string> kBuiltinKeys{"evals", "evecs", "bare_evals", "bare_evecs",
                                         "lamb",  "chi",   "kerr",       "labels"};

std::string coordinates(const std::vector<Axis>& axes, const std::vector<std::size_t>& idx) {
    std::vector<std::string> parts;
    for (std::size_t a = 0; a < axes.size(); ++a)
        parts.push_back(fmt::format("{}={}", axes[a].name, axes[a].values[idx[a]]));
    return fmt::format("{}", fmt::join(parts, ", "));
}

Error point_failure(const std::vector<Axis>& axes, const std::vector<std::size_t>& idx, const std::exception& e) {
    std::string kind = "error";
    if (const auto* qe = dynamic_cast<const Error*>(&e)) kind = std::string(to_string(qe->kind()));
    return Error(ErrorKind::PointFailure, fmt::format("at {}: [{}] {}", coordinates(axes, idx), kind, e.what()),
                 coordinates(axes, idx));
}

std::vector<double> point_values(const std::vector<Axis>& axes, const std::vector<std::size_t>& idx) {
    std::vector<double> v(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a) v[a] = axes[a].values[idx[a]];
    return v;
}

std::vector<std::size_t> grid_index_of(const std::vector<Axis>& axes, std::size_t flat) {
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
        idx[a] = flat % axes[a].values.size();
        flat /= axes[a].values.size();
    }
    return idx;
}

std::size_t axis_index(const std::vector<Axis>& axes, const std::string& name) {
    for (std::size_t a = 0; a < axes.size(); ++a)
        if (axes[a].name == name) return a;
    throw Error(ErrorKind::UnknownAxis, fmt::format("unknown axis '{}'", name), name);
}

}  // namespace

void validate(const SweepDef& def) {
    validate(def.hilbertspace);
    if (def.axes.empty()) throw Error(ErrorKind::SpecValidation, "a sweep needs at least one axis", "axes");
    std::set<std::string> names;
    for (const auto& axis : def.axes) {
        const std::string field = "axes." + axis.name;
        if (axis.name.empty()) throw Error(ErrorKind::SpecValidation, "axis name must be non-empty", "axes");
        if (!names.insert(axis.name).second)
            throw Error(ErrorKind::SpecValidation, fmt::format("duplicate axis '{}'", axis.name), field);
        if (axis.values.empty())
            throw Error(ErrorKind::SpecValidation, fmt::format("axis '{}' has no values", axis.name), field);
        for (double v : axis.values)
            if (!std::isfinite(v))
                throw Error(ErrorKind::SpecValidation, fmt::format("axis '{}' has non-finite values", axis.name),
                            field);
        if (axis.values.size() > 1) {
            const bool up = axis.values[1] > axis.values[0];
            for (std::size_t i = 1; i < axis.values.size(); ++i)
                if (up ? !(axis.values[i] > axis.values[i - 1]) : !(axis.values[i] < axis.values[i - 1]))
                    throw Error(ErrorKind::SpecValidation,
                                fmt::format("axis '{}' must be strictly monotonic", axis.name), field);
        }
    }

    const auto nsub = static_cast<int>(def.hilbertspace.subsystems.size());
    const auto nint = static_cast<int>(def.hilbertspace.interactions.size());
    for (std::size_t b = 0; b < def.bindings.size(); ++b) {
        const auto& bind = def.bindings[b];
        const std::string field = fmt::format("bindings[{}]", b);
        if (!names.count(bind.axis))
            throw Error(ErrorKind::UnknownAxis, fmt::format("{}: unknown axis '{}'", field, bind.axis), field + ".axis");
        if (bind.subsystem.has_value() == bind.interaction.has_value())
            throw Error(ErrorKind::SpecValidation, field + ": give exactly one of subsystem or interaction", field);
        if (!std::isfinite(bind.offset) || !std::isfinite(bind.scale))
            throw Error(ErrorKind::SpecValidation, field + ": offset and scale must be finite", field);
        if (bind.subsystem) {
            const int s = *bind.subsystem;
            if (s < 0 || s >= nsub)
                throw Error(ErrorKind::SpecValidation, fmt::format("{}: subsystem {} out of range", field, s),
                            field + ".subsystem");
            const QubitSpec& spec = def.hilbertspace.subsystems[static_cast<std::size_t>(s)];
            const auto params = param_list(spec);
            auto it = std::find_if(params.begin(), params.end(), [&](const ParamInfo& p) { return p.name == bind.field; });
            if (it == params.end())
                throw Error(ErrorKind::UnknownParameter,
                            fmt::format("{}: {} has no parameter '{}'", field, family_name(spec), bind.field),
                            field + ".field");
            if (it->integer)
                throw Error(ErrorKind::SpecValidation,
                            fmt::format("{}: integer field '{}' cannot be swept", field, bind.field), field + ".field");
        } else {
            const int t = *bind.interaction;
            if (t < 0 || t >= nint)
                throw Error(ErrorKind::SpecValidation, fmt::format("{}: interaction {} out of range", field, t),
                            field + ".interaction");
            const auto& term = def.hilbertspace.interactions[static_cast<std::size_t>(t)];
            const bool ok = (std::holds_alternative<ProductTerm>(term) && bind.field == "g") ||
                            (std::holds_alternative<ExpressionTerm>(term) &&
                             std::get<ExpressionTerm>(term).constants.count(bind.field));
            if (!ok)
                throw Error(ErrorKind::UnknownParameter,
                            fmt::format("{}: interaction {} has no sweepable parameter '{}'", field, t, bind.field),
                            field + ".field");
        }
    }

    const int dim = bare_dimension(def.hilbertspace);
    if (def.evals_count < 1 || def.evals_count > dim)
        throw Error(ErrorKind::InvalidCount, fmt::format("evals_count {} outside [1, {}]", def.evals_count, dim),
                    "evals_count");
    if (def.worker_count < 1) throw Error(ErrorKind::SpecValidation, "worker_count must be >= 1", "worker_count");
    if (!(def.label_threshold >= 0.0 && def.label_threshold < 1.0))
        throw Error(ErrorKind::SpecValidation, "label_threshold must lie in [0, 1)", "label_threshold");
    if (def.subsys_update_info) {
        for (const auto& [axis, subs] : *def.subsys_update_info) {
            if (!names.count(axis))
                throw Error(ErrorKind::UnknownAxis, fmt::format("subsys_update_info: unknown axis '{}'", axis),
                            "subsys_update_info." + axis);
            for (int s : subs)
                if (s < 0 || s >= nsub)
                    throw Error(ErrorKind::SpecValidation,
                                fmt::format("subsys_update_info: subsystem {} out of range", s),
                                "subsys_update_info." + axis);
        }
    }
}

HilbertSpaceDef resolve_point(const SweepDef& def, const std::vector<double>& values) {
    HilbertSpaceDef hs = def.hilbertspace;
    for (const auto& bind : def.bindings) {
        const double x = values[axis_index(def.axes, bind.axis)];
        const double v = bind.offset + bind.scale * x;
        if (bind.subsystem) {
            auto& spec = hs.subsystems[static_cast<std::size_t>(*bind.subsystem)];
            spec = with_param(spec, bind.field, v);
        } else {
            auto& term = hs.interactions[static_cast<std::size_t>(*bind.interaction)];
            if (auto* p = std::get_if<ProductTerm>(&term))
                p->g = cplx(v, 0.0);
            else
                std::get<ExpressionTerm>(term).constants[bind.field] = v;
        }
    }
    return hs;
}

SweepResult run_sweep(const SweepDef& def, const ProgressFn& progress) {
    validate(def);
    const auto& axes = def.axes;
    const auto dims = subsystem_dims(def.hilbertspace);
    const std::size_t nsub = dims.size();
    const int bare_dim = bare_dimension(def.hilbertspace);
    const int levels = *std::max_element(dims.begin(), dims.end());
    const auto n_evals = static_cast<std::size_t>(def.evals_count);

    SweepResult r;
    r.axes = axes;
    r.dims = dims;
    r.evals_count = def.evals_count;
    r.evals = NamedGridArray<double>(axes, {n_evals});
    if (def.store_evecs) r.evecs = NamedGridArray<cplx>(axes, {static_cast<std::size_t>(bare_dim), n_evals});
    r.labels = NamedGridArray<int>(axes, {n_evals}, -1);
    const auto ns = nsub, nl = static_cast<std::size_t>(levels);
    r.lamb = NamedGridArray<double>(axes, {ns, nl}, kNaN);
    r.chi = NamedGridArray<double>(axes, {ns, ns, nl, nl}, kNaN);
    r.kerr = NamedGridArray<double>(axes, {ns, ns}, kNaN);
    for (std::size_t j = 0; j < nsub; ++j) {
        const auto td = static_cast<std::size_t>(dims[j]);
        const auto native = static_cast<std::size_t>(hilbert_dim(def.hilbertspace.subsystems[j]));
        r.bare_evals.emplace_back(axes, std::vector<std::size_t>{td});
        r.bare_evecs.emplace_back(axes, std::vector<std::size_t>{native, td});
    }

    const std::size_t n_points = r.evals.grid_size();

    // Bare tasks: one per (subsystem, coordinates along the axes that affect it).
    struct BareTask {
        std::size_t subsystem;
        std::size_t representative;
    };
    std::vector<BareTask> tasks;
    std::vector<std::vector<std::size_t>> task_of(nsub, std::vector<std::size_t>(n_points));
    for (std::size_t j = 0; j < nsub; ++j) {
        std::vector<bool> affects(axes.size(), true);
        if (def.subsys_update_info) {
            for (std::size_t a = 0; a < axes.size(); ++a) {
                auto it = def.subsys_update_info->find(axes[a].name);
                if (it == def.subsys_update_info->end()) continue;
                affects[a] = std::find(it->second.begin(), it->second.end(), static_cast<int>(j)) != it->second.end();
            }
        }
        std::map<std::vector<std::size_t>, std::size_t> seen;
        for (std::size_t p = 0; p < n_points; ++p) {
            const auto idx = grid_index_of(axes, p);
            std::vector<std::size_t> key;
            for (std::size_t a = 0; a < axes.size(); ++a)
                if (affects[a]) key.push_back(idx[a]);
            auto [it, inserted] = seen.emplace(key, tasks.size());
            if (inserted) tasks.push_back({j, p});
            task_of[j][p] = it->second;
        }
    }

    const std::size_t total = tasks.size() + n_points;
    std::atomic<std::size_t> done{0};
    auto tick = [&] {
        const std::size_t d = ++done;
        if (progress) progress(d, total);
    };

    std::vector<Eigensystem> bare_results(tasks.size());
    parallel_for(
        tasks.size(), def.worker_count,
        [&](std::size_t t) {
            const auto idx = grid_index_of(axes, tasks[t].representative);
            try {
                const HilbertSpaceDef hs = resolve_point(def, point_values(axes, idx));
                const QubitSpec& spec = hs.subsystems[tasks[t].subsystem];
                bare_results[t] = eigensys(spec, truncated_dim(spec));
            } catch (const std::exception& e) {
                throw point_failure(axes, idx, e);
            }
        },
        tick);

    parallel_for(
        n_points, def.worker_count,
        [&](std::size_t p) {
            const auto idx = grid_index_of(axes, p);
            try {
                const HilbertSpaceDef hs = resolve_point(def, point_values(axes, idx));
                std::vector<Eigensystem> bare;
                bare.reserve(nsub);
                for (std::size_t j = 0; j < nsub; ++j) bare.push_back(bare_results[task_of[j][p]]);
                const Eigensystem dressed = dressed_eigensys(hs, bare, def.evals_count);
                const auto labels = label_dressed_states(dims, dressed, def.label_threshold);
                const auto disp = dispersive_coefficients(dims, bare, dressed, labels, false);

                auto ev = r.evals.record(p);
                for (std::size_t k = 0; k < n_evals; ++k) ev[k] = dressed.evals(static_cast<Eigen::Index>(k));
                if (def.store_evecs) {
                    auto vec = r.evecs.record(p);
                    for (int b = 0; b < bare_dim; ++b)
                        for (std::size_t k = 0; k < n_evals; ++k)
                            vec[static_cast<std::size_t>(b) * n_evals + k] = dressed.evecs(b, static_cast<Eigen::Index>(k));
                }
                auto lab = r.labels.record(p);
                for (std::size_t k = 0; k < n_evals; ++k)
                    lab[k] = labels[k] ? bare_index(dims, labels[k]->excitations) : -1;
                std::copy(disp.lamb.begin(), disp.lamb.end(), r.lamb.record(p).begin());
                std::copy(disp.chi.begin(), disp.chi.end(), r.chi.record(p).begin());
                std::copy(disp.kerr.begin(), disp.kerr.end(), r.kerr.record(p).begin());
                for (std::size_t j = 0; j < nsub; ++j) {
                    const auto& es = bare[j];
                    auto be = r.bare_evals[j].record(p);
                    for (Eigen::Index k = 0; k < es.evals.size(); ++k) be[static_cast<std::size_t>(k)] = es.evals(k);
                    auto bv = r.bare_evecs[j].record(p);
                    const auto cols = static_cast<std::size_t>(es.evecs.cols());
                    for (Eigen::Index row = 0; row < es.evecs.rows(); ++row)
                        for (Eigen::Index c = 0; c < es.evecs.cols(); ++c)
                            bv[static_cast<std::size_t>(row) * cols + static_cast<std::size_t>(c)] = es.evecs(row, c);
                }
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::PointFailure) throw;
                throw point_failure(axes, idx, e);
            } catch (const std::exception& e) {
                throw point_failure(axes, idx, e);
            }
        },
        tick);
    return r;
}

SweepResult SweepResult::slice_index(const std::string& axis, std::size_t index) const {
    const std::size_t pos = axis_index(axes, axis);
    if (index >= axes[pos].values.size())
        throw Error(ErrorKind::UnknownAxis, fmt::format("index {} out of range for axis '{}'", index, axis), axis);
    SweepResult out;
    for (std::size_t a = 0; a < axes.size(); ++a)
        if (a != pos) out.axes.push_back(axes[a]);
    out.dims = dims;
    out.evals_count = evals_count;
    out.evals = evals.slice_index(axis, index);
    if (!evecs.data().empty()) out.evecs = evecs.slice_index(axis, index);
    for (const auto& b : bare_evals) out.bare_evals.push_back(b.slice_index(axis, index));
    for (const auto& b : bare_evecs) out.bare_evecs.push_back(b.slice_index(axis, index));
    out.labels = labels.slice_index(axis, index);
    out.lamb = lamb.slice_index(axis, index);
    out.chi = chi.slice_index(axis, index);
    out.kerr = kerr.slice_index(axis, index);
    for (const auto& [name, arr] : custom) out.custom.emplace(name, arr.slice_index(axis, index));
    return out;
}

SweepResult SweepResult::slice(const std::string& axis, double value) const {
    const std::size_t pos = axis_index(axes, axis);
    return slice_index(axis, nearest_index(axes[pos].values, value));
}

PointContext point_context(const SweepResult& r, std::size_t flat) {
    PointContext ctx;
    const auto idx = grid_index_of(r.axes, flat);
    for (std::size_t a = 0; a < r.axes.size(); ++a) ctx.axis_values[r.axes[a].name] = r.axes[a].values[idx[a]];
    ctx.dims = r.dims;
    const auto n = static_cast<Eigen::Index>(r.evals_count);
    const auto ev = r.evals.record(flat);
    ctx.dressed.evals = RVector(n);
    for (Eigen::Index k = 0; k < n; ++k) ctx.dressed.evals(k) = ev[static_cast<std::size_t>(k)];
    const bool have_vecs = r.evecs.grid_size() == r.evals.grid_size() && !r.evecs.data().empty();
    if (have_vecs) {
        const auto rows = static_cast<Eigen::Index>(r.evecs.trailing()[0]);
        const auto vec = r.evecs.record(flat);
        ctx.dressed.evecs = CMatrix(rows, n);
        for (Eigen::Index b = 0; b < rows; ++b)
            for (Eigen::Index k = 0; k < n; ++k) ctx.dressed.evecs(b, k) = vec[static_cast<std::size_t>(b * n + k)];
    }
    for (std::size_t j = 0; j < r.bare_evals.size(); ++j) {
        Eigensystem es;
        const auto be = r.bare_evals[j].record(flat);
        es.evals = RVector(static_cast<Eigen::Index>(be.size()));
        for (std::size_t k = 0; k < be.size(); ++k) es.evals(static_cast<Eigen::Index>(k)) = be[k];
        const auto rows = static_cast<Eigen::Index>(r.bare_evecs[j].trailing()[0]);
        const auto cols = static_cast<Eigen::Index>(r.bare_evecs[j].trailing()[1]);
        const auto bv = r.bare_evecs[j].record(flat);
        es.evecs = CMatrix(rows, cols);
        for (Eigen::Index row = 0; row < rows; ++row)
            for (Eigen::Index c = 0; c < cols; ++c) es.evecs(row, c) = bv[static_cast<std::size_t>(row * cols + c)];
        ctx.bare.push_back(std::move(es));
    }
    const auto lab = r.labels.record(flat);
    for (Eigen::Index k = 0; k < n; ++k) {
        const int b = lab[static_cast<std::size_t>(k)];
        if (b < 0) {
            ctx.labels.emplace_back();
            continue;
        }
        const double overlap = have_vecs ? std::norm(ctx.dressed.evecs(b, k)) : kNaN;
        ctx.labels.emplace_back(DressedLabel{bare_tuple(r.dims, b), overlap});
    }
    return ctx;
}

void add_custom_sweep(SweepResult& result, const std::string& name, const CustomSweepFn& fn) {
    if (name.empty() || kBuiltinKeys.count(name) || result.custom.count(name))
        throw Error(ErrorKind::NameCollision, fmt::format("sweep key '{}' is already in use", name), name);
    const std::size_t n = result.grid_size();
    NamedGridArray<double> arr;
    for (std::size_t p = 0; p < n; ++p) {
        std::vector<double> datum;
        try {
            datum = fn(point_context(result, p));
        } catch (const std::exception& e) {
            throw point_failure(result.axes, grid_index_of(result.axes, p), e);
        }
        if (p == 0) arr = NamedGridArray<double>(result.axes, {datum.size()});
        if (datum.size() != arr.record_size())
            throw point_failure(result.axes, grid_index_of(result.axes, p),
                                Error(ErrorKind::DimensionMismatch, "custom sweep datum changed size"));
        std::copy(datum.begin(), datum.end(), arr.record(p).begin());
    }
    result.custom.emplace(name, std::move(arr));
}

TransitionSet transitions(const SweepResult& r, const TransitionOptions& opt) {
    if (r.axes.size() != 1)
        throw Error(ErrorKind::SpecValidation,
                    fmt::format("transitions need exactly one free axis, found {}", r.axes.size()), "axes");
    const std::size_t nsub = r.dims.size();
    TransitionSet set;
    set.axis = r.axes[0];
    set.photon_number = opt.photon_number;
    set.coloring = opt.coloring;
    set.initial = opt.initial.value_or(std::vector<int>(nsub, 0));
    if (opt.photon_number < 1)
        throw Error(ErrorKind::SpecValidation, "photon_number must be >= 1", "photon_number");
    if (set.initial.size() != nsub || bare_index(r.dims, set.initial) < 0)
        throw Error(ErrorKind::SpecValidation, fmt::format("initial state ({}) does not fit the subsystem dimensions",
                                                           fmt::join(set.initial, ",")),
                    "initial");
    if (opt.subsystems)
        for (int s : *opt.subsystems)
            if (s < 0 || s >= static_cast<int>(nsub))
                throw Error(ErrorKind::SpecValidation, fmt::format("subsystem {} out of range", s), "subsystems");

    const int init = bare_index(r.dims, set.initial);
    const std::size_t n_points = r.evals.grid_size();
    const int bare_dim = bare_index(r.dims, [&] {
        std::vector<int> top;
        for (int d : r.dims) top.push_back(d - 1);
        return top;
    }()) + 1;
    const auto n_evals = static_cast<std::size_t>(r.evals_count);
    const double n = opt.photon_number;

    // dressed index of every bare label, per point
    std::vector<std::vector<int>> dressed_of(n_points, std::vector<int>(static_cast<std::size_t>(bare_dim), -1));
    std::vector<double> e_init(n_points);
    std::vector<int> init_dressed(n_points);
    for (std::size_t p = 0; p < n_points; ++p) {
        const auto lab = r.labels.record(p);
        for (std::size_t k = 0; k < n_evals; ++k)
            if (lab[k] >= 0) dressed_of[p][static_cast<std::size_t>(lab[k])] = static_cast<int>(k);
        init_dressed[p] = dressed_of[p][static_cast<std::size_t>(init)];
        if (init_dressed[p] < 0)
            throw Error(ErrorKind::DispersiveBreakdown,
                        fmt::format("initial state ({}) has no dressed label at {}={}", fmt::join(set.initial, ","),
                                    set.axis.name, set.axis.values[p]),
                        "initial");
        e_init[p] = r.evals.record(p)[static_cast<std::size_t>(init_dressed[p])];
    }

    auto any_finite = [](const std::vector<double>& v) {
        return std::any_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };

    if (opt.coloring == Coloring::Plain) {
        for (std::size_t k = 0; k < n_evals; ++k) {
            Transition t;
            t.dressed_index = static_cast<int>(k);
            t.energies.resize(n_points);
            for (std::size_t p = 0; p < n_points; ++p)
                t.energies[p] = static_cast<int>(k) == init_dressed[p] ? kNaN : (r.evals.record(p)[k] - e_init[p]) / n;
            if (any_finite(t.energies)) set.transitions.push_back(std::move(t));
        }
        return set;
    }

    for (int b = 0; b < bare_dim; ++b) {
        if (b == init) continue;
        Transition t;
        t.final_state = bare_tuple(r.dims, b);
        for (std::size_t j = 0; j < nsub; ++j)
            if ((*t.final_state)[j] != set.initial[j]) t.changed_subsystems.push_back(static_cast<int>(j));
        t.sideband = t.changed_subsystems.size() > 1;
        if (t.sideband && !opt.sidebands) continue;
        if (opt.subsystems &&
            !std::all_of(t.changed_subsystems.begin(), t.changed_subsystems.end(), [&](int j) {
                return std::find(opt.subsystems->begin(), opt.subsystems->end(), j) != opt.subsystems->end();
            }))
            continue;
        t.energies.resize(n_points);
        for (std::size_t p = 0; p < n_points; ++p) {
            const int d = dressed_of[p][static_cast<std::size_t>(b)];
            t.energies[p] = d < 0 ? kNaN : (r.evals.record(p)[static_cast<std::size_t>(d)] - e_init[p]) / n;
        }
        if (any_finite(t.energies)) set.transitions.push_back(std::move(t));
    }
    return set;
}

}  // namespace qspec
