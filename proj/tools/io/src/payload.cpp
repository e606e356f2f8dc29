#include "qspec/io/payload.hpp"

#include "qspec/error.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace qspec::io {

namespace {

Error bad(const std::string& path, const std::string& message, ErrorKind kind = ErrorKind::SpecValidation) {
    return Error(kind, path + ": " + message, path);
}

void only_keys(const Json& j, const std::set<std::string>& keys, const std::string& path) {
    if (!j.is_object()) throw bad(path.empty() ? "request" : path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!keys.count(it.key()))
            throw bad(path.empty() ? it.key() : path + "." + it.key(), "unknown member", ErrorKind::UnknownParameter);
}

const Json& require(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw bad(key, "missing");
    return *it;
}

Json values_json(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

std::string time_unit(const UnitContext& u) {
    switch (u.unit) {
    case Unit::GHz: return "ns";
    case Unit::MHz: return "us";
    case Unit::kHz: return "ms";
    case Unit::Hz: return "s";
    }
    return "s";
}

Json basis_json(const BasisDescriptor& b) {
    switch (b.kind) {
    case BasisDescriptor::Kind::Charge: return {{"kind", "charge"}, {"ncut", b.ncut}};
    case BasisDescriptor::Kind::Ladder: return {{"kind", "ladder"}, {"dim", b.dim}};
    case BasisDescriptor::Kind::Grid:
        return {{"kind", "grid"}, {"min", num(b.grid.min)}, {"max", num(b.grid.max)}, {"points", b.grid.points}};
    case BasisDescriptor::Kind::Qubit: return {{"kind", "qubit"}};
    }
    return {};
}

Json basis_list_json(const std::vector<BasisDescriptor>& basis) {
    Json a = Json::array();
    for (const auto& b : basis) a.push_back(basis_json(b));
    return a;
}

Json grid_json(const Grid1d& g) { return {{"min", num(g.min)}, {"max", num(g.max)}, {"points", g.points}}; }

Grid1d grid_from_json(const Json& j, const std::string& path) {
    only_keys(j, {"min", "max", "points"}, path);
    Grid1d g;
    g.min = to_double(require(j, "min"), path + ".min");
    g.max = to_double(require(j, "max"), path + ".max");
    g.points = to_int(require(j, "points"), path + ".points");
    if (!(g.max > g.min) || g.points < 3) throw bad(path, "need max > min and at least 3 points", ErrorKind::InvalidGrid);
    return g;
}

Json complex_parts(const CMatrix& m, bool imag) {
    Json rows = Json::array();
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
        Json row = Json::array();
        for (Eigen::Index b = 0; b < m.cols(); ++b) row.push_back(num(imag ? m(a, b).imag() : m(a, b).real()));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json base_payload(const char* kind, const UnitContext& units, Json input) {
    return Json{{"kind", kind}, {"units", std::string(units.name())}, {"input", std::move(input)}};
}

struct Scan {
    std::string param;
    std::vector<double> values;
};

std::optional<Scan> scan_from_json(const Json& request, const QubitSpec& spec) {
    if (!request.contains("scan") || request["scan"].is_null()) return std::nullopt;
    const Json& s = request["scan"];
    only_keys(s, {"param", "values"}, "scan");
    Scan scan;
    scan.param = to_string_value(require(s, "param"), "scan.param");
    if (!has_param(spec, scan.param))
        throw bad("scan.param", fmt::format("{} has no parameter '{}'", family_name(spec), scan.param),
                  ErrorKind::UnknownParameter);
    if (!s.contains("values")) throw bad("scan.values", "missing");
    scan.values = values_from_json(s["values"], "scan.values");
    return scan;
}

Json scan_json(const std::optional<Scan>& scan) {
    if (!scan) return nullptr;
    return {{"param", scan->param}, {"values", values_json(scan->values)}};
}

int int_or(const Json& j, const char* key, int fallback, const std::string& prefix = {}) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return to_int(j[key], prefix + key);
}

struct WavefunctionRequest {
    std::vector<int> which;
    Representation representation = Representation::Native;
    WavefunctionMode mode = WavefunctionMode::Real;
    std::optional<Grid1d> grid;
};

WavefunctionRequest wavefunction_request(const Json& j, const QubitSpec& spec, const std::string& prefix) {
    WavefunctionRequest w;
    if (j.contains("which") && !j["which"].is_null()) {
        w.which = int_list(j["which"], prefix + "which");
    } else {
        w.which.resize(static_cast<std::size_t>(std::min(4, hilbert_dim(spec))));
        std::iota(w.which.begin(), w.which.end(), 0);
    }
    if (w.which.empty()) throw bad(prefix + "which", "must be non-empty", ErrorKind::InvalidCount);
    w.representation = has_potential(spec) ? Representation::Phase : Representation::Native;
    if (j.contains("representation") && !j["representation"].is_null()) {
        try {
            w.representation = parse_representation(to_string_value(j["representation"], prefix + "representation"));
        } catch (const Error& e) {
            throw bad(prefix + "representation", e.what(), e.kind());
        }
    }
    if (j.contains("mode") && !j["mode"].is_null()) {
        try {
            w.mode = parse_mode(to_string_value(j["mode"], prefix + "mode"));
        } catch (const Error& e) {
            throw bad(prefix + "mode", e.what(), e.kind());
        }
    }
    if (j.contains("grid") && !j["grid"].is_null()) w.grid = grid_from_json(j["grid"], prefix + "grid");
    return w;
}

Json wavefunction_request_json(const WavefunctionRequest& w) {
    return {{"which", w.which},
            {"representation", std::string(to_string(w.representation))},
            {"mode", std::string(to_string(w.mode))},
            {"grid", w.grid ? grid_json(*w.grid) : Json(nullptr)}};
}

/// Wavefunctions plus, in phase space, the potential and the overlay scale.
Json wavefunctions_json(const QubitSpec& spec, const WavefunctionRequest& w) {
    const auto wfs = wavefunction(spec, w.which, w.representation, w.grid);
    Json list = Json::array();
    double max_amp = 0.0;
    for (const auto& wf : wfs) {
        const auto values = wf.render(w.mode);
        for (double v : values) max_amp = std::max(max_amp, std::abs(v));
        Json item{{"index", wf.index}, {"energy", num(wf.energy)}, {"basis", basis_list_json(wf.basis)},
                  {"values", values_json(values)}};
        list.push_back(std::move(item));
    }
    Json out{{"wavefunctions", list}};
    if (!wfs.empty() && wfs[0].basis.size() == 1 && wfs[0].basis[0].kind == BasisDescriptor::Kind::Grid) {
        const auto x = wfs[0].basis[0].grid.values();
        out["x"] = values_json(x);
        if (has_potential(spec)) out["potential"] = values_json(potential(spec, x));
        std::vector<double> energies;
        for (const auto& wf : wfs) energies.push_back(wf.energy);
        std::sort(energies.begin(), energies.end());
        double spacing = 0.0;
        for (std::size_t i = 1; i < energies.size(); ++i) {
            const double d = energies[i] - energies[i - 1];
            if (d > 1e-12 && (spacing == 0.0 || d < spacing)) spacing = d;
        }
        if (spacing == 0.0 && energies.size() == 1) {
            const RVector ev = eigenvals(spec, std::min(2, hilbert_dim(spec)));
            if (ev.size() > 1) spacing = ev[1] - ev[0];
        }
        out["overlay_scale"] = (max_amp > 0.0 && spacing > 0.0) ? num(0.8 * spacing / max_amp) : num(1.0);
    }
    return out;
}

// ---- view parameter helpers (JSON-typed or query strings) -------------------

std::optional<std::string> param_text(const Json& params, const char* key) {
    if (!params.contains(key) || params[key].is_null()) return std::nullopt;
    const Json& v = params[key];
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

int view_int(const Json& params, const char* key, int fallback) {
    if (!params.contains(key) || params[key].is_null()) return fallback;
    const Json& v = params[key];
    if (!v.is_string()) return to_int(v, key);
    try {
        std::size_t used = 0;
        const int out = std::stoi(v.get<std::string>(), &used);
        if (used == v.get<std::string>().size()) return out;
    } catch (const std::exception&) {
    }
    throw bad(key, "expected an integer");
}

bool view_bool(const Json& params, const char* key, bool fallback) {
    if (!params.contains(key) || params[key].is_null()) return fallback;
    const Json& v = params[key];
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
    }
    throw bad(key, "expected true or false");
}

std::optional<std::vector<int>> view_list(const Json& params, const char* key) {
    if (!params.contains(key) || params[key].is_null()) return std::nullopt;
    const Json& v = params[key];
    if (v.is_array()) return int_list(v, key);
    if (!v.is_string()) throw bad(key, "expected a list of integers");
    std::string s = v.get<std::string>();
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '[' || c == ']' || c == '(' || c == ')' || c == ' '; }),
            s.end());
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= s.size() && !s.empty()) {
        const std::size_t comma = s.find(',', start);
        const std::string part = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw bad(key, "expected a comma-separated list of integers");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void only_params(const Json& params, const std::set<std::string>& keys, const std::string& view) {
    for (auto it = params.begin(); it != params.end(); ++it)
        if (!keys.count(it.key()))
            throw bad(it.key(), fmt::format("not a parameter of the {} view", view), ErrorKind::UnknownParameter);
}

std::string tuple_text(const std::vector<int>& t) { return fmt::format("({})", fmt::join(t, ",")); }

}  // namespace

std::string dump_payload(const Json& payload) { return payload.dump(1) + "\n"; }

// ---- single-qubit payloads ------------------------------------------------

Json spectrum_payload(const Json& request, int workers) {
    only_keys(request, {"qubit", "scan", "evals_count", "units", "matrix_elements", "wavefunctions"}, "");
    const UnitContext units = units_from_document(request);
    const QubitSpec spec = qubit_from_json(require(request, "qubit"), "qubit");
    const auto scan = scan_from_json(request, spec);
    const int k = int_or(request, "evals_count", 6);

    Json input{{"qubit", to_json(spec)}, {"scan", scan_json(scan)}, {"evals_count", k}};
    Json out = base_payload("spectrum", units, nullptr);
    if (scan) {
        const auto evals = spectrum_vs_param(spec, scan->param, scan->values, k, workers);
        out["axis"] = to_json(evals.axes()[0]);
        out["evals"] = nested(evals.data(), evals.shape());
    } else {
        const RVector ev = eigenvals(spec, k);
        out["axis"] = nullptr;
        out["evals"] = values_json(std::vector<double>(ev.data(), ev.data() + ev.size()));
    }

    if (request.contains("matrix_elements") && !request["matrix_elements"].is_null()) {
        const Json& m = request["matrix_elements"];
        only_keys(m, {"operator", "select"}, "matrix_elements");
        const std::string op = to_string_value(require(m, "operator"), "matrix_elements.operator");
        const int select = int_or(m, "select", std::min(4, k), "matrix_elements.");
        input["matrix_elements"] = {{"operator", op}, {"select", select}};
        Json me{{"operator", op}, {"select", select}};
        if (scan) {
            const auto table = matelem_vs_param(spec, op, scan->param, scan->values, select, workers);
            std::vector<double> re, im;
            for (const cplx& z : table.data()) {
                re.push_back(z.real());
                im.push_back(z.imag());
            }
            me["re"] = nested(re, table.shape());
            me["im"] = nested(im, table.shape());
        } else {
            const CMatrix table = matrixelement_table(spec, op, select);
            me["re"] = complex_parts(table, false);
            me["im"] = complex_parts(table, true);
        }
        out["matrix_elements"] = std::move(me);
    }

    if (request.contains("wavefunctions") && !request["wavefunctions"].is_null()) {
        const Json& w = request["wavefunctions"];
        only_keys(w, {"which", "representation", "mode", "grid"}, "wavefunctions");
        const auto wr = wavefunction_request(w, spec, "wavefunctions.");
        input["wavefunctions"] = wavefunction_request_json(wr);
        out["wavefunctions"] = wavefunctions_json(spec, wr);
    }
    out["input"] = std::move(input);
    return out;
}

Json wavefunction_payload(const Json& request) {
    only_keys(request, {"qubit", "which", "representation", "mode", "grid", "units"}, "");
    const UnitContext units = units_from_document(request);
    const QubitSpec spec = qubit_from_json(require(request, "qubit"), "qubit");
    const auto wr = wavefunction_request(request, spec, "");
    Json input = wavefunction_request_json(wr);
    input["qubit"] = to_json(spec);
    Json out = base_payload("wavefunction", units, input);
    const Json body = wavefunctions_json(spec, wr);
    for (auto it = body.begin(); it != body.end(); ++it) out[it.key()] = *it;
    return out;
}

Json matelem_payload(const Json& request, int workers) {
    only_keys(request, {"qubit", "operator", "evals_count", "scan", "units"}, "");
    const UnitContext units = units_from_document(request);
    const QubitSpec spec = qubit_from_json(require(request, "qubit"), "qubit");
    const std::string op = to_string_value(require(request, "operator"), "operator");
    const auto scan = scan_from_json(request, spec);
    const int k = int_or(request, "evals_count", scan ? 4 : 6);
    Json input{{"qubit", to_json(spec)}, {"operator", op}, {"evals_count", k}, {"scan", scan_json(scan)}};
    Json out = base_payload("matelem", units, input);
    out["operator"] = op;
    if (scan) {
        const auto table = matelem_vs_param(spec, op, scan->param, scan->values, k, workers);
        std::vector<double> re, im;
        for (const cplx& z : table.data()) {
            re.push_back(z.real());
            im.push_back(z.imag());
        }
        out["axis"] = to_json(table.axes()[0]);
        out["re"] = nested(re, table.shape());
        out["im"] = nested(im, table.shape());
    } else {
        const CMatrix table = matrixelement_table(spec, op, k);
        out["axis"] = nullptr;
        out["re"] = complex_parts(table, false);
        out["im"] = complex_parts(table, true);
    }
    return out;
}

Json noise_payload(const Json& request, int workers) {
    only_keys(request, {"qubit", "noise", "units"}, "");
    const UnitContext units = units_from_document(request);
    const QubitSpec spec = qubit_from_json(require(request, "qubit"), "qubit");
    const Json noise = request.contains("noise") ? request["noise"] : Json::object();
    only_keys(noise, {"channels", "effective", "param", "values", "options", "i", "j", "total", "get_rate"}, "noise");

    std::optional<std::string> effective;
    if (noise.contains("effective") && !noise["effective"].is_null()) {
        const std::string e = to_string_value(noise["effective"], "noise.effective");
        if (e != "t1" && e != "t2") throw bad("noise.effective", "expected t1 or t2");
        effective = e;
    }
    std::vector<std::string> channels;
    if (noise.contains("channels") && !noise["channels"].is_null()) {
        const Json& c = noise["channels"];
        if (!c.is_array()) throw bad("noise.channels", "expected an array of channel names");
        for (std::size_t i = 0; i < c.size(); ++i)
            channels.push_back(to_string_value(c[i], fmt::format("noise.channels[{}]", i)));
    } else if (!effective) {
        channels = supported_noise_channels(spec);
    }
    if (effective) channels.push_back(*effective == "t1" ? "t1_effective" : "t2_effective");

    NoiseCall call;
    call.i = int_or(noise, "i", 0, "noise.");
    call.j = int_or(noise, "j", 1, "noise.");
    if (noise.contains("total")) call.total = to_bool(noise["total"], "noise.total");
    if (noise.contains("get_rate")) call.get_rate = to_bool(noise["get_rate"], "noise.get_rate");
    Json options_json = Json::object();
    if (noise.contains("options") && !noise["options"].is_null()) {
        const Json& o = noise["options"];
        if (!o.is_object()) throw bad("noise.options", "expected an object");
        for (auto it = o.begin(); it != o.end(); ++it) {
            const double v = to_double(*it, "noise.options." + it.key());
            call.options[it.key()] = v;
            options_json[it.key()] = num(v);
        }
    }

    std::optional<Scan> scan;
    if (noise.contains("param") && !noise["param"].is_null()) {
        Scan s;
        s.param = to_string_value(noise["param"], "noise.param");
        if (!has_param(spec, s.param))
            throw bad("noise.param", fmt::format("{} has no parameter '{}'", family_name(spec), s.param),
                      ErrorKind::UnknownParameter);
        if (!noise.contains("values")) throw bad("noise.values", "missing");
        s.values = values_from_json(noise["values"], "noise.values");
        scan = std::move(s);
    } else if (noise.contains("values")) {
        throw bad("noise.param", "values given without a parameter");
    }

    // A single point is a one-value scan over a parameter left at its value.
    const std::string param = scan ? scan->param : param_list(spec).front().name;
    const std::vector<double> values = scan ? scan->values : std::vector<double>{get_param(spec, param)};
    std::map<std::string, NamedGridArray<double>> data;
    try {
        data = coherence_vs_param(spec, param, values, channels, call, units, workers);
    } catch (const Error& e) {
        if (scan || e.kind() != ErrorKind::PointFailure) throw;
        throw Error(ErrorKind::SolverFailure, e.what(), e.field());
    }

    Json input{{"qubit", to_json(spec)},
               {"noise",
                {{"channels", channels},
                 {"param", scan ? Json(scan->param) : Json(nullptr)},
                 {"values", scan ? values_json(scan->values) : Json(nullptr)},
                 {"options", options_json},
                 {"i", call.i},
                 {"j", call.j},
                 {"total", call.total},
                 {"get_rate", call.get_rate}}}};
    Json out = base_payload("coherence", units, input);
    out["quantity"] = call.get_rate ? "rate" : "time";
    out["value_unit"] = call.get_rate ? std::string(units.name()) : time_unit(units);
    out["i"] = call.i;
    out["j"] = call.j;
    out["axis"] = scan ? to_json(Axis{scan->param, scan->values}) : Json(nullptr);
    Json ch = Json::object();
    for (const auto& name : channels) {
        const auto& arr = data.at(name);
        ch[name] = scan ? values_json(arr.data()) : num(arr.data()[0]);
    }
    out["channels"] = std::move(ch);
    return out;
}

Json hamiltonian_export(const Json& request) {
    only_keys(request, {"qubit", "hilbertspace", "storage", "units"}, "");
    const UnitContext units = units_from_document(request);
    const bool is_qubit = request.contains("qubit");
    if (is_qubit == request.contains("hilbertspace"))
        throw bad("request", "give exactly one of qubit or hilbertspace");
    std::string storage = "auto";
    if (request.contains("storage")) storage = to_string_value(request["storage"], "storage");
    if (storage != "auto" && storage != "dense" && storage != "coo")
        throw bad("storage", "expected auto, dense or coo");

    Json header{{"format", "qspec-hamiltonian"}, {"format_version", 1}, {"units", std::string(units.name())}};
    SparseCMatrix h;
    Json input;
    if (is_qubit) {
        const QubitSpec spec = qubit_from_json(request["qubit"], "qubit");
        const Operator op = hamiltonian(spec);
        h = op.sparse();
        input = {{"qubit", to_json(spec)}};
        header["basis"] = "native";
        header["dims"] = Json::array({op.dim()});
        header["factors"] = basis_list_json(op.basis);
        header["ordering"] = "row-major over basis factors, last factor fastest";
    } else {
        const HilbertSpaceDef def = hilbertspace_from_json(request["hilbertspace"], "hilbertspace");
        const auto bare = bare_spectra(def);
        h = to_sparse(assemble_hamiltonian(def, bare));
        input = {{"hilbertspace", to_json(def)}};
        header["basis"] = "bare product";
        header["dims"] = subsystem_dims(def);
        Json energies = Json::array();
        for (const auto& b : bare)
            energies.push_back(values_json(std::vector<double>(b.evals.data(), b.evals.data() + b.evals.size())));
        header["bare_energies"] = energies;
        header["ordering"] = "row-major over subsystems, last subsystem fastest";
    }
    h.prune(cplx(0.0, 0.0));
    h.makeCompressed();
    const auto n = h.rows();
    const double density = n > 0 ? static_cast<double>(h.nonZeros()) / (static_cast<double>(n) * static_cast<double>(n)) : 0.0;
    if (storage == "auto") storage = density <= 0.1 ? "coo" : "dense";
    if (storage == "dense" && n > 4096)
        throw bad("storage", fmt::format("dense export is limited to dimension 4096, got {}", n),
                  ErrorKind::InvalidDimension);
    header["dimension"] = n;
    header["storage"] = storage;
    header["nnz"] = h.nonZeros();
    header["input"] = input;

    Json matrix;
    if (storage == "dense") {
        const CMatrix d = CMatrix(h);
        matrix = {{"re", complex_parts(d, false)}, {"im", complex_parts(d, true)}};
    } else {
        // row-major order of the entries
        Eigen::SparseMatrix<cplx, Eigen::RowMajor> rm = h;
        Json rows = Json::array(), cols = Json::array(), re = Json::array(), im = Json::array();
        for (Eigen::Index r = 0; r < rm.outerSize(); ++r)
            for (decltype(rm)::InnerIterator it(rm, r); it; ++it) {
                rows.push_back(it.row());
                cols.push_back(it.col());
                re.push_back(num(it.value().real()));
                im.push_back(num(it.value().imag()));
            }
        matrix = {{"row", rows}, {"col", cols}, {"re", re}, {"im", im}};
    }
    return Json{{"header", header}, {"matrix", matrix}};
}

// ---- validation report ------------------------------------------------------

namespace {

struct Report {
    Json findings = Json::array();
    bool has_error = false;

    void add(bool error, const std::string& field, const std::string& message) {
        findings.push_back({{"severity", error ? "error" : "warning"}, {"field", field}, {"message", message}});
        has_error = has_error || error;
    }
    void add(const Error& e) {
        add(true, e.field(), e.what());
    }
};

/// Collects every parameter-level finding of one qubit object.
void check_qubit(const Json& j, const std::string& path, Report& report) {
    if (!j.is_object()) {
        report.add(true, path, path + ": expected an object");
        return;
    }
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "family" && it.key() != "params")
            report.add(true, path + "." + it.key(), path + "." + it.key() + ": unknown member");
    if (!j.contains("family") || !j["family"].is_string()) {
        report.add(true, path + ".family", path + ".family: missing or not a string");
        return;
    }
    QubitSpec spec;
    try {
        spec = make_default(j["family"].get<std::string>());
    } catch (const Error&) {
        report.add(true, path + ".family", fmt::format("{}.family: unknown family '{}'", path, j["family"].get<std::string>()));
        return;
    }
    if (j.contains("params")) {
        const Json& params = j["params"];
        if (!params.is_object()) {
            report.add(true, path + ".params", path + ".params: expected an object");
            return;
        }
        const auto infos = param_list(spec);
        for (auto it = params.begin(); it != params.end(); ++it) {
            const std::string field = path + ".params." + it.key();
            auto info = std::find_if(infos.begin(), infos.end(), [&](const ParamInfo& p) { return p.name == it.key(); });
            if (info == infos.end()) {
                report.add(true, field, fmt::format("{}: {} has no parameter '{}'", field, family_name(spec), it.key()));
                continue;
            }
            if (it->is_null()) {
                if (!info->optional) report.add(true, field, field + ": must not be null");
                continue;
            }
            try {
                const double v = info->integer ? to_int(*it, field) : to_double(*it, field);
                spec = with_param(spec, it.key(), v);
            } catch (const Error& e) {
                report.add(e);
            }
        }
    }
    for (const auto& issue : check_spec(spec)) {
        const std::string field = path + ".params." + issue.field;
        report.add(issue.severity == ValidationIssue::Severity::Error, field, field + ": " + issue.message);
    }
}

void check_subsystems(const Json& hs, const std::string& path, Report& report) {
    if (!hs.is_object() || !hs.contains("subsystems") || !hs["subsystems"].is_array()) return;
    const Json& subs = hs["subsystems"];
    for (std::size_t i = 0; i < subs.size(); ++i) check_qubit(subs[i], fmt::format("{}.subsystems[{}]", path, i), report);
}

}  // namespace

Json validation_report(const std::string& text) {
    Report report;
    std::string kind = "unknown";
    Json doc;
    try {
        doc = parse_document(text);
    } catch (const Error& e) {
        report.add(e);
        return Json{{"kind", kind}, {"valid", false}, {"findings", report.findings}};
    }
    auto attempt = [&](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            report.add(e);
        }
    };
    if (!doc.is_object()) {
        report.add(true, "", "document must be a JSON object");
    } else {
        if (doc.contains("units")) attempt([&] { units_from_document(doc); });
        if (doc.contains("family")) {
            kind = "qubit";
            Json q{{"family", doc["family"]}};
            if (doc.contains("params")) q["params"] = doc["params"];
            check_qubit(q, "qubit", report);
        } else if (doc.contains("qubit")) {
            kind = "qubit";
            check_qubit(doc["qubit"], "qubit", report);
            if (!report.has_error && doc.contains("scan"))
                attempt([&] { scan_from_json(doc, qubit_from_json(doc["qubit"], "qubit")); });
        } else if (doc.contains("sweep") || doc.contains("axes")) {
            kind = "sweep";
            const Json& sw = doc.contains("sweep") ? doc["sweep"] : doc;
            if (sw.is_object() && sw.contains("hilbertspace"))
                check_subsystems(sw["hilbertspace"], "sweep.hilbertspace", report);
            if (!report.has_error) attempt([&] { sweep_request(doc); });
        } else if (doc.contains("hilbertspace") || doc.contains("subsystems")) {
            kind = "hilbertspace";
            const Json& hs = doc.contains("hilbertspace") ? doc["hilbertspace"] : doc;
            check_subsystems(hs, "hilbertspace", report);
            if (!report.has_error) attempt([&] { hilbertspace_from_json(hs, "hilbertspace"); });
        } else {
            report.add(true, "", "document holds no qubit, hilbertspace or sweep");
        }
    }
    return Json{{"kind", kind}, {"valid", !report.has_error}, {"findings", report.findings}};
}

// ---- sweeps -------------------------------------------------------------------

SweepRequest sweep_request(const Json& doc) {
    if (!doc.is_object()) throw bad("sweep", "expected an object");
    SweepRequest req;
    req.units = units_from_document(doc);
    if (doc.contains("sweep")) {
        only_keys(doc, {"sweep", "units", "transitions", "slice"}, "");
        req.def = sweep_from_json(doc["sweep"], "sweep");
    } else {
        Json bare = doc;
        bare.erase("units");
        req.def = sweep_from_json(bare, "sweep");
    }
    req.input = to_json(req.def);
    return req;
}

TransitionOptions transition_options(const Json& params) {
    TransitionOptions o;
    o.initial = view_list(params, "initial");
    o.photon_number = view_int(params, "photon_number", 1);
    o.sidebands = view_bool(params, "sidebands", false);
    o.subsystems = view_list(params, "subsystems");
    if (auto c = param_text(params, "coloring")) {
        if (*c == "labeled")
            o.coloring = Coloring::Labeled;
        else if (*c == "plain")
            o.coloring = Coloring::Plain;
        else
            throw bad("coloring", "expected labeled or plain");
    }
    return o;
}

Json slice_view_payload(const SweepRequest& request, const SweepResult& result, const SliceQuery& query) {
    static const std::set<std::string> views{"evals", "transitions", "chi", "lamb", "kerr", "matelem", "wavefunction"};
    if (!views.count(query.view))
        throw bad("view", fmt::format("unknown view '{}'", query.view), ErrorKind::UnknownParameter);
    if (!query.params.is_object()) throw bad("params", "expected an object");

    // fixes in axis order, so the payload does not depend on query order
    std::vector<std::optional<std::size_t>> fixed(result.axes.size());
    std::vector<double> requested(result.axes.size(), 0.0);
    for (const auto& [axis, value] : query.fixes) {
        const auto it = std::find_if(result.axes.begin(), result.axes.end(), [&](const Axis& a) { return a.name == axis; });
        if (it == result.axes.end()) throw Error(ErrorKind::UnknownAxis, fmt::format("unknown axis '{}'", axis), "axis");
        const auto pos = static_cast<std::size_t>(it - result.axes.begin());
        if (fixed[pos]) throw bad("axis", fmt::format("axis '{}' fixed twice", axis));
        if (!std::isfinite(value)) throw bad("value", "slice values must be finite");
        fixed[pos] = nearest_index(it->values, value);
        requested[pos] = value;
    }
    SweepResult sliced = result;
    Json slice_json = Json::array();
    for (std::size_t a = 0; a < result.axes.size(); ++a) {
        if (!fixed[a]) continue;
        sliced = sliced.slice_index(result.axes[a].name, *fixed[a]);
        slice_json.push_back({{"axis", result.axes[a].name},
                              {"value", num(requested[a])},
                              {"index", *fixed[a]},
                              {"grid_value", num(result.axes[a].values[*fixed[a]])}});
    }

    auto full_point = [&](std::size_t f) {
        const auto sub = sliced.evals.grid_index(f);
        std::vector<std::size_t> full(result.axes.size());
        std::vector<double> values(result.axes.size());
        for (std::size_t a = 0, s = 0; a < result.axes.size(); ++a) {
            full[a] = fixed[a] ? *fixed[a] : sub[s++];
            values[a] = result.axes[a].values[full[a]];
        }
        return std::pair{result.evals.flat_point(full), values};
    };
    auto subsystem_param = [&](const Json& params) {
        const int s = view_int(params, "subsystem", 0);
        if (s < 0 || s >= static_cast<int>(result.dims.size()))
            throw bad("subsystem", fmt::format("subsystem {} out of range", s));
        return s;
    };

    Json axes = Json::array();
    for (const auto& a : sliced.axes) axes.push_back(to_json(a));
    Json out = base_payload("sweep_view", request.units, request.input);
    out["view"] = query.view;
    out["axes"] = axes;
    out["dims"] = result.dims;
    Json params = Json::object();

    if (query.view == "evals") {
        only_params(query.params, {}, query.view);
        out["evals"] = nested(sliced.evals.data(), sliced.evals.shape());
        out["labels"] = nested(sliced.labels.data(), sliced.labels.shape());
        Json bare = Json::array();
        for (const auto& b : sliced.bare_evals) bare.push_back(nested(b.data(), b.shape()));
        out["bare_evals"] = bare;
    } else if (query.view == "chi" || query.view == "lamb" || query.view == "kerr") {
        only_params(query.params, {}, query.view);
        const auto& arr = query.view == "chi" ? sliced.chi : query.view == "lamb" ? sliced.lamb : sliced.kerr;
        out["levels"] = sliced.lamb.trailing().size() > 1 ? sliced.lamb.trailing()[1] : 0;
        out["data"] = nested(arr.data(), arr.shape());
    } else if (query.view == "transitions") {
        only_params(query.params, {"initial", "photon_number", "sidebands", "subsystems", "coloring"}, query.view);
        const TransitionOptions opts = transition_options(query.params);
        const TransitionSet ts = transitions(sliced, opts);
        params = {{"initial", ts.initial},
                  {"photon_number", ts.photon_number},
                  {"sidebands", opts.sidebands},
                  {"subsystems", opts.subsystems ? Json(*opts.subsystems) : Json(nullptr)},
                  {"coloring", ts.coloring == Coloring::Labeled ? "labeled" : "plain"}};
        Json list = Json::array();
        for (const auto& t : ts.transitions) {
            Json item;
            if (t.final_state) {
                item["label"] = tuple_text(ts.initial) + "->" + tuple_text(*t.final_state);
                item["final"] = *t.final_state;
            } else {
                item["label"] = fmt::format("{}", t.dressed_index);
                item["final"] = nullptr;
            }
            item["dressed_index"] = t.dressed_index;
            item["changed_subsystems"] = t.changed_subsystems;
            item["sideband"] = t.sideband;
            item["energies"] = values_json(t.energies);
            list.push_back(std::move(item));
        }
        out["axis"] = to_json(ts.axis);
        out["transitions"] = std::move(list);
    } else if (query.view == "matelem") {
        only_params(query.params, {"subsystem", "operator"}, query.view);
        const int s = subsystem_param(query.params);
        const std::string op = param_text(query.params, "operator").value_or("n_operator");
        params = {{"subsystem", s}, {"operator", op}};
        const auto& bev = result.bare_evecs[static_cast<std::size_t>(s)];
        const auto rows = static_cast<Eigen::Index>(bev.trailing()[0]);
        const auto cols = static_cast<Eigen::Index>(bev.trailing()[1]);
        std::vector<double> re, im;
        for (std::size_t f = 0; f < sliced.grid_size(); ++f) {
            const auto [flat, values] = full_point(f);
            const HilbertSpaceDef hs = resolve_point(request.def, values);
            const QubitSpec& spec = hs.subsystems[static_cast<std::size_t>(s)];
            Operator o;
            try {
                o = qubit_operator(spec, op);
            } catch (const Error& e) {
                throw bad("operator", e.what(), e.kind());
            }
            const auto rec = bev.record(flat);
            CMatrix v(rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r)
                for (Eigen::Index c = 0; c < cols; ++c) v(r, c) = rec[static_cast<std::size_t>(r * cols + c)];
            const CMatrix m = o.is_sparse() ? CMatrix(v.adjoint() * (o.sparse() * v)) : CMatrix(v.adjoint() * o.dense() * v);
            for (Eigen::Index a = 0; a < m.rows(); ++a)
                for (Eigen::Index b = 0; b < m.cols(); ++b) {
                    re.push_back(m(a, b).real());
                    im.push_back(m(a, b).imag());
                }
        }
        std::vector<std::size_t> shape;
        for (const auto& a : sliced.axes) shape.push_back(a.values.size());
        shape.push_back(static_cast<std::size_t>(cols));
        shape.push_back(static_cast<std::size_t>(cols));
        out["operator"] = op;
        out["subsystem"] = s;
        out["re"] = nested(re, shape);
        out["im"] = nested(im, shape);
    } else {  // wavefunction
        only_params(query.params, {"subsystem", "which", "representation", "mode"}, query.view);
        if (!sliced.axes.empty())
            throw bad("axis", "the wavefunction view needs every axis fixed");
        const int s = subsystem_param(query.params);
        const auto [flat, values] = full_point(0);
        (void)flat;
        const HilbertSpaceDef hs = resolve_point(request.def, values);
        const QubitSpec& spec = hs.subsystems[static_cast<std::size_t>(s)];
        Json wq = Json::object();
        if (auto w = view_list(query.params, "which")) wq["which"] = *w;
        if (auto r = param_text(query.params, "representation")) wq["representation"] = *r;
        if (auto m = param_text(query.params, "mode")) wq["mode"] = *m;
        const auto wr = wavefunction_request(wq, spec, "");
        params = wavefunction_request_json(wr);
        params.erase("grid");
        params["subsystem"] = s;
        out["subsystem"] = s;
        const Json body = wavefunctions_json(spec, wr);
        for (auto it = body.begin(); it != body.end(); ++it) out[it.key()] = *it;
    }
    out["query"] = {{"slice", slice_json}, {"view", query.view}, {"params", params}};
    return out;
}

}  // namespace qspec::io
