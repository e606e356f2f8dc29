#include "cli.hpp"

#include "qspec/error.hpp"
#include "qspec/io/csv.hpp"
#include "qspec/io/payload.hpp"
#include "qspec/io/svg.hpp"
#include "qspec/service.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <cmath>
#include <cstring>
#include <sstream>
#include <filesystem>
#include <fstream>
#include <optional>

namespace qspec::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

struct Common {
    std::string in;
    std::string out = ".";
    std::optional<std::string> units;
    std::optional<int> workers;
    std::optional<int> evals_count;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--in", c.in, "input spec file (JSON)")->required();
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--units", c.units, "energy unit: GHz, MHz, kHz or Hz");
    cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--evals-count", c.evals_count, "number of eigenvalues");
}

void write_file(const fs::path& dir, const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error(ErrorKind::SpecValidation, "cannot write " + (dir / name).string(), "out");
    f << text;
}

fs::path prepare_out(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw Error(ErrorKind::SpecValidation, "cannot create output directory " + out, "out");
    return fs::path(out);
}

Json load(const Common& c) {
    Json doc = io::load_document(c.in);
    if (!doc.is_object()) throw Error(ErrorKind::SpecValidation, "input document must be a JSON object", "in");
    if (c.units) doc["units"] = *c.units;
    return doc;
}

/// Bare QubitSpec documents are accepted for single-qubit commands.
Json qubit_request(Json doc) {
    if (doc.contains("family")) {
        Json q{{"family", doc["family"]}};
        if (doc.contains("params")) q["params"] = doc["params"];
        doc.erase("family");
        doc.erase("params");
        doc["qubit"] = q;
    }
    return doc;
}

std::vector<double> row_of(const Json& arr) {
    std::vector<double> v;
    for (const auto& x : arr) v.push_back(io::to_double(x, "payload"));
    return v;
}

std::string units_of(const Json& payload) { return payload["units"].get<std::string>(); }

std::string family_of(const Json& payload) { return payload["input"]["qubit"]["family"].get<std::string>(); }

// ---- spectrum ---------------------------------------------------------------

void spectrum(const Common& c) {
    Json req = qubit_request(load(c));
    if (c.evals_count) req["evals_count"] = *c.evals_count;
    const Json p = io::spectrum_payload(req, c.workers.value_or(1));
    const fs::path dir = prepare_out(c.out);
    write_file(dir, "spectrum.json", io::dump_payload(p));

    io::CsvWriter csv("spectrum", units_of(p), p["input"]);
    io::LinePlot plot;
    plot.title = family_of(p) + " spectrum";
    plot.ylabel = fmt::format("energy [{}]", units_of(p));
    if (!p["axis"].is_null()) {
        const auto x = row_of(p["axis"]["values"]);
        const std::string param = p["axis"]["name"];
        const std::size_t k = p["evals"][0].size();
        std::vector<std::string> cols{param};
        for (std::size_t i = 0; i < k; ++i) cols.push_back(fmt::format("E{}", i));
        csv.columns(cols);
        std::vector<io::Series> series(k);
        for (std::size_t i = 0; i < k; ++i) series[i].label = fmt::format("E{}", i);
        for (std::size_t r = 0; r < x.size(); ++r) {
            std::vector<double> row{x[r]};
            const auto ev = row_of(p["evals"][r]);
            row.insert(row.end(), ev.begin(), ev.end());
            csv.row(row);
            for (std::size_t i = 0; i < k; ++i) {
                series[i].x.push_back(x[r]);
                series[i].y.push_back(ev[i]);
            }
        }
        plot.xlabel = param;
        plot.series = std::move(series);
    } else {
        csv.columns({"index", "energy"});
        const auto ev = row_of(p["evals"]);
        for (std::size_t i = 0; i < ev.size(); ++i) {
            csv.row(std::vector<double>{static_cast<double>(i), ev[i]});
            plot.series.push_back({fmt::format("E{}", i), {0.0, 1.0}, {ev[i], ev[i]}, "", false});
        }
        plot.xlabel = "";
    }
    write_file(dir, "spectrum.csv", csv.str());
    write_file(dir, "spectrum.svg", io::render(plot));
}

// ---- wavefunction -------------------------------------------------------------

void wavefunction(const Common& c, const std::optional<std::string>& which, const std::optional<std::string>& rep,
                  const std::optional<std::string>& mode) {
    Json req = qubit_request(load(c));
    req.erase("evals_count");
    if (which) {
        Json list = Json::array();
        std::stringstream ss(*which);
        for (std::string part; std::getline(ss, part, ',');) {
            try {
                list.push_back(std::stoi(part));
            } catch (const std::exception&) {
                throw Error(ErrorKind::SpecValidation, "--which expects comma-separated integers", "which");
            }
        }
        req["which"] = list;
    }
    if (rep) req["representation"] = *rep;
    if (mode) req["mode"] = *mode;
    const Json p = io::wavefunction_payload(req);
    const fs::path dir = prepare_out(c.out);
    write_file(dir, "wavefunction.json", io::dump_payload(p));

    io::CsvWriter csv("wavefunction", units_of(p), p["input"]);
    io::LinePlot plot;
    plot.title = family_of(p) + " wavefunctions";
    const auto& wfs = p["wavefunctions"];
    std::vector<std::string> cols;
    if (p.contains("x")) {
        const auto x = row_of(p["x"]);
        const double scale = io::to_double(p["overlay_scale"], "overlay_scale");
        cols.push_back("phi");
        if (p.contains("potential")) cols.push_back("V");
        for (const auto& wf : wfs) cols.push_back(fmt::format("psi{}", wf["index"].get<int>()));
        csv.columns(cols);
        std::vector<double> pot = p.contains("potential") ? row_of(p["potential"]) : std::vector<double>{};
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::vector<double> row{x[i]};
            if (!pot.empty()) row.push_back(pot[i]);
            for (const auto& wf : wfs) row.push_back(io::to_double(wf["values"][i], "values"));
            csv.row(row);
        }
        if (!pot.empty()) {
            double top = -INFINITY;
            for (const auto& wf : wfs) top = std::max(top, io::to_double(wf["energy"], "energy"));
            // clip the potential a little above the highest level shown
            double lo = *std::min_element(pot.begin(), pot.end());
            const double cap = top + 0.5 * std::max(top - lo, 1e-9);
            std::vector<double> clipped = pot;
            for (double& v : clipped)
                if (v > cap) v = NAN;
            plot.series.push_back({"potential", x, clipped, "#000000", false});
        }
        for (const auto& wf : wfs) {
            const double e = io::to_double(wf["energy"], "energy");
            std::vector<double> y;
            for (const auto& v : wf["values"]) y.push_back(e + scale * io::to_double(v, "values"));
            plot.series.push_back({fmt::format("psi{}", wf["index"].get<int>()), x, y, "", false});
            plot.series.push_back({"", {x.front(), x.back()}, {e, e}, "#bbbbbb", true});
        }
        plot.legend = false;
        plot.xlabel = "phi";
        plot.ylabel = fmt::format("energy [{}]", units_of(p));
        plot.metadata["amplitude_scale"] = io::format_number(scale);
        plot.metadata["vertical_offset"] = "eigenenergy";
    } else {
        cols.push_back("basis_index");
        for (const auto& wf : wfs) cols.push_back(fmt::format("psi{}", wf["index"].get<int>()));
        csv.columns(cols);
        const std::size_t n = wfs[0]["values"].size();
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row{static_cast<double>(i)};
            for (const auto& wf : wfs) row.push_back(io::to_double(wf["values"][i], "values"));
            csv.row(row);
        }
        for (const auto& wf : wfs) {
            io::Series s;
            s.label = fmt::format("psi{}", wf["index"].get<int>());
            for (std::size_t i = 0; i < n; ++i) {
                s.x.push_back(static_cast<double>(i));
                s.y.push_back(io::to_double(wf["values"][i], "values"));
            }
            plot.series.push_back(std::move(s));
        }
        plot.xlabel = "basis index";
        plot.ylabel = p["input"]["mode"].get<std::string>();
    }
    plot.metadata["representation"] = p["input"]["representation"].get<std::string>();
    plot.metadata["mode"] = p["input"]["mode"].get<std::string>();
    write_file(dir, "wavefunction.csv", csv.str());
    write_file(dir, "wavefunction.svg", io::render(plot));
}

// ---- matelem ------------------------------------------------------------------

void matelem(const Common& c, const std::optional<std::string>& op) {
    Json req = qubit_request(load(c));
    if (c.evals_count) req["evals_count"] = *c.evals_count;
    if (op) req["operator"] = *op;
    const Json p = io::matelem_payload(req, c.workers.value_or(1));
    const fs::path dir = prepare_out(c.out);
    write_file(dir, "matelem.json", io::dump_payload(p));

    io::CsvWriter csv("matelem", units_of(p), p["input"]);
    const std::string op_name = p["operator"];
    auto absval = [](const Json& re, const Json& im) {
        return std::hypot(io::to_double(re, "re"), io::to_double(im, "im"));
    };
    if (p["axis"].is_null()) {
        csv.columns({"i", "j", "re", "im", "abs"});
        io::HeatMap map;
        map.title = fmt::format("|<i|{}|j>|", op_name);
        map.xlabel = "j";
        map.ylabel = "i";
        map.rows = static_cast<int>(p["re"].size());
        map.cols = map.rows;
        for (int i = 0; i < map.rows; ++i)
            for (int j = 0; j < map.cols; ++j) {
                const auto& re = p["re"][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                const auto& im = p["im"][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                csv.row(std::vector<double>{static_cast<double>(i), static_cast<double>(j), io::to_double(re, "re"),
                                            io::to_double(im, "im"), absval(re, im)});
                map.values.push_back(absval(re, im));
            }
        write_file(dir, "matelem.svg", io::render(map));
    } else {
        const auto x = row_of(p["axis"]["values"]);
        const std::string param = p["axis"]["name"];
        const std::size_t k = p["re"][0].size();
        std::vector<std::string> cols{param};
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) cols.push_back(fmt::format("abs_{}{}", i, j));
        csv.columns(cols);
        io::LinePlot plot;
        plot.title = fmt::format("|<i|{}|j>|", op_name);
        plot.xlabel = param;
        plot.ylabel = "matrix element";
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i; j < k; ++j) plot.series.push_back({fmt::format("{}{}", i, j), x, {}, "", false});
        for (std::size_t r = 0; r < x.size(); ++r) {
            std::vector<double> row{x[r]};
            std::size_t s = 0;
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) {
                    const double a = absval(p["re"][r][i][j], p["im"][r][i][j]);
                    row.push_back(a);
                    if (j >= i) plot.series[s++].y.push_back(a);
                }
            csv.row(row);
        }
        write_file(dir, "matelem.svg", io::render(plot));
    }
    write_file(dir, "matelem.csv", csv.str());
}

// ---- noise ----------------------------------------------------------------------

struct NoiseFlags {
    std::vector<std::string> channels;
    std::optional<std::string> effective;
    std::optional<std::string> param;
    std::optional<std::string> range;
    std::vector<std::string> options;
    bool rate = false;
};

void noise(const Common& c, const NoiseFlags& f) {
    Json req = qubit_request(load(c));
    req.erase("evals_count");
    Json n = req.contains("noise") ? req["noise"] : Json::object();
    if (!f.channels.empty()) n["channels"] = f.channels;
    if (f.effective) {
        n["effective"] = *f.effective;
        if (f.channels.empty()) n.erase("channels");
    }
    if (f.param) n["param"] = *f.param;
    if (f.range) {
        std::vector<std::string> parts;
        std::stringstream ss(*f.range);
        for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
        try {
            if (parts.size() != 3) throw std::invalid_argument("range");
            n["values"] = {{"linspace", {std::stod(parts[0]), std::stod(parts[1]), std::stoi(parts[2])}}};
        } catch (const std::exception&) {
            throw Error(ErrorKind::SpecValidation, "--range expects start:stop:count", "range");
        }
    }
    for (const auto& kv : f.options) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::BadOverride, "--options expects key=value", kv);
        try {
            n["options"][kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw Error(ErrorKind::BadOverride, "option value of '" + kv.substr(0, eq) + "' is not a number", kv);
        }
    }
    if (f.rate) n["get_rate"] = true;
    req["noise"] = n;
    const Json p = io::noise_payload(req, c.workers.value_or(1));
    const fs::path dir = prepare_out(c.out);
    write_file(dir, "coherence.json", io::dump_payload(p));

    io::CsvWriter csv("noise", units_of(p), p["input"]);
    std::vector<std::string> names;
    for (auto it = p["channels"].begin(); it != p["channels"].end(); ++it) names.push_back(it.key());
    const std::string unit = p["value_unit"];
    io::LinePlot plot;
    plot.title = fmt::format("{} {}", family_of(p), p["quantity"] == "rate" ? "decoherence rates" : "coherence times");
    plot.ylabel = fmt::format("{} [{}]", p["quantity"].get<std::string>(), unit);
    plot.log_y = true;
    plot.metadata["infinite_values"] = "gaps";
    if (p["axis"].is_null()) {
        csv.columns({"channel", "value"});
        for (const auto& name : names) csv.row({name, io::format_number(io::to_double(p["channels"][name], name))});
        for (std::size_t i = 0; i < names.size(); ++i) {
            const double v = io::to_double(p["channels"][names[i]], names[i]);
            plot.series.push_back({names[i], {static_cast<double>(i) - 0.3, static_cast<double>(i) + 0.3}, {v, v}, "", false});
        }
        plot.xlabel = "channel";
    } else {
        const auto x = row_of(p["axis"]["values"]);
        std::vector<std::string> cols{p["axis"]["name"].get<std::string>()};
        cols.insert(cols.end(), names.begin(), names.end());
        csv.columns(cols);
        for (std::size_t r = 0; r < x.size(); ++r) {
            std::vector<double> row{x[r]};
            for (const auto& name : names) row.push_back(io::to_double(p["channels"][name][r], name));
            csv.row(row);
        }
        for (const auto& name : names) plot.series.push_back({name, x, row_of(p["channels"][name]), "", false});
        plot.xlabel = p["axis"]["name"];
    }
    write_file(dir, "coherence.csv", csv.str());
    write_file(dir, "coherence.svg", io::render(plot));
}

// ---- sweeps ---------------------------------------------------------------------

io::SweepRequest sweep_request(const Common& c, Json& doc) {
    Json* sweep = doc.contains("sweep") ? &doc["sweep"] : &doc;
    if (c.evals_count) (*sweep)["evals_count"] = *c.evals_count;
    if (c.workers) (*sweep)["worker_count"] = *c.workers;
    Json clean = doc;
    clean.erase("transitions");
    clean.erase("slice");
    return io::sweep_request(clean);
}

std::vector<std::string> record_columns(const std::string& key, const std::vector<std::size_t>& trailing) {
    std::size_t n = 1;
    for (auto t : trailing) n *= t;
    std::vector<std::string> cols;
    std::vector<std::size_t> idx(trailing.size(), 0);
    for (std::size_t f = 0; f < n; ++f) {
        std::size_t rem = f;
        for (std::size_t d = trailing.size(); d-- > 0;) {
            idx[d] = rem % trailing[d];
            rem /= trailing[d];
        }
        cols.push_back(fmt::format("{}[{}]", key, fmt::join(idx, "][")));
    }
    return cols;
}

template <class T>
std::string grid_csv(const std::string& key, const NamedGridArray<T>& arr, const io::SweepRequest& req) {
    io::CsvWriter csv("sweep", std::string(req.units.name()), req.input);
    std::vector<std::string> cols;
    for (const auto& a : arr.axes()) cols.push_back(a.name);
    const auto rec_cols = record_columns(key, arr.trailing());
    cols.insert(cols.end(), rec_cols.begin(), rec_cols.end());
    csv.columns(cols);
    for (std::size_t p = 0; p < arr.grid_size(); ++p) {
        std::vector<std::string> row;
        const auto idx = arr.grid_index(p);
        for (std::size_t a = 0; a < idx.size(); ++a) row.push_back(io::format_number(arr.axes()[a].values[idx[a]]));
        for (const T& v : arr.record(p)) {
            if constexpr (std::is_same_v<T, int>)
                row.push_back(std::to_string(v));
            else
                row.push_back(io::format_number(v));
        }
        csv.row(row);
    }
    return csv.str();
}

std::string complex_binary(const NamedGridArray<cplx>& arr) {
    std::string out;
    out.resize(arr.data().size() * 2 * sizeof(double));
    char* dst = out.data();
    for (const cplx& z : arr.data()) {
        const double parts[2] = {z.real(), z.imag()};
        std::memcpy(dst, parts, sizeof(parts));
        dst += sizeof(parts);
    }
    return out;
}

Json array_entry(const std::string& file, const std::vector<std::size_t>& shape, const char* dtype) {
    return {{"file", file}, {"shape", shape}, {"dtype", dtype}};
}

void sweep(const Common& c) {
    Json doc = load(c);
    const io::SweepRequest req = sweep_request(c, doc);
    const SweepResult result = run_sweep(req.def);
    const fs::path dir = prepare_out(c.out);

    Json arrays = Json::object();
    write_file(dir, "evals.csv", grid_csv("E", result.evals, req));
    arrays["evals"] = array_entry("evals.csv", result.evals.shape(), "float64-csv");
    write_file(dir, "labels.csv", grid_csv("label", result.labels, req));
    arrays["labels"] = array_entry("labels.csv", result.labels.shape(), "int-csv");
    for (std::size_t j = 0; j < result.bare_evals.size(); ++j) {
        const std::string name = fmt::format("bare_evals_{}.csv", j);
        write_file(dir, name, grid_csv("E", result.bare_evals[j], req));
        arrays[fmt::format("bare_evals_{}", j)] = array_entry(name, result.bare_evals[j].shape(), "float64-csv");
        const std::string bin = fmt::format("bare_evecs_{}.bin", j);
        write_file(dir, bin, complex_binary(result.bare_evecs[j]));
        arrays[fmt::format("bare_evecs_{}", j)] = array_entry(bin, result.bare_evecs[j].shape(), "complex128-le");
    }
    for (const auto& [key, arr] : {std::pair{"lamb", &result.lamb}, std::pair{"chi", &result.chi}, std::pair{"kerr", &result.kerr}}) {
        write_file(dir, std::string(key) + ".csv", grid_csv(key, *arr, req));
        arrays[key] = array_entry(std::string(key) + ".csv", arr->shape(), "float64-csv");
    }
    if (req.def.store_evecs) {
        write_file(dir, "evecs.bin", complex_binary(result.evecs));
        arrays["evecs"] = array_entry("evecs.bin", result.evecs.shape(), "complex128-le");
    }
    Json axes = Json::array();
    for (const auto& a : result.axes) axes.push_back(io::to_json(a));
    const Json manifest{{"units", std::string(req.units.name())}, {"input", req.input},          {"axes", axes},
                        {"dims", result.dims},                     {"evals_count", result.evals_count},
                        {"arrays", arrays},                        {"layout", "row-major; axes first, then record dimensions"}};
    write_file(dir, "axes.json", io::dump_payload(manifest));

    const Json view = io::slice_view_payload(req, result, io::SliceQuery{});
    write_file(dir, "evals.json", io::dump_payload(view));

    // dressed spectrum along the first axis, other axes at their first value
    SweepResult line = result;
    for (std::size_t a = 1; a < result.axes.size(); ++a) line = line.slice_index(result.axes[a].name, 0);
    io::LinePlot plot;
    plot.title = "dressed spectrum";
    plot.xlabel = line.axes[0].name;
    plot.ylabel = fmt::format("energy [{}]", req.units.name());
    for (int k = 0; k < line.evals_count; ++k) {
        io::Series s;
        s.label = fmt::format("E{}", k);
        s.x = line.axes[0].values;
        for (std::size_t p = 0; p < line.grid_size(); ++p) s.y.push_back(line.evals.record(p)[static_cast<std::size_t>(k)]);
        plot.series.push_back(std::move(s));
    }
    for (std::size_t a = 1; a < result.axes.size(); ++a)
        plot.metadata[result.axes[a].name] = io::format_number(result.axes[a].values[0]);
    write_file(dir, "sweep.svg", io::render(plot));
}

struct TransitionFlags {
    std::optional<std::string> initial;
    std::optional<int> photon_number;
    bool sidebands = false;
    std::optional<std::string> subsystems;
    std::optional<std::string> coloring;
    std::vector<std::string> slices;
};

void transitions_cmd(const Common& c, const TransitionFlags& f) {
    Json doc = load(c);
    const io::SweepRequest req = sweep_request(c, doc);
    io::SliceQuery q;
    q.view = "transitions";
    if (doc.contains("slice")) {
        if (!doc["slice"].is_object()) throw Error(ErrorKind::SpecValidation, "slice: expected an object", "slice");
        for (auto it = doc["slice"].begin(); it != doc["slice"].end(); ++it)
            q.fixes.emplace_back(it.key(), io::to_double(*it, "slice." + it.key()));
    }
    for (const auto& s : f.slices) {
        const auto eq = s.find('=');
        try {
            if (eq == std::string::npos) throw std::invalid_argument(s);
            const std::string axis = s.substr(0, eq);
            const double v = std::stod(s.substr(eq + 1));
            std::erase_if(q.fixes, [&](const auto& fx) { return fx.first == axis; });
            q.fixes.emplace_back(axis, v);
        } catch (const std::exception&) {
            throw Error(ErrorKind::SpecValidation, "--slice expects axis=value", "slice");
        }
    }
    if (doc.contains("transitions")) q.params = doc["transitions"];
    if (!q.params.is_object()) throw Error(ErrorKind::SpecValidation, "transitions: expected an object", "transitions");
    if (f.initial) q.params["initial"] = *f.initial;
    if (f.photon_number) q.params["photon_number"] = *f.photon_number;
    if (f.sidebands) q.params["sidebands"] = true;
    if (f.subsystems) q.params["subsystems"] = *f.subsystems;
    if (f.coloring) q.params["coloring"] = *f.coloring;

    // fail on bad queries before the sweep runs
    for (const auto& [axis, v] : q.fixes) {
        (void)v;
        if (std::none_of(req.def.axes.begin(), req.def.axes.end(), [&](const Axis& a) { return a.name == axis; }))
            throw Error(ErrorKind::UnknownAxis, fmt::format("unknown axis '{}'", axis), "slice." + axis);
    }
    io::transition_options(q.params);

    const SweepResult result = run_sweep(req.def);
    const Json p = io::slice_view_payload(req, result, q);
    const fs::path dir = prepare_out(c.out);
    write_file(dir, "transitions.json", io::dump_payload(p));

    io::CsvWriter csv("transitions", units_of(p), p["input"]);
    const std::string axis = p["axis"]["name"];
    const auto x = row_of(p["axis"]["values"]);
    csv.columns({axis, "transition", "energy"});
    io::LinePlot plot;
    plot.title = fmt::format("transitions from {} (n = {})", fmt::join(p["query"]["params"]["initial"].get<std::vector<int>>(), ","),
                             p["query"]["params"]["photon_number"].get<int>());
    plot.xlabel = axis;
    plot.ylabel = fmt::format("energy [{}]", units_of(p));
    for (const auto& t : p["transitions"]) {
        const std::string label = t["label"];
        const auto e = row_of(t["energies"]);
        for (std::size_t i = 0; i < x.size(); ++i) csv.row({io::format_number(x[i]), label, io::format_number(e[i])});
        plot.series.push_back({label, x, e, t["sideband"].get<bool>() ? "#999999" : "", t["sideband"].get<bool>()});
    }
    write_file(dir, "transitions.csv", csv.str());
    write_file(dir, "transitions.svg", io::render(plot));
}

// ---- export / validate ------------------------------------------------------------

void export_hamiltonian(const Common& c, const std::optional<std::string>& storage) {
    Json req = qubit_request(load(c));
    req.erase("evals_count");
    if (storage) req["storage"] = *storage;
    const Json p = io::hamiltonian_export(req);
    const fs::path dir = prepare_out(c.out);
    write_file(dir, "hamiltonian.json", io::dump_payload(p));
}

int validate_cmd(const std::string& in, const std::optional<std::string>& out, std::ostream& os) {
    std::ifstream f(in, std::ios::binary);
    if (!f) throw Error(ErrorKind::SpecValidation, "cannot read " + in, "in");
    std::stringstream ss;
    ss << f.rdbuf();
    const Json report = io::validation_report(ss.str());
    os << io::dump_payload(report);
    if (out) write_file(prepare_out(*out), "validation.json", io::dump_payload(report));
    return report["valid"].get<bool>() ? 0 : 2;
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message, const std::string& field) {
    Json e{{"kind", kind}, {"message", message}};
    if (!field.empty()) e["field"] = field;
    err << Json{{"error", e}}.dump() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"qspec: superconducting-qubit spectra, sweeps and coherence estimates"};
    app.require_subcommand(1);
    app.set_version_flag("--version", io::kVersion);

    Common common;
    auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues, optionally over a parameter scan");
    add_common(spectrum_cmd, common);

    auto* wf_cmd = app.add_subcommand("wavefunction", "eigenfunctions, with the potential in phase space");
    std::optional<std::string> which, rep, mode;
    add_common(wf_cmd, common);
    wf_cmd->add_option("--which", which, "eigenstate indices, e.g. 0,1,2");
    wf_cmd->add_option("--representation", rep, "native, charge or phase");
    wf_cmd->add_option("--mode", mode, "real, imag, abs or abs_sqr");

    auto* me_cmd = app.add_subcommand("matelem", "matrix elements of a qubit operator");
    std::optional<std::string> op;
    add_common(me_cmd, common);
    me_cmd->add_option("--operator", op, "operator name, e.g. n_operator");

    auto* noise_cmd = app.add_subcommand("noise", "coherence times from the noise channels");
    NoiseFlags nf;
    add_common(noise_cmd, common);
    noise_cmd->add_option("--channel", nf.channels, "noise channel (repeatable)");
    noise_cmd->add_option("--effective", nf.effective, "effective t1 or t2")->check(CLI::IsMember({"t1", "t2"}));
    noise_cmd->add_option("--param", nf.param, "parameter to scan");
    noise_cmd->add_option("--range", nf.range, "start:stop:count");
    noise_cmd->add_option("--options", nf.options, "channel option key=value (repeatable)");
    noise_cmd->add_flag("--rate", nf.rate, "report rates instead of times");

    auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep of a composite system; writes a result archive");
    add_common(sweep_cmd, common);

    auto* tr_cmd = app.add_subcommand("transitions", "transition energies along one free sweep axis");
    TransitionFlags tf;
    add_common(tr_cmd, common);
    tr_cmd->add_option("--initial", tf.initial, "initial bare state, e.g. 0,0,0");
    tr_cmd->add_option("--photon-number", tf.photon_number, "photon number n");
    tr_cmd->add_flag("--sidebands", tf.sidebands, "include sideband transitions");
    tr_cmd->add_option("--subsystems", tf.subsystems, "subsystems allowed to change, e.g. 0,1");
    tr_cmd->add_option("--coloring", tf.coloring, "labeled or plain");
    tr_cmd->add_option("--slice", tf.slices, "axis=value (repeatable)");

    auto* ex_cmd = app.add_subcommand("export-hamiltonian", "write the Hamiltonian matrix file");
    std::optional<std::string> storage;
    add_common(ex_cmd, common);
    ex_cmd->add_option("--storage", storage, "auto, dense or coo");

    auto* val_cmd = app.add_subcommand("validate", "schema and invariant check without computation");
    std::string val_in;
    std::optional<std::string> val_out;
    val_cmd->add_option("--in", val_in, "input spec file")->required();
    val_cmd->add_option("--out", val_out, "also write validation.json here");

    auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
    std::string host = "127.0.0.1";
    int port = 8080;
    service::ServiceOptions sopts;
    serve_cmd->add_option("--host", host, "bind address");
    serve_cmd->add_option("--port", port, "port (0 picks a free one)");
    serve_cmd->add_option("--max-jobs", sopts.max_finished_jobs, "finished sweep results kept in memory");
    serve_cmd->add_option("--cors-origin", sopts.cors_origin, "Access-Control-Allow-Origin value");
    serve_cmd->add_option("--workers", sopts.workers, "workers for synchronous scans");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*spectrum_cmd) spectrum(common);
        if (*wf_cmd) wavefunction(common, which, rep, mode);
        if (*me_cmd) matelem(common, op);
        if (*noise_cmd) noise(common, nf);
        if (*sweep_cmd) sweep(common);
        if (*tr_cmd) transitions_cmd(common, tf);
        if (*ex_cmd) export_hamiltonian(common, storage);
        if (*val_cmd) return validate_cmd(val_in, val_out, out);
        if (*serve_cmd) {
            service::Service svc(sopts);
            out << fmt::format("qspec service on http://{}:{}\n", host, port) << std::flush;
            if (!svc.listen(host, port)) {
                print_error(err, "ServiceError", fmt::format("cannot listen on {}:{}", host, port), "port");
                return 1;
            }
        }
    } catch (const Error& e) {
        print_error(err, std::string(to_string(e.kind())), e.what(), e.field());
        return is_input_error(e.kind()) ? 2 : 1;
    } catch (const std::exception& e) {
        print_error(err, "InternalError", e.what(), "");
        return 1;
    }
    return 0;
}

}  // namespace qspec::cli
