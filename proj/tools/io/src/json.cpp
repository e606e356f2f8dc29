#include "qspec/io/json.hpp"

#include "qspec/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace qspec::io {

namespace {

Error bad(const std::string& path, const std::string& message, ErrorKind kind = ErrorKind::SpecValidation) {
    return Error(kind, path + ": " + message, path);
}

Error in_context(const Error& e, const std::string& path) {
    const std::string field = e.field().empty() ? path : path + "." + e.field();
    return Error(e.kind(), path + ": " + e.what(), field);
}

const Json& member(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw bad(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw bad(path + "." + key, "missing");
    return *it;
}

void only_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& path) {
    if (!j.is_object()) throw bad(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : keys) ok = ok || it.key() == k;
        if (!ok) throw bad(path + "." + it.key(), "unknown member", ErrorKind::UnknownParameter);
    }
}

cplx complex_from_json(const Json& j, const std::string& path) {
    if (j.is_object()) {
        only_keys(j, {"re", "im"}, path);
        const double re = j.contains("re") ? to_double(j["re"], path + ".re") : 0.0;
        const double im = j.contains("im") ? to_double(j["im"], path + ".im") : 0.0;
        return {re, im};
    }
    return {to_double(j, path), 0.0};
}

Json complex_to_json(cplx z) {
    if (z.imag() == 0.0) return num(z.real());
    return Json{{"re", num(z.real())}, {"im", num(z.imag())}};
}

OperatorRef ref_from_json(const Json& j, const std::string& path) {
    only_keys(j, {"subsystem", "operator", "matrix"}, path);
    OperatorRef ref;
    ref.subsystem = to_int(member(j, "subsystem", path), path + ".subsystem");
    const bool has_op = j.contains("operator");
    const bool has_matrix = j.contains("matrix");
    if (has_op == has_matrix) throw bad(path, "give exactly one of operator or matrix");
    if (has_op) ref.name = to_string_value(j["operator"], path + ".operator");
    if (has_matrix) ref.matrix = matrix_from_json(j["matrix"], path + ".matrix");
    return ref;
}

Json ref_to_json(const OperatorRef& ref) {
    Json j{{"subsystem", ref.subsystem}};
    if (ref.matrix)
        j["matrix"] = to_json(*ref.matrix);
    else
        j["operator"] = ref.name;
    return j;
}

template <class T>
Json nested_impl(const std::vector<T>& data, const std::vector<std::size_t>& shape, std::size_t dim,
                 std::size_t& pos) {
    Json arr = Json::array();
    if (dim == shape.size()) return Json();
    for (std::size_t i = 0; i < shape[dim]; ++i) {
        if (dim + 1 == shape.size()) {
            if constexpr (std::is_same_v<T, double>)
                arr.push_back(num(data[pos++]));
            else
                arr.push_back(data[pos++]);
        } else {
            arr.push_back(nested_impl(data, shape, dim + 1, pos));
        }
    }
    return arr;
}

}  // namespace

Json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double to_double(const Json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw bad(path, "expected a number");
}

int to_int(const Json& j, const std::string& path) {
    if (j.is_number_integer()) return j.get<int>();
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::isfinite(v) && v == std::round(v) && std::abs(v) < 2e9) return static_cast<int>(v);
    }
    throw bad(path, "expected an integer");
}

bool to_bool(const Json& j, const std::string& path) {
    if (!j.is_boolean()) throw bad(path, "expected true or false");
    return j.get<bool>();
}

std::string to_string_value(const Json& j, const std::string& path) {
    if (!j.is_string()) throw bad(path, "expected a string");
    return j.get<std::string>();
}

Json parse_document(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const std::size_t end = std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::string detail = e.what();
        if (auto c = detail.find("column"); c != std::string::npos)
            if (auto colon = detail.find(": ", c); colon != std::string::npos) detail = detail.substr(colon + 2);
        throw Error(ErrorKind::SyntaxError, fmt::format("line {}, column {}: {}", line, column, detail),
                    fmt::format("{}:{}", line, column));
    }
}

Json load_document(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorKind::SpecValidation, "cannot read " + file.string(), "in");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_document(ss.str());
}

std::vector<double> values_from_json(const Json& j, const std::string& path) {
    std::vector<double> out;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(to_double(j[i], fmt::format("{}[{}]", path, i)));
    } else if (j.is_object()) {
        only_keys(j, {"linspace"}, path);
        const Json& ls = member(j, "linspace", path);
        if (!ls.is_array() || ls.size() != 3) throw bad(path + ".linspace", "expected [start, stop, count]");
        const double a = to_double(ls[0], path + ".linspace[0]");
        const double b = to_double(ls[1], path + ".linspace[1]");
        const int n = to_int(ls[2], path + ".linspace[2]");
        if (n < 1) throw bad(path + ".linspace[2]", "count must be positive", ErrorKind::InvalidCount);
        out = linspace(a, b, static_cast<std::size_t>(n));
    } else {
        throw bad(path, "expected an array or {\"linspace\": [start, stop, count]}");
    }
    if (out.empty()) throw bad(path, "values must be non-empty");
    for (double v : out)
        if (!std::isfinite(v)) throw bad(path, "values must be finite");
    return out;
}

std::vector<int> int_list(const Json& j, const std::string& path) {
    if (!j.is_array()) throw bad(path, "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(to_int(j[i], fmt::format("{}[{}]", path, i)));
    return out;
}

QubitSpec qubit_from_json(const Json& j, const std::string& path) {
    only_keys(j, {"family", "params"}, path);
    const std::string family = to_string_value(member(j, "family", path), path + ".family");
    QubitSpec spec;
    try {
        spec = make_default(family);
    } catch (const Error&) {
        throw bad(path + ".family", fmt::format("unknown family '{}'", family));
    }
    if (j.contains("params")) {
        const Json& params = j["params"];
        if (!params.is_object()) throw bad(path + ".params", "expected an object");
        const auto infos = param_list(spec);
        for (auto it = params.begin(); it != params.end(); ++it) {
            const std::string field = path + ".params." + it.key();
            auto info = std::find_if(infos.begin(), infos.end(), [&](const ParamInfo& p) { return p.name == it.key(); });
            if (info == infos.end())
                throw bad(field, fmt::format("{} has no parameter '{}'", family, it.key()), ErrorKind::UnknownParameter);
            if (it->is_null()) {
                if (!info->optional) throw bad(field, "must not be null");
                continue;
            }
            const double v = info->integer ? to_int(*it, field) : to_double(*it, field);
            spec = with_param(spec, it.key(), v);
        }
    }
    for (const auto& issue : check_spec(spec))
        if (issue.severity == ValidationIssue::Severity::Error)
            throw bad(path + ".params." + issue.field, issue.message);
    return spec;
}

Json to_json(const QubitSpec& spec) {
    Json params = Json::object();
    for (const auto& p : param_list(spec)) {
        const double v = get_param(spec, p.name);
        if (p.optional && std::isnan(v))
            params[p.name] = nullptr;
        else if (p.integer)
            params[p.name] = static_cast<int>(std::lround(v));
        else
            params[p.name] = num(v);
    }
    return Json{{"family", std::string(family_name(spec))}, {"params", params}};
}

CMatrix matrix_from_json(const Json& j, const std::string& path) {
    auto read_real = [&](const Json& rows, const std::string& where) {
        if (!rows.is_array() || rows.empty() || !rows[0].is_array())
            throw bad(where, "expected a non-empty array of rows");
        const auto r = static_cast<Eigen::Index>(rows.size());
        const auto c = static_cast<Eigen::Index>(rows[0].size());
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index a = 0; a < r; ++a) {
            const Json& row = rows[static_cast<std::size_t>(a)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c)
                throw bad(fmt::format("{}[{}]", where, a), "rows must have equal length", ErrorKind::DimensionMismatch);
            for (Eigen::Index b = 0; b < c; ++b)
                m(a, b) = to_double(row[static_cast<std::size_t>(b)], fmt::format("{}[{}][{}]", where, a, b));
        }
        return m;
    };
    if (j.is_array()) return read_real(j, path).cast<cplx>();
    only_keys(j, {"re", "im"}, path);
    const Eigen::MatrixXd re = read_real(member(j, "re", path), path + ".re");
    CMatrix m = re.cast<cplx>();
    if (j.contains("im")) {
        const Eigen::MatrixXd im = read_real(j["im"], path + ".im");
        if (im.rows() != re.rows() || im.cols() != re.cols())
            throw bad(path + ".im", "shape differs from re", ErrorKind::DimensionMismatch);
        m.imag() = im;
    }
    return m;
}

Json to_json(const CMatrix& m) {
    Json re = Json::array(), im = Json::array();
    bool complex = false;
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
        Json rr = Json::array(), ri = Json::array();
        for (Eigen::Index b = 0; b < m.cols(); ++b) {
            rr.push_back(num(m(a, b).real()));
            ri.push_back(num(m(a, b).imag()));
            complex = complex || m(a, b).imag() != 0.0;
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ri));
    }
    if (!complex) return re;
    return Json{{"re", re}, {"im", im}};
}

HilbertSpaceDef hilbertspace_from_json(const Json& j, const std::string& path) {
    only_keys(j, {"subsystems", "interactions"}, path);
    HilbertSpaceDef def;
    const Json& subs = member(j, "subsystems", path);
    if (!subs.is_array() || subs.empty()) throw bad(path + ".subsystems", "expected a non-empty array");
    for (std::size_t i = 0; i < subs.size(); ++i)
        def.subsystems.push_back(qubit_from_json(subs[i], fmt::format("{}.subsystems[{}]", path, i)));
    if (j.contains("interactions")) {
        const Json& terms = j["interactions"];
        if (!terms.is_array()) throw bad(path + ".interactions", "expected an array");
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const std::string where = fmt::format("{}.interactions[{}]", path, t);
            const Json& term = terms[t];
            const std::string type = to_string_value(member(term, "type", where), where + ".type");
            if (type == "product") {
                only_keys(term, {"type", "g", "operators", "add_hc"}, where);
                ProductTerm p;
                if (term.contains("g")) p.g = complex_from_json(term["g"], where + ".g");
                const Json& ops = member(term, "operators", where);
                if (!ops.is_array()) throw bad(where + ".operators", "expected an array");
                for (std::size_t f = 0; f < ops.size(); ++f)
                    p.factors.push_back(ref_from_json(ops[f], fmt::format("{}.operators[{}]", where, f)));
                if (term.contains("add_hc")) p.add_hc = to_bool(term["add_hc"], where + ".add_hc");
                def.interactions.emplace_back(std::move(p));
            } else if (type == "expression") {
                only_keys(term, {"type", "expr", "bindings", "constants", "add_hc"}, where);
                ExpressionTerm e;
                e.expr = to_string_value(member(term, "expr", where), where + ".expr");
                if (term.contains("bindings")) {
                    const Json& b = term["bindings"];
                    if (!b.is_object()) throw bad(where + ".bindings", "expected an object");
                    for (auto it = b.begin(); it != b.end(); ++it)
                        e.bindings.emplace(it.key(), ref_from_json(*it, where + ".bindings." + it.key()));
                }
                if (term.contains("constants")) {
                    const Json& c = term["constants"];
                    if (!c.is_object()) throw bad(where + ".constants", "expected an object");
                    for (auto it = c.begin(); it != c.end(); ++it)
                        e.constants.emplace(it.key(), to_double(*it, where + ".constants." + it.key()));
                }
                if (term.contains("add_hc")) e.add_hc = to_bool(term["add_hc"], where + ".add_hc");
                def.interactions.emplace_back(std::move(e));
            } else if (type == "raw") {
                only_keys(term, {"type", "matrix"}, where);
                def.interactions.emplace_back(RawMatrixTerm{matrix_from_json(member(term, "matrix", where), where + ".matrix")});
            } else {
                throw bad(where + ".type", fmt::format("unknown interaction type '{}'", type));
            }
        }
    }
    try {
        validate(def);
    } catch (const Error& e) {
        throw in_context(e, path);
    }
    return def;
}

Json to_json(const HilbertSpaceDef& def) {
    Json subs = Json::array();
    for (const auto& s : def.subsystems) subs.push_back(to_json(s));
    Json terms = Json::array();
    for (const auto& term : def.interactions) {
        std::visit(
            [&](const auto& t) {
                using T = std::decay_t<decltype(t)>;
                if constexpr (std::is_same_v<T, ProductTerm>) {
                    Json ops = Json::array();
                    for (const auto& f : t.factors) ops.push_back(ref_to_json(f));
                    terms.push_back({{"type", "product"}, {"g", complex_to_json(t.g)}, {"operators", ops},
                                     {"add_hc", t.add_hc}});
                } else if constexpr (std::is_same_v<T, ExpressionTerm>) {
                    Json bindings = Json::object(), constants = Json::object();
                    for (const auto& [k, ref] : t.bindings) bindings[k] = ref_to_json(ref);
                    for (const auto& [k, v] : t.constants) constants[k] = num(v);
                    terms.push_back({{"type", "expression"}, {"expr", t.expr}, {"bindings", bindings},
                                     {"constants", constants}, {"add_hc", t.add_hc}});
                } else {
                    terms.push_back({{"type", "raw"}, {"matrix", to_json(t.matrix)}});
                }
            },
            term);
    }
    return Json{{"subsystems", subs}, {"interactions", terms}};
}

SweepDef sweep_from_json(const Json& j, const std::string& path) {
    only_keys(j,
              {"hilbertspace", "axes", "bindings", "evals_count", "subsys_update_info", "worker_count",
               "label_threshold", "store_evecs"},
              path);
    SweepDef def;
    def.hilbertspace = hilbertspace_from_json(member(j, "hilbertspace", path), path + ".hilbertspace");
    const Json& axes = member(j, "axes", path);
    if (!axes.is_array() || axes.empty()) throw bad(path + ".axes", "expected a non-empty array");
    for (std::size_t a = 0; a < axes.size(); ++a) {
        const std::string where = fmt::format("{}.axes[{}]", path, a);
        only_keys(axes[a], {"name", "values"}, where);
        def.axes.push_back(Axis{to_string_value(member(axes[a], "name", where), where + ".name"),
                                values_from_json(member(axes[a], "values", where), where + ".values")});
    }
    if (j.contains("bindings")) {
        const Json& binds = j["bindings"];
        if (!binds.is_array()) throw bad(path + ".bindings", "expected an array");
        for (std::size_t b = 0; b < binds.size(); ++b) {
            const std::string where = fmt::format("{}.bindings[{}]", path, b);
            only_keys(binds[b], {"axis", "subsystem", "interaction", "field", "offset", "scale"}, where);
            UpdateBinding u;
            u.axis = to_string_value(member(binds[b], "axis", where), where + ".axis");
            u.field = to_string_value(member(binds[b], "field", where), where + ".field");
            if (binds[b].contains("subsystem")) u.subsystem = to_int(binds[b]["subsystem"], where + ".subsystem");
            if (binds[b].contains("interaction"))
                u.interaction = to_int(binds[b]["interaction"], where + ".interaction");
            if (binds[b].contains("offset")) u.offset = to_double(binds[b]["offset"], where + ".offset");
            if (binds[b].contains("scale")) u.scale = to_double(binds[b]["scale"], where + ".scale");
            def.bindings.push_back(std::move(u));
        }
    }
    if (j.contains("evals_count")) def.evals_count = to_int(j["evals_count"], path + ".evals_count");
    if (j.contains("worker_count")) def.worker_count = to_int(j["worker_count"], path + ".worker_count");
    if (j.contains("label_threshold"))
        def.label_threshold = to_double(j["label_threshold"], path + ".label_threshold");
    if (j.contains("store_evecs")) def.store_evecs = to_bool(j["store_evecs"], path + ".store_evecs");
    if (j.contains("subsys_update_info") && !j["subsys_update_info"].is_null()) {
        const Json& info = j["subsys_update_info"];
        if (!info.is_object()) throw bad(path + ".subsys_update_info", "expected an object");
        std::map<std::string, std::vector<int>> m;
        for (auto it = info.begin(); it != info.end(); ++it)
            m[it.key()] = int_list(*it, path + ".subsys_update_info." + it.key());
        def.subsys_update_info = std::move(m);
    }
    try {
        validate(def);
    } catch (const Error& e) {
        throw in_context(e, path);
    }
    return def;
}

Json to_json(const Axis& axis) {
    Json values = Json::array();
    for (double v : axis.values) values.push_back(num(v));
    return Json{{"name", axis.name}, {"values", values}};
}

Json to_json(const SweepDef& def) {
    Json axes = Json::array();
    for (const auto& a : def.axes) axes.push_back(to_json(a));
    Json binds = Json::array();
    for (const auto& b : def.bindings) {
        Json jb{{"axis", b.axis}, {"field", b.field}, {"offset", num(b.offset)}, {"scale", num(b.scale)}};
        if (b.subsystem) jb["subsystem"] = *b.subsystem;
        if (b.interaction) jb["interaction"] = *b.interaction;
        binds.push_back(std::move(jb));
    }
    Json j{{"hilbertspace", to_json(def.hilbertspace)},
           {"axes", axes},
           {"bindings", binds},
           {"evals_count", def.evals_count},
           {"label_threshold", num(def.label_threshold)},
           {"store_evecs", def.store_evecs}};
    // worker_count is left out: results do not depend on it.
    if (def.subsys_update_info) {
        Json info = Json::object();
        for (const auto& [k, v] : *def.subsys_update_info) info[k] = v;
        j["subsys_update_info"] = info;
    } else {
        j["subsys_update_info"] = nullptr;
    }
    return j;
}

UnitContext units_from_document(const Json& doc) {
    if (!doc.is_object() || !doc.contains("units")) return {};
    return parse_units(to_string_value(doc["units"], "units"));
}

Json nested(const std::vector<double>& data, const std::vector<std::size_t>& shape) {
    std::size_t pos = 0;
    if (shape.empty()) return data.empty() ? Json() : num(data[0]);
    return nested_impl(data, shape, 0, pos);
}

Json nested(const std::vector<int>& data, const std::vector<std::size_t>& shape) {
    std::size_t pos = 0;
    if (shape.empty()) return data.empty() ? Json() : Json(data[0]);
    return nested_impl(data, shape, 0, pos);
}

}  // namespace qspec::io
