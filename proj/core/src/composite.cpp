#include "qspec/composite.hpp"

#include "qspec/error.hpp"
#include "qspec/expression.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace qspec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Error with_context(const Error& e, const std::string& prefix) {
    const std::string field = e.field().empty() ? prefix : prefix + "." + e.field();
    return Error(e.kind(), prefix + ": " + e.what(), field);
}

void check_ref(const HilbertSpaceDef& def, const OperatorRef& ref, const std::string& where) {
    if (ref.subsystem < 0 || ref.subsystem >= static_cast<int>(def.subsystems.size()))
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("{}: subsystem index {} out of range", where, ref.subsystem), where + ".subsystem");
    const QubitSpec& spec = def.subsystems[static_cast<std::size_t>(ref.subsystem)];
    if (ref.matrix) {
        const int d = hilbert_dim(spec);
        if (ref.matrix->rows() != d || ref.matrix->cols() != d)
            throw Error(ErrorKind::DimensionMismatch,
                        fmt::format("{}: inline matrix is {}x{}, subsystem {} needs {}x{}", where, ref.matrix->rows(),
                                    ref.matrix->cols(), ref.subsystem, d, d),
                        where + ".matrix");
        return;
    }
    const auto names = operator_names(spec);
    if (std::find(names.begin(), names.end(), ref.name) == names.end())
        throw Error(ErrorKind::UnknownOperator,
                    fmt::format("{}: unknown operator '{}' for {}", where, ref.name, family_name(spec)),
                    where + ".operator");
}

std::map<std::string, cplx> scalar_constants(const ExpressionTerm& t) {
    std::map<std::string, cplx> out;
    for (const auto& [k, v] : t.constants) out.emplace(k, cplx(v, 0.0));
    return out;
}

std::set<std::string> binding_names(const ExpressionTerm& t) {
    std::set<std::string> out;
    for (const auto& [k, v] : t.bindings) out.insert(k);
    return out;
}

CMatrix add_hc(CMatrix m, bool enabled) {
    if (enabled) m += m.adjoint().eval();
    return m;
}

}  // namespace

std::vector<int> subsystem_dims(const HilbertSpaceDef& def) {
    std::vector<int> dims;
    for (const auto& s : def.subsystems) dims.push_back(truncated_dim(s));
    return dims;
}

int bare_dimension(const HilbertSpaceDef& def) {
    const auto dims = subsystem_dims(def);
    return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

int bare_index(const std::vector<int>& dims, const std::vector<int>& excitations) {
    int idx = 0;
    for (std::size_t j = 0; j < dims.size(); ++j) {
        if (excitations[j] < 0 || excitations[j] >= dims[j]) return -1;
        idx = idx * dims[j] + excitations[j];
    }
    return idx;
}

std::vector<int> bare_tuple(const std::vector<int>& dims, int index) {
    std::vector<int> t(dims.size());
    for (std::size_t j = dims.size(); j-- > 0;) {
        t[j] = index % dims[j];
        index /= dims[j];
    }
    return t;
}

void validate(const HilbertSpaceDef& def) {
    if (def.subsystems.empty())
        throw Error(ErrorKind::SpecValidation, "at least one subsystem is required", "subsystems");
    for (std::size_t i = 0; i < def.subsystems.size(); ++i) {
        try {
            validate(def.subsystems[i]);
        } catch (const Error& e) {
            throw with_context(e, fmt::format("subsystems[{}]", i));
        }
    }
    const int dim = bare_dimension(def);
    for (std::size_t t = 0; t < def.interactions.size(); ++t) {
        const std::string where = fmt::format("interactions[{}]", t);
        std::visit(
            [&](const auto& term) {
                using T = std::decay_t<decltype(term)>;
                if constexpr (std::is_same_v<T, ProductTerm>) {
                    if (term.factors.empty())
                        throw Error(ErrorKind::SpecValidation, where + ": product term needs factors",
                                    where + ".factors");
                    for (std::size_t f = 0; f < term.factors.size(); ++f)
                        check_ref(def, term.factors[f], fmt::format("{}.factors[{}]", where, f));
                } else if constexpr (std::is_same_v<T, ExpressionTerm>) {
                    for (const auto& [name, ref] : term.bindings) check_ref(def, ref, where + ".bindings." + name);
                    try {
                        const Expression e = Expression::parse(term.expr, binding_names(term), scalar_constants(term));
                        if (!e.is_operator())
                            throw Error(ErrorKind::TypeError, "expression does not contain an operator", "expr");
                    } catch (const Error& e) {
                        throw with_context(e, where);
                    }
                } else {
                    if (term.matrix.rows() != dim || term.matrix.cols() != dim)
                        throw Error(ErrorKind::DimensionMismatch,
                                    fmt::format("{}: raw matrix is {}x{}, bare dimension is {}", where,
                                                term.matrix.rows(), term.matrix.cols(), dim),
                                    where + ".matrix");
                    if (!is_hermitian(term.matrix))
                        throw Error(ErrorKind::HermiticityViolation, where + ": raw matrix is not Hermitian",
                                    where + ".matrix");
                }
            },
            def.interactions[t]);
    }
}

std::vector<Eigensystem> bare_spectra(const HilbertSpaceDef& def) {
    std::vector<Eigensystem> out;
    out.reserve(def.subsystems.size());
    for (std::size_t i = 0; i < def.subsystems.size(); ++i) {
        try {
            out.push_back(eigensys(def.subsystems[i], truncated_dim(def.subsystems[i])));
        } catch (const Error& e) {
            throw with_context(e, fmt::format("subsystems[{}]", i));
        }
    }
    return out;
}

CMatrix lift_operator(const HilbertSpaceDef& def, const std::vector<Eigensystem>& bare, const OperatorRef& ref) {
    check_ref(def, ref, "operator");
    const auto j = static_cast<std::size_t>(ref.subsystem);
    const CMatrix& u = bare[j].evecs;
    CMatrix native = ref.matrix ? *ref.matrix : qubit_operator(def.subsystems[j], ref.name).dense();
    const CMatrix local = u.adjoint() * native * u;

    const auto dims = subsystem_dims(def);
    int before = 1, after = 1;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (k < j) before *= dims[k];
        if (k > j) after *= dims[k];
    }
    return kron(kron(CMatrix::Identity(before, before), local), CMatrix::Identity(after, after));
}

CMatrix interaction_matrix(const HilbertSpaceDef& def, const std::vector<Eigensystem>& bare,
                           const InteractionTerm& term) {
    const int dim = bare_dimension(def);
    if (const auto* p = std::get_if<ProductTerm>(&term)) {
        CMatrix m = p->g * CMatrix::Identity(dim, dim);
        for (const auto& f : p->factors) m = (m * lift_operator(def, bare, f)).eval();
        return add_hc(std::move(m), p->add_hc);
    }
    if (const auto* e = std::get_if<ExpressionTerm>(&term)) {
        const Expression expr = Expression::parse(e->expr, binding_names(*e), scalar_constants(*e));
        std::map<std::string, CMatrix> ops;
        for (const auto& [name, ref] : e->bindings) ops.emplace(name, lift_operator(def, bare, ref));
        Expression::Value v = expr.evaluate(ops, dim);
        if (!std::holds_alternative<CMatrix>(v))
            throw Error(ErrorKind::TypeError, "interaction expression evaluates to a scalar", "expr");
        return add_hc(std::get<CMatrix>(std::move(v)), e->add_hc);
    }
    const auto& raw = std::get<RawMatrixTerm>(term);
    if (raw.matrix.rows() != dim || raw.matrix.cols() != dim)
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("raw matrix is {}x{}, bare dimension is {}", raw.matrix.rows(), raw.matrix.cols(), dim),
                    "matrix");
    return raw.matrix;
}

CMatrix assemble_hamiltonian(const HilbertSpaceDef& def, const std::vector<Eigensystem>& bare) {
    const auto dims = subsystem_dims(def);
    const int dim = bare_dimension(def);
    CMatrix h = CMatrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const auto t = bare_tuple(dims, i);
        double e = 0.0;
        for (std::size_t j = 0; j < dims.size(); ++j) e += bare[j].evals(t[j]);
        h(i, i) = e;
    }
    if (def.interactions.empty()) return h;

    CMatrix v = CMatrix::Zero(dim, dim);
    for (std::size_t t = 0; t < def.interactions.size(); ++t) {
        try {
            v += interaction_matrix(def, bare, def.interactions[t]);
        } catch (const Error& e) {
            throw with_context(e, fmt::format("interactions[{}]", t));
        }
    }
    if (!is_hermitian(v))
        throw Error(ErrorKind::NonHermitianTotal,
                    "interaction sum is not Hermitian; set add_hc or supply Hermitian factors", "interactions");
    h += 0.5 * (v + v.adjoint());
    return h;
}

CMatrix assemble_hamiltonian(const HilbertSpaceDef& def) {
    validate(def);
    return assemble_hamiltonian(def, bare_spectra(def));
}

Eigensystem dressed_eigensys(const HilbertSpaceDef& def, const std::vector<Eigensystem>& bare, int evals_count) {
    const int dim = bare_dimension(def);
    if (evals_count < 1 || evals_count > dim)
        throw Error(ErrorKind::InvalidCount, fmt::format("evals_count {} outside [1, {}]", evals_count, dim),
                    "evals_count");
    return eigensolve_dense(assemble_hamiltonian(def, bare), evals_count);
}

Eigensystem dressed_eigensys(const HilbertSpaceDef& def, int evals_count) {
    validate(def);
    return dressed_eigensys(def, bare_spectra(def), evals_count);
}

std::vector<std::optional<DressedLabel>> label_dressed_states(const std::vector<int>& dims, const Eigensystem& dressed,
                                                              double threshold) {
    const auto n = static_cast<int>(dressed.evecs.cols());
    struct Candidate {
        int dressed;
        int bare;
        double overlap;
    };
    std::vector<Candidate> candidates;
    for (int d = 0; d < n; ++d) {
        Eigen::Index best = 0;
        const double overlap = dressed.evecs.col(d).cwiseAbs2().maxCoeff(&best);
        if (overlap > threshold + 1e-12) candidates.push_back({d, static_cast<int>(best), overlap});
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.overlap > b.overlap; });

    std::vector<std::optional<DressedLabel>> labels(static_cast<std::size_t>(n));
    std::set<int> used;
    for (const auto& c : candidates) {
        if (!used.insert(c.bare).second) continue;
        labels[static_cast<std::size_t>(c.dressed)] = DressedLabel{bare_tuple(dims, c.bare), c.overlap};
    }
    return labels;
}

double DispersiveCoefficients::lamb_at(int j, int k) const {
    return lamb[static_cast<std::size_t>(j * levels + k)];
}

double DispersiveCoefficients::chi_at(int j, int l, int a, int b) const {
    return chi[static_cast<std::size_t>(((j * subsystems + l) * levels + a) * levels + b)];
}

double DispersiveCoefficients::kerr_at(int j, int l) const {
    return kerr[static_cast<std::size_t>(j * subsystems + l)];
}

DispersiveCoefficients dispersive_coefficients(const std::vector<int>& dims, const std::vector<Eigensystem>& bare,
                                               const Eigensystem& dressed,
                                               const std::vector<std::optional<DressedLabel>>& labels, bool strict) {
    const int nsub = static_cast<int>(dims.size());
    const int levels = *std::max_element(dims.begin(), dims.end());

    std::map<int, double> energy_of;
    for (std::size_t d = 0; d < labels.size(); ++d)
        if (labels[d]) energy_of[bare_index(dims, labels[d]->excitations)] = dressed.evals(static_cast<Eigen::Index>(d));

    auto tuple = [&](std::initializer_list<std::pair<int, int>> parts) {
        std::vector<int> t(dims.size(), 0);
        for (auto [j, k] : parts) t[static_cast<std::size_t>(j)] += k;
        return t;
    };
    auto energy = [&](const std::vector<int>& t) {
        const int idx = bare_index(dims, t);
        if (idx < 0) return kNaN;
        auto it = energy_of.find(idx);
        return it == energy_of.end() ? kNaN : it->second;
    };

    if (strict) {
        std::vector<std::vector<int>> required{tuple({})};
        for (int j = 0; j < nsub; ++j) {
            if (dims[static_cast<std::size_t>(j)] >= 2) required.push_back(tuple({{j, 1}}));
            if (dims[static_cast<std::size_t>(j)] >= 3) required.push_back(tuple({{j, 2}}));
            for (int l = j + 1; l < nsub; ++l) required.push_back(tuple({{j, 1}, {l, 1}}));
        }
        std::vector<std::string> missing;
        for (const auto& t : required)
            if (std::isnan(energy(t))) missing.push_back(fmt::format("({})", fmt::join(t, ",")));
        if (!missing.empty())
            throw Error(ErrorKind::DispersiveBreakdown,
                        fmt::format("no dressed state labeled {}", fmt::join(missing, " ")), "labels");
    }

    DispersiveCoefficients c;
    c.subsystems = nsub;
    c.levels = levels;
    c.lamb.assign(static_cast<std::size_t>(nsub * levels), kNaN);
    c.chi.assign(static_cast<std::size_t>(nsub * nsub * levels * levels), kNaN);
    c.kerr.assign(static_cast<std::size_t>(nsub * nsub), kNaN);

    const double e0 = energy(tuple({}));
    for (int j = 0; j < nsub; ++j) {
        const auto& eps = bare[static_cast<std::size_t>(j)].evals;
        for (int k = 0; k < dims[static_cast<std::size_t>(j)]; ++k)
            c.lamb[static_cast<std::size_t>(j * levels + k)] = energy(tuple({{j, k}})) - e0 - (eps(k) - eps(0));
        for (int l = 0; l < nsub; ++l) {
            if (l == j) continue;
            for (int a = 0; a < dims[static_cast<std::size_t>(j)]; ++a)
                for (int b = 0; b < dims[static_cast<std::size_t>(l)]; ++b)
                    c.chi[static_cast<std::size_t>(((j * nsub + l) * levels + a) * levels + b)] =
                        energy(tuple({{j, a}, {l, b}})) - energy(tuple({{j, a}})) - energy(tuple({{l, b}})) + e0;
            c.kerr[static_cast<std::size_t>(j * nsub + l)] = c.chi_at(j, l, 1, 1);
        }
        c.kerr[static_cast<std::size_t>(j * nsub + j)] =
            energy(tuple({{j, 2}})) - 2.0 * energy(tuple({{j, 1}})) + e0;
    }
    return c;
}

}  // namespace qspec
