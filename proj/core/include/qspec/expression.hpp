#pragma once

#include "qspec/linalg.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>

namespace qspec {

/// Closed operator-expression language for interaction terms.
///
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | atom
///   atom   := number | identifier | identifier '(' expr ')' | '(' expr ')'
///
/// Functions: cos, sin, exp, dag. Operator products keep their written order.
class Expression {
public:
    using Value = std::variant<cplx, CMatrix>;

    /// Identifiers must appear in `operators` or `scalars`. Throws SyntaxError
    /// (with character position), UnboundIdentifier or TypeError.
    static Expression parse(std::string_view source, const std::set<std::string>& operators,
                            const std::map<std::string, cplx>& scalars);

    bool is_operator() const noexcept;
    const std::string& source() const noexcept { return source_; }

    /// `operators` must hold a square matrix of dimension `dim` for every
    /// operator identifier. cos/sin/exp of an operator require it to be Hermitian.
    Value evaluate(const std::map<std::string, CMatrix>& operators, Eigen::Index dim) const;

    struct Node;

private:
    std::string source_;
    std::shared_ptr<const Node> root_;
};

}  // namespace qspec
