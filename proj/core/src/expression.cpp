#include "qspec/expression.hpp"

#include "qspec/error.hpp"

#include <fmt/format.h>

#include <cctype>
#include <cstdlib>
#include <vector>

namespace qspec {

struct Expression::Node {
    enum class Kind { Number, Scalar, Operator, Neg, Add, Sub, Mul, Div, Call };
    Kind kind = Kind::Number;
    bool is_op = false;
    cplx number{};
    std::string name;  // identifier or function
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

struct Token {
    enum class Type { Number, Ident, Symbol, End };
    Type type = Type::End;
    std::string text;
    double number = 0.0;
    std::size_t pos = 0;
};

Error syntax_error(std::size_t pos, const std::string& what) {
    return Error(ErrorKind::SyntaxError, fmt::format("syntax error at position {}: {}", pos, what),
                 fmt::format("{}", pos));
}

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token t;
        t.pos = i;
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            const std::string rest(s.substr(i));
            char* end = nullptr;
            t.number = std::strtod(rest.c_str(), &end);
            const auto len = static_cast<std::size_t>(end - rest.c_str());
            t.type = Token::Type::Number;
            t.text = rest.substr(0, len);
            i += len;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            t.type = Token::Type::Ident;
            t.text = std::string(s.substr(i, j - i));
            i = j;
        } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '(' || c == ')') {
            t.type = Token::Type::Symbol;
            t.text = std::string(1, c);
            ++i;
        } else {
            throw syntax_error(i, fmt::format("unexpected character '{}'", c));
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.pos = s.size();
    out.push_back(end);
    return out;
}

bool is_function(const std::string& name) {
    return name == "cos" || name == "sin" || name == "exp" || name == "dag";
}

class Parser {
public:
    Parser(std::vector<Token> tokens, const std::set<std::string>& ops, const std::map<std::string, cplx>& scalars)
        : tokens_(std::move(tokens)), ops_(ops), scalars_(scalars) {}

    NodePtr parse() {
        NodePtr root = expr();
        if (peek().type != Token::Type::End) throw syntax_error(peek().pos, fmt::format("unexpected '{}'", peek().text));
        return root;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    bool at_symbol(char c) const { return peek().type == Token::Type::Symbol && peek().text[0] == c; }
    const Token& take() { return tokens_[pos_++]; }

    static NodePtr binary(Kind kind, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Expression::Node>();
        n->kind = kind;
        n->is_op = a->is_op || b->is_op;
        n->args = {std::move(a), std::move(b)};
        return n;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (at_symbol('+') || at_symbol('-')) {
            const Kind k = take().text[0] == '+' ? Kind::Add : Kind::Sub;
            lhs = binary(k, lhs, term());
        }
        return lhs;
    }

    NodePtr term() {
        NodePtr lhs = unary();
        while (at_symbol('*') || at_symbol('/')) {
            const Token& op = take();
            const Kind k = op.text[0] == '*' ? Kind::Mul : Kind::Div;
            NodePtr rhs = unary();
            if (k == Kind::Div && rhs->is_op)
                throw Error(ErrorKind::TypeError,
                            fmt::format("type error at position {}: operator in denominator", op.pos), "expr");
            lhs = binary(k, lhs, rhs);
        }
        return lhs;
    }

    NodePtr unary() {
        if (at_symbol('-')) {
            take();
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::Neg;
            n->args = {unary()};
            n->is_op = n->args[0]->is_op;
            return n;
        }
        return atom();
    }

    NodePtr atom() {
        const Token& t = peek();
        if (t.type == Token::Type::Number) {
            take();
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::Number;
            n->number = t.number;
            return n;
        }
        if (at_symbol('(')) {
            take();
            NodePtr inner = expr();
            if (!at_symbol(')')) throw syntax_error(peek().pos, "expected ')'");
            take();
            return inner;
        }
        if (t.type == Token::Type::Ident) {
            take();
            if (at_symbol('(')) {
                if (!is_function(t.text))
                    throw Error(ErrorKind::UnboundIdentifier, fmt::format("unknown function '{}'", t.text), t.text);
                take();
                auto n = std::make_shared<Expression::Node>();
                n->kind = Kind::Call;
                n->name = t.text;
                n->args = {expr()};
                n->is_op = n->args[0]->is_op;
                if (!at_symbol(')')) throw syntax_error(peek().pos, "expected ')'");
                take();
                return n;
            }
            auto n = std::make_shared<Expression::Node>();
            n->name = t.text;
            if (ops_.count(t.text)) {
                n->kind = Kind::Operator;
                n->is_op = true;
            } else if (auto it = scalars_.find(t.text); it != scalars_.end()) {
                n->kind = Kind::Number;
                n->number = it->second;
            } else {
                throw Error(ErrorKind::UnboundIdentifier, fmt::format("unbound identifier '{}'", t.text), t.text);
            }
            return n;
        }
        if (t.type == Token::Type::End) throw syntax_error(t.pos, "unexpected end of expression");
        throw syntax_error(t.pos, fmt::format("unexpected '{}'", t.text));
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    const std::set<std::string>& ops_;
    const std::map<std::string, cplx>& scalars_;
};

using Value = Expression::Value;

CMatrix as_matrix(const Value& v, Eigen::Index dim) {
    if (const auto* m = std::get_if<CMatrix>(&v)) return *m;
    return std::get<cplx>(v) * CMatrix::Identity(dim, dim);
}

Value apply_function(const std::string& name, const Value& arg) {
    if (const auto* s = std::get_if<cplx>(&arg)) {
        if (name == "cos") return std::cos(*s);
        if (name == "sin") return std::sin(*s);
        if (name == "exp") return std::exp(*s);
        return std::conj(*s);
    }
    const CMatrix& m = std::get<CMatrix>(arg);
    if (name == "dag") return CMatrix(m.adjoint());
    if (!is_hermitian(m))
        throw Error(ErrorKind::HermiticityViolation, fmt::format("{}() needs a Hermitian operator argument", name),
                    "expr");
    if (name == "cos") return hermitian_matrix_function(m, [](double x) { return cplx(std::cos(x), 0.0); });
    if (name == "sin") return hermitian_matrix_function(m, [](double x) { return cplx(std::sin(x), 0.0); });
    return hermitian_matrix_function(m, [](double x) { return cplx(std::exp(x), 0.0); });
}

Value eval(const Expression::Node& n, const std::map<std::string, CMatrix>& ops, Eigen::Index dim) {
    switch (n.kind) {
    case Kind::Number: return n.number;
    case Kind::Scalar: return n.number;
    case Kind::Operator: {
        auto it = ops.find(n.name);
        if (it == ops.end())
            throw Error(ErrorKind::UnboundIdentifier, fmt::format("no matrix bound to '{}'", n.name), n.name);
        if (it->second.rows() != dim || it->second.cols() != dim)
            throw Error(ErrorKind::DimensionMismatch, fmt::format("operator '{}' has wrong dimension", n.name), n.name);
        return it->second;
    }
    case Kind::Neg: {
        Value v = eval(*n.args[0], ops, dim);
        if (auto* s = std::get_if<cplx>(&v)) return -*s;
        return CMatrix(-std::get<CMatrix>(v));
    }
    case Kind::Call: return apply_function(n.name, eval(*n.args[0], ops, dim));
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
    case Kind::Div: break;
    }
    const Value a = eval(*n.args[0], ops, dim);
    const Value b = eval(*n.args[1], ops, dim);
    const auto* sa = std::get_if<cplx>(&a);
    const auto* sb = std::get_if<cplx>(&b);
    if (sa && sb) {
        switch (n.kind) {
        case Kind::Add: return *sa + *sb;
        case Kind::Sub: return *sa - *sb;
        case Kind::Mul: return *sa * *sb;
        default: return *sa / *sb;
        }
    }
    switch (n.kind) {
    case Kind::Add: return CMatrix(as_matrix(a, dim) + as_matrix(b, dim));
    case Kind::Sub: return CMatrix(as_matrix(a, dim) - as_matrix(b, dim));
    case Kind::Mul:
        if (sa) return CMatrix(*sa * std::get<CMatrix>(b));
        if (sb) return CMatrix(std::get<CMatrix>(a) * *sb);
        return CMatrix(std::get<CMatrix>(a) * std::get<CMatrix>(b));
    default: return CMatrix(std::get<CMatrix>(a) / *sb);
    }
}

}  // namespace

Expression Expression::parse(std::string_view source, const std::set<std::string>& operators,
                             const std::map<std::string, cplx>& scalars) {
    for (const auto& name : operators)
        if (scalars.count(name))
            throw Error(ErrorKind::NameCollision, fmt::format("'{}' bound as both operator and scalar", name), name);
    Parser parser(tokenize(source), operators, scalars);
    Expression e;
    e.source_ = std::string(source);
    e.root_ = parser.parse();
    return e;
}

bool Expression::is_operator() const noexcept { return root_ && root_->is_op; }

Expression::Value Expression::evaluate(const std::map<std::string, CMatrix>& operators, Eigen::Index dim) const {
    if (!root_) throw Error(ErrorKind::SyntaxError, "empty expression", "expr");
    return eval(*root_, operators, dim);
}

}  // namespace qspec
