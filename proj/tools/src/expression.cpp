#include "invset/cli/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string_view>
#include <tuple>
#include <vector>

namespace invset::cli {

struct Expression::Node {
    enum class Kind { Number, X, Eta, VectorX, VectorEta, Neg, Add, Sub, Mul, Div, Pow, Call };
    Kind kind = Kind::Number;
    double value = 0.0;
    int index = 0;
    std::string function;
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Kind kind, std::vector<NodePtr> args = {}) {
    auto node = std::make_shared<Node>();
    node->kind = kind;
    node->args = std::move(args);
    return node;
}

struct FunctionInfo {
    std::string_view name;
    int arity;
    bool vector_argument;
};

constexpr FunctionInfo kFunctions[] = {
    {"sin", 1, false},  {"cos", 1, false},  {"tan", 1, false}, {"exp", 1, false},
    {"log", 1, false},  {"sqrt", 1, false}, {"abs", 1, false}, {"min", 2, false},
    {"max", 2, false},  {"pow", 2, false},  {"norm", 1, true}, {"normsq", 1, true},
};

const FunctionInfo* find_function(std::string_view name) {
    for (const auto& f : kFunctions) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

class Parser {
public:
    Parser(const std::string& text, const ExpressionScope& scope) : s_(text), scope_(scope) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) throw ExpressionError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
        return e;
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            throw ExpressionError(std::string("expected '") + c + "'", pos_);
        }
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (true) {
            if (accept('+')) {
                lhs = make(Node::Kind::Add, {lhs, term()});
            } else if (accept('-')) {
                lhs = make(Node::Kind::Sub, {lhs, term()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        while (true) {
            if (accept('*')) {
                lhs = make(Node::Kind::Mul, {lhs, unary()});
            } else if (accept('/')) {
                lhs = make(Node::Kind::Div, {lhs, unary()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Node::Kind::Neg, {unary()});
        if (accept('+')) return unary();
        NodePtr base = primary(false);
        if (accept('^')) return make(Node::Kind::Pow, {base, unary()});
        return base;
    }

    NodePtr primary(bool vector_context) {
        skip();
        if (pos_ >= s_.size()) throw ExpressionError("unexpected end of expression", pos_);
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier(vector_context);
        if (accept('(')) {
            NodePtr e = expr();
            expect(')');
            return e;
        }
        throw ExpressionError("unexpected '" + std::string(1, c) + "'", pos_);
    }

    NodePtr number() {
        const std::size_t start = pos_;
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) throw ExpressionError("malformed number", start);
        pos_ += static_cast<std::size_t>(end - begin);
        auto node = std::make_shared<Node>();
        node->kind = Node::Kind::Number;
        node->value = v;
        return node;
    }

    NodePtr identifier(bool vector_context) {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string name = s_.substr(start, pos_ - start);

        if (const FunctionInfo* f = find_function(name)) {
            skip();
            if (pos_ >= s_.size() || s_[pos_] != '(') throw ExpressionError("function '" + name + "' needs arguments", pos_);
            ++pos_;
            auto node = std::make_shared<Node>();
            node->kind = Node::Kind::Call;
            node->function = name;
            for (int a = 0; a < f->arity; ++a) {
                if (a > 0) expect(',');
                node->args.push_back(f->vector_argument ? primary(true) : expr());
                if (f->vector_argument) {
                    const auto kind = node->args.back()->kind;
                    if (kind != Node::Kind::VectorX && kind != Node::Kind::VectorEta) {
                        throw ExpressionError("'" + name + "' takes the vector x or eta", start);
                    }
                }
            }
            expect(')');
            return node;
        }
        if (name == "x" || name == "eta") {
            if (!vector_context) throw ExpressionError("vector '" + name + "' is only allowed inside norm/normsq", start);
            if (name == "eta" && scope_.eta_count == 0) throw ExpressionError("eta is not available here", start);
            return make(name == "x" ? Node::Kind::VectorX : Node::Kind::VectorEta);
        }
        for (const auto& [prefix, kind, limit] : {std::tuple{std::string("eta"), Node::Kind::Eta, scope_.eta_count},
                                                  std::tuple{std::string("x"), Node::Kind::X, scope_.n}}) {
            if (name.size() > prefix.size() && name.compare(0, prefix.size(), prefix) == 0) {
                const std::string digits = name.substr(prefix.size());
                if (digits.find_first_not_of("0123456789") != std::string::npos) break;
                const int index = digits.size() > 6 ? -1 : std::stoi(digits);
                if (index < 1 || index > limit) {
                    throw ExpressionError("variable '" + name + "' is out of range (1.." + std::to_string(limit) + ")", start);
                }
                auto node = std::make_shared<Node>();
                node->kind = kind;
                node->index = index - 1;
                return node;
            }
        }
        throw ExpressionError("unknown identifier '" + name + "'", start);
    }

    const std::string& s_;
    ExpressionScope scope_;
    std::size_t pos_ = 0;
};

double eval_node(const Node& node, const Vector& x, const Vector& eta) {
    const auto arg = [&](std::size_t i) { return eval_node(*node.args[i], x, eta); };
    switch (node.kind) {
        case Node::Kind::Number: return node.value;
        case Node::Kind::X:
            if (node.index >= x.size()) throw InvalidArgument("x has too few entries for the expression");
            return x(node.index);
        case Node::Kind::Eta:
            if (node.index >= eta.size()) throw InvalidArgument("eta has too few entries for the expression");
            return eta(node.index);
        case Node::Kind::VectorX:
        case Node::Kind::VectorEta: throw InvalidArgument("vector used as a scalar");
        case Node::Kind::Neg: return -arg(0);
        case Node::Kind::Add: return arg(0) + arg(1);
        case Node::Kind::Sub: return arg(0) - arg(1);
        case Node::Kind::Mul: return arg(0) * arg(1);
        case Node::Kind::Div: return arg(0) / arg(1);
        case Node::Kind::Pow: return std::pow(arg(0), arg(1));
        case Node::Kind::Call: break;
    }
    const std::string& f = node.function;
    if (f == "norm" || f == "normsq") {
        const Vector& v = node.args[0]->kind == Node::Kind::VectorX ? x : eta;
        return f == "norm" ? v.norm() : v.squaredNorm();
    }
    if (f == "sin") return std::sin(arg(0));
    if (f == "cos") return std::cos(arg(0));
    if (f == "tan") return std::tan(arg(0));
    if (f == "exp") return std::exp(arg(0));
    if (f == "log") return std::log(arg(0));
    if (f == "sqrt") return std::sqrt(arg(0));
    if (f == "abs") return std::abs(arg(0));
    if (f == "min") return std::min(arg(0), arg(1));
    if (f == "max") return std::max(arg(0), arg(1));
    return std::pow(arg(0), arg(1));
}

bool any_of_kind(const Node& node, bool (*pred)(Node::Kind)) {
    if (pred(node.kind)) return true;
    for (const auto& a : node.args) {
        if (any_of_kind(*a, pred)) return true;
    }
    return false;
}

}  // namespace

Expression::Expression(const std::string& text, const ExpressionScope& scope)
    : text_(text), root_(Parser(text_, scope).parse()) {}

Expression::~Expression() = default;
Expression::Expression(const Expression&) = default;
Expression& Expression::operator=(const Expression&) = default;
Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(Expression&&) noexcept = default;

double Expression::eval(const Vector& x, const Vector& eta) const { return eval_node(*root_, x, eta); }

bool Expression::is_constant() const {
    return !any_of_kind(*root_, [](Node::Kind k) {
        return k == Node::Kind::X || k == Node::Kind::Eta || k == Node::Kind::VectorX || k == Node::Kind::VectorEta;
    });
}

bool Expression::uses_eta() const {
    return any_of_kind(*root_, [](Node::Kind k) { return k == Node::Kind::Eta || k == Node::Kind::VectorEta; });
}

double evaluate_expression(const std::string& text, const Vector& x, const Vector& eta) {
    const ExpressionScope scope{static_cast<int>(x.size()), static_cast<int>(eta.size())};
    return Expression(text, scope).eval(x, eta);
}

}  // namespace invset::cli
