#pragma once

#include "invset/errors.hpp"
#include "invset/linalg.hpp"

#include <cstddef>
#include <memory>
#include <string>

namespace invset::cli {

/// Parse error carrying the zero-based character offset of the offending token.
class ExpressionError : public InvalidArgument {
public:
    ExpressionError(const std::string& message, std::size_t position)
        : InvalidArgument(message + " at position " + std::to_string(position)), position_(position) {}

    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Variables an expression may reference: x1..x{n} and eta1..eta{eta_count}.
/// The vectors `x` and `eta` are accepted as arguments of norm and normsq.
struct ExpressionScope {
    int n = 0;
    int eta_count = 0;
};

/// Small arithmetic language for coefficient and boundary tables.
///
/// Grammar: numbers, + - * / ^ (right associative), parentheses, variables of the
/// scope, and the functions sin cos tan exp log sqrt abs min max pow norm normsq.
class Expression {
public:
    Expression(const std::string& text, const ExpressionScope& scope);
    ~Expression();
    Expression(const Expression&);
    Expression& operator=(const Expression&);
    Expression(Expression&&) noexcept;
    Expression& operator=(Expression&&) noexcept;

    [[nodiscard]] double eval(const Vector& x, const Vector& eta = Vector()) const;
    /// True when no variable occurs.
    [[nodiscard]] bool is_constant() const;
    [[nodiscard]] bool uses_eta() const;
    [[nodiscard]] const std::string& text() const noexcept { return text_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

/// Parses and evaluates in one step.
[[nodiscard]] double evaluate_expression(const std::string& text, const Vector& x, const Vector& eta = Vector());

}  // namespace invset::cli
