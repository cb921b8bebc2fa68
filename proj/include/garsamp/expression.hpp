#pragma once

#include <memory>
#include <string>

#include "garsamp/model.hpp"

namespace garsamp {

// Parsed scalar expression in the variable x. Grammar: numbers, x, + - * /,
// unary -, ^ with a numeric exponent, exp log cosh sinh sqrt abs, parentheses.
class Expression {
public:
    struct Node;

    double operator()(double x) const;
    // Value with first and second derivative (forward-mode, nested duals).
    Jet jet(double x) const;
    const std::string& text() const { return text_; }

    JetFn as_jet_fn() const;

private:
    friend Expression parse_expression(const std::string& text);
    Expression(std::shared_ptr<const Node> root, std::string text)
        : root_(std::move(root)), text_(std::move(text)) {}

    std::shared_ptr<const Node> root_;
    std::string text_;
};

// Throws ParseError with the offending offset.
Expression parse_expression(const std::string& text);

}  // namespace garsamp
