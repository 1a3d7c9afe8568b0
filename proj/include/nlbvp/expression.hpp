#ifndef NLBVP_EXPRESSION_HPP
#define NLBVP_EXPRESSION_HPP

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nlbvp {

/// Arithmetic expression over named variables.
///
/// Grammar: + - * / ^ (right-associative), unary minus, parentheses, numbers,
/// the constants pi and e, and the functions sin cos tan exp log sqrt abs.
class Expression {
public:
    /// Throws ParseError on malformed input or unknown identifiers.
    Expression(std::string_view text, std::vector<std::string> variables);

    double operator()(std::span<const double> values) const;

    const std::string& text() const noexcept { return text_; }

    struct Node;

private:
    std::string text_;
    std::vector<std::string> variables_;
    std::shared_ptr<const Node> root_;
};

/// Variable names x1..xd followed by the aliases x, y, z of the first three
/// coordinates.
std::vector<std::string> coordinate_variables(std::size_t dimension);

/// Variable names x1..xd, y1..yd and r = |x - y|, in that order.
std::vector<std::string> density_variables(std::size_t dimension);

} // namespace nlbvp

#endif
