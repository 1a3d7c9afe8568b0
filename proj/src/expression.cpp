#include "nlbvp/expression.hpp"

#include "nlbvp/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace nlbvp {

struct Expression::Node {
    enum class Kind { Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Call } kind;
    double value = 0.0;
    std::size_t variable = 0;
    double (*function)(double) = nullptr;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

struct FunctionEntry {
    const char* name;
    double (*fn)(double);
};

constexpr FunctionEntry kFunctions[] = {
    {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
    {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
    {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
    {"abs", [](double v) { return std::abs(v); }},
};

class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& variables) : text_(text), variables_(variables) {}

    NodePtr parse()
    {
        auto node = sum();
        skip();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return node;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        raise(ErrorCode::ParseError,
              "expression '" + std::string(text_) + "': " + what + " at position " + std::to_string(pos_));
    }

    void skip()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static NodePtr make(Kind kind, NodePtr lhs, NodePtr rhs = nullptr)
    {
        auto node = std::make_shared<Expression::Node>();
        node->kind = kind;
        node->lhs = std::move(lhs);
        node->rhs = std::move(rhs);
        return node;
    }

    NodePtr sum()
    {
        auto node = product();
        while (true) {
            if (accept('+'))
                node = make(Kind::Add, node, product());
            else if (accept('-'))
                node = make(Kind::Sub, node, product());
            else
                return node;
        }
    }

    NodePtr product()
    {
        auto node = unary();
        while (true) {
            if (accept('*'))
                node = make(Kind::Mul, node, unary());
            else if (accept('/'))
                node = make(Kind::Div, node, unary());
            else
                return node;
        }
    }

    NodePtr unary()
    {
        if (accept('-')) return make(Kind::Negate, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power()
    {
        auto base = primary();
        if (accept('^')) return make(Kind::Pow, base, unary());
        return base;
    }

    NodePtr primary()
    {
        skip();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (accept('(')) {
            auto node = sum();
            if (!accept(')')) fail("missing ')'");
            return node;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    NodePtr number()
    {
        double value = 0.0;
        const char* begin = text_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), value);
        if (ec != std::errc()) fail("bad number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        auto node = std::make_shared<Expression::Node>();
        node->kind = Kind::Constant;
        node->value = value;
        return node;
    }

    NodePtr identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string name(text_.substr(start, pos_ - start));
        for (std::size_t i = 0; i < variables_.size(); ++i) {
            if (variables_[i] == name) {
                auto node = std::make_shared<Expression::Node>();
                node->kind = Kind::Variable;
                node->variable = i;
                return node;
            }
        }
        if (name == "pi" || name == "e") {
            auto node = std::make_shared<Expression::Node>();
            node->kind = Kind::Constant;
            node->value = name == "pi" ? std::numbers::pi : std::numbers::e;
            return node;
        }
        for (const auto& f : kFunctions) {
            if (name == f.name) {
                if (!accept('(')) fail("expected '(' after " + name);
                auto node = std::make_shared<Expression::Node>();
                node->kind = Kind::Call;
                node->function = f.fn;
                node->lhs = sum();
                if (!accept(')')) fail("missing ')'");
                return node;
            }
        }
        fail("unknown identifier '" + name + "'");
    }

    std::string_view text_;
    const std::vector<std::string>& variables_;
    std::size_t pos_ = 0;
};

double evaluate(const Expression::Node& node, std::span<const double> values)
{
    switch (node.kind) {
    case Kind::Constant: return node.value;
    case Kind::Variable: return values[node.variable];
    case Kind::Negate: return -evaluate(*node.lhs, values);
    case Kind::Add: return evaluate(*node.lhs, values) + evaluate(*node.rhs, values);
    case Kind::Sub: return evaluate(*node.lhs, values) - evaluate(*node.rhs, values);
    case Kind::Mul: return evaluate(*node.lhs, values) * evaluate(*node.rhs, values);
    case Kind::Div: return evaluate(*node.lhs, values) / evaluate(*node.rhs, values);
    case Kind::Pow: return std::pow(evaluate(*node.lhs, values), evaluate(*node.rhs, values));
    case Kind::Call: return node.function(evaluate(*node.lhs, values));
    }
    return 0.0;
}

} // namespace

Expression::Expression(std::string_view text, std::vector<std::string> variables)
    : text_(text), variables_(std::move(variables))
{
    root_ = Parser(text_, variables_).parse();
}

double Expression::operator()(std::span<const double> values) const
{
    NLBVP_REQUIRE(values.size() == variables_.size(), ErrorCode::DimensionMismatch,
                  "expression expects " + std::to_string(variables_.size()) + " values");
    return evaluate(*root_, values);
}

std::vector<std::string> coordinate_variables(std::size_t dimension)
{
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= dimension; ++i) names.push_back("x" + std::to_string(i));
    const char* short_names[] = {"x", "y", "z"};
    for (std::size_t i = 0; i < dimension && i < 3; ++i) names.emplace_back(short_names[i]);
    return names;
}

std::vector<std::string> density_variables(std::size_t dimension)
{
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= dimension; ++i) names.push_back("x" + std::to_string(i));
    for (std::size_t i = 1; i <= dimension; ++i) names.push_back("y" + std::to_string(i));
    names.emplace_back("r");
    return names;
}

} // namespace nlbvp
