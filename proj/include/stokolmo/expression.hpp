#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stokolmo {

/// Raised by the expression parser; offset is a byte offset into the source text.
class ExpressionSyntaxError : public std::runtime_error {
public:
    ExpressionSyntaxError(std::size_t offset, const std::string& message);
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Raised when evaluation leaves the domain of an operation (x/0, ln of a
/// non-positive number, sqrt of a negative number, non-finite results).
class DomainError : public std::runtime_error {
public:
    DomainError(std::string subexpression, const std::string& message);
    const std::string& subexpression() const noexcept { return subexpression_; }

private:
    std::string subexpression_;
};

enum class UnaryOp { Negate, Exp, Ln, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { Number, Variable, Unary, Binary } kind;
    double value = 0.0;   // Number
    int variable = 0;     // Variable, zero-based
    UnaryOp unary = UnaryOp::Negate;
    BinaryOp binary = BinaryOp::Add;
    ExprPtr lhs;          // Unary operand or Binary left
    ExprPtr rhs;          // Binary right
};

/// Immutable arithmetic expression over variables x1..xn.
///
/// Construction compiles the tree into a flat postfix program so the
/// evaluator used inside the integrator does not chase pointers.
class Expression {
public:
    Expression();  // the constant 0
    explicit Expression(ExprPtr root);

    static Expression parse(std::string_view text);
    static Expression constant(double value);
    static Expression variable(int index);

    double evaluate(std::span<const double> x) const;

    /// Fully parenthesised source text; parse(to_string()) evaluates identically.
    std::string to_string() const;

    /// Largest variable index referenced plus one (0 for constants).
    int arity() const noexcept { return arity_; }

    /// Replace each variable i by remap[i] (a new index) or, when remap[i] < 0,
    /// by the constant 0.
    Expression remap_variables(std::span<const int> remap) const;

    const ExprPtr& root() const noexcept { return root_; }

private:
    struct Instr {
        enum class Op : unsigned char { Push, Load, Neg, Exp, Ln, Sqrt, Add, Sub, Mul, Div, Pow } op;
        double value;
        int variable;
        const ExprNode* node;
    };

    void compile();

    ExprPtr root_;
    std::vector<Instr> program_;
    std::size_t max_depth_ = 0;
    int arity_ = 0;
};

std::string to_string(const ExprNode& node);

}  // namespace stokolmo
