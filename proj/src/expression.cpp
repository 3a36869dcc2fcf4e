#include "stokolmo/expression.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace stokolmo {

ExpressionSyntaxError::ExpressionSyntaxError(std::size_t offset, const std::string& message)
    : std::runtime_error("expression syntax error at byte " + std::to_string(offset) + ": " + message),
      offset_(offset) {}

DomainError::DomainError(std::string subexpression, const std::string& message)
    : std::runtime_error(message + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}

namespace {

ExprPtr make_number(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Number;
    n->value = v;
    return n;
}

ExprPtr make_variable(int i) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Variable;
    n->variable = i;
    return n;
}

ExprPtr make_unary(UnaryOp op, ExprPtr operand) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Unary;
    n->unary = op;
    n->lhs = std::move(operand);
    return n;
}

ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Binary;
    n->binary = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

// Recursive-descent parser.
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'x' digits | func '(' expr ')' | '(' expr ')'
class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ExprPtr parse() {
        auto e = expr();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ExpressionSyntaxError(pos_, msg); }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    ExprPtr expr() {
        auto lhs = term();
        for (;;) {
            if (accept('+')) lhs = make_binary(BinaryOp::Add, lhs, term());
            else if (accept('-')) lhs = make_binary(BinaryOp::Sub, lhs, term());
            else return lhs;
        }
    }

    ExprPtr term() {
        auto lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make_binary(BinaryOp::Mul, lhs, unary());
            else if (accept('/')) lhs = make_binary(BinaryOp::Div, lhs, unary());
            else return lhs;
        }
    }

    ExprPtr unary() {
        if (accept('-')) return make_unary(UnaryOp::Negate, unary());
        if (accept('+')) return unary();
        return power();
    }

    ExprPtr power() {
        auto base = primary();
        if (accept('^')) return make_binary(BinaryOp::Pow, base, unary());
        return base;
    }

    ExprPtr primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    ExprPtr number() {
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc()) fail("malformed number");
        pos_ += static_cast<std::size_t>(ptr - first);
        return make_number(v);
    }

    ExprPtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name.size() > 1 && name[0] == 'x' &&
            std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            int index = 0;
            std::from_chars(name.data() + 1, name.data() + name.size(), index);
            if (index < 1) {
                pos_ = start;
                fail("variable indices start at x1");
            }
            return make_variable(index - 1);
        }
        UnaryOp op;
        if (name == "exp") op = UnaryOp::Exp;
        else if (name == "ln") op = UnaryOp::Ln;
        else if (name == "sqrt") op = UnaryOp::Sqrt;
        else {
            pos_ = start;
            fail("unknown identifier '" + std::string(name) + "'");
        }
        if (!accept('(')) fail("expected '(' after " + std::string(name));
        auto arg = expr();
        if (!accept(')')) fail("expected ')'");
        return make_unary(op, arg);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (v < 0 || (v == 0 && std::signbit(v))) return "(" + s + ")";
    return s;
}

ExprPtr remap(const ExprPtr& node, std::span<const int> mapping) {
    switch (node->kind) {
    case ExprNode::Kind::Number:
        return node;
    case ExprNode::Kind::Variable: {
        const int i = node->variable;
        const int target = i < static_cast<int>(mapping.size()) ? mapping[i] : -1;
        return target < 0 ? make_number(0.0) : make_variable(target);
    }
    case ExprNode::Kind::Unary:
        return make_unary(node->unary, remap(node->lhs, mapping));
    case ExprNode::Kind::Binary:
        return make_binary(node->binary, remap(node->lhs, mapping), remap(node->rhs, mapping));
    }
    return node;
}

}  // namespace

std::string to_string(const ExprNode& node) {
    switch (node.kind) {
    case ExprNode::Kind::Number:
        return format_number(node.value);
    case ExprNode::Kind::Variable:
        return "x" + std::to_string(node.variable + 1);
    case ExprNode::Kind::Unary: {
        const std::string arg = to_string(*node.lhs);
        switch (node.unary) {
        case UnaryOp::Negate: return "(-" + arg + ")";
        case UnaryOp::Exp: return "exp(" + arg + ")";
        case UnaryOp::Ln: return "ln(" + arg + ")";
        case UnaryOp::Sqrt: return "sqrt(" + arg + ")";
        }
        break;
    }
    case ExprNode::Kind::Binary: {
        static constexpr std::array<const char*, 5> symbols{" + ", " - ", " * ", " / ", " ^ "};
        return "(" + to_string(*node.lhs) + symbols[static_cast<int>(node.binary)] + to_string(*node.rhs) + ")";
    }
    }
    return {};
}

Expression::Expression() : Expression(make_number(0.0)) {}

Expression::Expression(ExprPtr root) : root_(std::move(root)) { compile(); }

Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse()); }

Expression Expression::constant(double value) { return Expression(make_number(value)); }

Expression Expression::variable(int index) { return Expression(make_variable(index)); }

std::string Expression::to_string() const { return stokolmo::to_string(*root_); }

Expression Expression::remap_variables(std::span<const int> mapping) const {
    return Expression(remap(root_, mapping));
}

void Expression::compile() {
    program_.clear();
    arity_ = 0;
    std::size_t depth = 0;
    max_depth_ = 0;
    auto emit = [&](auto&& self, const ExprNode* node) -> void {
        using Op = Instr::Op;
        switch (node->kind) {
        case ExprNode::Kind::Number:
            program_.push_back({Op::Push, node->value, 0, node});
            max_depth_ = std::max(max_depth_, ++depth);
            return;
        case ExprNode::Kind::Variable:
            program_.push_back({Op::Load, 0.0, node->variable, node});
            arity_ = std::max(arity_, node->variable + 1);
            max_depth_ = std::max(max_depth_, ++depth);
            return;
        case ExprNode::Kind::Unary: {
            self(self, node->lhs.get());
            static constexpr std::array<Op, 4> ops{Op::Neg, Op::Exp, Op::Ln, Op::Sqrt};
            program_.push_back({ops[static_cast<int>(node->unary)], 0.0, 0, node});
            return;
        }
        case ExprNode::Kind::Binary: {
            self(self, node->lhs.get());
            self(self, node->rhs.get());
            static constexpr std::array<Op, 5> ops{Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Pow};
            program_.push_back({ops[static_cast<int>(node->binary)], 0.0, 0, node});
            --depth;
            return;
        }
        }
    };
    emit(emit, root_.get());
}

double Expression::evaluate(std::span<const double> x) const {
    constexpr std::size_t kInline = 32;
    std::array<double, kInline> inline_stack;
    std::vector<double> heap_stack;
    double* stack = inline_stack.data();
    if (max_depth_ > kInline) {
        heap_stack.resize(max_depth_);
        stack = heap_stack.data();
    }
    std::size_t top = 0;
    using Op = Instr::Op;
    for (const Instr& ins : program_) {
        switch (ins.op) {
        case Op::Push:
            stack[top++] = ins.value;
            break;
        case Op::Load:
            if (static_cast<std::size_t>(ins.variable) >= x.size())
                throw DomainError(stokolmo::to_string(*ins.node), "variable out of range");
            stack[top++] = x[ins.variable];
            break;
        case Op::Neg:
            stack[top - 1] = -stack[top - 1];
            break;
        case Op::Exp:
            stack[top - 1] = std::exp(stack[top - 1]);
            if (!std::isfinite(stack[top - 1])) throw DomainError(stokolmo::to_string(*ins.node), "overflow");
            break;
        case Op::Ln:
            if (!(stack[top - 1] > 0.0))
                throw DomainError(stokolmo::to_string(*ins.node), "logarithm of a non-positive number");
            stack[top - 1] = std::log(stack[top - 1]);
            break;
        case Op::Sqrt:
            if (stack[top - 1] < 0.0)
                throw DomainError(stokolmo::to_string(*ins.node), "square root of a negative number");
            stack[top - 1] = std::sqrt(stack[top - 1]);
            break;
        case Op::Add:
            --top;
            stack[top - 1] += stack[top];
            break;
        case Op::Sub:
            --top;
            stack[top - 1] -= stack[top];
            break;
        case Op::Mul:
            --top;
            stack[top - 1] *= stack[top];
            break;
        case Op::Div:
            --top;
            if (stack[top] == 0.0) throw DomainError(stokolmo::to_string(*ins.node), "division by zero");
            stack[top - 1] /= stack[top];
            break;
        case Op::Pow:
            --top;
            stack[top - 1] = std::pow(stack[top - 1], stack[top]);
            if (!std::isfinite(stack[top - 1]))
                throw DomainError(stokolmo::to_string(*ins.node), "power outside its domain");
            break;
        }
    }
    const double result = stack[0];
    if (!std::isfinite(result)) throw DomainError(to_string(), "non-finite result");
    return result;
}

}  // namespace stokolmo
