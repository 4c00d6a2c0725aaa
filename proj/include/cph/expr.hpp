#ifndef CPH_EXPR_HPP
#define CPH_EXPR_HPP

#include <memory>
#include <string>
#include <string_view>

namespace cph {

enum class NodeKind { Number, Pi, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };
enum class Func { Sin, Cos, Exp, Ln, Sqrt, Tanh };

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    NodeKind kind = NodeKind::Number;
    double number = 0.0;  // Number only; always >= 0 when produced by the parser
    Func func = Func::Sin;
    NodePtr lhs;  // operand of Negate/Call, left of binary
    NodePtr rhs;
};

// Immutable expression in a single free variable.
class Expr {
public:
    Expr() = default;
    Expr(NodePtr root, std::string var) : root_(std::move(root)), var_(std::move(var)) {}

    const NodePtr& root() const { return root_; }
    const std::string& var() const { return var_; }
    bool empty() const { return !root_; }

    // Throws DomainError when the result is not finite.
    double eval(double value) const;
    Expr derivative() const;
    std::string str() const;
    bool depends_on_var() const;

private:
    NodePtr root_;
    std::string var_;
};

// line/col are reported relative to the caller-supplied origin.
Expr parse_expr(std::string_view text, const std::string& allowed_var, int line = 1, int col0 = 1);

double eval_expr(const Expr& e, double value);
Expr diff_expr(const Expr& e);
std::string print_expr(const Expr& e);
bool structurally_equal(const NodePtr& a, const NodePtr& b);

// Raw node builders (no folding); the derivative applies its own folding.
NodePtr make_number(double v);
NodePtr make_pi();
NodePtr make_var();
NodePtr make_neg(NodePtr a);
NodePtr make_binary(NodeKind op, NodePtr a, NodePtr b);
NodePtr make_call(Func f, NodePtr a);

const char* func_name(Func f);

}  // namespace cph

#endif
