#include "cph/expr.hpp"

#include "cph/error.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace cph {

namespace {

constexpr std::array<const char*, 5> kControlVars = {"t", "q", "phi", "i", "v"};

struct Token {
    enum Type { Number, Ident, Op, End } type = End;
    std::string text;
    double value = 0.0;
    int col = 0;  // 0-based offset into the expression text
};

class Lexer {
public:
    Lexer(std::string_view s, int line, int col0) : s_(s), line_(line), col0_(col0) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        std::size_t p = 0;
        while (true) {
            while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
            Token tok;
            tok.col = static_cast<int>(p);
            if (p == s_.size()) {
                out.push_back(tok);
                return out;
            }
            const char c = s_[p];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const std::size_t start = p;
                while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) ++p;
                if (p < s_.size() && s_[p] == '.') {
                    ++p;
                    while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) ++p;
                }
                if (p < s_.size() && (s_[p] == 'e' || s_[p] == 'E')) {
                    std::size_t q = p + 1;
                    if (q < s_.size() && (s_[q] == '+' || s_[q] == '-')) ++q;
                    if (q < s_.size() && std::isdigit(static_cast<unsigned char>(s_[q]))) {
                        p = q;
                        while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) ++p;
                    }
                }
                tok.type = Token::Number;
                tok.text = std::string(s_.substr(start, p - start));
                if (tok.text == ".") fail(tok.col, "malformed number");
                char* end = nullptr;
                tok.value = std::strtod(tok.text.c_str(), &end);
                if (end != tok.text.c_str() + tok.text.size() || !std::isfinite(tok.value))
                    fail(tok.col, "malformed number '" + tok.text + "'");
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const std::size_t start = p;
                while (p < s_.size() &&
                       (std::isalnum(static_cast<unsigned char>(s_[p])) || s_[p] == '_'))
                    ++p;
                tok.type = Token::Ident;
                tok.text = std::string(s_.substr(start, p - start));
            } else if (std::string_view("+-*/^()").find(c) != std::string_view::npos) {
                tok.type = Token::Op;
                tok.text = std::string(1, c);
                ++p;
            } else {
                fail(tok.col, std::string("unexpected character '") + c + "'");
            }
            out.push_back(tok);
        }
    }

    [[noreturn]] void fail(int col, const std::string& msg) const {
        throw SyntaxError(line_, col0_ + col, msg);
    }

private:
    std::string_view s_;
    int line_;
    int col0_;
};

class Parser {
public:
    Parser(std::vector<Token> toks, const std::string& var, int line, int col0)
        : toks_(std::move(toks)), var_(var), line_(line), col0_(col0) {}

    NodePtr parse() {
        NodePtr e = expr();
        if (peek().type != Token::End) fail(peek(), "unexpected '" + peek().text + "'");
        return e;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    bool is_op(const char* op) const { return peek().type == Token::Op && peek().text == op; }

    [[noreturn]] void fail(const Token& tok, const std::string& msg) const {
        throw SyntaxError(line_, col0_ + tok.col, msg);
    }

    void expect(const char* op) {
        if (!is_op(op)) {
            const std::string got = peek().type == Token::End ? "end of expression" : "'" + peek().text + "'";
            fail(peek(), std::string("expected '") + op + "', got " + got);
        }
        ++pos_;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (is_op("+") || is_op("-")) {
            const NodeKind k = peek().text == "+" ? NodeKind::Add : NodeKind::Sub;
            ++pos_;
            lhs = make_binary(k, lhs, term());
        }
        return lhs;
    }

    NodePtr term() {
        NodePtr lhs = unary();
        while (is_op("*") || is_op("/")) {
            const NodeKind k = peek().text == "*" ? NodeKind::Mul : NodeKind::Div;
            ++pos_;
            lhs = make_binary(k, lhs, unary());
        }
        return lhs;
    }

    NodePtr unary() {
        if (is_op("-")) {
            ++pos_;
            return make_neg(unary());
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (is_op("^")) {
            ++pos_;
            return make_binary(NodeKind::Pow, base, unary());
        }
        return base;
    }

    NodePtr primary() {
        const Token tok = peek();
        if (tok.type == Token::Number) {
            ++pos_;
            return make_number(tok.value);
        }
        if (is_op("(")) {
            ++pos_;
            NodePtr e = expr();
            expect(")");
            return e;
        }
        if (tok.type == Token::Ident) {
            ++pos_;
            static const std::array<std::pair<const char*, Func>, 6> funcs = {{{"sin", Func::Sin},
                                                                              {"cos", Func::Cos},
                                                                              {"exp", Func::Exp},
                                                                              {"ln", Func::Ln},
                                                                              {"sqrt", Func::Sqrt},
                                                                              {"tanh", Func::Tanh}}};
            for (const auto& [name, f] : funcs) {
                if (tok.text == name) {
                    expect("(");
                    NodePtr arg = expr();
                    expect(")");
                    return make_call(f, arg);
                }
            }
            if (tok.text == var_) return make_var();
            if (tok.text == "pi") return make_pi();
            for (const char* v : kControlVars) {
                if (tok.text == v)
                    throw Error(ErrorCode::ForbiddenVariable,
                                "line " + std::to_string(line_) + ", col " + std::to_string(col0_ + tok.col) +
                                    ": variable '" + tok.text + "' not allowed here (expected '" + var_ + "')");
            }
            fail(tok, "unknown identifier '" + tok.text + "'");
        }
        if (tok.type == Token::End) fail(tok, "unexpected end of expression");
        fail(tok, "unexpected '" + tok.text + "'");
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::string var_;
    int line_;
    int col0_;
};

double eval_node(const ExprNode& n, double x) {
    switch (n.kind) {
        case NodeKind::Number: return n.number;
        case NodeKind::Pi: return std::numbers::pi;
        case NodeKind::Variable: return x;
        case NodeKind::Negate: return -eval_node(*n.lhs, x);
        case NodeKind::Add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
        case NodeKind::Sub: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
        case NodeKind::Mul: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
        case NodeKind::Div: return eval_node(*n.lhs, x) / eval_node(*n.rhs, x);
        case NodeKind::Pow: return std::pow(eval_node(*n.lhs, x), eval_node(*n.rhs, x));
        case NodeKind::Call: {
            const double a = eval_node(*n.lhs, x);
            switch (n.func) {
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
                case Func::Exp: return std::exp(a);
                case Func::Ln: return std::log(a);
                case Func::Sqrt: return std::sqrt(a);
                case Func::Tanh: return std::tanh(a);
            }
        }
    }
    return std::nan("");
}

bool has_var(const NodePtr& n) {
    if (!n) return false;
    if (n->kind == NodeKind::Variable) return true;
    return has_var(n->lhs) || has_var(n->rhs);
}

// Literal value of a Number or a negated Number.
bool literal(const NodePtr& n, double& v) {
    if (n->kind == NodeKind::Number) {
        v = n->number;
        return true;
    }
    if (n->kind == NodeKind::Negate && n->lhs->kind == NodeKind::Number) {
        v = -n->lhs->number;
        return true;
    }
    return false;
}

NodePtr lit(double v) { return v < 0.0 ? make_neg(make_number(-v)) : make_number(v); }

NodePtr fneg(const NodePtr& a) {
    double x = 0.0;
    if (literal(a, x)) return lit(-x);
    if (a->kind == NodeKind::Negate) return a->lhs;
    return make_neg(a);
}

NodePtr fold(NodeKind op, const NodePtr& a, const NodePtr& b) {
    double x = 0.0;
    double y = 0.0;
    const bool la = literal(a, x);
    const bool lb = literal(b, y);
    if (la && lb) {
        double r = 0.0;
        switch (op) {
            case NodeKind::Add: r = x + y; break;
            case NodeKind::Sub: r = x - y; break;
            case NodeKind::Mul: r = x * y; break;
            case NodeKind::Div: r = x / y; break;
            case NodeKind::Pow: r = std::pow(x, y); break;
            default: break;
        }
        if (std::isfinite(r)) return lit(r);
    }
    switch (op) {
        case NodeKind::Add:
            if (la && x == 0.0) return b;
            if (lb && y == 0.0) return a;
            break;
        case NodeKind::Sub:
            if (lb && y == 0.0) return a;
            if (la && x == 0.0) return fneg(b);
            break;
        case NodeKind::Mul:
            if ((la && x == 0.0) || (lb && y == 0.0)) return make_number(0.0);
            if (la && x == 1.0) return b;
            if (lb && y == 1.0) return a;
            if (la && x == -1.0) return fneg(b);
            if (lb && y == -1.0) return fneg(a);
            break;
        case NodeKind::Div:
            if (la && x == 0.0) return make_number(0.0);
            if (lb && y == 1.0) return a;
            break;
        case NodeKind::Pow:
            if (lb && y == 1.0) return a;
            if (lb && y == 0.0) return make_number(1.0);
            break;
        default: break;
    }
    return make_binary(op, a, b);
}

NodePtr fadd(const NodePtr& a, const NodePtr& b) { return fold(NodeKind::Add, a, b); }
NodePtr fsub(const NodePtr& a, const NodePtr& b) { return fold(NodeKind::Sub, a, b); }
NodePtr fmul(const NodePtr& a, const NodePtr& b) { return fold(NodeKind::Mul, a, b); }
NodePtr fdiv(const NodePtr& a, const NodePtr& b) { return fold(NodeKind::Div, a, b); }
NodePtr fpow(const NodePtr& a, const NodePtr& b) { return fold(NodeKind::Pow, a, b); }

NodePtr diff_node(const NodePtr& n) {
    if (!has_var(n)) return make_number(0.0);
    const NodePtr& a = n->lhs;
    const NodePtr& b = n->rhs;
    switch (n->kind) {
        case NodeKind::Variable: return make_number(1.0);
        case NodeKind::Negate: return fneg(diff_node(a));
        case NodeKind::Add: return fadd(diff_node(a), diff_node(b));
        case NodeKind::Sub: return fsub(diff_node(a), diff_node(b));
        case NodeKind::Mul: return fadd(fmul(diff_node(a), b), fmul(a, diff_node(b)));
        case NodeKind::Div:
            if (!has_var(b)) return fdiv(diff_node(a), b);
            return fdiv(fsub(fmul(diff_node(a), b), fmul(a, diff_node(b))), fpow(b, make_number(2.0)));
        case NodeKind::Pow:
            if (!has_var(b)) return fmul(fmul(b, fpow(a, fsub(b, make_number(1.0)))), diff_node(a));
            if (!has_var(a)) return fmul(fmul(n, make_call(Func::Ln, a)), diff_node(b));
            return fmul(n, fadd(fmul(diff_node(b), make_call(Func::Ln, a)),
                                fdiv(fmul(b, diff_node(a)), a)));
        case NodeKind::Call: {
            const NodePtr da = diff_node(a);
            switch (n->func) {
                case Func::Sin: return fmul(make_call(Func::Cos, a), da);
                case Func::Cos: return fmul(fneg(make_call(Func::Sin, a)), da);
                case Func::Exp: return fmul(n, da);
                case Func::Ln: return fdiv(da, a);
                case Func::Sqrt: return fdiv(da, fmul(make_number(2.0), n));
                case Func::Tanh:
                    return fmul(fsub(make_number(1.0), fpow(n, make_number(2.0))), da);
            }
            break;
        }
        default: break;
    }
    return make_number(0.0);
}

int precedence(const ExprNode& n) {
    switch (n.kind) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Negate: return 3;
        case NodeKind::Pow: return 4;
        default: return 5;
    }
}

std::string format_number(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void print_node(const ExprNode& n, const std::string& var, std::string& out);

void print_child(const ExprNode& c, bool parens, const std::string& var, std::string& out) {
    if (parens) out += '(';
    print_node(c, var, out);
    if (parens) out += ')';
}

void print_node(const ExprNode& n, const std::string& var, std::string& out) {
    const int p = precedence(n);
    switch (n.kind) {
        case NodeKind::Number: out += format_number(n.number); return;
        case NodeKind::Pi: out += "pi"; return;
        case NodeKind::Variable: out += var; return;
        case NodeKind::Negate:
            out += '-';
            print_child(*n.lhs, precedence(*n.lhs) < 3, var, out);
            return;
        case NodeKind::Call:
            out += func_name(n.func);
            out += '(';
            print_node(*n.lhs, var, out);
            out += ')';
            return;
        case NodeKind::Pow:
            print_child(*n.lhs, precedence(*n.lhs) <= 4, var, out);
            out += '^';
            print_child(*n.rhs, precedence(*n.rhs) < 3, var, out);
            return;
        default: {
            const char* op = n.kind == NodeKind::Add ? " + "
                             : n.kind == NodeKind::Sub ? " - "
                             : n.kind == NodeKind::Mul ? "*"
                                                       : "/";
            print_child(*n.lhs, precedence(*n.lhs) < p, var, out);
            out += op;
            print_child(*n.rhs, precedence(*n.rhs) <= p, var, out);
            return;
        }
    }
}

}  // namespace

const char* func_name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Exp: return "exp";
        case Func::Ln: return "ln";
        case Func::Sqrt: return "sqrt";
        case Func::Tanh: return "tanh";
    }
    return "?";
}

NodePtr make_number(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Number;
    n->number = v;
    return n;
}

NodePtr make_pi() {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Pi;
    return n;
}

NodePtr make_var() {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Variable;
    return n;
}

NodePtr make_neg(NodePtr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Negate;
    n->lhs = std::move(a);
    return n;
}

NodePtr make_binary(NodeKind op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

NodePtr make_call(Func f, NodePtr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Call;
    n->func = f;
    n->lhs = std::move(a);
    return n;
}

bool structurally_equal(const NodePtr& a, const NodePtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    if (a->kind == NodeKind::Number && a->number != b->number) return false;
    if (a->kind == NodeKind::Call && a->func != b->func) return false;
    return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
}

Expr parse_expr(std::string_view text, const std::string& allowed_var, int line, int col0) {
    Lexer lex(text, line, col0);
    Parser parser(lex.run(), allowed_var, line, col0);
    return Expr(parser.parse(), allowed_var);
}

double Expr::eval(double value) const {
    if (!root_) throw Error(ErrorCode::InvalidArgument, "empty expression");
    const double r = eval_node(*root_, value);
    if (!std::isfinite(r))
        throw Error(ErrorCode::DomainError, "'" + str() + "' at " + var_ + "=" + format_number(value));
    return r;
}

Expr Expr::derivative() const { return Expr(diff_node(root_), var_); }

std::string Expr::str() const {
    std::string out;
    if (root_) print_node(*root_, var_, out);
    return out;
}

bool Expr::depends_on_var() const { return has_var(root_); }

double eval_expr(const Expr& e, double value) { return e.eval(value); }
Expr diff_expr(const Expr& e) { return e.derivative(); }
std::string print_expr(const Expr& e) { return e.str(); }

}  // namespace cph
