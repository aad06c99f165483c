#include "fdedep/expr.hpp"

#include "fdedep/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <optional>

namespace fdedep {

namespace {

constexpr double kTinyDivisor = 1e-300;

struct FuncInfo {
    Func func;
    std::string_view name;
    int arity;
};

constexpr FuncInfo kFuncs[] = {
    {Func::Sin, "sin", 1},  {Func::Cos, "cos", 1},   {Func::Tan, "tan", 1},
    {Func::Exp, "exp", 1},  {Func::Log, "log", 1},   {Func::Sqrt, "sqrt", 1},
    {Func::Abs, "abs", 1},  {Func::Pow, "pow", 2},   {Func::Mod, "mod", 2},
    {Func::Min, "min", 2},  {Func::Max, "max", 2},
};

std::optional<FuncInfo> lookup_func(std::string_view name) {
    for (const auto& f : kFuncs)
        if (f.name == name) return f;
    return std::nullopt;
}

std::string number_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double checked_div(double a, double b) {
    if (std::abs(b) < kTinyDivisor) throw EvalError("division by zero");
    return a / b;
}

double checked_pow(double a, double b) {
    const double v = std::pow(a, b);
    if (std::isnan(v) && !std::isnan(a) && !std::isnan(b))
        throw EvalError("pow of negative base with non-integer exponent");
    return v;
}

double apply(Func f, double a, double b) {
    switch (f) {
    case Func::Sin: return std::sin(a);
    case Func::Cos: return std::cos(a);
    case Func::Tan: return std::tan(a);
    case Func::Exp: return std::exp(a);
    case Func::Log:
        if (!(a > 0.0)) throw EvalError("log of non-positive value");
        return std::log(a);
    case Func::Sqrt:
        if (a < 0.0) throw EvalError("sqrt of negative value");
        return std::sqrt(a);
    case Func::Abs: return std::abs(a);
    case Func::Pow: return checked_pow(a, b);
    case Func::Mod: {
        if (std::abs(b) < kTinyDivisor) throw EvalError("mod by zero");
        return a - b * std::floor(a / b);
    }
    case Func::Min: return std::min(a, b);
    case Func::Max: return std::max(a, b);
    }
    return 0.0;
}

} // namespace

std::string_view func_name(Func f) {
    for (const auto& info : kFuncs)
        if (info.func == f) return info.name;
    return "?";
}

int func_arity(Func f) {
    for (const auto& info : kFuncs)
        if (info.func == f) return info.arity;
    return 0;
}

/// Appends subtrees to an arena while keeping children before parents.
class ExprBuilder {
public:
    explicit ExprBuilder(std::vector<std::string> variables) { e_.variables_ = std::move(variables); }

    int add(ExprNode n) {
        e_.nodes_.push_back(n);
        return static_cast<int>(e_.nodes_.size() - 1);
    }

    std::size_t parameter(const std::string& name) {
        auto& p = e_.parameters_;
        auto it = std::find(p.begin(), p.end(), name);
        if (it != p.end()) return static_cast<std::size_t>(it - p.begin());
        p.push_back(name);
        return p.size() - 1;
    }

    /// Copies `src` into the arena and returns its root index.
    int splice(const Expr& src) {
        if (src.variables_ != e_.variables_)
            throw InvalidArgument("cannot combine expressions over different variable lists");
        const int offset = static_cast<int>(e_.nodes_.size());
        for (ExprNode n : src.nodes_) {
            if (n.lhs >= 0) n.lhs += offset;
            if (n.rhs >= 0) n.rhs += offset;
            if (n.kind == ExprNode::Kind::Parameter) n.index = parameter(src.parameters_[n.index]);
            e_.nodes_.push_back(n);
        }
        return static_cast<int>(e_.nodes_.size() - 1);
    }

    /// The last node added is the root.
    Expr finish() { return std::move(e_); }

    static Expr unary(ExprNode::Kind k, const Expr& a, Func f = Func::Sin) {
        ExprBuilder b(a.variables_);
        const int x = b.splice(a);
        ExprNode n;
        n.kind = k;
        n.func = f;
        n.lhs = x;
        b.add(n);
        return b.finish();
    }

    static Expr binary(ExprNode::Kind k, const Expr& a, const Expr& c, Func f = Func::Sin) {
        ExprBuilder b(a.variables_);
        const int x = b.splice(a);
        const int y = b.splice(c);
        ExprNode n;
        n.kind = k;
        n.func = f;
        n.lhs = x;
        n.rhs = y;
        b.add(n);
        return b.finish();
    }

    Expr e_;
};

Expr Expr::constant(double v, std::vector<std::string> variables) {
    ExprBuilder b(std::move(variables));
    ExprNode n;
    n.kind = ExprNode::Kind::Constant;
    n.value = v;
    b.add(n);
    return b.finish();
}

Expr Expr::variable(std::size_t index, std::vector<std::string> variables) {
    if (index >= variables.size()) throw InvalidArgument("variable index out of range");
    ExprBuilder b(std::move(variables));
    ExprNode n;
    n.kind = ExprNode::Kind::Variable;
    n.index = index;
    b.add(n);
    return b.finish();
}

Expr Expr::delayed(std::size_t comp, double delay, std::vector<std::string> variables) {
    if (!(delay >= 0.0)) throw DelayOutOfRange(delay, 0.0);
    ExprBuilder b(std::move(variables));
    ExprNode n;
    n.kind = ExprNode::Kind::Delayed;
    n.index = comp;
    n.value = delay;
    b.add(n);
    return b.finish();
}

Expr Expr::call(Func f, const Expr& arg) {
    if (func_arity(f) != 1) throw InvalidArgument("function expects two arguments");
    return ExprBuilder::unary(ExprNode::Kind::Call, arg, f);
}

Expr Expr::call(Func f, const Expr& a, const Expr& b) {
    if (func_arity(f) != 2) throw InvalidArgument("function expects one argument");
    return ExprBuilder::binary(ExprNode::Kind::Call, a, b, f);
}

Expr operator+(const Expr& a, const Expr& b) { return ExprBuilder::binary(ExprNode::Kind::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return ExprBuilder::binary(ExprNode::Kind::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return ExprBuilder::binary(ExprNode::Kind::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return ExprBuilder::binary(ExprNode::Kind::Div, a, b); }
Expr operator-(const Expr& a) { return ExprBuilder::unary(ExprNode::Kind::Negate, a); }
Expr Expr::pow(const Expr& a, const Expr& b) { return ExprBuilder::binary(ExprNode::Kind::Pow, a, b); }

double Expr::eval(std::span<const double> variables, const SegmentView* state) const {
    thread_local std::vector<double> scratch;
    scratch.resize(nodes_.size());
    using K = ExprNode::Kind;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const ExprNode& n = nodes_[i];
        double v = 0.0;
        switch (n.kind) {
        case K::Constant:
        case K::Parameter: v = n.value; break;
        case K::Variable:
            if (n.index >= variables.size()) throw EvalError("missing variable value");
            v = variables[n.index];
            break;
        case K::Delayed:
            if (state == nullptr) throw EvalError("state reference evaluated without a state");
            if (n.index >= state->dim()) throw EvalError("state component out of range");
            v = state->at(n.index, -n.value);
            break;
        case K::Negate: v = -scratch[n.lhs]; break;
        case K::Add: v = scratch[n.lhs] + scratch[n.rhs]; break;
        case K::Sub: v = scratch[n.lhs] - scratch[n.rhs]; break;
        case K::Mul: v = scratch[n.lhs] * scratch[n.rhs]; break;
        case K::Div: v = checked_div(scratch[n.lhs], scratch[n.rhs]); break;
        case K::Pow: v = checked_pow(scratch[n.lhs], scratch[n.rhs]); break;
        case K::Call: v = apply(n.func, scratch[n.lhs], n.rhs >= 0 ? scratch[n.rhs] : 0.0); break;
        }
        scratch[i] = v;
    }
    return scratch.back();
}

namespace {

void print_leaf(const Expr& e, const ExprNode& n, std::string& out) {
    using K = ExprNode::Kind;
    switch (n.kind) {
    case K::Constant:
        if (n.value < 0.0 || (n.value == 0.0 && std::signbit(n.value))) {
            out += "(-" + number_text(-n.value) + ")";
        } else {
            out += number_text(n.value);
        }
        break;
    case K::Variable: out += e.variables()[n.index]; break;
    case K::Delayed:
        out += "x[" + std::to_string(n.index + 1) + "](t";
        if (n.value != 0.0) out += "-" + number_text(n.value);
        out += ')';
        break;
    default: break;
    }
}

} // namespace

std::string Expr::print() const {
    struct Printer {
        const Expr& e;
        std::string out;
        void node(int i) {
            const ExprNode& n = e.nodes_[static_cast<std::size_t>(i)];
            using K = ExprNode::Kind;
            auto bin = [&](const char* op) {
                out += '(';
                node(n.lhs);
                out += op;
                node(n.rhs);
                out += ')';
            };
            switch (n.kind) {
            case K::Parameter: out += e.parameters_[n.index]; return;
            case K::Negate:
                out += "(-";
                node(n.lhs);
                out += ')';
                return;
            case K::Add: bin(" + "); return;
            case K::Sub: bin(" - "); return;
            case K::Mul: bin(" * "); return;
            case K::Div: bin(" / "); return;
            case K::Pow: bin(" ^ "); return;
            case K::Call:
                out += func_name(n.func);
                out += '(';
                node(n.lhs);
                if (n.rhs >= 0) {
                    out += ", ";
                    node(n.rhs);
                }
                out += ')';
                return;
            default: print_leaf(e, n, out); return;
            }
        }
    } p{*this, {}};
    p.node(static_cast<int>(root()));
    return p.out;
}

Expr Expr::substitute(std::size_t index, const Expr& replacement) const {
    if (replacement.variables_ != variables_)
        throw InvalidArgument("substitution must use the same variable list");
    ExprBuilder b(variables_);
    std::vector<int> map(nodes_.size(), -1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        ExprNode n = nodes_[i];
        if (n.kind == ExprNode::Kind::Variable && n.index == index) {
            map[i] = b.splice(replacement);
            continue;
        }
        if (n.lhs >= 0) n.lhs = map[static_cast<std::size_t>(n.lhs)];
        if (n.rhs >= 0) n.rhs = map[static_cast<std::size_t>(n.rhs)];
        if (n.kind == ExprNode::Kind::Parameter) n.index = b.parameter(parameters_[n.index]);
        map[i] = b.add(n);
    }
    return b.finish();
}

Expr Expr::with_variables(std::vector<std::string> variables) const {
    if (variables.size() != variables_.size())
        throw InvalidArgument("variable lists must have equal length");
    Expr e = *this;
    e.variables_ = std::move(variables);
    return e;
}

std::vector<Expr::DelayRef> Expr::delay_refs() const {
    std::vector<DelayRef> refs;
    for (const auto& n : nodes_) {
        if (n.kind != ExprNode::Kind::Delayed) continue;
        DelayRef r{n.index, n.value};
        if (std::find(refs.begin(), refs.end(), r) == refs.end()) refs.push_back(r);
    }
    return refs;
}

double Expr::max_delay() const {
    double m = 0.0;
    for (const auto& n : nodes_)
        if (n.kind == ExprNode::Kind::Delayed) m = std::max(m, n.value);
    return m;
}

bool Expr::uses_state() const {
    return std::any_of(nodes_.begin(), nodes_.end(),
                       [](const ExprNode& n) { return n.kind == ExprNode::Kind::Delayed; });
}

bool Expr::uses_variable(std::size_t index) const {
    return std::any_of(nodes_.begin(), nodes_.end(), [&](const ExprNode& n) {
        return n.kind == ExprNode::Kind::Variable && n.index == index;
    });
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    Parser(std::string_view src, const ParseOptions& opt) : src_(src), opt_(opt), b_(opt.variables) {}

    Expr run() {
        skip_ws();
        if (pos_ >= src_.size()) fail("empty expression");
        expression();
        skip_ws();
        if (pos_ < src_.size()) fail(std::string("unexpected '") + src_[pos_] + "'");
        return b_.finish();
    }

private:
    std::string_view src_;
    const ParseOptions& opt_;
    ExprBuilder b_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail_at(std::size_t at, const std::string& msg) const {
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
            if (src_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(line, col, msg);
    }
    [[noreturn]] void fail(const std::string& msg) const { fail_at(pos_, msg); }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }

    bool accept(char c) {
        if (!peek(c)) return false;
        ++pos_;
        return true;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' but input ended");
            fail(std::string("expected '") + c + "'");
        }
    }

    int node(ExprNode::Kind k, int lhs = -1, int rhs = -1) {
        ExprNode n;
        n.kind = k;
        n.lhs = lhs;
        n.rhs = rhs;
        return b_.add(n);
    }

    int constant(double v) {
        ExprNode n;
        n.kind = ExprNode::Kind::Constant;
        n.value = v;
        return b_.add(n);
    }

    int expression() {
        int lhs = term();
        while (true) {
            if (accept('+')) {
                lhs = node(ExprNode::Kind::Add, lhs, term());
            } else if (accept('-')) {
                lhs = node(ExprNode::Kind::Sub, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    int term() {
        int lhs = power();
        while (true) {
            if (accept('*')) {
                lhs = node(ExprNode::Kind::Mul, lhs, power());
            } else if (accept('/')) {
                lhs = node(ExprNode::Kind::Div, lhs, power());
            } else {
                return lhs;
            }
        }
    }

    int power() {
        const int base = prefix();
        if (accept('^')) return node(ExprNode::Kind::Pow, base, power());
        return base;
    }

    int prefix() {
        if (accept('-')) return node(ExprNode::Kind::Negate, prefix());
        if (accept('+')) return prefix();
        return primary();
    }

    double number_literal() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                pos_ = p;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        const std::string text(src_.substr(start, pos_ - start));
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (text.empty() || end != text.c_str() + text.size()) fail_at(start, "malformed number '" + text + "'");
        return v;
    }

    std::string identifier() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        return std::string(src_.substr(start, pos_ - start));
    }

    int delayed_reference(std::size_t ident_pos) {
        expect('[');
        skip_ws();
        const std::size_t idx_pos = pos_;
        const double idx = number_literal();
        if (idx != std::floor(idx) || idx < 1.0 || idx > static_cast<double>(opt_.state_dim))
            fail_at(idx_pos, "state index must be an integer in [1, " + std::to_string(opt_.state_dim) + "]");
        expect(']');
        expect('(');
        skip_ws();
        const std::size_t t_pos = pos_;
        if (identifier() != "t") fail_at(t_pos, "delayed argument must have the form t - d");
        double delay = 0.0;
        if (accept('-')) {
            skip_ws();
            delay = number_literal();
        } else if (peek('+')) {
            fail("advanced arguments t + d are not allowed");
        }
        expect(')');
        const double tol = 1e-12 * std::max(1.0, opt_.max_delay);
        if (delay > opt_.max_delay + tol) throw DelayOutOfRange(delay, opt_.max_delay);
        (void)ident_pos;
        ExprNode n;
        n.kind = ExprNode::Kind::Delayed;
        n.index = static_cast<std::size_t>(idx) - 1;
        n.value = std::min(delay, opt_.max_delay);
        return b_.add(n);
    }

    int primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of expression");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return constant(number_literal());
        if (accept('(')) {
            const int inner = expression();
            expect(')');
            return inner;
        }
        if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) fail(std::string("unexpected '") + c + "'");

        const std::size_t ident_pos = pos_;
        const std::string name = identifier();

        if (name == "x" && opt_.state_dim > 0 && peek('[')) return delayed_reference(ident_pos);

        if (peek('(')) {
            const auto info = lookup_func(name);
            if (!info) fail_at(ident_pos, "unknown function '" + name + "'");
            expect('(');
            const int a = expression();
            int b = -1;
            int count = 1;
            while (accept(',')) {
                const int arg = expression();
                if (count == 1) b = arg;
                ++count;
            }
            expect(')');
            if (count != info->arity)
                fail_at(ident_pos, "function '" + name + "' expects " + std::to_string(info->arity) +
                                       " argument(s), got " + std::to_string(count));
            ExprNode n;
            n.kind = ExprNode::Kind::Call;
            n.func = info->func;
            n.lhs = a;
            n.rhs = b;
            return b_.add(n);
        }

        const auto& vars = opt_.variables;
        if (auto it = std::find(vars.begin(), vars.end(), name); it != vars.end()) {
            ExprNode n;
            n.kind = ExprNode::Kind::Variable;
            n.index = static_cast<std::size_t>(it - vars.begin());
            return b_.add(n);
        }
        if (auto it = opt_.parameters.find(name); it != opt_.parameters.end()) {
            ExprNode n;
            n.kind = ExprNode::Kind::Parameter;
            n.value = it->second;
            n.index = b_.parameter(name);
            return b_.add(n);
        }
        if (name == "pi") return constant(std::numbers::pi);
        if (name == "e") return constant(std::numbers::e);
        if (lookup_func(name)) fail_at(ident_pos, "function '" + name + "' needs an argument list");
        fail_at(ident_pos, "unknown identifier '" + name + "'");
    }
};

} // namespace

Expr parse_expr(std::string_view source, const ParseOptions& options) {
    return Parser(source, options).run();
}

Expr parse_rhs(std::string_view source, std::size_t n, double r,
               const std::map<std::string, double>& parameters) {
    ParseOptions opt;
    opt.variables = {"t"};
    opt.state_dim = n;
    opt.max_delay = r;
    opt.parameters = parameters;
    return parse_expr(source, opt);
}

} // namespace fdedep
