#pragma once

#include "fdedep/sampled_fn.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fdedep {

enum class Func : std::uint8_t { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Pow, Mod, Min, Max };

std::string_view func_name(Func f);
int func_arity(Func f);

struct ExprNode {
    enum class Kind : std::uint8_t {
        Constant,  // value
        Variable,  // index into the variable list
        Parameter, // value, index into the parameter-name table
        Delayed,   // x[index+1](t - value)
        Negate,
        Add,
        Sub,
        Mul,
        Div,
        Pow,
        Call, // func applied to lhs (and rhs for binary functions)
    };

    Kind kind = Kind::Constant;
    Func func = Func::Sin;
    int lhs = -1;
    int rhs = -1;
    double value = 0.0;
    std::size_t index = 0;

    bool operator==(const ExprNode&) const = default;
};

/// Immutable expression tree stored as a node arena; children precede parents.
///
/// Free variables are positional (for right-hand sides the single variable is `t`);
/// delayed state references read from a SegmentView at theta = -delay.
class Expr {
public:
    static Expr constant(double v, std::vector<std::string> variables = {"t"});
    static Expr variable(std::size_t index, std::vector<std::string> variables = {"t"});
    /// Reference to component `comp` (0-based) of the state at delay `delay`.
    static Expr delayed(std::size_t comp, double delay, std::vector<std::string> variables = {"t"});
    static Expr call(Func f, const Expr& arg);
    static Expr call(Func f, const Expr& a, const Expr& b);

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);
    static Expr pow(const Expr& a, const Expr& b);

    /// Evaluates with the given variable values; `state` is required when the
    /// expression contains delayed references. Throws EvalError.
    double eval(std::span<const double> variables, const SegmentView* state = nullptr) const;

    /// Fully parenthesised source text that parses back to the same tree.
    std::string print() const;

    /// Replaces variable `index` by `replacement` (which must use the same variable list).
    Expr substitute(std::size_t index, const Expr& replacement) const;
    /// Same tree over a different variable list of equal length.
    Expr with_variables(std::vector<std::string> variables) const;

    struct DelayRef {
        std::size_t comp;
        double delay;
        bool operator==(const DelayRef&) const = default;
    };
    /// Distinct delayed references in first-occurrence order.
    std::vector<DelayRef> delay_refs() const;
    double max_delay() const;
    bool uses_state() const;
    bool uses_variable(std::size_t index) const;

    const std::vector<std::string>& variables() const noexcept { return variables_; }
    const std::vector<ExprNode>& nodes() const noexcept { return nodes_; }
    std::size_t root() const noexcept { return nodes_.size() - 1; }

    bool operator==(const Expr& o) const {
        return nodes_ == o.nodes_ && variables_ == o.variables_ && parameters_ == o.parameters_;
    }

private:
    friend class ExprBuilder;
    std::vector<ExprNode> nodes_;
    std::vector<std::string> variables_;
    std::vector<std::string> parameters_;
};

struct ParseOptions {
    std::vector<std::string> variables{"t"};
    /// N; zero disables the x[i](t - d) syntax.
    std::size_t state_dim = 0;
    /// r; every literal delay must lie in [0, max_delay].
    double max_delay = 0.0;
    std::map<std::string, double> parameters{};
};

/// Recursive-descent parser. Precedence: unary minus > ^ (right associative) > * / > + -.
/// Throws ParseError (with 1-based line/column) or DelayOutOfRange.
Expr parse_expr(std::string_view source, const ParseOptions& options);

/// One component of a right-hand side f(t, x_t) with N state components and delay span r.
Expr parse_rhs(std::string_view source, std::size_t n, double r,
               const std::map<std::string, double>& parameters = {});

} // namespace fdedep
