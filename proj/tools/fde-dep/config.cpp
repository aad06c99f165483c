#include "fde-dep/config.hpp"

#include "fdedep/error.hpp"
#include "fdedep/expr.hpp"
#include "fdedep/json_io.hpp"
#include "fdedep/rhs.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fdedep::cli {

using nlohmann::json;

namespace {

// A JSON value together with its path in the document, for error messages.
class Node {
public:
    Node(const Document& doc, const json& value, std::string path)
        : doc_(&doc), value_(&value), path_(std::move(path)) {}

    [[noreturn]] void fail(const std::string& message) const { fail_at(path_, message); }

    const json& raw() const noexcept { return *value_; }
    const std::string& path() const noexcept { return path_; }

    void expect_object() const {
        if (!value_->is_object()) fail("expected an object");
    }

    /// Rejects keys outside `allowed`, catching typos in option names.
    void allow(std::initializer_list<const char*> allowed) const {
        expect_object();
        const std::set<std::string> keys(allowed.begin(), allowed.end());
        for (const auto& [k, v] : value_->items())
            if (!keys.count(k)) child_path_fail(k, "unknown field");
    }

    bool has(const char* key) const { return value_->contains(key) && !(*value_)[key].is_null(); }

    Node at(const char* key) const {
        if (!has(key)) fail(std::string("missing required field '") + key + "'");
        return {*doc_, (*value_)[key], child(key)};
    }

    double number(const char* key) const {
        const Node n = at(key);
        if (!n.raw().is_number()) n.fail("expected a number");
        const double v = n.raw().get<double>();
        if (!std::isfinite(v)) n.fail("expected a finite number");
        return v;
    }
    double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

    std::size_t count(const char* key, std::size_t fallback) const {
        if (!has(key)) return fallback;
        const Node n = at(key);
        if (!n.raw().is_number_integer() || n.raw().get<long long>() < 0) n.fail("expected a non-negative integer");
        return n.raw().get<std::size_t>();
    }

    bool flag(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        const Node n = at(key);
        if (!n.raw().is_boolean()) n.fail("expected true or false");
        return n.raw().get<bool>();
    }

    std::string text(const char* key) const {
        const Node n = at(key);
        if (!n.raw().is_string()) n.fail("expected a string");
        return n.raw().get<std::string>();
    }

    std::vector<double> numbers(const char* key, std::vector<double> fallback) const {
        if (!has(key)) return fallback;
        const Node n = at(key);
        if (!n.raw().is_array() || n.raw().empty()) n.fail("expected a non-empty array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < n.raw().size(); ++i) {
            const Node e = n.element(i);
            if (!e.raw().is_number()) e.fail("expected a number");
            out.push_back(e.raw().get<double>());
        }
        return out;
    }

    /// A string or an array of strings.
    std::vector<std::string> texts(const char* key) const {
        const Node n = at(key);
        if (n.raw().is_string()) return {n.raw().get<std::string>()};
        if (!n.raw().is_array() || n.raw().empty()) n.fail("expected a string or a non-empty array of strings");
        std::vector<std::string> out;
        for (std::size_t i = 0; i < n.raw().size(); ++i) {
            const Node e = n.element(i);
            if (!e.raw().is_string()) e.fail("expected a string");
            out.push_back(e.raw().get<std::string>());
        }
        return out;
    }

    Node element(std::size_t i) const { return {*doc_, (*value_)[i], path_ + "[" + std::to_string(i) + "]"}; }

private:
    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    [[noreturn]] void child_path_fail(const std::string& key, const std::string& message) const {
        fail_at(child(key), message);
    }
    [[noreturn]] void fail_at(const std::string& path, const std::string& message) const {
        std::string where = doc_->file;
        if (const auto it = doc_->positions.find(path); it != doc_->positions.end())
            where += ":" + std::to_string(it->second.line) + ":" + std::to_string(it->second.column);
        throw ConfigError(where + ": " + (path.empty() ? "(top level)" : path) + ": " + message);
    }

    const Document* doc_;
    const json* value_;
    std::string path_;
};

std::map<std::string, double> parameters(const Node& n) {
    std::map<std::string, double> out;
    if (!n.has("parameters")) return out;
    const Node p = n.at("parameters");
    p.expect_object();
    for (const auto& [k, v] : p.raw().items()) {
        if (!v.is_number()) p.fail("parameter '" + k + "' must be a number");
        out[k] = v.get<double>();
    }
    return out;
}

// Runs `make`, reporting library errors at node `n`.
template <class F>
auto guarded(const Node& n, F&& make) {
    try {
        return make();
    } catch (const ParseError& e) {
        n.fail("expression error at " + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " +
               e.message());
    } catch (const Error& e) {
        n.fail(e.what());
    }
}

Expr expression(const Node& n, const char* key, const ParseOptions& po) {
    const Node at = n.at(key);
    const std::string source = n.text(key);
    return guarded(at, [&] { return parse_expr(source, po); });
}

void check_ladder(const Node& n, const char* key, const std::vector<double>& ladder) {
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] > 0.0)) n.at(key).fail("ladder entries must be positive");
        if (i > 0 && !(ladder[i] < ladder[i - 1])) n.at(key).fail("ladder must be strictly decreasing");
    }
}

SolverOptions solver_options(const Node& parent, const Overrides& ov) {
    SolverOptions o;
    if (parent.has("solver")) {
        const Node n = parent.at("solver");
        n.allow({"tol", "tube_radius", "beta_fraction", "step_margin", "max_iter", "density", "safety", "max_retries",
                 "max_step"});
        o.tol = n.number("tol", o.tol);
        o.tube_radius = n.number("tube_radius", o.tube_radius);
        o.beta_fraction = n.number("beta_fraction", o.beta_fraction);
        o.step_margin = n.number("step_margin", o.step_margin);
        o.max_iter = static_cast<int>(n.count("max_iter", static_cast<std::size_t>(o.max_iter)));
        o.density = static_cast<int>(n.count("density", static_cast<std::size_t>(o.density)));
        o.safety = n.number("safety", o.safety);
        o.max_retries = static_cast<int>(n.count("max_retries", static_cast<std::size_t>(o.max_retries)));
        if (n.has("max_step")) o.max_step = n.number("max_step");
    }
    if (ov.tol) o.tol = *ov.tol;
    if (ov.radius) o.tube_radius = *ov.radius;

    const std::string where = parent.path().empty() ? "solver" : parent.path() + ".solver";
    auto bad = [&](const std::string& m) { throw ConfigError(where + ": " + m); };
    try {
        if (!(o.tol > 0.0)) bad("tol must be positive");
        if (!(o.tube_radius > 0.0)) bad("tube_radius must be positive");
        if (!(o.beta_fraction > 0.0 && o.beta_fraction <= 1.0)) bad("beta_fraction must lie in (0, 1]");
        if (!(o.step_margin > 0.0 && o.step_margin < 1.0)) bad("step_margin must lie in (0, 1)");
        if (o.max_iter < 1) bad("max_iter must be at least 1");
        if (o.density < 1) bad("density must be at least 1");
        if (!(o.safety >= 1.0)) bad("safety must be at least 1");
        if (o.max_step && !(*o.max_step > 0.0)) bad("max_step must be positive");
    } catch (const ConfigError& e) {
        parent.fail(e.what());
    }
    return o;
}

// `rhs_default` is used when the problem omits "rhs" (Fourier families).
ProblemSpec problem_spec(const Node& n, const Overrides& ov, json& resolved,
                         const std::optional<std::string>& rhs_default = std::nullopt) {
    n.allow({"sigma", "r", "h", "horizon", "phi", "rhs", "parameters", "solver"});
    const double sigma = n.number("sigma", 0.0);
    const double r = n.number("r", 0.0);
    const double h = ov.h ? *ov.h : n.number("h", 1e-3);
    const double horizon = n.number("horizon");
    if (!(h > 0.0)) n.fail("h must be positive");
    if (!(r >= 0.0)) n.fail("r must be non-negative");
    if (!(horizon > 0.0)) n.fail("horizon must be positive");
    const auto params = parameters(n);

    std::vector<std::string> rhs_src;
    if (n.has("rhs") || !rhs_default) rhs_src = n.texts("rhs");
    else rhs_src = {*rhs_default};
    const std::size_t dim = rhs_src.size();
    const Node rhs_node = n.has("rhs") ? n.at("rhs") : n;
    RhsSystem f = guarded(rhs_node, [&] { return RhsSystem::parse(rhs_src, r, params); });

    const Node phi = n.at("phi");
    std::optional<ProblemSpec> p;
    const bool node_list = phi.raw().is_array() && !phi.raw().empty() && phi.raw()[0].is_array();
    if (node_list) {
        std::vector<Vec> nodes;
        for (std::size_t i = 0; i < phi.raw().size(); ++i) {
            const Node e = phi.element(i);
            if (!e.raw().is_array() || e.raw().size() != dim)
                e.fail("each phi node needs " + std::to_string(dim) + " number(s)");
            Vec v;
            for (const auto& x : e.raw()) {
                if (!x.is_number()) e.fail("expected numbers");
                v.push_back(x.get<double>());
            }
            nodes.push_back(std::move(v));
        }
        const std::size_t steps = grid_steps(r, h);
        if (nodes.size() != steps + 1)
            phi.fail("node list needs r / h + 1 = " + std::to_string(steps + 1) + " entries, got " +
                     std::to_string(nodes.size()));
        const double rs = static_cast<double>(steps) * h;
        const double hs = static_cast<double>(grid_steps(horizon, h)) * h;
        p = guarded(phi, [&] {
            ProblemSpec q{sigma, rs, HistorySegment(SampledFn::from_nodes(-rs, h, nodes)), f, hs, h};
            q.validate();
            return q;
        });
    } else {
        const auto src = n.texts("phi");
        if (src.size() != dim) phi.fail("needs one expression in theta per component (" + std::to_string(dim) + ")");
        ParseOptions po;
        po.variables = {"theta"};
        po.parameters = params;
        std::vector<Expr> comps;
        for (std::size_t i = 0; i < dim; ++i) {
            const Node at = phi.raw().is_string() ? phi : phi.element(i);
            comps.push_back(guarded(at, [&] { return parse_expr(src[i], po); }));
        }
        p = guarded(phi, [&] {
            return make_problem(sigma, r, h, horizon,
                                [&comps](double theta) {
                                    Vec v;
                                    for (const auto& c : comps) v.push_back(c.eval(std::span<const double>(&theta, 1)));
                                    return v;
                                },
                                f);
        });
    }
    resolved = {{"sigma", sigma},     {"r", p->r},     {"h", h},
                {"horizon", p->horizon}, {"rhs", rhs_src}, {"phi", phi.raw()},
                {"parameters", params}};
    return std::move(*p);
}

} // namespace

std::map<std::string, SourcePos> locate_values(const std::string& text) {
    struct Frame {
        std::string path;
        bool object;
        std::size_t index = 0;
        std::string key;
    };
    std::map<std::string, SourcePos> out;
    std::vector<Frame> stack;
    SourcePos pos;
    std::size_t i = 0;
    auto advance = [&] {
        if (text[i] == '\n') {
            ++pos.line;
            pos.column = 1;
        } else {
            ++pos.column;
        }
        ++i;
    };
    auto skip_space = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) advance();
    };
    auto read_string = [&] {
        std::string s;
        advance();
        while (i < text.size() && text[i] != '"') {
            if (text[i] == '\\') {
                advance();
                if (i >= text.size()) break;
            }
            s += text[i];
            advance();
        }
        if (i < text.size()) advance();
        return s;
    };
    auto value_path = [&]() -> std::string {
        if (stack.empty()) return "";
        const Frame& f = stack.back();
        if (f.object) return f.path.empty() ? f.key : f.path + "." + f.key;
        return f.path + "[" + std::to_string(f.index) + "]";
    };
    bool expect_key = false;
    out[""] = pos;
    while (true) {
        skip_space();
        if (i >= text.size()) break;
        const char c = text[i];
        if (expect_key) {
            if (c == '"') {
                const SourcePos at = pos;
                stack.back().key = read_string();
                out[value_path()] = at;
                expect_key = false;
            } else {
                if (c == '}') stack.pop_back();
                advance();
            }
            continue;
        }
        switch (c) {
        case '{':
        case '[': {
            const std::string path = value_path();
            if (!stack.empty() && !stack.back().object) out.emplace(path, pos);
            stack.push_back({path, c == '{', 0, {}});
            expect_key = c == '{';
            advance();
            break;
        }
        case '}':
        case ']':
            stack.pop_back();
            advance();
            break;
        case ',':
            if (!stack.empty()) {
                if (stack.back().object) expect_key = true;
                else ++stack.back().index;
            }
            advance();
            break;
        case ':':
            advance();
            break;
        default:
            if (!stack.empty() && !stack.back().object) out.emplace(value_path(), pos);
            if (c == '"') {
                read_string();
            } else {
                while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != ',' &&
                       text[i] != ']' && text[i] != '}')
                    advance();
            }
        }
    }
    return out;
}

Document parse_document(const std::string& text, const std::string& file) {
    try {
        json root = json::parse(text);
        return {file, std::move(root), locate_values(text)};
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        if (const auto pos = what.rfind(": "); pos != std::string::npos) what = what.substr(pos + 2);
        throw ConfigError(file + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON: " + what);
    }
}

Document read_document(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_document(buf.str(), path.string());
}

ProblemConfig load_problem(const Document& doc, const Overrides& ov) {
    const Node root(doc, doc.root, "");
    json resolved;
    ProblemSpec p = problem_spec(root, ov, resolved);
    SolverOptions so = solver_options(root, ov);
    resolved["solver"] = to_json(so);
    return {std::move(p), std::move(so), std::move(resolved)};
}

FamilyConfig load_family(const Document& doc, const Overrides& ov) {
    const Node root(doc, doc.root, "");
    root.allow({"base", "K", "c_rule", "rhs_drift", "phi_drift", "sigma_drift", "fourier", "a_prime", "tail_start",
                "eps_ladder", "delta", "cont_eps", "theta_samples", "random_samples", "uniqueness_check", "seed",
                "threads"});
    const Node base_node = root.at("base");
    base_node.expect_object();

    std::optional<FourierMode> fourier;
    json fourier_resolved = nullptr;
    if (root.has("fourier")) {
        const Node fn = root.at("fourier");
        fn.allow({"f", "quad_points"});
        ParseOptions po;
        po.variables = {"x"};
        fourier = FourierMode{expression(fn, "f", po), fn.count("quad_points", 32768)};
        fourier_resolved = {{"f", fn.text("f")}, {"quad_points", fourier->quad_points}};
    }

    json base_resolved;
    std::optional<std::string> rhs_default;
    if (fourier) rhs_default = autonomous_rhs(fourier->f).print();
    ProblemSpec base = problem_spec(base_node, ov, base_resolved, rhs_default);

    DependenceOptions o;
    o.solver = solver_options(base_node, ov);
    base_resolved["solver"] = to_json(o.solver);

    FamilySpec spec{std::move(base), 0, {}, std::nullopt, {}, 0.0, fourier};
    spec.K = ov.k_max ? *ov.k_max : root.count("K", 64);
    json c_rule = "inverse";
    if (root.has("c_rule")) {
        const Node c = root.at("c_rule");
        if (c.raw().is_string()) {
            spec.c_rule.kind = guarded(c, [&] { return parse_coefficient_kind(c.raw().get<std::string>()); });
        } else {
            c.allow({"kind", "param"});
            const std::string kind = c.text("kind");
            spec.c_rule.kind = guarded(c.at("kind"), [&] { return parse_coefficient_kind(kind); });
            spec.c_rule.param = c.number("param", spec.c_rule.param);
        }
        c_rule = {{"kind", to_string(spec.c_rule.kind)}, {"param", spec.c_rule.param}};
    }
    if (fourier && root.has("c_rule")) root.at("c_rule").fail("c_rule does not apply in Fourier mode");

    const auto params = parameters(base_node);
    json rhs_drift = nullptr;
    if (root.has("rhs_drift")) {
        if (fourier) root.at("rhs_drift").fail("rhs_drift does not apply in Fourier mode");
        const auto src = root.texts("rhs_drift");
        if (src.size() != spec.base.dim()) root.at("rhs_drift").fail("needs one expression per component");
        spec.rhs_drift = guarded(root.at("rhs_drift"), [&] { return RhsSystem::parse(src, spec.base.r, params); });
        rhs_drift = src;
    }
    json phi_drift = nullptr;
    if (root.has("phi_drift")) {
        const auto src = root.texts("phi_drift");
        if (src.size() != spec.base.dim()) root.at("phi_drift").fail("needs one expression in theta per component");
        ParseOptions po;
        po.variables = {"theta"};
        po.parameters = params;
        for (const auto& s : src) spec.phi_drift.push_back(guarded(root.at("phi_drift"), [&] { return parse_expr(s, po); }));
        phi_drift = src;
    }
    spec.sigma_drift = root.number("sigma_drift", 0.0);

    o.a_prime = root.number("a_prime", 1.0);
    o.tail_start = root.count("tail_start", o.tail_start);
    o.eps_ladder = root.numbers("eps_ladder", o.eps_ladder);
    check_ladder(root, "eps_ladder", o.eps_ladder);
    o.delta = root.number("delta", o.delta);
    o.cont_eps = root.number("cont_eps", o.cont_eps);
    o.theta_samples = root.count("theta_samples", o.theta_samples);
    o.random_samples = root.count("random_samples", o.random_samples);
    o.uniqueness_check = root.flag("uniqueness_check", o.uniqueness_check);
    o.seed = ov.seed ? *ov.seed : root.count("seed", 0);
    o.threads = static_cast<unsigned>(root.count("threads", 0));
    if (!(o.a_prime > 0.0)) root.at("a_prime").fail("a_prime must be positive");
    if (o.a_prime > spec.base.horizon + 1e-9 * std::max(1.0, o.a_prime))
        root.at("a_prime").fail("a_prime exceeds the base horizon");
    if (o.tail_start < 1) root.at("tail_start").fail("tail_start must be at least 1");
    if (!(o.delta > 0.0)) root.at("delta").fail("delta must be positive");
    if (!(o.cont_eps > 0.0)) root.at("cont_eps").fail("cont_eps must be positive");
    if (o.theta_samples < 2) root.at("theta_samples").fail("theta_samples must be at least 2");

    // Surface per-member problems now rather than in the middle of the run.
    guarded(root, [&] { return build_family(spec).size(); });

    json resolved = {{"base", base_resolved},
                     {"K", spec.K},
                     {"c_rule", fourier ? json("sup |S_k - f|") : c_rule},
                     {"rhs_drift", rhs_drift},
                     {"phi_drift", phi_drift},
                     {"sigma_drift", spec.sigma_drift},
                     {"fourier", fourier_resolved}};
    const json opts = to_json(o);
    for (const auto& [k, v] : opts.items())
        if (k != "solver") resolved[k] = v;
    return {std::move(spec), std::move(o), std::move(resolved)};
}

FourierConfig load_fourier(const Document& doc, const Overrides& ov) {
    const Node root(doc, doc.root, "");
    root.allow({"f", "c0", "horizon", "h", "orders", "quad_points", "rhs_grid", "reference_refinement", "solver"});
    ParseOptions po;
    po.variables = {"x"};
    Expr f = expression(root, "f", po);
    FourierOptions o;
    o.c0 = root.number("c0", o.c0);
    o.horizon = root.number("horizon", o.horizon);
    o.h = ov.h ? *ov.h : root.number("h", o.h);
    if (root.has("orders")) {
        o.orders.clear();
        const Node n = root.at("orders");
        if (!n.raw().is_array() || n.raw().empty()) n.fail("expected a non-empty array of orders");
        for (std::size_t i = 0; i < n.raw().size(); ++i) {
            const Node e = n.element(i);
            if (!e.raw().is_number_integer() || e.raw().get<long long>() < 1) e.fail("orders must be positive integers");
            o.orders.push_back(e.raw().get<std::size_t>());
        }
    }
    o.quad_points = root.count("quad_points", o.quad_points);
    o.rhs_grid = root.count("rhs_grid", o.rhs_grid);
    o.reference_refinement = root.count("reference_refinement", o.reference_refinement);
    o.solver = solver_options(root, ov);
    if (!(o.horizon > 0.0)) root.at("horizon").fail("horizon must be positive");
    if (!(o.h > 0.0)) root.fail("h must be positive");
    const std::size_t top = *std::max_element(o.orders.begin(), o.orders.end());
    if (o.quad_points < 8 * top) root.fail("quad_points must be at least 8 times the largest order");
    if (o.rhs_grid < 2) root.at("rhs_grid").fail("rhs_grid must be at least 2");
    if (o.reference_refinement < 1) root.at("reference_refinement").fail("reference_refinement must be at least 1");
    json resolved = to_json(o);
    resolved["f"] = root.text("f");
    return {std::move(f), std::move(o), std::move(resolved)};
}

SeqConfig load_seq(const Document& doc, const Overrides& ov) {
    const Node root(doc, doc.root, "");
    root.allow({"member", "limit", "box", "variables", "index", "parameters", "k_max", "tail", "sample_points",
                "compact_points", "pointwise_eps", "uniform_eps", "cont_eps", "probes_per_point", "eps_ladder",
                "delta_ladder", "members_continuous"});
    const Node box_node = root.at("box");
    box_node.allow({"lo", "hi"});
    Box box{box_node.numbers("lo", {}), box_node.numbers("hi", {})};
    if (box.lo.empty() || box.lo.size() != box.hi.size()) box_node.fail("lo and hi need the same non-zero length");
    for (std::size_t i = 0; i < box.dim(); ++i)
        if (!(box.lo[i] < box.hi[i])) box_node.fail("lo must be below hi in every coordinate");

    std::vector<std::string> vars;
    if (root.has("variables")) {
        vars = root.texts("variables");
        if (vars.size() != box.dim()) root.at("variables").fail("needs one name per box dimension");
    } else if (box.dim() == 1) {
        vars = {"x"};
    } else {
        for (std::size_t i = 1; i <= box.dim(); ++i) vars.push_back("x" + std::to_string(i));
    }
    const std::string index = root.has("index") ? root.text("index") : "k";
    ParseOptions member_po;
    member_po.variables = vars;
    member_po.variables.insert(member_po.variables.begin(), index);
    member_po.parameters = parameters(root);
    ParseOptions limit_po = member_po;
    limit_po.variables = vars;
    const Expr member = expression(root, "member", member_po);
    const Expr limit = expression(root, "limit", limit_po);

    LabConfig lab;
    lab.k_max = ov.k_max ? *ov.k_max : root.count("k_max", lab.k_max);
    lab.tail = root.count("tail", lab.k_max / 2);
    lab.sample_points = root.count("sample_points", lab.sample_points);
    lab.compact_points = root.count("compact_points", lab.compact_points);
    lab.pointwise_eps = root.number("pointwise_eps", lab.pointwise_eps);
    lab.uniform_eps = root.number("uniform_eps", lab.uniform_eps);
    lab.cont_eps = root.number("cont_eps", lab.cont_eps);
    lab.probes_per_point = static_cast<int>(root.count("probes_per_point", static_cast<std::size_t>(lab.probes_per_point)));
    lab.eps_ladder = root.numbers("eps_ladder", lab.eps_ladder);
    lab.delta_ladder = root.numbers("delta_ladder", lab.delta_ladder);
    lab.members_continuous = root.flag("members_continuous", lab.members_continuous);
    check_ladder(root, "eps_ladder", lab.eps_ladder);
    check_ladder(root, "delta_ladder", lab.delta_ladder);
    if (lab.k_max < 2) root.fail("k_max must be at least 2");
    if (lab.tail < 1 || lab.tail >= lab.k_max) root.fail("tail must lie in [1, k_max)");
    if (lab.sample_points < 2 || lab.compact_points < 2) root.fail("sample_points and compact_points must be at least 2");
    if (lab.probes_per_point < 1) root.at("probes_per_point").fail("probes_per_point must be at least 1");
    for (double e : {lab.pointwise_eps, lab.uniform_eps, lab.cont_eps})
        if (!(e > 0.0)) root.fail("eps values must be positive");

    FnSeq seq = guarded(root, [&] { return FnSeq::from_expr(member, limit, box, lab.k_max); });
    json resolved = {{"member", root.text("member")},
                     {"limit", root.text("limit")},
                     {"box", {{"lo", box.lo}, {"hi", box.hi}}},
                     {"variables", vars},
                     {"index", index},
                     {"parameters", member_po.parameters},
                     {"lab", to_json(lab)}};
    return {std::move(seq), std::move(lab), std::move(resolved)};
}

} // namespace fdedep::cli
