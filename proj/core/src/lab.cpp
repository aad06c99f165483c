#include "fdedep/lab.hpp"

#include "fdedep/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fdedep {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct AxisProbe {
    double d;
    Point t;
};

// Probe distances dmax * 2^(-j/16), j >= 1, down to a quarter of the finest delta.
std::vector<double> probe_distances(const std::vector<double>& delta_ladder) {
    if (delta_ladder.empty()) throw InvalidArgument("delta ladder is empty");
    const double dmax = *std::max_element(delta_ladder.begin(), delta_ladder.end());
    const double dmin = *std::min_element(delta_ladder.begin(), delta_ladder.end());
    if (!(dmin > 0.0)) throw InvalidArgument("delta ladder entries must be positive");
    std::vector<double> out;
    for (int j = 1;; ++j) {
        const double d = dmax * std::exp2(-j / 16.0);
        if (d < 0.25 * dmin) break;
        out.push_back(d);
    }
    return out;
}

// Points at the given distances from x along every axis direction that stay in the box.
std::vector<AxisProbe> axis_probes(const Box& box, const Point& x, const std::vector<double>& distances) {
    std::vector<AxisProbe> out;
    for (double d : distances) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (double s : {1.0, -1.0}) {
                Point t = x;
                t[i] += s * d;
                if (box.contains(t)) out.push_back({d, std::move(t)});
            }
        }
    }
    return out;
}

std::size_t tail_begin(std::size_t k_max, std::size_t tail) {
    if (tail > k_max) throw InvalidArgument("tail exceeds k_max");
    return std::max<std::size_t>(1, k_max - tail);
}

double grid_step_of(const std::vector<Point>& pts) {
    double step = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double d = 0.0;
        for (std::size_t c = 0; c < pts[i].size(); ++c) d = std::max(d, std::abs(pts[i][c] - pts[i - 1][c]));
        if (d > 0.0 && (step == 0.0 || d < step)) step = d;
    }
    return step;
}

Resolution resolution_of(const std::vector<Point>& pts, std::vector<double> eps, std::vector<double> delta,
                         std::size_t k_max, std::size_t tail) {
    return {grid_step_of(pts), std::move(eps), std::move(delta), k_max, tail};
}

double min_delta(const std::vector<double>& ladder) { return *std::min_element(ladder.begin(), ladder.end()); }
double max_delta(const std::vector<double>& ladder) { return *std::max_element(ladder.begin(), ladder.end()); }

// Up to `count` distinct indices spread evenly over [lo, hi].
std::vector<std::size_t> sample_indices(std::size_t lo, std::size_t hi, std::size_t count) {
    std::vector<std::size_t> out;
    if (hi <= lo) return {hi};
    for (std::size_t i = 0; i < count; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(count - 1);
        const auto n = lo + static_cast<std::size_t>(std::llround(u * static_cast<double>(hi - lo)));
        if (out.empty() || out.back() != n) out.push_back(n);
    }
    return out;
}

} // namespace

bool Box::contains(std::span<const double> p) const {
    if (p.size() != lo.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double tol = 1e-12 * std::max(1.0, std::max(std::abs(lo[i]), std::abs(hi[i])));
        if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
    }
    return true;
}

Point Box::clamp(Point p) const {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::min(hi[i], std::max(lo[i], p[i]));
    return p;
}

std::vector<Point> grid_points(const Box& box, std::size_t per_axis) {
    if (box.dim() == 0 || box.hi.size() != box.dim()) throw InvalidArgument("box needs matching lo/hi");
    if (per_axis < 2) throw InvalidArgument("grid needs at least 2 points per axis");
    for (std::size_t i = 0; i < box.dim(); ++i)
        if (!(box.lo[i] < box.hi[i])) throw InvalidArgument("box must have lo < hi on every axis");
    std::vector<Point> out;
    std::vector<std::size_t> idx(box.dim(), 0);
    for (;;) {
        Point p(box.dim());
        for (std::size_t i = 0; i < box.dim(); ++i) {
            const double u = static_cast<double>(idx[i]) / static_cast<double>(per_axis - 1);
            p[i] = idx[i] + 1 == per_axis ? box.hi[i] : box.lo[i] + u * (box.hi[i] - box.lo[i]);
        }
        out.push_back(std::move(p));
        std::size_t axis = 0;
        while (axis < box.dim() && ++idx[axis] == per_axis) idx[axis++] = 0;
        if (axis == box.dim()) break;
    }
    return out;
}

FnSeq::FnSeq(Member member, Limit limit, Box box, std::size_t k_max)
    : member_(std::move(member)), limit_(std::move(limit)), box_(std::move(box)), k_max_(k_max) {
    if (k_max_ < 2) throw InvalidArgument("k_max must be at least 2");
    if (box_.dim() == 0 || box_.hi.size() != box_.dim()) throw InvalidArgument("box needs matching lo/hi");
}

FnSeq FnSeq::from_expr(const Expr& member, const Expr& limit, Box box, std::size_t k_max) {
    const std::size_t d = box.dim();
    if (member.variables().size() != d + 1) throw InvalidArgument("member expression needs variables (k, x...)");
    if (limit.variables().size() != d) throw InvalidArgument("limit expression needs variables (x...)");
    auto m = [member, d](std::size_t k, std::span<const double> x) {
        double vars[16];
        if (d + 1 > 16) throw InvalidArgument("too many dimensions");
        vars[0] = static_cast<double>(k);
        std::copy(x.begin(), x.end(), vars + 1);
        return member.eval(std::span<const double>(vars, d + 1));
    };
    auto l = [limit](std::span<const double> x) { return limit.eval(x); };
    return {m, l, std::move(box), k_max};
}

std::vector<double> LabConfig::default_delta_ladder() {
    std::vector<double> out;
    for (int j = 1; j <= 12; ++j) out.push_back(std::exp2(-j));
    return out;
}

double replay(const FnSeq& seq, const Witness& w) {
    switch (w.kind) {
    case GapKind::Pointwise: return std::abs(seq(w.n, w.x) - seq.limit(w.x));
    case GapKind::Oscillation:
        if (w.n == 0) return std::abs(seq.limit(w.x) - seq.limit(w.t));
        return std::abs(seq(w.n, w.x) - seq(w.n, w.t));
    case GapKind::Approach: return std::abs(seq(w.n, w.t) - seq.limit(w.x));
    }
    return 0.0;
}

Verdict check_pointwise(const FnSeq& seq, const std::vector<Point>& points, double eps, std::size_t tail) {
    Verdict v{"pointwise", VerdictTag::ConsistentUpTo, std::nullopt,
              resolution_of(points, {eps}, {}, seq.k_max(), tail)};
    const std::size_t first = tail_begin(seq.k_max(), tail);
    for (const auto& x : points) {
        const double f0 = seq.limit(x);
        double worst = 0.0;
        std::size_t worst_n = 0;
        for (std::size_t n = first; n <= seq.k_max(); ++n) {
            const double g = std::abs(seq(n, x) - f0);
            if (g > worst) {
                worst = g;
                worst_n = n;
            }
        }
        if (worst > eps) {
            v.tag = VerdictTag::Refuted;
            v.witness = Witness{GapKind::Pointwise, x, x, worst_n, worst, eps, "constant", {worst_n}, {x}};
            return v;
        }
    }
    return v;
}

Verdict check_exhaustive(const FnSeq& seq, const std::vector<Point>& points, const std::vector<double>& eps_ladder,
                         const std::vector<double>& delta_ladder, std::size_t tail) {
    Verdict v{"exhaustive", VerdictTag::ConsistentUpTo, std::nullopt,
              resolution_of(points, eps_ladder, delta_ladder, seq.k_max(), tail)};
    const std::size_t first = tail_begin(seq.k_max(), tail);
    const auto distances = probe_distances(delta_ladder);
    const double finest = min_delta(delta_ladder);
    const double coarsest = max_delta(delta_ladder);

    for (const auto& x : points) {
        const auto probes = axis_probes(seq.box(), x, distances);
        std::vector<double> fx;
        for (std::size_t n = first; n <= seq.k_max(); ++n) fx.push_back(seq(n, x));

        // A larger delta only adds probes, so the finest ball decides refutation.
        double binding = 0.0;
        for (const auto& p : probes) {
            if (p.d >= finest) continue;
            for (std::size_t n = first; n <= seq.k_max(); ++n)
                binding = std::max(binding, std::abs(fx[n - first] - seq(n, p.t)));
        }
        for (double eps : eps_ladder) {
            if (binding < eps) continue;
            Witness w{GapKind::Oscillation, x, x, first, 0.0, eps, "coarsest-ball argmax", {}, {}};
            for (std::size_t n = first; n <= seq.k_max(); ++n) {
                double best = -1.0;
                const Point* best_t = &x;
                for (const auto& p : probes) {
                    if (p.d >= coarsest) continue;
                    const double g = std::abs(fx[n - first] - seq(n, p.t));
                    if (g > best) {
                        best = g;
                        best_t = &p.t;
                    }
                }
                w.sequence_n.push_back(n);
                w.sequence_x.push_back(*best_t);
                if (best > w.gap) {
                    w.gap = best;
                    w.n = n;
                    w.t = *best_t;
                }
            }
            v.tag = VerdictTag::Refuted;
            v.witness = std::move(w);
            return v;
        }
    }
    return v;
}

Verdict check_weak_exhaustive(const FnSeq& seq, const std::vector<Point>& points,
                              const std::vector<double>& eps_ladder, const std::vector<double>& delta_ladder,
                              std::size_t tail) {
    Verdict v{"weak_exhaustive", VerdictTag::ConsistentUpTo, std::nullopt,
              resolution_of(points, eps_ladder, delta_ladder, seq.k_max(), tail)};
    const std::size_t floor_n = tail_begin(seq.k_max(), tail);
    const auto distances = probe_distances(delta_ladder);
    const double finest = min_delta(delta_ladder);
    constexpr std::size_t kWindowSamples = 17;

    for (const auto& x : points) {
        double best_eps = 0.0;
        std::optional<Witness> best;
        for (const auto& p : axis_probes(seq.box(), x, distances)) {
            if (p.d >= finest) continue;
            const auto k_t = std::max<std::size_t>(seq.k_max(), static_cast<std::size_t>(std::ceil(32.0 / p.d)));
            const std::size_t lo = std::max(floor_n, k_t / 2);
            const auto ns = sample_indices(lo, k_t, kWindowSamples);
            double min_gap = kInf;
            for (std::size_t n : ns) min_gap = std::min(min_gap, std::abs(seq(n, x) - seq(n, p.t)));
            for (double eps : eps_ladder) {
                if (min_gap >= eps && eps > best_eps) {
                    best_eps = eps;
                    Witness w{GapKind::Oscillation, x, p.t, k_t, std::abs(seq(k_t, x) - seq(k_t, p.t)),
                              eps, "per-probe window", ns, std::vector<Point>(ns.size(), p.t)};
                    best = std::move(w);
                }
            }
        }
        if (best) {
            v.tag = VerdictTag::Refuted;
            v.witness = std::move(best);
            return v;
        }
    }
    return v;
}

Verdict check_continuous_convergence(const FnSeq& seq, const std::vector<Point>& points, int probes_per_point,
                                     double eps, std::size_t tail) {
    if (probes_per_point < 1) throw InvalidArgument("probes_per_point must be at least 1");
    const Box box = seq.box();
    VaryingSeq vs{[seq](std::size_t k, const Point& x) { return Vec{seq(k, x)}; },
                  [box](std::size_t, const Point& x) { return box.contains(x); },
                  [seq](const Point& x) { return Vec{seq.limit(x)}; }, seq.k_max()};
    auto project = [box](std::size_t, Point p) { return box.clamp(std::move(p)); };
    auto probes = standard_probes(box.dim(), 0.5, project);
    probes.push_back(adversarial_probe(vs, 2.0, probes_per_point, project));
    Verdict v = check_generalized_cont_convergence(vs, points, probes, eps, tail_begin(seq.k_max(), tail));
    v.check = "continuous_convergence";
    v.resolution.tail = tail;
    return v;
}

Verdict check_uniform_on_compacta(const FnSeq& seq, const std::vector<Point>& grid, double eps, std::size_t tail) {
    Verdict v{"uniform_on_compacta", VerdictTag::ConsistentUpTo, std::nullopt,
              resolution_of(grid, {eps}, {}, seq.k_max(), tail)};
    const std::size_t first = tail_begin(seq.k_max(), tail);
    std::vector<double> f0;
    f0.reserve(grid.size());
    for (const auto& x : grid) f0.push_back(seq.limit(x));
    double worst = 0.0;
    std::size_t worst_n = 0;
    std::size_t worst_i = 0;
    for (std::size_t n = first; n <= seq.k_max(); ++n) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double g = std::abs(seq(n, grid[i]) - f0[i]);
            if (g > worst) {
                worst = g;
                worst_n = n;
                worst_i = i;
            }
        }
    }
    if (worst > eps) {
        v.tag = VerdictTag::Refuted;
        v.witness = Witness{GapKind::Pointwise, grid[worst_i], grid[worst_i], worst_n, worst, eps, "grid sup",
                            {worst_n}, {grid[worst_i]}};
    }
    return v;
}

std::optional<Witness> limit_discontinuity(const FnSeq& seq, const std::vector<Point>& points,
                                           const std::vector<double>& eps_ladder,
                                           const std::vector<double>& delta_ladder) {
    const auto distances = probe_distances(delta_ladder);
    const double finest = min_delta(delta_ladder);
    for (const auto& x : points) {
        const double f0 = seq.limit(x);
        double worst = 0.0;
        std::optional<Point> worst_t;
        for (const auto& p : axis_probes(seq.box(), x, distances)) {
            if (p.d >= finest) continue;
            const double g = std::abs(f0 - seq.limit(p.t));
            if (g > worst) {
                worst = g;
                worst_t = p.t;
            }
        }
        for (double eps : eps_ladder) {
            if (worst_t && worst >= eps)
                return Witness{GapKind::Oscillation, x, *worst_t, 0, worst, eps, "limit", {0}, {*worst_t}};
        }
    }
    return std::nullopt;
}

bool ConsistencyMatrix::any_refuted() const {
    return pointwise.refuted() || exhaustive.refuted() || weak_exhaustive.refuted() || continuous.refuted() ||
           uniform.refuted();
}

ConsistencyMatrix cross_check(const FnSeq& seq_in, const LabConfig& cfg) {
    const FnSeq seq = seq_in.with_k_max(cfg.k_max);
    const auto points = grid_points(seq.box(), cfg.sample_points);
    std::size_t compact_axis = cfg.compact_points;
    if (seq.box().dim() > 1)
        compact_axis = std::max<std::size_t>(
            cfg.sample_points,
            static_cast<std::size_t>(std::pow(static_cast<double>(cfg.compact_points), 1.0 / seq.box().dim())));
    const auto compact = grid_points(seq.box(), compact_axis);

    ConsistencyMatrix m{
        check_pointwise(seq, points, cfg.pointwise_eps, cfg.tail),
        check_exhaustive(seq, points, cfg.eps_ladder, cfg.delta_ladder, cfg.tail),
        check_weak_exhaustive(seq, points, cfg.eps_ladder, cfg.delta_ladder, cfg.tail),
        check_continuous_convergence(seq, points, cfg.probes_per_point, cfg.cont_eps, cfg.tail),
        check_uniform_on_compacta(seq, compact, cfg.uniform_eps, cfg.tail),
        true,
        limit_discontinuity(seq, points, cfg.eps_ladder, cfg.delta_ladder),
        {},
        cfg};
    m.limit_continuous = !m.limit_witness.has_value();

    const bool pw = !m.pointwise.refuted();
    const bool ex = !m.exhaustive.refuted();
    const bool weak = !m.weak_exhaustive.refuted();
    const bool cont = !m.continuous.refuted();
    const bool unif = !m.uniform.refuted();
    auto yes = [](bool b) { return b ? "consistent" : "refuted"; };
    if (cont != (pw && ex))
        m.inconsistencies.push_back({"continuous <=> pointwise and exhaustive",
                                     std::string("continuous ") + yes(cont) + ", pointwise " + yes(pw) +
                                         ", exhaustive " + yes(ex)});
    if (pw && weak != m.limit_continuous)
        m.inconsistencies.push_back({"pointwise => (weakly exhaustive <=> continuous limit)",
                                     std::string("weak exhaustive ") + yes(weak) + ", limit " +
                                         (m.limit_continuous ? "continuous" : "discontinuous")});
    if (cont && !unif)
        m.inconsistencies.push_back({"continuous => uniform on compacta", "uniform check refuted"});
    if (cfg.members_continuous && unif && !cont)
        m.inconsistencies.push_back({"uniform on compacta => continuous (continuous members)",
                                     "continuous convergence refuted"});
    if (ex && !weak) m.inconsistencies.push_back({"exhaustive => weakly exhaustive", "weak check refuted"});
    return m;
}

Verdict check_generalized_cont_convergence(const VaryingSeq& seq, const std::vector<Point>& points,
                                           const std::vector<Probe>& probes, double eps, std::size_t first) {
    if (first < 1 || first > seq.k_max) throw InvalidArgument("tail start must lie in [1, k_max]");
    Verdict v{"generalized_continuous_convergence", VerdictTag::ConsistentUpTo, std::nullopt,
              resolution_of(points, {eps}, {}, seq.k_max, seq.k_max - first)};
    for (const auto& x : points) {
        if (!seq.in_domain(0, x)) throw ProbeOutOfDomain("sample point outside the limit's domain");
        const Vec f0 = seq.limit(x);
        for (const auto& probe : probes) {
            bool stays = true;
            Witness w{GapKind::Approach, x, x, 0, 0.0, eps, probe.name, {}, {}};
            for (std::size_t k = first; k <= seq.k_max; ++k) {
                Point xk = probe.at(k, x);
                if (!seq.in_domain(k, xk))
                    throw ProbeOutOfDomain("probe '" + probe.name + "' leaves the domain at index " +
                                           std::to_string(k));
                const Vec fk = seq.member(k, xk);
                double g = 0.0;
                for (std::size_t c = 0; c < fk.size(); ++c) g = std::max(g, std::abs(fk[c] - f0[c]));
                if (!(g >= eps)) {
                    stays = false;
                    break;
                }
                w.sequence_n.push_back(k);
                w.sequence_x.push_back(xk);
                w.n = k;
                w.t = std::move(xk);
                w.gap = g;
            }
            if (stays) {
                v.tag = VerdictTag::Refuted;
                v.witness = std::move(w);
                return v;
            }
        }
    }
    return v;
}

double replay(const VaryingSeq& seq, const Witness& w) {
    const Vec fk = seq.member(w.n, w.t);
    const Vec f0 = seq.limit(w.x);
    double g = 0.0;
    for (std::size_t c = 0; c < fk.size(); ++c) g = std::max(g, std::abs(fk[c] - f0[c]));
    return g;
}

std::vector<Probe> standard_probes(std::size_t dim, double scale, std::function<Point(std::size_t, Point)> project) {
    std::vector<Probe> out;
    out.push_back({"constant", [](std::size_t, const Point& x) { return x; }});
    for (std::size_t i = 0; i < dim; ++i) {
        for (double s : {1.0, -1.0}) {
            const std::string dir = std::string(s > 0 ? "+" : "-") + "e" + std::to_string(i + 1);
            out.push_back({"geometric(" + dir + ")", [=](std::size_t k, const Point& x) {
                               Point p = x;
                               p[i] += s * std::ldexp(scale, -static_cast<int>(std::min<std::size_t>(k, 2000)));
                               return project(k, std::move(p));
                           }});
            out.push_back({"harmonic(" + dir + ")", [=](std::size_t k, const Point& x) {
                               Point p = x;
                               p[i] += s * scale / static_cast<double>(k);
                               return project(k, std::move(p));
                           }});
        }
    }
    return out;
}

Probe adversarial_probe(const VaryingSeq& seq, double radius, int per_side,
                        std::function<Point(std::size_t, Point)> project) {
    return {"adversarial", [seq, radius, per_side, project](std::size_t k, const Point& x) {
                const Vec f0 = seq.limit(x);
                const double rk = radius / static_cast<double>(k);
                Point best = project(k, x);
                double best_gap = -1.0;
                auto consider = [&](Point t) {
                    const Vec fk = seq.member(k, t);
                    double g = 0.0;
                    for (std::size_t c = 0; c < fk.size(); ++c) g = std::max(g, std::abs(fk[c] - f0[c]));
                    if (g > best_gap) {
                        best_gap = g;
                        best = std::move(t);
                    }
                };
                consider(project(k, x));
                for (std::size_t i = 0; i < x.size(); ++i)
                    for (double s : {1.0, -1.0})
                        for (int j = 1; j <= per_side; ++j) {
                            Point t = x;
                            t[i] += s * (static_cast<double>(j) / per_side) * rk;
                            consider(project(k, std::move(t)));
                        }
                return best;
            }};
}

std::string_view to_string(VerdictTag tag) {
    return tag == VerdictTag::Refuted ? "Refuted" : "ConsistentUpTo";
}

std::string_view to_string(GapKind kind) {
    switch (kind) {
    case GapKind::Pointwise: return "pointwise";
    case GapKind::Oscillation: return "oscillation";
    case GapKind::Approach: return "approach";
    }
    return "";
}

} // namespace fdedep
