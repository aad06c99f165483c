#pragma once

#include "fdedep/expr.hpp"
#include "fdedep/sampled_fn.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fdedep {

// Finite, falsification-oriented versions of the convergence notions for
// sequences of functions. A Refuted verdict carries a replayable witness; a
// ConsistentUpTo verdict only says no counterexample was found at the stated
// resolution, it is never a proof.

using Point = std::vector<double>;

/// Axis-aligned box in R^d with the max-abs metric.
struct Box {
    Point lo;
    Point hi;

    std::size_t dim() const noexcept { return lo.size(); }
    bool contains(std::span<const double> p) const;
    Point clamp(Point p) const;
};

/// Tensor grid with `per_axis` points per coordinate, endpoints included.
std::vector<Point> grid_points(const Box& box, std::size_t per_axis);

/// Scalar sequence k -> f_k on a box together with its declared limit f0.
class FnSeq {
public:
    using Member = std::function<double(std::size_t, std::span<const double>)>;
    using Limit = std::function<double(std::span<const double>)>;

    FnSeq(Member member, Limit limit, Box box, std::size_t k_max);

    /// `member` uses the variables (k, x1..xd); `limit` uses (x1..xd).
    static FnSeq from_expr(const Expr& member, const Expr& limit, Box box, std::size_t k_max);

    double operator()(std::size_t k, std::span<const double> x) const { return member_(k, x); }
    double limit(std::span<const double> x) const { return limit_(x); }
    const Box& box() const noexcept { return box_; }
    std::size_t k_max() const noexcept { return k_max_; }

    /// Same family materialized up to a different index.
    FnSeq with_k_max(std::size_t k_max) const { return {member_, limit_, box_, k_max}; }

private:
    Member member_;
    Limit limit_;
    Box box_;
    std::size_t k_max_;
};

struct LabConfig {
    std::size_t k_max = 256;
    std::size_t tail = 128;
    std::size_t sample_points = 17;   ///< per axis
    std::size_t compact_points = 1025; ///< per axis
    double pointwise_eps = 1e-2;
    double uniform_eps = 1e-2;
    double cont_eps = 1e-1;
    int probes_per_point = 16;
    std::vector<double> eps_ladder{1e-1, 1e-2, 1e-3};
    std::vector<double> delta_ladder = default_delta_ladder();
    /// Members are continuous, so uniform convergence on compacta implies continuous convergence.
    bool members_continuous = true;

    static std::vector<double> default_delta_ladder();
};

enum class VerdictTag { Refuted, ConsistentUpTo };

enum class GapKind {
    Pointwise,   ///< |f_n(x) - f0(x)|
    Oscillation, ///< |f_n(x) - f_n(t)|, or |f0(x) - f0(t)| when n == 0
    Approach,    ///< |f_n(t) - f0(x)| with t = x_n
};

struct Witness {
    GapKind kind = GapKind::Pointwise;
    Point x;
    Point t;
    std::size_t n = 0;
    double gap = 0.0;
    double eps = 0.0;
    std::string probe;
    /// Probe sequence (n_i, x_{n_i}) behind the witness.
    std::vector<std::size_t> sequence_n;
    std::vector<Point> sequence_x;
};

struct Resolution {
    double grid_step = 0.0;
    std::vector<double> eps_ladder;
    std::vector<double> delta_ladder;
    std::size_t k_max = 0;
    std::size_t tail = 0;
};

struct Verdict {
    std::string check;
    VerdictTag tag = VerdictTag::ConsistentUpTo;
    std::optional<Witness> witness;
    Resolution resolution;

    bool refuted() const noexcept { return tag == VerdictTag::Refuted; }
};

/// Recomputes the gap a witness describes.
double replay(const FnSeq& seq, const Witness& w);

/// Refuted if |f_k(x) - f0(x)| > eps at a sample point for some k among the last `tail` indices.
Verdict check_pointwise(const FnSeq& seq, const std::vector<Point>& points, double eps, std::size_t tail);

/// Refuted at (x, eps) when every delta of the ladder admits a sampled t with d(x, t) < delta
/// and an index n in the tail with |f_n(x) - f_n(t)| >= eps. The witness reports, for each
/// tail n, the worst probe of the coarsest ball.
Verdict check_exhaustive(const FnSeq& seq, const std::vector<Point>& points, const std::vector<double>& eps_ladder,
                         const std::vector<double>& delta_ladder, std::size_t tail);

/// Like check_exhaustive, but each probe t gets its own index window [K_t / 2, K_t] with
/// K_t = max(k_max, ceil(32 / d(x, t))); t violates when the gap is >= eps at every sampled
/// index of its window.
Verdict check_weak_exhaustive(const FnSeq& seq, const std::vector<Point>& points,
                              const std::vector<double>& eps_ladder, const std::vector<double>& delta_ladder,
                              std::size_t tail);

/// Battery of probe sequences x_n -> x: constant, x +- 2^-n, x +- 1/n along each axis, and an
/// adversarial argmax of |f_n(t) - f0(x)| over `probes_per_point` candidates per side within 2/n.
/// Refuted when some probe keeps the gap >= eps on the whole tail.
Verdict check_continuous_convergence(const FnSeq& seq, const std::vector<Point>& points, int probes_per_point,
                                     double eps, std::size_t tail);

/// Refuted if sup over the grid of |f_k - f0| > eps for some tail k.
Verdict check_uniform_on_compacta(const FnSeq& seq, const std::vector<Point>& grid, double eps, std::size_t tail);

/// Discontinuity witness of f0 at the sample points (same ladders as the exhaustive check), if any.
std::optional<Witness> limit_discontinuity(const FnSeq& seq, const std::vector<Point>& points,
                                           const std::vector<double>& eps_ladder,
                                           const std::vector<double>& delta_ladder);

struct Inconsistency {
    std::string rule;
    std::string detail;
};

struct ConsistencyMatrix {
    Verdict pointwise;
    Verdict exhaustive;
    Verdict weak_exhaustive;
    Verdict continuous;
    Verdict uniform;
    bool limit_continuous = true;
    std::optional<Witness> limit_witness;
    std::vector<Inconsistency> inconsistencies;
    LabConfig config;

    bool any_refuted() const;
};

/// Runs every checker and flags verdict combinations that contradict the known implications:
/// continuous convergence <=> pointwise + exhaustive; under pointwise convergence,
/// weakly exhaustive <=> continuous limit; continuous convergence => uniform on compacta
/// (and back for continuous members); exhaustive => weakly exhaustive.
ConsistencyMatrix cross_check(const FnSeq& seq, const LabConfig& config = {});

/// Sequence with index-dependent domains D_k (index 0 is the limit's domain), vector valued.
struct VaryingSeq {
    std::function<Vec(std::size_t, const Point&)> member;
    std::function<bool(std::size_t, const Point&)> in_domain;
    std::function<Vec(const Point&)> limit;
    std::size_t k_max = 0;
};

/// Probe sequence generator: x0 -> x_k.
struct Probe {
    std::string name;
    std::function<Point(std::size_t, const Point&)> at;
};

/// Refuted when some probe keeps |f_k(x_k) - f0(x0)| >= eps for every k in [first, k_max].
/// Throws ProbeOutOfDomain if a probe leaves D_k.
Verdict check_generalized_cont_convergence(const VaryingSeq& seq, const std::vector<Point>& points,
                                           const std::vector<Probe>& probes, double eps, std::size_t first);

double replay(const VaryingSeq& seq, const Witness& w);

/// Constant, geometric (+-c 2^-k), harmonic (+-c / k) probes along each axis, clamped by `project`.
std::vector<Probe> standard_probes(std::size_t dim, double scale,
                                   std::function<Point(std::size_t, Point)> project);

/// Argmax of |f_k(t) - f0(x0)| over `per_side` candidates per axis direction within radius/k, clamped by `project`.
Probe adversarial_probe(const VaryingSeq& seq, double radius, int per_side,
                        std::function<Point(std::size_t, Point)> project);

std::string_view to_string(VerdictTag tag);
std::string_view to_string(GapKind kind);

} // namespace fdedep
