#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <memory>
#include <utility>
#include <vector>

namespace malab {

using Rational = boost::multiprecision::cpp_rational;

// One step of the middle-interval removal scheme on [-1/2, 1/2]: step k
// removes from the center of each surviving interval an open interval
// covering the fraction 5/(k+5) of its length.
struct CantorLevel {
    int k = 0;
    Rational removed_length;         // length of each interval removed here
    Rational survivor_length;        // length of each interval that remains
    std::uint64_t removed_count = 0;  // 2^(k-1)
    std::uint64_t survivor_count = 0; // 2^k
    // Explicit geometry, populated only for k <= list_depth (the counts grow
    // geometrically, so deep levels keep lengths without the lists).
    std::vector<Rational> centers;  // removed-interval centers, ascending
    // surviving closed intervals after this step, ascending and disjoint
    std::vector<std::pair<Rational, Rational>> survivors;
};

// Exact record of the removal scheme down to a fixed depth. All lengths are
// rationals, so conservation of total length and the closed-form products
// for the level lengths hold exactly at any depth.
struct CantorStructure {
    int depth = 0;
    int list_depth = 0;  // deepest level carrying explicit interval lists
    std::vector<CantorLevel> levels;  // levels[k-1] describes step k

    const CantorLevel& level(int k) const { return levels.at(static_cast<std::size_t>(k) - 1); }

    // Endpoints of the survivors at list_depth, ascending. Every endpoint
    // stays an endpoint at all later depths, so these are points of the
    // limit set.
    std::vector<Rational> survivor_endpoints() const;

    // Total removed length plus total surviving length, exactly.
    Rational conservation_sum() const;
};

// Runs the removal scheme for `depth` steps. Requires 1 <= depth <= 60.
// Explicit center and survivor lists are kept for the first list_depth
// levels (negative selects min(depth, 16)); lengths stay exact throughout.
CantorStructure build_cantor(int depth, int list_depth = -1);

// Convex piecewise-linear profile each spike is built from: |x| inside the
// unit band, 2|x| - 1 outside. Continuous at |x| = 1, slope jump 2 at 0.
double spike_profile(double x);

// One-sided slope pair of a convex function of one variable.
struct SlopeInterval {
    double lo = 0;  // left derivative
    double hi = 0;  // right derivative
};

// Truncated series value together with a rigorous bound on the omitted
// levels, so callers can treat the evaluation as value +- tail.
struct SpikeValue {
    double value = 0;
    double tail = 0;
};

// Sum of rescaled copies of spike_profile, one per removed-interval center:
// levels k = 1..depth contribute weight k^4 l_k^2 at horizontal scale l_k.
// The sum of convex summands is convex; each center carries a slope jump of
// at least 2 k^4 l_k. Evaluations are pure and safe to run concurrently.
// depth must not exceed the structure's list_depth.
class SpikeFunction {
public:
    SpikeFunction(std::shared_ptr<const CantorStructure> cantor, int depth);

    double value(double x) const;
    SpikeValue value_with_tail(double x) const;
    SlopeInterval subgradient(double x) const;

    // Exact twins of value/subgradient for rational abscissas: every center,
    // length and profile value is rational, so these carry no rounding at
    // all. Cost grows with 2^depth; intended for endpoint-scale audits.
    Rational value_exact(const Rational& x) const;
    std::pair<Rational, Rational> subgradient_exact(const Rational& x) const;

    // Separation from the tangent line of right slope at x, measured a
    // distance r to the right and normalized by r^2 |log r|^4. Requires
    // l_K < r <= l_1 with K the structure depth; other radii are rejected
    // (std::domain_error). Double arithmetic cannot resolve slope kinks at
    // abscissas that are not exactly representable, so values within about
    // |kink jump| * r of zero are noise; separation_exact settles those.
    double separation_ratio(double x, double r) const;

    // Unnormalized exact separation v(x+r) - v(x) - s.r with s the right
    // slope at x. Nonnegative by convexity; exactly zero iff the truncated
    // sum is affine on [x, x+r] (this happens inside removed intervals).
    // Same radius guard as separation_ratio, plus |x|, |x+r| <= 1.
    Rational separation_exact(const Rational& x, const Rational& r) const;

    // The k with l_k < r <= l_{k-1} (l_0 treated as +infinity), scanning
    // the full structure; returns structure depth + 1 if r <= l_K.
    int level_of_gap(double r) const;

    int depth() const { return depth_; }
    const CantorStructure& cantor() const { return *cantor_; }
    // Upper bound for the sup norm of the levels beyond `depth`.
    double tail_bound() const { return tail_; }
    // Finite upper bound for the sup norm of the full series.
    double sup_bound() const { return sup_; }

private:
    struct Level {
        double scale = 0;   // l_k
        double weight = 0;  // k^4 l_k^2
        std::vector<double> centers;
    };

    std::shared_ptr<const CantorStructure> cantor_;
    int depth_ = 0;
    std::vector<Level> levels_;  // per-level doubles, the evaluation cache
    std::vector<double> gap_lengths_;  // l_1..l_K (structure depth) as doubles
    double tail_ = 0;
    double sup_ = 0;
};

}  // namespace malab
