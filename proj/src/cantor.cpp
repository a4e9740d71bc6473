#include "malab/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace malab {

std::vector<Rational> CantorStructure::survivor_endpoints() const {
    std::vector<Rational> out;
    if (list_depth < 1) return out;
    const auto& last = level(list_depth).survivors;
    out.reserve(2 * last.size());
    for (const auto& iv : last) {
        out.push_back(iv.first);
        out.push_back(iv.second);
    }
    return out;
}

Rational CantorStructure::conservation_sum() const {
    Rational total = 0;
    for (const auto& lv : levels)
        total += Rational(lv.removed_count) * lv.removed_length;
    if (!levels.empty())
        total += Rational(levels.back().survivor_count) *
                 levels.back().survivor_length;
    return total;
}

CantorStructure build_cantor(int depth, int list_depth) {
    if (depth < 1 || depth > 60)
        throw std::invalid_argument("build_cantor: depth must be in [1, 60]");
    if (list_depth < 0) list_depth = std::min(depth, 16);
    list_depth = std::min(list_depth, depth);
    if (list_depth < 1 || list_depth > 24)
        throw std::invalid_argument("build_cantor: list_depth must be in [1, 24]");

    CantorStructure s;
    s.depth = depth;
    s.list_depth = list_depth;
    s.levels.reserve(static_cast<std::size_t>(depth));

    std::vector<std::pair<Rational, Rational>> survivors = {
        {Rational(-1, 2), Rational(1, 2)}};
    Rational survivor_length = 1;

    for (int k = 1; k <= depth; ++k) {
        CantorLevel lv;
        lv.k = k;
        lv.removed_length = survivor_length * Rational(5, k + 5);
        lv.survivor_length = (survivor_length - lv.removed_length) / 2;
        lv.removed_count = std::uint64_t(1) << (k - 1);
        lv.survivor_count = std::uint64_t(1) << k;

        if (k <= list_depth) {
            lv.centers.reserve(survivors.size());
            lv.survivors.reserve(2 * survivors.size());
            const Rational half = lv.removed_length / 2;
            for (const auto& iv : survivors) {
                const Rational mid = (iv.first + iv.second) / 2;
                lv.centers.push_back(mid);
                lv.survivors.emplace_back(iv.first, mid - half);
                lv.survivors.emplace_back(mid + half, iv.second);
            }
            survivors = lv.survivors;
        }

        survivor_length = lv.survivor_length;
        s.levels.push_back(std::move(lv));
    }
    return s;
}

double spike_profile(double x) {
    const double a = std::abs(x);
    return a <= 1.0 ? a : 2.0 * a - 1.0;
}

namespace {

// One-sided derivatives of spike_profile. side = -1 approaches from the
// left, +1 from the right.
double profile_slope(double x, int side) {
    const double s = static_cast<double>(side);
    if (x == 0.0) return s;
    if (x == 1.0) return side < 0 ? 1.0 : 2.0;
    if (x == -1.0) return side < 0 ? -2.0 : -1.0;
    const double a = std::abs(x);
    const double base = a < 1.0 ? 1.0 : 2.0;
    return x > 0 ? base : -base;
}

// spike_profile over the rationals, branch selection by exact comparison.
Rational profile_exact(const Rational& x) {
    const Rational a = abs(x);
    return a <= 1 ? a : 2 * a - 1;
}

// One-sided derivatives of spike_profile over the rationals.
Rational profile_slope_exact(const Rational& x, int side) {
    if (x == 0) return side;
    if (x == 1) return side < 0 ? 1 : 2;
    if (x == -1) return side < 0 ? -2 : -1;
    const int base = abs(x) < 1 ? 1 : 2;
    return x > 0 ? base : -base;
}

// Per-center sup bound used by the tail estimate: on [-1, 1] every argument
// passed to spike_profile has magnitude at most 3/(2 l_k), so each summand
// is below 3 k^4 l_k. Doubling the center count per level gives the bound
// sum_k 2^k (3 k^4 l_k) whose terms are 3600 k^3 / ((k+1)...(k+5)).
double level_sup_term(int k) {
    double denom = 1;
    for (int j = 1; j <= 5; ++j) denom *= static_cast<double>(k + j);
    const double k3 = static_cast<double>(k) * k * k;
    return 3600.0 * k3 / denom;
}

// Upper bound for sum over levels k > depth of level_sup_term. The terms
// are below 3600 / k^2, so the remainder past the summed window is below
// 3600 / last.
double tail_sum(int depth) {
    double total = 0;
    const int last = depth + 4000;
    for (int k = depth + 1; k <= last; ++k) total += level_sup_term(k);
    return total + 3600.0 / static_cast<double>(last);
}

}  // namespace

SpikeFunction::SpikeFunction(std::shared_ptr<const CantorStructure> cantor,
                             int depth)
    : cantor_(std::move(cantor)), depth_(depth) {
    if (!cantor_) throw std::invalid_argument("SpikeFunction: null structure");
    if (depth_ < 1 || depth_ > cantor_->list_depth)
        throw std::invalid_argument(
            "SpikeFunction: depth must be in [1, structure list_depth]");

    levels_.reserve(static_cast<std::size_t>(depth_));
    for (int k = 1; k <= depth_; ++k) {
        const CantorLevel& lv = cantor_->level(k);
        Level out;
        out.scale = static_cast<double>(lv.removed_length);
        const double k4 = std::pow(static_cast<double>(k), 4);
        out.weight = k4 * out.scale * out.scale;
        out.centers.reserve(lv.centers.size());
        for (const Rational& c : lv.centers)
            out.centers.push_back(static_cast<double>(c));
        levels_.push_back(std::move(out));
    }

    gap_lengths_.reserve(cantor_->levels.size());
    for (const CantorLevel& lv : cantor_->levels)
        gap_lengths_.push_back(static_cast<double>(lv.removed_length));

    tail_ = tail_sum(depth_);
    sup_ = tail_;
    for (int k = 1; k <= depth_; ++k) sup_ += level_sup_term(k);
}

double SpikeFunction::value(double x) const {
    double total = 0;
    for (const Level& lv : levels_) {
        const double inv = 1.0 / lv.scale;
        double sum = 0;
        for (double c : lv.centers) sum += spike_profile((x - c) * inv);
        total += lv.weight * sum;
    }
    return total;
}

SpikeValue SpikeFunction::value_with_tail(double x) const {
    return {value(x), tail_};
}

SlopeInterval SpikeFunction::subgradient(double x) const {
    SlopeInterval out;
    for (const Level& lv : levels_) {
        const double inv = 1.0 / lv.scale;
        // d/dx of weight * profile((x - c)/scale) = k^4 l_k * profile'
        const double w = lv.weight * inv;
        for (double c : lv.centers) {
            const double y = (x - c) * inv;
            out.lo += w * profile_slope(y, -1);
            out.hi += w * profile_slope(y, +1);
        }
    }
    return out;
}

int SpikeFunction::level_of_gap(double r) const {
    const int structure_depth = cantor_->depth;
    for (int k = 1; k <= structure_depth; ++k)
        if (r > gap_lengths_[static_cast<std::size_t>(k) - 1]) return k;
    return structure_depth + 1;
}

double SpikeFunction::separation_ratio(double x, double r) const {
    if (!(r > gap_lengths_.back() && r <= gap_lengths_.front()))
        throw std::domain_error(
            "separation_ratio: radius outside the resolved gap range");
    const double slope = subgradient(x).hi;
    const double sep = value(x + r) - value(x) - slope * r;
    const double logr = -std::log(r);
    return sep / (r * r * logr * logr * logr * logr);
}

Rational SpikeFunction::value_exact(const Rational& x) const {
    Rational total = 0;
    for (int k = 1; k <= depth_; ++k) {
        const CantorLevel& lv = cantor_->level(k);
        const Rational& l = lv.removed_length;
        const Rational weight = Rational(k) * k * k * k * l * l;
        Rational sum = 0;
        for (const Rational& c : lv.centers) sum += profile_exact((x - c) / l);
        total += weight * sum;
    }
    return total;
}

std::pair<Rational, Rational> SpikeFunction::subgradient_exact(
    const Rational& x) const {
    Rational lo = 0, hi = 0;
    for (int k = 1; k <= depth_; ++k) {
        const CantorLevel& lv = cantor_->level(k);
        const Rational& l = lv.removed_length;
        const Rational w = Rational(k) * k * k * k * l;
        for (const Rational& c : lv.centers) {
            const Rational y = (x - c) / l;
            lo += w * profile_slope_exact(y, -1);
            hi += w * profile_slope_exact(y, +1);
        }
    }
    return {lo, hi};
}

Rational SpikeFunction::separation_exact(const Rational& x,
                                         const Rational& r) const {
    const Rational& coarsest = cantor_->levels.front().removed_length;
    const Rational& finest = cantor_->levels.back().removed_length;
    if (!(r > finest && r <= coarsest))
        throw std::domain_error(
            "separation_exact: radius outside the resolved gap range");
    if (abs(x) > 1 || abs(x + r) > 1)
        throw std::invalid_argument("separation_exact: point outside [-1, 1]");

    // v' is a step function, so v(x+r) - v(x) - v'(x+) r integrates the slope
    // gained past x: sum over kinks t in (x, x+r) of jump(t) (x + r - t).
    // Each center c at level k carries kinks at c - l_k, c, c + l_k with
    // jumps k^4 l_k, 2 k^4 l_k, k^4 l_k.
    const Rational end = x + r;
    Rational sep = 0;
    for (int k = 1; k <= depth_; ++k) {
        const CantorLevel& lv = cantor_->level(k);
        const Rational& l = lv.removed_length;
        const Rational w = Rational(k) * k * k * k * l;
        const auto& cs = lv.centers;
        const Rational window_lo = x - l;
        auto it = std::lower_bound(cs.begin(), cs.end(), window_lo);
        for (; it != cs.end() && *it < end + l; ++it) {
            const Rational pts[3] = {*it - l, *it, *it + l};
            const int mult[3] = {1, 2, 1};
            for (int j = 0; j < 3; ++j)
                if (pts[j] > x && pts[j] < end)
                    sep += mult[j] * w * (end - pts[j]);
        }
    }
    return sep;
}

}  // namespace malab
