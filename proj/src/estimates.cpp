#include "malab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "malab/sections.hpp"

namespace malab {
namespace {

double cell_volume(const Grid& g) {
    double v = 1;
    for (int a = 0; a < g.dim(); ++a) v *= g.spec().spacing[a];
    return v;
}

// Distance in the grid's dimension only; trailing coordinates of a flat
// axis are identical anyway but a caller-supplied center need not match.
double dist(const Grid& g, const Vec3& a, const Vec3& b) {
    double s = 0;
    for (int d = 0; d < g.dim(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return std::sqrt(s);
}

DeltaField field_with_support(const ConvexGridFunction& u,
                              std::vector<std::size_t> support) {
    DeltaField f;
    f.grid = u.grid_ptr();
    f.values = discrete_laplacian(u);
    f.support = std::move(support);
    return f;
}

double phi_orlicz(double x, double M) {
    return (1 + x) * std::pow(std::log1p(x), M);
}

// Least squares of y against x; returns (slope, rms residual).
std::pair<double, double> line_fit(const std::vector<double>& x,
                                   const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0)
        throw std::invalid_argument("decay_fit: degenerate abscissae");
    const double slope = sxy / sxx;
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - my - slope * (x[i] - mx);
        rss += r * r;
    }
    return {slope, std::sqrt(rss / n)};
}

}  // namespace

void validate(const EstimateReport& report) {
    for (std::size_t i = 1; i < report.series.size(); ++i)
        if (!(report.series[i - 1].parameter < report.series[i].parameter))
            throw std::invalid_argument(
                "estimate report: series parameters must increase strictly");
    if (report.fitted_exponent && report.series.size() < 4)
        throw std::invalid_argument(
            "estimate report: a fitted exponent needs at least 4 points");
}

DeltaField delta_field(const ConvexGridFunction& u) {
    const Grid& g = u.grid();
    return delta_field_ball(u, g.center(), 0.5);
}

DeltaField delta_field_ball(const ConvexGridFunction& u, const Vec3& center,
                            double radius) {
    if (!(radius > 0))
        throw std::invalid_argument("delta_field_ball: radius must be positive");
    const Grid& g = u.grid();
    std::vector<std::size_t> support;
    for (std::size_t idx : g.interior_nodes())
        if (dist(g, g.position(idx), center) <= radius) support.push_back(idx);
    return field_with_support(u, std::move(support));
}

DeltaField delta_field_tube(const ConvexGridFunction& u, double x1, double x2,
                            double radius, int collar_cells, double z_max) {
    const Grid& g = u.grid();
    if (g.dim() != 3)
        throw std::invalid_argument("delta_field_tube: need a 3-D grid");
    if (!(radius > 0) || collar_cells < 0 || !(z_max > 0))
        throw std::invalid_argument("delta_field_tube: malformed tube");
    const double collar = collar_cells * g.spacing_max() * (1 + 1e-12);
    const double z0 = g.center()[2];
    std::vector<std::size_t> support;
    for (std::size_t idx : g.interior_nodes()) {
        const Vec3 p = g.position(idx);
        const double lateral = std::hypot(p[0] - x1, p[1] - x2);
        if (lateral > radius || std::fabs(p[2] - z0) > z_max) continue;
        if (collar_cells > 0 && lateral <= collar) continue;
        support.push_back(idx);
    }
    return field_with_support(u, std::move(support));
}

double level_integral(const DeltaField& f, double t) {
    if (!f.grid) throw std::invalid_argument("level_integral: empty field");
    if (!(t >= 0))
        throw std::invalid_argument("level_integral: level must be >= 0");
    double s = 0;
    for (std::size_t idx : f.support) {
        const double v = f.values[idx];
        if (v > t) s += v;
    }
    return s * cell_volume(*f.grid);
}

std::vector<SeriesPoint> level_series(const DeltaField& f, int min_nodes) {
    if (!f.grid) throw std::invalid_argument("level_series: empty field");
    if (min_nodes < 1)
        throw std::invalid_argument("level_series: need a positive node floor");
    std::vector<SeriesPoint> out;
    for (double t = 1;; t *= 2) {
        int count = 0;
        for (std::size_t idx : f.support)
            if (f.values[idx] > t) ++count;
        if (count < min_nodes) break;
        out.push_back({t, level_integral(f, t)});
    }
    return out;
}

DecayFit decay_fit(const std::vector<SeriesPoint>& series) {
    if (series.size() < 4)
        throw std::invalid_argument("decay_fit: need at least 4 points");
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!(series[i].parameter > 0))
            throw std::invalid_argument("decay_fit: parameters must be positive");
        if (i > 0 && !(series[i - 1].parameter < series[i].parameter))
            throw std::invalid_argument(
                "decay_fit: parameters must increase strictly");
    }

    DecayFit fit;
    std::vector<double> xl, yl, xp, yp;
    for (const SeriesPoint& s : series) {
        const bool positive = s.value > 0;
        const double abslog = std::fabs(std::log(s.parameter));
        if (positive && abslog > 0) {
            xl.push_back(std::log(abslog));
            yl.push_back(std::log(s.value));
        } else {
            ++fit.dropped_log;
        }
        if (positive) {
            xp.push_back(std::log(s.parameter));
            yp.push_back(std::log(s.value));
        } else {
            ++fit.dropped_power;
        }
    }
    if (xl.size() < 4 || xp.size() < 4)
        throw std::invalid_argument(
            "decay_fit: fewer than 4 usable points after drops");

    const auto [sl, rl] = line_fit(xl, yl);
    fit.log_power = {-sl, rl};
    const auto [sp, rp] = line_fit(xp, yp);
    fit.t_power = {-sp, rp};
    return fit;
}

double orlicz_integral(const DeltaField& f, double p) {
    if (!f.grid) throw std::invalid_argument("orlicz_integral: empty field");
    if (!(p >= 0))
        throw std::invalid_argument("orlicz_integral: exponent must be >= 0");
    double s = 0;
    for (std::size_t idx : f.support) {
        const double v = f.values[idx];
        if (v > 0) s += v * std::pow(std::log1p(v), p);
    }
    return s * cell_volume(*f.grid);
}

double covering_sum(const std::vector<double>& radii, double dimension_exponent,
                    double log_exponent) {
    double s = 0;
    for (double r : radii) {
        if (!(r > 0) || r >= 1)
            throw std::invalid_argument(
                "covering_sum: radii must lie strictly inside (0, 1)");
        s += std::pow(r, dimension_exponent) *
             std::pow(-std::log(r), log_exponent);
    }
    return s;
}

JensenCheck jensen_check(const DeltaField& f, double radius, double M) {
    if (!f.grid) throw std::invalid_argument("jensen_check: empty field");
    if (!(radius > 0))
        throw std::invalid_argument("jensen_check: radius must be positive");
    if (!(M >= 1))
        throw std::invalid_argument(
            "jensen_check: weight exponent below 1 breaks convexity");
    if (f.support.empty())
        throw std::invalid_argument("jensen_check: empty support");

    const double cell = cell_volume(*f.grid);
    const double rn = std::pow(radius, f.grid->dim());

    JensenCheck out;
    out.nodes = static_cast<int>(f.support.size());
    double sum = 0, sum_phi = 0;
    for (std::size_t idx : f.support) {
        const double v = f.values[idx];
        if (!(v >= 0))
            throw std::invalid_argument(
                "jensen_check: field must be nonnegative on its support");
        sum += v;
        sum_phi += phi_orlicz(rn * v, M);
    }
    const double volume = out.nodes * cell;
    out.constant = volume / rn;
    out.lhs = sum_phi * cell;
    out.rhs = volume * phi_orlicz(rn * (sum / out.nodes), M);
    if (out.lhs < out.rhs * (1 - 1e-12) - 1e-300)
        throw std::logic_error("jensen_check: convexity inequality violated");
    return out;
}

BallLowerBound singular_ball_lower_bound(const ConvexGridFunction& u,
                                         std::size_t node, double r_max,
                                         double M) {
    const Grid& g = u.grid();
    if (!g.in_domain(node))
        throw std::invalid_argument(
            "singular_ball_lower_bound: node not in domain");
    const double h = g.spacing_max();
    if (!(M >= 1))
        throw std::invalid_argument("singular_ball_lower_bound: need M >= 1");
    if (!(r_max >= 3 * h) || !(r_max < 1))
        throw std::invalid_argument(
            "singular_ball_lower_bound: radius must lie in [3 spacings, 1)");
    if (g.boundary_distance(node) <= r_max + h)
        throw std::invalid_argument(
            "singular_ball_lower_bound: ball leaves the domain");

    const std::vector<double> lap = discrete_laplacian(u);
    const Vec3 x = g.position(node);
    const double ux = u.value(node);
    const double cell = cell_volume(g);
    const int n = g.dim();

    BallLowerBound out;
    for (double r = r_max; r >= 3 * h; r *= 0.5) {
        double integral = 0;
        double sup_shell = 0;
        for (std::size_t idx : g.domain_nodes()) {
            const double d = dist(g, g.position(idx), x);
            if (d > r) continue;
            const double v = lap[idx];
            if (v > 0) integral += phi_orlicz(v, M) * cell;
            if (d > r - h)
                sup_shell = std::max(sup_shell, u.value(idx) - ux);
        }
        const double logr = -std::log(r);
        out.ratio.push_back(
            {r, integral / (std::pow(r, n - 1) * std::pow(logr, M - 1))});
        out.boundary_growth.push_back({r, sup_shell * logr / r});
    }
    std::reverse(out.ratio.begin(), out.ratio.end());
    std::reverse(out.boundary_growth.begin(), out.boundary_growth.end());
    return out;
}

PropProbe prop_probe(const ConvexGridFunction& u, std::size_t node, double h,
                     int slope_resolution) {
    const Grid& g = u.grid();
    if (!g.in_domain(node))
        throw std::invalid_argument("prop_probe: node not in domain");
    if (!(h > 0))
        throw std::invalid_argument("prop_probe: height must be positive");

    PropProbe out;
    out.hbar = maximal_height(u, node).hbar;
    if (h <= out.hbar) return out;  // nothing near-singular to probe

    const double spacing = g.spacing_max();
    const double r_hi = std::min(std::exp(-std::sqrt(std::fabs(std::log(h)))),
                                 g.boundary_distance(node));
    if (r_hi < 3 * spacing) return out;

    const MongeAmpereField mv = ma_measure(add_half_square(u), slope_resolution);
    const Vec3 x = g.position(node);
    const int n = g.dim();

    for (double r = r_hi; r >= 3 * spacing; r *= 0.5) {
        double mass = 0;
        for (std::size_t idx : g.domain_nodes())
            if (dist(g, g.position(idx), x) <= r) mass += mv.mass[idx];
        out.mass.push_back({r, mass});
        for (std::size_t e = 0; e < kProbeLogExponents.size(); ++e)
            out.benchmarks[e].push_back(
                {r, std::pow(r, n - 1) *
                        std::pow(-std::log(r), kProbeLogExponents[e])});
    }
    std::reverse(out.mass.begin(), out.mass.end());
    for (auto& b : out.benchmarks) std::reverse(b.begin(), b.end());
    return out;
}

}  // namespace malab
