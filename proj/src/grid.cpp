#include "malab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace malab {

namespace {

// Mild outward tolerance so nodes placed exactly on the shape boundary by
// construction are kept despite rounding in position arithmetic.
double shape_tol(const GridSpec& s) {
    double m = 1.0;
    for (int a = 0; a < s.dim; ++a)
        m = std::max(m, std::abs(s.origin[a]) +
                            std::abs(s.spacing[a]) * s.counts[a]);
    return 1e-12 * m;
}

}  // namespace

Grid::Grid(const GridSpec& spec) : spec_(spec) {
    if (spec_.dim < 1 || spec_.dim > 3)
        throw std::runtime_error("grid: dim must be 1, 2, or 3");
    for (int a = 0; a < 3; ++a) {
        if (a < spec_.dim) {
            if (spec_.counts[a] < 1) throw std::runtime_error("grid: empty axis");
            if (!(spec_.spacing[a] > 0))
                throw std::runtime_error("grid: spacing must be positive");
        } else {
            spec_.counts[a] = 1;
        }
    }
    if (spec_.shape == DomainShape::Cylinder && spec_.dim != 3)
        throw std::runtime_error("grid: cylinder domain needs dim 3");
    ny_ = static_cast<std::size_t>(spec_.counts[1]);
    nz_ = static_cast<std::size_t>(spec_.counts[2]);
    total_ = static_cast<std::size_t>(spec_.counts[0]) * ny_ * nz_;
    for (int a = 0; a < 3; ++a)
        center_[a] = spec_.origin[a] + 0.5 * (spec_.counts[a] - 1) * spec_.spacing[a];

    mask_.assign(total_, 0);
    for (std::size_t idx = 0; idx < total_; ++idx)
        if (shape_contains(position(idx))) mask_[idx] = 1;
    for (std::size_t idx = 0; idx < total_; ++idx) {
        if (!mask_[idx]) continue;
        bool interior = true;
        for (int a = 0; a < spec_.dim && interior; ++a)
            for (int s = -1; s <= 1 && interior; s += 2) {
                const long long nb = neighbor(idx, a, s);
                if (nb < 0 || !mask_[static_cast<std::size_t>(nb)]) interior = false;
            }
        if (interior) mask_[idx] = 2;
    }
    for (std::size_t idx = 0; idx < total_; ++idx) {
        if (!mask_[idx]) continue;
        domain_.push_back(idx);
        (mask_[idx] == 2 ? interior_ : boundary_).push_back(idx);
    }
}

double Grid::spacing_max() const {
    double m = 0;
    for (int a = 0; a < spec_.dim; ++a) m = std::max(m, spec_.spacing[a]);
    return m;
}

double Grid::spacing_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (int a = 0; a < spec_.dim; ++a) m = std::min(m, spec_.spacing[a]);
    return m;
}

long long Grid::neighbor(std::size_t idx, int axis, int step) const {
    auto c = coords(idx);
    c[axis] += step;
    if (c[axis] < 0 || c[axis] >= spec_.counts[axis]) return -1;
    return static_cast<long long>(index(c[0], c[1], c[2]));
}

bool Grid::shape_contains(const Vec3& p) const {
    const double tol = shape_tol(spec_);
    const Vec3 d = p - center_;
    switch (spec_.shape) {
        case DomainShape::Box:
            for (int a = 0; a < spec_.dim; ++a)
                if (std::abs(d[a]) > spec_.shape_params[a] + tol) return false;
            return true;
        case DomainShape::Ball: {
            double r2 = 0;
            for (int a = 0; a < spec_.dim; ++a) r2 += d[a] * d[a];
            const double r = spec_.shape_params[0] + tol;
            return r2 <= r * r;
        }
        case DomainShape::Cylinder: {
            const double rxy = std::hypot(d[0], d[1]);
            return rxy <= spec_.shape_params[0] + tol &&
                   std::abs(d[2]) <= spec_.shape_params[1] + tol;
        }
    }
    return false;
}

double Grid::boundary_distance(std::size_t idx) const {
    const Vec3 d = position(idx) - center_;
    switch (spec_.shape) {
        case DomainShape::Box: {
            double m = std::numeric_limits<double>::infinity();
            for (int a = 0; a < spec_.dim; ++a)
                m = std::min(m, spec_.shape_params[a] - std::abs(d[a]));
            return m;
        }
        case DomainShape::Ball: {
            double r2 = 0;
            for (int a = 0; a < spec_.dim; ++a) r2 += d[a] * d[a];
            return spec_.shape_params[0] - std::sqrt(r2);
        }
        case DomainShape::Cylinder:
            return std::min(spec_.shape_params[0] - std::hypot(d[0], d[1]),
                            spec_.shape_params[1] - std::abs(d[2]));
    }
    return 0;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_magf(std::ostream& os, const GridSpec& spec,
                const std::vector<double>& values) {
    const std::size_t total = static_cast<std::size_t>(spec.counts[0]) *
                              spec.counts[1] * spec.counts[2];
    if (values.size() != total)
        throw std::runtime_error("magf: value count does not match grid");
    os << "MAGF1 " << spec.dim;
    for (int a = 0; a < spec.dim; ++a) os << ' ' << spec.counts[a];
    os << "\norigin";
    for (int a = 0; a < spec.dim; ++a) os << ' ' << format_double(spec.origin[a]);
    os << "\nspacing";
    for (int a = 0; a < spec.dim; ++a) os << ' ' << format_double(spec.spacing[a]);
    os << "\ndomain ";
    switch (spec.shape) {
        case DomainShape::Box:
            os << "box";
            for (int a = 0; a < spec.dim; ++a)
                os << ' ' << format_double(spec.shape_params[a]);
            break;
        case DomainShape::Ball:
            os << "ball " << format_double(spec.shape_params[0]);
            break;
        case DomainShape::Cylinder:
            os << "cylinder " << format_double(spec.shape_params[0]) << ' '
               << format_double(spec.shape_params[1]);
            break;
    }
    os << '\n';
    for (const double v : values) os << format_double(v) << '\n';
}

void write_magf_file(const std::string& path, const GridSpec& spec,
                     const std::vector<double>& values) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("magf: cannot open " + path + " for writing");
    write_magf(os, spec, values);
    if (!os) throw std::runtime_error("magf: write failed: " + path);
}

namespace {

double parse_double(const std::string& tok, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw std::runtime_error(std::string("magf: bad ") + what + " token '" + tok + "'");
    return v;
}

long parse_int(const std::string& tok, const char* what) {
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
        throw std::runtime_error(std::string("magf: bad ") + what + " token '" + tok + "'");
    return v;
}

}  // namespace

MagfData read_magf(std::istream& is) {
    std::string tok;
    if (!(is >> tok) || tok != "MAGF1")
        throw std::runtime_error("magf: missing MAGF1 header");
    MagfData out;
    GridSpec& s = out.spec;
    if (!(is >> tok)) throw std::runtime_error("magf: truncated header");
    s.dim = static_cast<int>(parse_int(tok, "dim"));
    if (s.dim < 1 || s.dim > 3) throw std::runtime_error("magf: dim out of range");
    for (int a = 0; a < s.dim; ++a) {
        if (!(is >> tok)) throw std::runtime_error("magf: truncated counts");
        s.counts[a] = static_cast<int>(parse_int(tok, "count"));
        if (s.counts[a] < 1) throw std::runtime_error("magf: count must be positive");
    }
    auto expect = [&](const char* kw) {
        if (!(is >> tok) || tok != kw)
            throw std::runtime_error(std::string("magf: expected '") + kw + "'");
    };
    expect("origin");
    for (int a = 0; a < s.dim; ++a) {
        if (!(is >> tok)) throw std::runtime_error("magf: truncated origin");
        s.origin[a] = parse_double(tok, "origin");
    }
    expect("spacing");
    for (int a = 0; a < s.dim; ++a) {
        if (!(is >> tok)) throw std::runtime_error("magf: truncated spacing");
        s.spacing[a] = parse_double(tok, "spacing");
        if (!(s.spacing[a] > 0)) throw std::runtime_error("magf: spacing must be positive");
    }
    expect("domain");
    if (!(is >> tok)) throw std::runtime_error("magf: truncated domain");
    if (tok == "box") {
        s.shape = DomainShape::Box;
        for (int a = 0; a < s.dim; ++a) {
            if (!(is >> tok)) throw std::runtime_error("magf: truncated box params");
            s.shape_params[a] = parse_double(tok, "box half-width");
        }
    } else if (tok == "ball") {
        s.shape = DomainShape::Ball;
        if (!(is >> tok)) throw std::runtime_error("magf: truncated ball params");
        s.shape_params[0] = parse_double(tok, "ball radius");
    } else if (tok == "cylinder") {
        s.shape = DomainShape::Cylinder;
        for (int a = 0; a < 2; ++a) {
            if (!(is >> tok)) throw std::runtime_error("magf: truncated cylinder params");
            s.shape_params[a] = parse_double(tok, "cylinder param");
        }
    } else {
        throw std::runtime_error("magf: unknown domain shape '" + tok + "'");
    }
    const std::size_t total = static_cast<std::size_t>(s.counts[0]) *
                              s.counts[1] * s.counts[2];
    out.values.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        if (!(is >> tok)) throw std::runtime_error("magf: truncated values");
        out.values.push_back(parse_double(tok, "value"));
    }
    return out;
}

MagfData read_magf_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("magf: cannot open " + path);
    return read_magf(is);
}

}  // namespace malab
