#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "malab/geometry.hpp"

namespace malab {

enum class DomainShape { Box, Ball, Cylinder };

// Uniform node lattice carrying a computational domain. The domain is
// centered at the geometric center of the lattice. shape_params:
//   Box:      half-widths per axis
//   Ball:     radius in [0]
//   Cylinder: cross-section radius in [0], axial half-height in [1]
//             (axis = last coordinate, dim 3 only)
struct GridSpec {
    int dim = 2;
    std::array<int, 3> counts = {1, 1, 1};
    std::array<double, 3> origin = {0, 0, 0};
    std::array<double, 3> spacing = {1, 1, 1};
    DomainShape shape = DomainShape::Box;
    std::array<double, 3> shape_params = {0, 0, 0};
};

class Grid {
public:
    explicit Grid(const GridSpec& spec);

    const GridSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim; }
    std::size_t size() const { return total_; }

    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * ny_ + j) * nz_ + k;
    }
    std::array<int, 3> coords(std::size_t idx) const {
        const int k = static_cast<int>(idx % nz_);
        const std::size_t r = idx / nz_;
        return {static_cast<int>(r / ny_), static_cast<int>(r % ny_), k};
    }
    Vec3 position(int i, int j, int k) const {
        return {spec_.origin[0] + i * spec_.spacing[0],
                spec_.origin[1] + j * spec_.spacing[1],
                spec_.origin[2] + k * spec_.spacing[2]};
    }
    Vec3 position(std::size_t idx) const {
        const auto c = coords(idx);
        return position(c[0], c[1], c[2]);
    }
    Vec3 center() const { return center_; }
    double spacing_max() const;
    double spacing_min() const;

    // -1 when the neighbor leaves the lattice.
    long long neighbor(std::size_t idx, int axis, int step) const;

    bool in_domain(std::size_t idx) const { return mask_[idx] != 0; }
    bool is_interior(std::size_t idx) const { return mask_[idx] == 2; }
    bool is_boundary(std::size_t idx) const { return mask_[idx] == 1; }
    // Distance from a node to the domain boundary (negative outside).
    double boundary_distance(std::size_t idx) const;

    const std::vector<std::size_t>& domain_nodes() const { return domain_; }
    const std::vector<std::size_t>& interior_nodes() const { return interior_; }
    const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }

    bool shape_contains(const Vec3& p) const;

private:
    GridSpec spec_;
    std::size_t ny_ = 1, nz_ = 1, total_ = 0;
    Vec3 center_ = Vec3::Zero();
    std::vector<std::uint8_t> mask_;  // 0 outside, 1 boundary, 2 interior
    std::vector<std::size_t> domain_, interior_, boundary_;
};

// MAGF1: plain-text grid-function container. Header
//   MAGF1 <dim> <nx> <ny> [<nz>]
//   origin  <per-axis values>
//   spacing <per-axis values>
//   domain  box <half-widths> | ball <r> | cylinder <r> <hz>
// followed by all node values row-major ((i*ny + j)*nz + k), one per line,
// `nan` for masked entries, printed with %.17g so values round-trip
// exactly. The reader accepts any whitespace separation.
void write_magf(std::ostream& os, const GridSpec& spec,
                const std::vector<double>& values);
void write_magf_file(const std::string& path, const GridSpec& spec,
                     const std::vector<double>& values);

struct MagfData {
    GridSpec spec;
    std::vector<double> values;
};
MagfData read_magf(std::istream& is);          // throws std::runtime_error
MagfData read_magf_file(const std::string& path);

std::string format_double(double v);  // shortest %.17g-style round-trip text

}  // namespace malab
