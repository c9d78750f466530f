#pragma once
// Segment and straight-edged quadrilateral meshes, and continuous DoF numbering.

#include <array>
#include <cstddef>
#include <istream>
#include <vector>

namespace chfem {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Mesh {
    int dim = 1;
    std::vector<Point> vertices;
    /// 2 vertex indices per segment, 4 per quad (counterclockwise).
    std::vector<std::array<int, 4>> elements;
    /// Boundary faces: (element, local face). Local faces of a quad are
    /// 0: v0-v1, 1: v1-v2, 2: v3-v2, 3: v0-v3; of a segment 0: left, 1: right.
    std::vector<std::array<int, 2>> boundary;
    /// Set for structured rectangle meshes (0 otherwise).
    int nx = 0;
    int ny = 0;

    std::size_t n_elements() const { return elements.size(); }
    int verts_per_element() const { return dim == 1 ? 2 : 4; }

    /// Reference point (xi, eta) of element e mapped to physical coordinates.
    Point map(std::size_t e, double xi, double eta) const;
    /// Jacobian matrix [dx/dxi dx/deta; dy/dxi dy/deta] (1D: only [0]).
    std::array<double, 4> jacobian(std::size_t e, double xi, double eta) const;
    /// Total measure (length or area).
    double measure() const;
    /// Axis-aligned bounding box {xmin, xmax, ymin, ymax}.
    std::array<double, 4> bounds() const;
};

Mesh make_segment_mesh(double a, double b, int n_elem);
Mesh make_rect_mesh(double lx, double ly, int nx, int ny);

/// Reads the plain-text format
///   $vertices N
///   x y            (N lines)
///   $elements M
///   v1 v2 v3 v4    (M lines, 0-based, counterclockwise)
/// '#' starts a comment. Throws ParseError / GeometryError.
Mesh import_quad_mesh(std::istream& in);

/// Splits every quad into r x r quads through its bilinear map (segments into
/// r pieces). Shared edges stay conforming. nx, ny are cleared.
Mesh refine(const Mesh& mesh, int r);

struct DofMap {
    int degree = 1;
    std::size_t n_dofs = 0;
    std::size_t dofs_per_element = 0;
    /// element_to_global[e*dofs_per_element + local]
    std::vector<int> element_to_global;
    std::vector<Point> dof_coords;

    const int* element_dofs(std::size_t e) const {
        return element_to_global.data() + e * dofs_per_element;
    }
};

/// Global numbering: vertices first, then edge interiors (edges sorted by
/// their vertex pair, nodes running from the lower to the higher vertex
/// index), then element interiors. Local numbering follows the basis table.
DofMap build_dofmap(const Mesh& mesh, int degree);

} // namespace chfem
