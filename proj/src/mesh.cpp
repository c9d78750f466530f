#include "chfem/mesh.hpp"

#include "chfem/error.hpp"
#include "chfem/ref_element.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <utility>

namespace chfem {

Point Mesh::map(std::size_t e, double xi, double eta) const {
    const auto& el = elements[e];
    if (dim == 1) {
        const double a = vertices[el[0]].x, b = vertices[el[1]].x;
        return {0.5 * (a + b) + 0.5 * (b - a) * xi, 0.0};
    }
    const double n0 = 0.25 * (1 - xi) * (1 - eta), n1 = 0.25 * (1 + xi) * (1 - eta);
    const double n2 = 0.25 * (1 + xi) * (1 + eta), n3 = 0.25 * (1 - xi) * (1 + eta);
    const Point &p0 = vertices[el[0]], &p1 = vertices[el[1]], &p2 = vertices[el[2]],
                &p3 = vertices[el[3]];
    return {n0 * p0.x + n1 * p1.x + n2 * p2.x + n3 * p3.x,
            n0 * p0.y + n1 * p1.y + n2 * p2.y + n3 * p3.y};
}

std::array<double, 4> Mesh::jacobian(std::size_t e, double xi, double eta) const {
    const auto& el = elements[e];
    if (dim == 1) return {0.5 * (vertices[el[1]].x - vertices[el[0]].x), 0.0, 0.0, 0.0};
    const Point &p0 = vertices[el[0]], &p1 = vertices[el[1]], &p2 = vertices[el[2]],
                &p3 = vertices[el[3]];
    const double dxi[4] = {-0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta), -0.25 * (1 + eta)};
    const double deta[4] = {-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi), 0.25 * (1 - xi)};
    const Point* p[4] = {&p0, &p1, &p2, &p3};
    std::array<double, 4> j{0, 0, 0, 0};
    for (int k = 0; k < 4; ++k) {
        j[0] += dxi[k] * p[k]->x;
        j[1] += deta[k] * p[k]->x;
        j[2] += dxi[k] * p[k]->y;
        j[3] += deta[k] * p[k]->y;
    }
    return j;
}

double Mesh::measure() const {
    double s = 0.0;
    for (const auto& el : elements) {
        if (dim == 1) {
            s += vertices[el[1]].x - vertices[el[0]].x;
        } else {
            // shoelace
            double a = 0.0;
            for (int k = 0; k < 4; ++k) {
                const Point& p = vertices[el[k]];
                const Point& q = vertices[el[(k + 1) % 4]];
                a += p.x * q.y - q.x * p.y;
            }
            s += 0.5 * a;
        }
    }
    return s;
}

std::array<double, 4> Mesh::bounds() const {
    std::array<double, 4> b{vertices[0].x, vertices[0].x, vertices[0].y, vertices[0].y};
    for (const auto& v : vertices) {
        b[0] = std::min(b[0], v.x);
        b[1] = std::max(b[1], v.x);
        b[2] = std::min(b[2], v.y);
        b[3] = std::max(b[3], v.y);
    }
    return b;
}

Mesh make_segment_mesh(double a, double b, int n_elem) {
    if (n_elem < 1) throw ParameterError("make_segment_mesh: n_elem must be >= 1");
    if (!(a < b)) throw ParameterError("make_segment_mesh: need a < b");
    Mesh m;
    m.dim = 1;
    m.vertices.resize(n_elem + 1);
    for (int i = 0; i <= n_elem; ++i) m.vertices[i] = {a + (b - a) * i / n_elem, 0.0};
    m.vertices[n_elem].x = b;
    m.elements.resize(n_elem);
    for (int i = 0; i < n_elem; ++i) m.elements[i] = {i, i + 1, -1, -1};
    m.boundary = {{0, 0}, {n_elem - 1, 1}};
    m.nx = n_elem;
    m.ny = 0;
    return m;
}

Mesh make_rect_mesh(double lx, double ly, int nx, int ny) {
    if (!(lx > 0) || !(ly > 0)) throw ParameterError("make_rect_mesh: side lengths must be positive");
    if (nx < 1 || ny < 1) throw ParameterError("make_rect_mesh: element counts must be >= 1");
    Mesh m;
    m.dim = 2;
    m.nx = nx;
    m.ny = ny;
    m.vertices.resize(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.vertices[j * (nx + 1) + i] = {i == nx ? lx : lx * i / nx, j == ny ? ly : ly * j / ny};
    auto v = [nx](int i, int j) { return j * (nx + 1) + i; };
    m.elements.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) m.elements.push_back({v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)});
    for (int i = 0; i < nx; ++i) m.boundary.push_back({i, 0});
    for (int j = 0; j < ny; ++j) m.boundary.push_back({j * nx + nx - 1, 1});
    for (int i = 0; i < nx; ++i) m.boundary.push_back({(ny - 1) * nx + i, 2});
    for (int j = 0; j < ny; ++j) m.boundary.push_back({j * nx, 3});
    return m;
}

namespace {

constexpr int kFaceVerts[4][2] = {{0, 1}, {1, 2}, {3, 2}, {0, 3}};

std::pair<int, int> edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

void finish_quad_boundary(Mesh& m) {
    std::map<std::pair<int, int>, std::vector<std::array<int, 2>>> uses;
    for (std::size_t e = 0; e < m.elements.size(); ++e)
        for (int f = 0; f < 4; ++f)
            uses[edge_key(m.elements[e][kFaceVerts[f][0]], m.elements[e][kFaceVerts[f][1]])].push_back(
                {static_cast<int>(e), f});
    for (const auto& [key, list] : uses) {
        if (list.size() > 2)
            throw GeometryError(list[2][0], "edge shared by more than two elements");
        if (list.size() == 1) m.boundary.push_back(list[0]);
    }
    std::sort(m.boundary.begin(), m.boundary.end());
}

} // namespace

Mesh import_quad_mesh(std::istream& in) {
    Mesh m;
    m.dim = 2;
    std::string raw;
    std::size_t line_no = 0;
    enum class Section { none, vertices, elements } section = Section::none;
    std::size_t expected = 0;
    bool saw_vertices = false, saw_elements = false;

    auto next_content = [&](std::string& out) {
        while (std::getline(in, raw)) {
            ++line_no;
            const auto hash = raw.find('#');
            std::string s = raw.substr(0, hash);
            if (s.find_first_not_of(" \t\r") == std::string::npos) continue;
            out = s;
            return true;
        }
        return false;
    };

    std::string line;
    while (next_content(line)) {
        std::istringstream ls(line);
        if (line.find('$') != std::string::npos) {
            if (section != Section::none && expected > 0)
                throw ParseError(line_no, "section header before previous section was complete");
            std::string tag;
            long long count = -1;
            ls >> tag >> count;
            std::string extra;
            if (!ls || count < 0 || (ls >> extra)) throw ParseError(line_no, "malformed section header");
            if (tag == "$vertices") {
                if (saw_vertices) throw ParseError(line_no, "duplicate $vertices section");
                section = Section::vertices;
                saw_vertices = true;
                m.vertices.reserve(count);
            } else if (tag == "$elements") {
                if (!saw_vertices) throw ParseError(line_no, "$elements before $vertices");
                if (saw_elements) throw ParseError(line_no, "duplicate $elements section");
                section = Section::elements;
                saw_elements = true;
                m.elements.reserve(count);
            } else {
                throw ParseError(line_no, "unknown section '" + tag + "'");
            }
            expected = static_cast<std::size_t>(count);
            continue;
        }
        if (section == Section::none || expected == 0)
            throw ParseError(line_no, "data outside a section");
        std::string extra;
        if (section == Section::vertices) {
            Point p;
            if (!(ls >> p.x >> p.y) || (ls >> extra)) throw ParseError(line_no, "expected 'x y'");
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ParseError(line_no, "non-finite coordinate");
            m.vertices.push_back(p);
        } else {
            std::array<long long, 4> v{};
            if (!(ls >> v[0] >> v[1] >> v[2] >> v[3]) || (ls >> extra))
                throw ParseError(line_no, "expected four vertex indices");
            std::array<int, 4> el{};
            for (int k = 0; k < 4; ++k) {
                if (v[k] < 0 || v[k] >= static_cast<long long>(m.vertices.size()))
                    throw ParseError(line_no, "vertex index " + std::to_string(v[k]) + " out of range");
                el[k] = static_cast<int>(v[k]);
            }
            for (int a = 0; a < 4; ++a)
                for (int b = a + 1; b < 4; ++b)
                    if (el[a] == el[b]) throw ParseError(line_no, "repeated vertex in element");
            m.elements.push_back(el);
        }
        --expected;
    }
    if (!saw_vertices || !saw_elements) throw ParseError(line_no, "missing $vertices or $elements section");
    if (expected > 0) throw ParseError(line_no, "unexpected end of file");
    if (m.elements.empty()) throw ParseError(line_no, "mesh has no elements");

    for (std::size_t e = 0; e < m.elements.size(); ++e) {
        // bilinear map: det J is affine in each reference variable, so the
        // corner values bound it on the whole element
        for (double xi : {-1.0, 1.0}) {
            for (double eta : {-1.0, 1.0}) {
                const auto j = m.jacobian(e, xi, eta);
                if (j[0] * j[3] - j[1] * j[2] <= 0.0)
                    throw GeometryError(e, "non-positive Jacobian (clockwise or tangled quad)");
            }
        }
    }
    finish_quad_boundary(m);
    return m;
}

DofMap build_dofmap(const Mesh& mesh, int degree) {
    if (degree < 1 || degree > kMaxDegree) throw ParameterError("build_dofmap: degree outside [1,10]");
    const std::vector<double> gl = gauss_lobatto_nodes(degree);
    const int p = degree;
    DofMap d;
    d.degree = p;
    const std::size_t nv = mesh.vertices.size();
    const std::size_t ne = mesh.elements.size();

    if (mesh.dim == 1) {
        d.dofs_per_element = p + 1;
        d.n_dofs = nv + ne * (p - 1);
        d.element_to_global.resize(ne * (p + 1));
        d.dof_coords.resize(d.n_dofs);
        for (std::size_t v = 0; v < nv; ++v) d.dof_coords[v] = mesh.vertices[v];
        for (std::size_t e = 0; e < ne; ++e) {
            int* g = d.element_to_global.data() + e * (p + 1);
            g[0] = mesh.elements[e][0];
            g[p] = mesh.elements[e][1];
            for (int k = 1; k < p; ++k) {
                const std::size_t id = nv + e * (p - 1) + (k - 1);
                g[k] = static_cast<int>(id);
                d.dof_coords[id] = mesh.map(e, gl[k], 0.0);
            }
        }
        return d;
    }

    const int nb1 = p + 1;
    d.dofs_per_element = static_cast<std::size_t>(nb1) * nb1;
    std::map<std::pair<int, int>, int> edge_index;
    for (const auto& el : mesh.elements)
        for (int f = 0; f < 4; ++f) edge_index.emplace(edge_key(el[kFaceVerts[f][0]], el[kFaceVerts[f][1]]), 0);
    int counter = 0;
    for (auto& [key, idx] : edge_index) idx = counter++;
    const std::size_t n_edges = edge_index.size();
    const std::size_t edge_base = nv;
    const std::size_t interior_base = nv + n_edges * (p - 1);
    d.n_dofs = interior_base + ne * static_cast<std::size_t>(p - 1) * (p - 1);
    d.element_to_global.assign(ne * d.dofs_per_element, -1);
    d.dof_coords.resize(d.n_dofs);
    for (std::size_t v = 0; v < nv; ++v) d.dof_coords[v] = mesh.vertices[v];

    for (std::size_t e = 0; e < ne; ++e) {
        const auto& el = mesh.elements[e];
        int* g = d.element_to_global.data() + e * d.dofs_per_element;
        auto local = [nb1](int ix, int iy) { return iy * nb1 + ix; };
        g[local(0, 0)] = el[0];
        g[local(p, 0)] = el[1];
        g[local(p, p)] = el[2];
        g[local(0, p)] = el[3];
        for (int f = 0; f < 4; ++f) {
            const int va = el[kFaceVerts[f][0]], vb = el[kFaceVerts[f][1]];
            const int eid = edge_index.at(edge_key(va, vb));
            const bool forward = va < vb;
            for (int k = 1; k < p; ++k) {
                // k runs along the face from its first to its second local vertex
                const int kk = forward ? k : p - k;
                const int gid = static_cast<int>(edge_base + static_cast<std::size_t>(eid) * (p - 1) + (kk - 1));
                int ix = 0, iy = 0;
                switch (f) {
                case 0: ix = k; iy = 0; break;
                case 1: ix = p; iy = k; break;
                case 2: ix = k; iy = p; break;
                default: ix = 0; iy = k; break;
                }
                g[local(ix, iy)] = gid;
            }
        }
        for (int iy = 1; iy < p; ++iy)
            for (int ix = 1; ix < p; ++ix)
                g[local(ix, iy)] = static_cast<int>(interior_base + e * static_cast<std::size_t>(p - 1) * (p - 1) +
                                                    static_cast<std::size_t>(iy - 1) * (p - 1) + (ix - 1));
        for (int iy = 0; iy <= p; ++iy)
            for (int ix = 0; ix <= p; ++ix) d.dof_coords[g[local(ix, iy)]] = mesh.map(e, gl[ix], gl[iy]);
    }
    return d;
}

Mesh refine(const Mesh& mesh, int r) {
    if (r < 1) throw ParameterError("refine: factor must be >= 1");
    Mesh out;
    out.dim = mesh.dim;
    out.vertices = mesh.vertices;
    if (mesh.dim == 1) {
        for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
            const int a = mesh.elements[e][0], b = mesh.elements[e][1];
            int prev = a;
            for (int k = 1; k <= r; ++k) {
                int cur = b;
                if (k < r) {
                    cur = static_cast<int>(out.vertices.size());
                    out.vertices.push_back(mesh.map(e, -1.0 + 2.0 * k / r, 0.0));
                }
                out.elements.push_back({prev, cur, 0, 0});
                prev = cur;
            }
        }
        for (const auto& [e, f] : mesh.boundary)
            out.boundary.push_back({f == 0 ? e * r : e * r + r - 1, f});
        std::sort(out.boundary.begin(), out.boundary.end());
        return out;
    }
    // new edge points keyed by the (lo, hi) vertex pair, ordered from lo
    std::map<std::pair<int, int>, std::vector<int>> edge_pts;
    const std::vector<std::array<int, 2>> corner_ij = {{0, 0}, {r, 0}, {r, r}, {0, r}};
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const auto& el = mesh.elements[e];
        std::vector<int> grid(static_cast<std::size_t>((r + 1) * (r + 1)), -1);
        auto at = [&](int i, int j) -> int& { return grid[static_cast<std::size_t>(j * (r + 1) + i)]; };
        for (int c = 0; c < 4; ++c) at(corner_ij[c][0], corner_ij[c][1]) = el[c];
        for (int f = 0; f < 4; ++f) {
            const int va = el[kFaceVerts[f][0]], vb = el[kFaceVerts[f][1]];
            const auto key = edge_key(va, vb);
            auto it = edge_pts.find(key);
            const auto& ca = corner_ij[kFaceVerts[f][0]];
            const auto& cb = corner_ij[kFaceVerts[f][1]];
            if (it == edge_pts.end()) {
                std::vector<int> ids;
                for (int k = 1; k < r; ++k) {
                    // k-th point from the lower vertex
                    const double s = va == key.first ? static_cast<double>(k) / r : 1.0 - static_cast<double>(k) / r;
                    const double i = ca[0] + s * (cb[0] - ca[0]), j = ca[1] + s * (cb[1] - ca[1]);
                    ids.push_back(static_cast<int>(out.vertices.size()));
                    out.vertices.push_back(mesh.map(e, -1.0 + 2.0 * i / r, -1.0 + 2.0 * j / r));
                }
                it = edge_pts.emplace(key, std::move(ids)).first;
            }
            for (int k = 1; k < r; ++k) {
                const int from_lo = va == key.first ? k : r - k;
                const int i = ca[0] + k * (cb[0] - ca[0]) / r, j = ca[1] + k * (cb[1] - ca[1]) / r;
                at(i, j) = it->second[static_cast<std::size_t>(from_lo - 1)];
            }
        }
        for (int j = 1; j < r; ++j)
            for (int i = 1; i < r; ++i) {
                at(i, j) = static_cast<int>(out.vertices.size());
                out.vertices.push_back(mesh.map(e, -1.0 + 2.0 * i / r, -1.0 + 2.0 * j / r));
            }
        for (int j = 0; j < r; ++j)
            for (int i = 0; i < r; ++i) out.elements.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
    }
    finish_quad_boundary(out);
    return out;
}

} // namespace chfem
