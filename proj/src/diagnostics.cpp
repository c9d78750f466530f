#include "chfem/diagnostics.hpp"

#include "chfem/error.hpp"
#include "chfem/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace chfem {

double FitResult::get(const std::string& name) const {
    for (const auto& [k, v] : params)
        if (k == name) return v;
    throw FitError("no fit parameter named '" + name + "'");
}

void FitResult::set(const std::string& name, double value) {
    for (auto& [k, v] : params)
        if (k == name) {
            v = value;
            return;
        }
    params.emplace_back(name, value);
}

namespace {

// Visits every point of a Gauss rule with n points per direction:
// fn(element, basis values, basis gradients in physical coordinates, |J| w, point)
template <class Fn>
void for_each_point(const Discretization& disc, int n, bool need_grad, Fn&& fn) {
    const auto table = build_basis(disc.degree(), disc.dim(), n);
    const auto& mesh = disc.mesh();
    const std::size_t nb = table.n_basis();
    const int dim = disc.dim();
    std::vector<double> grad(nb * 2, 0.0);
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        for (std::size_t q = 0; q < table.n_quad(); ++q) {
            const auto jac = mesh.jacobian(e, table.qx(q), table.qy(q));
            double det;
            if (dim == 1) {
                det = jac[0];
                if (need_grad)
                    for (std::size_t i = 0; i < nb; ++i) grad[2 * i] = table.dphi(q, i, 0) / jac[0];
            } else {
                det = jac[0] * jac[3] - jac[1] * jac[2];
                if (need_grad)
                    for (std::size_t i = 0; i < nb; ++i) {
                        const double a = table.dphi(q, i, 0), b = table.dphi(q, i, 1);
                        grad[2 * i] = (jac[3] * a - jac[2] * b) / det;
                        grad[2 * i + 1] = (-jac[1] * a + jac[0] * b) / det;
                    }
            }
            fn(e, table.phi_row(q), std::span<const double>(grad), std::abs(det) * table.weight(q),
               mesh.map(e, table.qx(q), table.qy(q)));
        }
    }
}

void check_size(std::span<const double> u, const Discretization& disc) {
    if (u.size() != disc.n_dofs()) throw ParameterError("field length differs from the number of DoFs");
}

struct Crossing {
    std::size_t element;
    double xi_a, xi_b;  // reference interval holding the root
    double x_exact = std::numeric_limits<double>::quiet_NaN();
};

// Reference coordinate of x in the 1D element e.
double to_ref(const Mesh& mesh, std::size_t e, double x) {
    const double xa = mesh.map(e, -1.0, 0).x, xb = mesh.map(e, 1.0, 0).x;
    return std::clamp(-1.0 + 2.0 * (x - xa) / (xb - xa), -1.0, 1.0);
}

std::size_t element_at(const Mesh& mesh, double x) {
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const double xa = mesh.map(e, -1.0, 0).x, xb = mesh.map(e, 1.0, 0).x;
        if (x >= std::min(xa, xb) && x <= std::max(xa, xb)) return e;
    }
    throw ParameterError("point outside the mesh");
}

// Sign changes of a 1D field along its nodes sorted by x.
std::vector<Crossing> sign_changes(std::span<const double> u, const Discretization& disc) {
    if (disc.dim() != 1) throw ParameterError("1D field required");
    const auto& mesh = disc.mesh();
    const auto& xy = disc.dofs().dof_coords;
    std::vector<std::size_t> order(xy.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xy[a].x < xy[b].x; });
    std::vector<Crossing> out;
    int last_sign = 0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const double v = u[order[k]];
        const int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
        if (s == 0) continue;
        if (last_sign != 0 && s != last_sign) {
            const double xa = xy[order[last]].x, xb = xy[order[k]].x;
            Crossing c{};
            if (k > last + 1) {
                // exact zeros in between: take the middle one
                c.x_exact = xy[order[(last + k) / 2]].x;
                c.element = element_at(mesh, c.x_exact);
            } else {
                c.element = element_at(mesh, 0.5 * (xa + xb));
                c.xi_a = to_ref(mesh, c.element, xa);
                c.xi_b = to_ref(mesh, c.element, xb);
            }
            out.push_back(c);
        }
        last_sign = s;
        last = k;
    }
    return out;
}

double root_in(std::span<const double> u, const Discretization& disc, const Crossing& c, double* xi_out) {
    double lo = c.xi_a, hi = c.xi_b;
    const double flo = disc.evaluate(u, c.element, lo, 0.0);
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = disc.evaluate(u, c.element, mid, 0.0);
        if (fm == 0.0) {
            lo = hi = mid;
            break;
        }
        if ((fm > 0) == (flo > 0))
            lo = mid;
        else
            hi = mid;
    }
    *xi_out = 0.5 * (lo + hi);
    return disc.mesh().map(c.element, *xi_out, 0.0).x;
}

} // namespace

double total_energy(std::span<const double> u, const EnergyModel& model, const Discretization& disc, double eps2,
                    int extra_points) {
    check_size(u, disc);
    if (extra_points < 0) throw ParameterError("total_energy: extra_points must be >= 0");
    if (extra_points == 0) return disc.energy(u, model, eps2);
    const auto& dofs = disc.dofs();
    double total = 0.0;
    for_each_point(disc, disc.degree() + 2 + extra_points, true,
                   [&](std::size_t e, std::span<const double> phi, std::span<const double> grad, double w, Point) {
                       const int* g = dofs.element_dofs(e);
                       double uh = 0.0, gx = 0.0, gy = 0.0;
                       for (std::size_t i = 0; i < phi.size(); ++i) {
                           const double c = u[static_cast<std::size_t>(g[i])];
                           uh += c * phi[i];
                           gx += c * grad[2 * i];
                           gy += c * grad[2 * i + 1];
                       }
                       if (!model.admissible(uh))
                           throw DomainError("u_h = " + std::to_string(uh) + " outside the admissible interval of " +
                                                 model.name(),
                                             static_cast<std::ptrdiff_t>(e));
                       total += w * (model.f(uh) + 0.5 * eps2 * (gx * gx + gy * gy));
                   });
    return total;
}

double total_mass(std::span<const double> u, const Discretization& disc) {
    check_size(u, disc);
    const auto mu = disc.consistent_mass() * u;
    return std::accumulate(mu.begin(), mu.end(), 0.0);
}

double l2_error(std::span<const double> u, const std::function<double(double, double)>& reference,
                const Discretization& disc) {
    check_size(u, disc);
    const auto& dofs = disc.dofs();
    double s = 0.0;
    for_each_point(disc, 2 * disc.degree() + 4, false,
                   [&](std::size_t e, std::span<const double> phi, std::span<const double>, double w, Point p) {
                       const int* g = dofs.element_dofs(e);
                       double uh = 0.0;
                       for (std::size_t i = 0; i < phi.size(); ++i) uh += u[static_cast<std::size_t>(g[i])] * phi[i];
                       const double d = uh - reference(p.x, p.y);
                       s += w * d * d;
                   });
    return std::sqrt(s);
}

double h1_seminorm_error(std::span<const double> u,
                         const std::function<std::array<double, 2>(double, double)>& grad_ref,
                         const Discretization& disc) {
    check_size(u, disc);
    const auto& dofs = disc.dofs();
    double s = 0.0;
    for_each_point(disc, 2 * disc.degree() + 4, true,
                   [&](std::size_t e, std::span<const double> phi, std::span<const double> grad, double w, Point p) {
                       const int* g = dofs.element_dofs(e);
                       double gx = 0.0, gy = 0.0;
                       for (std::size_t i = 0; i < phi.size(); ++i) {
                           gx += u[static_cast<std::size_t>(g[i])] * grad[2 * i];
                           gy += u[static_cast<std::size_t>(g[i])] * grad[2 * i + 1];
                       }
                       const auto r = grad_ref(p.x, p.y);
                       s += w * ((gx - r[0]) * (gx - r[0]) + (gy - r[1]) * (gy - r[1]));
                   });
    return std::sqrt(s);
}

std::vector<InterfacePoint> interface_slope(std::span<const double> u, const Discretization& disc) {
    check_size(u, disc);
    std::vector<InterfacePoint> out;
    for (const auto& c : sign_changes(u, disc)) {
        InterfacePoint ip;
        if (!std::isnan(c.x_exact)) {
            // a node sits exactly on the root; differentiate from its element
            ip = {c.x_exact, disc.evaluate_dx(u, c.element, to_ref(disc.mesh(), c.element, c.x_exact))};
        } else {
            double xi;
            ip.x = root_in(u, disc, c, &xi);
            ip.slope = disc.evaluate_dx(u, c.element, xi);
        }
        out.push_back(ip);
    }
    return out;
}

FitResult fit_tanh_profile(std::span<const double> u, const Discretization& disc) {
    check_size(u, disc);
    const auto roots = interface_slope(u, disc);
    if (roots.empty()) throw ShapeError("fit_tanh_profile: u_h has no sign change");
    if (roots.size() > 1)
        throw ShapeError("fit_tanh_profile: u_h has " + std::to_string(roots.size()) +
                         " sign changes; use interface_slope per interface");
    const double x0 = roots[0].x;

    const auto& xy = disc.dofs().dof_coords;
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < xy.size(); ++i) {
        if (xy[i].x < xy[ia].x) ia = i;
        if (xy[i].x > xy[ib].x) ib = i;
    }
    const double up = 0.5 * (std::abs(u[ia]) + std::abs(u[ib]));
    const double orient = u[ib] > u[ia] ? 1.0 : -1.0;
    const double a = orient * up;

    auto objective = [&](double mu, double* d1, double* d2) {
        double j = 0.0, g = 0.0, h = 0.0;
        for (std::size_t i = 0; i < xy.size(); ++i) {
            const double z = xy[i].x - x0;
            const double t = std::tanh(z * mu);
            const double s2 = 1.0 - t * t;
            const double r = u[i] - a * t;
            const double r1 = -a * z * s2;
            const double r2 = 2.0 * a * z * z * s2 * t;
            j += r * r;
            g += 2.0 * r * r1;
            h += 2.0 * (r1 * r1 + r * r2);
        }
        if (d1) *d1 = g;
        if (d2) *d2 = h;
        return j;
    };

    const double mu0 = std::max(std::abs(roots[0].slope) / std::max(up, 1e-300), 1e-12);
    // golden section in log mu
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = std::log(mu0 / 10.0), hi = std::log(mu0 * 10.0);
    double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
    double fc = objective(std::exp(c), nullptr, nullptr), fd = objective(std::exp(d), nullptr, nullptr);
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = objective(std::exp(c), nullptr, nullptr);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = objective(std::exp(d), nullptr, nullptr);
        }
    }
    double mu = std::exp(0.5 * (lo + hi));
    double best = objective(mu, nullptr, nullptr);
    for (int it = 0; it < 20; ++it) {
        double g, h;
        objective(mu, &g, &h);
        if (!(h > 0)) break;
        const double next = mu - g / h;
        if (!(next > 0)) break;
        const double fn = objective(next, nullptr, nullptr);
        if (fn > best) break;
        const bool done = std::abs(next - mu) <= 1e-15 * mu;
        mu = next;
        best = fn;
        if (done) break;
    }

    FitResult r;
    r.set("u_plus", up);
    r.set("mu", mu);
    r.set("x0", x0);
    r.set("orientation", orient);
    r.set("width", 2.0 / mu);
    r.residual = best;
    r.n_points = static_cast<int>(xy.size());
    return r;
}

FitResult fit_bifurcation(const std::vector<BifurcationSample>& states, const EigenPair& pair,
                          const Discretization& disc) {
    if (states.size() < 3) throw FitError("fit_bifurcation: at least 3 states are needed");
    const std::size_t n = disc.n_dofs();
    if (pair.v.size() != n) throw ParameterError("fit_bifurcation: mode length differs from the number of DoFs");
    const auto& m = disc.consistent_mass();
    std::vector<double> v = pair.v;
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    if (vmax == 0.0) throw FitError("fit_bifurcation: zero mode");
    for (double& x : v) x /= vmax;
    const auto mv = m * std::span<const double>(v);
    const double vv = std::inner_product(v.begin(), v.end(), mv.begin(), 0.0);

    FitResult r;
    std::vector<double> ds, misfits, eps_list, cs;
    double largest = 0.0;
    for (std::size_t k = 0; k < states.size(); ++k) {
        const auto& s = states[k];
        if (s.u.size() != n) throw ParameterError("fit_bifurcation: state length differs from the number of DoFs");
        const double d = 1.0 / (s.eps * s.eps) - pair.rho;
        if (!(d > 0)) throw ParameterError("fit_bifurcation: state below the threshold 1/eps^2 = rho");
        double uv = std::inner_product(s.u.begin(), s.u.end(), mv.begin(), 0.0);
        const double sign = uv < 0 ? -1.0 : 1.0;
        uv *= sign;
        const double cfit = uv / (std::sqrt(d) * vv);
        std::vector<double> diff(n);
        for (std::size_t i = 0; i < n; ++i) diff[i] = sign * s.u[i] - cfit * std::sqrt(d) * v[i];
        const auto md = m * std::span<const double>(diff);
        const double mis = std::sqrt(std::max(0.0, std::inner_product(diff.begin(), diff.end(), md.begin(), 0.0)));
        const auto mu = m * std::span<const double>(s.u);
        largest = std::max(largest, std::sqrt(std::max(0.0, std::inner_product(s.u.begin(), s.u.end(), mu.begin(), 0.0))));
        ds.push_back(d);
        misfits.push_back(mis);
        eps_list.push_back(s.eps);
        cs.push_back(cfit);
    }
    const bool degenerate =
        std::all_of(misfits.begin(), misfits.end(), [&](double x) { return x <= 1e-12 * std::max(largest, 1e-300); });
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (degenerate) {
        r.set("alpha", nan);
        r.set("C_tilde", nan);
        r.set("alpha_r2", nan);
        r.residual = 0.0;
    } else {
        const auto fit = linear_regression_loglog(ds, misfits);
        r.set("alpha", fit.slope);
        r.set("C_tilde", std::pow(10.0, fit.intercept));
        r.set("alpha_r2", fit.r2);
        double res = 0.0;
        for (std::size_t k = 0; k < ds.size(); ++k) {
            const double e = std::log10(misfits[k]) - (fit.intercept + fit.slope * std::log10(ds[k]));
            res += e * e;
        }
        r.residual = res;
    }
    const auto cfit = linear_regression_loglog(eps_list, cs);
    r.set("c_exponent", cfit.slope);
    r.set("c_prefactor", std::pow(10.0, cfit.intercept));
    for (std::size_t k = 0; k < states.size(); ++k) {
        r.set("eps_" + std::to_string(k), eps_list[k]);
        r.set("C_" + std::to_string(k), cs[k]);
        r.set("misfit_" + std::to_string(k), misfits[k]);
    }
    r.n_points = static_cast<int>(states.size());
    return r;
}

double interface_measure_2d(std::span<const double> u, const Discretization& disc) {
    check_size(u, disc);
    if (disc.dim() != 2) throw ParameterError("interface_measure_2d: 2D field required");
    const auto& mesh = disc.mesh();
    const auto& basis = disc.basis();
    const auto& dofs = disc.dofs();
    const int cells = disc.degree() + 3;
    const int np = cells + 1;
    std::vector<double> val(static_cast<std::size_t>(np * np));
    std::vector<double> phi(basis.n_basis());
    // values at the lattice are the same polynomial combination for every element
    std::vector<double> table(static_cast<std::size_t>(np * np) * basis.n_basis());
    for (int j = 0; j < np; ++j)
        for (int i = 0; i < np; ++i) {
            basis.eval(-1.0 + 2.0 * i / cells, -1.0 + 2.0 * j / cells, phi);
            std::copy(phi.begin(), phi.end(), table.begin() + static_cast<std::ptrdiff_t>((j * np + i) * basis.n_basis()));
        }
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const int* g = dofs.element_dofs(e);
        for (int k = 0; k < np * np; ++k) {
            double s = 0.0;
            const double* row = table.data() + static_cast<std::size_t>(k) * basis.n_basis();
            for (std::size_t b = 0; b < basis.n_basis(); ++b) s += u[static_cast<std::size_t>(g[b])] * row[b];
            val[static_cast<std::size_t>(k)] = s;
        }
        auto at = [&](int i, int j) { return val[static_cast<std::size_t>(j * np + i)]; };
        auto seg = [&](std::array<double, 2> a, std::array<double, 2> b) {
            const Point pa = mesh.map(e, a[0], a[1]), pb = mesh.map(e, b[0], b[1]);
            return std::hypot(pa.x - pb.x, pa.y - pb.y);
        };
        const double h = 2.0 / cells;
        for (int j = 0; j < cells; ++j)
            for (int i = 0; i < cells; ++i) {
                // corners counterclockwise; zero counts as positive
                const double c[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
                const double cx[4] = {-1.0 + h * i, -1.0 + h * (i + 1), -1.0 + h * (i + 1), -1.0 + h * i};
                const double cy[4] = {-1.0 + h * j, -1.0 + h * j, -1.0 + h * (j + 1), -1.0 + h * (j + 1)};
                std::array<std::array<double, 2>, 4> cross;
                int nc = 0;
                for (int ed = 0; ed < 4; ++ed) {
                    const int a = ed, b = (ed + 1) % 4;
                    if ((c[a] >= 0) == (c[b] >= 0)) continue;
                    const double t = c[a] / (c[a] - c[b]);
                    cross[static_cast<std::size_t>(nc)] = {cx[a] + t * (cx[b] - cx[a]), cy[a] + t * (cy[b] - cy[a])};
                    ++nc;
                }
                if (nc == 2) {
                    total += seg(cross[0], cross[1]);
                } else if (nc == 4) {
                    // saddle: the cell centre decides which corners connect
                    const double centre = 0.25 * (c[0] + c[1] + c[2] + c[3]);
                    if ((centre >= 0) == (c[0] >= 0)) {
                        // corners 1 and 3 are cut off
                        total += seg(cross[0], cross[1]) + seg(cross[2], cross[3]);
                    } else {
                        total += seg(cross[3], cross[0]) + seg(cross[1], cross[2]);
                    }
                }
            }
    }
    return total;
}

} // namespace chfem
