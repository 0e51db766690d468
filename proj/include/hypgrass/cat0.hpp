#pragma once

// CAT(0) procedures on X_{p,q}: convex sets and projections, circumcentres,
// the Jung probe, nested intersections and centres of directions.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hypgrass/boundary.hpp"
#include "hypgrass/comparison.hpp"
#include "hypgrass/space.hpp"

namespace hypgrass {

struct Ball {
  Point center;
  double radius = 0;
};

// {x : beta_xi(x, xi.base()) <= level}
struct Horoball {
  BoundaryPoint xi;
  double level = 0;
};

// exp_map(chart, offset + D s), s in R^k; D has orthonormal columns.
struct Subflat {
  FlatChart chart;
  Vec offset;
  Mat directions;

  static Subflat make(const FlatChart& chart, const Vec& offset, const Mat& directions) {
    const Eigen::Index p = chart.u.cols();
    if (offset.size() != p || (directions.cols() > 0 && directions.rows() != p))
      throw DimensionError("Subflat: offset and directions live in R^p");
    Mat d(p, 0);
    if (directions.cols() > 0) {
      Eigen::ColPivHouseholderQR<Mat> qr(directions);
      if (qr.rank() != directions.cols()) throw InvalidArgument("Subflat: directions are dependent");
      d = qr.householderQ() * Mat::Identity(p, directions.cols());
    }
    return Subflat{chart, offset, d};
  }
};

// X_{p,q'} inside X_{p,q}: frames supported on the first p + q' coordinates.
struct TotallyGeodesic {
  int q_sub = 0;
};

using ConvexSet = std::variant<Ball, Horoball, Subflat, TotallyGeodesic>;

inline std::string kind_name(const ConvexSet& s) {
  switch (s.index()) {
    case 0: return "ball";
    case 1: return "horoball";
    case 2: return "subflat";
    default: return "totally_geodesic";
  }
}

inline bool is_bounded(const ConvexSet& s) {
  if (std::holds_alternative<Ball>(s)) return true;
  if (const auto* f = std::get_if<Subflat>(&s)) return f->directions.cols() == 0;
  return false;
}

// ---------------------------------------------------------------------------
// Projections.

namespace detail {

inline Mat reflect_tail(const SignatureForm& form, int q_sub, const Mat& frame) {
  Mat r = frame;
  r.bottomRows(form.q() - q_sub) *= -1.0;
  return r;
}

inline double horoball_value(const Horoball& h, const Point& x, const Tolerance& tol) {
  return busemann_potential(h.xi, x, tol) - busemann_potential(h.xi, h.xi.base(), tol);
}

// Gradient of -1/2 d(x, z(mu))^2 in chart coordinates mu.
inline Vec flat_gradient(const FlatChart& chart, const Vec& mu, const Point& x, const Tolerance& tol) {
  const SignatureForm& form = chart.form();
  const int p = form.p();
  const Point z = exp_map(chart, mu);
  const Mat t = log_tangent(z, x, tol);
  const Mat zc = flat_frame(chart, mu);
  const Mat o = cross_gram(form, zc, z.frame());
  Vec g(p);
  for (int k = 0; k < p; ++k) {
    const Vec vt = std::sinh(mu(k)) * chart.u.col(k) + std::cosh(mu(k)) * chart.v.col(k);
    const Mat lk = vt * o.row(k);
    g(k) = tangent_inner(form, t, lk);
  }
  return g;
}

inline Point project_subflat(const Subflat& s, const Point& x, const Tolerance& tol) {
  const Eigen::Index k = s.directions.cols();
  if (k == 0) return exp_map(s.chart, s.offset);
  Vec sv = Vec::Zero(k);
  auto at = [&](const Vec& v) { return exp_map(s.chart, s.offset + s.directions * v); };
  auto grad = [&](const Vec& v) {
    // gradient of f(s) = 1/2 d^2 in s
    return Vec(-s.directions.transpose() * flat_gradient(s.chart, s.offset + s.directions * v, x, tol));
  };
  double f = 0.5 * std::pow(distance(x, at(sv), tol), 2);
  for (int it = 0; it < tol.max_iter; ++it) {
    const Vec g = grad(sv);
    // finite-difference Hessian of the analytic gradient
    Mat h(k, k);
    const double eps = 1e-5;
    for (Eigen::Index j = 0; j < k; ++j) {
      Vec e = Vec::Zero(k);
      e(j) = eps;
      h.col(j) = (grad(sv + e) - grad(sv - e)) / (2 * eps);
    }
    h = 0.5 * (h + h.transpose());
    Vec step;
    Eigen::LDLT<Mat> ldlt(h);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) step = -ldlt.solve(g);
    if (step.size() == 0 || !step.allFinite() || step.dot(g) >= 0) step = -0.5 * g;
    double a = 1.0;
    Vec next = sv + step;
    double fn = 0.5 * std::pow(distance(x, at(next), tol), 2);
    while (fn > f + 1e-14 * (1 + f) && a > 1e-10) {
      a *= 0.5;
      next = sv + a * step;
      fn = 0.5 * std::pow(distance(x, at(next), tol), 2);
    }
    const double moved = (a * step).norm();
    sv = next;
    f = std::min(f, fn);
    if (moved < tol.solver_step) return at(sv);
  }
  throw ConvergenceError("project(subflat): iteration cap reached", grad(sv).norm());
}

}  // namespace detail

inline Point project(const ConvexSet& set, const Point& x, const Tolerance& tol = {}) {
  if (const auto* b = std::get_if<Ball>(&set)) {
    detail::require_same_form(b->center.form(), x.form());
    const auto g = geodesic(b->center, x, tol);
    if (g.length <= b->radius) return x;
    return g.at_distance(b->radius);
  }
  if (const auto* h = std::get_if<Horoball>(&set)) {
    const double excess = detail::horoball_value(*h, x, tol) - h->level;
    if (excess <= 0) return x;
    // Busemann functions drop at unit speed along the ray from x to xi.
    return ray_point(rebase(h->xi, x, tol), excess);
  }
  if (const auto* s = std::get_if<Subflat>(&set)) return detail::project_subflat(*s, x, tol);
  const auto& tg = std::get<TotallyGeodesic>(set);
  const SignatureForm& form = x.form();
  if (tg.q_sub < form.p() || tg.q_sub >= form.q())
    throw InvalidArgument("totally_geodesic: need p <= q' < q");
  // X_{p,q'} is the fixed set of a reflection s; for y fixed,
  // d(x, y) = d(sx, y) >= d(x, sx) / 2, with equality at the midpoint.
  const Point sx(form, detail::reflect_tail(form, tg.q_sub, x.frame()));
  const Point m = midpoint(x, sx, tol);
  Mat frame = m.frame();
  frame.bottomRows(form.q() - tg.q_sub).setZero();
  return Point(form, frame);
}

inline bool contains(const ConvexSet& set, const Point& x, double slack = 1e-8, const Tolerance& tol = {}) {
  if (const auto* b = std::get_if<Ball>(&set)) return distance(b->center, x, tol) <= b->radius + slack;
  if (const auto* h = std::get_if<Horoball>(&set)) return detail::horoball_value(*h, x, tol) <= h->level + slack;
  if (const auto* tg = std::get_if<TotallyGeodesic>(&set)) {
    const Mat& f = x.frame();
    return f.bottomRows(x.form().q() - tg->q_sub).cwiseAbs().maxCoeff() <= slack * std::max(1.0, f.cwiseAbs().maxCoeff());
  }
  return distance(project(set, x, tol), x, tol) <= slack;
}

// ---------------------------------------------------------------------------
// Circumcentres.

struct Circumcenter {
  Point center;
  double radius = 0;
  int iterations = 0;
  bool converged = false;
  double last_step = 0;
};

namespace detail {

// Minimum enclosing ball of the columns of c: dual over the simplex with
// pairwise (most violating pair) updates, then an exact solve on the support.
inline Vec euclidean_meb_center(const Mat& c, double* radius = nullptr) {
  const Eigen::Index m = c.cols();
  const Mat g = c.transpose() * c;
  const Vec a = g.diagonal();
  Vec w = Vec::Zero(m);
  Eigen::Index far = 0;
  a.maxCoeff(&far);
  w(far) = 1.0;
  Vec gw = g * w;
  const double scale = std::max(1e-300, a.maxCoeff());
  for (int it = 0; it < 100000; ++it) {
    const Vec grad = a - 2.0 * gw;  // |c_i - center|^2 - |center|^2
    Eigen::Index i = 0, j = -1;
    grad.maxCoeff(&i);
    double gj = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < m; ++k)
      if (w(k) > 0 && grad(k) < gj) {
        gj = grad(k);
        j = k;
      }
    if (j < 0 || grad(i) - gj <= 1e-15 * scale) break;
    const double den = 2.0 * (a(i) + a(j) - 2.0 * g(i, j));
    if (den <= 0) break;
    const double delta = std::min(w(j), (grad(i) - gj) / den);
    w(i) += delta;
    w(j) -= delta;
    gw += delta * (g.col(i) - g.col(j));
  }
  Vec center = c * w;
  double r2 = ((c.colwise() - center).colwise().squaredNorm()).maxCoeff();
  // polish on the support
  std::vector<Eigen::Index> sup;
  for (Eigen::Index k = 0; k < m; ++k)
    if (w(k) > 1e-12) sup.push_back(k);
  if (sup.size() >= 2) {
    const Eigen::Index s = static_cast<Eigen::Index>(sup.size()) - 1;
    Mat a_sys(s, s);
    Vec rhs(s);
    const Vec c0 = c.col(sup[0]);
    Mat diffs(c.rows(), s);
    for (Eigen::Index k = 0; k < s; ++k) diffs.col(k) = c.col(sup[k + 1]) - c0;
    // center = c0 + diffs beta, |center - c_k|^2 equal for all support points
    a_sys = 2.0 * diffs.transpose() * diffs;
    for (Eigen::Index k = 0; k < s; ++k) rhs(k) = diffs.col(k).squaredNorm();
    const Vec beta = a_sys.colPivHouseholderQr().solve(rhs);
    const Vec cand = c0 + diffs * beta;
    const double r2c = ((c.colwise() - cand).colwise().squaredNorm()).maxCoeff();
    if (cand.allFinite() && r2c <= r2) {
      center = cand;
      r2 = r2c;
    }
  } else if (sup.size() == 1) {
    center = c.col(sup[0]);
    r2 = ((c.colwise() - center).colwise().squaredNorm()).maxCoeff();
  }
  if (radius) *radius = std::sqrt(r2);
  return center;
}

inline double max_distance(const Point& z, const std::vector<Point>& pts, const Tolerance& tol,
                           std::size_t* arg = nullptr) {
  double best = -1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = distance(z, pts[i], tol);
    if (d > best) {
      best = d;
      if (arg) *arg = i;
    }
  }
  return best;
}

}  // namespace detail

// Minimax centre. Warm start: z <- point 1/(k+2) of the way to the farthest
// input. Then, repeatedly, the Euclidean minimum enclosing ball of the log
// images at z gives the step; backtracking keeps the true radius decreasing.
inline Circumcenter circumcenter(const std::vector<Point>& pts, const Tolerance& tol = {}, int warm_iterations = 50) {
  if (pts.empty()) throw InvalidArgument("circumcenter: empty input");
  for (const auto& x : pts) detail::require_same_form(pts[0].form(), x.form());
  if (pts.size() == 1) return Circumcenter{pts[0], 0.0, 0, true, 0.0};
  if (pts.size() == 2) {
    const auto g = geodesic(pts[0], pts[1], tol);
    return Circumcenter{g.at(0.5), 0.5 * g.length, 0, true, 0.0};
  }
  const SignatureForm& form = pts[0].form();
  Point z = pts[0];
  int it = 0;
  for (; it < warm_iterations; ++it) {
    std::size_t far = 0;
    detail::max_distance(z, pts, tol, &far);
    z = geodesic(z, pts[far], tol).at(1.0 / (it + 2.0));
  }
  double r = detail::max_distance(z, pts, tol);
  double step_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (; it < tol.max_iter; ++it) {
    const Mat n = normal_basis(z);
    Mat c(form.p() * form.q(), static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i)
      c.col(static_cast<Eigen::Index>(i)) = tangent_coords(form, n, log_tangent(z, pts[i], tol));
    const Vec ctr = detail::euclidean_meb_center(c);
    step_norm = ctr.norm();
    if (step_norm <= tol.circum * (1.0 + r)) {
      converged = true;
      break;
    }
    double a = 1.0;
    bool moved = false;
    while (a > 1e-8) {
      const Point cand = exp_tangent(z, tangent_from_coords(n, a * ctr, form.p()));
      const double rc = detail::max_distance(cand, pts, tol);
      if (rc < r) {
        z = cand;
        r = rc;
        moved = true;
        break;
      }
      a *= 0.5;
    }
    if (!moved) {
      // the step is below what the radius can resolve
      converged = step_norm <= 1e-7 * (1.0 + r);
      break;
    }
  }
  if (!converged && it >= tol.max_iter)
    throw ConvergenceError("circumcenter: iteration cap reached", step_norm);
  return Circumcenter{z, r, it, converged, step_norm};
}

// ---------------------------------------------------------------------------

struct JungResult {
  double ratio = 0;
  double bound = 0;
  bool pass = false;
  double radius = 0;
  double diameter = 0;
};

inline double jung_bound(int n, double delta) {
  return std::sqrt(n / (2.0 * (n + 1.0))) + delta;
}

inline JungResult jung_probe(const std::vector<Point>& pts, int n, double delta = 0.05, const Tolerance& tol = {}) {
  if (pts.size() < 2) throw InvalidArgument("jung_probe: need at least two points");
  if (n < 1) throw InvalidArgument("jung_probe: n must be >= 1");
  double diam = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) diam = std::max(diam, distance(pts[i], pts[j], tol));
  if (diam == 0) throw InvalidArgument("jung_probe: all points coincide");
  const auto cc = circumcenter(pts, tol);
  JungResult r;
  r.radius = cc.radius;
  r.diameter = diam;
  r.ratio = cc.radius / diam;
  r.bound = jung_bound(n, delta);
  r.pass = r.ratio <= r.bound;
  return r;
}

// ---------------------------------------------------------------------------
// Nested chains.

struct NestedResult {
  Point point;
  std::vector<Point> centers;
  std::vector<double> radii;
  std::vector<double> steps;        // d(c_i, c_{i+1})
  double max_audit_excess = 0;      // max of d^2 - 2 (r_i^2 - r_{i+1}^2)
  bool audit_ok = true;
  bool converged = false;           // last step below tol.limit
};

namespace detail {

inline std::pair<Point, double> bounded_center(const ConvexSet& s) {
  if (const auto* b = std::get_if<Ball>(&s)) return {b->center, b->radius};
  if (const auto* f = std::get_if<Subflat>(&s); f && f->directions.cols() == 0)
    return {exp_map(f->chart, f->offset), 0.0};
  throw InvalidArgument("nested_intersection: set is unbounded (" + kind_name(s) + ")");
}

}  // namespace detail

inline NestedResult nested_intersection(const std::vector<ConvexSet>& chain, const Tolerance& tol = {}) {
  if (chain.empty()) throw InvalidArgument("nested_intersection: empty chain");
  NestedResult r{detail::bounded_center(chain[0]).first, {}, {}, {}, 0, true, false};
  for (const auto& s : chain) {
    auto [c, rad] = detail::bounded_center(s);
    r.centers.push_back(c);
    r.radii.push_back(rad);
  }
  const double slack = std::max(1e-7, tol.same_point * 10);
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    const double d = distance(r.centers[i], r.centers[i + 1], tol);
    // balls: B(c', r') inside B(c, r) iff d + r' <= r
    if (d + r.radii[i + 1] > r.radii[i] + slack)
      throw InvalidArgument("nested_intersection: chain is not nested at position " + std::to_string(i + 1));
    r.steps.push_back(d);
    const double excess = d * d - 2.0 * (r.radii[i] * r.radii[i] - r.radii[i + 1] * r.radii[i + 1]);
    r.max_audit_excess = std::max(r.max_audit_excess, excess);
  }
  r.audit_ok = r.max_audit_excess <= slack;
  r.point = r.centers.back();
  r.converged = r.steps.empty() || r.steps.back() < tol.limit;
  return r;
}

// ---------------------------------------------------------------------------
// Centre of directions.

struct CenterOfDirections {
  BoundaryPoint xi;
  bool bounded_case = false;      // tail points at each t coincide
  std::vector<double> t;
  std::vector<double> tail_radius;  // circumradius of the tail at each t
  std::vector<double> drift;        // angle at base between successive centres
  double max_drift = 0;             // over the second half of the grid
  bool drift_ok = true;
};

// Core construction from the projections x_i of the base onto the sets.
inline CenterOfDirections center_of_directions_from_points(const Point& base, const std::vector<Point>& xs,
                                                           const std::vector<double>& t_grid, int tail = 5,
                                                           const Tolerance& tol = {}) {
  if (xs.empty()) throw InvalidArgument("center_of_directions: no points");
  if (t_grid.empty()) throw InvalidArgument("center_of_directions: empty t grid");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) || t_grid.front() <= 0)
    throw InvalidArgument("center_of_directions: t grid must be increasing and positive");
  if (tail < 1) throw InvalidArgument("center_of_directions: tail must be >= 1");
  std::vector<Geodesic> segs;
  for (const auto& x : xs) segs.push_back(geodesic(base, x, tol));
  const std::size_t from = xs.size() > static_cast<std::size_t>(tail) ? xs.size() - tail : 0;
  for (std::size_t j = from; j < xs.size(); ++j)
    if (segs[j].length <= tol.same_point)
      throw InvalidArgument("center_of_directions: base lies in the last set (intersection is non-empty)");

  CenterOfDirections out{BoundaryPoint{FlatChart::standard(base.form()), Vec()}, false, {}, {}, {}, 0, true};
  std::vector<Point> centers;
  double max_rad = 0;
  for (double t : t_grid) {
    std::vector<Point> pts;
    for (std::size_t j = from; j < xs.size(); ++j) pts.push_back(segs[j].at_distance(std::min(t, segs[j].length)));
    const auto cc = circumcenter(pts, tol);
    out.t.push_back(t);
    out.tail_radius.push_back(cc.radius);
    max_rad = std::max(max_rad, cc.radius);
    centers.push_back(cc.center);
  }
  out.bounded_case = max_rad <= 1e-6 * (1.0 + t_grid.back());
  for (std::size_t k = 0; k + 1 < centers.size(); ++k) {
    double a = 0.0;
    if (!same_point(base, centers[k], tol) && !same_point(base, centers[k + 1], tol))
      a = alexandrov_angle(base, centers[k], centers[k + 1], tol);
    out.drift.push_back(a);
    if (k + 1 >= centers.size() / 2) out.max_drift = std::max(out.max_drift, a);
  }
  out.drift_ok = out.max_drift <= tol.drift;
  const Point& target = out.bounded_case ? xs.back() : centers.back();
  if (same_point(base, target, tol)) throw DegenerateError("center_of_directions: no direction at the base");
  const auto lg = log_map(base, target, tol);
  out.xi = BoundaryPoint::from_direction(lg.chart, lg.lambda);
  return out;
}

inline CenterOfDirections center_of_directions(const std::vector<ConvexSet>& chain, const Point& base,
                                               const std::vector<double>& t_grid, int tail = 5,
                                               const Tolerance& tol = {}) {
  if (chain.empty()) throw InvalidArgument("center_of_directions: empty chain");
  if (std::all_of(chain.begin(), chain.end(), [](const ConvexSet& s) { return is_bounded(s); }))
    throw InvalidArgument("center_of_directions: chain of bounded sets has non-empty intersection");
  std::vector<Point> xs;
  for (const auto& s : chain) xs.push_back(project(s, base, tol));
  return center_of_directions_from_points(base, xs, t_grid, tail, tol);
}

}  // namespace hypgrass
