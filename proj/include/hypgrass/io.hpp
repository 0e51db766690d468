#pragma once

// JSON codec for points, isometries, flags, boundary data and convex sets,
// and a compact writer that prints every double with 17 significant digits.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hypgrass/boundary.hpp"
#include "hypgrass/cat0.hpp"
#include "hypgrass/kfields.hpp"
#include "hypgrass/space.hpp"

namespace hypgrass::io {

using json = nlohmann::json;

inline constexpr const char* kEnvelopeVersion = "hypgrass-envelope/1";

// ---------------------------------------------------------------------------
// Writer.

namespace detail {

inline void write_string(std::string& out, const std::string& s) {
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

inline void write_double(std::string& out, double x) {
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
  // keep floats recognisable as floats
  if (std::string_view(buf).find_first_of(".eE") == std::string_view::npos) out += ".0";
}

inline void write(std::string& out, const json& j) {
  switch (j.type()) {
    case json::value_t::null: out += "null"; break;
    case json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
    case json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
    case json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
    case json::value_t::number_float: write_double(out, j.get<double>()); break;
    case json::value_t::string: write_string(out, j.get<std::string>()); break;
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ',';
        first = false;
        write(out, e);
      }
      out += ']';
      break;
    }
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        write_string(out, k);
        out += ':';
        write(out, v);
      }
      out += '}';
      break;
    }
    default: out += "null";
  }
}

}  // namespace detail

// Single-line JSON, keys in sorted order, doubles as %.17g.
inline std::string dump(const json& j) {
  std::string out;
  detail::write(out, j);
  return out;
}

// ---------------------------------------------------------------------------
// Reading helpers.

inline json parse_text(const std::string& text, const std::string& what = "input") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(what + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json load_json(const std::string& path) { return parse_text(read_file(path), path); }

// 64-bit FNV-1a, hex.
inline std::string digest(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline const json& need(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) throw InvalidArgument(ctx + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw InvalidArgument(ctx + ": missing field '" + key + "'");
  return *it;
}

inline double number(const json& j, const std::string& ctx) {
  if (!j.is_number()) throw InvalidArgument(ctx + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw InvalidArgument(ctx + ": non-finite number");
  return x;
}

inline int integer(const json& j, const std::string& ctx) {
  if (!j.is_number_integer()) throw InvalidArgument(ctx + ": expected an integer");
  return j.get<int>();
}

}  // namespace detail

inline Mat matrix_from_json(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw InvalidArgument(ctx + ": expected an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  for (const auto& r : j) {
    if (!r.is_array()) throw InvalidArgument(ctx + ": every row must be an array");
    if (cols < 0) cols = static_cast<Eigen::Index>(r.size());
    if (static_cast<Eigen::Index>(r.size()) != cols) throw InvalidArgument(ctx + ": ragged rows");
  }
  Mat m(rows, std::max<Eigen::Index>(cols, 0));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k)
      m(i, k) = detail::number(j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)], ctx);
  return m;
}

inline Vec vector_from_json(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw InvalidArgument(ctx + ": expected an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = detail::number(j[i], ctx);
  return v;
}

inline json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// ---------------------------------------------------------------------------
// PointFile: {"p", "q", "field", "frame"}. Over C and H each frame entry is
// an array [a, b] or [a, b, c, d]; over R a plain number.

struct KPoint {
  Field field = Field::R;
  SignatureForm form;
  Mat frame;  // real storage, d(p+q) x p

  KStructure structure() const { return KStructure(field, form); }

  Point real_point(const Tolerance& tol = {}) const {
    if (field == Field::R) return Point::from_frame(form, frame);
    return realify_point(structure(), frame, tol);
  }
};

inline SignatureForm form_from_json(const json& j, const std::string& ctx) {
  const int p = detail::integer(detail::need(j, "p", ctx), ctx + ".p");
  const int q = detail::integer(detail::need(j, "q", ctx), ctx + ".q");
  return SignatureForm(p, q);
}

inline KPoint kpoint_from_json(const json& j, const std::string& ctx = "PointFile") {
  KPoint kp;
  kp.form = form_from_json(j, ctx);
  if (j.contains("field")) {
    if (!j["field"].is_string()) throw InvalidArgument(ctx + ".field: expected a string");
    kp.field = parse_field(j["field"].get<std::string>());
  }
  const int d = kp.field == Field::R ? 1 : kp.field == Field::C ? 2 : 4;
  const json& fr = detail::need(j, "frame", ctx);
  const int n = kp.form.dim(), p = kp.form.p();
  if (!fr.is_array() || static_cast<int>(fr.size()) != n)
    throw DimensionError(ctx + ".frame: expected " + std::to_string(n) + " rows");
  kp.frame = Mat(d * n, p);
  for (int i = 0; i < n; ++i) {
    const json& row = fr[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != p)
      throw DimensionError(ctx + ".frame: expected " + std::to_string(p) + " columns");
    for (int k = 0; k < p; ++k) {
      const json& e = row[static_cast<std::size_t>(k)];
      if (d == 1) {
        kp.frame(i, k) = detail::number(e, ctx + ".frame");
      } else {
        if (!e.is_array() || static_cast<int>(e.size()) != d)
          throw DimensionError(ctx + ".frame: entries over " + field_name(kp.field) + " have " + std::to_string(d) +
                               " reals");
        for (int c = 0; c < d; ++c) kp.frame(d * i + c, k) = detail::number(e[static_cast<std::size_t>(c)], ctx);
      }
    }
  }
  return kp;
}

inline json to_json(const KPoint& kp) {
  const int d = kp.field == Field::R ? 1 : kp.field == Field::C ? 2 : 4;
  json rows = json::array();
  for (int i = 0; i < kp.form.dim(); ++i) {
    json r = json::array();
    for (int k = 0; k < kp.form.p(); ++k) {
      if (d == 1) {
        r.push_back(kp.frame(i, k));
      } else {
        json e = json::array();
        for (int c = 0; c < d; ++c) e.push_back(kp.frame(d * i + c, k));
        r.push_back(std::move(e));
      }
    }
    rows.push_back(std::move(r));
  }
  return json{{"p", kp.form.p()}, {"q", kp.form.q()}, {"field", field_name(kp.field)}, {"frame", rows}};
}

inline json to_json(const Point& x) { return to_json(KPoint{Field::R, x.form(), x.frame()}); }

inline Point point_from_json(const json& j, const Tolerance& tol = {}, const std::string& ctx = "PointFile") {
  return kpoint_from_json(j, ctx).real_point(tol);
}

// IsometryFile: {"p", "q", "matrix"}.
inline json to_json(const Isometry& g) {
  return json{{"p", g.form().p()}, {"q", g.form().q()}, {"matrix", to_json(g.matrix())}};
}

inline Isometry isometry_from_json(const json& j, const Tolerance& tol = {}) {
  const SignatureForm form = form_from_json(j, "IsometryFile");
  const Mat m = matrix_from_json(detail::need(j, "matrix", "IsometryFile"), "IsometryFile.matrix");
  if (m.rows() != form.dim() || m.cols() != form.dim()) throw DimensionError("IsometryFile: matrix must be (p+q)x(p+q)");
  return Isometry(form, m, std::max(tol.isometry, 1e-8));
}

// BoundaryFile: {"base": PointFile, "u", "v", "lambda"}.
inline json to_json(const BoundaryPoint& xi) {
  return json{{"base", to_json(xi.base())},
              {"u", to_json(xi.chart.u)},
              {"v", to_json(xi.chart.v)},
              {"lambda", to_json(xi.lambda)}};
}

inline BoundaryPoint boundary_from_json(const json& j, const Tolerance& tol = {}) {
  const Point base = point_from_json(detail::need(j, "base", "BoundaryFile"), tol, "BoundaryFile.base");
  FlatChart chart{base, matrix_from_json(detail::need(j, "u", "BoundaryFile"), "BoundaryFile.u"),
                  matrix_from_json(detail::need(j, "v", "BoundaryFile"), "BoundaryFile.v")};
  chart.validate();
  const Vec lam = vector_from_json(detail::need(j, "lambda", "BoundaryFile"), "BoundaryFile.lambda");
  if (lam.size() != base.form().p()) throw DimensionError("BoundaryFile.lambda: expected p entries");
  BoundaryPoint xi = std::abs(std::sqrt(2.0) * lam.norm() - 1.0) <= 1e-12 ? BoundaryPoint{chart, lam}
                                                                            : BoundaryPoint::from_direction(chart, lam);
  xi.validate();
  return xi;
}

// FlagFile: {"p", "q", "dims", "subspaces"}.
inline json to_json(const IsotropicFlag& f) {
  json subs = json::array();
  for (const auto& s : f.subspaces) subs.push_back(to_json(s));
  return json{{"p", f.form.p()}, {"q", f.form.q()}, {"dims", f.dims()}, {"subspaces", subs}};
}

inline IsotropicFlag flag_from_json(const json& j) {
  IsotropicFlag f{form_from_json(j, "FlagFile"), {}};
  const json& subs = detail::need(j, "subspaces", "FlagFile");
  if (!subs.is_array()) throw InvalidArgument("FlagFile.subspaces: expected an array");
  for (const auto& s : subs) f.subspaces.push_back(matrix_from_json(s, "FlagFile.subspaces"));
  if (j.contains("dims")) {
    const auto dims = f.dims();
    if (!j["dims"].is_array() || j["dims"].size() != dims.size())
      throw InvalidArgument("FlagFile.dims: does not match the subspaces");
    for (std::size_t k = 0; k < dims.size(); ++k)
      if (detail::integer(j["dims"][k], "FlagFile.dims") != dims[k])
        throw InvalidArgument("FlagFile.dims: does not match the subspaces");
  }
  f.validate();
  return f;
}

// FlatChart: {"base", "u", "v"}.
inline json to_json(const FlatChart& c) {
  return json{{"base", to_json(c.base)}, {"u", to_json(c.u)}, {"v", to_json(c.v)}};
}

inline FlatChart chart_from_json(const json& j, const Tolerance& tol = {}) {
  FlatChart c{point_from_json(detail::need(j, "base", "FlatChart"), tol, "FlatChart.base"),
              matrix_from_json(detail::need(j, "u", "FlatChart"), "FlatChart.u"),
              matrix_from_json(detail::need(j, "v", "FlatChart"), "FlatChart.v")};
  c.validate();
  return c;
}

// ConvexSet: {"kind": "ball" | "horoball" | "subflat" | "totally_geodesic", ...}.
inline json to_json(const ConvexSet& s) {
  if (const auto* b = std::get_if<Ball>(&s))
    return json{{"kind", "ball"}, {"center", to_json(b->center)}, {"radius", b->radius}};
  if (const auto* h = std::get_if<Horoball>(&s))
    return json{{"kind", "horoball"}, {"xi", to_json(h->xi)}, {"level", h->level}};
  if (const auto* f = std::get_if<Subflat>(&s))
    return json{{"kind", "subflat"},
                {"chart", to_json(f->chart)},
                {"offset", to_json(f->offset)},
                {"directions", to_json(f->directions)}};
  const auto& tg = std::get<TotallyGeodesic>(s);
  return json{{"kind", "totally_geodesic"}, {"q_sub", tg.q_sub}};
}

inline ConvexSet convex_set_from_json(const json& j, const Tolerance& tol = {}) {
  const json& k = detail::need(j, "kind", "ConvexSet");
  if (!k.is_string()) throw InvalidArgument("ConvexSet.kind: expected a string");
  const std::string kind = k.get<std::string>();
  if (kind == "ball") {
    const double r = detail::number(detail::need(j, "radius", "ball"), "ball.radius");
    if (r < 0) throw InvalidArgument("ball.radius: must be >= 0");
    return Ball{point_from_json(detail::need(j, "center", "ball"), tol, "ball.center"), r};
  }
  if (kind == "horoball")
    return Horoball{boundary_from_json(detail::need(j, "xi", "horoball"), tol),
                    detail::number(detail::need(j, "level", "horoball"), "horoball.level")};
  if (kind == "subflat") {
    const FlatChart c = chart_from_json(detail::need(j, "chart", "subflat"), tol);
    const Vec off = vector_from_json(detail::need(j, "offset", "subflat"), "subflat.offset");
    Mat dirs(c.form().p(), 0);
    if (j.contains("directions")) {
      dirs = matrix_from_json(j["directions"], "subflat.directions");
      if (dirs.rows() == 0) dirs = Mat(c.form().p(), 0);
    }
    return Subflat::make(c, off, dirs);
  }
  if (kind == "totally_geodesic") return TotallyGeodesic{detail::integer(detail::need(j, "q_sub", "totally_geodesic"), "q_sub")};
  throw InvalidArgument("ConvexSet.kind: unknown kind '" + kind + "'");
}

// Chain file: {"sets": [ConvexSet, ...]}.
inline std::vector<ConvexSet> chain_from_json(const json& j, const Tolerance& tol = {}) {
  const json& sets = detail::need(j, "sets", "chain");
  if (!sets.is_array() || sets.empty()) throw InvalidArgument("chain.sets: expected a non-empty array");
  std::vector<ConvexSet> out;
  for (const auto& s : sets) out.push_back(convex_set_from_json(s, tol));
  return out;
}

inline json to_json(const std::vector<ConvexSet>& chain) {
  json sets = json::array();
  for (const auto& s : chain) sets.push_back(to_json(s));
  return json{{"sets", sets}};
}

// Point sets: a PointFile, or {"points": [PointFile, ...]}.
inline std::vector<Point> points_from_json(const json& j, const Tolerance& tol = {}) {
  std::vector<Point> out;
  if (j.is_object() && j.contains("points")) {
    if (!j["points"].is_array()) throw InvalidArgument("points: expected an array");
    for (const auto& p : j["points"]) out.push_back(point_from_json(p, tol));
  } else {
    out.push_back(point_from_json(j, tol));
  }
  return out;
}

// Which file kind a JSON document holds.
inline std::string file_kind(const json& j) {
  if (!j.is_object()) return "unknown";
  if (j.contains("sets")) return "chain";
  if (j.contains("points")) return "points";
  if (j.contains("kind")) return "convex_set";
  if (j.contains("subspaces")) return "flag";
  if (j.contains("matrix")) return "isometry";
  if (j.contains("lambda") && j.contains("base")) return "boundary";
  if (j.contains("frame")) return "point";
  return "unknown";
}

}  // namespace hypgrass::io
