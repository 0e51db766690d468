#pragma once

// Command-line front end. run() parses one invocation, writes one JSON
// envelope per command to `out` and returns the exit code:
//   0 success, 2 invalid input, 3 numerical non-convergence, 64 unknown command.

#include <CLI11.hpp>

#include <algorithm>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hypgrass/boundary.hpp"
#include "hypgrass/cat0.hpp"
#include "hypgrass/io.hpp"
#include "hypgrass/kfields.hpp"
#include "hypgrass/space.hpp"
#include "hypgrass/tolerance.hpp"

namespace hypgrass::cli {

using io::json;

inline constexpr int kOk = 0;
inline constexpr int kInvalid = 2;
inline constexpr int kNoConvergence = 3;
inline constexpr int kUnknownCommand = 64;

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {
      "validate", "angles",    "dist",      "geodesic",     "midpoint",         "transvect", "witt",
      "circumcenter", "jung",  "project",   "busemann",     "tits-angle",       "delta-dir", "flag-of",
      "flag-to-boundary", "stab-check", "center-of-directions", "realify", "random-point", "plot-data"};
  return c;
}

inline std::string usage() {
  std::string u = "usage: hypgrass [--tol-profile strict|default|loose] [--batch FILE] <command> [args]\ncommands:";
  for (const auto& c : commands()) u += " " + c;
  return u + "\n";
}

// Per-invocation state shared by the handlers.
struct Context {
  Tolerance tol;
  std::string profile = "default";
  json inputs = json::array();
  json diagnostics = json::object();
  int exit_code = kOk;

  json load(const std::string& path) {
    const std::string bytes = io::read_file(path);
    inputs.push_back(io::digest(bytes));
    return io::parse_text(bytes, path);
  }
  io::KPoint kpoint(const std::string& path) { return io::kpoint_from_json(load(path), path); }
  Point point(const std::string& path) { return kpoint(path).real_point(tol); }
  BoundaryPoint boundary(const std::string& path) { return io::boundary_from_json(load(path), tol); }
};

namespace detail {

inline json tolerances_json(const Tolerance& t) {
  return json{{"eig", t.eig},           {"clamp", t.clamp},   {"angle_zero", t.angle_zero},
              {"isometry", t.isometry}, {"same_point", t.same_point}, {"cluster", t.cluster},
              {"angle", t.angle},       {"solver_step", t.solver_step}, {"circum", t.circum},
              {"limit", t.limit},       {"drift", t.drift},   {"max_iter", t.max_iter}};
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string w; ss >> w;) out.push_back(w);
  return out;
}

inline std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InvalidArgument("bad number '" + tok + "' in grid");
    }
  }
  return out;
}

// span [I; Z] with Z a random K-matrix rescaled to operator norm tanh(spread |Z|) < 1.
inline Mat random_kframe(const KStructure& ks, std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const int d = ks.d(), p = ks.form().p(), q = ks.form().q();
  Mat f = Mat::Zero(d * (p + q), p);
  for (int j = 0; j < p; ++j) f(d * j, j) = 1.0;
  Mat z(d * q, p);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = nd(rng);
  f.bottomRows(d * q) = z;
  // operator norm of the realified block equals the K-operator norm
  const Mat zr = realify_frame(ks, f).bottomRows(d * q);
  const double s = Eigen::JacobiSVD<Mat>(zr).singularValues()(0);
  if (s > 0) f.bottomRows(d * q) *= std::tanh(spread * s) / s;
  return f;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Command handlers. Each returns the result payload.

struct Args {
  std::vector<std::string> files;
  double t = 0.5;
  double tmax = 1e4;
  int n = 0;
  double delta = 0.05;
  std::uint64_t seed = 0;
  double spread = 1.0;
  int p = 1, q = 1;
  std::string field = "R";
  std::string base;
  std::string tgrid = "1,2,4,8,16,32,64,128,256,512,1000";
  int tail = 5;
  int samples = 21;
};

inline void need_files(const Args& a, std::size_t k, const char* cmd) {
  if (a.files.size() != k)
    throw InvalidArgument(std::string(cmd) + ": expected " + std::to_string(k) + " input files, got " +
                          std::to_string(a.files.size()));
}

inline json cmd_validate(Context& c, const Args& a) {
  if (a.files.empty()) throw InvalidArgument("validate: no input files");
  json out = json::array();
  for (const auto& f : a.files) {
    const json j = c.load(f);
    const std::string kind = io::file_kind(j);
    json r{{"file", f}, {"kind", kind}};
    if (kind == "point") {
      const auto kp = io::kpoint_from_json(j, f);
      const Point x = kp.real_point(c.tol);
      r["gram_residual"] = x.gram_residual();
      if (kp.field != Field::R) r["structure_invariance"] = structure_invariance(kp.structure(), x);
    } else if (kind == "isometry") {
      const Isometry g = io::isometry_from_json(j, c.tol);
      r["form_residual"] = g.residual();
    } else if (kind == "boundary") {
      const BoundaryPoint xi = io::boundary_from_json(j, c.tol);
      r["chart_residual"] = xi.chart.residual();
    } else if (kind == "flag") {
      const IsotropicFlag fl = io::flag_from_json(j);
      r["dims"] = fl.dims();
    } else if (kind == "convex_set") {
      r["set_kind"] = kind_name(io::convex_set_from_json(j, c.tol));
    } else if (kind == "chain") {
      r["length"] = io::chain_from_json(j, c.tol).size();
    } else if (kind == "points") {
      r["count"] = io::points_from_json(j, c.tol).size();
    } else {
      throw InvalidArgument(f + ": unrecognised file kind");
    }
    r["valid"] = true;
    out.push_back(r);
  }
  return out;
}

inline json cmd_angles(Context& c, const Args& a) {
  need_files(a, 2, "angles");
  const auto e = c.kpoint(a.files[0]), f = c.kpoint(a.files[1]);
  if (e.field != f.field || e.form != f.form) throw DimensionError("angles: points differ in field or form");
  if (e.field != Field::R) {
    c.diagnostics["field"] = field_name(e.field);
    return io::to_json(angles_K(e.structure(), e.frame, f.frame, c.tol).alphas);
  }
  return io::to_json(principal_angles(e.real_point(c.tol), f.real_point(c.tol), c.tol).alphas);
}

inline json cmd_dist(Context& c, const Args& a) {
  need_files(a, 2, "dist");
  const auto e = c.kpoint(a.files[0]), f = c.kpoint(a.files[1]);
  if (e.field != f.field || e.form != f.form) throw DimensionError("dist: points differ in field or form");
  if (e.field != Field::R) return distance_K(e.structure(), e.frame, f.frame, c.tol);
  return distance(e.real_point(c.tol), f.real_point(c.tol), c.tol);
}

inline json cmd_geodesic(Context& c, const Args& a) {
  need_files(a, 2, "geodesic");
  const auto g = geodesic(c.point(a.files[0]), c.point(a.files[1]), c.tol);
  c.diagnostics["length"] = g.length;
  return io::to_json(g.at(a.t));
}

inline json cmd_midpoint(Context& c, const Args& a) {
  need_files(a, 2, "midpoint");
  return io::to_json(midpoint(c.point(a.files[0]), c.point(a.files[1]), c.tol));
}

inline json cmd_transvect(Context& c, const Args& a) {
  need_files(a, 2, "transvect");
  const Isometry g = transvection(c.point(a.files[0]), c.point(a.files[1]), a.t, c.tol);
  c.diagnostics["form_residual"] = g.residual();
  return io::to_json(g);
}

inline json cmd_witt(Context& c, const Args& a) {
  need_files(a, 4, "witt");
  std::vector<io::KPoint> k;
  for (const auto& f : a.files) k.push_back(c.kpoint(f));
  for (const auto& x : k)
    if (x.field != k[0].field || x.form != k[0].form) throw DimensionError("witt: points differ in field or form");
  std::vector<Point> r;
  for (const auto& x : k) r.push_back(x.real_point(c.tol));
  const Isometry g = k[0].field == Field::R
                         ? witt_isometry(r[0], r[1], r[2], r[3], c.tol)
                         : witt_isometry_K(k[0].structure(), k[0].frame, k[1].frame, k[2].frame, k[3].frame, c.tol);
  c.diagnostics["form_residual"] = g.residual();
  c.diagnostics["image_mismatch"] =
      std::max(distance(g.apply(r[0]), r[2], c.tol), distance(g.apply(r[1]), r[3], c.tol));
  if (k[0].field != Field::R) c.diagnostics["structure_commutator"] = structure_commutator(k[0].structure(), g);
  return io::to_json(g);
}

inline std::vector<Point> gather_points(Context& c, const Args& a, const char* cmd) {
  if (a.files.empty()) throw InvalidArgument(std::string(cmd) + ": no input files");
  std::vector<Point> pts;
  for (const auto& f : a.files)
    for (auto& x : io::points_from_json(c.load(f), c.tol)) pts.push_back(std::move(x));
  return pts;
}

inline json cmd_circumcenter(Context& c, const Args& a) {
  const auto pts = gather_points(c, a, "circumcenter");
  const auto cc = circumcenter(pts, c.tol);
  c.diagnostics["iterations"] = cc.iterations;
  c.diagnostics["converged"] = cc.converged;
  c.diagnostics["last_step"] = cc.last_step;
  if (!cc.converged) c.exit_code = kNoConvergence;
  return json{{"center", io::to_json(cc.center)}, {"radius", cc.radius}};
}

inline json cmd_jung(Context& c, const Args& a) {
  const auto pts = gather_points(c, a, "jung");
  const int n = a.n > 0 ? a.n : pts[0].form().p();
  const auto j = jung_probe(pts, n, a.delta, c.tol);
  return json{{"ratio", j.ratio}, {"bound", j.bound}, {"pass", j.pass}, {"radius", j.radius},
              {"diameter", j.diameter}, {"n", n}};
}

inline json cmd_project(Context& c, const Args& a) {
  need_files(a, 2, "project");
  const ConvexSet set = io::convex_set_from_json(c.load(a.files[0]), c.tol);
  const Point x = c.point(a.files[1]);
  const Point px = project(set, x, c.tol);
  c.diagnostics["set_kind"] = kind_name(set);
  return json{{"point", io::to_json(px)}, {"distance", distance(x, px, c.tol)}};
}

inline json cmd_busemann(Context& c, const Args& a) {
  need_files(a, 3, "busemann");
  const BoundaryPoint xi = c.boundary(a.files[0]);
  const auto r = busemann(xi, c.point(a.files[1]), c.point(a.files[2]), a.tmax, c.tol);
  // the closed form is the value; the sampled limit is a cross-check
  c.diagnostics["numeric"] = r.numeric;
  c.diagnostics["numeric_delta"] = r.delta;
  c.diagnostics["numeric_converged"] = r.converged;
  c.diagnostics["t_used"] = r.t_used;
  return r.value;
}

inline json cmd_tits(Context& c, const Args& a) {
  need_files(a, 2, "tits-angle");
  const BoundaryPoint xi = c.boundary(a.files[0]), eta = c.boundary(a.files[1]);
  const Point base = a.base.empty() ? xi.base() : c.point(a.base);
  const auto r = tits_angle(xi, eta, base, std::min(a.tmax, 1e3), c.tol);
  c.diagnostics["comparison_t"] = r.t;
  c.diagnostics["comparison"] = r.comparison;
  c.diagnostics["monotone"] = r.monotone;
  c.diagnostics["monotonicity_violation"] = r.monotonicity_violation;
  return json{{"angle", r.angle}, {"slope", r.slope}};
}

inline json cmd_delta(Context& c, const Args& a) {
  need_files(a, 2, "delta-dir");
  return io::to_json(delta_direction(c.point(a.files[0]), c.point(a.files[1]), c.tol).lambda_sorted);
}

inline json cmd_flag_of(Context& c, const Args& a) {
  need_files(a, 1, "flag-of");
  return io::to_json(flag_of(c.boundary(a.files[0]), c.tol));
}

inline json cmd_flag_to_boundary(Context& c, const Args& a) {
  need_files(a, 1, "flag-to-boundary");
  return io::to_json(boundary_from_flag(io::flag_from_json(c.load(a.files[0])), c.tol));
}

inline json cmd_stab(Context& c, const Args& a) {
  need_files(a, 2, "stab-check");
  const Isometry h = io::isometry_from_json(c.load(a.files[0]), c.tol);
  const auto r = stabilizer_check(h, c.boundary(a.files[1]), {0, 1, 2, 4, 8}, c.tol);
  c.diagnostics["t"] = r.t;
  c.diagnostics["norms"] = r.norms;
  c.diagnostics["lambda_std"] = io::to_json(r.lambda_std);
  return json{{"block_verdict", r.block_verdict},
              {"bounded_verdict", r.bounded_verdict},
              {"agree", r.block_verdict == r.bounded_verdict},
              {"block_violation", r.block_violation},
              {"block_max", std::vector<double>(r.block_max.begin(), r.block_max.end())},
              {"growth", r.growth}};
}

inline json cmd_center_of_directions(Context& c, const Args& a) {
  need_files(a, 1, "center-of-directions");
  const auto chain = io::chain_from_json(c.load(a.files[0]), c.tol);
  std::optional<SignatureForm> form;
  for (const auto& set : chain) {
    if (const auto* b = std::get_if<Ball>(&set)) form = b->center.form();
    else if (const auto* h = std::get_if<Horoball>(&set)) form = h->xi.form();
    else if (const auto* s = std::get_if<Subflat>(&set)) form = s->chart.form();
    if (form) break;
  }
  if (!form && a.base.empty()) throw InvalidArgument("center-of-directions: --base is required for this chain");
  const Point base = a.base.empty() ? Point::base(*form) : c.point(a.base);
  const auto r = center_of_directions(chain, base, detail::parse_grid(a.tgrid), a.tail, c.tol);
  c.diagnostics["t"] = r.t;
  c.diagnostics["tail_radius"] = r.tail_radius;
  c.diagnostics["drift"] = r.drift;
  c.diagnostics["max_drift"] = r.max_drift;
  c.diagnostics["drift_ok"] = r.drift_ok;
  c.diagnostics["bounded_case"] = r.bounded_case;
  if (!r.drift_ok) c.exit_code = kNoConvergence;
  return io::to_json(r.xi);
}

inline json cmd_realify(Context& c, const Args& a) {
  need_files(a, 1, "realify");
  const auto kp = c.kpoint(a.files[0]);
  const Point x = kp.real_point(c.tol);
  if (kp.field != Field::R) c.diagnostics["structure_invariance"] = structure_invariance(kp.structure(), x);
  return io::to_json(x);
}

inline json cmd_random_point(Context& c, const Args& a) {
  if (!a.files.empty()) throw InvalidArgument("random-point: takes no input files");
  const SignatureForm form(a.p, a.q);
  const Field k = parse_field(a.field);
  c.diagnostics["seed"] = a.seed;
  if (k == Field::R) return io::to_json(random_point(form, a.seed, a.spread));
  if (!(a.spread >= 0)) throw InvalidArgument("random-point: spread must be >= 0");
  const KStructure ks(k, form);
  return io::to_json(io::KPoint{k, form, detail::random_kframe(ks, a.seed, a.spread)});
}

inline json cmd_plot_data(Context& c, const Args& a) {
  need_files(a, 2, "plot-data");
  if (a.samples < 2) throw InvalidArgument("plot-data: --samples must be >= 2");
  const Point x = c.point(a.files[0]), y = c.point(a.files[1]);
  const auto g = geodesic(x, y, c.tol);
  std::vector<double> ts, ds, de;
  json lam = json::array(), alphas = json::array();
  for (int i = 0; i < a.samples; ++i) {
    const double t = static_cast<double>(i) / (a.samples - 1);
    const Point z = g.at(t);
    ts.push_back(t);
    ds.push_back(distance(x, z, c.tol));
    de.push_back(distance(z, y, c.tol));
    lam.push_back(io::to_json(Vec(t * g.lambda)));
    alphas.push_back(io::to_json(principal_angles(x, z, c.tol).alphas));
  }
  return json{{"polyline", {{"t", ts}, {"lambda", lam}, {"dist_from_start", ds}, {"dist_to_end", de}}},
              {"scatter", {{"x", ds}, {"alphas", alphas}}},
              {"length", g.length}};
}

// ---------------------------------------------------------------------------

inline int error_code(const std::exception& e) {
  if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const NumericsError*>(&e)) return kNoConvergence;
  return kInvalid;
}

inline std::string error_type(const std::exception& e) {
  if (dynamic_cast<const ConvergenceError*>(&e)) return "ConvergenceError";
  if (dynamic_cast<const NumericsError*>(&e)) return "NumericsError";
  if (dynamic_cast<const DegenerateError*>(&e)) return "DegenerateError";
  if (dynamic_cast<const DimensionError*>(&e)) return "DimensionError";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "InvalidArgument";
  return "Error";
}

// One command (no --batch). Writes one envelope line to `out`.
inline int run_single(std::vector<std::string> args, const std::string& env_profile, std::ostream& out,
                      std::ostream& err) {
  // locate the command word, skipping global options
  std::string command;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--tol-profile") {
      ++i;
      continue;
    }
    if (args[i].rfind("--tol-profile=", 0) == 0 || args[i] == "-h" || args[i] == "--help") continue;
    command = args[i];
    break;
  }
  if (command.empty() || std::find(commands().begin(), commands().end(), command) == commands().end()) {
    if (command.empty() && std::find(args.begin(), args.end(), "--help") != args.end()) {
      out << usage();
      return kOk;
    }
    err << (command.empty() ? "missing command\n" : "unknown command '" + command + "'\n") << usage();
    return kUnknownCommand;
  }

  CLI::App app{"hypgrass"};
  app.require_subcommand(1);
  std::string profile;
  app.add_option("--tol-profile", profile, "strict, default or loose (overrides HYPGRASS_TOL_PROFILE)");
  Args a;
  std::map<std::string, CLI::App*> sub;
  for (const auto& name : commands()) {
    CLI::App* s = app.add_subcommand(name);
    s->add_option("files", a.files, "input JSON files");
    s->add_option("--base", a.base, "base point file");
    sub[name] = s;
  }
  sub["geodesic"]->add_option("--t", a.t, "geodesic parameter in [0, 1]");
  sub["transvect"]->add_option("--t", a.t, "translation length");
  sub["jung"]->add_option("--n", a.n, "dimension in the bound (default p)");
  sub["jung"]->add_option("--delta", a.delta, "slack delta");
  sub["busemann"]->add_option("--tmax", a.tmax, "largest ray parameter sampled");
  sub["tits-angle"]->add_option("--tmax", a.tmax, "largest ray parameter sampled");
  sub["random-point"]->add_option("--seed", a.seed, "RNG seed");
  sub["random-point"]->add_option("--spread", a.spread, "standard deviation of the flat coordinates");
  sub["random-point"]->add_option("--p", a.p, "p");
  sub["random-point"]->add_option("--q", a.q, "q");
  sub["random-point"]->add_option("--field", a.field, "R, C or H");
  sub["center-of-directions"]->add_option("--tgrid", a.tgrid, "comma separated t grid");
  sub["center-of-directions"]->add_option("--tail", a.tail, "tail length");
  sub["plot-data"]->add_option("--samples", a.samples, "number of samples along the geodesic");

  Context ctx;
  json envelope{{"command", command}, {"version", io::kEnvelopeVersion}};
  auto emit = [&](int code) {
    envelope["inputs"] = ctx.inputs;
    ctx.diagnostics["tol_profile"] = ctx.profile;
    ctx.diagnostics["tolerances"] = detail::tolerances_json(ctx.tol);
    envelope["diagnostics"] = ctx.diagnostics;
    out << io::dump(envelope) << "\n";
    return code;
  };

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    envelope["error"] = json{{"type", "UsageError"}, {"message", e.what()}};
    return emit(kInvalid);
  }

  try {
    ctx.profile = !profile.empty() ? profile : env_profile;
    ctx.tol = tolerance_profile(ctx.profile);
    static const std::map<std::string, json (*)(Context&, const Args&)> handlers = {
        {"validate", cmd_validate},
        {"angles", cmd_angles},
        {"dist", cmd_dist},
        {"geodesic", cmd_geodesic},
        {"midpoint", cmd_midpoint},
        {"transvect", cmd_transvect},
        {"witt", cmd_witt},
        {"circumcenter", cmd_circumcenter},
        {"jung", cmd_jung},
        {"project", cmd_project},
        {"busemann", cmd_busemann},
        {"tits-angle", cmd_tits},
        {"delta-dir", cmd_delta},
        {"flag-of", cmd_flag_of},
        {"flag-to-boundary", cmd_flag_to_boundary},
        {"stab-check", cmd_stab},
        {"center-of-directions", cmd_center_of_directions},
        {"realify", cmd_realify},
        {"random-point", cmd_random_point},
        {"plot-data", cmd_plot_data},
    };
    envelope["result"] = handlers.at(command)(ctx, a);
    return emit(ctx.exit_code);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    envelope["error"] = json{{"type", error_type(e)}, {"message", e.what()}};
    if (const auto* ce = dynamic_cast<const ConvergenceError*>(&e)) ctx.diagnostics["residual"] = ce->residual();
    return emit(error_code(e));
  }
}

// Full entry point, including --batch FILE: one command line per line of
// FILE (blank lines and lines starting with '#' skipped), run concurrently,
// envelopes printed in input order. Returns the largest exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const std::string env_profile = tolerance_profile_from_env();
  auto it = std::find(args.begin(), args.end(), "--batch");
  if (it == args.end()) return run_single(args, env_profile, out, err);
  if (it + 1 == args.end()) {
    err << "--batch needs a file\n";
    return kInvalid;
  }
  std::vector<std::string> global(args.begin(), it);
  global.insert(global.end(), it + 2, args.end());
  std::vector<std::vector<std::string>> jobs;
  try {
    std::istringstream list(io::read_file(*(it + 1)));
    for (std::string line; std::getline(list, line);) {
      auto words = detail::split_ws(line);
      if (words.empty() || words[0][0] == '#') continue;
      std::vector<std::string> job = global;
      job.insert(job.end(), words.begin(), words.end());
      jobs.push_back(std::move(job));
    }
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kInvalid;
  }
  struct Outcome {
    int code;
    std::string out, err;
  };
  std::vector<std::future<Outcome>> futures;
  for (const auto& job : jobs)
    futures.push_back(std::async(std::launch::async, [job, env_profile] {
      std::ostringstream o, e;
      const int code = run_single(job, env_profile, o, e);
      return Outcome{code, o.str(), e.str()};
    }));
  int worst = kOk;
  for (auto& f : futures) {
    const Outcome r = f.get();
    out << r.out;
    err << r.err;
    worst = std::max(worst, r.code);
  }
  return worst;
}

}  // namespace hypgrass::cli
