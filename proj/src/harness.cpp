#include "nodalab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

#include <json.hpp>

#include "nodalab/experiments.hpp"
#include "nodalab/lift.hpp"
#include "nodalab/nodal.hpp"
#include "nodalab/reflect.hpp"
#include "nodalab/specfun.hpp"
#include "nodalab/tiling.hpp"

namespace nodalab {
namespace {

using json = nlohmann::ordered_json;

const std::map<ExperimentKind, std::string>& kind_names() {
  static const std::map<ExperimentKind, std::string> names{
      {ExperimentKind::Zeros, "zeros"},           {ExperimentKind::Modes, "modes"},
      {ExperimentKind::Nodal, "nodal"},           {ExperimentKind::Bound, "bound"},
      {ExperimentKind::Frequency, "frequency"},   {ExperimentKind::SweepNStar, "sweep-n-star"},
      {ExperimentKind::Reflect, "reflect"},       {ExperimentKind::Tiling, "tiling"},
      {ExperimentKind::SmallCube, "small-cube"},  {ExperimentKind::Theorem2, "theorem2"}};
  return names;
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw std::invalid_argument("config key '" + key + "': " + what);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    const auto b = cur.find_first_not_of(" \t"), e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
  }
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    bad(key, "'" + s + "' is not a number");
  }
  if (pos != s.size()) bad(key, "'" + s + "' is not a number");
  return v;
}

long long to_integer(const std::string& key, const std::string& s) {
  size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    bad(key, "'" + s + "' is not an integer");
  }
  if (pos != s.size()) bad(key, "'" + s + "' is not an integer");
  return v;
}

int get_int(const json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) return static_cast<int>(v.get<double>());
  if (v.is_string()) return static_cast<int>(to_integer(key, v.get<std::string>()));
  bad(key, "expected an integer");
}

double get_double(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return to_double(key, v.get<std::string>());
  bad(key, "expected a number");
}

bool get_bool(const json& v, const std::string& key) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
  }
  bad(key, "expected true or false");
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_doubles(const json& v, const std::string& key) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const json& e : v) out.push_back(get_double(e, key));
  } else if (v.is_string()) {
    for (const std::string& s : split(v.get<std::string>(), ',')) out.push_back(to_double(key, s));
  } else if (v.is_number()) {
    out.push_back(v.get<double>());
  } else {
    bad(key, "expected a list of numbers");
  }
  return out;
}

std::vector<std::string> get_strings(const json& v, const std::string& key) {
  std::vector<std::string> out;
  if (v.is_array()) {
    for (const json& e : v) out.push_back(get_string(e, key));
  } else if (v.is_string()) {
    out = split(v.get<std::string>(), ',');
  } else {
    bad(key, "expected a list of strings");
  }
  return out;
}

/// An integer, "lo:hi" or [lo, hi].
IndexRange get_range(const json& v, const std::string& key) {
  IndexRange r;
  if (v.is_array()) {
    if (v.size() != 2) bad(key, "a range is [lo, hi]");
    r = {get_int(v[0], key), get_int(v[1], key)};
  } else if (v.is_string() && v.get<std::string>().find(':') != std::string::npos) {
    const std::string s = v.get<std::string>();
    const auto p = s.find(':');
    r = {static_cast<int>(to_integer(key, s.substr(0, p))), static_cast<int>(to_integer(key, s.substr(p + 1)))};
  } else {
    r.lo = r.hi = get_int(v, key);
  }
  if (r.lo > r.hi) bad(key, "empty index range " + std::to_string(r.lo) + ":" + std::to_string(r.hi));
  if (r.lo < 0) bad(key, "indices must be non-negative");
  return r;
}

std::vector<ModeIndex> get_modes(const json& v, const std::string& key) {
  std::vector<ModeIndex> out;
  auto one = [&](const json& e) {
    if (e.is_array()) {
      if (e.size() < 2 || e.size() > 3) bad(key, "a mode is [n, m] or [n, m, k]");
      ModeIndex idx{get_int(e[0], key), get_int(e[1], key), e.size() == 3 ? get_int(e[2], key) : 1};
      out.push_back(idx);
    } else if (e.is_string()) {
      try {
        out.push_back(parse_index(e.get<std::string>()));
      } catch (const std::exception& ex) {
        bad(key, ex.what());
      }
    } else {
      bad(key, "a mode is \"n,m[,k]\" or [n, m(, k)]");
    }
  };
  if (v.is_array()) {
    for (const json& e : v) one(e);
  } else if (v.is_string()) {
    for (const std::string& s : split(v.get<std::string>(), ';')) one(json(s));
  } else {
    bad(key, "expected a list of modes");
  }
  return out;
}

const std::vector<std::string> kModeKeys{"domain", "n", "m", "k", "diagonal", "modes"};
const std::vector<std::string> kSamplingKeys{"density", "radius_count", "min_fraction"};

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

void apply_kind_defaults(ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::Nodal: c.resolution = 1024; break;
    case ExperimentKind::Frequency:
      c.center = {0.3, 0.4};
      c.radii = {0.01, 0.02, 0.05, 0.1, 0.2};
      break;
    case ExperimentKind::SweepNStar:
      c.radii = {0.05, 0.1, 0.2};
      c.n = c.m = {1, 10};
      c.diagonal = true;
      break;
    case ExperimentKind::SmallCube:
      c.n = c.m = {8, 8};
      c.diagonal = true;
      break;
    case ExperimentKind::Theorem2:
      c.resolution = 1024;
      c.modes = {{2, 2, 1}, {4, 4, 1}, {8, 8, 1}};
      break;
    default: break;
  }
}

std::string fmt_center(const Vec& x) {
  std::string s;
  for (int i = 0; i < x.size(); ++i) s += (i ? ";" : "") + format_double(x[i]);
  return s;
}

std::string fmt_int(long long v) { return std::to_string(v); }

const Rectangle& require_rectangle(const ModelDomain& d, const char* who) {
  if (auto r = std::get_if<Rectangle>(&d)) return *r;
  throw std::invalid_argument(std::string(who) + ": the slab tiling is built on rectangles only");
}

CubeSampling sampling_of(const ExperimentConfig& c) { return {c.density, c.radius_count, c.min_fraction}; }

json cube_json(const Cube& q) {
  json j;
  j["center"] = json::array();
  for (int i = 0; i < q.dim(); ++i) j["center"].push_back(q.center[i]);
  j["side"] = q.side;
  j["kind"] = to_string(q.shape);
  if (q.normal_axis >= 0) j["normal_axis"] = q.normal_axis;
  return j;
}

/// Dumps with 17 significant digits for every float.
std::string dump17(const json& j, int indent = 2, int level = 0) {
  const std::string pad(static_cast<size_t>(indent * (level + 1)), ' '), end(static_cast<size_t>(indent * level), ' ');
  if (j.is_object()) {
    if (j.empty()) return "{}";
    std::string s = "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      s += (first ? "" : ",\n") + pad + json(it.key()).dump() + ": " + dump17(it.value(), indent, level + 1);
      first = false;
    }
    return s + "\n" + end + "}";
  }
  if (j.is_array()) {
    if (j.empty()) return "[]";
    const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
    if (flat) {
      std::string s = "[";
      for (size_t i = 0; i < j.size(); ++i) s += (i ? ", " : "") + dump17(j[i], indent, level + 1);
      return s + "]";
    }
    std::string s = "[\n";
    for (size_t i = 0; i < j.size(); ++i) s += (i ? ",\n" : "") + pad + dump17(j[i], indent, level + 1);
    return s + "\n" + end + "]";
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    return std::isfinite(v) ? format_double(v) : "null";
  }
  return j.dump();
}

RunResult run_zeros(const ExperimentConfig& c) {
  RunResult r;
  const ZeroKind kind = parse_zero_kind(c.zero_kind);
  for (int order = c.orders.lo; order <= c.orders.hi; ++order) {
    const ZeroTable t = compute_zeros(order, kind, c.count);
    for (size_t i = 0; i < t.values.size(); ++i) {
      r.rows.push_back({fmt_int(order), to_string(kind), fmt_int(static_cast<long long>(i + 1)),
                        format_double(t.values[i]), format_double(t.residuals[i])});
      if (!(t.residuals[i] <= 1e-10))
        r.failures.push_back("zero " + std::to_string(i + 1) + " of order " + std::to_string(order) +
                             " has residual " + format_double(t.residuals[i]));
    }
  }
  r.notes.push_back(std::to_string(r.rows.size()) + " zeros");
  return r;
}

RunResult run_modes(const ExperimentConfig& c) {
  RunResult r;
  const ModelDomain d = parse_domain(c.domain);
  const auto samples = boundary_samples(d, 64);
  for (const ModeIndex& idx : selected_modes(c)) {
    const Eigenmode mode = make_eigenmode(d, idx);
    const double res = neumann_residual(mode, samples, 1e-4 * feature_size(d));
    r.rows.push_back({fmt_int(idx.n), fmt_int(idx.m), fmt_int(idx.k), format_double(mode.lambda),
                      format_double(mode.scaled_zero), format_double(res)});
  }
  return r;
}

RunResult run_nodal(const ExperimentConfig& c) {
  RunResult r;
  const ModelDomain d = parse_domain(c.domain);
  for (const ModeIndex& idx : selected_modes(c)) {
    const Eigenmode mode = make_eigenmode(d, idx);
    const NodalCurveSet curves = mode_nodal_curves(mode, c.resolution);
    double analytic = std::numeric_limits<double>::quiet_NaN();
    try {
      analytic = nodal_length_analytic(mode);
    } catch (const std::invalid_argument&) {
    }
    double rel = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(analytic)) {
      rel = analytic > 0.0 ? std::fabs(curves.total_length - analytic) / analytic : std::fabs(curves.total_length);
      if (!(rel <= 0.01))
        r.failures.push_back("mode " + std::to_string(idx.n) + "," + std::to_string(idx.m) +
                             ": numeric length off by " + format_double(rel));
    }
    r.rows.push_back({fmt_int(idx.n), fmt_int(idx.m), fmt_int(idx.k), format_double(mode.lambda),
                      format_double(analytic), format_double(curves.total_length), format_double(rel),
                      fmt_int(curves.closed_count())});
  }
  return r;
}

RunResult run_bound(const ExperimentConfig& c) {
  RunResult r;
  const ModelDomain d = parse_domain(c.domain);
  double worst = 0.0;
  for (const ModeIndex& idx : selected_modes(c)) {
    const Eigenmode mode = make_eigenmode(d, idx);
    if (!(mode.lambda > 0.0)) {
      r.notes.push_back("skipped the constant mode");
      continue;
    }
    const BoundReport b = verify_bound(mode, c.resolution);
    r.rows.push_back({fmt_int(idx.n), fmt_int(idx.m), fmt_int(idx.k), format_double(b.lambda), format_double(b.length),
                      format_double(b.length_numeric), format_double(b.C), format_double(b.c_sqrt_lambda),
                      format_double(b.ratio)});
    worst = std::max(worst, b.ratio);
    if (!(b.ratio <= 1.0))
      r.failures.push_back("mode " + std::to_string(idx.n) + "," + std::to_string(idx.m) + ": ratio " +
                           format_double(b.ratio));
  }
  r.notes.push_back("max ratio " + format_double(worst));
  return r;
}

RunResult run_frequency(const ExperimentConfig& c) {
  RunResult r;
  const ModelDomain d = parse_domain(c.domain);
  const Eigenmode mode = make_eigenmode(d, parse_index(c.index));
  Vec x(static_cast<int>(c.center.size()));
  for (size_t i = 0; i < c.center.size(); ++i) x[static_cast<int>(i)] = c.center[i];
  ScalarField v;
  if (x.size() == 2) {
    v = [&mode](const Vec& p) { return eval_extended(mode, p[0], p[1]); };
  } else {
    const LiftedField h = lift(mode, c.T);
    v = [h](const Vec& p) { return h.extended(p); };
  }
  for (double rad : c.radii) {
    const BallMass H = ball_mass(v, nullptr, x, rad);
    r.rows.push_back({fmt_center(x), format_double(rad), format_double(H.value), format_double(frequency(v, x, rad)),
                      format_double(doubling_index(v, x, rad))});
  }
  return r;
}

RunResult run_sweep(const ExperimentConfig& c) {
  RunResult r;
  const ModelDomain d = parse_domain(c.domain);
  SqrtLambdaSpec spec;
  spec.density = c.density;
  spec.radii = c.radii;
  spec.T = c.T;
  std::vector<SqrtLambdaRow> rows = sqrt_lambda_experiment(d, selected_modes(c), spec, c.jobs);
  std::stable_sort(rows.begin(), rows.end(), [](const SqrtLambdaRow& a, const SqrtLambdaRow& b) {
    return a.lambda < b.lambda;
  });
  std::vector<double> ratios;
  for (const SqrtLambdaRow& row : rows) {
    r.rows.push_back({format_double(row.lambda), format_double(row.sqrt_lambda), format_double(row.max_ratio),
                      fmt_center(row.argmax_center), format_double(row.argmax_r)});
    ratios.push_back(row.max_ratio);
    if (!std::isfinite(row.max_ratio)) r.failures.push_back("non-finite ratio at lambda " + format_double(row.lambda));
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  const size_t h = sorted.size() / 2;
  const double median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
  const double worst = sorted.back();
  r.notes.push_back("median ratio " + format_double(median) + ", max " + format_double(worst) +
                    (worst <= 3.0 * median ? " (within 3x median)" : " (exceeds 3x median)"));
  return r;
}

RunResult run_reflect(const ExperimentConfig& c) {
  RunResult r;
  for (const std::string& spec : c.charts) {
    const ReflectionChart chart = ReflectionChart::parse(spec, c.dim, c.delta);
    const CoefficientField cf = coefficient_field_B(chart, c.grid);
    const ReflectionChart::Validity v = chart.sample_validity(chart.delta(), c.grid);
    const Vec lo = Vec::Constant(c.dim, -0.5 * chart.delta()), hi = Vec::Constant(c.dim, 0.5 * chart.delta());
    const LipschitzEstimate lip = lipschitz_estimate(
        [&chart](const Vec& X) { return chart.coefficient_B(X); }, lo, hi, c.pairs, c.seed);
    r.rows.push_back({spec, fmt_int(c.dim), format_double(chart.delta()), format_double(v.det_min),
                      format_double(v.det_max), format_double(cf.eig_min), format_double(cf.eig_max),
                      format_double(cf.lambda_bound), format_double(cf.max_asymmetry), format_double(lip.constant)});
    if (!(cf.max_asymmetry <= 1e-12)) r.failures.push_back(spec + ": B not symmetric");
    if (!(cf.lambda_bound <= 2.0)) r.failures.push_back(spec + ": ellipticity bound " + format_double(cf.lambda_bound));
  }
  return r;
}

RunResult run_tiling(const ExperimentConfig& c) {
  RunResult r;
  const ModelDomain d = parse_domain(c.domain);
  const CubeTiling t = c.slab ? slab_decomposition(require_rectangle(d, "tiling"), c.T, c.side, c.c, c.caps_as_interior)
                              : cube_decomposition(d, c.side, c.c);
  const TilingCheck chk = check_tiling(t, c.samples, c.seed);
  json j;
  j["domain"] = describe(d);
  j["dim"] = t.dim;
  j["side"] = t.side;
  j["c"] = t.c;
  if (t.dim == 3) j["T"] = t.T, j["caps_as_interior"] = t.caps_as_interior;
  j["boundary"] = json::array();
  for (const Cube& q : t.boundary) j["boundary"].push_back(cube_json(q));
  j["interior"] = json::array();
  for (const Cube& q : t.interior) j["interior"].push_back(cube_json(q));
  json k;
  k["overlapping_pairs"] = chk.overlapping_pairs;
  k["max_center_offset"] = chk.max_center_offset;
  k["distance_violations"] = chk.distance_violations;
  k["min_distance_ratio"] = chk.min_distance_ratio;
  k["samples"] = chk.samples;
  k["misses"] = chk.misses;
  j["check"] = k;
  r.json = dump17(j) + "\n";
  if (chk.overlapping_pairs) r.failures.push_back("overlapping boundary cubes");
  if (!(chk.max_center_offset <= 1e-9)) r.failures.push_back("boundary cube off the boundary");
  if (chk.distance_violations) r.failures.push_back("interior cubes too close to the boundary");
  if (chk.misses) r.failures.push_back(std::to_string(chk.misses) + " Monte Carlo samples uncovered");
  r.notes.push_back(std::to_string(t.boundary.size()) + " boundary cubes, " + std::to_string(t.interior.size()) +
                    " interior cubes");
  return r;
}

Cube slab_cube_at(const Rectangle& rect, const ExperimentConfig& c) {
  Vec want = c.cube.empty() ? vec3(0.5 * rect.a, 0.0, 0.0) : vec3(c.cube[0], c.cube[1], c.cube[2]);
  const CubeTiling t = slab_decomposition(rect, c.T, c.side, c.c, false);
  for (const Cube& q : t.boundary)
    if ((q.center - want).norm() <= 1e-9 * c.side) return q;
  throw std::invalid_argument("small-cube: no boundary cube of side " + format_double(c.side) + " is centered at " +
                              fmt_center(want));
}

RunResult run_small_cube(const ExperimentConfig& c) {
  RunResult r;
  const ModelDomain d = parse_domain(c.domain);
  const Cube Q = slab_cube_at(require_rectangle(d, "small-cube"), c);
  json summary;
  summary["cube"] = cube_json(Q);
  summary["M"] = c.M;
  summary["modes"] = json::array();
  for (const ModeIndex& idx : selected_modes(c)) {
    const Eigenmode mode = make_eigenmode(d, idx);
    const SmallCubeReport rep =
        small_cube_experiment(ReflectedLift(lift(mode, c.T)), Q, c.M, c.threshold, sampling_of(c), std::nullopt, c.jobs);
    const Cube& q = rep.subcubes[static_cast<size_t>(rep.argmin)];
    r.rows.push_back({fmt_int(idx.n), fmt_int(idx.m), fmt_int(idx.k), format_double(mode.lambda),
                      format_double(rep.parent.value), format_double(rep.min_index), fmt_center(q.center),
                      format_double(q.side), fmt_int(static_cast<long long>(rep.subcubes.size())),
                      format_double(rep.threshold), rep.outcome()});
    json m;
    m["index"] = {idx.n, idx.m, idx.k};
    m["n_star_Q"] = rep.parent.value;
    m["outcome"] = rep.outcome();
    m["sub_n_star"] = json::array();
    for (const CubeIndex& ci : rep.indices) m["sub_n_star"].push_back(ci.value);
    summary["modes"].push_back(m);
    r.notes.push_back("mode " + std::to_string(idx.n) + "," + std::to_string(idx.m) + ": " + rep.outcome());
  }
  r.json = dump17(summary) + "\n";
  return r;
}

RunResult run_theorem2(const ExperimentConfig& c) {
  RunResult r;
  const ModelDomain d = parse_domain(c.domain);
  Theorem2Options opt;
  opt.side = c.side;
  opt.c = c.c;
  opt.T = c.T;
  opt.caps_as_interior = c.caps_as_interior;
  opt.resolution = c.resolution;
  opt.sampling = sampling_of(c);
  const Theorem2Report rep = theorem2_experiment(d, selected_modes(c), opt, c.jobs);
  for (const Theorem2Point& p : rep.points)
    r.rows.push_back({fmt_int(p.index.n), fmt_int(p.index.m), fmt_int(p.index.k), p.boundary ? "boundary" : "interior",
                      fmt_center(p.cube.center), format_double(p.cube.side), format_double(p.area),
                      format_double(p.scaled_area), format_double(p.n_star)});
  const Envelope& e = rep.envelope;
  json s;
  s["points"] = e.points;
  s["slope"] = e.slope;
  s["intercept"] = e.intercept;
  s["mean_gap"] = e.mean_gap;
  s["max_gap"] = e.max_gap;
  s["ls_slope"] = e.ls_slope;
  s["ls_intercept"] = e.ls_intercept;
  s["ls_rms"] = e.ls_rms;
  s["ls_shift"] = e.ls_shift;
  s["mean_area"] = rep.mean_area;
  r.json = dump17(s) + "\n";
  r.notes.push_back("envelope slope " + format_double(e.slope) + ", intercept " + format_double(e.intercept) +
                    ", least-squares slope " + format_double(e.ls_slope));
  return r;
}

}  // namespace

std::string to_string(ExperimentKind k) { return kind_names().at(k); }

ExperimentKind parse_experiment_kind(const std::string& s) {
  for (const auto& [k, name] : kind_names())
    if (name == s) return k;
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

const std::vector<ExperimentKind>& all_experiment_kinds() {
  static const std::vector<ExperimentKind> kinds{
      ExperimentKind::Zeros,      ExperimentKind::Modes,   ExperimentKind::Nodal,  ExperimentKind::Bound,
      ExperimentKind::Frequency,  ExperimentKind::SweepNStar, ExperimentKind::Reflect, ExperimentKind::Tiling,
      ExperimentKind::SmallCube,  ExperimentKind::Theorem2};
  return kinds;
}

const std::vector<std::string>& config_keys(ExperimentKind k) {
  static const std::map<ExperimentKind, std::vector<std::string>> keys{
      {ExperimentKind::Zeros, {"orders", "count", "zero_kind"}},
      {ExperimentKind::Modes, kModeKeys},
      {ExperimentKind::Nodal, concat({kModeKeys, {"resolution"}})},
      {ExperimentKind::Bound, concat({kModeKeys, {"resolution"}})},
      {ExperimentKind::Frequency, {"domain", "index", "center", "radii", "T"}},
      {ExperimentKind::SweepNStar, concat({kModeKeys, {"radii", "density", "T"}})},
      {ExperimentKind::Reflect, {"charts", "dim", "delta", "grid", "pairs"}},
      {ExperimentKind::Tiling, {"domain", "side", "c", "slab", "T", "caps_as_interior", "samples"}},
      {ExperimentKind::SmallCube, concat({kModeKeys, {"side", "c", "cube", "M", "threshold", "T"}, kSamplingKeys})},
      {ExperimentKind::Theorem2,
       concat({kModeKeys, {"side", "c", "T", "caps_as_interior", "resolution"}, kSamplingKeys})}};
  return keys.at(k);
}

ExperimentConfig parse_config(const std::string& json_text, std::optional<ExperimentKind> kind) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  ExperimentConfig c;
  if (j.contains("experiment")) {
    const ExperimentKind named = parse_experiment_kind(get_string(j["experiment"], "experiment"));
    if (kind && *kind != named)
      bad("experiment", "'" + to_string(named) + "' does not match the subcommand '" + to_string(*kind) + "'");
    c.kind = named;
  } else if (kind) {
    c.kind = *kind;
  } else {
    throw std::invalid_argument("config key 'experiment' is required");
  }
  apply_kind_defaults(c);
  const std::vector<std::string>& allowed = config_keys(c.kind);
  bool explicit_ranges = false;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "experiment") continue;
    if (key != "out" && key != "seed" && key != "jobs" && std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument("unknown config key '" + key + "' for experiment '" + to_string(c.kind) + "'");
    if (key == "out") c.out = get_string(v, key);
    else if (key == "seed") {
      const long long s = v.is_number_unsigned() ? static_cast<long long>(v.get<std::uint64_t>())
                                                 : (v.is_string() ? to_integer(key, v.get<std::string>()) : get_int(v, key));
      if (s < 0) bad(key, "must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "jobs") c.jobs = get_int(v, key);
    else if (key == "domain") c.domain = get_string(v, key);
    else if (key == "n") c.n = get_range(v, key), explicit_ranges = true;
    else if (key == "m") c.m = get_range(v, key), explicit_ranges = true;
    else if (key == "k") c.k = get_int(v, key);
    else if (key == "diagonal") c.diagonal = get_bool(v, key);
    else if (key == "modes") c.modes = get_modes(v, key);
    else if (key == "orders") c.orders = get_range(v, key);
    else if (key == "count") c.count = get_int(v, key);
    else if (key == "zero_kind") c.zero_kind = get_string(v, key);
    else if (key == "resolution") c.resolution = get_int(v, key);
    else if (key == "index") c.index = get_string(v, key);
    else if (key == "center") c.center = get_doubles(v, key);
    else if (key == "radii") c.radii = get_doubles(v, key);
    else if (key == "charts") c.charts = get_strings(v, key);
    else if (key == "dim") c.dim = get_int(v, key);
    else if (key == "delta") c.delta = get_double(v, key);
    else if (key == "grid") c.grid = get_int(v, key);
    else if (key == "pairs") c.pairs = get_int(v, key);
    else if (key == "side") c.side = get_double(v, key);
    else if (key == "c") c.c = get_double(v, key);
    else if (key == "T") c.T = get_double(v, key);
    else if (key == "slab") c.slab = get_bool(v, key);
    else if (key == "caps_as_interior") c.caps_as_interior = get_bool(v, key);
    else if (key == "samples") c.samples = get_int(v, key);
    else if (key == "cube") c.cube = get_doubles(v, key);
    else if (key == "M") c.M = get_int(v, key);
    else if (key == "threshold") c.threshold = get_double(v, key);
    else if (key == "density") c.density = get_int(v, key);
    else if (key == "radius_count") c.radius_count = get_int(v, key);
    else if (key == "min_fraction") c.min_fraction = get_double(v, key);
  }
  // Ranges given explicitly replace the default mode list of theorem2.
  if (explicit_ranges && !j.contains("modes")) c.modes.clear();
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  auto need = [](bool ok, const std::string& key, const std::string& what) {
    if (!ok) bad(key, what);
  };
  for (const IndexRange* r : {&c.n, &c.m, &c.orders})
    need(r->lo <= r->hi && r->lo >= 0, r == &c.n ? "n" : (r == &c.m ? "m" : "orders"), "empty index range");
  need(c.jobs >= 1, "jobs", "must be at least 1");
  const std::vector<std::string>& keys = config_keys(c.kind);
  auto uses = [&keys](const char* key) { return std::find(keys.begin(), keys.end(), key) != keys.end(); };
  if (uses("domain")) {
    try {
      parse_domain(c.domain);
    } catch (const std::exception& e) {
      bad("domain", e.what());
    }
  }
  if (uses("modes")) {
    need(c.k == 1 || c.k == 2, "k", "must be 1 or 2");
    need(!selected_modes(c).empty(), "n", "the ranges select no mode (diagonal filter with disjoint n and m)");
  }
  switch (c.kind) {
    case ExperimentKind::Zeros:
      need(c.orders.hi <= kMaxBesselOrder, "orders", "orders above " + std::to_string(kMaxBesselOrder));
      need(c.count >= 1, "count", "must be at least 1");
      try {
        parse_zero_kind(c.zero_kind);
      } catch (const std::exception& e) {
        bad("zero_kind", e.what());
      }
      break;
    case ExperimentKind::Nodal:
      need(c.resolution >= 2, "resolution", "must be at least 2");
      break;
    case ExperimentKind::Bound:
      need(c.resolution == 0 || c.resolution >= 2, "resolution", "must be 0 (closed form only) or at least 2");
      break;
    case ExperimentKind::Frequency:
      need(c.center.size() == 2 || c.center.size() == 3, "center", "needs 2 or 3 coordinates");
      need(!c.radii.empty(), "radii", "at least one radius is required");
      for (double r : c.radii) need(r > 0.0, "radii", "radii must be positive");
      need(c.T > 0.0, "T", "must be positive");
      try {
        parse_index(c.index);
      } catch (const std::exception& e) {
        bad("index", e.what());
      }
      break;
    case ExperimentKind::SweepNStar:
      need(!c.radii.empty(), "radii", "at least one radius is required");
      for (double r : c.radii) need(r > 0.0, "radii", "radii must be positive");
      need(c.density >= 1, "density", "must be at least 1");
      need(c.T > 0.0, "T", "must be positive");
      break;
    case ExperimentKind::Reflect:
      need(!c.charts.empty(), "charts", "at least one chart is required");
      need(c.dim == 2 || c.dim == 3, "dim", "must be 2 or 3");
      need(c.grid >= 2, "grid", "must be at least 2");
      need(c.pairs >= 1, "pairs", "must be at least 1");
      if (c.delta) need(*c.delta > 0.0, "delta", "must be positive");
      break;
    case ExperimentKind::Tiling:
      need(c.side > 0.0, "side", "must be positive");
      need(c.c > 0.0 && c.c <= 1.0, "c", "must lie in (0, 1]");
      need(c.samples >= 0, "samples", "must be non-negative");
      need(c.T > 0.0, "T", "must be positive");
      break;
    case ExperimentKind::SmallCube:
    case ExperimentKind::Theorem2:
      need(c.side > 0.0, "side", "must be positive");
      need(c.c > 0.0 && c.c <= 1.0, "c", "must lie in (0, 1]");
      need(c.T > 0.0, "T", "must be positive");
      need(c.density >= 1, "density", "must be at least 1");
      need(c.radius_count >= 1, "radius_count", "must be at least 1");
      need(c.min_fraction > 0.0 && c.min_fraction <= 1.0, "min_fraction", "must lie in (0, 1]");
      if (c.kind == ExperimentKind::SmallCube) {
        need(c.M >= 0 && c.M <= 8, "M", "must lie in [0, 8]");
        need(c.cube.empty() || c.cube.size() == 3, "cube", "needs 3 coordinates");
      } else {
        need(c.resolution >= 2, "resolution", "must be at least 2");
      }
      break;
    default: break;
  }
}

std::vector<ModeIndex> selected_modes(const ExperimentConfig& c) {
  if (!c.modes.empty()) return c.modes;
  std::vector<ModeIndex> out;
  for (int n = c.n.lo; n <= c.n.hi; ++n)
    for (int m = c.m.lo; m <= c.m.hi; ++m)
      if (!c.diagonal || n == m) out.push_back({n, m, c.k});
  return out;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.kind);
  auto range = [](const IndexRange& r) { return json::array({r.lo, r.hi}); };
  for (const std::string& key : config_keys(c.kind)) {
    if (key == "domain") j[key] = c.domain;
    else if (key == "n") j[key] = range(c.n);
    else if (key == "m") j[key] = range(c.m);
    else if (key == "k") j[key] = c.k;
    else if (key == "diagonal") j[key] = c.diagonal;
    else if (key == "modes") {
      j[key] = json::array();
      for (const ModeIndex& idx : c.modes) j[key].push_back(json::array({idx.n, idx.m, idx.k}));
    } else if (key == "orders") j[key] = range(c.orders);
    else if (key == "count") j[key] = c.count;
    else if (key == "zero_kind") j[key] = c.zero_kind;
    else if (key == "resolution") j[key] = c.resolution;
    else if (key == "index") j[key] = c.index;
    else if (key == "center") j[key] = c.center;
    else if (key == "radii") j[key] = c.radii;
    else if (key == "charts") j[key] = c.charts;
    else if (key == "dim") j[key] = c.dim;
    else if (key == "delta") {
      if (c.delta) j[key] = *c.delta;
    } else if (key == "grid") j[key] = c.grid;
    else if (key == "pairs") j[key] = c.pairs;
    else if (key == "side") j[key] = c.side;
    else if (key == "c") j[key] = c.c;
    else if (key == "T") j[key] = c.T;
    else if (key == "slab") j[key] = c.slab;
    else if (key == "caps_as_interior") j[key] = c.caps_as_interior;
    else if (key == "samples") j[key] = c.samples;
    else if (key == "cube") j[key] = c.cube;
    else if (key == "M") j[key] = c.M;
    else if (key == "threshold") {
      if (c.threshold) j[key] = *c.threshold;
    } else if (key == "density") j[key] = c.density;
    else if (key == "radius_count") j[key] = c.radius_count;
    else if (key == "min_fraction") j[key] = c.min_fraction;
  }
  if (!c.out.empty()) j["out"] = c.out;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  return dump17(j) + "\n";
}

const std::vector<std::string>& csv_header(ExperimentKind k) {
  static const std::map<ExperimentKind, std::vector<std::string>> headers{
      {ExperimentKind::Zeros, {"order", "kind", "index", "value", "residual"}},
      {ExperimentKind::Modes, {"n", "m", "k", "lambda", "scaled_zero", "neumann_residual"}},
      {ExperimentKind::Nodal,
       {"n", "m", "k", "lambda", "length_analytic", "length_numeric", "rel_error", "closed_curves"}},
      {ExperimentKind::Bound, {"n", "m", "k", "lambda", "length", "length_numeric", "C", "c_sqrt_lambda", "ratio"}},
      {ExperimentKind::Frequency, {"center", "r", "H", "N", "doubling_index"}},
      {ExperimentKind::SweepNStar, {"lambda", "sqrt_lambda", "max_ratio", "argmax_center", "argmax_r"}},
      {ExperimentKind::Reflect,
       {"chart", "dim", "delta", "det_min", "det_max", "eig_min", "eig_max", "lambda_bound", "max_asymmetry",
        "lipschitz"}},
      {ExperimentKind::Tiling, {}},
      {ExperimentKind::SmallCube,
       {"n", "m", "k", "lambda", "n_star_Q", "min_n_star_q", "argmin_center", "sub_side", "subcubes", "threshold",
        "outcome"}},
      {ExperimentKind::Theorem2,
       {"n", "m", "k", "cube_kind", "center", "side", "area", "scaled_area", "n_star"}}};
  return headers.at(k);
}

std::string schema_help(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Zeros:
      return "CSV order,kind,index,value,residual: the first `count` zeros of J_order (kind j) or J_order' "
             "(jprime); residual is |f(value)|. Fails if a residual exceeds 1e-10.";
    case ExperimentKind::Modes:
      return "CSV n,m,k,lambda,scaled_zero,neumann_residual: eigenvalue, the disk zero j~_nm (0 for rectangles) "
             "and the largest one-sided normal derivative over 64 boundary points.";
    case ExperimentKind::Nodal:
      return "CSV n,m,k,lambda,length_analytic,length_numeric,rel_error,closed_curves: closed-form nodal length "
             "(nan if none), marching-squares length at `resolution`, their relative gap and the number of closed "
             "curves. Fails if a relative gap exceeds 1%.";
    case ExperimentKind::Bound:
      return "CSV n,m,k,lambda,length,length_numeric,C,c_sqrt_lambda,ratio: ratio = length / (C sqrt(lambda)); "
             "length_numeric is nan unless resolution > 0. The constant mode is skipped. Fails if a ratio exceeds 1.";
    case ExperimentKind::Frequency:
      return "CSV center,r,H,N,doubling_index: ball mass, frequency and doubling index of the closed form of the "
             "mode (lifted when the center has 3 coordinates); center is written x;y[;t].";
    case ExperimentKind::SweepNStar:
      return "CSV lambda,sqrt_lambda,max_ratio,argmax_center,argmax_r: largest N*(y,r)/sqrt(lambda) over a lattice "
             "of step 1/density in the closed cylinder and the radii, sorted by lambda; argmax_center is x;y;t.";
    case ExperimentKind::Reflect:
      return "CSV chart,dim,delta,det_min,det_max,eig_min,eig_max,lambda_bound,max_asymmetry,lipschitz: validity "
             "data of each chart and a seeded Lipschitz estimate of B. Fails if B is asymmetric or Lambda > 2.";
    case ExperimentKind::Tiling:
      return "JSON {domain, dim, side, c, [T, caps_as_interior], boundary: [cube], interior: [cube], check}; a cube "
             "is {center, side, kind, [normal_axis]}. Fails if any tiling invariant or the seeded coverage check "
             "fails.";
    case ExperimentKind::SmallCube:
      return "CSV n,m,k,lambda,n_star_Q,min_n_star_q,argmin_center,sub_side,subcubes,threshold,outcome for the "
             "boundary cube Q of the slab tiling centered at `cube` (default: bottom-edge midpoint); outcome is "
             "\"halving sub-cube found\", \"no halving sub-cube\" or \"below threshold\". Every N*(q) goes to "
             "<out>.summary.json.";
    case ExperimentKind::Theorem2:
      return "CSV n,m,k,cube_kind,center,side,area,scaled_area,n_star: nodal area in each cube of the slab tiling, "
             "area / side^2 and the sampled N*(Q). The upper envelope goes to <out>.summary.json.";
  }
  return {};
}

RunResult execute(const ExperimentConfig& c) {
  validate(c);
  RunResult r;
  try {
    switch (c.kind) {
      case ExperimentKind::Zeros: r = run_zeros(c); break;
      case ExperimentKind::Modes: r = run_modes(c); break;
      case ExperimentKind::Nodal: r = run_nodal(c); break;
      case ExperimentKind::Bound: r = run_bound(c); break;
      case ExperimentKind::Frequency: r = run_frequency(c); break;
      case ExperimentKind::SweepNStar: r = run_sweep(c); break;
      case ExperimentKind::Reflect: r = run_reflect(c); break;
      case ExperimentKind::Tiling: r = run_tiling(c); break;
      case ExperimentKind::SmallCube: r = run_small_cube(c); break;
      case ExperimentKind::Theorem2: r = run_theorem2(c); break;
    }
  } catch (const std::exception& e) {
    throw std::runtime_error(to_string(c.kind) + ": " + e.what());
  }
  r.header = csv_header(c.kind);
  return r;
}

std::string to_csv(const RunResult& r) {
  auto line = [](const std::vector<std::string>& cells) {
    std::string s;
    for (size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    return s + "\n";
  };
  std::string out = line(r.header);
  for (const auto& row : r.rows) out += line(row);
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw std::runtime_error("cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename into " + path + ": " + ec.message());
  }
}

RunResult run(const ExperimentConfig& c) {
  RunResult r = execute(c);
  const bool json_only = c.kind == ExperimentKind::Tiling;
  const std::string main = json_only ? r.json : to_csv(r);
  if (c.out.empty()) {
    std::fputs(main.c_str(), stdout);
  } else {
    write_atomic(c.out, main);
    if (!json_only && !r.json.empty()) write_atomic(c.out + ".summary.json", r.json);
  }
  return r;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace nodalab
