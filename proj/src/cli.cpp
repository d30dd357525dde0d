#include "scorelab/cli.hpp"

#include "scorelab/bounds.hpp"
#include "scorelab/counterexample.hpp"
#include "scorelab/metrics.hpp"
#include "scorelab/sampler.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

namespace scorelab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- config access -----------------------------------------------------------

void check_keys(const json& cfg, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : cfg.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

double get_number(const json& cfg, const std::string& key, double fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg[key].is_number()) throw ConfigError("'" + key + "' must be a number");
  return cfg[key].get<double>();
}

std::size_t get_count(const json& cfg, const std::string& key, std::size_t fallback) {
  if (!cfg.contains(key)) return fallback;
  const auto& v = cfg[key];
  if (!v.is_number_integer() && !(v.is_number() && v.get<double>() == std::floor(v.get<double>()))) {
    throw ConfigError("'" + key + "' must be an integer");
  }
  const double d = v.get<double>();
  if (d < 0) throw ConfigError("'" + key + "' must be >= 0");
  return static_cast<std::size_t>(d);
}

std::string get_string(const json& cfg, const std::string& key, const std::string& fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg[key].is_string()) throw ConfigError("'" + key + "' must be a string");
  return cfg[key].get<std::string>();
}

std::vector<double> get_numbers(const json& cfg, const std::string& key, std::vector<double> fallback) {
  if (!cfg.contains(key)) return fallback;
  const auto& v = cfg[key];
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError("'" + key + "' must be a number or a list of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("'" + key + "' must contain numbers only");
    out.push_back(e.get<double>());
  }
  if (out.empty()) throw ConfigError("'" + key + "' must not be empty");
  return out;
}

TargetSpec parse_target(const json& cfg, const std::string& fallback) {
  std::string name = fallback;
  ParamMap params;
  if (cfg.contains("target")) {
    const auto& t = cfg["target"];
    if (t.is_string()) {
      name = t.get<std::string>();
    } else if (t.is_object()) {
      check_keys(t, {"name", "params"}, "target");
      name = get_string(t, "name", "");
      if (t.contains("params")) {
        if (!t["params"].is_object()) throw ConfigError("target.params must be an object");
        for (const auto& [k, v] : t["params"].items()) {
          if (!v.is_number()) throw ConfigError("target.params." + k + " must be a number");
          params[k] = v.get<double>();
        }
      }
    } else {
      throw ConfigError("'target' must be a name or {name, params}");
    }
  }
  if (name.empty()) throw ConfigError("no target given");
  try {
    return catalog(name, params);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

QuadratureConfig parse_quadrature(const json& cfg) {
  QuadratureConfig q;
  if (!cfg.contains("quadrature")) return q;
  const auto& j = cfg["quadrature"];
  if (!j.is_object()) throw ConfigError("'quadrature' must be an object");
  check_keys(j,
             {"gh_order_1d", "gh_order_2d", "compact_fine_spacing_factor", "compact_fine_radius_factor",
              "compact_coarse_cells", "compact_method", "panel_order", "panel_width_factor", "window_radius"},
             "quadrature");
  q.gh_order_1d = get_count(j, "gh_order_1d", q.gh_order_1d);
  q.gh_order_2d = get_count(j, "gh_order_2d", q.gh_order_2d);
  q.compact_fine_spacing_factor = get_number(j, "compact_fine_spacing_factor", q.compact_fine_spacing_factor);
  q.compact_fine_radius_factor = get_number(j, "compact_fine_radius_factor", q.compact_fine_radius_factor);
  q.compact_coarse_cells = get_count(j, "compact_coarse_cells", q.compact_coarse_cells);
  const auto method = get_string(j, "compact_method", "analytic");
  if (method == "analytic") {
    q.compact_method = CompactMethod::analytic;
  } else if (method == "grid") {
    q.compact_method = CompactMethod::grid;
  } else {
    throw ConfigError("quadrature.compact_method must be 'analytic' or 'grid'");
  }
  q.panel_order = get_count(j, "panel_order", q.panel_order);
  q.panel_width_factor = get_number(j, "panel_width_factor", q.panel_width_factor);
  q.window_radius = get_number(j, "window_radius", q.window_radius);
  try {
    q.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return q;
}

std::optional<Perturbation> parse_eta(const json& cfg, double T) {
  if (!cfg.contains("eta") || cfg["eta"].is_null()) return std::nullopt;
  const auto& j = cfg["eta"];
  Perturbation p;
  p.T = T;
  if (j.is_number()) {
    p.c = j.get<double>();
    return p;
  }
  if (!j.is_object()) throw ConfigError("'eta' must be a number or {shape, c}");
  check_keys(j, {"shape", "c"}, "eta");
  const auto shape = get_string(j, "shape", "constant");
  if (shape == "constant") {
    p.shape = Perturbation::Shape::constant;
  } else if (shape == "early_half") {
    p.shape = Perturbation::Shape::early_half;
  } else {
    throw ConfigError("eta.shape must be 'constant' or 'early_half'");
  }
  p.c = get_number(j, "c", 0.0);
  return p;
}

SourceKind parse_source(const json& cfg) {
  const auto s = get_string(cfg, "source", "exact");
  if (s == "exact") return SourceKind::exact;
  if (s == "quadrature") return SourceKind::quadrature;
  throw ConfigError("'source' must be 'exact' or 'quadrature'");
}

// ---- output handling ------------------------------------------------------------

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  std::string csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) os << ',';
        const auto& v = r[i];
        if (v.is_number_float()) {
          os << fmt17(v.get<double>());
        } else if (v.is_string()) {
          os << v.get<std::string>();
        } else {
          os << v.dump();
        }
      }
      os << '\n';
    }
    return os.str();
  }

  std::string json_text() const {
    json arr = json::array();
    for (const auto& r : rows) {
      json o;
      for (std::size_t i = 0; i < columns.size(); ++i) {
        const auto& v = r[i];
        o[columns[i]] = v.is_number_float() && !std::isfinite(v.get<double>()) ? json(fmt17(v.get<double>())) : v;
      }
      arr.push_back(o);
    }
    return arr.dump(2) + "\n";
  }
};

json num(double v) { return json(v); }

class Outputs {
 public:
  Outputs(fs::path dir, std::string format, json echo)
      : dir_(std::move(dir)), format_(std::move(format)), echo_(std::move(echo)) {}

  const std::string& format() const { return format_; }

  void prepare() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw ConfigError("output directory '" + dir_.string() + "' is not writable");
  }

  void write_text(const std::string& name, const std::string& body, const std::string& checks) {
    const fs::path p = dir_ / name;
    {
      std::ofstream f(p, std::ios::binary);
      if (!f) throw ConfigError("cannot write '" + p.string() + "'");
      written_.push_back(p);
      f << body;
    }
    json meta;
    meta["file"] = name;
    meta["checks"] = checks;
    meta["config"] = echo_;
    meta["provenance"] = provenance_string();
    meta["threads"] = thread_count();
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    meta["timestamp"] = buf;
    const fs::path mp = dir_ / (name + ".meta.json");
    std::ofstream m(mp, std::ios::binary);
    written_.push_back(mp);
    m << meta.dump(2) << '\n';
  }

  void write_table(const std::string& stem, const Table& t, const std::string& checks) {
    if (format_ == "json") {
      write_text(stem + ".json", t.json_text(), checks);
    } else {
      write_text(stem + ".csv", t.csv(), checks);
    }
  }

  void cleanup() {
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    written_.clear();
  }

 private:
  fs::path dir_;
  std::string format_;
  json echo_;
  std::vector<fs::path> written_;
};

const std::set<std::string> kCommon = {"target", "output", "format", "quadrature", "threads"};

std::set<std::string> with_common(std::initializer_list<std::string> extra) {
  std::set<std::string> s = kCommon;
  s.insert(extra.begin(), extra.end());
  return s;
}

// ---- commands -------------------------------------------------------------------

int cmd_verify_bounds(const json& cfg, Outputs& out, std::ostream& log) {
  check_keys(cfg, with_common({"theorem", "grid", "tolerance"}), "verify-bounds");
  const TargetSpec target = parse_target(cfg, "std_normal");
  const QuadratureConfig quad = parse_quadrature(cfg);
  std::vector<std::string> theorems;
  if (!cfg.contains("theorem")) throw ConfigError("verify-bounds needs 'theorem'");
  if (cfg["theorem"].is_string()) {
    theorems.push_back(cfg["theorem"].get<std::string>());
  } else if (cfg["theorem"].is_array()) {
    for (const auto& t : cfg["theorem"]) {
      if (!t.is_string()) throw ConfigError("'theorem' entries must be strings");
      theorems.push_back(t.get<std::string>());
    }
  } else {
    throw ConfigError("'theorem' must be a string or a list");
  }
  if (target.dim > 2) throw ConfigError("verify-bounds supports dim <= 2");
  SweepGrid grid = SweepGrid::standard(target.dim);
  if (cfg.contains("grid")) {
    const auto& g = cfg["grid"];
    if (!g.is_object()) throw ConfigError("'grid' must be an object");
    check_keys(g, {"t_bars", "lo", "hi", "per_axis"}, "grid");
    grid.t_bars = get_numbers(g, "t_bars", grid.t_bars);
    const double lo = get_number(g, "lo", -4.0);
    const double hi = get_number(g, "hi", 4.0);
    const auto per = get_count(g, "per_axis", 41);
    if (!(lo <= hi) || per < 1) throw ConfigError("grid: need lo <= hi and per_axis >= 1");
    grid.points = ValidationGrid::lattice(target.dim, lo, hi, static_cast<int>(per)).points;
  }
  for (double tb : grid.t_bars) {
    if (!(tb > 0.0 && tb <= 1.0)) throw ConfigError("grid.t_bars must lie in (0, 1]");
  }
  const double tol = get_number(cfg, "tolerance", 1e-7);
  std::vector<BoundReport> reports;
  for (const auto& id : theorems) {
    try {
      reports.push_back(sweep_verify(target, id, grid, quad, tol));
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    } catch (const UnsupportedError& e) {
      throw ConfigError(e.what());
    }
  }
  out.prepare();
  std::size_t violations = 0;
  for (const auto& r : reports) {
    const std::string stem = "verify-bounds_" + r.theorem_id + "_" + target.name;
    if (out.format() == "json") {
      out.write_text(stem + ".json", r.to_json() + "\n", r.theorem_id);
    } else {
      out.write_text(stem + ".csv", r.to_csv(), r.theorem_id);
    }
    log << r.theorem_id << " on " << target.name << ": " << r.rows.size() << " rows, " << r.violation_count()
        << " violations, " << r.skipped_count() << " skipped, min margin " << r.min_margin() << '\n';
    violations += r.violation_count();
  }
  return violations == 0 ? kExitOk : kExitFailed;
}

int cmd_counterexample(const json& cfg, Outputs& out, std::ostream& log) {
  check_keys(cfg, with_common({"M", "K", "margin", "t_bar"}), "counterexample");
  const QuadratureConfig quad = parse_quadrature(cfg);
  const auto Ms = get_numbers(cfg, "M", {1, 2, 4, 8});
  for (double M : Ms) {
    if (!(M > 0.0)) throw ConfigError("'M' values must be > 0");
  }
  const auto K = get_count(cfg, "K", 0);
  const double margin = get_number(cfg, "margin", 10.0);
  const double t_bar = get_number(cfg, "t_bar", 0.5);
  if (!(margin >= 0.0)) throw ConfigError("'margin' must be >= 0");
  if (!(t_bar > 0.0 && t_bar <= 1.0)) throw ConfigError("'t_bar' must lie in (0, 1]");
  if (K > 8) throw ConfigError("'K' is limited to 8");

  Table blocks{{"M", "A", "B", "C", "D", "E", "ratio", "ratio_quadrature", "rel_diff", "bound", "pass"}, {}};
  bool ok = true;
  for (double M : Ms) {
    const auto c = block_ratio(M, BlockPath::closed_form, quad);
    const auto q = block_ratio(M, BlockPath::quadrature, quad);
    const double rel = std::abs(q.ratio - c.ratio) / std::abs(c.ratio);
    const double bound = M * M / 3.0;
    const bool pass = c.ratio > bound && rel <= 1e-6;
    ok = ok && pass;
    blocks.rows.push_back({num(M), num(c.A), num(c.B), num(c.C), num(c.D), num(c.E), num(c.ratio), num(q.ratio),
                           num(rel), num(bound), json(pass)});
    log << "block M=" << M << ": ratio " << c.ratio << " (quadrature " << q.ratio << "), bound " << bound
        << (pass ? " pass" : " FAIL") << '\n';
  }
  std::optional<ChainReport> chain;
  if (K > 0) chain = verify_chain(assemble_chain(static_cast<int>(K), margin), t_bar, quad);
  out.prepare();
  out.write_table("counterexample_blocks", blocks, "block ratio (log h_M)_xx(1/2,0) > M^2/3");
  if (chain) {
    Table t{{"k", "x_k", "M", "ratio", "bound", "pass", "crosstalk"}, {}};
    for (const auto& b : chain->blocks) {
      t.rows.push_back({json(b.k), num(b.x_k), num(b.M), num(b.ratio), num(b.bound), json(b.pass), num(b.crosstalk)});
      log << "chain block k=" << b.k << " at " << b.x_k << ": " << b.ratio << " vs " << b.bound
          << (b.pass ? " pass" : " FAIL") << (b.error.empty() ? "" : " (" + b.error + ")") << '\n';
    }
    out.write_table("counterexample_chain", t, "chain_lower: (log pbar)_xx(t_bar, x_k) > k^2/3");
    log << "chain normalizer log Z = " << chain->log_normalizer << '\n';
    ok = ok && chain->all_pass();
  }
  return ok ? kExitOk : kExitFailed;
}

int cmd_manifold(const json& cfg, Outputs& out, std::ostream& log) {
  check_keys(cfg, with_common({"points", "t_ladder"}), "manifold");
  const TargetSpec target = parse_target(cfg, "notched_square");
  const QuadratureConfig quad = parse_quadrature(cfg);
  const auto ladder = get_numbers(cfg, "t_ladder", {0.1, 0.05, 0.02, 0.01});
  for (double t : ladder) {
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("'t_ladder' values must lie in (0, 1]");
  }
  std::vector<Vec> points;
  if (cfg.contains("points")) {
    if (!cfg["points"].is_array()) throw ConfigError("'points' must be a list of points");
    for (const auto& p : cfg["points"]) {
      Vec v(target.dim);
      if (p.is_number() && target.dim == 1) {
        v(0) = p.get<double>();
      } else {
        if (!p.is_array() || static_cast<int>(p.size()) != target.dim) {
          throw ConfigError("each point needs " + std::to_string(target.dim) + " coordinates");
        }
        for (int d = 0; d < target.dim; ++d) {
          if (!p[d].is_number()) throw ConfigError("point coordinates must be numbers");
          v(d) = p[d].get<double>();
        }
      }
      points.push_back(v);
    }
  } else {
    Vec a = Vec::Zero(target.dim), b = Vec::Zero(target.dim);
    a(0) = 1.5;
    b(0) = 3.0;
    if (target.dim > 1) b(1) = 0.7;
    points = {a, b};
  }
  const ScoreField field(target, quad);
  Table t{{"point"}, {}};
  for (int d = 0; d < target.dim; ++d) t.columns.push_back("x" + std::to_string(d));
  for (const char* c : {"t_bar", "grad_norm", "hess_norm", "t_hess_norm", "t2_curvature"}) t.columns.push_back(c);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (double tb : ladder) {
      const auto e = field.evaluate(tb, points[i]);
      const double hn = spectral_norm_symmetric(e.hess_qbar);
      // t^2 (-Laplacian qbar + n/t); equals tr Cov for compact targets
      const double curv = tb * tb * (-e.hess_qbar.trace() + target.dim / tb);
      std::vector<json> row{json(i)};
      for (int d = 0; d < target.dim; ++d) row.push_back(num(points[i](d)));
      for (double v : {tb, e.grad_qbar.norm(), hn, tb * hn, curv}) row.push_back(num(v));
      t.rows.push_back(row);
      log << "point " << i << " t_bar=" << tb << ": t*|D2q|=" << tb * hn << " t^2 curvature=" << curv << '\n';
    }
  }
  out.prepare();
  out.write_table("manifold", t, "t*||D^2 qbar|| and t^2 (-Lap qbar + n/t)");
  return kExitOk;
}

struct SamplingSetup {
  TargetSpec target;
  SamplerConfig sampler;
  ScoreSource source;
  std::optional<Perturbation> eta;
  std::size_t reference_size;
};

SamplingSetup parse_sampling(const json& cfg, bool need_N) {
  SamplingSetup s{parse_target(cfg, "mixture2"), {}, {}, std::nullopt, 0};
  s.sampler.T = get_number(cfg, "T", 3.0);
  if (need_N) s.sampler.N = get_count(cfg, "N", 20);
  s.sampler.delta = get_number(cfg, "delta", 0.0);
  s.sampler.ensemble = get_count(cfg, "ensemble", 10000);
  s.sampler.seed = get_count(cfg, "seed", 0);
  s.reference_size = get_count(cfg, "reference_size", s.sampler.ensemble);
  if (s.reference_size < 1) throw ConfigError("'reference_size' must be >= 1");
  s.eta = parse_eta(cfg, s.sampler.T);
  SourceOptions opts;
  opts.delta = s.sampler.delta;
  opts.quadrature = parse_quadrature(cfg);
  opts.eta = s.eta;
  try {
    s.sampler.validate();
    s.source = make_score_source(parse_source(cfg), s.target, opts);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return s;
}

double distance(const Ensemble& a, const Ensemble& b, std::uint64_t seed) {
  return a.dim == 1 ? w1_1d(a.column(0), b.column(0)) : sliced_w1(a, b, 64, seed);
}

int cmd_sample(const json& cfg, Outputs& out, std::ostream& log) {
  check_keys(cfg, with_common({"T", "N", "delta", "ensemble", "seed", "source", "eta", "reference_size",
                               "write_samples"}),
             "sample");
  auto s = parse_sampling(cfg, true);
  const bool write_samples = cfg.value("write_samples", true);
  const Ensemble e = backward_run(s.sampler, s.source);
  const Ensemble ref = forward_sample(s.target, s.sampler.delta, s.reference_size, s.sampler.seed ^ 0x5DEECE66Dull);
  out.prepare();
  const std::vector<std::pair<std::string, std::string>> header{
      {"command", "sample"},
      {"target", s.target.name},
      {"source", s.source.provenance},
      {"T", fmt17(s.sampler.T)},
      {"N", std::to_string(s.sampler.N)},
      {"delta", fmt17(s.sampler.delta)},
      {"ensemble", std::to_string(s.sampler.ensemble)},
      {"seed", std::to_string(s.sampler.seed)}};
  if (write_samples) out.write_text("samples.csv", ensemble_csv(e, header), "backward ensemble");
  std::ostringstream m;
  m << kMetricHeader << '\n';
  const auto params = std::vector<std::pair<std::string, std::string>>{{"N", std::to_string(s.sampler.N)}};
  m << metric_row(e.dim == 1 ? "w1" : "sliced_w1", distance(e, ref, s.sampler.seed), kNaN, params) << '\n';
  for (int mo : {2, 4, 8}) {
    m << metric_row("moment" + std::to_string(mo), sample_moment(e, mo), kNaN, params) << '\n';
    m << metric_row("reference_moment" + std::to_string(mo), sample_moment(ref, mo), kNaN, params) << '\n';
  }
  if (auto mix = mixture_view(s.target); mix && e.dim == 1 && e.size() >= 1000) {
    const auto ev = mixture_at_time(*mix, s.sampler.delta);
    auto pdf = [ev](double x) {
      double p = 0.0;
      for (std::size_t i = 0; i < ev.weights.size(); ++i) {
        const double z = x - ev.means[i](0);
        p += ev.weights[i] * std::exp(-0.5 * z * z / ev.variances[i]) / std::sqrt(2 * std::numbers::pi * ev.variances[i]);
      }
      return p;
    };
    const auto kl = kl_kde_1d(e.column(0), pdf);
    m << metric_row("kl_kde", kl.value, kNaN, {{"bandwidth", fmt17(kl.bandwidth)}}) << '\n';
  }
  m << metric_row("excluded", static_cast<double>(e.excluded), 0.0, params) << '\n';
  out.write_text("sample_metrics.csv", m.str(), "sampler diagnostics");
  log << "sampled " << e.size() << " trajectories (" << e.excluded << " excluded)\n";
  return kExitOk;
}

// sup of the score Jacobian norm over a time/space lattice
double mixture_jacobian_sup(const GaussianMixtureSpec& mix, int dim, double t0, double T) {
  const auto pts = ValidationGrid::lattice(dim, -6.0, 6.0, dim == 1 ? 241 : 61).points;
  double sup = 0.0;
  for (int k = 0; k <= 32; ++k) {
    const double t = t0 * std::pow(T / t0, k / 32.0);
    for (const auto& x : pts) sup = std::max(sup, spectral_norm_symmetric(closed_form_mixture(mix, t, x).jacobian));
  }
  return sup;
}

int cmd_converge(const json& cfg, Outputs& out, std::ostream& log) {
  check_keys(cfg, with_common({"T", "N_list", "delta", "ensemble", "seed", "source", "eta", "reference_size",
                               "batches"}),
             "converge");
  auto s = parse_sampling(cfg, false);
  std::vector<double> Ns = get_numbers(cfg, "N_list", {5, 10, 20, 40, 80});
  for (double N : Ns) {
    if (!(N >= 1.0) || N != std::floor(N)) throw ConfigError("'N_list' entries must be positive integers");
  }
  if (Ns.size() < 4) throw ConfigError("'N_list' needs at least 4 entries for the rate fit");
  const auto batches = get_count(cfg, "batches", 10);
  if (batches < 2) throw ConfigError("'batches' must be >= 2");
  const Ensemble ref = forward_sample(s.target, s.sampler.delta, s.reference_size, s.sampler.seed ^ 0x5DEECE66Dull);
  double L = kNaN;
  double M2 = kNaN;
  try {
    M2 = target_moment(s.target, 2);
    if (const auto mix = mixture_view(s.target); mix && s.target.dim <= 2) {
      L = mixture_jacobian_sup(*mix, s.target.dim, std::max(s.sampler.delta, 1e-6), s.sampler.T);
    } else if (s.target.kind() != TargetKind::compact_measure) {
      const auto pot = potential_view(s.target);
      if (pot.metadata) L = cor32_max(pot.metadata->M0 - 1.0, pot.metadata->M1 + 1.0, s.sampler.T);
    }
  } catch (const Error&) {
  }
  const double eta_c = s.eta ? std::abs(s.eta->c) : 0.0;
  Table t{{"N", "w1", "w1_stderr", "kl_predicted", "excluded"}, {}};
  std::vector<RatePoint> pts;
  for (double N : Ns) {
    SamplerConfig sc = s.sampler;
    sc.N = static_cast<std::size_t>(N);
    const Ensemble e = backward_run(sc, s.source);
    const double w = distance(e, ref, sc.seed);
    // batch means for the standard error
    std::vector<double> bw;
    const std::size_t per = std::min(e.size(), ref.size()) / batches;
    if (per > 0) {
      for (std::size_t b = 0; b < batches; ++b) {
        Ensemble eb, rb;
        eb.dim = rb.dim = e.dim;
        eb.data.assign(e.data.begin() + b * per * e.dim, e.data.begin() + (b + 1) * per * e.dim);
        rb.data.assign(ref.data.begin() + b * per * ref.dim, ref.data.begin() + (b + 1) * per * ref.dim);
        bw.push_back(distance(eb, rb, sc.seed));
      }
    }
    double se = kNaN;
    if (bw.size() >= 2) {
      double mean = 0.0;
      for (double v : bw) mean += v;
      mean /= static_cast<double>(bw.size());
      double v2 = 0.0;
      for (double v : bw) v2 += (v - mean) * (v - mean);
      se = std::sqrt(v2 / static_cast<double>(bw.size() - 1)) / std::sqrt(static_cast<double>(bw.size()));
    }
    const double kl = std::isfinite(L) && std::isfinite(M2)
                          ? kl_predicted(M2, s.target.dim, s.sampler.T, eta_c, N, L)
                          : kNaN;
    t.rows.push_back({json(static_cast<long long>(N)), num(w), num(se), num(kl), json(e.excluded)});
    pts.push_back({N, w, std::isfinite(se) ? se : 0.0});
    log << "N=" << N << ": W1 " << w << " +- " << se << '\n';
  }
  const RateFit fit = rate_fit(pts);
  Table f{{"a", "b", "gamma", "residual", "degenerate", "H_T_proxy"}, {}};
  f.rows.push_back({num(fit.a), num(fit.b), num(fit.gamma), num(fit.residual), json(fit.degenerate), num(L)});
  out.prepare();
  out.write_table("converge", t, "W1 vs N, predicted rate shape nT^2L^2/N");
  out.write_table("converge_fit", f, "rate fit error = a + b N^-gamma");
  log << "rate fit: a=" << fit.a << " b=" << fit.b << " gamma=" << fit.gamma << " residual=" << fit.residual << '\n';
  return kExitOk;
}

json apply_overrides(json cfg, const std::vector<std::pair<std::string, std::string>>& overrides) {
  for (const auto& [key, text] : overrides) {
    if (key.empty()) throw ConfigError("empty override key");
    json value;
    try {
      value = json::parse(text);
    } catch (const json::parse_error&) {
      value = text;
    }
    std::string ptr = "/";
    for (char c : key) ptr += c == '.' ? '/' : c;
    try {
      const json::json_pointer jp(ptr);
      if (jp.parent_pointer() != json::json_pointer("") && cfg.contains(jp.parent_pointer()) &&
          !cfg[jp.parent_pointer()].is_object()) {
        // `--target.params.M` on a string target: promote to object form
        const auto parent = jp.parent_pointer();
        if (parent == json::json_pointer("/target")) cfg["target"] = json{{"name", cfg["target"]}};
      }
      cfg[jp] = value;
    } catch (const json::exception& e) {
      throw ConfigError("bad override '" + key + "': " + e.what());
    }
  }
  return cfg;
}

}  // namespace

std::vector<std::string> commands() { return {"verify-bounds", "counterexample", "manifold", "sample", "converge"}; }

int run(const std::string& command, const std::string& config_text,
        const std::vector<std::pair<std::string, std::string>>& overrides, std::ostream& log) {
  std::unique_ptr<Outputs> out;
  try {
    json cfg;
    try {
      cfg = config_text.empty() ? json::object() : json::parse(config_text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    cfg = apply_overrides(std::move(cfg), overrides);
    if (cfg.contains("command")) {
      if (get_string(cfg, "command", command) != command) throw ConfigError("config 'command' does not match");
      cfg.erase("command");
    }
    if (cfg.contains("threads")) set_thread_count(static_cast<unsigned>(get_count(cfg, "threads", 0)));
    const std::string format = get_string(cfg, "format", "csv");
    if (format != "csv" && format != "json") throw ConfigError("'format' must be 'csv' or 'json'");
    json echo = cfg;
    echo["command"] = command;
    out = std::make_unique<Outputs>(get_string(cfg, "output", "score-lab-out"), format, echo);
    if (command == "verify-bounds") return cmd_verify_bounds(cfg, *out, log);
    if (command == "counterexample") return cmd_counterexample(cfg, *out, log);
    if (command == "manifold") return cmd_manifold(cfg, *out, log);
    if (command == "sample") return cmd_sample(cfg, *out, log);
    if (command == "converge") return cmd_converge(cfg, *out, log);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const ConfigError& e) {
    if (out) out->cleanup();
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    if (out) out->cleanup();
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailed;
  }
}

int main(int argc, char** argv) {
  CLI::App app{"score-lab: score regularity bounds, counter-examples and sampler experiments"};
  std::string command;
  std::string config_path;
  int threads = -1;
  app.add_option("command", command, "verify-bounds | counterexample | manifold | sample | converge")->required();
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--threads", threads, "worker cap (default: SCORE_LAB_THREADS or hardware)");
  app.allow_extras();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  std::vector<std::pair<std::string, std::string>> overrides;
  const auto extra = app.remaining();
  for (std::size_t i = 0; i < extra.size(); ++i) {
    const std::string& k = extra[i];
    if (k.rfind("--", 0) != 0 || k.size() < 3) {
      std::cerr << "config error: unexpected argument '" << k << "'\n";
      return kExitConfig;
    }
    const auto eq = k.find('=');
    if (eq != std::string::npos) {
      overrides.emplace_back(k.substr(2, eq - 2), k.substr(eq + 1));
      continue;
    }
    if (i + 1 >= extra.size()) {
      std::cerr << "config error: override '" << k << "' has no value\n";
      return kExitConfig;
    }
    overrides.emplace_back(k.substr(2), extra[++i]);
  }
  if (threads >= 0) set_thread_count(static_cast<unsigned>(threads));
  std::string text;
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) {
      std::cerr << "config error: cannot read '" << config_path << "'\n";
      return kExitConfig;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  return run(command, text, overrides, std::cerr);
}

}  // namespace scorelab::cli
