#include "scorelab/bounds.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace scorelab {

Thm31 thm31_bounds(double M0, double M1, double t) {
  if (M0 < 0.0 || M1 < 0.0) throw DomainError("thm31_bounds: M0, M1 must be >= 0");
  if (t < 0.0) throw DomainError("thm31_bounds: t must be >= 0");
  Thm31 b{};
  b.upper = std::exp(-t) * M1;
  b.horizon = M0 > 1.0 ? -std::log1p(-1.0 / M0) : kInf;
  if (t < b.horizon) {
    const double et = std::exp(t);
    b.lower = -M0 / (et - M0 * std::expm1(t));
  } else {
    b.lower = -kInf;
  }
  return b;
}

double cor32_horizon(double L0) { return L0 > 0.0 ? -std::log1p(-1.0 / (L0 + 1.0)) : kInf; }

double cor32_Ct(double L0, double L1, double t) {
  if (t < 0.0) throw DomainError("cor32_Ct: t must be >= 0");
  const double em1 = std::expm1(t);
  const double second = std::exp(-t) * (L1 - 1.0) + 1.0;
  if (L0 <= 0.0) return second;
  const double horizon = cor32_horizon(L0);
  if (t >= horizon) {
    std::ostringstream os;
    os << "cor32_Ct: t = " << t << " is beyond the horizon " << horizon;
    throw HorizonError(os.str());
  }
  const double denom = 1.0 - (L0 + 1.0) * em1;
  if (denom <= 0.0) return kInf;
  return std::max((L0 + 1.0) / denom - 1.0, second);
}

double cor32_max(double L0, double L1, double T) {
  // First term increases in t, second is monotone: endpoints suffice.
  return std::max(cor32_Ct(L0, L1, 0.0), cor32_Ct(L0, L1, T));
}

double prior_horizon(double L) {
  if (!(L > 0.0)) throw DomainError("prior_horizon: L must be > 0");
  return 2.0 * std::asinh(1.0 / (4.0 * L));
}

Thm33Params Thm33Params::from_metadata(const SmoothPotentialSpec& pot, int dim) {
  if (!pot.metadata) throw UnsupportedError("thm33: target has no declared metadata");
  const auto& md = *pot.metadata;
  Thm33Params p;
  p.n = dim;
  p.alpha1 = md.alpha1;
  p.alpha2 = md.alpha2;
  p.beta1 = md.beta1;
  p.beta2 = md.beta2;
  p.L = md.L;
  p.x0 = md.x0.size() == dim ? md.x0 : Vec::Zero(dim);
  p.grad_g_x0 = pot.g(p.x0).grad;
  return p;
}

Thm33Constants thm33_constants(const Thm33Params& p) {
  if (!(p.alpha2 >= 0.0 && p.alpha2 < 1.0)) throw DomainError("thm33: alpha2 must lie in [0, 1)");
  const double n = p.n;
  const double s = std::sqrt(1.0 - p.alpha2);
  const double nlogn = 4.0 * n * std::log(n);
  Thm33Constants c{};
  const double beta_ratio = p.beta1 > 0.0 ? p.beta2 * p.beta2 / p.beta1 : (p.beta2 > 0.0 ? kInf : 0.0);
  c.C_n = 2.0 * std::sqrt((n + 3.0) * std::log(2.0 * (1.0 + 4.0 * p.beta1) / s) + nlogn + p.alpha1 + 1.0 +
                          beta_ratio);
  c.C_beta = 3.0 * std::sqrt(p.beta1) + 1.0 + 6.0 * p.alpha2 / s;
  c.C_tilde_n = 2.0 * std::sqrt((n + 3.0) * std::log(2.0 * (1.0 + 4.0 * p.L) / s) + nlogn + p.alpha1 + 1.0);
  c.C_tilde_L = 3.0 * std::sqrt(p.L) + 1.0 + 6.0 * p.alpha2 / s;
  return c;
}

namespace {
double norm1(const Vec& v) { return std::max(v.norm(), 1.0); }
}  // namespace

Thm33 thm33_bounds(const Thm33Params& p, double t_bar, const Vec& x) {
  if (!(t_bar > 0.0 && t_bar <= 1.0)) throw DomainError("thm33: t_bar must lie in (0, 1]");
  const auto c = thm33_constants(p);
  const Vec x0 = p.x0.size() == x.size() ? p.x0 : Vec::Zero(x.size());
  const Vec g0 = p.grad_g_x0.size() == x.size() ? p.grad_g_x0 : Vec::Zero(x.size());
  const double s = std::sqrt(1.0 - p.alpha2);
  Thm33 b{};
  if (p.beta1 > 0.0) {
    b.grad = 3.0 * p.beta1 / s * std::max(c.C_n, c.C_beta * norm1(x - x0)) + p.beta2;
  } else {
    // beta1 -> 0 limit: beta1 * sqrt(beta2^2 / beta1) -> 0.
    b.grad = p.beta2;
  }
  const double r = norm1(x - x0 - g0);
  const double m2 = std::max(c.C_tilde_n * c.C_tilde_n, std::pow(c.C_tilde_L * r, 2));
  const double m3 = std::max(std::pow(c.C_tilde_n, 3), std::pow(c.C_tilde_L * r, 3));
  b.hess = (10.0 * p.L * p.L + p.L) / (1.0 - p.alpha2) * m2;
  b.time = (48.0 * p.L * p.L + 2.0 * p.L) / (std::sqrt(t_bar) * std::pow(1.0 - p.alpha2, 1.5)) * m3;
  return b;
}

Thm5 thm5_bounds(double L1, double L2) {
  if (L1 < 0.0 || L2 < 0.0) throw DomainError("thm5_bounds: L1, L2 must be >= 0");
  return {L1, -(L2 + L1 * L1), L2};
}

Thm37 thm37_bounds(double M, double t_bar, const Vec& x) {
  if (!(t_bar > 0.0 && t_bar <= 1.0)) throw DomainError("thm37: t_bar must lie in (0, 1]");
  return {(x.norm() + M) / t_bar, 1.0 / t_bar + M * M / (t_bar * t_bar)};
}

double early_stopping_lipschitz(double delta, double M) {
  if (!(delta > 0.0)) throw DomainError("early_stopping_lipschitz: delta must be > 0");
  return 1.0 + 1.0 / delta + M * M / (delta * delta);
}

double kl_predicted(double M2, int n, double T, double eps0, double N, double L) {
  if (!(N >= 1.0) || !(T > 0.0) || n < 1) throw DomainError("kl_predicted: need N >= 1, T > 0, n >= 1");
  return (M2 + n) * std::exp(-T) + T * eps0 * eps0 + n * T * T * L * L / N;
}

double kl_predicted_general(double M2, int n, double T, double eps0, double N, double L) {
  if (!(N >= 1.0) || !(T > 0.0) || n < 1) throw DomainError("kl_predicted: need N >= 1, T > 0, n >= 1");
  const double nlogn = n * std::log(static_cast<double>(n));
  return (M2 + n) * std::exp(-T) + T * eps0 * eps0 + std::pow(L, 6) * T * n * nlogn * nlogn / N;
}

SweepGrid SweepGrid::standard(int dim) {
  if (dim < 1 || dim > 2) throw DomainError("SweepGrid: dim must be 1 or 2");
  SweepGrid g;
  g.t_bars = {0.02, 0.05, 0.1, 0.2, 0.35, 0.45, 0.5, 0.7, 0.9};
  g.points = ValidationGrid::lattice(dim, -4.0, 4.0, 41).points;
  return g;
}

std::size_t BoundReport::violation_count() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const BoundRow& r) { return r.violated; }));
}

std::size_t BoundReport::skipped_count() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const BoundRow& r) { return r.skipped; }));
}

double BoundReport::min_margin() const {
  double m = kInf;
  for (const auto& r : rows) {
    if (!r.skipped) m = std::min(m, r.margin);
  }
  return m;
}

std::string BoundReport::to_csv() const {
  std::ostringstream os;
  const auto dim = rows.empty() ? 1 : rows.front().x.size();
  os << "theorem,check,t_bar,t";
  for (Eigen::Index d = 0; d < dim; ++d) os << ",x" << d;
  os << ",bound,observed,margin,violated,skipped\n";
  for (const auto& r : rows) {
    os << theorem_id << ',' << r.check << ',' << fmt17(r.t_bar) << ',' << fmt17(r.t);
    for (Eigen::Index d = 0; d < r.x.size(); ++d) os << ',' << fmt17(r.x(d));
    os << ',' << fmt17(r.bound) << ',' << fmt17(r.observed) << ',' << fmt17(r.margin) << ','
       << (r.violated ? "true" : "false") << ',' << (r.skipped ? "true" : "false") << '\n';
  }
  return os.str();
}

namespace {
nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return fmt17(v);
}
}  // namespace

std::string BoundReport::to_json() const {
  nlohmann::json j;
  j["theorem_id"] = theorem_id;
  j["target"] = target;
  j["tolerance"] = tolerance;
  j["violations"] = violation_count();
  j["skipped"] = skipped_count();
  j["min_margin"] = num(min_margin());
  auto& arr = j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"check", r.check},
                   {"t_bar", r.t_bar},
                   {"t", num(r.t)},
                   {"x", std::vector<double>(r.x.data(), r.x.data() + r.x.size())},
                   {"bound", num(r.bound)},
                   {"observed", num(r.observed)},
                   {"margin", num(r.margin)},
                   {"violated", r.violated},
                   {"skipped", r.skipped}});
  }
  return j.dump(2);
}

std::vector<std::string> theorem_ids() { return {"thm31", "cor32", "thm33", "thm35", "thm37"}; }

namespace {

enum class Theorem { thm31, cor32, thm33, thm35, thm37 };

Theorem parse_theorem(const std::string& id) {
  if (id == "thm31") return Theorem::thm31;
  if (id == "cor32" || id == "thm32") return Theorem::cor32;
  if (id == "thm33") return Theorem::thm33;
  if (id == "thm35" || id == "thm5") return Theorem::thm35;
  if (id == "thm37") return Theorem::thm37;
  throw DomainError("unknown theorem id '" + id + "'");
}

PotentialMetadata require_metadata(const ScoreField& field, const std::string& id) {
  const auto& t = field.target();
  if (t.kind() == TargetKind::compact_measure) {
    throw UnsupportedError(id + " does not apply to compact target '" + t.name + "'");
  }
  const auto pot = potential_view(t);
  if (!pot.metadata) throw UnsupportedError(id + " needs declared metadata; target '" + t.name + "' has none");
  return *pot.metadata;
}

// margin for an upper bound: bound - observed; for a lower bound: observed - bound.
BoundRow upper_row(std::string check, double bound, double observed) {
  BoundRow r;
  r.check = std::move(check);
  r.bound = bound;
  r.observed = observed;
  r.margin = bound - observed;
  return r;
}

BoundRow lower_row(std::string check, double bound, double observed) {
  BoundRow r;
  r.check = std::move(check);
  r.bound = bound;
  r.observed = observed;
  r.margin = observed - bound;
  return r;
}

BoundRow skipped_row(std::string check, double bound) {
  BoundRow r;
  r.check = std::move(check);
  r.bound = bound;
  r.observed = kNaN;
  r.margin = kNaN;
  r.skipped = true;
  return r;
}

}  // namespace

BoundReport sweep_verify(const TargetSpec& target, const std::string& theorem_id, const SweepGrid& grid,
                         const QuadratureConfig& cfg, double tolerance) {
  if (grid.t_bars.empty() || grid.points.empty()) throw DomainError("sweep_verify: empty grid");
  const Theorem th = parse_theorem(theorem_id);
  const ScoreField field(target, cfg);
  const int n = target.dim;
  for (const auto& p : grid.points) {
    if (p.size() != n) throw ContractError("sweep_verify: grid point dimension mismatch");
  }

  PotentialMetadata md;
  Thm33Params p33;
  double compact_M = 0.0;
  switch (th) {
    case Theorem::thm31:
    case Theorem::cor32:
    case Theorem::thm35:
      md = require_metadata(field, theorem_id);
      if (th == Theorem::thm35 && !std::isfinite(md.grad_sup)) {
        throw UnsupportedError("thm35 needs a bounded gradient; target '" + target.name + "' declares none");
      }
      break;
    case Theorem::thm33:
      md = require_metadata(field, theorem_id);
      p33 = Thm33Params::from_metadata(potential_view(target), n);
      break;
    case Theorem::thm37:
      if (target.kind() != TargetKind::compact_measure) {
        throw UnsupportedError("thm37 applies to compact targets only");
      }
      compact_M = std::get<CompactMeasureSpec>(target.payload).M;
      break;
  }

  const std::size_t np = grid.points.size();
  const std::size_t total = grid.t_bars.size() * np;
  std::vector<std::vector<BoundRow>> out(total);
  parallel_for(total, [&](std::size_t idx) {
    const double tb = grid.t_bars[idx / np];
    const Vec& x = grid.points[idx % np];
    const double t = tb < 1.0 ? -std::log1p(-tb) : kInf;
    std::vector<BoundRow> rows;
    switch (th) {
      case Theorem::thm31: {
        const auto b = thm31_bounds(md.M0, md.M1, std::isfinite(t) ? t : 0.0);
        if (!std::isfinite(t)) break;
        const auto e = field.evaluate(tb, x);
        const auto er = symmetric_eigen_range(std::exp(-t) * e.hess_qbar);
        rows.push_back(upper_row("hess_upper", b.upper, er.max));
        if (t < b.horizon) {
          rows.push_back(lower_row("hess_lower", b.lower, er.min));
        } else {
          rows.push_back(skipped_row("hess_lower", b.lower));
        }
        break;
      }
      case Theorem::cor32: {
        if (!std::isfinite(t)) break;
        const double L0 = md.M0 - 1.0;
        const double L1 = md.M1 + 1.0;
        double bound = kInf;
        bool beyond = t >= cor32_horizon(L0);
        if (!beyond) bound = cor32_Ct(L0, L1, t);
        if (beyond || !std::isfinite(bound)) {
          rows.push_back(skipped_row("log_density_hess_norm", bound));
          break;
        }
        const auto e = field.evaluate(tb, x);
        const Mat h = std::exp(-t) * e.hess_qbar + Mat::Identity(n, n);
        rows.push_back(upper_row("log_density_hess_norm", bound, spectral_norm_symmetric(h)));
        break;
      }
      case Theorem::thm33: {
        const auto b = thm33_bounds(p33, tb, x);
        const auto e = field.evaluate(tb, x, true);
        rows.push_back(upper_row("grad", b.grad, e.grad_qbar.norm()));
        rows.push_back(upper_row("hess_norm", b.hess, spectral_norm_symmetric(e.hess_qbar)));
        rows.push_back(upper_row("time_grad", b.time, e.grad_qbar_t->norm()));
        break;
      }
      case Theorem::thm35: {
        const auto b = thm5_bounds(md.grad_sup, md.L);
        const auto e = field.evaluate(tb, x);
        const auto er = symmetric_eigen_range(e.hess_qbar);
        rows.push_back(upper_row("grad", b.grad, e.grad_qbar.norm()));
        rows.push_back(lower_row("hess_lower", b.hess_lower, er.min));
        rows.push_back(upper_row("hess_upper", b.hess_upper, er.max));
        break;
      }
      case Theorem::thm37: {
        const auto b = thm37_bounds(compact_M, tb, x);
        const auto e = field.evaluate(tb, x);
        rows.push_back(upper_row("grad", b.grad, e.grad_qbar.norm()));
        rows.push_back(upper_row("hess_norm", b.hess, spectral_norm_symmetric(e.hess_qbar)));
        break;
      }
    }
    for (auto& r : rows) {
      r.t_bar = tb;
      r.t = t;
      r.x = x;
      if (!r.skipped) r.violated = !(r.margin >= -tolerance);
    }
    out[idx] = std::move(rows);
  });

  BoundReport rep;
  rep.theorem_id = theorem_id == "thm5" ? "thm35" : (theorem_id == "thm32" ? "cor32" : theorem_id);
  rep.target = target.name;
  rep.tolerance = tolerance;
  for (auto& v : out) {
    for (auto& r : v) rep.rows.push_back(std::move(r));
  }
  return rep;
}

}  // namespace scorelab
