// Acceptance checks: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: acceptance [--unit-tests <path>] [--only <n>]
#include "scorelab/bounds.hpp"
#include "scorelab/counterexample.hpp"
#include "scorelab/metrics.hpp"
#include "scorelab/sampler.hpp"
#include "scorelab/scorefield.hpp"
#include "scorelab/targets.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace scorelab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Outcome block_ratios() {
  std::ostringstream os;
  bool ok = true;
  for (double M : {1.0, 2.0, 4.0, 8.0}) {
    const auto c = block_ratio(M, BlockPath::closed_form);
    const auto q = block_ratio(M, BlockPath::quadrature);
    const double rel = std::abs(q.ratio - c.ratio) / std::abs(c.ratio);
    ok = ok && rel <= 1e-6 && c.ratio > M * M / 3.0 && q.ratio > M * M / 3.0;
    os << "M=" << M << " ratio=" << fmt(c.ratio) << " rel=" << fmt(rel) << "; ";
  }
  return {ok, os.str()};
}

Outcome horizon_sharpness() {
  std::ostringstream os;
  const Chain k3 = assemble_chain(3);
  const auto grid = chain_grid(k3, {0.05, 0.1, 0.2, 0.35, 0.45});
  const auto rep = sweep_verify(k3.target, "thm31", grid);
  std::size_t lower_viol = 0, lower_rows = 0;
  for (const auto& r : rep.rows) {
    if (r.check != "hess_lower" || r.skipped) continue;
    ++lower_rows;
    lower_viol += r.violated ? 1 : 0;
  }
  const Chain k8 = assemble_chain(8);
  const auto chain = verify_chain(k8, 0.5);
  const auto& b8 = chain.blocks.back();
  // qbar_xx = -(log pbar)_xx at the block centre
  const double qxx = -b8.ratio;
  const bool ok = lower_rows > 0 && lower_viol == 0 && b8.M == 8.0 && qxx <= -64.0 / 3.0;
  os << "K=3 lower rows=" << lower_rows << " violations=" << lower_viol << "; K=8 block M=" << b8.M
     << " qbar_xx(1/2)=" << fmt(qxx) << " (<= " << fmt(-64.0 / 3.0) << ")";
  return {ok, os.str()};
}

Outcome prior_comparison() {
  // 30-digit evaluations of 2 asinh(1/(4(M0+1))) and -log(1 - 1/M0)
  struct Ref {
    double M0, prior, horizon;
  };
  const Ref refs[] = {{1.5, 0.19966815779841512666, 1.0986122886681096914},
                      {2.0, 0.16647436576837291924, 0.69314718055994530942},
                      {4.0, 0.09995838013869733046, 0.28768207245178092744}};
  std::ostringstream os;
  bool ok = true;
  for (const auto& r : refs) {
    const double p = prior_horizon(r.M0 + 1.0);
    const double h = thm31_bounds(r.M0, 0.0, 0.0).horizon;
    ok = ok && p < h && std::abs(p - r.prior) <= 1e-10 && std::abs(h - r.horizon) <= 1e-10;
    os << "M0=" << r.M0 << ": " << fmt(p) << " < " << fmt(h) << "; ";
  }
  return {ok, os.str()};
}

Outcome oracle_equivalence() {
  std::ostringstream os;
  bool ok = true;
  for (const auto& [name, params] : std::vector<std::pair<std::string, ParamMap>>{
           {"std_normal", {}}, {"gaussian", {{"var", 4.0}}}, {"mixture2", {}}}) {
    const TargetSpec target = catalog(name, params);
    const auto mix = mixture_view(target);
    if (!mix) return {false, name + " has no mixture form"};
    const ScoreField field(target);
    const auto grid = SweepGrid::standard(target.dim);
    double worst = 0.0;
    for (double tb : grid.t_bars) {
      const double t = -std::log1p(-tb);
      for (const auto& x : grid.points) {
        const auto q = field.forward(t, x);
        const auto c = closed_form_mixture(*mix, t, x);
        const double es = (q.score - c.score).norm() / std::max(1.0, c.score.norm());
        const double eh = (q.score_jacobian - c.jacobian).norm() / std::max(1.0, c.jacobian.norm());
        worst = std::max({worst, es, eh});
      }
    }
    ok = ok && worst <= 1e-8;
    os << name << " max rel=" << fmt(worst) << "; ";
  }
  return {ok, os.str()};
}

Outcome compact_bounds() {
  const TargetSpec target = catalog("two_point");
  SweepGrid grid;
  grid.t_bars = {0.05, 0.1, 0.5};
  grid.points = ValidationGrid::lattice(1, -3.0, 3.0, 61).points;
  const auto rep = sweep_verify(target, "thm37", grid);
  const ScoreField field(target);
  double worst = 0.0;
  for (double t : grid.t_bars) {
    for (const auto& x : grid.points) {
      const double s = 1.0 / std::cosh(x(0) / t);
      const double expect = 1.0 / t - s * s / (t * t);
      const double got = field.hess_qbar(t, x)(0, 0);
      worst = std::max(worst, std::abs(got - expect) / std::max(1.0, std::abs(expect)));
    }
  }
  const bool ok = rep.violation_count() == 0 && rep.skipped_count() == 0 && worst <= 1e-8;
  return {ok, "violations=" + std::to_string(rep.violation_count()) + " of " + std::to_string(rep.rows.size()) +
                  " rows; sech^2 form max rel=" + fmt(worst)};
}

Outcome blowup_rate() {
  const ScoreField field(catalog("notched_square"));
  const Vec x = (Vec(2) << 1.5, 0.0).finished();
  std::ostringstream os;
  std::vector<double> vals;
  for (double t : {0.1, 0.05, 0.02, 0.01}) {
    const Mat H = field.hess_qbar(t, x);
    vals.push_back(t * t * (-H.trace() + 2.0 / t));
    os << "t=" << t << ":" << fmt(vals.back()) << " ";
  }
  bool monotone = true;
  for (std::size_t i = 1; i < vals.size(); ++i) {
    monotone = monotone && std::abs(vals[i] - 1.0) <= std::abs(vals[i - 1] - 1.0);
  }
  const bool ok = vals.back() >= 0.85 && vals.back() <= 1.1 && monotone;
  return {ok, os.str() + (monotone ? "monotone" : "not monotone")};
}

Outcome generic_rate() {
  const ScoreField field(catalog("notched_square"));
  const Vec x = (Vec(2) << 3.0, 0.7).finished();
  double lo = kInf, hi = 0.0;
  std::ostringstream os;
  for (double t : {0.1, 0.05, 0.02, 0.01}) {
    const double v = t * spectral_norm_symmetric(field.hess_qbar(t, x));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    os << "t=" << t << ":" << fmt(v) << " ";
  }
  return {hi / lo < 2.0, os.str() + "max/min=" + fmt(hi / lo)};
}

struct W1Stat {
  double value;
  double stderr_;
};

W1Stat w1_with_batches(const Ensemble& e, const Ensemble& ref, std::size_t batches) {
  const double w = w1_1d(e.column(0), ref.column(0));
  const std::size_t per = std::min(e.size(), ref.size()) / batches;
  std::vector<double> bw;
  for (std::size_t b = 0; b < batches; ++b) {
    std::vector<double> xa(e.data.begin() + b * per, e.data.begin() + (b + 1) * per);
    std::vector<double> xb(ref.data.begin() + b * per, ref.data.begin() + (b + 1) * per);
    bw.push_back(w1_1d(std::move(xa), std::move(xb)));
  }
  double mean = 0.0;
  for (double v : bw) mean += v;
  mean /= static_cast<double>(bw.size());
  double v2 = 0.0;
  for (double v : bw) v2 += (v - mean) * (v - mean);
  // batch spread scaled from batch size to the full ensemble
  const double se = std::sqrt(v2 / static_cast<double>(bw.size() - 1)) / std::sqrt(static_cast<double>(bw.size()));
  return {w, se};
}

Outcome convergence_rate() {
  const TargetSpec target = catalog("mixture2");
  const ScoreSource src = make_score_source(SourceKind::exact, target);
  const std::size_t n = 1000000;
  const Ensemble ref = forward_sample(target, 0.0, n, 0x5DEECE66Dull);
  std::vector<RatePoint> pts;
  std::ostringstream os;
  bool monotone = true;
  for (std::size_t N : {5, 10, 20, 40, 80}) {
    SamplerConfig sc;
    sc.T = 3.0;
    sc.N = N;
    sc.ensemble = n;
    sc.seed = 11;
    const Ensemble e = backward_run(sc, src);
    const auto s = w1_with_batches(e, ref, 10);
    if (!pts.empty()) {
      const auto& prev = pts.back();
      monotone = monotone && s.value <= prev.error + 2.0 * std::hypot(s.stderr_, prev.stderr_);
    }
    pts.push_back({static_cast<double>(N), s.value, s.stderr_});
    os << "N=" << N << ":" << fmt(s.value) << " ";
  }
  const auto fit = rate_fit(pts);
  os << "gamma=" << fmt(fit.gamma) << " floor=" << fmt(fit.a);
  return {monotone && !fit.degenerate && fit.gamma >= 0.7 && fit.gamma <= 1.3, os.str()};
}

Outcome score_error_term() {
  const TargetSpec target = catalog("mixture2");
  const ScoreSource exact = make_score_source(SourceKind::exact, target);
  SamplerConfig sc;
  sc.T = 3.0;
  sc.N = 200;
  sc.ensemble = 200000;
  sc.seed = 5;
  const Ensemble ref = forward_sample(target, 0.0, sc.ensemble, 0x5DEECE66Dull);
  std::vector<double> times = score_eval_times(sc);
  std::sort(times.begin(), times.end());
  times.insert(times.begin(), 0.0);
  std::ostringstream os;
  bool ok = true;
  std::vector<double> cs, ws;
  for (double c : {0.05, 0.1, 0.2}) {
    Perturbation eta;
    eta.c = c;
    const ScoreSource src = perturb(exact, eta);
    const auto e0 = eps0(src, exact, target, times, 4000, 17);
    ok = ok && std::abs(e0.value - c) <= std::max(3.0 * e0.stderr_, 1e-12);
    const double w = w1_1d(backward_run(sc, src).column(0), ref.column(0));
    cs.push_back(c);
    ws.push_back(w);
    os << "c=" << c << ": eps0=" << fmt(e0.value) << " W1=" << fmt(w) << "; ";
  }
  double lo = kInf, hi = 0.0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    lo = std::min(lo, ws[i] / cs[i]);
    hi = std::max(hi, ws[i] / cs[i]);
  }
  os << "W1/c spread=" << fmt(hi / lo);
  return {ok && hi / lo <= 1.5, os.str()};
}

std::string unit_tests_path;

Outcome self_consistency() {
  if (unit_tests_path.empty()) return {false, "no --unit-tests path given"};
  const auto start = std::chrono::steady_clock::now();
  const std::string cmd = "SCORE_LAB_THREADS=1 \"" + unit_tests_path + "\" > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {rc == 0 && secs < 600.0, "exit=" + std::to_string(rc) + " runtime=" + fmt(secs) + "s"};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string a = argv[i];
    if (a == "--unit-tests") unit_tests_path = argv[i + 1];
    else if (a == "--only") only = std::atoi(argv[i + 1]);
  }
  set_thread_count(1);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"block ratio closed form vs quadrature", block_ratios},
      {"horizon sharpness on the block chain", horizon_sharpness},
      {"prior horizon below blow-up horizon", prior_comparison},
      {"quadrature vs closed-form mixture oracle", oracle_equivalence},
      {"compact-support bounds on two_point", compact_bounds},
      {"1/t^2 curvature at the notch", blowup_rate},
      {"O(1/t) Hessian at a generic point", generic_rate},
      {"W1 convergence rate in N", convergence_rate},
      {"score-error term with constant eta", score_error_term},
      {"self-consistency suite", self_consistency},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i + 1) != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
