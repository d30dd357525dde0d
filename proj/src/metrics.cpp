#include "scorelab/metrics.hpp"

#include "scorelab/quadrature.hpp"
#include "scorelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace scorelab {

namespace {

// Empirical quantile at level q with linear interpolation between order
// statistics placed at (i + 0.5) / n.
double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size()) - 0.5;
  if (pos <= 0.0) return s.front();
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= s.size()) return s.back();
  const double f = pos - static_cast<double>(i);
  return s[i] + f * (s[i + 1] - s[i]);
}

}  // namespace

double w1_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("w1_1d: empty sample set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() != b.size()) {
    auto& big = a.size() > b.size() ? a : b;
    const auto& small = a.size() > b.size() ? b : a;
    std::vector<double> reduced(small.size());
    for (std::size_t i = 0; i < reduced.size(); ++i) {
      reduced[i] = quantile_sorted(big, (static_cast<double>(i) + 0.5) / static_cast<double>(reduced.size()));
    }
    big = std::move(reduced);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double sliced_w1(const Ensemble& a, const Ensemble& b, int directions, std::uint64_t seed) {
  if (a.dim != b.dim) throw ContractError("sliced_w1: dimension mismatch");
  if (a.dim == 1) return w1_1d(a.column(0), b.column(0));
  if (directions < 1) throw DomainError("sliced_w1: need at least one direction");
  double total = 0.0;
  for (int k = 0; k < directions; ++k) {
    NormalStream rng(seed, static_cast<std::uint64_t>(k), 0, 7);
    Vec dir(a.dim);
    for (int d = 0; d < a.dim; ++d) dir(d) = rng.normal();
    dir.normalize();
    auto project = [&](const Ensemble& e) {
      std::vector<double> p(e.size());
      for (std::size_t i = 0; i < p.size(); ++i) {
        double s = 0.0;
        for (int d = 0; d < e.dim; ++d) s += dir(d) * e.row(i)[d];
        p[i] = s;
      }
      return p;
    };
    total += w1_1d(project(a), project(b));
  }
  return total / directions;
}

KdeKl kl_kde_1d(const std::vector<double>& samples, const std::function<double(double)>& density,
                std::size_t grid_points) {
  if (samples.size() < 1000) throw DomainError("kl_kde_1d: need at least 1000 samples");
  if (grid_points < 3) throw DomainError("kl_kde_1d: need at least 3 grid points");
  std::vector<double> s = samples;
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : s) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd > 0.0 ? sd : 1.0;
  const double h = 0.9 * spread * std::pow(n, -0.2);

  // Window: grow from the sample range until p0 carries < 1e-9 outside it.
  double lo = std::min(s.front(), -50.0) - 10.0 * sd;
  double hi = std::max(s.back(), 50.0) + 10.0 * sd;
  {
    const std::size_t probe = 200001;
    std::vector<double> p(probe);
    const double dx = (hi - lo) / (probe - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < probe; ++i) {
      p[i] = density(lo + dx * i);
      if (!std::isfinite(p[i]) || p[i] < 0.0) throw NumericalError("kl_kde_1d: density not finite on the grid");
      total += p[i] * dx;
    }
    if (!(total > 0.0)) throw NumericalError("kl_kde_1d: density has no mass on the search window");
    double acc = 0.0;
    std::size_t i_lo = 0;
    while (i_lo + 1 < probe && acc + p[i_lo] * dx < 0.5e-9 * total) acc += p[i_lo++] * dx;
    acc = 0.0;
    std::size_t i_hi = probe - 1;
    while (i_hi > i_lo + 1 && acc + p[i_hi] * dx < 0.5e-9 * total) acc += p[i_hi--] * dx;
    lo = lo + dx * i_lo;
    hi = lo + dx * (i_hi - i_lo);
  }

  const double dx = (hi - lo) / static_cast<double>(grid_points - 1);
  const double log_norm = -std::log(n * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> px(grid_points), term(grid_points);
  double mass = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = lo + dx * static_cast<double>(i);
    px[i] = density(x);
    if (!std::isfinite(px[i])) throw NumericalError("kl_kde_1d: density not finite on the grid");
    mass += (i == 0 || i + 1 == grid_points ? 0.5 : 1.0) * px[i] * dx;
  }
  parallel_for(grid_points, [&](std::size_t i) {
    const double x = lo + dx * static_cast<double>(i);
    const double p = px[i] / mass;
    if (p <= 0.0) {
      term[i] = 0.0;
      return;
    }
    const auto first = std::lower_bound(s.begin(), s.end(), x - 9.0 * h);
    const auto last = std::upper_bound(s.begin(), s.end(), x + 9.0 * h);
    double k = 0.0;
    for (auto it = first; it != last; ++it) {
      const double z = (x - *it) / h;
      k += std::exp(-0.5 * z * z);
    }
    double log_kde;
    if (k > 0.0) {
      log_kde = log_norm + std::log(k);
    } else {
      // dominant term from the nearest sample keeps the log finite
      const auto it = std::lower_bound(s.begin(), s.end(), x);
      double d = kInf;
      if (it != s.end()) d = std::min(d, *it - x);
      if (it != s.begin()) d = std::min(d, x - *(it - 1));
      log_kde = log_norm - 0.5 * (d / h) * (d / h);
    }
    term[i] = p * (std::log(p) - log_kde);
  });
  double kl = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) kl += (i == 0 || i + 1 == grid_points ? 0.5 : 1.0) * term[i] * dx;
  return {kl, h, lo, hi};
}

Estimate eps0(const ScoreSource& source, const ScoreSource& reference, const TargetSpec& target,
              const std::vector<double>& schedule, std::size_t mc, std::uint64_t seed) {
  if (schedule.size() < 2) throw DomainError("eps0: schedule needs at least two times");
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    if (!(schedule[k] > schedule[k - 1])) throw DomainError("eps0: schedule must be increasing");
  }
  if (mc < 2) throw DomainError("eps0: need mc >= 2");
  if (source.dim != target.dim || reference.dim != target.dim) throw ContractError("eps0: dimension mismatch");
  const double span = schedule.back() - schedule.front();
  const int n = target.dim;
  const std::size_t K = schedule.size() - 1;
  std::vector<double> means(K), vars(K);
  for (std::size_t k = 1; k <= K; ++k) {
    const double t = schedule[k];
    const Ensemble xs = forward_sample(target, t, mc, seed + 0x9E3779B97F4A7C15ull * k);
    std::vector<double> sq(mc);
    parallel_for(mc, [&](std::size_t i) {
      double a[8], b[8];
      std::vector<double> ha, hb;
      double* pa = a;
      double* pb = b;
      if (n > 8) {
        ha.resize(n);
        hb.resize(n);
        pa = ha.data();
        pb = hb.data();
      }
      source.eval(t, xs.row(i), pa);
      reference.eval(t, xs.row(i), pb);
      double d2 = 0.0;
      for (int d = 0; d < n; ++d) d2 += (pa[d] - pb[d]) * (pa[d] - pb[d]);
      sq[i] = d2;
    });
    const double m = std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(mc);
    double v = 0.0;
    for (double q : sq) v += (q - m) * (q - m);
    means[k - 1] = m;
    vars[k - 1] = v / static_cast<double>(mc - 1);
  }
  double S = 0.0;
  double varS = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double w = (schedule[k] - schedule[k - 1]) / span;
    S += w * means[k - 1];
    varS += w * w * vars[k - 1] / static_cast<double>(mc);
  }
  const double value = std::sqrt(S);
  // delta method for the square root
  const double se = S > 0.0 ? std::sqrt(varS) / (2.0 * value) : 0.0;
  return {value, se};
}

namespace {

struct LogFit {
  double log_b;
  double gamma;
  double rss;
};

// Least squares of log(err - a) on log N.
LogFit fit_logs(const std::vector<RatePoint>& pts, double a) {
  const double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    const double x = std::log(p.N);
    const double y = std::log(p.error - a);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double icpt = (sy - slope * sx) / n;
  double rss = 0.0;
  for (const auto& p : pts) {
    const double r = std::log(p.error - a) - (icpt + slope * std::log(p.N));
    rss += r * r;
  }
  return {icpt, -slope, rss};
}

}  // namespace

RateFit rate_fit(const std::vector<RatePoint>& points) {
  if (points.size() < 4) throw DomainError("rate_fit: need at least 4 points");
  std::vector<double> Ns;
  for (const auto& p : points) {
    if (!(p.N > 0.0) || !std::isfinite(p.error)) throw DomainError("rate_fit: bad point");
    Ns.push_back(p.N);
  }
  std::sort(Ns.begin(), Ns.end());
  if (std::adjacent_find(Ns.begin(), Ns.end()) != Ns.end()) throw DomainError("rate_fit: N values must be distinct");
  double emin = kInf, emax = -kInf, se_min = 0.0;
  for (const auto& p : points) {
    if (p.error < emin) {
      emin = p.error;
      se_min = p.stderr_;
    }
    emax = std::max(emax, p.error);
  }
  RateFit fit;
  if (!(emax > emin) || emin <= 0.0) {
    fit.degenerate = true;
    fit.a = emin;
    fit.b = 0.0;
    fit.gamma = 0.0;
    fit.residual = 0.0;
    return fit;
  }
  // Profile over the floor a in [0, emin). The scan starts from the
  // min-minus-one-stderr estimate and covers the whole admissible range.
  const double a_hi = emin * (1.0 - 1e-12);
  auto rss = [&](double a) { return fit_logs(points, a).rss; };
  const int scan = 2000;
  double best_a = std::clamp(emin - se_min, 0.0, a_hi);
  double best = rss(best_a);
  for (int i = 0; i <= scan; ++i) {
    // denser near emin where the profile changes fastest
    const double u = static_cast<double>(i) / scan;
    const double a = a_hi * (1.0 - (1.0 - u) * (1.0 - u));
    const double r = rss(a);
    if (r < best) {
      best = r;
      best_a = a;
    }
  }
  // golden-section refinement around the best scan point
  const double step = a_hi / scan * 4.0;
  double lo = std::max(0.0, best_a - step);
  double hi = std::min(a_hi, best_a + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo);
  double d = lo + g * (hi - lo);
  double fc = rss(c), fd = rss(d);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, emin); ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = rss(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = rss(d);
    }
  }
  const double a_ref = 0.5 * (lo + hi);
  if (rss(a_ref) < best) best_a = a_ref;
  const auto lf = fit_logs(points, best_a);
  fit.a = best_a;
  fit.b = std::exp(lf.log_b);
  fit.gamma = lf.gamma;
  fit.residual = std::sqrt(lf.rss / static_cast<double>(points.size()));
  return fit;
}

double sample_moment(const Ensemble& e, int m) {
  if (m != 2 && m != 4 && m != 8) throw DomainError("moment order must be 2, 4 or 8");
  if (e.size() == 0) throw DomainError("sample_moment: empty ensemble");
  double s = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    double r2 = 0.0;
    for (int d = 0; d < e.dim; ++d) r2 += e.row(i)[d] * e.row(i)[d];
    s += std::pow(r2, m / 2);
  }
  return s / static_cast<double>(e.size());
}

namespace {

// E x^k for x uniform on [lo, hi].
double uniform_power(double lo, double hi, int k) {
  return (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / ((k + 1) * (hi - lo));
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

double target_moment(const TargetSpec& target, int m) {
  if (m != 2 && m != 4 && m != 8) throw DomainError("moment order must be 2, 4 or 8");
  target.validate();
  const int n = target.dim;
  const int j = m / 2;
  if (auto mix = mixture_view(target)) {
    // Gauss-Hermite with 8 nodes per axis integrates degree-8 polynomials exactly.
    const auto rule = gauss_hermite(8);
    double total = 0.0;
    for (std::size_t c = 0; c < mix->weights.size(); ++c) {
      const double sd = std::sqrt(mix->variances[c]);
      std::size_t count = 1;
      for (int d = 0; d < n; ++d) count *= rule.order();
      double acc = 0.0;
      for (std::size_t idx = 0; idx < count; ++idx) {
        std::size_t rem = idx;
        double lw = 0.0, r2 = 0.0;
        for (int d = 0; d < n; ++d) {
          const std::size_t k = rem % rule.order();
          rem /= rule.order();
          const double x = mix->means[c](d) + std::sqrt(2.0) * sd * rule.nodes[k];
          lw += rule.log_weights[k];
          r2 += x * x;
        }
        acc += std::exp(lw) * std::pow(r2, j);
      }
      total += mix->weights[c] * acc / std::pow(std::numbers::pi, 0.5 * n);
    }
    return total;
  }
  if (target.kind() == TargetKind::compact_measure) {
    const auto& c = std::get<CompactMeasureSpec>(target.payload);
    return std::visit(
        [&](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, WeightedPoints>) {
            double s = 0.0, w = 0.0;
            for (std::size_t i = 0; i < f.points.size(); ++i) {
              s += f.weights[i] * std::pow(f.points[i].squaredNorm(), j);
              w += f.weights[i];
            }
            return s / w;
          } else if constexpr (std::is_same_v<F, UniformRectangles>) {
            double s = 0.0, area = 0.0;
            for (const auto& r : f.rects) {
              const double a = (r.x_hi - r.x_lo) * (r.y_hi - r.y_lo);
              double e = 0.0;
              for (int i = 0; i <= j; ++i) {
                e += binom(j, i) * uniform_power(r.x_lo, r.x_hi, 2 * i) * uniform_power(r.y_lo, r.y_hi, 2 * (j - i));
              }
              s += a * e;
              area += a;
            }
            return s / area;
          } else {
            double s = 0.0, len = 0.0;
            for (const auto& iv : f.intervals) {
              s += (iv.hi - iv.lo) * uniform_power(iv.lo, iv.hi, m);
              len += iv.hi - iv.lo;
            }
            return s / len;
          }
        },
        c.form);
  }
  // Smooth potential: composite Gauss-Legendre on a wide window (1D) or
  // tensor Gauss-Hermite in the Gaussian factor (2D).
  const auto pot = potential_view(target);
  if (n == 1) {
    const auto rule = gauss_legendre(20);
    std::vector<double> cuts{-40.0};
    for (double b : pot.breakpoints) {
      if (b > -40.0) cuts.push_back(b);
    }
    double top = 40.0;
    for (double b : pot.breakpoints) top = std::max(top, b + 40.0);
    cuts.push_back(top);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> logw, vals;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
      const double a = cuts[p], b = cuts[p + 1];
      if (!(b > a)) continue;
      const auto panels = static_cast<std::size_t>(std::ceil((b - a) / 0.25));
      const double w = (b - a) / static_cast<double>(panels);
      for (std::size_t k = 0; k < panels; ++k) {
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          const double y = a + w * (k + 0.5) + 0.5 * w * rule.nodes[q];
          logw.push_back(std::log(0.5 * w * rule.weights[q]) - pot.g(Vec::Constant(1, y)).value - 0.5 * y * y);
          vals.push_back(std::pow(y * y, j));
        }
      }
    }
    const double lse = log_sum_exp(logw);
    double s = 0.0;
    for (std::size_t i = 0; i < logw.size(); ++i) s += std::exp(logw[i] - lse) * vals[i];
    return s;
  }
  const auto rule = gauss_hermite(96);
  std::vector<double> logw, vals;
  for (std::size_t a = 0; a < rule.order(); ++a) {
    for (std::size_t b = 0; b < rule.order(); ++b) {
      Vec x(2);
      x << std::sqrt(2.0) * rule.nodes[a], std::sqrt(2.0) * rule.nodes[b];
      logw.push_back(rule.log_weights[a] + rule.log_weights[b] - pot.g(x).value);
      vals.push_back(std::pow(x.squaredNorm(), j));
    }
  }
  const double lse = log_sum_exp(logw);
  double s = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) s += std::exp(logw[i] - lse) * vals[i];
  return s;
}

std::string metric_row(const std::string& metric, double value, double stderr_,
                       const std::vector<std::pair<std::string, std::string>>& params) {
  std::ostringstream os;
  os << metric << ',' << fmt17(value) << ',' << fmt17(stderr_) << ',';
  for (std::size_t i = 0; i < params.size(); ++i) os << (i ? ";" : "") << params[i].first << '=' << params[i].second;
  return os.str();
}

}  // namespace scorelab
