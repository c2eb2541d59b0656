#include "moire/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "moire/error.hpp"

namespace moire {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double sup_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

bool finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

// Minimizer of the cubic matching values and slopes at a and b, clamped to the
// interior of [lo, hi] with a 10% margin; bisection if the cubic is degenerate.
double cubic_step(double a, double fa, double da, double b, double fb, double db) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  double t = 0.5 * (a + b);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = db - da + 2.0 * d2;
    if (denom != 0.0) t = b - (b - a) * (db + d2 - d1) / denom;
  }
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(t)) t = 0.5 * (a + b);
  return std::clamp(t, lo + margin, hi - margin);
}

struct Trial {
  double alpha;
  double f;
  double slope;
};

class LineSearch {
 public:
  LineSearch(const Objective& f, const LbfgsOptions& opt, std::span<const double> x0,
             std::span<const double> dir, double f0, double slope0, int& evals)
      : f_(f), opt_(opt), x0_(x0), dir_(dir), f0_(f0), slope0_(slope0), evals_(evals),
        x_(x0.size()), g_(x0.size()) {}

  // Returns false if no acceptable step was found.
  bool run(double alpha) {
    Trial prev{0.0, f0_, slope0_};
    for (int i = 0; i < opt_.max_line_search; ++i) {
      Trial cur = evaluate(alpha);
      int shrink = 0;
      while (!std::isfinite(cur.f) || !std::isfinite(cur.slope)) {
        if (++shrink > 60) throw NumericalFailure("objective is not finite along the search direction");
        alpha = prev.alpha + 0.5 * (alpha - prev.alpha);
        cur = evaluate(alpha);
      }
      if (!sufficient(cur) || (i > 0 && cur.f >= prev.f)) return zoom(prev, cur);
      if (curvature(cur)) return true;
      if (cur.slope >= 0.0) return zoom(cur, prev);
      prev = cur;
      alpha *= 4.0;
    }
    return false;
  }

  std::vector<double>& x() { return x_; }
  std::vector<double>& g() { return g_; }
  double f() const { return f_acc_; }
  double alpha() const { return alpha_acc_; }

 private:
  Trial evaluate(double alpha) {
    for (std::size_t i = 0; i < x_.size(); ++i) x_[i] = x0_[i] + alpha * dir_[i];
    const double fv = f_(x_, g_);
    ++evals_;
    f_acc_ = fv;
    alpha_acc_ = alpha;
    if (!std::isfinite(fv) || !finite(g_)) return {alpha, NAN, NAN};
    return {alpha, fv, dot(g_, dir_)};
  }

  // Armijo, with the approximate form once f differences reach round-off.
  bool sufficient(const Trial& t) const {
    if (t.f <= f0_ + opt_.c1 * t.alpha * slope0_) return true;
    const double noise = 1e-12 * std::abs(f0_);
    return std::abs(t.f - f0_) <= noise && t.slope <= (2.0 * opt_.c1 - 1.0) * slope0_;
  }

  bool curvature(const Trial& t) const { return std::abs(t.slope) <= -opt_.c2 * slope0_; }

  bool zoom(Trial lo, Trial hi) {
    for (int i = 0; i < opt_.max_line_search; ++i) {
      const double a = cubic_step(lo.alpha, lo.f, lo.slope, hi.alpha, hi.f, hi.slope);
      const Trial cur = evaluate(a);
      if (!std::isfinite(cur.f) || !std::isfinite(cur.slope)) {
        hi = {a, INFINITY, 0.0};
        continue;
      }
      if (!sufficient(cur) || cur.f >= lo.f) {
        hi = cur;
      } else {
        if (curvature(cur)) return true;
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = cur;
      }
      if (std::abs(hi.alpha - lo.alpha) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
    }
    // Fall back to the best point seen if it decreased f.
    if (lo.alpha > 0.0 && lo.f < f0_) {
      evaluate(lo.alpha);
      return true;
    }
    return false;
  }

  const Objective& f_;
  const LbfgsOptions& opt_;
  std::span<const double> x0_;
  std::span<const double> dir_;
  double f0_;
  double slope0_;
  int& evals_;
  std::vector<double> x_;
  std::vector<double> g_;
  double f_acc_ = 0.0;
  double alpha_acc_ = 0.0;
};

}  // namespace

LbfgsReport minimize_lbfgs(const Objective& f, std::vector<double>& x, const LbfgsOptions& opt,
                           const InverseMetric& metric, const IterationHook& hook) {
  if (opt.grad_tol <= 0.0 || opt.max_iter < 0 || opt.memory < 1)
    throw InvalidArgument("L-BFGS options must be positive");
  const std::size_t n = x.size();
  std::vector<double> g(n), d(n), q(n), r(n);
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  auto apply_metric = [&](std::span<const double> in, std::span<double> out) {
    if (metric)
      metric(in, out);
    else
      std::copy(in.begin(), in.end(), out.begin());
  };

  LbfgsReport rep;
  rep.f = f(x, g);
  rep.evaluations = 1;
  if (!std::isfinite(rep.f) || !finite(g)) throw NumericalFailure("objective is not finite at the start point");
  rep.grad_inf = sup_norm(g);
  double gamma = 1.0;

  while (true) {
    if (rep.grad_inf <= opt.grad_tol) {
      rep.status = LbfgsStatus::Converged;
      return rep;
    }
    if (rep.iterations >= opt.max_iter) {
      rep.status = LbfgsStatus::MaxIterations;
      return rep;
    }

    // Two-loop recursion with H0 = gamma * metric.
    q = g;
    const std::size_t m = s_hist.size();
    std::vector<double> a(m);
    for (std::size_t i = m; i-- > 0;) {
      a[i] = rho_hist[i] * dot(s_hist[i], q);
      for (std::size_t k = 0; k < n; ++k) q[k] -= a[i] * y_hist[i][k];
    }
    apply_metric(q, r);
    for (std::size_t k = 0; k < n; ++k) r[k] *= gamma;
    for (std::size_t i = 0; i < m; ++i) {
      const double b = rho_hist[i] * dot(y_hist[i], r);
      for (std::size_t k = 0; k < n; ++k) r[k] += s_hist[i][k] * (a[i] - b);
    }
    for (std::size_t k = 0; k < n; ++k) d[k] = -r[k];

    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      // Lost descent: restart from the preconditioned gradient.
      s_hist.clear(), y_hist.clear(), rho_hist.clear();
      apply_metric(g, r);
      for (std::size_t k = 0; k < n; ++k) d[k] = -gamma * r[k];
      slope = dot(g, d);
      if (!(slope < 0.0)) {
        rep.status = LbfgsStatus::LineSearchStalled;
        return rep;
      }
    }

    LineSearch ls(f, opt, x, d, rep.f, slope, rep.evaluations);
    if (!ls.run(1.0)) {
      if (m == 0) {
        rep.status = LbfgsStatus::LineSearchStalled;
        return rep;
      }
      s_hist.clear(), y_hist.clear(), rho_hist.clear();
      continue;
    }

    std::vector<double> s(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = ls.x()[k] - x[k];
      y[k] = ls.g()[k] - g[k];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      apply_metric(y, r);
      gamma = sy / dot(y, r);
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.memory) {
        s_hist.pop_front(), y_hist.pop_front(), rho_hist.pop_front();
      }
    }
    x.swap(ls.x());
    g.swap(ls.g());
    rep.f = ls.f();
    rep.grad_inf = sup_norm(g);
    ++rep.iterations;
    if (hook) hook(rep.iterations, rep.f, rep.grad_inf);
  }
}

}  // namespace moire
