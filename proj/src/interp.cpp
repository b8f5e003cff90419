#include "tslab/interp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "tslab/geometry.hpp"

namespace tslab {

void validate(const WeightedCouple& c) {
  if (!(c.q > 0.0) || !std::isfinite(c.q))
    throw std::invalid_argument("WeightedCouple: q must be positive and finite");
  if (c.measure.size() != c.weight.size())
    throw std::invalid_argument("WeightedCouple: measure/weight size mismatch");
  for (const double m : c.measure)
    if (!(m > 0.0) || !std::isfinite(m))
      throw std::invalid_argument("WeightedCouple: measures must be positive and finite");
  for (const double w : c.weight)
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("WeightedCouple: weights must be positive and finite");
}

namespace {

double powe(double x, double e) {
  if (e == 1.0) return x;
  if (e == 0.5) return std::sqrt(x);
  return std::pow(x, e);
}

void check_sizes(const WeightedCouple& c, const std::vector<double>& f,
                 const char* who) {
  if (f.size() != c.size())
    throw std::invalid_argument(std::string(who) + ": value/couple size mismatch");
}

// Pointwise-split objective (sum th^q a)^{e0} + t (sum (1-th)^q b)^{e1} with
// a_i = |f_i|^q mu_i and b_i = a_i w_i^q; zero values are dropped up front,
// so all retained a_i, b_i are positive.
struct SplitProblem {
  std::vector<double> a, b;
  double t = 1.0, q = 2.0, e0 = 1.0, e1 = 1.0;

  double value(double S0, double S1) const {
    return powe(S0, e0) + t * powe(S1, e1);
  }
};

SplitProblem build_problem(double t, const std::vector<double>& f,
                           const WeightedCouple& c, double e0, double e1) {
  SplitProblem P;
  P.t = t;
  P.q = c.q;
  P.e0 = e0;
  P.e1 = e1;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double m = std::abs(f[i]);
    if (!(m > 0.0)) continue;
    const double a = std::pow(m, c.q) * c.measure[i];
    P.a.push_back(a);
    P.b.push_back(a * std::pow(c.weight[i], c.q));
  }
  return P;
}

// d/dth of (S0)^{e0} where S0 includes the th^q * a term; the S0 = 0 branch
// is the one-sided limit at th = 0 (finite exactly when q*e0 >= 1).
double dterm0(const SplitProblem& P, double th, double a, double S0) {
  if (a == 0.0) return 0.0;
  if (S0 <= 0.0) {
    if (P.q * P.e0 > 1.0) return 0.0;
    return powe(a, P.e0);
  }
  return P.e0 * std::pow(S0, P.e0 - 1.0) * P.q * std::pow(th, P.q - 1.0) * a;
}

double dterm1(const SplitProblem& P, double th, double b, double S1) {
  if (b == 0.0) return 0.0;
  if (S1 <= 0.0) {
    if (P.q * P.e1 > 1.0) return 0.0;
    return powe(b, P.e1);
  }
  return P.e1 * std::pow(S1, P.e1 - 1.0) * P.q * std::pow(1.0 - th, P.q - 1.0) * b;
}

double projected_gradient(const SplitProblem& P, const std::vector<double>& th,
                          double S0, double S1) {
  double worst = 0.0;
  for (std::size_t i = 0; i < th.size(); ++i) {
    const double g =
        dterm0(P, th[i], P.a[i], S0) - P.t * dterm1(P, th[i], P.b[i], S1);
    double pg = g;
    if (th[i] <= 0.0)
      pg = std::min(g, 0.0);
    else if (th[i] >= 1.0)
      pg = std::max(g, 0.0);
    worst = std::max(worst, std::abs(pg));
  }
  return worst;
}

// Exact no-descent test at a corner split (ones: every fraction at 1, the
// complementary sum vanished; otherwise the mirror corner). The coordinate
// gradient is blind there when the vanished sum enters at exponent one:
// every axis slope can point uphill while a diagonal still descends, and
// descent iterates can stall in a cloud of near-corner splits that never
// collapses, since each coordinate would reach the corner only if the others
// were already there. Comparing the sharpest linear decrease of the smooth
// term against the one-sided l^q growth of the kinked term over all
// directions is a Holder dual-norm inequality, so the corner has a closed
// optimality test.
bool corner_stationary(const SplitProblem& P, bool ones) {
  const std::vector<double>& sm = ones ? P.a : P.b;
  const std::vector<double>& kn = ones ? P.b : P.a;
  const double e_sm = ones ? P.e0 : P.e1;
  const double e_kn = ones ? P.e1 : P.e0;
  const double c_sm = ones ? 1.0 : P.t;
  const double c_kn = ones ? P.t : 1.0;
  if (std::abs(P.q * e_kn - 1.0) > 1e-12) return false;
  const double S = std::accumulate(sm.begin(), sm.end(), 0.0);
  if (S <= 0.0) return true;
  double dual = 0.0;
  if (P.q == 1.0) {
    for (std::size_t i = 0; i < sm.size(); ++i)
      dual = std::max(dual, sm[i] / kn[i]);
  } else {
    const double qp = P.q / (P.q - 1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < sm.size(); ++i)
      acc += std::pow(sm[i] / std::pow(kn[i], 1.0 / P.q), qp);
    dual = std::pow(acc, 1.0 / qp);
  }
  if (!std::isfinite(dual)) return false;
  return c_sm * e_sm * P.q * std::pow(S, e_sm - 1.0) * dual <=
         c_kn * (1.0 + 1e-12);
}

// Scalar convex minimization on [0,1] by bisecting the sign of the
// derivative; psi is convex so dpsi is nondecreasing, and working on the
// derivative sidesteps the sqrt(eps) localization floor a value-comparison
// search hits at a smooth interior minimum. A strict sign change pins an
// interior root that beats both bounds, so no value comparisons are needed;
// bound minima come out exactly 0 or 1 and leave no residue in the
// complementary sum. Roots crowding a bound get a geometric refinement pass
// so they are located to full relative precision.
template <class D>
double line_search(D&& dpsi) {
  if (dpsi(0.0) >= 0.0) return 0.0;
  if (dpsi(1.0) <= 0.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dpsi(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  if (lo == 0.0) {
    // Root below 2^-64: bisect its exponent instead.
    double e_lo = -1080.0, e_hi = std::log2(hi);
    for (int it = 0; it < 64; ++it) {
      const double mid = 0.5 * (e_lo + e_hi);
      if (dpsi(std::exp2(mid)) < 0.0)
        e_lo = mid;
      else
        e_hi = mid;
    }
    const double x = std::exp2(0.5 * (e_lo + e_hi));
    return x > 0.0 ? x : 0.0;
  }
  if (hi == 1.0) {
    double e_lo = -1080.0, e_hi = std::log2(1.0 - lo);
    for (int it = 0; it < 64; ++it) {
      const double mid = 0.5 * (e_lo + e_hi);
      if (dpsi(1.0 - std::exp2(mid)) < 0.0)
        e_hi = mid;
      else
        e_lo = mid;
    }
    const double y = std::exp2(0.5 * (e_lo + e_hi));
    return y > 0.0 ? 1.0 - y : 1.0;
  }
  return 0.5 * (lo + hi);
}

// Warm start on the split frontier. Every stationary split satisfies
// (th/(1-th))^{q-1} = lam * b_i/a_i for one scalar multiplier lam, and the
// achievable pairs (||phi0||, ||phi1||) form a convex frontier along which
// the objective is unimodal in lam, so a scalar search plus the two corner
// splits lands at the minimizer; the descent then only has to polish it.
std::vector<double> frontier_theta(const SplitProblem& P) {
  const std::size_t m = P.a.size();
  std::vector<double> best(m, 1.0);
  double best_f = powe(std::accumulate(P.a.begin(), P.a.end(), 0.0), P.e0);
  {
    std::vector<double> zero(m, 0.0);
    const double f0 =
        P.t * powe(std::accumulate(P.b.begin(), P.b.end(), 0.0), P.e1);
    if (f0 < best_f) {
      best = zero;
      best_f = f0;
    }
  }

  if (P.q == 1.0) {
    // Frontier is the polyline of threshold splits sorted by a_i/b_i.
    std::vector<std::size_t> ord(m);
    std::iota(ord.begin(), ord.end(), std::size_t{0});
    std::stable_sort(ord.begin(), ord.end(), [&](std::size_t x, std::size_t y) {
      return P.a[x] * P.b[y] < P.a[y] * P.b[x];
    });
    double S0 = 0.0, S1 = std::accumulate(P.b.begin(), P.b.end(), 0.0);
    std::size_t best_k = 0;
    for (std::size_t k = 1; k <= m; ++k) {
      S0 += P.a[ord[k - 1]];
      S1 -= P.b[ord[k - 1]];
      const double f = powe(S0, P.e0) + P.t * powe(std::max(S1, 0.0), P.e1);
      if (f < best_f) {
        best_f = f;
        best_k = k;
      }
    }
    if (best_k > 0) {
      best.assign(m, 0.0);
      for (std::size_t k = 0; k < best_k; ++k) best[ord[k]] = 1.0;
    }
    return best;
  }

  const double inv = 1.0 / (P.q - 1.0);
  std::vector<double> lr(m);  // log(b_i / a_i)
  double lr_lo = std::numeric_limits<double>::infinity(), lr_hi = -lr_lo;
  for (std::size_t i = 0; i < m; ++i) {
    lr[i] = std::log(P.b[i] / P.a[i]);
    lr_lo = std::min(lr_lo, lr[i]);
    lr_hi = std::max(lr_hi, lr[i]);
  }
  std::vector<double> th(m);
  const auto at = [&](double llam) {
    double S0 = 0.0, S1 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double L = (llam + lr[i]) * inv;
      if (L > 40.0) {
        // rho/(1+rho) rounds to 1 beyond e^40; keep the split exact there.
        th[i] = 1.0;
        S0 += P.a[i];
      } else {
        const double rho = std::exp(L);  // underflow to 0 is the right limit
        const double om = 1.0 / (1.0 + rho);
        th[i] = rho * om;
        if (th[i] > 0.0) S0 += std::pow(th[i], P.q) * P.a[i];
        S1 += std::pow(om, P.q) * P.b[i];
      }
    }
    return P.value(S0, S1);
  };
  // Away from every per-point balance multiplier the curve value is flat to
  // machine precision, and a plain golden section can tie-break itself out
  // of the active window. A coarse scan at a spacing below the transition
  // width q-1 pins the dip first; golden section then only polishes the
  // bracketing neighborhood, which holds no plateau.
  const double pad = 40.0 * std::max(P.q - 1.0, 1.0);
  const double b_lo = -lr_hi - pad, b_hi = -lr_lo + pad;
  const double spacing =
      std::max(0.35 * (P.q - 1.0), (b_hi - b_lo) / 4096.0);
  const int n = std::max(3, static_cast<int>((b_hi - b_lo) / spacing) + 2);
  const auto node = [&](int k) {
    return b_lo + (b_hi - b_lo) * (static_cast<double>(k) / (n - 1));
  };
  int k_best = 0;
  double f_best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double f = at(node(k));
    if (f < f_best) {
      f_best = f;
      k_best = k;
    }
  }
  double lo = node(std::max(0, k_best - 1));
  double hi = node(std::min(n - 1, k_best + 1));
  constexpr double gr = 0.6180339887498949;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = at(x1), f2 = at(x2);
  for (int it = 0; it < 120; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = at(x2);
    }
  }
  double cand = at(0.5 * (lo + hi));
  if (f_best < cand) cand = at(node(k_best));
  if (cand < best_f) best = th;
  return best;
}

double coordinate_descent(const SplitProblem& P) {
  const std::size_t m = P.a.size();
  std::vector<double> th = frontier_theta(P), ca(m), cb(m);
  for (std::size_t i = 0; i < m; ++i) {
    ca[i] = std::pow(th[i], P.q) * P.a[i];
    cb[i] = std::pow(1.0 - th[i], P.q) * P.b[i];
  }
  const double Fc1 =
      powe(std::accumulate(P.a.begin(), P.a.end(), 0.0), P.e0);
  const double Fc0 =
      P.t * powe(std::accumulate(P.b.begin(), P.b.end(), 0.0), P.e1);
  const bool c1s = corner_stationary(P, true);
  const bool c0s = corner_stationary(P, false);
  constexpr int cap = 10000;
  double F = 0.0, gap = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < cap; ++sweep) {
    double S0 = std::accumulate(ca.begin(), ca.end(), 0.0);
    double S1 = std::accumulate(cb.begin(), cb.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double A = std::max(0.0, S0 - ca[i]);
      const double B = std::max(0.0, S1 - cb[i]);
      const double ai = P.a[i], bi = P.b[i];
      const auto dpsi = [&](double x) {
        return dterm0(P, x, ai, A + std::pow(x, P.q) * ai) -
               P.t * dterm1(P, x, bi, B + std::pow(1.0 - x, P.q) * bi);
      };
      th[i] = line_search(dpsi);
      ca[i] = std::pow(th[i], P.q) * ai;
      cb[i] = std::pow(1.0 - th[i], P.q) * bi;
      S0 = A + ca[i];
      S1 = B + cb[i];
    }
    S0 = std::accumulate(ca.begin(), ca.end(), 0.0);
    S1 = std::accumulate(cb.begin(), cb.end(), 0.0);
    F = P.value(S0, S1);
    gap = projected_gradient(P, th, S0, S1);
    if (gap <= 1e-10 * (1.0 + F)) return F;
    // Collapse a near-corner dust cloud: snapping is a legal descent step
    // when the corner value does not exceed the current one beyond roundoff,
    // and the closed-form test certifies the corner it lands on.
    const double slack = 1e-13 * (1.0 + std::abs(F));
    if (c1s && Fc1 <= F + slack) return Fc1;
    if (c0s && Fc0 <= F + slack) return Fc0;
  }
  throw SolveError("split solver hit the sweep cap; best value " +
                       std::to_string(F) + ", projected gradient " +
                       std::to_string(gap),
                   F, gap);
}

double brute_min(const SplitProblem& P) {
  const std::size_t m = P.a.size();
  if (m == 0) return 0.0;
  if (m > 8)
    throw std::invalid_argument("k_functional: brute force limited to 8 points");
  constexpr int G = 101;
  std::vector<std::array<double, G>> ta(m), tb(m);
  for (std::size_t i = 0; i < m; ++i)
    for (int g = 0; g < G; ++g) {
      const double x = g / 100.0;
      ta[i][g] = std::pow(x, P.q) * P.a[i];
      tb[i][g] = std::pow(1.0 - x, P.q) * P.b[i];
    }

  if (P.e0 == 1.0 && P.e1 == 1.0) {
    // separable objective: exhaust each coordinate independently
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int g = 0; g < G; ++g)
        best = std::min(best, ta[i][g] + P.t * tb[i][g]);
      total += best;
    }
    return total;
  }

  if (P.e0 <= 1.0 && P.e1 <= 1.0) {
    // The objective is concave and increasing in the pair of partial sums,
    // so the grid minimum sits at a vertex of the convex hull of achievable
    // (S0, S1) pairs. Each coordinate's 101 choices trace a convex chain,
    // and iterating Minkowski sum + lower-hull pruning keeps the vertex
    // set linear in m while discarding only points that can never win.
    std::vector<std::pair<double, double>> hull{{0.0, 0.0}};
    std::vector<std::pair<double, double>> cand;
    for (std::size_t i = 0; i < m; ++i) {
      cand.clear();
      cand.reserve(hull.size() * G);
      for (const auto& h : hull)
        for (int g = 0; g < G; ++g)
          cand.emplace_back(h.first + ta[i][g], h.second + tb[i][g]);
      std::sort(cand.begin(), cand.end());
      hull.clear();
      for (const auto& p : cand) {
        // sorted by S0, so p is dominated unless it strictly lowers S1
        if (!hull.empty() && hull.back().second <= p.second) continue;
        while (hull.size() >= 2) {
          const auto& r = hull[hull.size() - 1];
          const auto& l = hull[hull.size() - 2];
          const double cross = (r.first - l.first) * (p.second - l.second) -
                               (p.first - l.first) * (r.second - l.second);
          if (cross < 0.0)
            hull.pop_back();
          else
            break;
        }
        hull.push_back(p);
      }
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& h : hull) best = std::min(best, P.value(h.first, h.second));
    return best;
  }

  const auto eval = [&](const std::vector<int>& gs) {
    double S0 = 0.0, S1 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      S0 += ta[i][gs[i]];
      S1 += tb[i][gs[i]];
    }
    return P.value(S0, S1);
  };
  double best = std::numeric_limits<double>::infinity();
  {
    std::vector<int> gs(m, 0);
    best = std::min(best, eval(gs));
    gs.assign(m, 100);
    best = std::min(best, eval(gs));
    for (std::size_t i = 0; i < m; ++i)
      gs[i] = (P.a[i] <= P.t * P.b[i]) ? 100 : 0;
    best = std::min(best, eval(gs));
  }

  std::vector<std::size_t> ord(m);
  std::iota(ord.begin(), ord.end(), std::size_t{0});
  std::stable_sort(ord.begin(), ord.end(), [&](std::size_t x, std::size_t y) {
    return P.a[x] + P.t * P.b[x] > P.a[y] + P.t * P.b[y];
  });

  // Exhaustive search over the grid; partial sums only grow, so a partial
  // value at or above the incumbent prunes the whole branch safely.
  const auto dfs = [&](auto&& self, std::size_t level, double SA,
                       double SB) -> void {
    const double bound = P.value(SA, SB);
    if (bound >= best) return;
    if (level == m) {
      best = bound;
      return;
    }
    const auto i = ord[level];
    for (int g = 0; g < G; ++g) self(self, level + 1, SA + ta[i][g], SB + tb[i][g]);
  };
  dfs(dfs, 0, 0.0, 0.0);
  return best;
}

}  // namespace

double couple_norm0(const WeightedCouple& c, const std::vector<double>& f) {
  validate(c);
  check_sizes(c, f, "couple_norm0");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double m = std::abs(f[i]);
    if (m > 0.0) acc += std::pow(m, c.q) * c.measure[i];
  }
  return powe(acc, 1.0 / c.q);
}

double couple_norm1(const WeightedCouple& c, const std::vector<double>& f) {
  validate(c);
  check_sizes(c, f, "couple_norm1");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double m = std::abs(f[i]) * c.weight[i];
    if (m > 0.0) acc += std::pow(m, c.q) * c.measure[i];
  }
  return powe(acc, 1.0 / c.q);
}

double k_functional(double t, const std::vector<double>& f,
                    const WeightedCouple& c, KMethod method) {
  validate(c);
  check_sizes(c, f, "k_functional");
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::invalid_argument("k_functional: t must be positive and finite");

  if (method == KMethod::split_formula) {
    double S0 = 0.0, S1 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double m = std::abs(f[i]);
      if (!(m > 0.0)) continue;
      // Each point goes to the side where a unit of |f| is cheaper: the
      // weighted side costs t*w per unit, the plain side costs 1.  This is
      // what keeps the split within twice the infimum.
      if (t * c.weight[i] <= 1.0)
        S1 += std::pow(m * c.weight[i], c.q) * c.measure[i];
      else
        S0 += std::pow(m, c.q) * c.measure[i];
    }
    return powe(S0, 1.0 / c.q) + t * powe(S1, 1.0 / c.q);
  }

  const SplitProblem P = build_problem(t, f, c, 1.0 / c.q, 1.0 / c.q);
  if (P.a.empty()) return 0.0;
  if (method == KMethod::brute_force) return brute_min(P);
  if (c.q < 1.0)
    throw std::invalid_argument("k_functional: convex solve requires q >= 1");
  return coordinate_descent(P);
}

double k_functional_powered(double t, const std::vector<double>& f,
                            const WeightedCouple& c, double p0, double p1) {
  validate(c);
  check_sizes(c, f, "k_functional_powered");
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::invalid_argument("k_functional_powered: t must be positive and finite");
  if (!(p0 > 0.0) || !std::isfinite(p0) || !(p1 > 0.0) || !std::isfinite(p1))
    throw std::invalid_argument("k_functional_powered: powers must be positive and finite");
  const SplitProblem P = build_problem(t, f, c, p0 / c.q, p1 / c.q);
  if (P.a.empty()) return 0.0;
  if (c.q >= 1.0 && p0 >= 1.0 && p1 >= 1.0) return coordinate_descent(P);
  return brute_min(P);
}

KCurve k_curve(const std::vector<double>& f, const WeightedCouple& c,
               int samples, KMethod method) {
  validate(c);
  check_sizes(c, f, "k_curve");
  if (samples < 2) throw std::invalid_argument("k_curve: need at least 2 samples");
  KCurve out;
  out.method = method;
  const double n0 = couple_norm0(c, f);
  const double n1 = couple_norm1(c, f);
  const double center = (n0 > 0.0 && n1 > 0.0) ? n0 / n1 : 1.0;
  const double span = 256.0;
  const double ratio = std::pow(span * span, 1.0 / (samples - 1));
  for (int i = 0; i < samples; ++i) {
    const double ti = (center / span) * std::pow(ratio, i);
    out.t.push_back(ti);
    out.K.push_back(n0 > 0.0 ? k_functional(ti, f, c, method) : 0.0);
  }
  return out;
}

GilbertReport gilbert_norms(const std::vector<double>& f,
                            const WeightedCouple& c, double theta, double p,
                            double r, int pts_per_octave) {
  validate(c);
  check_sizes(c, f, "gilbert_norms");
  if (!(theta > 0.0) || !(theta < 1.0))
    throw std::invalid_argument("gilbert_norms: theta must lie in (0,1)");
  if (!(p > 0.0) || !std::isfinite(p))
    throw std::invalid_argument("gilbert_norms: p must be positive and finite");
  if (!(r > 1.0) || !std::isfinite(r))
    throw std::invalid_argument("gilbert_norms: r must exceed 1");
  if (pts_per_octave < 1)
    throw std::invalid_argument("gilbert_norms: need at least 1 point per octave");

  GilbertReport out;
  std::vector<std::size_t> sup;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (std::abs(f[i]) > 0.0) sup.push_back(i);
  if (sup.empty()) return out;

  double wmin = std::numeric_limits<double>::infinity(), wmax = 0.0;
  for (const auto i : sup) {
    wmin = std::min(wmin, c.weight[i]);
    wmax = std::max(wmax, c.weight[i]);
  }
  out.degenerate_weight = (wmin == wmax);

  // Band k holds the weights in (r^-k, r^-k+1]; k = floor(-log_r w) + 1
  // places boundary weights in the upper band exactly.
  const double lr = std::log2(r);
  std::map<long long, double> band;
  for (const auto i : sup) {
    const auto k =
        static_cast<long long>(std::floor(-std::log2(c.weight[i]) / lr)) + 1;
    band[k] += std::pow(std::abs(f[i]), c.q) * c.measure[i];
  }
  double acc = 0.0;
  for (const auto& [k, sum] : band)
    acc += std::pow(
        std::pow(r, -static_cast<double>(k) * theta) * powe(sum, 1.0 / c.q), p);
  out.disc = std::pow(acc, 1.0 / p);
  out.bands = static_cast<std::int64_t>(band.size());

  // Sorted weights with prefix sums; the threshold 1/s sweeps down as s
  // sweeps up, so one pointer serves all samples.
  std::vector<std::size_t> ord = sup;
  std::stable_sort(ord.begin(), ord.end(), [&](std::size_t x, std::size_t y) {
    return c.weight[x] < c.weight[y];
  });
  const std::size_t M = ord.size();
  std::vector<double> prefA(M), prefB(M);
  for (std::size_t i = 0; i < M; ++i) {
    const auto j = ord[i];
    const double aq = std::pow(std::abs(f[j]), c.q) * c.measure[j];
    prefA[i] = (i ? prefA[i - 1] : 0.0) + aq;
    prefB[i] = (i ? prefB[i - 1] : 0.0) + aq * std::pow(c.weight[j], c.q);
  }
  const double Afull = prefA.back(), Bfull = prefB.back();

  const double pad = r * r * r * r;
  const double s_lo = 1.0 / (wmax * pad);
  const double s_hi = pad / wmin;
  const double step = std::pow(2.0, 1.0 / pts_per_octave);
  const double lw = std::log(step);
  const auto nsteps = static_cast<std::int64_t>(
      std::ceil(std::log(s_hi / s_lo) / lw));

  // Outside the sampled range the indicator sets are constant (full or
  // empty), so those tails integrate in closed form.
  double acc2 = std::pow(s_lo, (1.0 - theta) * p) * std::pow(Bfull, p / c.q) /
                ((1.0 - theta) * p);
  double acc3 =
      std::pow(s_hi, -theta * p) * std::pow(Afull, p / c.q) / (theta * p);
  std::size_t idx = M;
  for (std::int64_t i = 0; i < nsteps; ++i) {
    const double s = s_lo * std::pow(step, static_cast<double>(i) + 0.5);
    const double tau = 1.0 / s;
    while (idx > 0 && c.weight[ord[idx - 1]] > tau) --idx;
    const double B = idx > 0 ? prefB[idx - 1] : 0.0;
    const double A = Afull - (idx > 0 ? prefA[idx - 1] : 0.0);
    if (B > 0.0)
      acc2 += std::pow(std::pow(s, 1.0 - theta) * std::pow(B, 1.0 / c.q), p) * lw;
    if (A > 0.0)
      acc3 += std::pow(std::pow(s, -theta) * std::pow(A, 1.0 / c.q), p) * lw;
  }
  out.cont2 = std::pow(acc2, 1.0 / p);
  out.cont3 = std::pow(acc3, 1.0 / p);
  return out;
}

namespace {

struct InterpSetup {
  double p0, p1, q, s0, s1, theta;  // canonicalized so s1 > s0
  double pt, st, delta;
};

InterpSetup canonicalize(double p0, double p1, double q, double s0, double s1,
                         double theta) {
  if (!(p0 > 0.0) || !std::isfinite(p0) || !(p1 > 0.0) || !std::isfinite(p1))
    throw std::invalid_argument("tent interpolation: p0, p1 must be positive and finite");
  if (!(q > 0.0) || !std::isfinite(q))
    throw std::invalid_argument("tent interpolation: q must be positive and finite");
  if (!(theta > 0.0) || !(theta < 1.0))
    throw std::invalid_argument("tent interpolation: theta must lie in (0,1)");
  if (!std::isfinite(s0) || !std::isfinite(s1) || s0 == s1)
    throw std::invalid_argument("tent interpolation: need s0 != s1");
  InterpSetup st;
  st.p0 = p0;
  st.p1 = p1;
  st.q = q;
  st.s0 = s0;
  st.s1 = s1;
  st.theta = theta;
  if (s1 < s0) {
    // (A0, A1)_theta = (A1, A0)_{1-theta}: swap the endpoint spaces
    std::swap(st.p0, st.p1);
    std::swap(st.s0, st.s1);
    st.theta = 1.0 - st.theta;
  }
  st.pt = interp_exponent(p0, p1, theta);
  st.st = interp_weight_exponent(s0, s1, theta);
  st.delta = st.s1 - st.s0;
  return st;
}

GridFunction apply_tpower(const GridFunction& f, int dim, double s) {
  return t_multiply(f, -dim * s);
}

}  // namespace

TentInterpReport tent_interp_norms(const GridFunction& f, double p0, double p1,
                                   double q, double s0, double s1, double theta,
                                   double r, WeightMode wm, Mode mode) {
  const InterpSetup su = canonicalize(p0, p1, q, s0, s1, theta);
  if (!(r > 1.0) || !std::isfinite(r))
    throw std::invalid_argument("tent_interp_norms: r must exceed 1");

  const auto& tl = f.grid->levels();
  const int dim = f.grid->space().dim;
  const int J = tl.count;
  const double pt = su.pt;

  TentInterpReport out;
  out.p_theta = pt;
  out.s_theta = su.st;

  const auto tnorm = [&](const GridFunction& g, double s_) {
    if (wm == WeightMode::volume)
      return tent_norm(g, NormParams{.p = pt, .q = su.q, .s = s_}, mode);
    return tent_norm(apply_tpower(g, dim, s_),
                     NormParams{.p = pt, .q = su.q, .s = 0.0}, mode);
  };

  // Upper truncations: constant between consecutive levels, so the
  // tau-integral is a finite sum of exact power integrals.
  {
    const double e = dim * su.delta * (1.0 - su.theta) * pt;
    double acc = 0.0;
    for (int j = 0; j < J; ++j) {
      const double N = tnorm(band_truncate(f, tl.t[j], kInf), su.s1);
      if (!(N > 0.0)) continue;
      const double hi = std::pow(tl.t[j], e);
      const double lo = j == 0 ? 0.0 : std::pow(tl.t[j - 1], e);
      acc += std::pow(N, pt) * (hi - lo) / e;
    }
    out.infty_norm = std::pow(acc, 1.0 / pt);
  }

  // Lower truncations: same piecewise structure with a decaying power.
  {
    const double e = dim * su.delta * su.theta * pt;
    double acc = 0.0;
    for (int j = 1; j < J; ++j) {
      const double M = tnorm(band_truncate(f, 0.0, tl.t[j]), su.s0);
      if (!(M > 0.0)) continue;
      acc += std::pow(M, pt) *
             (std::pow(tl.t[j - 1], -e) - std::pow(tl.t[j], -e)) / e;
    }
    const double Mfull = tnorm(f, su.s0);
    if (Mfull > 0.0)
      acc += std::pow(Mfull, pt) * std::pow(tl.t[J - 1], -e) / e;
    out.zero_norm = std::pow(acc, 1.0 / pt);
  }

  // Band sum over [r^(k-1), r^k) with factor r^(-n k theta (s1-s0)).
  {
    const double lr = std::log2(r);
    const int k_lo =
        static_cast<int>(std::floor(std::log2(tl.t[0]) / lr)) - 1;
    const int k_hi =
        static_cast<int>(std::floor(std::log2(tl.t[J - 1]) / lr)) + 2;
    double acc = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) {
      const double lo = std::pow(r, k - 1);
      const double hi = std::pow(r, k);
      const auto it = std::lower_bound(tl.t.begin(), tl.t.end(), lo);
      if (it == tl.t.end() || *it >= hi) continue;
      const double N = tnorm(band_truncate(f, lo, hi), su.s0);
      ++out.seq_bands;
      if (!(N > 0.0)) continue;
      acc += std::pow(
          std::pow(r, -static_cast<double>(dim * k) * su.theta * su.delta) * N,
          pt);
    }
    out.seq_norm = std::pow(acc, 1.0 / pt);
  }

  if (out.zero_norm > 0.0) out.ratio_infty_zero = out.infty_norm / out.zero_norm;
  if (out.seq_norm > 0.0) {
    out.ratio_infty_seq = out.infty_norm / out.seq_norm;
    out.ratio_zero_seq = out.zero_norm / out.seq_norm;
  }
  return out;
}

TZReport t_z_equivalence(const GridFunction& f, double p0, double p1, double q,
                         double s0, double s1, double theta, double c0,
                         double c1, WeightMode wm, Mode mode) {
  const InterpSetup su = canonicalize(p0, p1, q, s0, s1, theta);
  if (!(c0 > 0.0) || !std::isfinite(c0) || !(c1 > 1.0) || !std::isfinite(c1))
    throw std::invalid_argument("t_z_equivalence: need c0 > 0 and c1 > 1");

  const auto& tl = f.grid->levels();
  const int dim = f.grid->space().dim;
  const int J = tl.count;
  const double pt = su.pt;
  const double aperture = c0 / c1;

  TZReport out;
  out.p_theta = pt;
  out.s_theta = su.st;

  const auto tnorm = [&](const GridFunction& g, double s_) {
    if (wm == WeightMode::volume)
      return tent_norm(
          g, NormParams{.p = pt, .q = su.q, .s = s_, .aperture = aperture},
          mode);
    return tent_norm(
        apply_tpower(g, dim, s_),
        NormParams{.p = pt, .q = su.q, .s = 0.0, .aperture = aperture}, mode);
  };

  const double lr = std::log2(c1);
  const int k_lo = static_cast<int>(std::floor(std::log2(tl.t[0]) / lr)) - 1;
  const int k_hi =
      static_cast<int>(std::floor(std::log2(tl.t[J - 1]) / lr)) + 2;
  double acc = 0.0;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double lo = std::pow(c1, k - 1);
    const double hi = std::pow(c1, k);
    const auto it = std::lower_bound(tl.t.begin(), tl.t.end(), lo);
    if (it == tl.t.end() || *it >= hi) continue;
    const double N = tnorm(band_truncate(f, lo, hi), su.s0);
    ++out.seq_bands;
    if (!(N > 0.0)) continue;
    acc += std::pow(
        std::pow(c1, -static_cast<double>(dim * k) * su.theta * su.delta) * N,
        pt);
  }
  out.seq_norm = std::pow(acc, 1.0 / pt);

  if (wm == WeightMode::volume)
    out.z = z_norm(f, pt, su.q, su.st, c0, c1, mode);
  else
    out.z = z_norm(apply_tpower(f, dim, su.st), pt, su.q, 0.0, c0, c1, mode);

  if (out.seq_norm > 0.0 && out.z > 0.0) {
    out.ratio = out.seq_norm / out.z;
    out.defined = true;
  }
  return out;
}

ConeRestriction cone_restriction(const GridFunction& f, std::int64_t x,
                                 double q, double s0, double s1,
                                 double aperture) {
  if (!(q > 0.0) || !std::isfinite(q))
    throw std::invalid_argument("cone_restriction: q must be positive and finite");
  if (!std::isfinite(s0) || !std::isfinite(s1))
    throw std::invalid_argument("cone_restriction: weight exponents must be finite");
  const auto& grid = *f.grid;
  const Region cone =
      cone_region(grid.space(), grid.levels(), x, aperture);
  const auto& V = grid.volume_table();
  const double cw = grid.cell_weight();

  ConeRestriction out;
  out.couple.q = q;
  out.cells = cone.cells;
  for (const auto c : cone.cells) {
    out.couple.measure.push_back(cw * std::pow(V[c], -q * s0 - 1.0));
    out.couple.weight.push_back(std::pow(V[c], -(s1 - s0)));
    out.values.push_back(std::sqrt(f.abs2(c)));
  }
  return out;
}

}  // namespace tslab
