#include "tslab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "tslab/exponents.hpp"
#include "tslab/util.hpp"

namespace tslab {

namespace {

double rel_err(double a, double b) {
  double m = std::max(std::abs(a), std::abs(b));
  return m == 0.0 ? 0.0 : std::abs(a - b) / m;
}

std::string fmt_params(const char* fmt, double a, double b = 0, double c = 0,
                       double d = 0, double e = 0, double f = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b, c, d, e, f);
  return buf;
}

double over(double p, double M) { return std::isinf(p) ? kInf : p / M; }

}  // namespace

void RatioReport::finalize() {
  ratio.clear();
  excluded_zero = 0;
  for (std::size_t i = 0; i < denominator.size(); ++i) {
    if (denominator[i] > 0.0)
      ratio.push_back(numerator[i] / denominator[i]);
    else
      ++excluded_zero;
  }
  if (ratio.empty()) {
    min_ratio = median_ratio = max_ratio = 0.0;
    return;
  }
  std::vector<double> sorted = ratio;
  std::sort(sorted.begin(), sorted.end());
  min_ratio = sorted.front();
  max_ratio = sorted.back();
  std::size_t n = sorted.size();
  median_ratio = (n % 2 == 1) ? sorted[n / 2]
                              : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

bool refinement_check(RatioReport& base, const RatioReport& refined,
                      double factor) {
  if (!(factor >= 1.0))
    throw ConfigError("refinement_check: factor must be >= 1");
  bool ok;
  if (base.max_ratio == 0.0 && refined.max_ratio == 0.0) {
    ok = true;
  } else if (base.max_ratio <= 0.0 || refined.max_ratio <= 0.0) {
    ok = false;
  } else {
    double r = refined.max_ratio / base.max_ratio;
    ok = r <= factor && r >= 1.0 / factor;
  }
  base.refinement_stable = ok;
  return ok;
}

RatioReport hls_suite(const std::vector<GridFunction>& corpus, double p0,
                      double p1, double q, double s0, double s1, double alpha,
                      Mode mode) {
  if (corpus.empty()) throw ConfigError("hls_suite: empty corpus");
  if (!(p0 > 0.0) || !(p1 > 0.0) || !(p0 < p1))
    throw ConfigError("hls_suite: need 0 < p0 < p1");
  const double tol = 1e-12;
  if (alpha != 0.0) {
    if (!std::isinf(p1))
      throw ConfigError("hls_suite: the alpha variant needs p1 = inf");
    if (!(alpha > 0.0))
      throw ConfigError("hls_suite: the alpha variant needs alpha > 0");
    if (!(q > 1.0) || std::isinf(q))
      throw ConfigError("hls_suite: the alpha variant needs q in (1, inf)");
    if (std::abs((s1 + alpha) - s0 - delta_exponent(p0, p1)) > tol)
      throw ConfigError(
          "hls_suite: exponents must satisfy (s1 + alpha) - s0 = delta(p0, "
          "inf) = -1/p0");
  } else if (std::abs((s1 - s0) - delta_exponent(p0, p1)) > tol) {
    throw ConfigError(
        "hls_suite: exponents must satisfy s1 - s0 = delta(p0, p1) = 1/p1 - "
        "1/p0");
  }
  if (!(s0 > s1)) throw ConfigError("hls_suite: need s0 > s1");

  NormParams num_p{.p = p1, .q = q, .s = s1, .alpha = alpha, .aperture = 1.0};
  NormParams den_p{.p = p0, .q = q, .s = s0, .alpha = 0.0, .aperture = 1.0};
  validate(num_p);
  validate(den_p);

  RatioReport rep;
  rep.suite = "hls";
  rep.params = fmt_params("p0=%g p1=%g q=%g s0=%g s1=%g alpha=%g", p0, p1, q,
                          s0, s1, alpha);
  for (const auto& f : corpus) {
    check_same_grid(f, corpus.front(), "hls_suite");
    rep.numerator.push_back(tent_norm(f, num_p, mode));
    rep.denominator.push_back(tent_norm(f, den_p, mode));
  }
  rep.finalize();
  return rep;
}

RatioReport duality_suite(const std::vector<GridFunction>& fs,
                          const std::vector<GridFunction>& gs, double p,
                          double q, double s, Mode mode) {
  if (fs.empty() || gs.empty())
    throw ConfigError("duality_suite: empty function list");
  if (!(p >= 1.0) || std::isinf(p))
    throw ConfigError("duality_suite: p must lie in [1, inf)");
  if (!(q > 1.0) || std::isinf(q))
    throw ConfigError("duality_suite: q must lie in (1, inf)");
  const double pc = holder_conjugate(p);
  const double qc = holder_conjugate(q);
  NormParams fp{.p = p, .q = q, .s = s, .alpha = 0.0, .aperture = 1.0};
  NormParams gp{.p = pc, .q = qc, .s = -s, .alpha = 0.0, .aperture = 1.0};

  RatioReport rep;
  rep.suite = "duality";
  rep.params = fmt_params("p=%g q=%g s=%g", p, q, s);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& f = fs[i];
    const auto& g = gs[i % gs.size()];
    check_same_grid(f, g, "duality_suite");
    rep.numerator.push_back(std::abs(pairing(f, g)));
    rep.denominator.push_back(tent_norm(f, fp, mode) * tent_norm(g, gp, mode));
  }
  rep.finalize();
  return rep;
}

AtomDualityReport duality_atom_suite(const std::vector<Atom>& atoms,
                                     const std::vector<GridFunction>& gs,
                                     Mode mode) {
  if (atoms.empty() || gs.empty())
    throw ConfigError("duality_atom_suite: empty atom or function list");
  AtomDualityReport out;
  out.report.suite = "duality-atom";
  out.report.params = fmt_params("atoms=%g", double(atoms.size()));
  double worst = -kInf;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Atom& a = atoms[i];
    if (!(a.p > 0.0) || a.p > 1.0)
      throw ConfigError("duality_atom_suite: atoms must have p in (0, 1]");
    if (!(a.q >= 1.0) || std::isinf(a.q))
      throw ConfigError("duality_atom_suite: atoms must have q in [1, inf)");
    const double qc = holder_conjugate(a.q);
    // The ball-sup display of the q' = inf norm carries mu(B)^-(1+alpha), so
    // closing the exponent chain at mu(B)^0 needs alpha shifted down by one.
    const double alpha =
        std::isinf(qc) ? (1.0 / a.p - 2.0) : (1.0 / a.p - 1.0);
    const GridFunction af = a.to_grid_function();
    const GridFunction& g = gs[i % gs.size()];
    check_same_grid(af, g, "duality_atom_suite");
    std::vector<Ball> witness{a.ball};
    NormParams gp{
        .p = kInf, .q = qc, .s = -a.s, .alpha = alpha, .aperture = 1.0};
    out.report.numerator.push_back(std::abs(pairing(af, g)));
    out.report.denominator.push_back(tent_norm(g, gp, mode, &witness));
  }
  out.report.finalize();
  for (double r : out.report.ratio) worst = std::max(worst, r - 1.0);
  out.max_slack = out.report.ratio.empty() ? 0.0 : worst;
  out.pass = out.max_slack <= 1e-9;
  return out;
}

ConjugatePairing conjugate_pair_check(const GridFunction& f, double s,
                                      Mode mode) {
  GridFunction g = v_multiply(f, -2.0 * s);
  ConjugatePairing out;
  out.lhs = std::abs(pairing(f, g));
  NormParams fp{.p = 2.0, .q = 2.0, .s = s, .alpha = 0.0, .aperture = 1.0};
  NormParams gp{.p = 2.0, .q = 2.0, .s = -s, .alpha = 0.0, .aperture = 1.0};
  out.rhs = tent_norm(f, fp, mode) * tent_norm(g, gp, mode);
  return out;
}

GridFunction restrict_to(const GridFunction& f, const Region& region) {
  GridFunction out = GridFunction::zeros(f.grid);
  if (f.is_complex()) out.ensure_complex();
  for (std::int64_t c : region.cells) {
    out.re[c] = f.re[c];
    if (f.is_complex()) out.im[c] = f.im[c];
  }
  return out;
}

RatioReport zt_suite(const std::vector<GridFunction>& corpus, double p,
                     double q, double s, double c0, double c1, Mode mode) {
  if (corpus.empty()) throw ConfigError("zt_suite: empty corpus");
  if (!(p > 0.0) || !(q > 0.0) || !(p <= q))
    throw ConfigError("zt_suite: need 0 < p <= q");
  NormParams tp{.p = p, .q = q, .s = s, .alpha = 0.0, .aperture = 1.0};
  validate(tp);
  RatioReport rep;
  rep.suite = "zt";
  rep.params = fmt_params("p=%g q=%g s=%g c0=%g c1=%g", p, q, s, c0, c1);
  for (const auto& f : corpus) {
    check_same_grid(f, corpus.front(), "zt_suite");
    rep.numerator.push_back(tent_norm(f, tp, mode));
    rep.denominator.push_back(z_norm(f, p, q, s, c0, c1, mode));
  }
  rep.finalize();
  return rep;
}

GridPtr refine_grid(const GridPtr& grid) {
  const SpaceGrid& g = grid->space();
  const TimeLevels& tl = grid->levels();
  std::vector<int> ext(g.extents);
  for (int& e : ext) e = 2 * (e - 1) + 1;
  SpaceGrid g2 = SpaceGrid::make(ext, 0.5 * g.h, g.origin);
  TimeLevels tl2 =
      TimeLevels::make(tl.t_min, 2 * tl.per_octave, 2 * (tl.count - 1) + 1);
  return HalfSpaceGrid::make(g2, tl2);
}

CylinderReport cylinder_suite(const Cylinder& K,
                              const std::vector<GridFunction>& corpus,
                              double p, Mode mode) {
  if (corpus.empty()) throw ConfigError("cylinder_suite: empty corpus");
  if (!(p > 0.0) || std::isinf(p))
    throw ConfigError("cylinder_suite: p must lie in (0, inf)");
  const GridPtr& gp = corpus.front().grid;
  const SpaceGrid& g = gp->space();
  const TimeLevels& tl = gp->levels();
  if (!(K.ball.radius > 0.0))
    throw std::invalid_argument("cylinder_suite: ball radius must be positive");
  if (!(K.t_lo >= 0.0) || !(K.t_lo < K.t_hi))
    throw std::invalid_argument("cylinder_suite: need 0 <= t_lo < t_hi");
  if (K.t_hi > tl.t_max() * (1.0 + 1e-12))
    throw std::invalid_argument(
        "cylinder_suite: time window clipped by the grid");
  int c[3];
  g.unflatten(K.ball.center, c);
  const double rh = K.ball.radius / g.h;
  for (int a = 0; a < g.dim; ++a) {
    if (c[a] - rh < 0.0 || c[a] + rh > double(g.extents[a] - 1))
      throw std::invalid_argument("cylinder_suite: ball clipped by the grid");
  }
  Region reg = cylinder_region(g, tl, K.ball, K.t_lo, K.t_hi);
  if (reg.cells.empty())
    throw std::invalid_argument(
        "cylinder_suite: no grid cells inside the cylinder");

  const int J = tl.count;
  const auto& vol = gp->volume_table();
  double vmin = kInf;
  std::vector<char> hit(g.num_points(), 0);
  for (std::int64_t cell : reg.cells) {
    vmin = std::min(vmin, vol[cell]);
    std::int64_t y = cell / J;
    int j = int(cell % J);
    for (std::int64_t x : ball_points(g, y, tl.t[j])) hit[x] = 1;
  }
  CylinderReport rep;
  for (char hx : hit) rep.hit_count += hx;
  rep.hit_constant =
      std::pow(double(rep.hit_count) * g.point_measure(), 1.0 / p);
  rep.upper_constant = std::pow(
      ball_volume(g, K.ball.center, K.ball.radius + K.t_hi), 1.0 / p);
  rep.lower_constant = std::pow(vmin, 1.0 / p);

  rep.report.suite = "cylinder";
  rep.report.params = fmt_params("p=%g r=%g t_lo=%g t_hi=%g", p, K.ball.radius,
                                 K.t_lo, K.t_hi);
  NormParams np{.p = p, .q = kInf, .s = 0.0, .alpha = 0.0, .aperture = 1.0};
  const double tol = 1e-12;
  bool ok = rep.hit_constant <= rep.upper_constant * (1.0 + tol);
  for (const auto& f : corpus) {
    check_same_grid(f, corpus.front(), "cylinder_suite");
    GridFunction fr = restrict_to(f, reg);
    double linf = 0.0;
    for (std::int64_t cell : reg.cells)
      linf = std::max(linf, std::sqrt(fr.abs2(cell)));
    double lhs = tent_norm(fr, np, mode);
    rep.report.numerator.push_back(lhs);
    rep.report.denominator.push_back(linf);
    if (linf > 0.0) {
      rep.max_upper_slack =
          std::max(rep.max_upper_slack, lhs - linf * rep.hit_constant);
      rep.min_lower_slack =
          std::min(rep.min_lower_slack, lhs - linf * rep.lower_constant);
    }
  }
  rep.report.finalize();
  rep.pass = ok && rep.max_upper_slack <= tol && rep.min_lower_slack >= -tol;
  return rep;
}

IdentityReport identity_suite(const std::vector<GridFunction>& corpus,
                              Mode mode) {
  if (corpus.empty()) throw ConfigError("identity_suite: empty corpus");
  IdentityReport rep;

  struct QS {
    double q, s;
  };
  const QS fub[] = {{1.0, 0.5}, {2.0, -0.25}, {7.0 / 3.0, 0.4}};
  struct RPQS {
    double r, p, q, s;
  };
  const RPQS iso[] = {{0.5, 1.5, 2.0, 0.25},
                      {-1.0, kInf, 2.0, -0.5},
                      {2.0, 0.75, 1.0, 0.0}};
  struct PQS {
    double p, q, s;
  };
  const PQS cvx[] = {{2.0, 2.0, 0.5}, {1.0, 2.0, -0.25}, {kInf, kInf, 0.6}};
  const double ms[] = {0.5, 2.0, 3.0};
  const double adj_s[] = {0.5, -1.0};

  const std::size_t n = corpus.size();
  for (std::size_t i = 0; i < n; ++i) {
    const GridFunction& f = corpus[i];
    check_same_grid(f, corpus.front(), "identity_suite");

    for (const auto& t : fub) {
      double a = tent_norm(
          f, NormParams{.p = t.q, .q = t.q, .s = t.s, .alpha = 0.0,
                        .aperture = 1.0},
          mode);
      double b = lq_norm(v_multiply(f, -t.s), t.q);
      rep.fubini_err = std::max(rep.fubini_err, rel_err(a, b));
    }

    for (const auto& t : iso) {
      double a = tent_norm(
          v_multiply(f, t.r),
          NormParams{.p = t.p, .q = t.q, .s = t.s + t.r, .alpha = 0.0,
                     .aperture = 1.0},
          mode);
      double b = tent_norm(
          f, NormParams{.p = t.p, .q = t.q, .s = t.s, .alpha = 0.0,
                        .aperture = 1.0},
          mode);
      rep.isometry_err = std::max(rep.isometry_err, rel_err(a, b));
    }

    for (const auto& t : cvx) {
      double base = tent_norm(
          f, NormParams{.p = t.p, .q = t.q, .s = t.s, .alpha = 0.0,
                        .aperture = 1.0},
          mode);
      for (double M : ms) {
        double lhs = tent_norm(
            power(f, M),
            NormParams{.p = over(t.p, M), .q = over(t.q, M), .s = M * t.s,
                       .alpha = 0.0, .aperture = 1.0},
            mode);
        rep.convex_err =
            std::max(rep.convex_err, rel_err(lhs, std::pow(base, M)));
      }
    }

    const GridFunction& gpair = corpus[(i + 1) % n];
    std::vector<double> fm = f.magnitudes();
    std::vector<double> gm = gpair.magnitudes();
    double dot = 0.0;
    for (std::size_t k = 0; k < fm.size(); ++k) dot += fm[k] * gm[k];
    dot *= f.grid->cell_weight();
    for (double s : adj_s) {
      std::complex<double> z0 = pairing(f, gpair);
      std::complex<double> z1 =
          pairing(v_multiply(f, -s), v_multiply(gpair, s));
      if (dot > 0.0)
        rep.adjoint_err = std::max(rep.adjoint_err, std::abs(z0 - z1) / dot);
    }
  }

  rep.pass = rep.fubini_err <= rep.tolerance &&
             rep.isometry_err <= rep.tolerance &&
             rep.convex_err <= rep.tolerance &&
             rep.adjoint_err <= rep.tolerance;
  return rep;
}

}  // namespace tslab
