#include "tslab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tslab/util.hpp"

namespace tslab {

void validate(const NormParams& np) {
  if (!(np.p > 0.0)) throw std::invalid_argument("NormParams: p must lie in (0, inf]");
  if (!(np.q > 0.0)) throw std::invalid_argument("NormParams: q must lie in (0, inf]");
  if (!std::isfinite(np.s)) throw std::invalid_argument("NormParams: s must be finite");
  if (!(np.aperture > 0.0) || std::isinf(np.aperture))
    throw std::invalid_argument("NormParams: aperture must be positive and finite");
  if (!std::isfinite(np.alpha))
    throw std::invalid_argument("NormParams: alpha must be finite");
  if (np.alpha != 0.0 && !std::isinf(np.p))
    throw std::invalid_argument("NormParams: alpha requires p = inf");
}

namespace {

// Visits a disc around the multi-index c as contiguous flat-index ranges
// [first, last] along the last axis.  Offsets d satisfy |d|^2 < u (strict) or
// <= u, the same integer predicate the region builders use, so every caller
// sees the same cell sets.
template <class Emit>
void for_disc_rows(const SpaceGrid& g, const int* c, double u, bool strict,
                   Emit&& emit) {
  std::int64_t m0 = max_axis_offset(u, strict);
  if (m0 < 0) return;
  const int last = g.extents[g.dim - 1];
  if (g.dim == 1) {
    std::int64_t lo = std::max<std::int64_t>(-m0, -c[0]);
    std::int64_t hi = std::min<std::int64_t>(m0, last - 1 - c[0]);
    if (lo <= hi) emit(c[0] + lo, c[0] + hi);
    return;
  }
  if (g.dim == 2) {
    for (std::int64_t a = std::max<std::int64_t>(-m0, -c[0]),
                      ahi = std::min<std::int64_t>(m0, g.extents[0] - 1 - c[0]);
         a <= ahi; ++a) {
      std::int64_t m = max_axis_offset(u - static_cast<double>(a * a), strict);
      if (m < 0) continue;
      std::int64_t lo = std::max<std::int64_t>(-m, -c[1]);
      std::int64_t hi = std::min<std::int64_t>(m, last - 1 - c[1]);
      if (lo > hi) continue;
      std::int64_t base = (c[0] + a) * static_cast<std::int64_t>(last) + c[1];
      emit(base + lo, base + hi);
    }
    return;
  }
  for (std::int64_t a = std::max<std::int64_t>(-m0, -c[0]),
                    ahi = std::min<std::int64_t>(m0, g.extents[0] - 1 - c[0]);
       a <= ahi; ++a) {
    std::int64_t m1 = max_axis_offset(u - static_cast<double>(a * a), strict);
    if (m1 < 0) continue;
    for (std::int64_t b = std::max<std::int64_t>(-m1, -c[1]),
                      bhi = std::min<std::int64_t>(m1, g.extents[1] - 1 - c[1]);
         b <= bhi; ++b) {
      std::int64_t m =
          max_axis_offset(u - static_cast<double>(a * a + b * b), strict);
      if (m < 0) continue;
      std::int64_t lo = std::max<std::int64_t>(-m, -c[2]);
      std::int64_t hi = std::min<std::int64_t>(m, last - 1 - c[2]);
      if (lo > hi) continue;
      std::int64_t base =
          ((c[0] + a) * static_cast<std::int64_t>(g.extents[1]) + (c[1] + b)) *
              last +
          c[2];
      emit(base + lo, base + hi);
    }
  }
}

// Per-level spatial fields answering disc-sum and disc-max queries.  exact
// mode adds the entries one by one in row order; fast mode subtracts per-row
// prefix sums.  Both walk the rows emitted by for_disc_rows, so the summed
// sets coincide and only the summation order differs.
class LevelFields {
 public:
  LevelFields(const SpaceGrid& g, int levels, Mode mode)
      : g_(g), mode_(mode), last_(g.extents[g.dim - 1]), data_(levels),
        pref_(levels) {}

  void set_level(int j, std::vector<double> field) {
    if (mode_ == Mode::fast) {
      const std::int64_t rows = static_cast<std::int64_t>(field.size()) / last_;
      auto& p = pref_[j];
      p.assign(rows * (last_ + 1), 0.0);
      for (std::int64_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (int i = 0; i < last_; ++i) {
          acc += field[r * last_ + i];
          p[r * (last_ + 1) + i + 1] = acc;
        }
      }
    }
    data_[j] = std::move(field);
  }

  double disc_sum(int j, const int* c, double u, bool strict) const {
    double acc = 0.0;
    if (mode_ == Mode::fast) {
      const auto& p = pref_[j];
      for_disc_rows(g_, c, u, strict, [&](std::int64_t f, std::int64_t l) {
        std::int64_t row = f / last_;
        // Shift into the (last_ + 1)-wide prefix rows.
        acc += p[f + row + (l - f) + 1] - p[f + row];
      });
    } else {
      const auto& d = data_[j];
      for_disc_rows(g_, c, u, strict, [&](std::int64_t f, std::int64_t l) {
        for (std::int64_t i = f; i <= l; ++i) acc += d[i];
      });
    }
    return acc;
  }

  double disc_max(int j, const int* c, double u, bool strict) const {
    const auto& d = data_[j];
    double best = 0.0;
    for_disc_rows(g_, c, u, strict, [&](std::int64_t f, std::int64_t l) {
      for (std::int64_t i = f; i <= l; ++i) best = std::max(best, d[i]);
    });
    return best;
  }

 private:
  const SpaceGrid& g_;
  Mode mode_;
  int last_;
  std::vector<std::vector<double>> data_;
  std::vector<std::vector<double>> pref_;
};

std::vector<double> level_slice(const std::vector<double>& mag, std::int64_t ns,
                                int levels, int j) {
  std::vector<double> out(ns);
  for (std::int64_t s = 0; s < ns; ++s) out[s] = mag[s * levels + j];
  return out;
}

}  // namespace

FieldOnX lusin(const GridFunction& f, double q, double aperture, Mode mode) {
  if (!(q > 0.0)) throw std::invalid_argument("lusin: q must lie in (0, inf]");
  if (!(aperture > 0.0) || std::isinf(aperture))
    throw std::invalid_argument("lusin: aperture must be positive and finite");
  const auto& g = f.grid->space();
  const auto& tl = f.grid->levels();
  const std::int64_t ns = g.num_points();
  const int J = tl.count;
  std::vector<double> mag = f.magnitudes();
  FieldOnX out;
  out.v.assign(ns, 0.0);

  std::vector<double> u(J);
  for (int j = 0; j < J; ++j) u[j] = g.sq_radius(aperture * tl.t[j]);

  const bool is_sup = std::isinf(q);
  LevelFields lf(g, J, is_sup ? Mode::exact : mode);
  if (is_sup) {
    for (int j = 0; j < J; ++j) lf.set_level(j, level_slice(mag, ns, J, j));
  } else {
    const double cw = f.grid->cell_weight();
    const auto& vol = f.grid->volume_table();
    for (int j = 0; j < J; ++j) {
      std::vector<double> field(ns);
      for (std::int64_t s = 0; s < ns; ++s) {
        std::int64_t cell = s * J + j;
        double m = mag[cell];
        field[s] = m == 0.0 ? 0.0 : std::pow(m, q) * cw / vol[cell];
      }
      lf.set_level(j, std::move(field));
    }
  }

  parallel_for(ns, [&](std::int64_t x) {
    int c[3];
    g.unflatten(x, c);
    if (is_sup) {
      double best = 0.0;
      for (int j = 0; j < J; ++j)
        best = std::max(best, lf.disc_max(j, c, u[j], true));
      out.v[x] = best;
    } else {
      double acc = 0.0;
      for (int j = 0; j < J; ++j) acc += lf.disc_sum(j, c, u[j], true);
      out.v[x] = acc <= 0.0 ? 0.0 : std::pow(acc, 1.0 / q);
    }
  });
  return out;
}

std::vector<double> carleson_radii(const SpaceGrid& g, Mode mode) {
  const auto kmax =
      static_cast<std::int64_t>(std::ceil(2.0 * g.max_length() / g.h));
  std::vector<double> radii;
  if (mode == Mode::exact || kmax <= 64) {
    radii.reserve(kmax);
    for (std::int64_t k = 1; k <= kmax; ++k)
      radii.push_back(static_cast<double>(k) * g.h / 2.0);
    return radii;
  }
  double kf = 1.0;
  std::int64_t prev = 0;
  while (true) {
    auto k = static_cast<std::int64_t>(std::llround(kf));
    if (k <= prev) k = prev + 1;
    if (k >= kmax) break;
    radii.push_back(static_cast<double>(k) * g.h / 2.0);
    prev = k;
    kf *= std::sqrt(2.0);
  }
  radii.push_back(static_cast<double>(kmax) * g.h / 2.0);
  return radii;
}

namespace {

// Shared machinery for the Carleson functionals: per-level fields of
// |f|^q * cellweight (raw magnitudes when q = inf) plus single-ball
// evaluation of the Carleson expression.
class CarlesonEngine {
 public:
  CarlesonEngine(const GridFunction& f, double q, double alpha, Mode mode)
      : g_(f.grid->space()), tl_(f.grid->levels()), q_(q), alpha_(alpha),
        sup_(std::isinf(q)), lf_(g_, tl_.count, sup_ ? Mode::exact : mode) {
    const std::int64_t ns = g_.num_points();
    const int J = tl_.count;
    std::vector<double> mag = f.magnitudes();
    if (sup_) {
      for (int j = 0; j < J; ++j) lf_.set_level(j, level_slice(mag, ns, J, j));
    } else {
      const double cw = f.grid->cell_weight();
      for (int j = 0; j < J; ++j) {
        std::vector<double> field(ns);
        for (std::int64_t s = 0; s < ns; ++s) {
          double m = mag[s * J + j];
          field[s] = m == 0.0 ? 0.0 : std::pow(m, q) * cw;
        }
        lf_.set_level(j, std::move(field));
      }
    }
  }

  // mu(B)^(-alpha) * (tent mass / mu(B))^(1/q), or the q = inf display
  // mu(B)^(-(1+alpha)) * max over the tent.
  double value(const int* c, double radius) const {
    double muB = mu_ball(c, radius);
    if (sup_) {
      double best = 0.0;
      for (int j = 0; j < tl_.count; ++j) {
        double rem = radius - tl_.t[j];
        if (rem < 0.0) break;
        best = std::max(best, lf_.disc_max(j, c, g_.sq_radius(rem), false));
      }
      return std::pow(muB, -(1.0 + alpha_)) * best;
    }
    double acc = 0.0;
    for (int j = 0; j < tl_.count; ++j) {
      double rem = radius - tl_.t[j];
      if (rem < 0.0) break;
      acc += lf_.disc_sum(j, c, g_.sq_radius(rem), false);
    }
    if (acc <= 0.0) return 0.0;
    return std::pow(muB, -alpha_) * std::pow(acc / muB, 1.0 / q_);
  }

 private:
  double mu_ball(const int* c, double radius) const {
    std::int64_t count = 0;
    for_disc_rows(g_, c, g_.sq_radius(radius), true,
                  [&](std::int64_t f, std::int64_t l) { count += l - f + 1; });
    return static_cast<double>(count) * g_.point_measure();
  }

  const SpaceGrid& g_;
  const TimeLevels& tl_;
  double q_;
  double alpha_;
  bool sup_;
  LevelFields lf_;
};

// Values of every family ball (plus extras), grouped by center as
// (radius, value) lists.
void carleson_values(const GridFunction& f, double q, double alpha, Mode mode,
                     const std::vector<Ball>* extra,
                     std::vector<std::vector<std::pair<double, double>>>& vals) {
  const auto& g = f.grid->space();
  const std::int64_t ns = g.num_points();
  CarlesonEngine eng(f, q, alpha, mode);
  std::vector<double> radii = carleson_radii(g, mode);
  vals.assign(ns, {});
  parallel_for(ns, [&](std::int64_t s) {
    int c[3];
    g.unflatten(s, c);
    auto& list = vals[s];
    list.reserve(radii.size());
    for (double r : radii) list.emplace_back(r, eng.value(c, r));
    if (extra)
      for (const auto& b : *extra)
        if (b.center == s) list.emplace_back(b.radius, eng.value(c, b.radius));
  });
}

}  // namespace

CarlesonField carleson(const GridFunction& f, double q, double alpha, Mode mode,
                       const std::vector<Ball>* extra_balls) {
  if (!(q > 0.0)) throw std::invalid_argument("carleson: q must lie in (0, inf]");
  const auto& g = f.grid->space();
  const std::int64_t ns = g.num_points();
  std::vector<std::vector<std::pair<double, double>>> vals;
  carleson_values(f, q, alpha, mode, extra_balls, vals);

  CarlesonField out;
  out.v.assign(ns, 0.0);
  out.argmax.assign(ns, Ball{-1, 0.0});
  // Sequential scatter in (center, radius) order keeps the argmax tie-break
  // (first center, then smallest radius) independent of the thread count.
  for (std::int64_t s = 0; s < ns; ++s) {
    int c[3];
    g.unflatten(s, c);
    for (const auto& [r, value] : vals[s]) {
      for_disc_rows(g, c, g.sq_radius(r), true,
                    [&](std::int64_t first, std::int64_t last) {
                      for (std::int64_t m = first; m <= last; ++m)
                        if (value > out.v[m]) {
                          out.v[m] = value;
                          out.argmax[m] = Ball{s, r};
                        }
                    });
    }
  }
  return out;
}

double carleson_norm(const GridFunction& f, double q, double alpha, Mode mode,
                     const std::vector<Ball>* extra_balls) {
  if (!(q > 0.0))
    throw std::invalid_argument("carleson_norm: q must lie in (0, inf]");
  std::vector<std::vector<std::pair<double, double>>> vals;
  carleson_values(f, q, alpha, mode, extra_balls, vals);
  double best = 0.0;
  for (const auto& list : vals)
    for (const auto& [r, value] : list) best = std::max(best, value);
  return best;
}

double carleson_ball_value(const GridFunction& f, double q, double alpha,
                           const Ball& b, Mode mode) {
  if (!(q > 0.0))
    throw std::invalid_argument("carleson_ball_value: q must lie in (0, inf]");
  if (!(b.radius > 0.0))
    throw std::invalid_argument("carleson_ball_value: radius must be positive");
  CarlesonEngine eng(f, q, alpha, mode);
  int c[3];
  f.grid->space().unflatten(b.center, c);
  return eng.value(c, b.radius);
}

double tent_norm(const GridFunction& f, const NormParams& np, Mode mode,
                 const std::vector<Ball>* extra_balls) {
  validate(np);
  GridFunction fv = v_multiply(f, -np.s);
  if (!std::isinf(np.p)) {
    FieldOnX a = lusin(fv, np.q, np.aperture, mode);
    const double pm = f.grid->space().point_measure();
    double acc = 0.0;
    for (double v : a.v)
      if (v > 0.0) acc += std::pow(v, np.p);
    return acc <= 0.0 ? 0.0 : std::pow(acc * pm, 1.0 / np.p);
  }
  if (!std::isinf(np.q))
    return carleson_norm(fv, np.q, np.alpha, mode, extra_balls);
  if (np.alpha == 0.0) return lq_norm(fv, kInf);
  return carleson_norm(fv, kInf, np.alpha, mode, extra_balls);
}

GridFunction whitney_average(const GridFunction& f, double q, double c0,
                             double c1, Mode mode, std::int64_t* clipped_cells) {
  if (!(q > 0.0))
    throw std::invalid_argument("whitney_average: q must lie in (0, inf]");
  if (!(c0 > 0.0)) throw std::invalid_argument("whitney_average: c0 must be positive");
  if (!(c1 > 1.0) || std::isinf(c1))
    throw std::invalid_argument("whitney_average: c1 must be finite and > 1");
  const auto& g = f.grid->space();
  const auto& tl = f.grid->levels();
  const std::int64_t ns = g.num_points();
  const int J = tl.count;
  std::vector<double> mag = f.magnitudes();
  GridFunction out = GridFunction::zeros(f.grid);

  const double pm = g.point_measure();
  const double lw = tl.log_weight();
  const bool is_sup = std::isinf(q);

  LevelFields num(g, J, is_sup ? Mode::exact : mode);
  LevelFields den(g, J, is_sup ? Mode::exact : mode);
  if (is_sup) {
    for (int j = 0; j < J; ++j) num.set_level(j, level_slice(mag, ns, J, j));
  } else {
    for (int j = 0; j < J; ++j) {
      double cellw = pm * tl.t[j] * lw;
      std::vector<double> fn(ns);
      for (std::int64_t s = 0; s < ns; ++s) {
        double m = mag[s * J + j];
        fn[s] = m == 0.0 ? 0.0 : std::pow(m, q) * cellw;
      }
      num.set_level(j, std::move(fn));
      den.set_level(j, std::vector<double>(ns, cellw));
    }
  }

  // Level band: t_l / t_j = 2^((l-j)/per_octave) exactly, so the strict band
  // t_j/c1 < t_l < c1*t_j is |l - j| < per_octave * log2(c1).  Comparing
  // integer level offsets avoids float ties when c1 is a power of the ratio.
  const double thr = tl.per_octave * std::log2(c1);
  const auto dmax = static_cast<int>(std::ceil(thr)) - 1;

  std::vector<std::int64_t> clipped(ns, 0);
  parallel_for(ns, [&](std::int64_t x) {
    int c[3];
    g.unflatten(x, c);
    for (int j = 0; j < J; ++j) {
      double u = g.sq_radius(c0 * tl.t[j]);
      int lo = std::max(0, j - dmax);
      int hi = std::min(J - 1, j + dmax);
      bool clip = j - dmax < 0 || j + dmax > J - 1;
      std::int64_t m0 = max_axis_offset(u, true);
      for (int a = 0; a < g.dim && !clip; ++a)
        if (c[a] - m0 < 0 || c[a] + m0 > g.extents[a] - 1) clip = true;
      if (clip) ++clipped[x];
      double val = 0.0;
      if (is_sup) {
        for (int l = lo; l <= hi; ++l)
          val = std::max(val, num.disc_max(l, c, u, true));
      } else {
        double nacc = 0.0, dacc = 0.0;
        for (int l = lo; l <= hi; ++l) {
          nacc += num.disc_sum(l, c, u, true);
          dacc += den.disc_sum(l, c, u, true);
        }
        val = nacc <= 0.0 || dacc <= 0.0 ? 0.0 : std::pow(nacc / dacc, 1.0 / q);
      }
      out.re[x * J + j] = val;
    }
  });
  if (clipped_cells) {
    std::int64_t total = 0;
    for (auto cnt : clipped) total += cnt;
    *clipped_cells = total;
  }
  return out;
}

double z_norm(const GridFunction& f, double p, double q, double s, double c0,
              double c1, Mode mode, std::int64_t* clipped_cells) {
  if (!(p > 0.0)) throw std::invalid_argument("z_norm: p must lie in (0, inf]");
  GridFunction fv = v_multiply(f, -s);
  GridFunction w = whitney_average(fv, q, c0, c1, mode, clipped_cells);
  return lq_norm(w, p);
}

double z_norm_dyadic(const GridFunction& f, double p, double q, double s) {
  if (!(p > 0.0) || std::isinf(p))
    throw std::invalid_argument("z_norm_dyadic: p must lie in (0, inf)");
  if (!(q > 0.0))
    throw std::invalid_argument("z_norm_dyadic: q must lie in (0, inf]");
  const auto& g = f.grid->space();
  const auto& tl = f.grid->levels();
  const int J = tl.count;
  std::vector<double> mag = f.magnitudes();
  auto cubes = dyadic_whitney_cover(g, tl);
  const double pm = g.point_measure();
  const double lw = tl.log_weight();
  const bool is_sup = std::isinf(q);

  double total = 0.0;
  for (const auto& cube : cubes) {
    double nacc = 0.0, dacc = 0.0, best = 0.0;
    int idx[3] = {0, 0, 0};
    for (int a = 0; a < g.dim; ++a) idx[a] = cube.lo[a];
    while (true) {
      std::int64_t sflat = g.flatten(idx);
      for (int j = cube.j_lo; j <= cube.j_hi; ++j) {
        double m = mag[sflat * J + j];
        if (is_sup) {
          best = std::max(best, m);
        } else {
          double cw = pm * tl.t[j] * lw;
          if (m != 0.0) nacc += std::pow(m, q) * cw;
          dacc += cw;
        }
      }
      int a = g.dim - 1;
      while (a >= 0 && ++idx[a] == cube.hi[a]) {
        idx[a] = cube.lo[a];
        --a;
      }
      if (a < 0) break;
    }
    double avg_pow;
    if (is_sup) {
      if (best == 0.0) continue;
      avg_pow = std::pow(best, p);
    } else {
      if (nacc <= 0.0) continue;
      avg_pow = std::pow(nacc / dacc, p / q);
    }
    total += std::pow(cube.ell, g.dim * (1.0 - p * s)) * avg_pow;
  }
  return total <= 0.0 ? 0.0 : std::pow(total, 1.0 / p);
}

}  // namespace tslab
