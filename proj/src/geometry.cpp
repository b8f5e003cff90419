#include "tslab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "tslab/util.hpp"

namespace tslab {

SpaceGrid SpaceGrid::make(std::vector<int> extents, double h,
                          std::vector<double> origin) {
  SpaceGrid g;
  g.dim = static_cast<int>(extents.size());
  if (g.dim < 1 || g.dim > 3)
    throw std::invalid_argument("SpaceGrid: dimension must be 1, 2 or 3");
  for (int e : extents)
    if (e < 1) throw std::invalid_argument("SpaceGrid: extents must be positive");
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("SpaceGrid: spacing must be positive and finite");
  g.extents = std::move(extents);
  g.h = h;
  if (origin.empty()) origin.assign(g.dim, 0.0);
  if (static_cast<int>(origin.size()) != g.dim)
    throw std::invalid_argument("SpaceGrid: origin dimension mismatch");
  g.origin = std::move(origin);
  return g;
}

std::int64_t SpaceGrid::num_points() const {
  std::int64_t n = 1;
  for (int e : extents) n *= e;
  return n;
}

double SpaceGrid::point_measure() const {
  double m = 1.0;
  for (int a = 0; a < dim; ++a) m *= h;
  return m;
}

double SpaceGrid::max_length() const {
  double L = 0.0;
  for (int e : extents) L = std::max(L, e * h);
  return L;
}

void SpaceGrid::unflatten(std::int64_t s, int* idx) const {
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(s % extents[a]);
    s /= extents[a];
  }
}

std::int64_t SpaceGrid::flatten(const int* idx) const {
  std::int64_t s = 0;
  for (int a = 0; a < dim; ++a) s = s * extents[a] + idx[a];
  return s;
}

std::int64_t SpaceGrid::sq_index_dist(std::int64_t a, std::int64_t b) const {
  int ia[3], ib[3];
  unflatten(a, ia);
  unflatten(b, ib);
  std::int64_t sq = 0;
  for (int k = 0; k < dim; ++k) {
    std::int64_t d = ia[k] - ib[k];
    sq += d * d;
  }
  return sq;
}

double SpaceGrid::dist(std::int64_t a, std::int64_t b) const {
  return h * std::sqrt(static_cast<double>(sq_index_dist(a, b)));
}

TimeLevels TimeLevels::make(double t_min, int per_octave, int count) {
  if (!(t_min > 0.0) || !std::isfinite(t_min))
    throw std::invalid_argument("TimeLevels: t_min must be positive and finite");
  if (per_octave < 1) throw std::invalid_argument("TimeLevels: per_octave must be >= 1");
  if (count < 1) throw std::invalid_argument("TimeLevels: count must be >= 1");
  TimeLevels tl;
  tl.t_min = t_min;
  tl.per_octave = per_octave;
  tl.count = count;
  tl.t.resize(count);
  for (int j = 0; j < count; ++j)
    tl.t[j] = t_min * std::exp2(static_cast<double>(j) / per_octave);
  return tl;
}

double TimeLevels::log_weight() const {
  return std::log(2.0) / per_octave;
}

double TimeLevels::ratio() const {
  return std::exp2(1.0 / per_octave);
}

std::int64_t max_axis_offset(double u, bool strict) {
  if (strict ? !(u > 0.0) : !(u >= 0.0)) return -1;
  auto k = static_cast<std::int64_t>(std::floor(std::sqrt(u)));
  while (strict ? (static_cast<double>((k + 1) * (k + 1)) < u)
                : (static_cast<double>((k + 1) * (k + 1)) <= u))
    ++k;
  while (k >= 0 && (strict ? !(static_cast<double>(k * k) < u)
                           : !(static_cast<double>(k * k) <= u)))
    --k;
  return k;
}

namespace {

// Visits every grid point with squared index distance predicate(sq) from the
// center satisfied, calling fn(flat_index).  The predicate is < u when strict,
// <= u otherwise; u = (r/h)^2.
template <class Fn>
void for_ball(const SpaceGrid& g, std::int64_t center, double u, bool strict,
              Fn&& fn) {
  int c[3];
  g.unflatten(center, c);
  std::int64_t stride[3] = {1, 1, 1};
  for (int a = g.dim - 2; a >= 0; --a) stride[a] = stride[a + 1] * g.extents[a + 1];

  auto descend = [&](auto&& self, int axis, std::int64_t sq, std::int64_t base) -> void {
    double rem = u - static_cast<double>(sq);
    std::int64_t m = max_axis_offset(rem, strict);
    if (m < 0) return;
    std::int64_t lo = std::max<std::int64_t>(-m, -c[axis]);
    std::int64_t hi = std::min<std::int64_t>(m, g.extents[axis] - 1 - c[axis]);
    if (axis == g.dim - 1) {
      for (std::int64_t d = lo; d <= hi; ++d) fn(base + (c[axis] + d) * stride[axis]);
      return;
    }
    for (std::int64_t d = lo; d <= hi; ++d)
      self(self, axis + 1, sq + d * d, base + (c[axis] + d) * stride[axis]);
  };
  descend(descend, 0, 0, 0);
}

}  // namespace

std::int64_t ball_count(const SpaceGrid& g, std::int64_t x, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("ball_count: radius must be positive");
  std::int64_t n = 0;
  int c[3];
  g.unflatten(x, c);
  double u = g.sq_radius(r);
  // Count row intervals directly instead of visiting points.
  std::int64_t count = 0;
  auto descend = [&](auto&& self, int axis, std::int64_t sq) -> void {
    double rem = u - static_cast<double>(sq);
    std::int64_t m = max_axis_offset(rem, true);
    if (m < 0) return;
    std::int64_t lo = std::max<std::int64_t>(-m, -c[axis]);
    std::int64_t hi = std::min<std::int64_t>(m, g.extents[axis] - 1 - c[axis]);
    if (lo > hi) return;
    if (axis == g.dim - 1) {
      count += hi - lo + 1;
      return;
    }
    for (std::int64_t d = lo; d <= hi; ++d) self(self, axis + 1, sq + d * d);
  };
  descend(descend, 0, 0);
  n = count;
  return n;
}

double ball_volume(const SpaceGrid& g, std::int64_t x, double r) {
  return static_cast<double>(ball_count(g, x, r)) * g.point_measure();
}

std::vector<std::int64_t> ball_points(const SpaceGrid& g, std::int64_t x, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("ball_points: radius must be positive");
  std::vector<std::int64_t> pts;
  for_ball(g, x, g.sq_radius(r), true, [&](std::int64_t s) { pts.push_back(s); });
  std::sort(pts.begin(), pts.end());
  return pts;
}

std::vector<double> dist_to_complement(const SpaceGrid& g,
                                       const std::vector<char>& mask) {
  if (static_cast<std::int64_t>(mask.size()) != g.num_points())
    throw std::invalid_argument("dist_to_complement: mask size mismatch");
  const std::int64_t n = g.num_points();
  const int last = g.extents[g.dim - 1];
  const std::int64_t rows = n / last;
  constexpr std::int64_t kFar = std::numeric_limits<std::int64_t>::max() / 4;

  // 1-D nearest complement offset within each row along the last axis.
  std::vector<std::int64_t> row_off(n, kFar);
  for (std::int64_t r = 0; r < rows; ++r) {
    std::int64_t base = r * last;
    std::int64_t run = kFar;
    for (int i = 0; i < last; ++i) {
      run = mask[base + i] ? std::min(run + 1, kFar) : 0;
      row_off[base + i] = run;
    }
    run = kFar;
    for (int i = last - 1; i >= 0; --i) {
      run = mask[base + i] ? std::min(run + 1, kFar) : 0;
      row_off[base + i] = std::min(row_off[base + i], run);
    }
  }

  std::vector<double> out(n);
  const double inf = std::numeric_limits<double>::infinity();
  int re[2] = {1, 1};  // row extents over the leading axes
  for (int a = 0; a + 1 < g.dim; ++a) re[a] = g.extents[a];

  parallel_for(n, [&](std::int64_t p) {
    if (!mask[p]) {
      out[p] = 0.0;
      return;
    }
    int idx[3];
    g.unflatten(p, idx);
    int x = idx[g.dim - 1];
    std::int64_t best = kFar;
    if (g.dim == 1) {
      best = row_off[p] >= kFar ? kFar : row_off[p] * row_off[p];
    } else if (g.dim == 2) {
      for (std::int64_t ady = 0; ady * ady < best; ++ady) {
        for (int sgn = (ady == 0 ? 1 : -1); sgn <= 1; sgn += 2) {
          std::int64_t y = idx[0] + sgn * ady;
          if (y < 0 || y >= re[0]) continue;
          std::int64_t off = row_off[y * last + x];
          if (off >= kFar) continue;
          best = std::min(best, ady * ady + off * off);
          if (sgn == 1 && ady == 0) break;
        }
      }
    } else {
      for (std::int64_t adz = 0; adz * adz < best; ++adz) {
        for (int sz = (adz == 0 ? 1 : -1); sz <= 1; sz += 2) {
          std::int64_t z = idx[0] + sz * adz;
          if (z >= 0 && z < re[0]) {
            for (std::int64_t ady = 0; adz * adz + ady * ady < best; ++ady) {
              for (int sy = (ady == 0 ? 1 : -1); sy <= 1; sy += 2) {
                std::int64_t y = idx[1] + sy * ady;
                if (y < 0 || y >= re[1]) continue;
                std::int64_t off = row_off[(z * re[1] + y) * last + x];
                if (off >= kFar) continue;
                best = std::min(best, adz * adz + ady * ady + off * off);
                if (sy == 1 && ady == 0) break;
              }
            }
          }
          if (sz == 1 && adz == 0) break;
        }
      }
    }
    out[p] = best >= kFar ? inf : g.h * std::sqrt(static_cast<double>(best));
  });
  return out;
}

namespace {

std::int64_t cell_of(std::int64_t s, int j, int levels) {
  return s * levels + j;
}

}  // namespace

Region cone_region(const SpaceGrid& g, const TimeLevels& tl, std::int64_t x,
                   double aperture) {
  if (!(aperture > 0.0)) throw std::invalid_argument("cone_region: aperture must be positive");
  Region reg{RegionKind::cone, {}};
  for (int j = 0; j < tl.count; ++j) {
    double u = g.sq_radius(aperture * tl.t[j]);
    for_ball(g, x, u, true,
             [&](std::int64_t s) { reg.cells.push_back(cell_of(s, j, tl.count)); });
  }
  std::sort(reg.cells.begin(), reg.cells.end());
  return reg;
}

Region translated_cone_region(const SpaceGrid& g, const TimeLevels& tl,
                              std::int64_t x, double shift) {
  if (!(shift >= 0.0)) throw std::invalid_argument("translated_cone_region: shift must be >= 0");
  Region reg{RegionKind::translated_cone, {}};
  for (int j = 0; j < tl.count; ++j) {
    if (!(tl.t[j] > shift)) continue;
    double u = g.sq_radius(tl.t[j] - shift);
    for_ball(g, x, u, true,
             [&](std::int64_t s) { reg.cells.push_back(cell_of(s, j, tl.count)); });
  }
  std::sort(reg.cells.begin(), reg.cells.end());
  return reg;
}

Region tent_region(const SpaceGrid& g, const TimeLevels& tl, const Ball& b) {
  if (!(b.radius > 0.0)) throw std::invalid_argument("tent_region: radius must be positive");
  Region reg{RegionKind::tent, {}};
  for (int j = 0; j < tl.count; ++j) {
    double rem = b.radius - tl.t[j];
    if (rem < 0.0) continue;
    double u = g.sq_radius(rem);
    for_ball(g, b.center, u, false,
             [&](std::int64_t s) { reg.cells.push_back(cell_of(s, j, tl.count)); });
  }
  std::sort(reg.cells.begin(), reg.cells.end());
  return reg;
}

Region set_tent_region(const SpaceGrid& g, const TimeLevels& tl,
                       const std::vector<char>& mask) {
  std::vector<double> d = dist_to_complement(g, mask);
  Region reg{RegionKind::set_tent, {}};
  for (std::int64_t s = 0; s < g.num_points(); ++s) {
    if (!mask[s]) continue;
    for (int j = 0; j < tl.count; ++j)
      if (d[s] >= tl.t[j]) reg.cells.push_back(cell_of(s, j, tl.count));
  }
  std::sort(reg.cells.begin(), reg.cells.end());
  return reg;
}

Region whitney_region(const SpaceGrid& g, const TimeLevels& tl, std::int64_t x,
                      int j, double c0, double c1) {
  if (!(c0 > 0.0)) throw std::invalid_argument("whitney_region: c0 must be positive");
  if (!(c1 > 1.0)) throw std::invalid_argument("whitney_region: c1 must be > 1");
  if (j < 0 || j >= tl.count) throw std::invalid_argument("whitney_region: level out of range");
  Region reg{RegionKind::whitney, {}};
  double u = g.sq_radius(c0 * tl.t[j]);
  // t_l / t_j = 2^((l-j)/per_octave) exactly, so the strict band
  // t_j/c1 < t_l < c1*t_j is |l - j| < per_octave * log2(c1); integer level
  // offsets avoid float ties when c1 is a power of the level ratio.
  const double thr = tl.per_octave * std::log2(c1);
  for (int l = 0; l < tl.count; ++l) {
    if (!(std::abs(l - j) < thr)) continue;
    for_ball(g, x, u, true,
             [&](std::int64_t s) { reg.cells.push_back(cell_of(s, l, tl.count)); });
  }
  std::sort(reg.cells.begin(), reg.cells.end());
  return reg;
}

Region cylinder_region(const SpaceGrid& g, const TimeLevels& tl, const Ball& b,
                       double t_lo, double t_hi) {
  if (!(t_lo >= 0.0) || !(t_hi > t_lo))
    throw std::invalid_argument("cylinder_region: need 0 <= t_lo < t_hi");
  Region reg{RegionKind::cylinder, {}};
  double u = g.sq_radius(b.radius);
  for (int j = 0; j < tl.count; ++j) {
    if (!(tl.t[j] > t_lo && tl.t[j] < t_hi)) continue;
    for_ball(g, b.center, u, true,
             [&](std::int64_t s) { reg.cells.push_back(cell_of(s, j, tl.count)); });
  }
  std::sort(reg.cells.begin(), reg.cells.end());
  return reg;
}

namespace {

// Exponent e with x == 2^e, or throws.
int exact_log2(double x, const char* what) {
  int e;
  double m = std::frexp(x, &e);
  if (m != 0.5) throw ConfigError(std::string(what) + " must be an exact power of two");
  return e - 1;
}

}  // namespace

std::vector<DyadicCube> dyadic_whitney_cover(const SpaceGrid& g,
                                             const TimeLevels& tl) {
  int he = exact_log2(g.h, "dyadic_whitney_cover: grid spacing");
  for (int a = 0; a < g.dim; ++a) {
    double q = g.origin[a] / g.h;
    if (q != std::floor(q))
      throw ConfigError("dyadic_whitney_cover: origin must be a multiple of the spacing");
  }

  // Band exponent k(j): the unique k with 2^k < t_j <= 2^(k+1).
  auto band_of = [](double t) {
    int e;
    double m = std::frexp(t, &e);
    return m == 0.5 ? e - 2 : e - 1;
  };

  std::vector<DyadicCube> cubes;
  int j = 0;
  while (j < tl.count) {
    int k = band_of(tl.t[j]);
    int j_hi = j;
    while (j_hi + 1 < tl.count && band_of(tl.t[j_hi + 1]) == k) ++j_hi;
    if (k < he)
      throw ConfigError(
          "dyadic_whitney_cover: cube side 2^" + std::to_string(k) +
          " undercuts the grid spacing; levels misaligned with the spatial grid");
    double ell = std::ldexp(1.0, k);
    std::int64_t side = static_cast<std::int64_t>(1) << (k - he);  // ell / h

    // Per-axis half-open index ranges of each cube column.
    std::vector<std::vector<std::pair<int, int>>> ranges(g.dim);
    for (int a = 0; a < g.dim; ++a) {
      auto o_idx = static_cast<std::int64_t>(g.origin[a] / g.h);
      std::int64_t m_lo = static_cast<std::int64_t>(
          std::floor(g.origin[a] / ell));
      std::int64_t m_hi = static_cast<std::int64_t>(
          std::floor((g.origin[a] + (g.extents[a] - 1) * g.h) / ell));
      for (std::int64_t m = m_lo; m <= m_hi; ++m) {
        std::int64_t lo = m * side - o_idx;
        std::int64_t hi = lo + side;
        lo = std::max<std::int64_t>(lo, 0);
        hi = std::min<std::int64_t>(hi, g.extents[a]);
        if (lo < hi) ranges[a].emplace_back(static_cast<int>(lo), static_cast<int>(hi));
      }
    }

    // Cartesian product of the per-axis ranges.
    std::vector<int> pick(g.dim, 0);
    while (true) {
      DyadicCube c;
      c.k = k;
      c.ell = ell;
      c.j_lo = j;
      c.j_hi = j_hi;
      c.lo.resize(g.dim);
      c.hi.resize(g.dim);
      for (int a = 0; a < g.dim; ++a) {
        c.lo[a] = ranges[a][pick[a]].first;
        c.hi[a] = ranges[a][pick[a]].second;
      }
      cubes.push_back(std::move(c));
      int a = g.dim - 1;
      while (a >= 0 && ++pick[a] == static_cast<int>(ranges[a].size())) pick[a--] = 0;
      if (a < 0) break;
    }
    j = j_hi + 1;
  }
  return cubes;
}

}  // namespace tslab
