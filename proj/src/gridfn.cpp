#include "tslab/gridfn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tslab/util.hpp"

namespace tslab {

HalfSpaceGrid::HalfSpaceGrid(SpaceGrid space, TimeLevels levels)
    : space_(std::move(space)), levels_(std::move(levels)) {}

std::shared_ptr<const HalfSpaceGrid> HalfSpaceGrid::make(SpaceGrid space,
                                                         TimeLevels levels) {
  auto g = std::shared_ptr<HalfSpaceGrid>(
      new HalfSpaceGrid(std::move(space), std::move(levels)));
  const auto& sp = g->space_;
  const auto& tl = g->levels_;
  const std::int64_t ns = sp.num_points();
  g->vol_.assign(ns * tl.count, 0.0);
  const double pm = sp.point_measure();
  parallel_for(ns, [&](std::int64_t s) {
    for (int j = 0; j < tl.count; ++j)
      g->vol_[s * tl.count + j] =
          static_cast<double>(ball_count(sp, s, tl.t[j])) * pm;
  });
  return g;
}

double HalfSpaceGrid::cell_weight() const {
  return space_.point_measure() * levels_.log_weight();
}

bool HalfSpaceGrid::same_layout(const HalfSpaceGrid& o) const {
  return space_.dim == o.space_.dim && space_.extents == o.space_.extents &&
         space_.h == o.space_.h && space_.origin == o.space_.origin &&
         levels_.t_min == o.levels_.t_min &&
         levels_.per_octave == o.levels_.per_octave &&
         levels_.count == o.levels_.count;
}

GridFunction GridFunction::zeros(GridPtr g) {
  GridFunction f;
  f.grid = std::move(g);
  f.re.assign(f.grid->num_cells(), 0.0);
  return f;
}

std::vector<double> GridFunction::magnitudes() const {
  std::vector<double> m(re.size());
  if (im.empty()) {
    for (std::size_t c = 0; c < re.size(); ++c) m[c] = std::fabs(re[c]);
  } else {
    for (std::size_t c = 0; c < re.size(); ++c) m[c] = std::hypot(re[c], im[c]);
  }
  return m;
}

void GridFunction::ensure_complex() {
  if (im.empty()) im.assign(re.size(), 0.0);
}

void check_same_grid(const GridFunction& a, const GridFunction& b,
                     const char* what) {
  if (!a.grid || !b.grid || !a.grid->same_layout(*b.grid))
    throw std::invalid_argument(std::string(what) + ": grid layouts differ");
}

double integrate(const GridFunction& f, const Region& region) {
  if (f.is_complex())
    throw std::invalid_argument("integrate: defined for real-valued input");
  double acc = 0.0;
  const double w = f.grid->cell_weight();
  for (std::int64_t c : region.cells) acc += f.re[c] * w;
  return acc;
}

GridFunction v_multiply(const GridFunction& f, double r) {
  GridFunction out = f;
  if (r == 0.0) return out;
  const auto& vol = f.grid->volume_table();
  for (std::size_t c = 0; c < out.re.size(); ++c) {
    double v = std::pow(vol[c], r);
    out.re[c] *= v;
    if (!out.im.empty()) out.im[c] *= v;
  }
  return out;
}

GridFunction t_multiply(const GridFunction& f, double e) {
  GridFunction out = f;
  if (e == 0.0) return out;
  const auto& tl = f.grid->levels();
  const int J = tl.count;
  std::vector<double> te(J);
  for (int j = 0; j < J; ++j) te[j] = std::pow(tl.t[j], e);
  for (std::int64_t c = 0; c < f.cells(); ++c) {
    out.re[c] *= te[c % J];
    if (!out.im.empty()) out.im[c] *= te[c % J];
  }
  return out;
}

GridFunction power(const GridFunction& f, double M) {
  if (!(M > 0.0)) throw std::invalid_argument("power: exponent must be positive");
  GridFunction out = GridFunction::zeros(f.grid);
  if (!f.is_complex() && M == 1.0) {
    for (std::int64_t c = 0; c < f.cells(); ++c) out.re[c] = std::fabs(f.re[c]);
    return out;
  }
  for (std::int64_t c = 0; c < f.cells(); ++c) {
    double a = std::sqrt(f.abs2(c));
    out.re[c] = a == 0.0 ? 0.0 : std::pow(a, M);
  }
  return out;
}

namespace {

GridFunction level_select(const GridFunction& f, double a, double b,
                          bool half_open) {
  if (!(a >= 0.0) || !(b > a))
    throw std::invalid_argument("truncate: need 0 <= a < b");
  GridFunction out = f;
  const auto& t = f.grid->levels().t;
  const int J = f.grid->levels().count;
  for (int j = 0; j < J; ++j) {
    bool keep = half_open ? (t[j] >= a && t[j] < b) : (t[j] > a && t[j] < b);
    if (keep) continue;
    for (std::int64_t s = 0; s < f.grid->space().num_points(); ++s) {
      out.re[s * J + j] = 0.0;
      if (!out.im.empty()) out.im[s * J + j] = 0.0;
    }
  }
  return out;
}

}  // namespace

GridFunction truncate(const GridFunction& f, double a, double b) {
  return level_select(f, a, b, false);
}

GridFunction band_truncate(const GridFunction& f, double a, double b) {
  return level_select(f, a, b, true);
}

std::complex<double> pairing(const GridFunction& f, const GridFunction& g) {
  check_same_grid(f, g, "pairing");
  const double w = f.grid->cell_weight();
  double re = 0.0, imv = 0.0;
  for (std::int64_t c = 0; c < f.cells(); ++c) {
    double fr = f.re[c], fi = f.im.empty() ? 0.0 : f.im[c];
    double gr = g.re[c], gi = g.im.empty() ? 0.0 : g.im[c];
    re += fr * gr + fi * gi;
    imv += fi * gr - fr * gi;
  }
  return {re * w, imv * w};
}

double lq_norm(const GridFunction& f, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("lq_norm: q must lie in (0, inf]");
  if (std::isinf(q)) {
    double m = 0.0;
    for (std::int64_t c = 0; c < f.cells(); ++c)
      m = std::max(m, f.abs2(c));
    return std::sqrt(m);
  }
  double acc = 0.0;
  for (std::int64_t c = 0; c < f.cells(); ++c) {
    double a2 = f.abs2(c);
    if (a2 == 0.0) continue;
    acc += std::pow(a2, 0.5 * q);
  }
  return std::pow(acc * f.grid->cell_weight(), 1.0 / q);
}

GridFunction scale(const GridFunction& f, double c) {
  GridFunction out = f;
  for (auto& v : out.re) v *= c;
  for (auto& v : out.im) v *= c;
  return out;
}

GridFunction add(const GridFunction& f, const GridFunction& g) {
  check_same_grid(f, g, "add");
  GridFunction out = f;
  if (g.is_complex()) out.ensure_complex();
  for (std::int64_t c = 0; c < f.cells(); ++c) {
    out.re[c] += g.re[c];
    if (!g.im.empty()) out.im[c] += g.im[c];
  }
  return out;
}

GridFunction sub(const GridFunction& f, const GridFunction& g) {
  return add(f, scale(g, -1.0));
}

}  // namespace tslab
