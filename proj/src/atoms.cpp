#include "tslab/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace tslab {

GridFunction Atom::to_grid_function() const {
  if (!grid) throw std::invalid_argument("Atom::to_grid_function: missing grid");
  if (cells.size() != values.size())
    throw std::invalid_argument("Atom::to_grid_function: cells/values size mismatch");
  GridFunction out = GridFunction::zeros(grid);
  bool cplx = false;
  for (const auto& v : values)
    if (v.imag() != 0.0) { cplx = true; break; }
  if (cplx) out.ensure_complex();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto c = cells[i];
    if (c < 0 || c >= grid->num_cells())
      throw std::invalid_argument("Atom::to_grid_function: cell index out of range");
    out.re[c] = values[i].real();
    if (cplx) out.im[c] = values[i].imag();
  }
  return out;
}

AtomReport atom_validate(const Atom& a, bool with_unit_norm) {
  if (!a.grid) throw std::invalid_argument("atom_validate: missing grid");
  if (a.cells.size() != a.values.size())
    throw std::invalid_argument("atom_validate: cells/values size mismatch");
  validate(NormParams{.p = a.p, .q = a.q, .s = a.s});
  const SpaceGrid& g = a.grid->space();
  const TimeLevels& tl = a.grid->levels();
  if (a.ball.center < 0 || a.ball.center >= g.num_points())
    throw std::invalid_argument("atom_validate: ball center off the grid");
  if (!(a.ball.radius > 0.0) || !std::isfinite(a.ball.radius))
    throw std::invalid_argument("atom_validate: ball radius must be positive");

  const int J = tl.count;
  AtomReport rep;

  // Tent membership, same arithmetic as the tent region builder: a cell
  // (y, t_j) lies in T(B) iff t_j <= r and |y - c|^2 <= ((r - t_j)/h)^2.
  rep.supported_in_tent = true;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    if (a.values[i] == std::complex<double>(0.0, 0.0)) continue;
    const auto c = a.cells[i];
    if (c < 0 || c >= a.grid->num_cells())
      throw std::invalid_argument("atom_validate: cell index out of range");
    const auto y = c / J;
    const int j = static_cast<int>(c % J);
    const double rem = a.ball.radius - tl.t[j];
    if (rem < 0.0 ||
        static_cast<double>(g.sq_index_dist(y, a.ball.center)) > g.sq_radius(rem)) {
      rep.supported_in_tent = false;
      break;
    }
  }

  // On this grid the T^{q,q}_s norm telescopes to the plain weighted L^q norm
  // of V^-s a, so the size check stays on the sparse cell list.
  const auto& V = a.grid->volume_table();
  const double cw = a.grid->cell_weight();
  if (std::isinf(a.q)) {
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
      const double w = std::abs(a.values[i]) * std::pow(V[a.cells[i]], -a.s);
      rep.size_norm = std::max(rep.size_norm, w);
    }
  } else {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
      const double w = std::abs(a.values[i]) * std::pow(V[a.cells[i]], -a.s);
      if (w > 0.0) acc += std::pow(w, a.q) * cw;
    }
    rep.size_norm = std::pow(acc, 1.0 / a.q);
  }

  const double muB = ball_volume(g, a.ball.center, a.ball.radius);
  rep.size_bound = std::pow(muB, delta_exponent(a.p, a.q));
  rep.slack = rep.size_bound - rep.size_norm;
  rep.valid = rep.supported_in_tent &&
              rep.size_norm <= rep.size_bound * (1.0 + 1e-9);

  if (with_unit_norm) {
    const GridFunction dense = a.to_grid_function();
    rep.unit_norm = tent_norm(dense, NormParams{.p = a.p, .q = a.q, .s = a.s});
  }
  return rep;
}

CoveringPartition covering_partition(const SpaceGrid& g,
                                     const std::vector<char>& O) {
  const std::int64_t n = g.num_points();
  if (static_cast<std::int64_t>(O.size()) != n)
    throw std::invalid_argument("covering_partition: mask size mismatch");

  CoveringPartition out;
  std::vector<std::int64_t> cand;
  for (std::int64_t i = 0; i < n; ++i)
    if (O[i]) cand.push_back(i);
  if (cand.empty()) return out;

  const auto D = dist_to_complement(g, O);
  if (std::isinf(D[cand.front()]))
    throw std::invalid_argument("covering_partition: set must have nonempty complement");

  // Largest radius first; stable sort keeps the index order on ties, which
  // pins the selection.
  std::stable_sort(cand.begin(), cand.end(),
                   [&D](std::int64_t a, std::int64_t b) { return D[a] > D[b]; });

  // Disjointness of the selected balls is tested by center distance in the
  // continuum sense, not on sampled point sets: below the lattice resolution
  // every ball collapses to its center and a point-set test would select all
  // of O, inflating the selection count as h shrinks.  Full-ball
  // disjointness keeps the summed selected radii of one band bounded by a
  // fixed multiple of mu(O), while a rejected point still lies within twice
  // the radius of its rejecting (larger) ball, so the double balls cover O.
  for (const auto x : cand) {
    const double r = D[x] / 10.0;
    bool clash = false;
    for (std::size_t j = 0; j < out.centers.size(); ++j)
      if (g.dist(x, out.centers[j]) < r + out.radii[j]) {
        clash = true;
        break;
      }
    if (clash) continue;
    out.centers.push_back(x);
    out.radii.push_back(r);
  }

  // Hat bumps on the double balls, then normalize.  Every point of O is
  // within r_i of some selected center with r_i at least half its own radius,
  // so the denominator stays positive on O.
  const std::size_t m = out.centers.size();
  std::vector<double> denom(n, 0.0);
  std::vector<int> multiplicity(n, 0);
  out.phi.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto x = out.centers[i];
    const double r = out.radii[i];
    for (const auto y : ball_points(g, x, 2.0 * r)) {
      const double v = 1.0 - g.dist(y, x) / (2.0 * r);
      out.phi[i].emplace_back(y, v);
      denom[y] += v;
      ++multiplicity[y];
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    for (auto& [y, v] : out.phi[i]) v /= denom[y];
  for (const auto x : cand)
    out.overlap = std::max(out.overlap, multiplicity[x]);
  return out;
}

namespace {

// T^{q,q}_s size of a sparse value list, as in atom_validate.
double sparse_size(const HalfSpaceGrid& grid, double q, double s,
                   const std::vector<std::int64_t>& cells,
                   const std::vector<std::complex<double>>& vals) {
  const auto& V = grid.volume_table();
  const double cw = grid.cell_weight();
  if (std::isinf(q)) {
    double best = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i)
      best = std::max(best, std::abs(vals[i]) * std::pow(V[cells[i]], -s));
    return best;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double w = std::abs(vals[i]) * std::pow(V[cells[i]], -s);
    if (w > 0.0) acc += std::pow(w, q) * cw;
  }
  return std::pow(acc, 1.0 / q);
}

}  // namespace

AtomicDecomposition decompose(const GridFunction& f, double p, double q,
                              double s) {
  if (!(p > 0.0) || p > 1.0)
    throw std::invalid_argument("decompose: p must lie in (0, 1]");
  if (!(q >= p))
    throw std::invalid_argument("decompose: q must satisfy q >= p");
  if (!std::isfinite(s))
    throw std::invalid_argument("decompose: weight exponent must be finite");

  const HalfSpaceGrid& grid = *f.grid;
  const SpaceGrid& g = grid.space();
  const TimeLevels& tl = grid.levels();
  const int J = tl.count;
  const std::int64_t ns = g.num_points();
  const std::int64_t nc = grid.num_cells();
  const bool cplx = f.is_complex();

  AtomicDecomposition out;
  out.p = p;
  out.q = q;
  out.s = s;

  {
    int idx[3];
    for (std::int64_t c = 0; c < nc; ++c) {
      if (f.abs2(c) == 0.0) continue;
      g.unflatten(c / J, idx);
      for (int a = 0; a < g.dim; ++a)
        if (idx[a] == 0 || idx[a] == g.extents[a] - 1)
          throw std::invalid_argument(
              "decompose: support touches the grid boundary; enlarge the grid");
    }
  }

  const GridFunction fv = v_multiply(f, -s);
  const FieldOnX G = lusin(fv, q, 1.0, Mode::exact);

  double gmin = std::numeric_limits<double>::infinity();
  double gmax = 0.0;
  for (const double v : G.v) {
    if (v <= 0.0) continue;
    gmin = std::min(gmin, v);
    gmax = std::max(gmax, v);
  }
  if (!(gmax > 0.0)) return out;

  const int k_lo = static_cast<int>(std::floor(std::log2(gmin))) - 1;
  const int k_hi = static_cast<int>(std::ceil(std::log2(gmax)));

  std::vector<double> acc_re(nc, 0.0), acc_im;
  if (cplx) acc_im.assign(nc, 0.0);

  const auto emit = [&](int k, const Ball& b,
                        std::vector<std::int64_t>&& cells,
                        std::vector<std::complex<double>>&& raw) {
    const double muB = ball_volume(g, b.center, b.radius);
    const double size = sparse_size(grid, q, s, cells, raw);
    const double lam0 = std::ldexp(1.0, k + 1) * std::pow(muB, 1.0 / p);
    const double lam = std::max(lam0, size * std::pow(muB, -delta_exponent(p, q)));
    Atom a;
    a.grid = f.grid;
    a.ball = b;
    a.p = p;
    a.q = q;
    a.s = s;
    a.cells = std::move(cells);
    a.values.reserve(raw.size());
    for (const auto& v : raw) a.values.push_back(v / lam);
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
      acc_re[a.cells[i]] += lam * a.values[i].real();
      if (cplx) acc_im[a.cells[i]] += lam * a.values[i].imag();
    }
    out.lambda.push_back(lam);
    out.atom_k.push_back(k);
    out.atoms.push_back(std::move(a));
  };

  const double pm = g.point_measure();
  std::vector<char> prev_mask(ns, 0);
  std::vector<double> prev_D(ns, 0.0);

  for (int k = k_hi; k >= k_lo; --k) {
    const double thr = std::ldexp(1.0, k);
    std::vector<char> mask(ns, 0);
    std::int64_t cnt = 0;
    for (std::int64_t x = 0; x < ns; ++x)
      if (G.v[x] > thr) { mask[x] = 1; ++cnt; }

    BandInfo info;
    info.k = k;
    info.level_set_points = cnt;
    info.level_set_measure = static_cast<double>(cnt) * pm;

    // Equal level sets leave an empty band and the cached distances valid.
    if (mask == prev_mask) {
      out.bands.push_back(info);
      continue;
    }

    auto D = dist_to_complement(g, mask);

    if (cnt == ns) {
      // The level set is the whole grid: one atom on a bounding ball of the
      // band support.
      info.full_grid = true;
      std::vector<std::int64_t> cells;
      std::vector<std::complex<double>> raw;
      for (std::int64_t x = 0; x < ns; ++x) {
        for (int j = 0; j < J; ++j) {
          const double t = tl.t[j];
          if (!(t <= D[x] && t > prev_D[x])) continue;
          const std::int64_t c = x * J + j;
          const double re = f.re[c];
          const double im = cplx ? f.im[c] : 0.0;
          if (re == 0.0 && im == 0.0) continue;
          cells.push_back(c);
          raw.emplace_back(re, im);
        }
      }
      if (!cells.empty()) {
        int lo[3], hi[3], idx[3];
        g.unflatten(cells.front() / J, idx);
        for (int a = 0; a < g.dim; ++a) lo[a] = hi[a] = idx[a];
        for (const auto c : cells) {
          g.unflatten(c / J, idx);
          for (int a = 0; a < g.dim; ++a) {
            lo[a] = std::min(lo[a], idx[a]);
            hi[a] = std::max(hi[a], idx[a]);
          }
        }
        int ctr[3];
        for (int a = 0; a < g.dim; ++a) ctr[a] = lo[a] + (hi[a] - lo[a]) / 2;
        const std::int64_t center = g.flatten(ctr);
        double radius = 0.0;
        for (const auto c : cells)
          radius = std::max(radius,
                            g.dist(c / J, center) + tl.t[static_cast<int>(c % J)]);
        radius += 0.5 * g.h;
        emit(k, Ball{center, radius}, std::move(cells), std::move(raw));
        info.atom_count = 1;
        info.overlap = 1;
      }
    } else {
      const CoveringPartition cov = covering_partition(g, mask);
      info.selected_centers = static_cast<std::int64_t>(cov.centers.size());
      info.overlap = cov.overlap;
      for (std::size_t i = 0; i < cov.centers.size(); ++i) {
        std::vector<std::int64_t> cells;
        std::vector<std::complex<double>> raw;
        for (const auto& [y, ph] : cov.phi[i]) {
          for (int j = 0; j < J; ++j) {
            const double t = tl.t[j];
            if (!(t <= D[y] && t > prev_D[y])) continue;
            const std::int64_t c = y * J + j;
            const double re = f.re[c];
            const double im = cplx ? f.im[c] : 0.0;
            if (re == 0.0 && im == 0.0) continue;
            cells.push_back(c);
            raw.emplace_back(ph * re, ph * im);
          }
        }
        if (cells.empty()) continue;
        emit(k, Ball{cov.centers[i], 14.0 * cov.radii[i]}, std::move(cells),
             std::move(raw));
        ++info.atom_count;
      }
    }

    out.bands.push_back(info);
    prev_mask = std::move(mask);
    prev_D = std::move(D);
  }

  double num2 = 0.0, den2 = 0.0, nsup = 0.0, dsup = 0.0;
  for (std::int64_t c = 0; c < nc; ++c) {
    const double fr = f.re[c];
    const double fi = cplx ? f.im[c] : 0.0;
    const double dr = acc_re[c] - fr;
    const double di = (cplx ? acc_im[c] : 0.0) - fi;
    num2 += dr * dr + di * di;
    den2 += fr * fr + fi * fi;
    nsup = std::max(nsup, dr * dr + di * di);
    dsup = std::max(dsup, fr * fr + fi * fi);
  }
  out.residual_l2 = std::sqrt(num2 / den2);
  out.residual_sup = std::sqrt(nsup / dsup);

  for (const double lam : out.lambda) out.lp_sum += std::pow(lam, p);
  return out;
}

}  // namespace tslab
