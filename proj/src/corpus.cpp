#include "tslab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tslab/exponents.hpp"
#include "tslab/rng.hpp"
#include "tslab/util.hpp"

namespace tslab {

Profile profile_from_string(const std::string& name) {
  if (name == "cylindrical-smooth") return Profile::cylindrical_smooth;
  if (name == "cylindrical-rough") return Profile::cylindrical_rough;
  if (name == "single-tent") return Profile::single_tent;
  if (name == "multi-bump") return Profile::multi_bump;
  if (name == "atom-like") return Profile::atom_like;
  throw ConfigError("unknown corpus profile: " + name);
}

std::string profile_name(Profile p) {
  switch (p) {
    case Profile::cylindrical_smooth: return "cylindrical-smooth";
    case Profile::cylindrical_rough: return "cylindrical-rough";
    case Profile::single_tent: return "single-tent";
    case Profile::multi_bump: return "multi-bump";
    case Profile::atom_like: return "atom-like";
  }
  return "?";
}

namespace {

// C-infinity bump, equal to 1 at u = 0, supported on |u| < 1.
double bump(double u) {
  double u2 = u * u;
  if (u2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u2));
}

double snap(double x, double step) { return std::round(x / step) * step; }

std::vector<double> draw_center(Rng& rng, const CorpusSpec& spec, double shrink) {
  std::vector<double> c(spec.x_lo.size());
  for (std::size_t a = 0; a < c.size(); ++a) {
    double lo = spec.x_lo[a] + shrink, hi = spec.x_hi[a] - shrink;
    if (lo > hi) throw ConfigError("corpus: grid too small for requested profile");
    c[a] = snap(rng.uniform(lo, hi), spec.base_h);
    c[a] = std::clamp(c[a], lo, hi);
  }
  return c;
}

BumpParam draw_bump(Rng& rng, const CorpusSpec& spec, bool rough) {
  BumpParam b;
  double span = spec.x_hi[0] - spec.x_lo[0];
  for (std::size_t a = 1; a < spec.x_lo.size(); ++a)
    span = std::min(span, spec.x_hi[a] - spec.x_lo[a]);
  double r_min = 3.0 * spec.base_h;
  double r_max = std::max(r_min * 1.5, span / 3.0);
  b.radius = rng.log_uniform(r_min, r_max);
  b.center = draw_center(rng, spec, b.radius);
  b.tau = rng.log_uniform(spec.t_lo * 1.2, spec.t_hi / 1.2);
  double sig_cap = std::min(std::log(b.tau / spec.t_lo), std::log(spec.t_hi / b.tau));
  b.sigma = std::min(rng.uniform(0.35, 1.0), std::max(sig_cap, 0.05));
  b.amp = rng.uniform(0.5, 2.0);
  if (rough) {
    b.freq_x = rng.uniform(1.0, 4.0);
    b.freq_t = rng.uniform(1.0, 4.0);
    b.phase_x = rng.uniform(0.0, 6.28);
    b.phase_t = rng.uniform(0.0, 6.28);
  }
  return b;
}

void draw_tent(Rng& rng, const CorpusSpec& spec, FunctionSpec& fs) {
  double r_min = std::max(8.0 * spec.base_h, 2.0 * spec.t_lo);
  double r_max = spec.t_hi;
  if (r_min >= r_max) throw ConfigError("corpus: time band too narrow for tent profile");
  fs.tent_radius = snap(rng.log_uniform(r_min, r_max), spec.base_h / 2.0);
  fs.tent_radius = std::clamp(fs.tent_radius, r_min, r_max);
  fs.tent_center = draw_center(rng, spec, std::min(fs.tent_radius,
                                                   (spec.x_hi[0] - spec.x_lo[0]) / 2.0));
  fs.amp = rng.uniform(0.5, 2.0);
}

std::int64_t nearest_point(const SpaceGrid& g, const std::vector<double>& x) {
  int idx[3] = {0, 0, 0};
  for (int a = 0; a < g.dim; ++a) {
    auto i = static_cast<std::int64_t>(std::llround((x[a] - g.origin[a]) / g.h));
    idx[a] = static_cast<int>(std::clamp<std::int64_t>(i, 0, g.extents[a] - 1));
  }
  return g.flatten(idx);
}

}  // namespace

CorpusSpec make_corpus_spec(const HalfSpaceGrid& grid, int count,
                            std::uint64_t seed, std::vector<Profile> mix,
                            double max_aperture) {
  const auto& sp = grid.space();
  const auto& tl = grid.levels();
  if (tl.count < 6)
    throw ConfigError("make_corpus_spec: need at least 6 levels for margins");
  CorpusSpec spec;
  spec.seed = seed;
  spec.count = count;
  spec.base_h = sp.h;
  spec.t_lo = tl.t[2];
  spec.t_hi = tl.t[tl.count - 3];
  spec.margin_aperture = max_aperture;
  double margin = max_aperture * spec.t_hi + 2.0 * sp.h;
  for (int a = 0; a < sp.dim; ++a) {
    double lo = sp.origin[a] + margin;
    double hi = sp.origin[a] + (sp.extents[a] - 1) * sp.h - margin;
    if (!(lo < hi))
      throw ConfigError("make_corpus_spec: grid too small for the safety margin");
    spec.x_lo.push_back(lo);
    spec.x_hi.push_back(hi);
  }
  if (mix.empty())
    mix = {Profile::cylindrical_smooth, Profile::cylindrical_rough,
           Profile::single_tent, Profile::multi_bump, Profile::atom_like};

  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    FunctionSpec fs;
    fs.profile = mix[i % mix.size()];
    switch (fs.profile) {
      case Profile::cylindrical_smooth:
        fs.bumps.push_back(draw_bump(rng, spec, false));
        break;
      case Profile::cylindrical_rough:
        fs.bumps.push_back(draw_bump(rng, spec, true));
        break;
      case Profile::multi_bump: {
        auto nb = rng.uniform_int(3, 6);
        for (std::int64_t b = 0; b < nb; ++b)
          fs.bumps.push_back(draw_bump(rng, spec, false));
        break;
      }
      case Profile::single_tent:
        draw_tent(rng, spec, fs);
        break;
      case Profile::atom_like:
        draw_tent(rng, spec, fs);
        fs.atom_p = 1.0;
        fs.atom_q = 2.0;
        fs.atom_s = 0.0;
        break;
    }
    spec.functions.push_back(std::move(fs));
  }
  return spec;
}

GridFunction sample_function(const FunctionSpec& fs, const GridPtr& grid) {
  const auto& sp = grid->space();
  const auto& tl = grid->levels();
  GridFunction f = GridFunction::zeros(grid);
  const std::int64_t ns = sp.num_points();

  if (fs.profile == Profile::single_tent || fs.profile == Profile::atom_like) {
    std::int64_t c = nearest_point(sp, fs.tent_center);
    double r = fs.tent_radius;
    parallel_for(ns, [&](std::int64_t s) {
      double d = sp.dist(s, c);
      if (d >= 0.9 * r) return;
      for (int j = 0; j < tl.count; ++j) {
        double u = (d + tl.t[j]) / (0.9 * r);
        if (u >= 1.0) break;  // levels increase, so later ones only get worse
        f.re[s * tl.count + j] = fs.amp * bump(u);
      }
    });
    if (fs.profile == Profile::atom_like) {
      // Normalize so the T^{q,q}_s size equals mu(B)^{delta(p,q)} exactly.
      double q = fs.atom_q, s_exp = fs.atom_s;
      double acc = 0.0;
      const auto& vol = grid->volume_table();
      for (std::int64_t cidx = 0; cidx < f.cells(); ++cidx) {
        if (f.re[cidx] == 0.0) continue;
        double m = f.re[cidx] * std::pow(vol[cidx], -s_exp);
        acc += std::pow(m, q);
      }
      double norm = std::pow(acc * grid->cell_weight(), 1.0 / q);
      if (norm > 0.0) {
        double target = std::pow(ball_volume(sp, c, r),
                                 delta_exponent(fs.atom_p, fs.atom_q));
        f = scale(f, target / norm);
      }
    }
    return f;
  }

  parallel_for(ns, [&](std::int64_t s) {
    int idx[3];
    sp.unflatten(s, idx);
    double y[3];
    for (int a = 0; a < sp.dim; ++a) y[a] = sp.origin[a] + idx[a] * sp.h;
    for (const auto& b : fs.bumps) {
      double d2 = 0.0;
      for (int a = 0; a < sp.dim; ++a) {
        double dy = y[a] - b.center[a];
        d2 += dy * dy;
      }
      double ux = std::sqrt(d2) / b.radius;
      if (ux >= 1.0) continue;
      double sx = bump(ux);
      for (int j = 0; j < tl.count; ++j) {
        double ut = std::log(tl.t[j] / b.tau) / b.sigma;
        double st = bump(ut);
        if (st == 0.0) continue;
        double v = b.amp * sx * st;
        if (b.freq_x != 0.0) {
          double rf = 1.0 + 0.45 * std::sin(6.283185307179586 * b.freq_x * ux + b.phase_x) *
                                std::cos(b.freq_t * std::log(tl.t[j] / b.tau) + b.phase_t);
          v *= rf;
        }
        f.re[s * tl.count + j] += v;
      }
    }
  });
  return f;
}

std::vector<GridFunction> sample_corpus(const CorpusSpec& spec,
                                        const GridPtr& grid) {
  std::vector<GridFunction> out;
  out.reserve(spec.functions.size());
  for (const auto& fs : spec.functions) out.push_back(sample_function(fs, grid));
  return out;
}

std::vector<GridFunction> random_corpus(const GridPtr& grid, int count,
                                        std::uint64_t seed,
                                        std::vector<Profile> mix,
                                        double max_aperture) {
  auto spec = make_corpus_spec(*grid, count, seed, std::move(mix), max_aperture);
  return sample_corpus(spec, grid);
}

}  // namespace tslab
