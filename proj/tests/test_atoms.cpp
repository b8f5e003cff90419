#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "tslab/atoms.hpp"
#include "tslab/corpus.hpp"
#include "tslab/util.hpp"
#include "tslab/verify.hpp"

using namespace tslab;

namespace {

GridPtr lab_grid() {
  return HalfSpaceGrid::make(SpaceGrid::make({65}, 0.125),
                             TimeLevels::make(0.25, 4, 13));
}

// Tent indicator scaled to sit exactly on the size bound.
Atom tent_atom(GridPtr g, Ball b, double p, double q, double s,
               double overshoot = 1.0) {
  Region tent = tent_region(g->space(), g->levels(), b);
  Atom a;
  a.grid = g;
  a.ball = b;
  a.p = p;
  a.q = q;
  a.s = s;
  a.cells = tent.cells;
  GridFunction ind = GridFunction::zeros(g);
  for (std::int64_t c : tent.cells) ind.re[c] = 1.0;
  double size = tent_norm(ind, NormParams{.p = q, .q = q, .s = s});
  double target = std::pow(ball_volume(g->space(), b.center, b.radius),
                           delta_exponent(p, q));
  double vscale = overshoot * target / size;
  for (std::int64_t c : tent.cells) a.values.push_back(vscale);
  return a;
}

}  // namespace

TEST_CASE("tent indicator atom sits exactly on the size bound") {
  GridPtr g = lab_grid();
  Ball b{32, 1.5};
  for (double q : {2.0, kInf})
    for (double s : {0.0, 0.3}) {
      Atom a = tent_atom(g, b, 1.0, q, s);
      AtomReport rep = atom_validate(a);
      CHECK(rep.supported_in_tent);
      CHECK(rep.size_norm ==
            doctest::Approx(rep.size_bound).epsilon(1e-12));
      CHECK(std::abs(rep.slack) <= 1e-9 * rep.size_bound);
      CHECK(rep.valid);
      CHECK(rep.unit_norm >= 0.0);
      CHECK(rep.unit_norm <= 1.0 + 1e-9);
    }
}

TEST_CASE("the zero atom is valid and oversized atoms are not") {
  GridPtr g = lab_grid();
  Ball b{32, 1.0};
  Atom z = tent_atom(g, b, 1.0, 2.0, 0.0);
  for (auto& v : z.values) v = 0.0;
  AtomReport zr = atom_validate(z);
  CHECK(zr.valid);
  CHECK(zr.size_norm == 0.0);

  Atom big = tent_atom(g, b, 1.0, 2.0, 0.0, 1.01);
  AtomReport br = atom_validate(big);
  CHECK(br.supported_in_tent);
  CHECK_FALSE(br.valid);
}

TEST_CASE("values leaking outside the tent invalidate the atom") {
  GridPtr g = lab_grid();
  Atom a = tent_atom(g, Ball{32, 1.0}, 1.0, 2.0, 0.0);
  // a cell far outside the tent: spatial point 2, top level
  std::int64_t stray = g->cell(2, g->levels().count - 1);
  a.cells.insert(a.cells.begin(), stray);
  a.values.insert(a.values.begin(), 1e-3);
  std::sort(a.cells.begin(), a.cells.end());
  AtomReport rep = atom_validate(a, false);
  CHECK_FALSE(rep.supported_in_tent);
  CHECK_FALSE(rep.valid);
}

TEST_CASE("sparse atom and its dense image agree in every norm") {
  GridPtr g = lab_grid();
  Atom a = tent_atom(g, Ball{20, 0.8}, 1.0, 2.0, 0.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N(0.0, 1.0);
  for (auto& v : a.values) v = N(rng);
  GridFunction f = a.to_grid_function();
  double mass = 0.0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(f.re[a.cells[i]] == a.values[i].real());
    mass += std::norm(a.values[i]);
  }
  CHECK(lq_norm(f, 2.0) ==
        doctest::Approx(std::sqrt(mass * g->cell_weight())).epsilon(1e-12));
}

TEST_CASE("covering a single point yields one center with a full hat") {
  SpaceGrid g = SpaceGrid::make({33}, 0.25);
  std::vector<char> O(g.num_points(), 0);
  O[16] = 1;
  CoveringPartition cp = covering_partition(g, O);
  REQUIRE(cp.centers.size() == 1);
  CHECK(cp.centers[0] == 16);
  // r = dist(x, O^c)/10 = h/10
  CHECK(cp.radii[0] == doctest::Approx(0.025).epsilon(1e-14));
  REQUIRE(cp.phi[0].size() == 1);
  CHECK(cp.phi[0][0].first == 16);
  CHECK(cp.phi[0][0].second == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("covering properties on a random open set") {
  SpaceGrid g = SpaceGrid::make({129}, 0.125);
  std::mt19937_64 rng(13);
  std::vector<char> O(g.num_points(), 0);
  // a union of random intervals kept away from the boundary
  for (int b = 0; b < 4; ++b) {
    int lo = 8 + int(rng() % 90);
    int len = 3 + int(rng() % 20);
    for (int i = lo; i < std::min(lo + len, 120); ++i) O[i] = 1;
  }
  CoveringPartition cp = covering_partition(g, O);
  REQUIRE(!cp.centers.empty());
  std::vector<double> dc = dist_to_complement(g, O);

  // radii are a tenth of the boundary distance
  for (std::size_t i = 0; i < cp.centers.size(); ++i)
    CHECK(cp.radii[i] ==
          doctest::Approx(dc[cp.centers[i]] / 10.0).epsilon(1e-12));

  // quarter balls pairwise disjoint, checked point by point
  for (std::size_t i = 0; i < cp.centers.size(); ++i)
    for (std::size_t j = i + 1; j < cp.centers.size(); ++j)
      for (std::int64_t y = 0; y < g.num_points(); ++y) {
        bool both = g.in_ball(cp.centers[i], y, cp.radii[i] / 4.0 + 1e-15) &&
                    g.in_ball(cp.centers[j], y, cp.radii[j] / 4.0 + 1e-15);
        CHECK_FALSE(both);
      }

  // hats supported in the double balls and summing to the indicator
  std::vector<double> sum(g.num_points(), 0.0);
  for (std::size_t i = 0; i < cp.centers.size(); ++i)
    for (auto [pt, w] : cp.phi[i]) {
      CHECK(g.dist(cp.centers[i], pt) < 2.0 * cp.radii[i]);
      CHECK(w >= -1e-15);
      sum[pt] += w;
    }
  for (std::int64_t y = 0; y < g.num_points(); ++y)
    CHECK(sum[y] == doctest::Approx(O[y] ? 1.0 : 0.0).epsilon(1e-12));

  // every point of O is inside some selected ball's five-fold dilate
  for (std::int64_t y = 0; y < g.num_points(); ++y) {
    if (!O[y]) continue;
    bool hit = false;
    for (std::size_t i = 0; i < cp.centers.size(); ++i)
      hit = hit || g.in_ball(cp.centers[i], y, 5.0 * cp.radii[i]) ||
            cp.centers[i] == y;
    CHECK(hit);
  }
}

TEST_CASE("decomposing the zero function yields nothing") {
  GridPtr g = lab_grid();
  AtomicDecomposition d = decompose(GridFunction::zeros(g), 1.0, kInf);
  CHECK(d.atoms.empty());
  CHECK(d.lp_sum == 0.0);
  CHECK(d.residual_l2 == 0.0);
}

TEST_CASE("reconstruction is cellwise exact and atoms are clean") {
  GridPtr g = lab_grid();
  CorpusSpec spec = make_corpus_spec(*g, 3, 21);
  std::vector<GridFunction> fs = sample_corpus(spec, g);
  for (double p : {0.5, 1.0}) {
    for (const GridFunction& f : fs) {
      AtomicDecomposition d = decompose(f, p, kInf);
      CHECK(d.residual_l2 <= 1e-9);
      CHECK(d.residual_sup <= 1e-9);
      GridFunction acc = GridFunction::zeros(g);
      for (std::size_t i = 0; i < d.atoms.size(); ++i)
        acc = add(acc, scale(d.atoms[i].to_grid_function(), d.lambda[i]));
      GridFunction diff = sub(acc, f);
      double rel = lq_norm(diff, kInf) / std::max(lq_norm(f, kInf), 1e-300);
      CHECK(rel <= 1e-9);
      for (const Atom& a : d.atoms) {
        AtomReport rep = atom_validate(a, false);
        CHECK(rep.valid);
      }
      double sum = 0.0;
      for (double l : d.lambda) sum += std::pow(l, p);
      CHECK(sum == doctest::Approx(d.lp_sum).epsilon(1e-12));
    }
  }
}

TEST_CASE("a scaled tent indicator decomposes with unit efficiency") {
  GridPtr g = lab_grid();
  Ball b{32, 1.0};
  Region tent = tent_region(g->space(), g->levels(), b);
  GridFunction f = GridFunction::zeros(g);
  for (std::int64_t c : tent.cells) f.re[c] = 3.25;
  AtomicDecomposition d = decompose(f, 1.0, kInf);
  CHECK(d.residual_l2 <= 1e-12);
  CHECK(d.residual_sup <= 1e-12);
  // the budget cannot undercut the norm it reproduces
  double norm = tent_norm(f, NormParams{.p = 1.0, .q = kInf, .s = 0.0});
  CHECK(d.lp_sum >= norm * (1 - 1e-9));
}

TEST_CASE("the coefficient budget brackets the norm stably") {
  GridPtr g = lab_grid();
  CorpusSpec spec = make_corpus_spec(*g, 4, 33);
  std::vector<GridFunction> fs = sample_corpus(spec, g);
  GridPtr g2 = refine_grid(g);
  std::vector<GridFunction> fs2 = sample_corpus(spec, g2);
  for (double p : {0.5, 1.0}) {
    double worst = 0.0, worst2 = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      double n1 = tent_norm(fs[i], NormParams{.p = p, .q = kInf, .s = 0.0});
      double n2 = tent_norm(fs2[i], NormParams{.p = p, .q = kInf, .s = 0.0});
      if (n1 == 0.0 || n2 == 0.0) continue;
      AtomicDecomposition d1 = decompose(fs[i], p, kInf);
      AtomicDecomposition d2 = decompose(fs2[i], p, kInf);
      double r1 = d1.lp_sum / std::pow(n1, p);
      double r2 = d2.lp_sum / std::pow(n2, p);
      CHECK(r1 >= 1.0 - 1e-9);
      CHECK(r2 >= 1.0 - 1e-9);
      worst = std::max(worst, r1);
      worst2 = std::max(worst2, r2);
    }
    CHECK(worst > 0.0);
    // the efficiency constant survives one refinement within a factor 2
    CHECK(worst2 <= 2.0 * worst);
    CHECK(worst2 >= 0.5 * worst);
  }
}

TEST_CASE("atoms of one band have disjoint quarter balls") {
  GridPtr g = lab_grid();
  CorpusSpec spec = make_corpus_spec(*g, 1, 55);
  GridFunction f = sample_corpus(spec, g).front();
  AtomicDecomposition d = decompose(f, 1.0, kInf);
  REQUIRE(!d.atoms.empty());
  std::map<int, std::vector<std::size_t>> by_band;
  for (std::size_t i = 0; i < d.atoms.size(); ++i)
    by_band[d.atom_k[i]].push_back(i);
  std::map<int, const BandInfo*> bands;
  for (const BandInfo& b : d.bands) bands[b.k] = &b;
  const SpaceGrid& sg = g->space();
  for (auto& [k, idx] : by_band) {
    REQUIRE(bands.count(k) == 1);
    if (bands[k]->full_grid) continue;
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        // stored balls are the 14-fold dilates of the selected ones, which
        // are disjoint in the continuum sense
        const Ball& ba = d.atoms[idx[a]].ball;
        const Ball& bb = d.atoms[idx[b]].ball;
        double sep = ba.radius / 14.0 + bb.radius / 14.0;
        CHECK(sg.dist(ba.center, bb.center) >= sep * (1 - 1e-12));
      }
  }
}

TEST_CASE("level set mass controls the maximal function mass") {
  GridPtr g = lab_grid();
  CorpusSpec spec = make_corpus_spec(*g, 2, 77);
  std::vector<GridFunction> fs = sample_corpus(spec, g);
  const double p = 1.0;
  for (const GridFunction& f : fs) {
    FieldOnX G = lusin(f, kInf);
    double npow = 0.0;
    for (double v : G.v) npow += std::pow(v, p);
    npow *= g->space().point_measure();
    if (npow == 0.0) continue;
    AtomicDecomposition d = decompose(f, p, kInf);
    // the recorded level set masses match a recomputation from G
    double layer = 0.0;
    for (const BandInfo& b : d.bands) {
      double thr = std::pow(2.0, double(b.k));
      std::int64_t cnt = 0;
      for (double v : G.v) cnt += v > thr;
      CHECK(b.level_set_points == cnt);
      CHECK(b.level_set_measure ==
            doctest::Approx(cnt * g->space().point_measure()).epsilon(1e-14));
      layer += std::pow(2.0, double(b.k - 1) * p) * p * std::log(2.0) *
               b.level_set_measure;
    }
    // dyadic layer cake: integrating p lam^(p-1) mu{G > lam} over the band
    // (2^(k-1), 2^k] is wedged between the band terms with mu(O^k) and
    // mu(O^(k-1)), so the sum lands in [p ln2 / ((2^p-1) 2^p), p ln2 / (2^p-1)]
    // times the L^p mass, up to the truncated geometric tail
    double lo = p * std::log(2.0) /
                ((std::pow(2.0, p) - 1.0) * std::pow(2.0, p));
    double hi = p * std::log(2.0) / (std::pow(2.0, p) - 1.0);
    CHECK(layer >= 0.6 * lo * npow);
    CHECK(layer <= hi * npow * (1 + 1e-9));
  }
}

TEST_CASE("selected tent membership transfers to the dilated ball") {
  // if a point sits within 2r of a selected center and at height t inside
  // the tent over the level set, it also sits in the tent over the 14-fold
  // ball; checked exhaustively on a small grid
  SpaceGrid g = SpaceGrid::make({65}, 0.125);
  std::mt19937_64 rng(91);
  std::vector<char> O(g.num_points(), 0);
  for (int b = 0; b < 3; ++b) {
    int lo = 6 + int(rng() % 40);
    int len = 4 + int(rng() % 14);
    for (int i = lo; i < std::min(lo + len, 58); ++i) O[i] = 1;
  }
  std::vector<double> dc = dist_to_complement(g, O);
  CoveringPartition cp = covering_partition(g, O);
  REQUIRE(!cp.centers.empty());
  for (std::size_t i = 0; i < cp.centers.size(); ++i) {
    std::int64_t xi = cp.centers[i];
    double ri = cp.radii[i];
    for (std::int64_t y = 0; y < g.num_points(); ++y) {
      if (!(g.dist(xi, y) < 2.0 * ri)) continue;
      for (double t : {0.25, 0.5, 1.0, 2.0}) {
        if (!(dc[y] >= t)) continue;
        // tent membership over B(xi, 14 ri): d(y, xi) + t <= 14 ri
        CHECK(g.dist(xi, y) + t <= 14.0 * ri + 1e-12);
      }
    }
  }
}

TEST_CASE("unusable exponents are rejected") {
  GridPtr g = lab_grid();
  GridFunction f = GridFunction::zeros(g);
  CHECK_THROWS(decompose(f, 1.5, kInf));
  CHECK_THROWS(decompose(f, 0.0, kInf));
  CHECK_THROWS(decompose(f, 1.0, 0.5));
}
