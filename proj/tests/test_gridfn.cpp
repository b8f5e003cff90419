#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "tslab/gridfn.hpp"
#include "tslab/util.hpp"

using namespace tslab;

namespace {

GridPtr small_grid() {
  return HalfSpaceGrid::make(SpaceGrid::make({33}, 0.25),
                             TimeLevels::make(0.5, 3, 10));
}

GridFunction random_fn(GridPtr g, std::uint64_t seed, bool complex_part = false) {
  GridFunction f = GridFunction::zeros(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  for (double& v : f.re) v = N(rng);
  if (complex_part) {
    f.ensure_complex();
    for (double& v : f.im) v = N(rng);
  }
  return f;
}

}  // namespace

TEST_CASE("cell weight and layout") {
  GridPtr g = small_grid();
  CHECK(g->cell_weight() ==
        doctest::Approx(0.25 * std::log(2.0) / 3).epsilon(1e-15));
  CHECK(g->num_cells() == 33 * 10);
  CHECK(g->cell(4, 7) == 4 * 10 + 7);
  GridFunction f = GridFunction::zeros(g);
  f.at(4, 7) = 2.5;
  CHECK(f.re[47] == 2.5);
  CHECK(f.abs2(47) == doctest::Approx(6.25));
}

TEST_CASE("cached volumes equal direct ball measures") {
  GridPtr g = small_grid();
  const SpaceGrid& sg = g->space();
  const TimeLevels& tl = g->levels();
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> X(0, sg.num_points() - 1);
  std::uniform_int_distribution<int> J(0, tl.count - 1);
  for (int it = 0; it < 40; ++it) {
    std::int64_t s = X(rng);
    int j = J(rng);
    CHECK(g->volume(s, j) == ball_volume(sg, s, tl.t[j]));
  }
}

TEST_CASE("integrating one over a cylinder gives measure times log length") {
  GridPtr g = small_grid();
  const TimeLevels& tl = g->levels();
  GridFunction one = GridFunction::zeros(g);
  for (double& v : one.re) v = 1.0;
  Ball b{16, 1.3};
  double a = tl.t[2], c = tl.t[8];
  Region reg = cylinder_region(g->space(), tl, b, a, c);
  double got = integrate(one, reg);
  double mu = ball_volume(g->space(), b.center, b.radius);
  // open interval (a, c) on the ladder holds the levels strictly between,
  // so the dt/t mass is ln(c/a) minus one weight.
  double want = mu * (std::log(c / a) - tl.log_weight());
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
  CHECK(std::abs(got - mu * std::log(c / a)) <=
        mu * tl.log_weight() * (1 + 1e-12));
}

TEST_CASE("integral of zero vanishes and disjoint regions add") {
  GridPtr g = small_grid();
  GridFunction z = GridFunction::zeros(g);
  Region whole{RegionKind::cylinder, {}};
  for (std::int64_t c = 0; c < g->num_cells(); ++c) whole.cells.push_back(c);
  CHECK(integrate(z, whole) == 0.0);

  GridFunction f = random_fn(g, 17);
  for (double& v : f.re) v = std::abs(v);
  Region left{RegionKind::cylinder, {}}, right{RegionKind::cylinder, {}};
  for (std::int64_t c = 0; c < g->num_cells(); ++c)
    (c % 2 ? left : right).cells.push_back(c);
  CHECK(integrate(f, left) + integrate(f, right) ==
        doctest::Approx(integrate(f, whole)).epsilon(1e-14));
}

TEST_CASE("volume powers compose and the zero power is the identity") {
  GridPtr g = small_grid();
  GridFunction f = random_fn(g, 23, true);
  GridFunction f0 = v_multiply(f, 0.0);
  for (std::int64_t c = 0; c < f.cells(); ++c) {
    CHECK(f0.re[c] == f.re[c]);
    CHECK(f0.im[c] == f.im[c]);
  }
  GridFunction lhs = v_multiply(v_multiply(f, 0.7), -0.2);
  GridFunction rhs = v_multiply(f, 0.5);
  for (std::int64_t c = 0; c < f.cells(); ++c)
    CHECK(lhs.re[c] == doctest::Approx(rhs.re[c]).epsilon(1e-13));
}

TEST_CASE("level powers multiply by t to the exponent") {
  GridPtr g = small_grid();
  const TimeLevels& tl = g->levels();
  GridFunction f = random_fn(g, 29);
  GridFunction tf = t_multiply(f, 1.5);
  for (std::int64_t s = 0; s < g->space().num_points(); ++s)
    for (int j = 0; j < tl.count; ++j)
      CHECK(tf.at(s, j) ==
            doctest::Approx(f.at(s, j) * std::pow(tl.t[j], 1.5)).epsilon(1e-14));
}

TEST_CASE("magnitude powers with the zero convention") {
  GridPtr g = small_grid();
  GridFunction f = random_fn(g, 31, true);
  f.re[5] = 0.0;
  f.im[5] = 0.0;
  GridFunction p = power(f, 0.5);
  CHECK(p.re[5] == 0.0);
  CHECK_FALSE(p.is_complex());
  for (std::int64_t c = 0; c < f.cells(); ++c)
    CHECK(p.re[c] ==
          doctest::Approx(std::pow(std::sqrt(f.abs2(c)), 0.5)).epsilon(1e-13));
  GridFunction m = power(f, 1.0);
  for (std::int64_t c = 0; c < f.cells(); ++c)
    CHECK(m.re[c] == doctest::Approx(std::sqrt(f.abs2(c))).epsilon(1e-14));
}

TEST_CASE("open truncation against half-open band truncation") {
  GridPtr g = small_grid();
  const TimeLevels& tl = g->levels();
  GridFunction f = random_fn(g, 37);
  double a = tl.t[3], b = tl.t[7];
  GridFunction open = truncate(f, a, b);
  GridFunction band = band_truncate(f, a, b);
  for (std::int64_t s = 0; s < g->space().num_points(); ++s)
    for (int j = 0; j < tl.count; ++j) {
      double vo = open.at(s, j), vb = band.at(s, j);
      if (j == 3) {
        CHECK(vo == 0.0);            // endpoint dropped by the open window
        CHECK(vb == f.at(s, j));     // kept by the half-open one
      } else if (j > 3 && j < 7) {
        CHECK(vo == f.at(s, j));
        CHECK(vb == f.at(s, j));
      } else {
        CHECK(vo == 0.0);
        CHECK(vb == 0.0);
      }
    }
}

TEST_CASE("half-open bands partition the identity") {
  GridPtr g = small_grid();
  const TimeLevels& tl = g->levels();
  GridFunction f = random_fn(g, 41);
  double r = 2.0;
  GridFunction acc = GridFunction::zeros(g);
  for (int k = -3; k <= 4; ++k)
    acc = add(acc, band_truncate(f, std::pow(r, k - 1), std::pow(r, k)));
  (void)tl;
  for (std::int64_t c = 0; c < f.cells(); ++c) CHECK(acc.re[c] == f.re[c]);
}

TEST_CASE("pairing is sesquilinear and hermitian") {
  GridPtr g = small_grid();
  GridFunction f = random_fn(g, 43, true);
  GridFunction h = random_fn(g, 47, true);
  std::complex<double> fh = pairing(f, h);
  std::complex<double> hf = pairing(h, f);
  CHECK(std::abs(fh - std::conj(hf)) <= 1e-12 * (1 + std::abs(fh)));
  // scaling the left argument scales the pairing linearly
  std::complex<double> s2 = pairing(scale(f, 2.0), h);
  CHECK(std::abs(s2 - 2.0 * fh) <= 1e-12 * (1 + std::abs(fh)));
  // direct sum against the definition
  std::complex<double> want = 0.0;
  for (std::int64_t c = 0; c < f.cells(); ++c)
    want += std::complex<double>(f.re[c], f.im[c]) *
            std::conj(std::complex<double>(h.re[c], h.im[c]));
  want *= g->cell_weight();
  CHECK(std::abs(fh - want) <= 1e-12 * (1 + std::abs(want)));
}

TEST_CASE("plain norms from the definition") {
  GridPtr g = small_grid();
  GridFunction f = random_fn(g, 53, true);
  for (double q : {1.0, 2.0, 3.5}) {
    double acc = 0.0;
    for (std::int64_t c = 0; c < f.cells(); ++c)
      acc += std::pow(std::sqrt(f.abs2(c)), q);
    acc = std::pow(acc * g->cell_weight(), 1.0 / q);
    CHECK(lq_norm(f, q) == doctest::Approx(acc).epsilon(1e-12));
  }
  double mx = 0.0;
  for (std::int64_t c = 0; c < f.cells(); ++c)
    mx = std::max(mx, std::sqrt(f.abs2(c)));
  CHECK(lq_norm(f, kInf) == doctest::Approx(mx).epsilon(1e-14));
}

TEST_CASE("arithmetic helpers act cellwise") {
  GridPtr g = small_grid();
  GridFunction f = random_fn(g, 59);
  GridFunction h = random_fn(g, 61, true);
  GridFunction s = add(f, h);
  GridFunction d = sub(s, h);
  for (std::int64_t c = 0; c < f.cells(); ++c) {
    CHECK(s.re[c] == doctest::Approx(f.re[c] + h.re[c]).epsilon(1e-15));
    CHECK(d.re[c] == doctest::Approx(f.re[c]).epsilon(1e-12));
  }
  CHECK(s.is_complex());
  GridFunction half = scale(f, 0.5);
  for (std::int64_t c = 0; c < f.cells(); ++c)
    CHECK(half.re[c] == 0.5 * f.re[c]);
}

TEST_CASE("mismatched grids are rejected") {
  GridPtr g = small_grid();
  GridPtr g2 = HalfSpaceGrid::make(SpaceGrid::make({17}, 0.25),
                                   TimeLevels::make(0.5, 3, 10));
  GridFunction f = GridFunction::zeros(g);
  GridFunction h = GridFunction::zeros(g2);
  CHECK_THROWS(add(f, h));
  CHECK_THROWS(pairing(f, h));
  CHECK(g->same_layout(*g));
  CHECK_FALSE(g->same_layout(*g2));
}
