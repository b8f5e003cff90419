#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tslab/corpus.hpp"
#include "tslab/io.hpp"
#include "tslab/util.hpp"
#include "tslab/verify.hpp"

using namespace tslab;
namespace fs = std::filesystem;

namespace {

GridPtr lab_grid() {
  return HalfSpaceGrid::make(SpaceGrid::make({65}, 0.125),
                             TimeLevels::make(0.25, 4, 13));
}

std::string fresh_dir(const std::string& tag) {
  static int counter = 0;
  fs::path p = fs::temp_directory_path() /
               ("tslab_io_" + std::to_string(::getpid()) + "_" + tag + "_" +
                std::to_string(counter++));
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string cli_bin() {
  const char* bin = std::getenv("TSLAB_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

// Runs the binary with stdout/stderr captured; returns the exit code.
int run_cli(const std::string& args, std::string* out = nullptr,
            std::string* err = nullptr) {
  std::string dir = fresh_dir("run");
  std::string cmd = "\"" + cli_bin() + "\" " + args + " >" + dir +
                    "/out.txt 2>" + dir + "/err.txt";
  int st = std::system(cmd.c_str());
  if (out) *out = slurp(dir + "/out.txt");
  if (err) *err = slurp(dir + "/err.txt");
  REQUIRE(WIFEXITED(st));
  return WEXITSTATUS(st);
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  REQUIRE(end != s.c_str());
  return v;
}

Atom tent_atom(GridPtr g, Ball b, double p, double q, double s,
               double overshoot) {
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
  for (std::size_t i = 0; i < tent.cells.size(); ++i)
    a.values.push_back(vscale);
  return a;
}

}  // namespace

TEST_CASE("config files trim, comment and let later keys win") {
  std::string dir = fresh_dir("cfg");
  spit(dir + "/a.cfg",
       "# heading comment\n"
       "grid = demo.tsg   # trailing comment\n"
       "\n"
       "count=4\n"
       "count = 6\n"
       "factor = 1.5\n");
  Config cfg = read_config(dir + "/a.cfg");
  CHECK(cfg.has("grid"));
  CHECK(cfg.get("grid") == "demo.tsg");
  CHECK(cfg.get("count") == "6");  // the later duplicate
  CHECK(cfg.get_num("count", 0) == 6.0);
  CHECK(cfg.get_num("factor", 0) == 1.5);
  CHECK(cfg.get("absent", "dflt") == "dflt");
  CHECK(cfg.get_num("absent", 2.5) == 2.5);
  spit(dir + "/bad.cfg", "just a line without equals\n");
  CHECK_THROWS_AS(read_config(dir + "/bad.cfg"), ConfigError);
}

TEST_CASE("grid descriptions round-trip through text") {
  std::string dir = fresh_dir("grid");
  GridPtr g2 = HalfSpaceGrid::make(
      SpaceGrid::make({17, 9}, 0.25, {1.0, -2.0}),
      TimeLevels::make(0.5, 2, 5));
  for (GridPtr g : {lab_grid(), g2}) {
    write_grid(dir + "/g.tsg", *g);
    GridPtr r = read_grid(dir + "/g.tsg");
    CHECK(r->space().extents == g->space().extents);
    CHECK(r->space().h == g->space().h);
    CHECK(r->space().origin == g->space().origin);
    CHECK(r->levels().t_min == g->levels().t_min);
    CHECK(r->levels().per_octave == g->levels().per_octave);
    CHECK(r->levels().count == g->levels().count);
    CHECK(r->volume_table() == g->volume_table());
    CHECK(r->cell_weight() == g->cell_weight());
  }
}

TEST_CASE("function values survive text and binary round-trips") {
  std::string dir = fresh_dir("fn");
  GridPtr g = lab_grid();
  write_grid(dir + "/g.tsg", *g);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 1.0);
  GridFunction f = GridFunction::zeros(g);
  for (double& v : f.re) v = N(rng) * std::pow(10.0, int(rng() % 9) - 4);
  GridFunction fc = f;
  fc.ensure_complex();
  for (double& v : fc.im) v = N(rng);

  for (bool binary : {false, true}) {
    write_function(dir + "/real.tsf", f, "g.tsg", binary);
    GridFunction fr = read_function(dir + "/real.tsf");
    CHECK(fr.grid->same_layout(*g));
    CHECK_FALSE(fr.is_complex());
    CHECK(fr.re == f.re);

    write_function(dir + "/cplx.tsf", fc, "g.tsg", binary);
    GridFunction fz = read_function(dir + "/cplx.tsf");
    CHECK(fz.is_complex());
    CHECK(fz.re == fc.re);
    CHECK(fz.im == fc.im);
  }
}

TEST_CASE("decompositions round-trip through the manifest") {
  std::string dir = fresh_dir("dec");
  GridPtr g = lab_grid();
  GridFunction f =
      sample_corpus(make_corpus_spec(*g, 1, 13), g).front();
  AtomicDecomposition d = decompose(f, 1.0, kInf, 0.0);
  REQUIRE(!d.atoms.empty());
  write_grid(dir + "/grid.tsg", *g);
  write_decomposition(dir, d, "grid.tsg");
  StoredDecomposition sd = read_decomposition(dir);
  CHECK(sd.p == d.p);
  CHECK(sd.q == d.q);
  CHECK(sd.s == d.s);
  CHECK(sd.lp_sum == d.lp_sum);
  CHECK(sd.residual_l2 == d.residual_l2);
  CHECK(sd.lambda == d.lambda);
  REQUIRE(sd.atoms.size() == d.atoms.size());
  for (std::size_t i = 0; i < d.atoms.size(); ++i) {
    CHECK(sd.atom_k[i] == d.atom_k[i]);
    CHECK(sd.atoms[i].ball.center == d.atoms[i].ball.center);
    CHECK(sd.atoms[i].ball.radius == d.atoms[i].ball.radius);
    CHECK(sd.atoms[i].p == d.atoms[i].p);
    CHECK(sd.atoms[i].q == d.atoms[i].q);
    CHECK(sd.atoms[i].s == d.atoms[i].s);
    CHECK(sd.atoms[i].cells == d.atoms[i].cells);
    CHECK(sd.atoms[i].values == d.atoms[i].values);
  }
}

TEST_CASE("writers leave no partial files behind") {
  std::string dir = fresh_dir("atomic");
  atomic_write_text(dir + "/only.txt", "first\n");
  atomic_write_text(dir + "/only.txt", "second\n");
  CHECK(slurp(dir + "/only.txt") == "second\n");
  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
}

TEST_CASE("ratio rows with zero denominator leave the column empty") {
  RatioReport r;
  r.suite = "s";
  r.params = "p";
  r.numerator = {1.0, 2.0};
  r.denominator = {2.0, 0.0};
  r.finalize();
  std::string csv = ratio_csv(r);
  CHECK(csv ==
        "suite,params,index,numerator,denominator,ratio\n"
        "s,p,0,1,2,0.5\n"
        "s,p,1,2,0,\n");
}

TEST_CASE("norm command agrees with the library") {
  std::string dir = fresh_dir("norm");
  GridPtr g = lab_grid();
  GridFunction f =
      sample_corpus(make_corpus_spec(*g, 1, 17), g).front();
  write_grid(dir + "/g.tsg", *g);
  write_function(dir + "/f.tsf", f, "g.tsg");

  std::string out;
  CHECK(run_cli("norm --fn " + dir + "/f.tsf --p 1.5 --q 2 --s 0.25", &out) ==
        0);
  double want = tent_norm(f, NormParams{.p = 1.5, .q = 2.0, .s = 0.25});
  CHECK(parse_double(out) == doctest::Approx(want).epsilon(1e-14));

  // --lq reads the plain vertical norm, which matches the p = q tent norm
  CHECK(run_cli("norm --fn " + dir + "/f.tsf --q 2 --s 0.25 --lq", &out) == 0);
  double lq = parse_double(out);
  CHECK(lq == doctest::Approx(lq_norm(v_multiply(f, -0.25), 2.0))
                  .epsilon(1e-14));
  CHECK(lq == doctest::Approx(
                  tent_norm(f, NormParams{.p = 2.0, .q = 2.0, .s = 0.25}))
                  .epsilon(1e-12));
}

TEST_CASE("znorm command covers both characterizations") {
  std::string dir = fresh_dir("znorm");
  GridPtr g = lab_grid();
  GridFunction f =
      sample_corpus(make_corpus_spec(*g, 1, 19), g).front();
  write_grid(dir + "/g.tsg", *g);
  write_function(dir + "/f.tsf", f, "g.tsg");

  std::string out;
  CHECK(run_cli("znorm --fn " + dir + "/f.tsf --p 2 --q 2 --s 0.25", &out) ==
        0);
  CHECK(parse_double(out) ==
        doctest::Approx(z_norm(f, 2.0, 2.0, 0.25, 1.0, 2.0)).epsilon(1e-14));
  CHECK(run_cli("znorm --fn " + dir + "/f.tsf --p 2 --q 2 --s 0.25 --dyadic",
                &out) == 0);
  CHECK(parse_double(out) ==
        doctest::Approx(z_norm_dyadic(f, 2.0, 2.0, 0.25)).epsilon(1e-14));
}

TEST_CASE("bad inputs exit with code one and name the problem") {
  std::string out, err;
  CHECK(run_cli("norm --fn /no/such/file.tsf", &out, &err) == 1);
  CHECK(err.find("/no/such/file.tsf") != std::string::npos);
  CHECK(run_cli("norm --definitely-not-a-flag", &out, &err) == 1);
  std::string dir = fresh_dir("badmethod");
  GridPtr g = lab_grid();
  GridFunction f =
      sample_corpus(make_corpus_spec(*g, 1, 23), g).front();
  write_grid(dir + "/g.tsg", *g);
  write_function(dir + "/f.tsf", f, "g.tsg");
  CHECK(run_cli("kfun --fn " + dir + "/f.tsf --method quux", &out, &err) == 1);
  CHECK(err.find("method") != std::string::npos);
}

TEST_CASE("kfun writes a parseable monotone curve") {
  std::string dir = fresh_dir("kfun");
  GridPtr g = lab_grid();
  GridFunction f =
      sample_corpus(make_corpus_spec(*g, 1, 29), g).front();
  write_grid(dir + "/g.tsg", *g);
  write_function(dir + "/f.tsf", f, "g.tsg");
  for (const char* method : {"convex", "split"}) {
    std::string csv_path = dir + "/k_" + method + ".csv";
    CHECK(run_cli("kfun --fn " + dir + "/f.tsf --samples 16 --method " +
                  std::string(method) + " --out " + csv_path) == 0);
    std::istringstream in(slurp(csv_path));
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "t,K");
    int rows = 0;
    double prev_t = 0.0, prev_k = 0.0;
    while (std::getline(in, line)) {
      auto comma = line.find(',');
      REQUIRE(comma != std::string::npos);
      double t = parse_double(line.substr(0, comma));
      double K = parse_double(line.substr(comma + 1));
      CHECK(t > prev_t);
      CHECK(K >= prev_k * (1 - 1e-9));
      prev_t = t;
      prev_k = K;
      ++rows;
    }
    CHECK(rows == 16);
  }
}

TEST_CASE("corpus generation is reproducible under a fixed seed") {
  std::string a = fresh_dir("gen_a"), b = fresh_dir("gen_b"),
              c = fresh_dir("gen_c");
  std::string base =
      " --extent 65 --spacing 0.125 --t-min 0.25 --m 4 --J 13 --count 3";
  CHECK(run_cli("gen-corpus --out " + a + base + " --seed 5") == 0);
  CHECK(run_cli("gen-corpus --out " + b + base + " --seed 5") == 0);
  CHECK(run_cli("gen-corpus --out " + c + base + " --seed 6") == 0);
  std::string cat_a, cat_b, cat_c;
  for (int i = 0; i < 3; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "/fn_%03d.tsf", i);
    cat_a += slurp(a + name);
    cat_b += slurp(b + name);
    cat_c += slurp(c + name);
    GridFunction f = read_function(a + name);
    CHECK(f.grid->same_layout(*lab_grid()));
  }
  CHECK(cat_a == cat_b);
  CHECK(cat_a != cat_c);
  CHECK(slurp(a + "/grid.tsg") == slurp(b + "/grid.tsg"));
}

TEST_CASE("suite reports are byte-identical without timestamps") {
  std::string dir = fresh_dir("report");
  GridPtr g = lab_grid();
  write_grid(dir + "/g.tsg", *g);
  auto cfg_for = [&](const std::string& out) {
    return "grid = g.tsg\n"
           "count = 4\n"
           "seed = 11\n"
           "suites = identity,hls\n"
           "hls = 1,2,2,0,-0.5\n"
           "out = " +
           out + "\n";
  };
  spit(dir + "/r1.cfg", cfg_for(dir + "/out1"));
  spit(dir + "/r2.cfg", cfg_for(dir + "/out2") + "no_timestamp = 1\n");

  // one run silences timestamps by flag, the other via the config key
  CHECK(run_cli("--no-timestamp report --config " + dir + "/r1.cfg") == 0);
  CHECK(run_cli("report --config " + dir + "/r2.cfg") == 0);
  for (const char* name :
       {"identity.csv", "identity.txt", "hls_0.csv", "hls_0.txt"}) {
    std::string fa = slurp(dir + "/out1/" + name);
    CHECK(fa == slurp(dir + "/out2/" + name));
    CHECK(!fa.empty());
    CHECK(fa.find("generated=") == std::string::npos);
  }
}

TEST_CASE("identity suite demo run passes end to end") {
  std::string dir = fresh_dir("identity");
  GridPtr g = lab_grid();
  write_grid(dir + "/g.tsg", *g);
  spit(dir + "/id.cfg",
       "grid = g.tsg\ncount = 4\nseed = 7\nout = " + dir + "/out\n");
  std::string out;
  CHECK(run_cli("--no-timestamp identity-suite --config " + dir + "/id.cfg",
                &out) == 0);
  CHECK(out.find("pass=1") != std::string::npos);
  CHECK(slurp(dir + "/out/identity.txt").find("pass=1") != std::string::npos);
}

TEST_CASE("stored atoms re-validate through the command line") {
  std::string dir = fresh_dir("val");
  GridPtr g = lab_grid();
  GridFunction f =
      sample_corpus(make_corpus_spec(*g, 1, 31), g).front();
  write_grid(dir + "/g.tsg", *g);
  write_function(dir + "/f.tsf", f, "g.tsg");
  std::string out;
  CHECK(run_cli("decompose --fn " + dir + "/f.tsf --p 1 --out " + dir +
                "/dec", &out) == 0);
  CHECK(out.find("atoms=") != std::string::npos);
  CHECK(run_cli("validate-atom --dir " + dir + "/dec", &out) == 0);
  CHECK(out.find("valid=1") != std::string::npos);
  CHECK(out.find("valid=0") == std::string::npos);

  // an oversized atom in the store must be rejected with exit code 2
  std::string bad = fresh_dir("valbad");
  AtomicDecomposition d;
  d.p = 1.0;
  d.q = 2.0;
  d.s = 0.0;
  d.atoms.push_back(tent_atom(g, Ball{32, 1.5}, 1.0, 2.0, 0.0, 1.01));
  d.lambda.push_back(1.0);
  d.atom_k.push_back(0);
  d.lp_sum = 1.0;
  write_grid(bad + "/grid.tsg", *g);
  write_decomposition(bad, d, "grid.tsg");
  CHECK(run_cli("validate-atom --dir " + bad, &out) == 2);
  CHECK(out.find("valid=0") != std::string::npos);
}
