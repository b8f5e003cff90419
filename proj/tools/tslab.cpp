#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tslab/corpus.hpp"
#include "tslab/exponents.hpp"
#include "tslab/interp.hpp"
#include "tslab/io.hpp"
#include "tslab/util.hpp"
#include "tslab/verify.hpp"

using namespace tslab;

namespace {

Mode mode_of(const std::string& s) {
  if (s == "exact") return Mode::exact;
  if (s == "fast") return Mode::fast;
  throw ConfigError("mode must be 'exact' or 'fast', got '" + s + "'");
}

KMethod method_of(const std::string& s) {
  if (s == "convex") return KMethod::convex_solve;
  if (s == "brute") return KMethod::brute_force;
  if (s == "split") return KMethod::split_formula;
  throw ConfigError("method must be convex, brute or split, got '" + s + "'");
}

std::string resolve(const std::string& from_file, const std::string& ref) {
  std::filesystem::path p(ref);
  if (p.is_absolute()) return ref;
  return (std::filesystem::path(from_file).parent_path() / p).string();
}

double num_of(const std::string& s, const std::string& where) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError(where + ": malformed number '" + s + "'");
  return v;
}

// "a,b,c ; d,e,f" -> {{a,b,c},{d,e,f}}
std::vector<std::vector<double>> tuple_list(const Config& cfg,
                                            const std::string& key) {
  std::vector<std::vector<double>> out;
  if (!cfg.has(key)) return out;
  std::string v = cfg.get(key);
  std::size_t pos = 0;
  while (pos <= v.size()) {
    std::size_t semi = v.find(';', pos);
    std::string part =
        semi == std::string::npos ? v.substr(pos) : v.substr(pos, semi - pos);
    std::vector<double> tup;
    std::size_t p2 = 0;
    while (p2 <= part.size()) {
      std::size_t comma = part.find(',', p2);
      std::string item = comma == std::string::npos
                             ? part.substr(p2)
                             : part.substr(p2, comma - p2);
      std::size_t a = item.find_first_not_of(" \t");
      if (a != std::string::npos) {
        std::size_t b = item.find_last_not_of(" \t");
        tup.push_back(num_of(item.substr(a, b - a + 1), "config key " + key));
      }
      if (comma == std::string::npos) break;
      p2 = comma + 1;
    }
    if (!tup.empty()) out.push_back(std::move(tup));
    if (semi == std::string::npos) break;
    pos = semi + 1;
  }
  return out;
}

void need_arity(const std::vector<double>& t, std::size_t lo, std::size_t hi,
                const std::string& key, const char* shape) {
  if (t.size() < lo || t.size() > hi)
    throw ConfigError("config key " + key + ": expected " + shape);
}

std::string timestamp_line() {
  std::time_t now = std::time(nullptr);
  char buf[64];
  std::strftime(buf, sizeof buf, "generated=%Y-%m-%dT%H:%M:%SZ\n",
                std::gmtime(&now));
  return buf;
}

struct SuiteContext {
  Config cfg;
  std::string cfg_path;
  GridPtr grid;
  CorpusSpec spec;
  std::vector<GridFunction> corpus;
  Mode mode = Mode::exact;
  std::string out;
  bool no_timestamp = false;
  bool refine = false;
  double factor = 2.0;
  GridPtr refined_grid;
  std::vector<GridFunction> refined;
};

SuiteContext make_context(const std::string& cfg_path, bool no_ts_flag) {
  SuiteContext ctx;
  ctx.cfg = read_config(cfg_path);
  ctx.cfg_path = cfg_path;
  std::string gridref = ctx.cfg.get("grid");
  if (gridref.empty())
    throw ConfigError(cfg_path + ": missing key 'grid'");
  ctx.grid = read_grid(resolve(cfg_path, gridref));
  int count = static_cast<int>(ctx.cfg.get_num("count", 8));
  auto seed = static_cast<std::uint64_t>(ctx.cfg.get_num("seed", 1));
  std::vector<Profile> mix;
  std::string prof = ctx.cfg.get("profile", "mixed");
  if (prof != "mixed") mix = {profile_from_string(prof)};
  ctx.spec = make_corpus_spec(*ctx.grid, count, seed, mix);
  ctx.corpus = sample_corpus(ctx.spec, ctx.grid);
  ctx.mode = mode_of(ctx.cfg.get("mode", "exact"));
  ctx.out = ctx.cfg.get("out", "reports");
  ctx.no_timestamp = no_ts_flag || ctx.cfg.get_num("no_timestamp", 0) != 0;
  ctx.refine = ctx.cfg.get_num("refine", 0) != 0;
  ctx.factor = ctx.cfg.get_num("stability_factor", 2.0);
  std::error_code ec;
  std::filesystem::create_directories(ctx.out, ec);
  if (ec) throw ConfigError("cannot create output directory: " + ctx.out);
  return ctx;
}

const std::vector<GridFunction>& refined_corpus(SuiteContext& ctx) {
  if (ctx.refined.empty()) {
    ctx.refined_grid = refine_grid(ctx.grid);
    ctx.refined = sample_corpus(ctx.spec, ctx.refined_grid);
  }
  return ctx.refined;
}

void emit(const SuiteContext& ctx, const std::string& name,
          const std::string& csv, const std::string& summary) {
  atomic_write_text(ctx.out + "/" + name + ".csv", csv);
  std::string txt;
  if (!ctx.no_timestamp) txt += timestamp_line();
  txt += summary;
  atomic_write_text(ctx.out + "/" + name + ".txt", txt);
  std::printf("[%s]\n%s", name.c_str(), summary.c_str());
}

std::int64_t center_point(const SpaceGrid& g) {
  int mid[3] = {0, 0, 0};
  for (int a = 0; a < g.dim; ++a) mid[a] = (g.extents[a] - 1) / 2;
  return g.flatten(mid);
}

int run_identity(SuiteContext& ctx) {
  IdentityReport rep = identity_suite(ctx.corpus, ctx.mode);
  emit(ctx, "identity", identity_csv(rep), identity_summary(rep));
  return rep.pass ? 0 : 2;
}

int run_hls(SuiteContext& ctx) {
  auto tuples = tuple_list(ctx.cfg, "hls");
  if (tuples.empty())
    throw ConfigError(ctx.cfg_path +
                      ": needs key 'hls' (p0,p1,q,s0,s1[,alpha])");
  int rc = 0;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto& t = tuples[i];
    need_arity(t, 5, 6, "hls", "p0,p1,q,s0,s1[,alpha]");
    double alpha = t.size() > 5 ? t[5] : 0.0;
    RatioReport rep =
        hls_suite(ctx.corpus, t[0], t[1], t[2], t[3], t[4], alpha, ctx.mode);
    if (!std::isfinite(rep.max_ratio)) rc = 2;
    if (ctx.refine) {
      RatioReport r2 = hls_suite(refined_corpus(ctx), t[0], t[1], t[2], t[3],
                                 t[4], alpha, ctx.mode);
      if (!refinement_check(rep, r2, ctx.factor)) rc = 2;
    }
    emit(ctx, "hls_" + std::to_string(i), ratio_csv(rep), ratio_summary(rep));
  }
  return rc;
}

int run_duality(SuiteContext& ctx) {
  auto tuples = tuple_list(ctx.cfg, "duality");
  if (tuples.empty())
    throw ConfigError(ctx.cfg_path + ": needs key 'duality' (p,q,s)");
  int rc = 0;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto& t = tuples[i];
    need_arity(t, 3, 3, "duality", "p,q,s");
    std::vector<GridFunction> gs;
    for (std::size_t k = 0; k < ctx.corpus.size(); ++k)
      gs.push_back(ctx.corpus[(k + 1) % ctx.corpus.size()]);
    RatioReport rep =
        duality_suite(ctx.corpus, gs, t[0], t[1], t[2], ctx.mode);
    if (ctx.refine) {
      const auto& rf = refined_corpus(ctx);
      std::vector<GridFunction> rg;
      for (std::size_t k = 0; k < rf.size(); ++k)
        rg.push_back(rf[(k + 1) % rf.size()]);
      RatioReport r2 = duality_suite(rf, rg, t[0], t[1], t[2], ctx.mode);
      if (!refinement_check(rep, r2, ctx.factor)) rc = 2;
    }
    ConjugatePairing cp = conjugate_pair_check(ctx.corpus.front(), t[2],
                                               ctx.mode);
    double crel = cp.rhs == 0.0 ? 0.0 : std::abs(cp.lhs - cp.rhs) / cp.rhs;
    if (crel > 1e-10) rc = 2;
    std::string summary = ratio_summary(rep);
    summary += "conjugate_lhs=" + fmt17(cp.lhs) + "\n";
    summary += "conjugate_rhs=" + fmt17(cp.rhs) + "\n";
    summary += "conjugate_rel_err=" + fmt17(crel) + "\n";
    emit(ctx, "duality_" + std::to_string(i), ratio_csv(rep), summary);
  }
  return rc;
}

std::vector<Cylinder> auto_cylinders(const GridPtr& grid) {
  const SpaceGrid& g = grid->space();
  const TimeLevels& tl = grid->levels();
  int mid[3] = {0, 0, 0};
  double half = kInf;
  for (int a = 0; a < g.dim; ++a) {
    mid[a] = (g.extents[a] - 1) / 2;
    half = std::min(
        half, g.h * std::min(mid[a], g.extents[a] - 1 - mid[a]));
  }
  std::int64_t ctr = g.flatten(mid);
  auto snap = [&](double r) {
    return std::max(g.h, std::floor(r / (0.5 * g.h)) * (0.5 * g.h));
  };
  Cylinder a{Ball{ctr, snap(0.45 * half)}, 0.0, tl.t[(tl.count - 1) / 2]};
  Cylinder b{Ball{ctr, snap(0.8 * half)}, 0.5 * tl.t_min,
             tl.t[(tl.count - 1) / 3]};
  return {a, b};
}

int run_cylinder(SuiteContext& ctx) {
  auto tuples = tuple_list(ctx.cfg, "cylinder");
  if (tuples.empty())
    throw ConfigError(ctx.cfg_path + ": needs key 'cylinder' (p)");
  int rc = 0;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    need_arity(tuples[i], 1, 1, "cylinder", "p");
    auto Ks = auto_cylinders(ctx.grid);
    for (std::size_t k = 0; k < Ks.size(); ++k) {
      CylinderReport rep =
          cylinder_suite(Ks[k], ctx.corpus, tuples[i][0], ctx.mode);
      if (!rep.pass) rc = 2;
      std::string summary = ratio_summary(rep.report);
      summary += "upper_constant=" + fmt17(rep.upper_constant) + "\n";
      summary += "hit_constant=" + fmt17(rep.hit_constant) + "\n";
      summary += "lower_constant=" + fmt17(rep.lower_constant) + "\n";
      summary += "hit_count=" + std::to_string(rep.hit_count) + "\n";
      summary += "max_upper_slack=" + fmt17(rep.max_upper_slack) + "\n";
      summary += "min_lower_slack=" + fmt17(rep.min_lower_slack) + "\n";
      summary += "pass=" + std::string(rep.pass ? "1" : "0") + "\n";
      emit(ctx,
           "cylinder_" + std::to_string(i) + "_" + std::to_string(k),
           ratio_csv(rep.report), summary);
    }
  }
  return rc;
}

int run_zt(SuiteContext& ctx) {
  auto tuples = tuple_list(ctx.cfg, "zt");
  if (tuples.empty())
    throw ConfigError(ctx.cfg_path + ": needs key 'zt' (p,q,s,c0,c1)");
  int rc = 0;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto& t = tuples[i];
    need_arity(t, 5, 5, "zt", "p,q,s,c0,c1");
    RatioReport rep =
        zt_suite(ctx.corpus, t[0], t[1], t[2], t[3], t[4], ctx.mode);
    if (!std::isfinite(rep.max_ratio)) rc = 2;
    if (ctx.refine) {
      RatioReport r2 = zt_suite(refined_corpus(ctx), t[0], t[1], t[2], t[3],
                                t[4], ctx.mode);
      if (!refinement_check(rep, r2, ctx.factor)) rc = 2;
    }
    emit(ctx, "zt_" + std::to_string(i), ratio_csv(rep), ratio_summary(rep));
  }
  return rc;
}

int run_tent(SuiteContext& ctx) {
  auto tuples = tuple_list(ctx.cfg, "tent");
  if (tuples.empty())
    throw ConfigError(ctx.cfg_path +
                      ": needs key 'tent' (p0,p1,q,s0,s1,theta,r)");
  int rc = 0;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto& t = tuples[i];
    need_arity(t, 7, 7, "tent", "p0,p1,q,s0,s1,theta,r");
    auto run = [&](const std::vector<GridFunction>& fs, RatioReport* iz,
                   RatioReport* is, RatioReport* zs, std::string* csv) {
      std::string rows =
          "index,p_theta,s_theta,infty,zero,seq,bands\n";
      for (std::size_t k = 0; k < fs.size(); ++k) {
        TentInterpReport r = tent_interp_norms(fs[k], t[0], t[1], t[2], t[3],
                                               t[4], t[5], t[6],
                                               WeightMode::volume, ctx.mode);
        rows += std::to_string(k) + "," + fmt17(r.p_theta) + "," +
                fmt17(r.s_theta) + "," + fmt17(r.infty_norm) + "," +
                fmt17(r.zero_norm) + "," + fmt17(r.seq_norm) + "," +
                std::to_string(r.seq_bands) + "\n";
        iz->numerator.push_back(r.infty_norm);
        iz->denominator.push_back(r.zero_norm);
        is->numerator.push_back(r.infty_norm);
        is->denominator.push_back(r.seq_norm);
        zs->numerator.push_back(r.zero_norm);
        zs->denominator.push_back(r.seq_norm);
      }
      iz->finalize();
      is->finalize();
      zs->finalize();
      if (csv) *csv = rows;
    };
    RatioReport iz, is, zs;
    iz.suite = "tent-infty-zero";
    is.suite = "tent-infty-seq";
    zs.suite = "tent-zero-seq";
    std::string params = "p0=" + fmt17(t[0]);
    iz.params = is.params = zs.params = params;
    std::string csv;
    run(ctx.corpus, &iz, &is, &zs, &csv);
    if (ctx.refine) {
      RatioReport iz2, is2, zs2;
      run(refined_corpus(ctx), &iz2, &is2, &zs2, nullptr);
      bool ok = refinement_check(iz, iz2, ctx.factor);
      ok = refinement_check(is, is2, ctx.factor) && ok;
      ok = refinement_check(zs, zs2, ctx.factor) && ok;
      if (!ok) rc = 2;
    }
    std::string summary =
        ratio_summary(iz) + ratio_summary(is) + ratio_summary(zs);
    atomic_write_text(ctx.out + "/tent_" + std::to_string(i) + ".csv", csv);
    std::string txt;
    if (!ctx.no_timestamp) txt += timestamp_line();
    txt += summary;
    atomic_write_text(ctx.out + "/tent_" + std::to_string(i) + ".txt", txt);
    std::printf("[tent_%zu]\n%s", i, summary.c_str());
  }
  return rc;
}

int run_tz(SuiteContext& ctx) {
  auto tuples = tuple_list(ctx.cfg, "tz");
  if (tuples.empty())
    throw ConfigError(ctx.cfg_path +
                      ": needs key 'tz' (p0,p1,q,s0,s1,theta,c0,c1)");
  int rc = 0;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto& t = tuples[i];
    need_arity(t, 8, 8, "tz", "p0,p1,q,s0,s1,theta,c0,c1");
    auto run = [&](const std::vector<GridFunction>& fs, RatioReport* sz,
                   RatioReport* zd) {
      for (const auto& f : fs) {
        TZReport r = t_z_equivalence(f, t[0], t[1], t[2], t[3], t[4], t[5],
                                     t[6], t[7], WeightMode::volume, ctx.mode);
        sz->numerator.push_back(r.seq_norm);
        sz->denominator.push_back(r.z);
        double zd_num = z_norm(f, r.p_theta, t[2], r.s_theta, t[6], t[7],
                               ctx.mode);
        zd->numerator.push_back(zd_num);
        zd->denominator.push_back(
            z_norm_dyadic(f, r.p_theta, t[2], r.s_theta));
      }
      sz->finalize();
      zd->finalize();
    };
    RatioReport sz, zd;
    sz.suite = "tz-seq-z";
    zd.suite = "tz-z-dyadic";
    sz.params = zd.params = "c0=" + fmt17(t[6]) + " c1=" + fmt17(t[7]);
    run(ctx.corpus, &sz, &zd);
    if (ctx.refine) {
      RatioReport sz2, zd2;
      run(refined_corpus(ctx), &sz2, &zd2);
      bool ok = refinement_check(sz, sz2, ctx.factor);
      refinement_check(zd, zd2, ctx.factor);
      if (!ok) rc = 2;
    }
    emit(ctx, "tz_" + std::to_string(i), ratio_csv(sz),
         ratio_summary(sz) + ratio_summary(zd));
  }
  return rc;
}

double gilbert_cg(const std::vector<GilbertReport>& reps) {
  double cg = 1.0;
  for (const auto& r : reps) {
    const double v[3] = {r.disc, r.cont2, r.cont3};
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        if (v[a] > 0.0 && v[b] > 0.0)
          cg = std::max(cg, std::max(v[a] / v[b], v[b] / v[a]));
  }
  return cg;
}

int run_gilbert(SuiteContext& ctx) {
  auto tuples = tuple_list(ctx.cfg, "gilbert");
  if (tuples.empty())
    throw ConfigError(ctx.cfg_path +
                      ": needs key 'gilbert' (theta,p,r,q,s0,s1)");
  int rc = 0;
  auto xv = ctx.cfg.get_num("x", -1.0);
  std::int64_t x = xv < 0 ? center_point(ctx.grid->space())
                          : static_cast<std::int64_t>(xv);
  int pts = static_cast<int>(ctx.cfg.get_num("s_pts", 16));
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto& t = tuples[i];
    need_arity(t, 6, 6, "gilbert", "theta,p,r,q,s0,s1");
    std::vector<GilbertReport> base, dense;
    std::string rows = "index,disc,cont2,cont3,bands\n";
    for (std::size_t k = 0; k < ctx.corpus.size(); ++k) {
      ConeRestriction cr =
          cone_restriction(ctx.corpus[k], x, t[3], t[4], t[5]);
      GilbertReport r =
          gilbert_norms(cr.values, cr.couple, t[0], t[1], t[2], pts);
      GilbertReport r2 =
          gilbert_norms(cr.values, cr.couple, t[0], t[1], t[2], 2 * pts);
      rows += std::to_string(k) + "," + fmt17(r.disc) + "," + fmt17(r.cont2) +
              "," + fmt17(r.cont3) + "," + std::to_string(r.bands) + "\n";
      base.push_back(r);
      dense.push_back(r2);
    }
    double cg = gilbert_cg(base);
    double cg2 = gilbert_cg(dense);
    double drift = cg == 0.0 ? 0.0 : std::abs(cg2 - cg) / cg;
    if (!(drift < 0.25)) rc = 2;
    std::string summary;
    summary += "suite=gilbert\n";
    summary += "params=theta=" + fmt17(t[0]) + " p=" + fmt17(t[1]) +
               " r=" + fmt17(t[2]) + "\n";
    summary += "instances=" + std::to_string(ctx.corpus.size()) + "\n";
    summary += "C_G=" + fmt17(cg) + "\n";
    summary += "C_G_dense_s_grid=" + fmt17(cg2) + "\n";
    summary += "C_G_drift=" + fmt17(drift) + "\n";
    atomic_write_text(ctx.out + "/gilbert_" + std::to_string(i) + ".csv",
                      rows);
    std::string txt;
    if (!ctx.no_timestamp) txt += timestamp_line();
    txt += summary;
    atomic_write_text(ctx.out + "/gilbert_" + std::to_string(i) + ".txt", txt);
    std::printf("[gilbert_%zu]\n%s", i, summary.c_str());
  }
  return rc;
}

int run_selected(const std::string& cfg_path, bool no_ts,
                 std::vector<std::string> suites) {
  SuiteContext ctx = make_context(cfg_path, no_ts);
  if (suites.empty()) {
    std::string sel = ctx.cfg.get("suites", "identity");
    std::size_t pos = 0;
    while (pos <= sel.size()) {
      std::size_t comma = sel.find(',', pos);
      std::string name = comma == std::string::npos
                             ? sel.substr(pos)
                             : sel.substr(pos, comma - pos);
      if (!name.empty()) suites.push_back(name);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  int rc = 0;
  for (const auto& name : suites) {
    int r;
    if (name == "identity")
      r = run_identity(ctx);
    else if (name == "hls")
      r = run_hls(ctx);
    else if (name == "duality")
      r = run_duality(ctx);
    else if (name == "cylinder")
      r = run_cylinder(ctx);
    else if (name == "zt")
      r = run_zt(ctx);
    else if (name == "tent")
      r = run_tent(ctx);
    else if (name == "tz")
      r = run_tz(ctx);
    else if (name == "gilbert")
      r = run_gilbert(ctx);
    else
      throw ConfigError("unknown suite '" + name + "'");
    rc = std::max(rc, r);
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted tent space and Z-space laboratory"};
  app.require_subcommand(1);
  int threads = 0;
  bool no_ts = false;
  app.add_option("--threads", threads, "worker threads (default: all cores)");
  app.add_flag("--no-timestamp", no_ts, "omit timestamp lines from reports");

  int rc = 0;
  auto apply_threads = [&] {
    if (threads > 0)
      setenv("TSLAB_THREADS", std::to_string(threads).c_str(), 1);
  };

  // norm
  auto* c_norm = app.add_subcommand("norm", "tent-space norm of a function");
  std::string fn_path, mode_s = "exact";
  double opt_p = 2, opt_q = 2, opt_s = 0, opt_alpha = 0, opt_ap = 1;
  bool plain_lq = false;
  c_norm->add_option("--fn", fn_path, "function file")->required();
  c_norm->add_option("--p", opt_p);
  c_norm->add_option("--q", opt_q);
  c_norm->add_option("--s", opt_s);
  c_norm->add_option("--alpha", opt_alpha);
  c_norm->add_option("--aperture", opt_ap);
  c_norm->add_option("--mode", mode_s);
  c_norm->add_flag("--lq", plain_lq, "plain L^q norm of V^-s f");
  c_norm->callback([&] {
    apply_threads();
    GridFunction f = read_function(fn_path);
    double v;
    if (plain_lq) {
      v = lq_norm(v_multiply(f, -opt_s), opt_q);
    } else {
      NormParams np{.p = opt_p, .q = opt_q, .s = opt_s, .alpha = opt_alpha,
                    .aperture = opt_ap};
      validate(np);
      v = tent_norm(f, np, mode_of(mode_s));
    }
    std::printf("%s\n", fmt17(v).c_str());
  });

  // znorm
  auto* c_znorm = app.add_subcommand("znorm", "Z-space norm of a function");
  double opt_c0 = 1, opt_c1 = 2;
  bool dyadic = false;
  c_znorm->add_option("--fn", fn_path, "function file")->required();
  c_znorm->add_option("--p", opt_p);
  c_znorm->add_option("--q", opt_q);
  c_znorm->add_option("--s", opt_s);
  c_znorm->add_option("--c0", opt_c0);
  c_znorm->add_option("--c1", opt_c1);
  c_znorm->add_option("--mode", mode_s);
  c_znorm->add_flag("--dyadic", dyadic, "Whitney-cube characterization");
  c_znorm->callback([&] {
    apply_threads();
    GridFunction f = read_function(fn_path);
    double v = dyadic
                   ? z_norm_dyadic(f, opt_p, opt_q, opt_s)
                   : z_norm(f, opt_p, opt_q, opt_s, opt_c0, opt_c1,
                            mode_of(mode_s));
    std::printf("%s\n", fmt17(v).c_str());
  });

  // decompose
  auto* c_dec = app.add_subcommand("decompose", "atomic decomposition");
  std::string out_dir;
  double dec_p = 1.0, dec_q = kInf, dec_s = 0.0;
  c_dec->add_option("--fn", fn_path, "function file")->required();
  c_dec->add_option("--p", dec_p);
  c_dec->add_option("--q", dec_q);
  c_dec->add_option("--s", dec_s);
  c_dec->add_option("--out", out_dir, "output directory")->required();
  c_dec->callback([&] {
    apply_threads();
    GridFunction f = read_function(fn_path);
    AtomicDecomposition d = decompose(f, dec_p, dec_q, dec_s);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory: " + out_dir);
    write_grid(out_dir + "/grid.tsg", *f.grid);
    write_decomposition(out_dir, d, "grid.tsg");
    std::printf("atoms=%zu\n", d.atoms.size());
    std::printf("lp_sum=%s\n", fmt17(d.lp_sum).c_str());
    std::printf("residual_l2=%s\n", fmt17(d.residual_l2).c_str());
    std::printf("residual_sup=%s\n", fmt17(d.residual_sup).c_str());
  });

  // validate-atom
  auto* c_val = app.add_subcommand("validate-atom",
                                   "re-validate stored decomposition atoms");
  std::string dec_dir;
  long long atom_index = -1;
  c_val->add_option("--dir", dec_dir, "decomposition directory")->required();
  c_val->add_option("--index", atom_index, "atom index (default: all)");
  c_val->callback([&] {
    apply_threads();
    StoredDecomposition sd = read_decomposition(dec_dir);
    bool all_ok = true;
    for (std::size_t i = 0; i < sd.atoms.size(); ++i) {
      if (atom_index >= 0 && static_cast<long long>(i) != atom_index)
        continue;
      AtomReport rep = atom_validate(sd.atoms[i]);
      all_ok = all_ok && rep.valid;
      std::printf("atom=%zu valid=%d size_norm=%s size_bound=%s unit_norm=%s\n",
                  i, rep.valid ? 1 : 0, fmt17(rep.size_norm).c_str(),
                  fmt17(rep.size_bound).c_str(), fmt17(rep.unit_norm).c_str());
    }
    if (!all_ok) rc = 2;
  });

  // kfun
  auto* c_kfun = app.add_subcommand("kfun", "K-functional curve on a cone");
  std::string kf_out, method_s = "convex";
  double kf_q = 2, kf_s0 = 0, kf_s1 = 0.5, kf_ap = 1;
  long long kf_x = -1;
  int kf_samples = 32;
  c_kfun->add_option("--fn", fn_path, "function file")->required();
  c_kfun->add_option("--x", kf_x, "spatial point (default: center)");
  c_kfun->add_option("--q", kf_q);
  c_kfun->add_option("--s0", kf_s0);
  c_kfun->add_option("--s1", kf_s1);
  c_kfun->add_option("--aperture", kf_ap);
  c_kfun->add_option("--samples", kf_samples);
  c_kfun->add_option("--method", method_s, "convex | brute | split");
  c_kfun->add_option("--out", kf_out, "CSV path (default: stdout)");
  c_kfun->callback([&] {
    apply_threads();
    GridFunction f = read_function(fn_path);
    std::int64_t x =
        kf_x < 0 ? center_point(f.grid->space()) : static_cast<std::int64_t>(kf_x);
    ConeRestriction cr = cone_restriction(f, x, kf_q, kf_s0, kf_s1, kf_ap);
    if (cr.cells.empty())
      throw ConfigError("kfun: the cone at the chosen point is empty");
    KCurve kc = k_curve(cr.values, cr.couple, kf_samples, method_of(method_s));
    std::string csv = kcurve_csv(kc);
    if (kf_out.empty())
      std::fputs(csv.c_str(), stdout);
    else
      atomic_write_text(kf_out, csv);
  });

  // gen-corpus
  auto* c_gen = app.add_subcommand("gen-corpus",
                                   "write a grid and corpus to a directory");
  std::string gen_grid, gen_profile = "mixed";
  std::vector<int> gen_extents;
  double gen_h = 0.125, gen_tmin = 0.125;
  int gen_m = 4, gen_J = 17, gen_count = 8;
  std::uint64_t gen_seed = 1;
  bool gen_binary = false;
  c_gen->add_option("--out", out_dir, "output directory")->required();
  c_gen->add_option("--grid", gen_grid, "existing grid description file");
  c_gen->add_option("--extent", gen_extents, "points per axis (repeatable)");
  c_gen->add_option("--spacing", gen_h, "lattice spacing");
  c_gen->add_option("--t-min", gen_tmin);
  c_gen->add_option("--m", gen_m, "levels per octave");
  c_gen->add_option("--J", gen_J, "level count");
  c_gen->add_option("--count", gen_count);
  c_gen->add_option("--seed", gen_seed);
  c_gen->add_option("--profile", gen_profile);
  c_gen->add_flag("--binary", gen_binary);
  c_gen->callback([&] {
    apply_threads();
    GridPtr grid;
    if (!gen_grid.empty()) {
      grid = read_grid(gen_grid);
    } else {
      if (gen_extents.empty())
        throw ConfigError("gen-corpus: give --grid or --extent");
      grid = HalfSpaceGrid::make(SpaceGrid::make(gen_extents, gen_h),
                                 TimeLevels::make(gen_tmin, gen_m, gen_J));
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory: " + out_dir);
    write_grid(out_dir + "/grid.tsg", *grid);
    std::vector<Profile> mix;
    if (gen_profile != "mixed") mix = {profile_from_string(gen_profile)};
    CorpusSpec spec = make_corpus_spec(*grid, gen_count, gen_seed, mix);
    std::vector<GridFunction> fs = sample_corpus(spec, grid);
    for (std::size_t i = 0; i < fs.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "fn_%03zu.tsf", i);
      write_function(out_dir + "/" + name, fs[i], "grid.tsg", gen_binary);
      std::printf("%s profile=%s\n", name,
                  profile_name(spec.functions[i].profile).c_str());
    }
  });

  // suite drivers
  std::string cfg_path;
  auto add_suite = [&](const char* name, const char* help,
                       std::vector<std::string> suites) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("--config", cfg_path, "key=value configuration file")
        ->required();
    sc->callback([&, suites] {
      apply_threads();
      rc = std::max(rc, run_selected(cfg_path, no_ts, suites));
    });
    return sc;
  };
  add_suite("identity-suite", "grid-exact identity checks", {"identity"});
  add_suite("embed-suite", "embedding ratio suites", {"hls", "zt"});
  add_suite("duality-suite", "pairing bound suites", {"duality"});
  add_suite("interp-suite", "interpolation characterization suites",
            {"gilbert", "tent", "tz"});
  add_suite("report", "run the suites selected in the config", {});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int r = app.exit(e);
    return r == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const SolveError& e) {
    std::fprintf(stderr, "solver failure: %s (best=%s gap=%s)\n", e.what(),
                 fmt17(e.best_value).c_str(), fmt17(e.gap_estimate).c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  }
  return rc;
}
