#include "tslab/io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tslab/util.hpp"

namespace tslab {

namespace {

constexpr char kMagic[9] = "TSLABF01";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_num(const std::string& s, const std::string& where) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError(where + ": malformed number '" + s + "'");
  return v;
}

long long parse_int(const std::string& s, const std::string& where) {
  double v = parse_num(s, where);
  auto k = static_cast<long long>(v);
  if (static_cast<double>(k) != v)
    throw ConfigError(where + ": expected an integer, got '" + s + "'");
  return k;
}

// key=value fields on one line, e.g. a file header.
std::string field(const std::vector<std::string>& toks, const std::string& key,
                  const std::string& where) {
  std::string pre = key + "=";
  for (const auto& t : toks)
    if (t.rfind(pre, 0) == 0) return t.substr(pre.size());
  throw ConfigError(where + ": missing field '" + key + "'");
}

std::string resolve_ref(const std::string& from_file, const std::string& ref) {
  std::filesystem::path p(ref);
  if (p.is_absolute()) return ref;
  return (std::filesystem::path(from_file).parent_path() / p).string();
}

void append_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

std::uint64_t take_u64(const std::string& buf, std::size_t& pos,
                       const std::string& where) {
  if (pos + 8 > buf.size()) throw ConfigError(where + ": truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= std::uint64_t(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  pos += 8;
  return v;
}

void append_doubles(std::string& out, const std::vector<double>& v) {
  for (double x : v) append_u64(out, std::bit_cast<std::uint64_t>(x));
}

std::vector<double> take_doubles(const std::string& buf, std::size_t& pos,
                                 std::size_t n, const std::string& where) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = std::bit_cast<double>(take_u64(buf, pos, where));
  return v;
}

}  // namespace

void atomic_write_text(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + tmp);
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw ConfigError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ConfigError("cannot move " + tmp + " into place at " + path);
}

void write_grid(const std::string& path, const HalfSpaceGrid& grid) {
  const SpaceGrid& g = grid.space();
  const TimeLevels& tl = grid.levels();
  std::ostringstream out;
  out << "n=" << g.dim << "\n";
  out << "extents=";
  for (int a = 0; a < g.dim; ++a) out << (a ? " " : "") << g.extents[a];
  out << "\n";
  out << "h=" << fmt17(g.h) << "\n";
  out << "origin=";
  for (int a = 0; a < g.dim; ++a) out << (a ? " " : "") << fmt17(g.origin[a]);
  out << "\n";
  out << "t_min=" << fmt17(tl.t_min) << "\n";
  out << "m=" << tl.per_octave << "\n";
  out << "J=" << tl.count << "\n";
  atomic_write_text(path, out.str());
}

GridPtr read_grid(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  int n = 0, m = 0, J = 0;
  double h = 0.0, t_min = 0.0;
  std::vector<int> extents;
  std::vector<double> origin;
  bool have_n = false, have_ext = false, have_h = false, have_tmin = false,
       have_m = false, have_J = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ": expected key=value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key == "n") {
      n = int(parse_int(val, path));
      have_n = true;
    } else if (key == "extents") {
      for (const auto& t : split_ws(val))
        extents.push_back(int(parse_int(t, path)));
      have_ext = true;
    } else if (key == "h") {
      h = parse_num(val, path);
      have_h = true;
    } else if (key == "origin") {
      for (const auto& t : split_ws(val)) origin.push_back(parse_num(t, path));
    } else if (key == "t_min") {
      t_min = parse_num(val, path);
      have_tmin = true;
    } else if (key == "m") {
      m = int(parse_int(val, path));
      have_m = true;
    } else if (key == "J") {
      J = int(parse_int(val, path));
      have_J = true;
    } else {
      throw ConfigError(path + ": unknown grid key '" + key + "'");
    }
  }
  if (!(have_n && have_ext && have_h && have_tmin && have_m && have_J))
    throw ConfigError(path + ": grid file needs keys n, extents, h, t_min, m, J");
  if (n < 1 || int(extents.size()) != n)
    throw ConfigError(path + ": extents list must hold n entries");
  try {
    return HalfSpaceGrid::make(SpaceGrid::make(extents, h, origin),
                               TimeLevels::make(t_min, m, J));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_function(const std::string& path, const GridFunction& f,
                    const std::string& grid_ref, bool binary) {
  const std::int64_t ns = f.grid->space().num_points();
  const int J = f.grid->levels().count;
  if (binary) {
    std::string out;
    out.append(kMagic, 8);
    append_u64(out, grid_ref.size());
    out += grid_ref;
    append_u64(out, std::uint64_t(ns));
    append_u64(out, std::uint64_t(J));
    append_u64(out, f.is_complex() ? 1 : 0);
    append_doubles(out, f.re);
    if (f.is_complex()) append_doubles(out, f.im);
    atomic_write_text(path, out);
    return;
  }
  std::ostringstream out;
  out << "tslab-function grid=" << grid_ref
      << " complex=" << (f.is_complex() ? 1 : 0) << "\n";
  for (std::int64_t s = 0; s < ns; ++s) {
    for (int j = 0; j < J; ++j) {
      std::int64_t c = f.grid->cell(s, j);
      if (j) out << ' ';
      out << fmt17(f.re[c]);
      if (f.is_complex()) out << ' ' << fmt17(f.im[c]);
    }
    out << "\n";
  }
  atomic_write_text(path, out.str());
}

GridFunction read_function(const std::string& path) {
  std::string buf = read_file(path);
  if (buf.size() >= 8 && std::memcmp(buf.data(), kMagic, 8) == 0) {
    std::size_t pos = 8;
    std::uint64_t ref_len = take_u64(buf, pos, path);
    if (pos + ref_len > buf.size()) throw ConfigError(path + ": truncated file");
    std::string ref = buf.substr(pos, ref_len);
    pos += ref_len;
    std::uint64_t ns = take_u64(buf, pos, path);
    std::uint64_t J = take_u64(buf, pos, path);
    std::uint64_t flags = take_u64(buf, pos, path);
    GridPtr grid = read_grid(resolve_ref(path, ref));
    if (ns != std::uint64_t(grid->space().num_points()) ||
        J != std::uint64_t(grid->levels().count))
      throw ConfigError(path + ": cell counts disagree with the grid file");
    GridFunction f = GridFunction::zeros(grid);
    f.re = take_doubles(buf, pos, std::size_t(ns * J), path);
    if (flags & 1) f.im = take_doubles(buf, pos, std::size_t(ns * J), path);
    return f;
  }

  std::istringstream in(buf);
  std::string header;
  if (!std::getline(in, header)) throw ConfigError(path + ": empty file");
  auto toks = split_ws(header);
  if (toks.empty() || toks[0] != "tslab-function")
    throw ConfigError(path + ": not a function file");
  std::string ref = field(toks, "grid", path);
  bool complex = parse_int(field(toks, "complex", path), path) != 0;
  GridPtr grid = read_grid(resolve_ref(path, ref));
  const std::int64_t ns = grid->space().num_points();
  const int J = grid->levels().count;
  GridFunction f = GridFunction::zeros(grid);
  if (complex) f.ensure_complex();
  for (std::int64_t s = 0; s < ns; ++s) {
    for (int j = 0; j < J; ++j) {
      std::int64_t c = grid->cell(s, j);
      if (!(in >> f.re[c])) throw ConfigError(path + ": too few values");
      if (complex && !(in >> f.im[c]))
        throw ConfigError(path + ": too few values");
    }
  }
  double extra;
  if (in >> extra) throw ConfigError(path + ": trailing values");
  return f;
}

void write_decomposition(const std::string& dir, const AtomicDecomposition& d,
                         const std::string& grid_ref) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory: " + dir);
  std::ostringstream man;
  man << "tslab-decomposition p=" << fmt17(d.p) << " q=" << fmt17(d.q)
      << " s=" << fmt17(d.s) << " atoms=" << d.atoms.size()
      << " lp_sum=" << fmt17(d.lp_sum)
      << " residual_l2=" << fmt17(d.residual_l2) << "\n";
  for (std::size_t i = 0; i < d.atoms.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "atom_%04zu.tsf", i);
    man << i << " lambda=" << fmt17(d.lambda[i]) << " k=" << d.atom_k[i]
        << " center=" << d.atoms[i].ball.center
        << " radius=" << fmt17(d.atoms[i].ball.radius) << " file=" << name
        << "\n";
    write_function((std::filesystem::path(dir) / name).string(),
                   d.atoms[i].to_grid_function(), grid_ref);
  }
  atomic_write_text((std::filesystem::path(dir) / "manifest").string(),
                    man.str());
}

StoredDecomposition read_decomposition(const std::string& dir) {
  std::string man_path = (std::filesystem::path(dir) / "manifest").string();
  std::istringstream in(read_file(man_path));
  std::string header;
  if (!std::getline(in, header)) throw ConfigError(man_path + ": empty file");
  auto toks = split_ws(header);
  if (toks.empty() || toks[0] != "tslab-decomposition")
    throw ConfigError(man_path + ": not a decomposition manifest");
  StoredDecomposition out;
  out.p = parse_num(field(toks, "p", man_path), man_path);
  out.q = parse_num(field(toks, "q", man_path), man_path);
  out.s = parse_num(field(toks, "s", man_path), man_path);
  out.lp_sum = parse_num(field(toks, "lp_sum", man_path), man_path);
  out.residual_l2 = parse_num(field(toks, "residual_l2", man_path), man_path);
  auto count = parse_int(field(toks, "atoms", man_path), man_path);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    auto row = split_ws(line);
    out.lambda.push_back(parse_num(field(row, "lambda", man_path), man_path));
    out.atom_k.push_back(parse_int(field(row, "k", man_path), man_path));
    Atom a;
    a.ball.center = parse_int(field(row, "center", man_path), man_path);
    a.ball.radius = parse_num(field(row, "radius", man_path), man_path);
    a.p = out.p;
    a.q = out.q;
    a.s = out.s;
    GridFunction f = read_function(
        (std::filesystem::path(dir) / field(row, "file", man_path)).string());
    a.grid = f.grid;
    for (std::int64_t c = 0; c < f.cells(); ++c) {
      if (f.abs2(c) == 0.0) continue;
      a.cells.push_back(c);
      a.values.emplace_back(f.re[c], f.is_complex() ? f.im[c] : 0.0);
    }
    out.atoms.push_back(std::move(a));
  }
  if (static_cast<long long>(out.atoms.size()) != count)
    throw ConfigError(man_path + ": atom count disagrees with the header");
  return out;
}

std::string ratio_csv(const RatioReport& rep) {
  std::ostringstream out;
  out << "suite,params,index,numerator,denominator,ratio\n";
  std::size_t r = 0;
  for (std::size_t i = 0; i < rep.numerator.size(); ++i) {
    out << rep.suite << "," << rep.params << "," << i << ","
        << fmt17(rep.numerator[i]) << "," << fmt17(rep.denominator[i]) << ",";
    if (rep.denominator[i] > 0.0) out << fmt17(rep.ratio[r++]);
    out << "\n";
  }
  return out.str();
}

std::string ratio_summary(const RatioReport& rep) {
  std::ostringstream out;
  out << "suite=" << rep.suite << "\n";
  out << "params=" << rep.params << "\n";
  out << "functions=" << rep.numerator.size() << "\n";
  out << "excluded_zero=" << rep.excluded_zero << "\n";
  out << "min_ratio=" << fmt17(rep.min_ratio) << "\n";
  out << "median_ratio=" << fmt17(rep.median_ratio) << "\n";
  out << "max_ratio=" << fmt17(rep.max_ratio) << "\n";
  out << "refinement_stable=" << (rep.refinement_stable ? 1 : 0) << "\n";
  return out.str();
}

std::string kcurve_csv(const KCurve& kc) {
  std::ostringstream out;
  out << "t,K\n";
  for (std::size_t i = 0; i < kc.t.size(); ++i)
    out << fmt17(kc.t[i]) << "," << fmt17(kc.K[i]) << "\n";
  return out.str();
}

std::string identity_csv(const IdentityReport& rep) {
  std::ostringstream out;
  out << "identity,max_rel_err,tolerance\n";
  out << "fubini," << fmt17(rep.fubini_err) << "," << fmt17(rep.tolerance)
      << "\n";
  out << "isometry," << fmt17(rep.isometry_err) << "," << fmt17(rep.tolerance)
      << "\n";
  out << "convex," << fmt17(rep.convex_err) << "," << fmt17(rep.tolerance)
      << "\n";
  out << "adjoint," << fmt17(rep.adjoint_err) << "," << fmt17(rep.tolerance)
      << "\n";
  return out.str();
}

std::string identity_summary(const IdentityReport& rep) {
  std::ostringstream out;
  out << "suite=identity\n";
  out << "fubini_err=" << fmt17(rep.fubini_err) << "\n";
  out << "isometry_err=" << fmt17(rep.isometry_err) << "\n";
  out << "convex_err=" << fmt17(rep.convex_err) << "\n";
  out << "adjoint_err=" << fmt17(rep.adjoint_err) << "\n";
  out << "tolerance=" << fmt17(rep.tolerance) << "\n";
  out << "pass=" << (rep.pass ? 1 : 0) << "\n";
  return out.str();
}

bool Config::has(const std::string& key) const {
  for (auto it = items.rbegin(); it != items.rend(); ++it)
    if (it->first == key) return true;
  return false;
}

std::string Config::get(const std::string& key,
                        const std::string& fallback) const {
  for (auto it = items.rbegin(); it != items.rend(); ++it)
    if (it->first == key) return it->second;
  return fallback;
}

double Config::get_num(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return parse_num(get(key), "config key " + key);
}

Config read_config(const std::string& path) {
  Config cfg;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ": expected key=value, got '" + line + "'");
    cfg.items.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace tslab
