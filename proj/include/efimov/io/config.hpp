#pragma once

#include "efimov/errors.hpp"
#include "efimov/model.hpp"
#include "efimov/numerics/roots.hpp"
#include "efimov/radial.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace efimov::io {

// Raised for anything wrong in a config file; line is 0 when the problem
// is not tied to one line (e.g. a missing key).
class ConfigError : public Error {
public:
  ConfigError(const std::string &file, int line, const std::string &what)
      : Error(ErrorCode::Config, locate(file, line) + what), line_(line) {}
  int line() const { return line_; }

private:
  static std::string locate(const std::string &file, int line) {
    std::string s = file.empty() ? "config" : file;
    if (line > 0)
      s += ":" + std::to_string(line);
    return s + ": ";
  }
  int line_;
};

struct IniEntry {
  std::string value;
  int line = 0;
};

struct IniSection {
  std::map<std::string, IniEntry> entries;
  int line = 0;
};

struct IniDocument {
  std::string file;
  std::map<std::string, IniSection> sections;
};

namespace detail {

inline std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// '#' or ';' starts a comment at line start or after whitespace.
inline std::string strip_comment(const std::string &s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if ((s[i] == '#' || s[i] == ';') &&
        (i == 0 || std::isspace(static_cast<unsigned char>(s[i - 1]))))
      return s.substr(0, i);
  return s;
}

} // namespace detail

// INI text: [section] headers, key = value lines, and optionally
// key=value tokens on the header line itself.
inline IniDocument parse_ini(const std::string &text, const std::string &file = {}) {
  IniDocument doc;
  doc.file = file;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  IniSection *cur = nullptr;
  std::string cur_name;
  auto put = [&](const std::string &kv, int line) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError(file, line, "expected key = value, got '" + kv + "'");
    const std::string key = detail::lower(detail::trim(kv.substr(0, eq)));
    const std::string val = detail::trim(kv.substr(eq + 1));
    if (key.empty())
      throw ConfigError(file, line, "empty key");
    if (!cur)
      throw ConfigError(file, line, "key '" + key + "' outside any [section]");
    if (cur->entries.count(key))
      throw ConfigError(file, line,
                        "duplicate key '" + key + "' in [" + cur_name + "]");
    cur->entries[key] = {val, line};
  };
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = detail::trim(detail::strip_comment(raw));
    if (line.empty())
      continue;
    if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string::npos)
        throw ConfigError(file, lineno, "unterminated section header");
      cur_name = detail::lower(detail::trim(line.substr(1, close - 1)));
      if (cur_name.empty())
        throw ConfigError(file, lineno, "empty section name");
      if (doc.sections.count(cur_name))
        throw ConfigError(file, lineno, "duplicate section [" + cur_name + "]");
      cur = &doc.sections[cur_name];
      cur->line = lineno;
      std::istringstream rest(line.substr(close + 1));
      std::string tok;
      while (rest >> tok)
        put(tok, lineno);
      continue;
    }
    put(line, lineno);
  }
  return doc;
}

// Typed access with line-numbered errors.
class SectionReader {
public:
  SectionReader(const IniDocument &doc, const std::string &name)
      : doc_(doc), name_(name) {
    auto it = doc.sections.find(name);
    if (it != doc.sections.end())
      sec_ = &it->second;
  }

  bool present() const { return sec_ != nullptr; }
  bool has(const std::string &key) const {
    return sec_ && sec_->entries.count(key);
  }

  std::string text(const std::string &key) const { return entry(key).value; }
  std::string text(const std::string &key, const std::string &def) const {
    return has(key) ? text(key) : def;
  }

  double number(const std::string &key) const {
    const auto &e = entry(key);
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(e.value, &pos);
    } catch (const std::exception &) {
      pos = 0;
    }
    if (pos == 0 || pos != e.value.size() || !std::isfinite(v))
      throw ConfigError(doc_.file, e.line,
                        "key '" + key + "' expects a number, got '" + e.value + "'");
    return v;
  }
  double number(const std::string &key, double def) const {
    return has(key) ? number(key) : def;
  }

  int integer(const std::string &key) const {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 1e9)
      throw ConfigError(doc_.file, line(key),
                        "key '" + key + "' expects an integer");
    return static_cast<int>(v);
  }
  int integer(const std::string &key, int def) const {
    return has(key) ? integer(key) : def;
  }

  std::vector<std::string> list(const std::string &key,
                                const std::vector<std::string> &def) const {
    if (!has(key))
      return def;
    std::vector<std::string> out;
    std::stringstream ss(text(key));
    std::string item;
    while (std::getline(ss, item, ','))
      if (auto t = detail::lower(detail::trim(item)); !t.empty())
        out.push_back(t);
    return out;
  }

  int line(const std::string &key) const {
    return has(key) ? sec_->entries.at(key).line : (sec_ ? sec_->line : 0);
  }

  [[noreturn]] void error(const std::string &key, const std::string &what) const {
    throw ConfigError(doc_.file, line(key), what);
  }

  void reject_unknown(const std::set<std::string> &allowed) const {
    if (!sec_)
      return;
    for (const auto &[k, e] : sec_->entries)
      if (!allowed.count(k))
        throw ConfigError(doc_.file, e.line,
                          "unknown key '" + k + "' in [" + name_ + "]");
  }

private:
  const IniEntry &entry(const std::string &key) const {
    if (!has(key))
      throw ConfigError(doc_.file, sec_ ? sec_->line : 0,
                        "missing required key '" + key + "' in [" + name_ + "]");
    return sec_->entries.at(key);
  }

  const IniDocument &doc_;
  std::string name_;
  const IniSection *sec_ = nullptr;
};

enum class Spacing { Log, Linear };

struct PotentialConfig {
  std::string kind;
  Potential potential;
  std::optional<double> tune_a; // target scattering length, r0 units
  // kind = expansion: low-energy parameters given directly, no potential
  std::optional<TwoBodyParams> params;
};

struct ScanConfig {
  double mu = 1.0;
  double rho_min = 2.0;
  double rho_max = 2000.0;
  int rho_points = 40;
  Spacing spacing = Spacing::Log;
  std::vector<std::string> models{"rigorous"};
  int branch = 0;
  std::string output;
  std::vector<std::string> veff_forms{"numerical"};
  double region_a_c = -1.25;
};

struct Tolerances {
  double radial_step = 0.0625; // largest radial element, r0 units
  double root_abs = 1e-13;
  double fd_step = 1e-3;       // Q step as a fraction of rho
  std::string scheme = "spectral";
  int order = 20;
  int grid_n = 4000;
};

struct RunConfig {
  std::string path;
  std::string hash;
  PotentialConfig potential;
  ScanConfig scan;
  Tolerances tolerances;

  std::vector<double> rho_grid() const {
    std::vector<double> g(scan.rho_points);
    const int n = scan.rho_points;
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / (n - 1);
      g[i] = scan.spacing == Spacing::Log
                 ? scan.rho_min * std::pow(scan.rho_max / scan.rho_min, t)
                 : scan.rho_min + t * (scan.rho_max - scan.rho_min);
    }
    g.front() = scan.rho_min;
    g.back() = scan.rho_max;
    return g;
  }

  RadialOptions radial_options() const {
    RadialOptions o;
    o.max_step = tolerances.radial_step;
    return o;
  }
};

// First 12 hex digits of the SHA-256 of the bytes.
inline std::string content_hash(const std::string &bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static const char *hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < 6 && i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

// Two-column CSV (header line, then r,V rows) for tabulated potentials.
inline Potential read_tabulated(const std::filesystem::path &path,
                                const std::string &cfg, int cfg_line) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(cfg, cfg_line, "cannot open potential table '" +
                                         path.string() + "'");
  std::vector<double> r, V;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#')
      continue;
    const auto c = line.find(',');
    if (c == std::string::npos)
      throw ConfigError(path.string(), n, "expected 'r,V'");
    try {
      std::size_t p1 = 0, p2 = 0;
      const std::string a = detail::trim(line.substr(0, c));
      const std::string b = detail::trim(line.substr(c + 1));
      const double x = std::stod(a, &p1), y = std::stod(b, &p2);
      if (p1 != a.size() || p2 != b.size())
        throw std::invalid_argument("trailing");
      r.push_back(x);
      V.push_back(y);
    } catch (const std::exception &) {
      if (r.empty() && V.empty() && n == 1)
        continue; // header
      throw ConfigError(path.string(), n, "malformed number in '" + line + "'");
    }
  }
  try {
    return make_tabulated(std::move(r), std::move(V));
  } catch (const Error &e) {
    throw ConfigError(path.string(), 0, e.what());
  }
}

// Moves the depth parameter (D or V0) so that the scattering length hits
// the target; the bracket widens until the sign changes.
inline Potential tune_scattering_length(const Potential &p, double a_target,
                                        const RadialOptions &opt = {}) {
  double *depth_param = nullptr;
  Potential q = p;
  if (auto *s = std::get_if<SechBarrier>(&q.shape))
    depth_param = &s->D;
  else if (auto *w = std::get_if<SquareWell>(&q.shape))
    depth_param = &w->V0;
  else
    fail(ErrorCode::InvalidArgument, "tune_a needs a sech_barrier or square_well");
  const double base = *depth_param;
  const double target = 1.0 / a_target;
  auto f = [&](double d) {
    Potential t = q;
    if (auto *s = std::get_if<SechBarrier>(&t.shape))
      s->D = d;
    else
      std::get<SquareWell>(t.shape).V0 = d;
    return zero_energy_solution(t, opt).inv_a - target;
  };
  const double f0 = f(base);
  for (double w = 1e-6; w < 0.2; w *= 4.0) {
    for (double d : {base * (1.0 - w), base * (1.0 + w)}) {
      if ((f(d) > 0) != (f0 > 0)) {
        *depth_param = numerics::find_root(f, std::min(base, d), std::max(base, d),
                                           1e-15 * std::abs(base));
        return q;
      }
    }
  }
  fail(ErrorCode::NoRootInBracket, "could not tune the scattering length");
}

inline PotentialConfig read_potential(const IniDocument &doc,
                                      const std::filesystem::path &base_dir) {
  SectionReader s(doc, "potential");
  if (!s.present())
    throw ConfigError(doc.file, 0, "missing section [potential]");
  PotentialConfig pc;
  pc.kind = detail::lower(s.text("kind"));
  if (pc.kind == "sech_barrier") {
    s.reject_unknown({"kind", "r0", "d", "b", "chi", "cutoff", "tune_a"});
    const double r0 = s.number("r0");
    if (!(r0 > 0.0))
      s.error("r0", "r0 must be positive");
    const double cutoff = s.number("cutoff", 1.0);
    if (!(cutoff > 0.0))
      s.error("cutoff", "cutoff must be positive");
    pc.potential = make_sech_barrier(s.number("d"), s.number("b"), s.number("chi"),
                                     r0, cutoff);
  } else if (pc.kind == "square_well") {
    s.reject_unknown({"kind", "r0", "v0", "resonance", "tune_a"});
    const double r0 = s.number("r0");
    if (!(r0 > 0.0))
      s.error("r0", "r0 must be positive");
    double V0 = 0.0;
    if (s.has("resonance")) {
      // n-th zero-energy resonance: sqrt(-V0) r0 = (2n - 1) pi/2
      const int n = s.integer("resonance");
      if (n < 1)
        s.error("resonance", "resonance index must be >= 1");
      if (s.has("v0"))
        s.error("v0", "give either v0 or resonance, not both");
      const double k = (2 * n - 1) * std::numbers::pi / (2.0 * r0);
      V0 = -k * k;
    } else {
      V0 = s.number("v0");
    }
    pc.potential = make_square_well(V0, r0);
  } else if (pc.kind == "tabulated") {
    s.reject_unknown({"kind", "file", "r0"});
    auto file = std::filesystem::path(s.text("file"));
    if (file.is_relative())
      file = base_dir / file;
    pc.potential = read_tabulated(file, doc.file, s.line("file"));
    if (s.has("r0") && std::abs(s.number("r0") - pc.potential.r0) >
                           1e-12 * pc.potential.r0)
      s.error("r0", "r0 disagrees with the last radius of the table");
  } else if (pc.kind == "expansion") {
    s.reject_unknown({"kind", "r0", "a", "inv_a", "re", "rv", "range_correction"});
    const double r0 = s.number("r0");
    if (!(r0 > 0.0))
      s.error("r0", "r0 must be positive");
    if (s.has("a") == s.has("inv_a"))
      s.error("a", "give exactly one of a, inv_a");
    if (s.has("rv") == s.has("range_correction"))
      s.error("rv", "give exactly one of rv, range_correction");
    double inv_a = 0.0;
    if (s.has("a")) {
      if (s.number("a") == 0.0)
        s.error("a", "a must be nonzero");
      inv_a = 1.0 / s.number("a");
    } else {
      inv_a = s.number("inv_a");
    }
    const double re = s.number("re");
    // R0 = Re nu0^2/2 - Rv
    const double rv = s.has("rv") ? s.number("rv")
                                  : r0_from(re, 0.0) - s.number("range_correction");
    pc.params = make_params(inv_a, re, rv);
    pc.potential = make_zero_potential(r0);
  } else if (pc.kind == "zero") {
    s.reject_unknown({"kind", "r0"});
    pc.potential = make_zero_potential(s.number("r0"));
  } else {
    s.error("kind", "unknown potential kind '" + pc.kind +
                        "' (sech_barrier, square_well, tabulated, expansion, zero)");
  }
  if (s.has("tune_a")) {
    if (pc.params)
      s.error("tune_a", "tune_a needs a potential");
    const double a = s.number("tune_a");
    if (a == 0.0)
      s.error("tune_a", "tune_a must be nonzero");
    pc.tune_a = a;
  }
  return pc;
}

inline ScanConfig read_scan(const IniDocument &doc) {
  SectionReader s(doc, "scan");
  s.reject_unknown({"mu", "rho_min", "rho_max", "rho_points", "rho_spacing", "models",
                    "branch", "output", "veff_forms", "region_a_c"});
  ScanConfig c;
  c.mu = s.number("mu", c.mu);
  if (!(c.mu > 0.0))
    s.error("mu", "mu must be positive");
  c.rho_min = s.number("rho_min", c.rho_min);
  c.rho_max = s.number("rho_max", c.rho_max);
  if (!(c.rho_min > 0.0))
    s.error("rho_min", "rho_min must be positive");
  if (!(c.rho_min < c.rho_max))
    s.error("rho_max", "rho_min must be below rho_max");
  c.rho_points = s.integer("rho_points", c.rho_points);
  if (c.rho_points < 2)
    s.error("rho_points", "rho_points must be >= 2");
  const std::string sp = detail::lower(s.text("rho_spacing", "log"));
  if (sp == "log")
    c.spacing = Spacing::Log;
  else if (sp == "linear")
    c.spacing = Spacing::Linear;
  else
    s.error("rho_spacing", "rho_spacing must be log or linear");
  c.models = s.list("models", c.models);
  static const std::set<std::string> known{"rigorous", "zr_a", "zr_a_re",
                                           "zr_a_re_rv", "direct"};
  for (const auto &m : c.models)
    if (!known.count(m))
      s.error("models", "unknown model '" + m + "'");
  if (c.models.empty())
    s.error("models", "models must not be empty");
  c.branch = s.integer("branch", c.branch);
  if (c.branch < 0)
    s.error("branch", "branch must be >= 0");
  c.output = s.text("output", "");
  c.veff_forms = s.list("veff_forms", c.veff_forms);
  static const std::set<std::string> forms{"numerical", "region_a", "region_b", "box",
                                           "atom_dimer"};
  for (const auto &f : c.veff_forms)
    if (!forms.count(f))
      s.error("veff_forms", "unknown veff form '" + f + "'");
  c.region_a_c = s.number("region_a_c", c.region_a_c);
  return c;
}

inline Tolerances read_tolerances(const IniDocument &doc) {
  SectionReader s(doc, "tolerances");
  s.reject_unknown({"radial_step", "root_abs", "fd_step", "scheme", "order", "grid_n"});
  Tolerances t;
  t.radial_step = s.number("radial_step", t.radial_step);
  t.root_abs = s.number("root_abs", t.root_abs);
  t.fd_step = s.number("fd_step", t.fd_step);
  for (const char *k : {"radial_step", "root_abs", "fd_step"})
    if (!(s.number(k, 1.0) > 0.0))
      s.error(k, std::string(k) + " must be positive");
  t.scheme = detail::lower(s.text("scheme", t.scheme));
  if (t.scheme != "spectral" && t.scheme != "fd")
    s.error("scheme", "scheme must be spectral or fd");
  t.order = s.integer("order", t.order);
  if (t.order < 4)
    s.error("order", "order must be >= 4");
  t.grid_n = s.integer("grid_n", t.grid_n);
  if (t.grid_n < 2)
    s.error("grid_n", "grid_n must be >= 2");
  return t;
}

// Parses and validates; tune_a is applied here so every command sees the
// calibrated potential.
inline RunConfig parse_config(const std::string &text, const std::string &path = {},
                              const std::filesystem::path &base_dir = {}) {
  const auto doc = parse_ini(text, path);
  for (const auto &[name, sec] : doc.sections)
    if (name != "potential" && name != "scan" && name != "tolerances")
      throw ConfigError(path, sec.line, "unknown section [" + name + "]");
  RunConfig rc;
  rc.path = path;
  rc.hash = content_hash(text);
  rc.potential = read_potential(doc, base_dir);
  rc.scan = read_scan(doc);
  rc.tolerances = read_tolerances(doc);
  if (rc.potential.tune_a)
    rc.potential.potential = tune_scattering_length(
        rc.potential.potential, *rc.potential.tune_a, rc.radial_options());
  return rc;
}

inline RunConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError(path.string(), 0, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.parent_path());
}

} // namespace efimov::io
