#include "efimov/cli/commands.hpp"

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace efimov;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = EFIMOV_CONFIG_DIR;

fs::path scratch(const std::string &name, const std::string &body) {
  const auto dir = fs::temp_directory_path() / "efimov_kit_tests";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << body;
  return p;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::string &args) {
  const auto dir = fs::temp_directory_path() / "efimov_kit_tests";
  fs::create_directories(dir);
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + EFIMOV_KIT_BIN + "\" " + args + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int st = std::system(cmd.c_str());
  auto slurp = [](const fs::path &p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  };
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(out), slurp(err)};
}

std::string config_error(const std::string &text) {
  try {
    io::parse_config(text, "t.ini");
  } catch (const io::ConfigError &e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST_CASE("ini: keys on the header line and comments") {
  const auto d = io::parse_ini("[potential] kind=square_well r0=2 ; note\nV0 = -3 # depth\n"
                               "\n[scan]\nRHO_MIN = 4\n",
                               "x.ini");
  const auto &pot = d.sections.at("potential");
  CHECK(pot.entries.at("kind").value == "square_well");
  CHECK(pot.entries.at("r0").value == "2");
  CHECK(pot.entries.at("v0").value == "-3");
  CHECK(pot.entries.at("v0").line == 2);
  CHECK(d.sections.at("scan").entries.at("rho_min").value == "4");
  CHECK(d.sections.at("scan").line == 4);
}

TEST_CASE("ini: errors carry line numbers") {
  CHECK_THAT(config_error("[potential]\nkind = square_well\nr0 = 1\nv0 = -1x\n"),
             ContainsSubstring("t.ini:4:"));
  CHECK_THAT(config_error("r0 = 1\n"), ContainsSubstring("t.ini:1:"));
  CHECK_THAT(config_error("[potential]\nkind = zero\nr0 = 1\nr0 = 2\n"),
             ContainsSubstring("t.ini:4:"));
  CHECK_THAT(config_error("[potential]\nkind = zero\nr0 = 1\n[bogus]\n"),
             ContainsSubstring("bogus"));
  CHECK_THAT(config_error("[potential]\nkind = zero\nr0 = 1\ncolour = 3\n"),
             ContainsSubstring("t.ini:4:"));
  CHECK_THAT(config_error("[potential]\nkind = zero\nr0 = 1\n[scan]\nrho_min = 5\nrho_max = 4\n"),
             ContainsSubstring("rho"));
  CHECK_THAT(config_error("[potential]\nkind = zero\nr0 = 1\n[scan]\nmodels = rigorous, magic\n"),
             ContainsSubstring("magic"));
}

TEST_CASE("ini: missing r0 names the key") {
  const auto e = config_error("[potential]\nkind = square_well\nv0 = -1\n");
  CHECK_THAT(e, ContainsSubstring("r0"));
  CHECK_THAT(e, ContainsSubstring("t.ini:1:"));
}

TEST_CASE("config: potential kinds") {
  const auto c = io::parse_config("[potential] kind=square_well r0=2 resonance=1\n");
  CHECK(c.potential.kind == "square_well");
  CHECK(c.potential.potential.r0 == 2.0);
  const auto t = low_energy_params(c.potential.potential);
  CHECK(std::abs(t.inv_a) < 1e-9);
  const auto e = io::parse_config("[potential]\nkind = expansion\nr0 = 1\na = 1e7\nre = -1\n"
                                  "range_correction = -10\n");
  REQUIRE(e.potential.params);
  CHECK_THAT(e.potential.params->R0, WithinRel(-10.0, 1e-12));
  CHECK_THAT(e.potential.params->inv_a, WithinRel(1e-7, 1e-12));
}

TEST_CASE("config: tuning the scattering length") {
  const auto c = io::load_config(kConfigs / "barrier.ini");
  const auto t = low_energy_params(c.potential.potential, c.radial_options());
  CHECK_THAT(t.a(), WithinRel(556.88, 1e-6));
}

TEST_CASE("config: grid and hash") {
  const std::string text = "[potential]\nkind = zero\nr0 = 1\n[scan]\nrho_min = 1\nrho_max = 100\n"
                           "rho_points = 3\n";
  const auto c = io::parse_config(text);
  const auto g = c.rho_grid();
  REQUIRE(g.size() == 3);
  CHECK(g[0] == 1.0);
  CHECK_THAT(g[1], WithinRel(10.0, 1e-14));
  CHECK(g[2] == 100.0);
  CHECK(c.hash.size() == 12);
  CHECK(c.hash == io::parse_config(text).hash);
  CHECK(c.hash != io::parse_config(text + "\n# x\n").hash);
  // SHA-256("abc")
  CHECK(io::content_hash("abc") == "ba7816bf8f01");
}

TEST_CASE("csv: numbers, quoting, header") {
  CHECK(io::format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(io::format_number(-1234567.891234567) == "-1234567.89123");
  CHECK(io::format_number(1e-30) == "1e-30");
  CHECK(io::format_number(-0.0) == "0");
  CHECK(io::quote_field("plain") == "plain");
  CHECK(io::quote_field("a,b") == "\"a,b\"");
  CHECK(io::quote_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  io::CsvTable t;
  t.header = {"x", "note"};
  t.add({2.5, std::string("a\nb")});
  t.add({std::monostate{}, std::string("ok")});
  CHECK(io::to_csv(t, "scan", "abc") ==
        "# efimov-kit 0.3.0 scan abc\r\nx,note\r\n2.5,\"a\nb\"\r\n,ok\r\n");
  CHECK_THROWS(t.add({1.0}));
}

TEST_CASE("exit codes from success counts") {
  CHECK(cli::exit_for(10, 10) == 0);
  CHECK(cli::exit_for(9, 10) == 0);
  CHECK(cli::exit_for(8, 10) == 3);
  CHECK(cli::exit_for(0, 10) == 4);
}

TEST_CASE("binary: constants are deterministic") {
  const auto a = run("constants"), b = run("constants");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK_THAT(a.out, ContainsSubstring("# efimov-kit 0.3.0 constants -"));
  CHECK_THAT(a.out, ContainsSubstring("s0,1.0062378251,"));
}

TEST_CASE("binary: usage and config errors exit 2") {
  const auto bad = scratch("no_r0.ini", "[potential]\nkind = square_well\nv0 = -1\n");
  const auto r = run("params -c \"" + bad.string() + "\"");
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("r0"));
  CHECK(run("params").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("params -c /nonexistent/file.ini").code == 2);
  CHECK(run("feshbach --dB 0 --dmu 2 --abg 100 --mass 7").code == 2);
}

TEST_CASE("binary: params from a sample config") {
  const auto r = run("params -c \"" + (kConfigs / "square_well.ini").string() + "\"");
  REQUIRE(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("Re,1,"));
  CHECK_THAT(r.out, ContainsSubstring("Rv,0.41123351671"));
}

TEST_CASE("binary: two-point scan writes two rows") {
  const auto cfg = scratch("two.ini", "[potential] kind=square_well r0=1 resonance=1\n"
                                      "[scan] rho_min=10 rho_max=20 rho_points=2 models=zr_a_re_rv\n");
  const auto out = fs::temp_directory_path() / "efimov_kit_tests" / "two.csv";
  const auto r = run("scan -c \"" + cfg.string() + "\" -o \"" + out.string() + "\"");
  REQUIRE(r.code == 0);
  std::ifstream f(out, std::ios::binary);
  std::string line;
  int n = 0;
  while (std::getline(f, line))
    ++n;
  CHECK(n == 4); // comment, header, two rows
}

TEST_CASE("scan: rigorous points below rho_c fail softly") {
  auto c = io::parse_config("[potential] kind=sech_barrier r0=1 d=-138.27 b=128.49 chi=4.6667 cutoff=1\n"
                            "[scan] rho_min=1.9 rho_max=20 rho_points=20 models=rigorous\n");
  const auto r = cli::cmd_scan(c);
  CHECK(r.exit_code == 0); // only rho = 1.9 sits below rho_c = 2
  c.scan.rho_min = 0.5;
  c.scan.rho_max = 3.0;
  c.scan.rho_points = 6;
  CHECK(cli::cmd_scan(c).exit_code == 3);
}

TEST_CASE("fig1 configs: plateau near lambda0 between R0 and a") {
  const auto c = io::load_config(kConfigs / "fig1_r0_0.1.ini");
  const auto r = cli::cmd_scan(c);
  REQUIRE(r.exit_code == 0);
  const auto &rows = r.table.rows;
  int hits = 0;
  for (const auto &row : rows) {
    const double rho = std::get<double>(row[0]);
    if (rho > 10.0 && rho < 1e5) {
      CHECK_THAT(std::get<double>(row[1]), WithinAbs(efimov_constant().lambda0, 0.05));
      ++hits;
    }
  }
  CHECK(hits > 10);
}
