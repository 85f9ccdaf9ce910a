#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <sys/wait.h>

#ifndef TWISTORB_CLI_PATH
#error "TWISTORB_CLI_PATH must point at the twistorb executable"
#endif

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, bool with_stderr = false) {
  const std::string cmd = std::string(TWISTORB_CLI_PATH) + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  Run r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

nlohmann::json run_json(const std::string& args) {
  const Run r = run(args);
  INFO(args);
  REQUIRE(r.code == 0);
  return nlohmann::json::parse(r.out);
}

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = "/tmp/twistorb_test_cli_" + name;
  std::ofstream(path) << text;
  return path;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("records carry the shared metadata") {
  for (const std::string cmd : {"verify --group sl3r", "decompose --group sl2c_real", "centralizer",
                                "dirac --rep kchar:1 --t 1", "selftest"}) {
    const nlohmann::json j = run_json(cmd);
    CHECK(j.contains("value"));
    CHECK(j.contains("quad_error"));
    CHECK(j.contains("branch_failures"));
    CHECK(j["B_scale"].get<double>() == 1.0);
    CHECK(j["version"].get<std::string>() == "0.1.0");
    CHECK(j["conventions"].contains("heat"));
  }
  CHECK(run_json("verify --b-scale 2.5")["B_scale"].get<double>() == 2.5);
}

TEST_CASE("numerical results match closed forms") {
  // Dirac supertrace of the identity class of sl2r with K-character n is n / (2 pi) for every t.
  const nlohmann::json d = run_json("dirac --group sl2r --rep kchar:3 --t 0.7");
  CHECK(d["value"].get<double>() == doctest::Approx(3.0 / (2.0 * kPi)).epsilon(1e-10));
  const nlohmann::json h = run_json("decompose --group sl2r --gamma [2,0,0,0.5]");
  CHECK(h["value"].get<double>() == doctest::Approx(std::sqrt(2.0) * std::log(2.0)).epsilon(1e-10));
  CHECK_FALSE(h["elliptic"].get<bool>());
  const nlohmann::json w = run_json("w-invariant --group sl2c_real --lambda 1");
  CHECK(w["value"].get<double>() == doctest::Approx(1.0 / (std::sqrt(2.0) * kPi)).epsilon(1e-6));
}

TEST_CASE("grids render as csv") {
  const Run r = run("dirac --rep kchar:2 --t-grid 0.1,10,5 --out csv");
  REQUIRE(r.code == 0);
  int lines = 0;
  for (char c : r.out) lines += c == '\n';
  CHECK(lines == 6);
  CHECK(r.out.rfind("t,value,imag,quad_error\n", 0) == 0);
  const Run e = run("w-invariant --group sl2c_real --t-grid 0.01,20,401 --out csv");
  REQUIRE(e.code == 0);
  CHECK(e.out.rfind("t,e_t,d_t\n", 0) == 0);
}

TEST_CASE("exit codes separate input errors from numeric failures") {
  CHECK(run("").code == 1);
  CHECK(run("orbital --no-such-flag").code == 1);
  CHECK(run("verify --group so5").code == 1);
  CHECK(run("decompose --gamma [1,2,3]").code == 1);
  CHECK(run("orbital --rep sym:x").code == 1);
  CHECK(run("orbital --t -1").code == 1);
  CHECK(run("w-invariant --group sl2r").code == 1);  // degenerate orbit
  CHECK(run("index").code == 1);                     // missing ledger
  CHECK(run("--help").code == 0);
  const Run s = run("selftest --inject torsion", true);
  CHECK(s.code == 2);
  CHECK(s.out.find("FAIL [torsion]") != std::string::npos);
}

TEST_CASE("config files feed subcommand options") {
  const std::string good = write_temp("good.cfg", "# dirac settings\ngroup = sl2r\nrep = kchar:4\nt = 2\n");
  const nlohmann::json j = run_json("dirac --config " + good);
  CHECK(j["value"].get<double>() == doctest::Approx(4.0 / (2.0 * kPi)).epsilon(1e-10));
  CHECK(j["t"].get<double>() == 2.0);
  CHECK(run_json("dirac --config " + good + " --t 0.25")["t"].get<double>() == 0.25);
  CHECK(run("dirac --config " + write_temp("bad.cfg", "colour = red\n")).code == 1);
  CHECK(run("dirac --config " + write_temp("broken.cfg", "just words\n")).code == 1);
  CHECK(run("dirac --config /nonexistent/path.cfg").code == 1);
}

TEST_CASE("ledger commands") {
  const double vol = 4.0 * kPi;
  char buf[256];
  std::snprintf(buf, sizeof buf, "group=sl2r\nid=e\ngamma=[1,0,0,1]\nvolume=%.17g\nelliptic=true\n", vol);
  const std::string ledger = write_temp("ledger.txt", buf);
  const nlohmann::json idx = run_json("index --ledger " + ledger + " --rep kchar:2");
  CHECK(idx["value"].get<double>() == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(idx["nearest_integer"].get<long>() == 4);
  const nlohmann::json tr = run_json("trace --ledger " + ledger + " --t 0.5 --counting 1,1,2");
  CHECK(tr["contributions"].size() == 1);
  CHECK(tr["tail_bound"].is_number());
  CHECK(run("trace --ledger " + write_temp("dup.txt", std::string(buf) + "id=e\n")).code == 1);
}

TEST_CASE("output file option") {
  const std::string path = "/tmp/twistorb_test_cli_out.json";
  std::remove(path.c_str());
  const Run r = run("verify --file " + path);
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  CHECK(nlohmann::json::parse(f)["ok"].get<bool>());
}
