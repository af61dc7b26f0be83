#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "limitnet/binary_io.hpp"
#include "limitnet/bitstream.hpp"
#include "limitnet/image_io.hpp"
#include "limitnet/synthetic.hpp"

using namespace limitnet;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "limitnet_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(LIMITNET_CLI) + " " + args + " > " + (kDir / "stdout.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Value of a column in a two-line CSV report.
double report_value(const fs::path& p, const std::string& column) {
  std::istringstream in(slurp(p));
  std::string head, row;
  std::getline(in, head);
  std::getline(in, row);
  std::istringstream hs(head), rs(row);
  for (std::string h, v; std::getline(hs, h, ',') && std::getline(rs, v, ',');)
    if (h == column) return std::stod(v);
  FAIL("missing column " << column);
  return 0;
}

struct Fixture {
  Fixture() {
    fs::remove_all(kDir);
    fs::create_directories(kDir);
    write_pnm(kDir / "scene.ppm", synthetic_scene(64, 11));
  }
  fs::path path(const std::string& name) const { return kDir / name; }
  std::string arg(const std::string& name) const { return path(name).string(); }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "encode is deterministic and full decode is lossless in the latent") {
  REQUIRE(run("encode " + arg("scene.ppm") + " --out " + arg("a.lnbs")) == 0);
  REQUIRE(run("encode " + arg("scene.ppm") + " --out " + arg("b.lnbs")) == 0);
  CHECK(read_file(path("a.lnbs")) == read_file(path("b.lnbs")));
  CHECK(slurp(path("stdout.txt")).find("packets=192") != std::string::npos);

  REQUIRE(run("decode " + arg("a.lnbs") + " --original " + arg("scene.ppm") + " --out " + arg("r.ppm") +
              " --report " + arg("r.csv")) == 0);
  CHECK(report_value(path("r.csv"), "latent_mse") == 0.0);
  CHECK(report_value(path("r.csv"), "delivered_fraction") == 1.0);
  CHECK(report_value(path("r.csv"), "mse") < 1e-3);
  CHECK(fs::exists(path("r.ppm")));
}

TEST_CASE_FIXTURE(Fixture, "g = 0 and g = 0.2 emit different packet orders") {
  REQUIRE(run("encode " + arg("scene.ppm") + " --g 0 --out " + arg("g0.lnbs")) == 0);
  REQUIRE(run("encode " + arg("scene.ppm") + " --g 0.2 --out " + arg("g2.lnbs")) == 0);
  const OffloadBitstream a = OffloadBitstream::load(path("g0.lnbs"));
  const OffloadBitstream b = OffloadBitstream::load(path("g2.lnbs"));
  CHECK(header_priority_order(a.header) != header_priority_order(b.header));
  CHECK(a.packets != b.packets);
}

TEST_CASE_FIXTURE(Fixture, "transmit then decode through files") {
  REQUIRE(run("encode " + arg("scene.ppm") + " --entropy huffman --out " + arg("s.lnbs")) == 0);
  REQUIRE(run("transmit " + arg("s.lnbs") + " --loss 0.4 --seed 3 --deadline 60 --out " + arg("t1.csv")) == 0);
  REQUIRE(run("transmit " + arg("s.lnbs") + " --loss 0.4 --seed 3 --deadline 60 --out " + arg("t2.csv")) == 0);
  CHECK(slurp(path("t1.csv")) == slurp(path("t2.csv")));
  CHECK(slurp(path("t1.csv")).rfind("time,seq,outcome\n", 0) == 0);
  CHECK(slurp(path("t1.csv.delivered")) == slurp(path("t2.csv.delivered")));

  REQUIRE(run("decode " + arg("s.lnbs") + " --delivered " + arg("t1.csv.delivered") + " --original " +
              arg("scene.ppm") + " --report " + arg("p.csv")) == 0);
  const double frac = report_value(path("p.csv"), "delivered_fraction");
  CHECK(frac > 0.0);
  CHECK(frac < 1.0);
  CHECK(report_value(path("p.csv"), "latent_mse") > 0.0);

  // lossless link with a generous deadline delivers everything
  REQUIRE(run("transmit " + arg("s.lnbs") + " --loss 0 --deadline 36000 --out " + arg("t3.csv")) == 0);
  REQUIRE(run("decode " + arg("s.lnbs") + " --delivered " + arg("t3.csv.delivered") + " --report " + arg("q.csv")) == 0);
  CHECK(report_value(path("q.csv"), "latent_mse") == 0.0);
}

TEST_CASE_FIXTURE(Fixture, "errors map to exit codes") {
  CHECK(run("encode " + arg("missing.ppm") + " --out " + arg("x.lnbs")) != 0);
  std::ofstream(path("bad.ini")) << "[link]\nloss = 2\n";
  REQUIRE(run("encode " + arg("scene.ppm") + " --out " + arg("x.lnbs")) == 0);
  CHECK(run("transmit " + arg("x.lnbs") + " --config " + arg("bad.ini")) == 2);
  std::ofstream(path("junk.lnbs")) << "not a bitstream";
  CHECK(run("decode " + arg("junk.lnbs")) == 1);
}

TEST_CASE_FIXTURE(Fixture, "bd subcommand") {
  std::ofstream(path("ref.csv")) << "rate,quality\n100,30\n200,34\n400,37\n800,39\n";
  std::ofstream(path("tst.csv")) << "rate,quality\n200,30\n400,34\n800,37\n1600,39\n";
  REQUIRE(run("bd " + arg("ref.csv") + " " + arg("tst.csv")) == 0);
  CHECK(slurp(path("stdout.txt")).find("bd_rate_percent=100") != std::string::npos);
}
