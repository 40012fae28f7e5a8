#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <unistd.h>

#include "herit/cli.hpp"
#include "herit/io.hpp"

namespace fs = std::filesystem;
using herit::cli::dispatch;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

class Scratch {
 public:
  Scratch() : dir_(fs::temp_directory_path() / ("herit_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  std::string operator/(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
};

std::size_t count_lines(const std::string& s, char skip = '#') {
  std::istringstream in(s);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) n += !line.empty() && line[0] != skip;
  return n;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"simulate", "--out", "x.bin", "--bogus", "1"}).code == 2);
  CHECK(run({"simulate"}).code == 2);
  CHECK(run({"estimate", "--in", "d.bin", "--method", "third"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("K above P is a usage error and writes nothing") {
  Scratch s;
  const auto r = run({"simulate", "--K", "0.6", "--P", "0.5", "--out", s / "x.bin"});
  CHECK(r.code == 2);
  CHECK(r.err.find("K > P") != std::string::npos);
  CHECK_FALSE(fs::exists(s / "x.bin"));
}

TEST_CASE("missing input exits with 1 and names the path") {
  const auto r = run({"estimate", "--in", "missing.bin"});
  CHECK(r.code == 1);
  CHECK(r.err.find("missing.bin") != std::string::npos);
}

TEST_CASE("simulate, grm and estimate pipeline") {
  Scratch s;
  const auto sim = run({"simulate", "--n-loci", "300", "--target-cases", "25", "--seed", "4", "--out", s / "d.bin",
                        "--csv", s / "d.csv"});
  REQUIRE(sim.code == 0);
  CHECK(sim.out.find("K = 0.1") != std::string::npos);
  CHECK(sim.out.find("eta = 0.5") != std::string::npos);
  CHECK(fs::exists(s / "d.bin"));
  const auto study = herit::read_dataset(s / "d.bin");
  CHECK(count_lines(herit::read_file(s / "d.csv")) == study.sample.size() + 1);

  const auto grm = run({"grm", "--in", s / "d.bin", "--out", s / "g.csv", "--check-en"});
  REQUIRE(grm.code == 0);
  CHECK(grm.out.find("en_holds = ") != std::string::npos);
  CHECK(count_lines(herit::read_file(s / "g.csv")) == study.sample.size());
  REQUIRE(run({"grm", "--in", s / "d.bin", "--out", s / "g.bin"}).code == 0);
  CHECK(herit::decode_grm(herit::read_file(s / "g.bin")).size() == study.sample.size());
  CHECK(run({"grm", "--in", s / "d.bin", "--gamma", "0.2"}).code == 2);

  REQUIRE(run({"estimate", "--in", s / "d.bin", "--out", s / "r.json"}).code == 0);
  const std::string json = herit::read_file(s / "r.json");
  CHECK(json.find("\"wall_time\"") != std::string::npos);
  CHECK(json.find("\"second\"") != std::string::npos);

  REQUIRE(run({"estimate", "--in", s / "d.bin", "--out", s / "r1.csv"}).code == 0);
  REQUIRE(run({"estimate", "--in", s / "d.bin", "--out", s / "r2.csv"}).code == 0);
  CHECK(herit::read_file(s / "r1.csv") == herit::read_file(s / "r2.csv"));
  CHECK(herit::read_file(s / "r1.csv").find("wall_time") == std::string::npos);
  REQUIRE(run({"estimate", "--in", s / "d.bin", "--method", "first", "--timing", "--out", s / "r3.csv"}).code == 0);
  const std::string timed = herit::read_file(s / "r3.csv");
  CHECK(timed.find("wall_time") != std::string::npos);
  CHECK(count_lines(timed) == 2);
}

TEST_CASE("simulate reruns are byte-identical") {
  Scratch s;
  REQUIRE(run({"simulate", "--n-loci", "100", "--target-cases", "20", "--out", s / "a.bin"}).code == 0);
  REQUIRE(run({"simulate", "--n-loci", "100", "--target-cases", "20", "--out", s / "b.bin"}).code == 0);
  CHECK(herit::read_file(s / "a.bin") == herit::read_file(s / "b.bin"));
}

TEST_CASE("experiment from a config file is deterministic") {
  Scratch s;
  herit::write_file_atomic(s / "grid.cfg",
                           "# small grid\neta_star = 0.5, 0.7\nK = 0.1\nP = 0.5\nn_loci = 200\n"
                           "target_cases = 15\nreplications = 3\nseed = 5\n");
  const auto first = run({"experiment", "--config", s / "grid.cfg", "--out-dir", s / "one"});
  REQUIRE(first.code == 0);
  CHECK(first.out.find("replications = 3") != std::string::npos);
  CHECK(first.out.find("threads = ") != std::string::npos);
  REQUIRE(run({"experiment", "--config", s / "grid.cfg", "--out-dir", s / "two", "--threads", "2"}).code == 0);
  for (const char* name : {"records.csv", "summary.csv"}) {
    const std::string a = herit::read_file(s / (std::string("one/") + name));
    CHECK(a == herit::read_file(s / (std::string("two/") + name)));
    CHECK(a.rfind("# eta_star = 0.5,0.7\n", 0) == 0);
  }
  const std::string records = herit::read_file(s / "one/records.csv");
  CHECK(count_lines(records) == 1 + 2 * 3 * 2);
  CHECK(count_lines(herit::read_file(s / "one/summary.csv")) == 1 + 2 * 2);

  REQUIRE(run({"experiment", "--config", s / "grid.cfg", "--reps", "2", "--out-dir", s / "three"}).code == 0);
  CHECK(count_lines(herit::read_file(s / "three/records.csv")) == 1 + 2 * 2 * 2);
}

TEST_CASE("experiment config errors") {
  Scratch s;
  herit::write_file_atomic(s / "bad.cfg", "colour = blue\n");
  CHECK(run({"experiment", "--config", s / "bad.cfg", "--out-dir", s / "o"}).code == 2);
  herit::write_file_atomic(s / "kp.cfg", "K = 0.6\nP = 0.5\n");
  CHECK(run({"experiment", "--config", s / "kp.cfg", "--out-dir", s / "o"}).code == 2);
  CHECK_FALSE(fs::exists(s / "o/records.csv"));
  const auto missing = run({"experiment", "--config", s / "nope.cfg"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("nope.cfg") != std::string::npos);
}

TEST_CASE("moments grid csv") {
  Scratch s;
  REQUIRE(run({"moments", "--a-i", "0,1", "--b", "1,2", "--n-loci", "100,10000", "--out", s / "m.csv"}).code == 0);
  const std::string csv = herit::read_file(s / "m.csv");
  CHECK(csv.rfind("a_i,a_j,b_ij,eta,K,P,n_loci,exact,first_order,second_order\n", 0) == 0);
  CHECK(count_lines(csv) == 1 + 2 * 2 * 2);
  CHECK(run({"moments", "--K", "0.6", "--P", "0.5"}).code == 2);
  CHECK(run({"moments", "--variant", "other"}).code == 2);
}

TEST_CASE("bench and consistency outputs") {
  Scratch s;
  REQUIRE(run({"bench", "--n", "20", "--N", "30", "--out", s / "t.csv"}).code == 0);
  const std::string timing = herit::read_file(s / "t.csv");
  CHECK(timing.find("n,n_loci,method,seconds") != std::string::npos);
  CHECK(count_lines(timing) == 3);
  CHECK(run({"bench", "--n", "1", "--out", s / "t.csv"}).code == 2);

  REQUIRE(run({"consistency", "--n-loci", "500,1000", "--reps", "3", "--out", s / "c.csv"}).code == 0);
  const std::string c1 = herit::read_file(s / "c.csv");
  CHECK(count_lines(c1) == 3);
  REQUIRE(run({"consistency", "--n-loci", "500,1000", "--reps", "3", "--out", s / "c2.csv"}).code == 0);
  CHECK(c1 == herit::read_file(s / "c2.csv"));
}
