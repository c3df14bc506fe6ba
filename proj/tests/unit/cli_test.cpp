#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "support.hpp"

using namespace pgcl;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("pgcl_cli_" + name)).string();
}

}  // namespace

TEST_CASE("sweep CSV") {
  Run r = run({"sweep", testing::corpus_path("1dbrw.pgcl"), "--values", "3,4,6"});
  REQUIRE(r.code == cli::kOk);
  std::vector<std::string> rows = lines(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "M,state,value_exact,value_decimal,states,millis");
  long ms[] = {3, 4, 6};
  for (int i = 0; i < 3; ++i) {
    std::vector<std::string> f = fields(rows[i + 1]);
    REQUIRE(f.size() == 6);
    CHECK(f[0] == std::to_string(ms[i]));
    CHECK(f[1] == "n=1");
    CHECK(parse_rational(f[2]) == testing::ruin(Rational(1, 3), 1, ms[i]));
  }
}

TEST_CASE("solve exit codes") {
  Run ok = run({"solve", testing::corpus_path("1dbrw.pgcl")});
  CHECK(ok.code == cli::kOk);
  CHECK(ok.out.find("511/1023") != std::string::npos);

  Run cut = run({"solve", testing::corpus_path("1dbrw.pgcl"), "--max-states", "5"});
  CHECK(cut.code == cli::kTruncated);
  CHECK(cut.out.find("truncated yes") != std::string::npos);

  Run missing = run({"solve", "no/such/file.pgcl"});
  CHECK(missing.code == cli::kError);
  CHECK_FALSE(missing.err.empty());

  CHECK(run({"frobnicate"}).code == cli::kError);
  CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("parameters override the run file") {
  Run r = run({"solve", testing::corpus_path("1dbrw.pgcl"), "--param", "M=5"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("15/31") != std::string::npos);
  Run init = run({"solve", testing::corpus_path("1dbrw.pgcl"), "--init", "n=2"});
  CHECK(init.out.find(to_string(testing::ruin(Rational(1, 3), 2, 10))) != std::string::npos);
}

TEST_CASE("certify, store and replay") {
  std::string path = tmp_path("1dbrw_cert.json");
  Run ok = run({"certify", testing::corpus_path("1dbrw.pgcl"), "--out", path});
  CHECK(ok.code == cli::kOk);
  CHECK(ok.out.find("verdict CERTIFIED") != std::string::npos);
  CHECK(std::filesystem::exists(path));

  Run replay = run({"certify", testing::corpus_path("1dbrw.pgcl"), "--replay", path});
  CHECK(replay.code == cli::kOk);
  CHECK(replay.out.find("replay matches") != std::string::npos);

  // Editing the stored verdict breaks the replay.
  std::string text;
  {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  auto at = text.find("\"CERTIFIED\"");
  REQUIRE(at != std::string::npos);
  text.replace(at, 11, "\"FAILED\"");
  {
    std::ofstream out(path);
    out << text;
  }
  CHECK(run({"certify", testing::corpus_path("1dbrw.pgcl"), "--replay", path}).code == cli::kError);
  std::filesystem::remove(path);

  Run wrong = run({"certify", testing::corpus_path("1dbrw.pgcl"), "--bound",
                   "[n<0] + [0<=n & n<=M]*((1/2)^n + (1/2)^M)"});
  CHECK(wrong.code == cli::kError);
  CHECK(wrong.out.find("verdict FAILED") != std::string::npos);
}

TEST_CASE("certify emits JSON") {
  Run r = run({"certify", testing::corpus_path("petersburg.pgcl"), "--emit", "json"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("\"verdict\": \"CERTIFIED\"") != std::string::npos);
  CHECK(r.out.find("\"request\"") != std::string::npos);
}

TEST_CASE("diff prints the identity per state") {
  Run r = run({"diff", testing::corpus_path("diff_walk.pgcl")});
  REQUIRE(r.code == cli::kOk);
  std::vector<std::string> rows = lines(r.out);
  REQUIRE(rows.size() == 12);
  CHECK(fields(rows[0]).back() == "identity");
  for (std::size_t i = 1; i <= 10; ++i) CHECK(fields(rows[i]).back() == "holds");
  CHECK(rows.back() == "identity holds");
  // Fair ruin from n = 5 inside 0 < n < 10: the trace terms are (n-1)/9 and (10-n)/9.
  std::vector<std::string> five = fields(rows[5]);
  REQUIRE(five.size() == 8);
  CHECK(five[0] == "n=5");
  CHECK(parse_rational(five[3]) == Rational(4, 9));
  CHECK(parse_rational(five[4]) == Rational(5, 9));
}

TEST_CASE("simulate reports the cutoff fraction") {
  Run r = run({"simulate", testing::corpus_path("1dbrw.pgcl"), "--trials", "500", "--seed", "4"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("CUTOFF FRACTION 0") != std::string::npos);
  Run again = run({"simulate", testing::corpus_path("1dbrw.pgcl"), "--trials", "500", "--seed", "4"});
  CHECK(again.out == r.out);
}

TEST_CASE("parse pretty-prints and dumps chains") {
  Run r = run({"parse", testing::corpus_path("1dbrw.pgcl")});
  CHECK(r.code == cli::kOk);
  CHECK(parse_program(r.out)->kind == StmtKind::While);
  Run chain = run({"parse", testing::corpus_path("1dbrw.pgcl"), "--dump-chain", "--param", "M=3"});
  CHECK(chain.code == cli::kOk);
  CHECK(chain.out.find("n=0") != std::string::npos);

  std::string bad = tmp_path("bad.pgcl");
  {
    std::ofstream out(bad);
    out << "while (0 < n) { n := }";
  }
  Run err = run({"parse", bad, "--no-config"});
  CHECK(err.code == cli::kError);
  CHECK(err.err.find("1:") != std::string::npos);
  std::filesystem::remove(bad);
}
