#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "ppv/cli.hpp"
#include "ppv/families.hpp"
#include "ppv/format.hpp"
#include "support.hpp"

using namespace ppv;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ppv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Runs the installed binary in its own process; returns the exit status.
Run run_process(const std::string& args) {
  std::string cmd = std::string(PPV_BINARY) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (auto n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, {}};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ppv-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::string write(const std::string& name, const Protocol& p, const std::optional<Predicate>& pd = std::nullopt) {
    auto file = (path / name).string();
    std::ofstream(file) << serialize_protocol(to_document(p, pd));
    return file;
  }
};

std::string fixture() { return std::string(PPV_FIXTURES) + "/majority.pp.json"; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("gen majority prints the fixture") {
    auto r = run({"gen", "majority"});
    CHECK(r.code == cli::kHolds);
    CHECK(r.out == read_text_file(fixture()));
  }

  TEST_CASE("check majority holds and writes a verdict") {
    TempDir dir;
    auto file = dir.write("majority.pp.json", gen_majority(), majority_predicate());
    auto r = run({"check", file});
    CHECK(r.code == cli::kHolds);
    CHECK(r.out.find("in WSSS") != std::string::npos);
    CHECK(fs::exists(file.substr(0, file.size() - 8) + ".verdict.json"));
  }

  TEST_CASE("negative verdicts name the failing property") {
    TempDir dir;
    auto pp = run({"check", dir.write("pp.pp.json", test::ping_pong_majority()), "--no-verdict"});
    CHECK(pp.code == cli::kFails);
    CHECK(pp.out.find("not in WSSS via LayeredTermination") != std::string::npos);
    auto two = run({"check", dir.write("two.pp.json", test::two_state()), "--no-verdict"});
    CHECK(two.code == cli::kFails);
    CHECK(two.out.find("not in WSSS via StrongConsensus") != std::string::npos);
  }

  TEST_CASE("input errors") {
    TempDir dir;
    CHECK(run({"check", (dir.path / "missing.pp.json").string()}).code == cli::kInputError);
    auto bad = (dir.path / "bad.pp.json").string();
    std::ofstream(bad) << "{ \"states\": [";
    auto r = run({"check", bad, "--no-verdict"});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find("1:") != std::string::npos);
    CHECK(run({"check", fixture(), "--solver", "/nonexistent/solver", "--no-verdict"}).code == cli::kInputError);
    CHECK(run({}).code == cli::kInputError);
    CHECK(run({"gen", "nosuchfamily"}).code == cli::kInputError);
  }

  TEST_CASE("help and version") {
    CHECK(run({"--help"}).code == 0);
    auto v = run({"--version"});
    CHECK(v.code == 0);
    CHECK_FALSE(v.out.empty());
  }

  TEST_CASE("correct and oracle on majority") {
    auto c = run({"correct", fixture(), "--no-verdict"});
    CHECK(c.code == cli::kHolds);
    auto o = run({"oracle", fixture(), "--max-agents", "6"});
    CHECK(o.code == cli::kHolds);
    CHECK(o.out.find("0 predicate mismatches") != std::string::npos);
    TempDir dir;
    auto wrong = dir.write("wrong.pp.json", gen_majority(), Predicate::negation(majority_predicate()));
    CHECK(run({"correct", wrong, "--no-verdict"}).code == cli::kFails);
    CHECK(run({"oracle", dir.write("two.pp.json", test::two_state())}).code == cli::kFails);
  }

  TEST_CASE("bench rows are structured records") {
    auto r = run({"bench", "flock-cms", "--params", "3,4", "--format", "structured"});
    CHECK(r.code == cli::kHolds);
    std::istringstream lines(r.out);
    std::string line;
    std::vector<nlohmann::json> rows;
    while (std::getline(lines, line))
      if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
    REQUIRE(rows.size() == 2);
    CHECK(rows[1]["states"] == 5);
    CHECK(rows[1]["transitions"] == 10);
    CHECK(rows[1]["verdict"] == "holds");
  }

  TEST_CASE("certificates replay in a fresh process") {
    TempDir dir;
    for (const auto& [name, p, code] : std::vector<std::tuple<std::string, Protocol, int>>{
             {"majority", gen_majority(), 0}, {"two", test::two_state(), 1}, {"pp", test::ping_pong_majority(), 1}}) {
      auto file = dir.write(name + ".pp.json", p);
      auto verdict = (dir.path / (name + ".verdict.json")).string();
      auto r = run_process("check " + file + " --verdict " + verdict);
      CAPTURE(r.out);
      CHECK(r.code == code);
      auto rep = run_process("replay " + file + " " + verdict);
      CAPTURE(rep.out);
      CHECK(rep.code == 0);
    }
  }

  TEST_CASE("replay detects a corrupted verdict file") {
    TempDir dir;
    auto file = dir.write("majority.pp.json", gen_majority());
    auto verdict = (dir.path / "m.verdict.json").string();
    REQUIRE(run_process("check " + file + " --verdict " + verdict).code == 0);
    auto j = nlohmann::json::parse(read_text_file(verdict));
    auto& layers = j["layered"]["partition"];
    std::swap(layers[0], layers[1]);
    std::ofstream(verdict) << j.dump(2);
    CHECK(run_process("replay " + file + " " + verdict).code == cli::kFails);
  }
}
