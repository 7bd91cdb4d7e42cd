#include "tirs/cli.hpp"
#include "tirs/equilibrium.hpp"
#include "tirs/examples.hpp"
#include "tirs/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

using namespace tirs;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("tirs-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

io::Json without_diagnostics(io::Json doc) {
  doc.erase("diagnostics");
  return doc;
}

}  // namespace

TEST_CASE("solve then verify on the two-state model") {
  TempDir dir;
  const auto s = run({"solve", "--model", "two-state", "--eps", "0.3", "--output-dir", dir.path.string()});
  REQUIRE(s.code == 0);
  CHECK(fs::exists(dir / "solution.json"));
  CHECK(fs::exists(dir / "theta.csv"));
  const auto v = run({"verify", "--model", "two-state", "--solution", dir / "solution.json", "--output-dir", dir.path.string()});
  CHECK(v.code == 0);
  const io::Json rep = io::Json::parse(io::read_file(dir / "deviations.json"));
  CHECK(rep["passed"] == true);
  CHECK(rep["violations"].empty());
  // one row per (t, x, u) plus the header
  CHECK(line_count(io::read_file(dir / "deviations.csv")) == 1 + 2 * 2 * 2);
}

TEST_CASE("verify flags a tampered solution with exit code 2") {
  TempDir dir;
  REQUIRE(run({"solve", "--model", "example2-short", "--output-dir", dir.path.string()}).code == 0);
  io::Json sol = io::Json::parse(io::read_file(dir / "solution.json"));
  // flip the first-step action at the first state
  auto& cell = sol["policy"][0][0];
  cell = cell == "0" ? "1" : "0";
  io::write_file_atomic(dir / "bad.json", sol.dump());
  const auto v = run({"verify", "--model", "example2-short", "--solution", dir / "bad.json", "--output-dir", dir.path.string()});
  CHECK(v.code == 2);
}

TEST_CASE("solution tensor has shape T x (T+1) x |X|") {
  TempDir dir;
  REQUIRE(run({"example", "example2", "--output-dir", dir.path.string()}).code == 0);
  REQUIRE(run({"solve", "--model", dir / "example2.json", "--eps", "0.1", "--output-dir", dir.path.string()}).code == 0);
  const io::Json sol = io::Json::parse(io::read_file(dir / "solution.json"));
  const int T = sol["horizon"];
  REQUIRE(sol["theta"].size() == static_cast<std::size_t>(T));
  for (const auto& row : sol["theta"]) {
    REQUIRE(row.size() == static_cast<std::size_t>(T + 1));
    for (const auto& v : row) CHECK(v.size() == 3);
  }
  CHECK(line_count(io::read_file(dir / "theta.csv")) == 1 + static_cast<std::size_t>(T * (T + 1) * 3));
}

TEST_CASE("example file then solve equals the in-process pipeline") {
  TempDir dir;
  for (const auto& name : example_names()) {
    REQUIRE(run({"example", name, "--output-dir", dir.path.string()}).code == 0);
    for (const std::string eps : {"limit", "0.25"}) {
      REQUIRE(run({"solve", "--model", dir / (name + ".json"), "--eps", eps, "--output-dir", dir.path.string()}).code == 0);
      const ModelSpec m = build_named_example(name);
      const Regime r = eps == "limit" ? Regime::limit() : Regime::at(0.25);
      const io::Json in_process = io::solution_to_json(m, solve(m, r));
      const io::Json from_file = io::Json::parse(io::read_file(dir / "solution.json"));
      CHECK(without_diagnostics(from_file).dump() == without_diagnostics(in_process).dump());
    }
  }
}

TEST_CASE("sweep csv has one row per (eps, tau, t)") {
  TempDir dir;
  const auto s = run({"sweep", "--model", "example2-short", "--grid-geometric", "0.5", "12", "--output-dir", dir.path.string()});
  CHECK(s.code == 0);
  CHECK(line_count(io::read_file(dir / "sweep.csv")) == 1 + 12 * 2 * 2);
  CHECK(line_count(io::read_file(dir / "sweep_plot.csv")) == 1 + 12);
  const io::Json doc = io::Json::parse(io::read_file(dir / "sweep.json"));
  CHECK(doc["passed"] == true);
}

TEST_CASE("sweep with an explicit grid list") {
  TempDir dir;
  const auto s = run({"sweep", "--model", "two-state", "--grid", "1,0.25,0.0625,0.015625,0.00390625,0.0009765625", "--output-dir", dir.path.string()});
  CHECK(s.code == 0);
  CHECK(line_count(io::read_file(dir / "sweep.csv")) == 1 + 6 * 2 * 2);
}

TEST_CASE("validate exit codes") {
  TempDir dir;
  CHECK(run({"validate", "--model", "example2", "--eps", "0.1", "--output-dir", dir.path.string()}).code == 0);
  CHECK(fs::exists(dir / "validation.json"));
  CHECK(run({"validate", "--model", "example2", "--eps", "1.0", "--output-dir", dir.path.string()}).code == 2);
}

TEST_CASE("input errors exit 1 with a single ERROR line") {
  TempDir dir;
  const std::vector<std::vector<std::string>> cases{
      {"solve", "--model", dir / "missing.json"},
      {"example", "nope", "--output-dir", dir.path.string()},
      {"solve", "--model", "two-state", "--eps", "abc"},
      {"solve", "--model", "two-state", "--eps", "-1"},
      {"validate", "--model", "two-state", "--eps", "0.1", "--grid", "0.5,0.1"},
      {"sweep", "--model", "example2-short", "--grid", "0.1,0.5", "--output-dir", dir.path.string()},
      {"precommit", "--model", "example1-small", "--cap", "10", "--output-dir", dir.path.string()},
      {"frobnicate"},
      {"solve"},
  };
  for (const auto& args : cases) {
    const auto r = run(args);
    CHECK(r.code == 1);
    CHECK(r.err.rfind("ERROR:", 0) == 0);
    CHECK(line_count(r.err) == 1);
  }
}

TEST_CASE("malformed model files are input errors") {
  TempDir dir;
  io::write_file_atomic(dir / "broken.json", "{ not json");
  io::write_file_atomic(dir / "schema.json", R"({"horizon": 2})");
  for (const char* f : {"broken.json", "schema.json"}) {
    const auto r = run({"solve", "--model", dir / f, "--output-dir", dir.path.string()});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("ERROR:", 0) == 0);
  }
}

TEST_CASE("precommit writes the gap report") {
  TempDir dir;
  const auto r = run({"precommit", "--model", "example2-short", "--initial-state", "1", "--output-dir", dir.path.string()});
  CHECK(r.code == 0);
  const io::Json g = io::Json::parse(io::read_file(dir / "gap.json"));
  CHECK(g["policies_enumerated"] == 64);
  CHECK(g["initial_state"] == 1);
  CHECK(fs::exists(dir / "gap.csv"));
}

TEST_CASE("operator trace is valid JSON lines") {
  TempDir dir;
  REQUIRE(run({"solve", "--model", "two-state", "--eps", "0.5", "--trace-ops", "--output-dir", dir.path.string()}).code == 0);
  std::istringstream lines(io::read_file(dir / "trace.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const io::Json ev = io::Json::parse(line);
    CHECK(ev.contains("tau"));
    ++n;
  }
  CHECK(n > 0);
}

TEST_CASE("outputs do not depend on the thread count") {
  TempDir a, b;
  REQUIRE(run({"sweep", "--model", "two-state", "--threads", "1", "--output-dir", a.path.string()}).code == 0);
  REQUIRE(run({"sweep", "--model", "two-state", "--threads", "4", "--output-dir", b.path.string()}).code == 0);
  CHECK(io::read_file(a / "sweep.csv") == io::read_file(b / "sweep.csv"));
  REQUIRE(run({"solve", "--model", "example1", "--eps", "0.2", "--threads", "1", "--output-dir", a.path.string()}).code == 0);
  REQUIRE(run({"solve", "--model", "example1", "--eps", "0.2", "--threads", "4", "--output-dir", b.path.string()}).code == 0);
  CHECK(io::read_file(a / "theta.csv") == io::read_file(b / "theta.csv"));
}

TEST_CASE("json reals round-trip losslessly") {
  for (double v : {0.1, 1.0 / 3.0, 2.0 * std::exp(-2.0), 1e-300, 123456789.123456789}) {
    const io::Json j = io::Json::parse(io::real_to_json(v).dump());
    CHECK(io::real_from_json(j) == v);
  }
  CHECK(io::real_from_json(io::Json("inf")) == kInf);
  CHECK(io::real_from_json(io::Json("-inf")) == -kInf);
  CHECK(std::stod(io::format_real(0.1)) == 0.1);
}
