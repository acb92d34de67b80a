#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "cvkan/serialize.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(CVKAN_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r{0, {}};
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config(const char* name) { return std::string(CVKAN_CONFIG_DIR) + "/" + name; }

fs::path scratch_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("cli: params") {
  CHECK(run("params --config " + config("holography_cvkan_3x10x1.json")).out == "5330\n");
  CHECK(run("params --config " + config("circuit_cvkan_6x10x3x1.json")).out == "12341\n");
  CHECK(run("params --widths 1x2x1 --norm bn_c").out == "538\n");
  CHECK(run("params --widths 15x1x14 --norm bn_v --output-domain real").out == "2921\n");
}

TEST_CASE("cli: usage errors exit with 2") {
  CHECK(run("train --config /nonexistent.json").code == 2);
  CHECK(run("suite nonsense").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("params --widths 1x").code == 2);
}

TEST_CASE("cli: train writes reproducible artifacts") {
  const fs::path a = scratch_dir("cvkan_cli_a"), b = scratch_dir("cvkan_cli_b");
  const std::string common = " --config " + config("z2_cvkan_1x1.json") + " --epochs 2 --samples 200 --seed 7 --quiet";
  const Result ra = run("train" + common + " --out " + a.string());
  REQUIRE(ra.code == 0);
  CHECK(ra.out.find("params=132") != std::string::npos);
  REQUIRE(run("train" + common + " --out " + b.string()).code == 0);
  for (const char* file : {"manifest.json", "summary.json", "folds.csv", "model_fold0.json"}) {
    INFO(file);
    CHECK(cvkan::read_text_file(a / "z2_cvkan_1x1" / file) == cvkan::read_text_file(b / "z2_cvkan_1x1" / file));
  }
  const auto manifest = nlohmann::json::parse(cvkan::read_text_file(a / "z2_cvkan_1x1" / "manifest.json"));
  CHECK(manifest["seed"] == 7);
  CHECK(manifest.contains("config_hash"));
  CHECK(manifest.contains("version"));
  const auto summary = nlohmann::json::parse(cvkan::read_text_file(a / "z2_cvkan_1x1" / "summary.json"));
  CHECK(summary["params"] == 132);

  const std::string model = (a / "z2_cvkan_1x1" / "model_fold0.json").string();
  const Result ev = run("eval --model " + model + " --config " + config("z2_cvkan_1x1.json") + " --samples 50");
  CHECK(ev.code == 0);
  CHECK(ev.out.find("\"mse\"") != std::string::npos);

  const std::string viz = " --model " + model + " --config " + config("z2_cvkan_1x1.json") + " --samples 50 --resolution 2";
  REQUIRE(run("export-viz" + viz + " --out " + (a / "v1.json").string()).code == 0);
  REQUIRE(run("export-viz" + viz + " --out " + (a / "v2.json").string()).code == 0);
  const std::string v1 = cvkan::read_text_file(a / "v1.json");
  CHECK(v1 == cvkan::read_text_file(a / "v2.json"));
  const auto doc = nlohmann::json::parse(v1);
  CHECK(doc["surfaces"][0]["resolution"] == 2);
  CHECK(doc["surfaces"][0]["magnitude"].size() == 4);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("cli: knot surrogate export lists 15 features") {
  const fs::path dir = scratch_dir("cvkan_cli_knots");
  REQUIRE(run("train --config " + config("knots_surrogate_15x1x14.json") +
              " --epochs 1 --samples 300 --quiet --out " + dir.string())
              .code == 0);
  const std::string model = (dir / "knots_surrogate_15x1x14" / "model_fold0.json").string();
  REQUIRE(run("export-viz --model " + model + " --config " + config("knots_surrogate_15x1x14.json") +
              " --samples 300 --resolution 3 --out " + (dir / "viz.json").string())
              .code == 0);
  const auto doc = nlohmann::json::parse(cvkan::read_text_file(dir / "viz.json"));
  CHECK(doc["feature_names"].size() == 15);
  fs::remove_all(dir);
}

TEST_CASE("cli: eval rejects a mismatched model") {
  const fs::path dir = scratch_dir("cvkan_cli_mismatch");
  REQUIRE(run("train --config " + config("z2_cvkan_1x1.json") + " --epochs 1 --samples 50 --quiet --out " +
              dir.string())
              .code == 0);
  const std::string model = (dir / "z2_cvkan_1x1" / "model_fold0.json").string();
  CHECK(run("eval --model " + model + " --config " + config("sin_cvkan_1x1.json")).code == 0);
  CHECK(run("eval --model " + model + " --config " + config("z1z2_cvkan_2x4x2x1.json")).code == 2);
  fs::remove_all(dir);
}
