#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "tgn/cli.hpp"

using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = tgn::run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path fresh_dir(const char* leaf) {
  auto dir = std::filesystem::temp_directory_path() / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"launch"}).code == 1);
  CHECK(cli({"count"}).code == 1);  // --config is required
  CHECK(cli({"count", "--config", "synth_overfit", "--bogus"}).code == 1);

  CliResult help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("train") != std::string::npos);
  CHECK(help.out.find("gradcheck") != std::string::npos);
}

TEST_CASE("count reports parameters and work") {
  CliResult r = cli({"count", "--config", "synth_overfit"});
  CHECK(r.code == 0);
  CHECK(r.out.find("total: 6372") != std::string::npos);
  CHECK(r.err.find("resolved config") != std::string::npos);

  SUBCASE("json mode emits exactly one parseable document") {
    CliResult j = cli({"--json", "count", "--config", "synth_overfit"});
    CHECK(j.code == 0);
    json doc = json::parse(j.out);  // throws on logs mixed into stdout
    CHECK(doc["params"]["total"] == 6372);
    CHECK(doc["flops"]["total"] > 0);
    CHECK(j.err.find("resolved config") != std::string::npos);
  }

  SUBCASE("the default model lands in the published envelope") {
    CliResult j = cli({"--json", "count", "--config", "ntu25_default"});
    json doc = json::parse(j.out);
    CHECK(doc["params"]["total"] == 2039974);
    long long flops = doc["flops"]["total"].get<long long>();
    CHECK(flops >= 12000000000LL);
    CHECK(flops <= 18000000000LL);
  }

  SUBCASE("scale filtering drops mask parameters") {
    CliResult full = cli({"--json", "count", "--config", "synth_overfit",
                          "--scales", "full"});
    json doc = json::parse(full.out);
    CHECK(doc["params"]["total"] == 5352);

    CliResult bad = cli({"count", "--config", "synth_overfit", "--scales",
                         "torso"});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("unknown scale") != std::string::npos);
  }

  SUBCASE("block shorthand switches the architecture") {
    CliResult tgn_r = cli({"--json", "count", "--config", "ntu25_default"});
    CliResult base_r = cli({"--json", "count", "--config", "ntu25_default",
                            "--block", "baseline"});
    long long tgn_total = json::parse(tgn_r.out)["params"]["total"];
    long long base_total = json::parse(base_r.out)["params"]["total"];
    // The fused block spends fewer parameters than the factored one at the
    // same channel plan.
    CHECK(tgn_total < base_total);
  }
}

TEST_CASE("synth then train then eval round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fresh_dir("tgn_cli_flow");
  const std::string ds = (dir / "ds").string();

  CliResult s = cli({"synth", "--out", ds, "--classes", "2",
                     "--per-class-train", "4", "--per-class-test", "2",
                     "--frames", "16", "--seed", "5"});
  CHECK(s.code == 0);
  CHECK(fs::exists(fs::path(ds) / "manifest.json"));

  SUBCASE("synth validation failures exit 1") {
    CHECK(cli({"synth", "--out", ds, "--classes", "1"}).code == 1);
  }

  const std::string model_path = (dir / "model.json").string();
  const std::string report_path = (dir / "report.json").string();
  CliResult t = cli({"--json", "train", "--config", "synth_overfit", "--set",
                     "train.epochs=2", "--set", "data.pad_frames=16",
                     "--data", ds, "--out", model_path, "--report",
                     report_path});
  REQUIRE(t.code == 0);
  json report = json::parse(t.out);
  CHECK(report["epochs"].size() == 2);
  CHECK(report["param_count"] == 6372);
  CHECK(report["config"]["data"]["pad_frames"] == 16);
  CHECK(report.contains("eval"));  // the dataset has a test split
  CHECK(fs::exists(model_path));

  // The written report matches stdout.
  CHECK(json::parse(slurp(report_path)) == report);

  SUBCASE("training is reproducible at the artifact level") {
    const std::string again = (dir / "model2.json").string();
    CliResult t2 = cli({"--json", "train", "--config", "synth_overfit",
                        "--set", "train.epochs=2", "--set",
                        "data.pad_frames=16", "--data", ds, "--out", again});
    CHECK(t2.code == 0);
    CHECK(slurp(model_path) == slurp(again));

    json a = json::parse(t.out);
    json b = json::parse(t2.out);
    a["wall_seconds"] = 0.0;
    b["wall_seconds"] = 0.0;
    CHECK(a.dump() == b.dump());
  }

  SUBCASE("eval loads the checkpoint") {
    CliResult e = cli({"--json", "eval", "--model", model_path, "--data", ds,
                       "--pad", "16"});
    REQUIRE(e.code == 0);
    json doc = json::parse(e.out);
    CHECK(doc["top1"].get<double>() >= 0.0);
    CHECK(doc["top1"].get<double>() <= 1.0);
    CHECK(doc["top5"] == 1.0);
    CHECK(e.err.find("model config") != std::string::npos);
  }

  SUBCASE("two-stream fusion") {
    const std::string bone_path = (dir / "bone.json").string();
    CliResult tb = cli({"train", "--config", "synth_overfit", "--set",
                        "train.epochs=2", "--set", "data.pad_frames=16",
                        "--stream", "bone", "--data", ds, "--out", bone_path});
    REQUIRE(tb.code == 0);

    CliResult e = cli({"--json", "eval", "--model", model_path,
                       "--bone-model", bone_path, "--data", ds, "--pad",
                       "16"});
    REQUIRE(e.code == 0);
    json doc = json::parse(e.out);
    CHECK(doc.contains("joint"));
    CHECK(doc.contains("bone"));
    CHECK(doc.contains("fused"));
    double joint1 = doc["joint"]["top1"].get<double>();
    double bone1 = doc["bone"]["top1"].get<double>();
    double fused1 = doc["fused"]["top1"].get<double>();
    CHECK(fused1 >= std::max(joint1, bone1) - 0.05);
  }

  SUBCASE("ablate produces one row per scale set") {
    CliResult a = cli({"--json", "ablate", "--config", "synth_overfit",
                       "--set", "train.epochs=1", "--set",
                       "data.pad_frames=16", "--data", ds, "--rows",
                       "full,core,full+core"});
    REQUIRE(a.code == 0);
    json doc = json::parse(a.out);
    REQUIRE(doc["rows"].size() == 3);
    CHECK(doc["rows"][2]["name"] == "full+core");
  }

  SUBCASE("train without a dataset is a configuration error") {
    CliResult bad = cli({"train", "--config", "synth_overfit"});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("--data") != std::string::npos);
  }

  std::filesystem::remove_all(dir);
}

TEST_CASE("convert applies the requested transforms") {
  namespace fs = std::filesystem;
  const fs::path dir = fresh_dir("tgn_cli_convert");
  const std::string ds = (dir / "ds").string();
  REQUIRE(cli({"synth", "--out", ds, "--per-class-train", "1",
               "--per-class-test", "0", "--frames", "8"})
              .code == 0);

  const std::string in_path = ds + "/seq_00000.json";
  const std::string out_path = (dir / "bone.json").string();
  CliResult c = cli({"--json", "convert", "--in", in_path, "--out", out_path,
                     "--stream", "bone", "--center", "--pad", "12"});
  REQUIRE(c.code == 0);
  json doc = json::parse(c.out);
  CHECK(doc["frames"] == 12);
  CHECK(doc["stream"] == "bone");
  CHECK(fs::exists(out_path));

  CHECK(cli({"convert", "--in", in_path, "--out", out_path, "--stream",
             "optical"})
            .code == 1);
  CHECK(cli({"convert", "--in", ds + "/missing.json", "--out", out_path})
            .code == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("gradcheck subcommand gates on its tolerance") {
  CliResult ok = cli({"--json", "gradcheck", "--seed", "3"});
  CHECK(ok.code == 0);
  json doc = json::parse(ok.out);
  CHECK(doc["pass"] == true);
  CHECK(doc["checks"].size() >= 6);
  for (const auto& item : doc["checks"]) {
    CHECK(item["max_rel_err"].get<double>() < 1e-4);
  }

  // An impossible tolerance demonstrates the runtime-failure exit code.
  CliResult fail = cli({"gradcheck", "--tolerance", "1e-30"});
  CHECK(fail.code == 2);
  CHECK(fail.out.find("FAIL") != std::string::npos);
}

TEST_CASE("eval error paths") {
  CliResult missing = cli({"eval", "--model", "/nonexistent/model.json",
                           "--data", "/nonexistent/ds"});
  CHECK(missing.code == 1);
  CHECK(!missing.err.empty());
}
