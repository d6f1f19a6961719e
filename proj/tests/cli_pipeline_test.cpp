// End-to-end exercise of the command-line interface: synth -> train -> eval
// -> forecast -> verify, artifact checks, determinism of reruns, and the
// documented exit codes.

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
  if (!ok) ++failures;
}

int run(const std::string& cmd) {
  const int status = std::system((cmd + " > cli_test_stdout.txt 2> cli_test_stderr.txt").c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// training_log.csv minus the wall-clock column (timings differ across runs)
std::string log_without_walltime(const fs::path& p) {
  std::ifstream in(p);
  std::string line, out;
  while (std::getline(in, line)) {
    const auto last_comma = line.rfind(',');
    out += line.substr(0, last_comma);
    out += '\n';
  }
  return out;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

int main() {
  const std::string bin = ODECAST_BIN;
  const fs::path root = fs::path("cli_test_work");
  fs::remove_all(root);
  fs::create_directories(root);

  const std::string common =
      " --input-len 12 --horizon 1 --hidden 8 --embed-dim 4 --decoder-hidden 8"
      " --epochs 2 --batch 16 --lr 0.002 --seed 5 --dropout 0.1";

  // synth
  const fs::path synth_dir = root / "synth";
  check(run(bin + " synth --out " + synth_dir.string() +
            " --nodes 4 --steps 300 --lag 2 --seed 7") == 0,
        "synth exits 0");
  check(fs::exists(synth_dir / "synth.csv"), "synth.csv written");
  check(count_lines(synth_dir / "synth.csv") == 300, "synth.csv has the requested rows");
  check(slurp(synth_dir / "edges.json").find("edges") != std::string::npos, "edges.json written");

  const std::string data = (synth_dir / "synth.csv").string();

  // determinism of the generator
  const fs::path synth_dir2 = root / "synth2";
  (void)run(bin + " synth --out " + synth_dir2.string() + " --nodes 4 --steps 300 --lag 2 --seed 7");
  check(slurp(synth_dir / "synth.csv") == slurp(synth_dir2 / "synth.csv"),
        "same seed gives identical synth bytes");

  // train
  const fs::path run1 = root / "run1";
  check(run(bin + " train --data " + data + " --out " + run1.string() + common) == 0,
        "train exits 0");
  for (const char* name :
       {"config.json", "checkpoint.json", "training_log.csv", "metrics.json", "metrics.csv",
        "adjacency.csv"}) {
    check(fs::exists(run1 / name), std::string("train writes ") + name);
  }
  check(count_lines(run1 / "training_log.csv") == 3, "training log has one row per epoch");

  // deterministic rerun (wall-clock column excluded)
  const fs::path run2 = root / "run2";
  (void)run(bin + " train --data " + data + " --out " + run2.string() + common);
  check(log_without_walltime(run1 / "training_log.csv") ==
            log_without_walltime(run2 / "training_log.csv"),
        "same seed reproduces the training log");

  // eval
  const fs::path eval_dir = root / "eval";
  check(run(bin + " eval --checkpoint " + (run1 / "checkpoint.json").string() + " --data " +
            data + " --out " + eval_dir.string()) == 0,
        "eval exits 0");
  check(fs::exists(eval_dir / "metrics.csv"), "eval writes metrics.csv");
  check(slurp(eval_dir / "metrics.csv").find("single_step") != std::string::npos,
        "eval report carries the protocol tag");

  // forecast
  const fs::path fc_dir = root / "forecast";
  check(run(bin + " forecast --checkpoint " + (run1 / "checkpoint.json").string() + " --data " +
            data + " --out " + fc_dir.string()) == 0,
        "forecast exits 0");
  check(fs::exists(fc_dir / "forecasts.csv"), "forecast writes forecasts.csv");

  // ablation tag lands in the report
  const fs::path run3 = root / "run3";
  check(run(bin + " train --data " + data + " --out " + run3.string() + common +
            " --ablation no_gsl") == 0,
        "ablated train exits 0");
  check(slurp(run3 / "metrics.csv").find("no_gsl") != std::string::npos,
        "report is tagged with the variant name");

  // multi-step protocol: per-horizon rows at 3, 6, and 12
  const fs::path run_ms = root / "run_multistep";
  check(run(bin + " train --data " + data + " --out " + run_ms.string() +
            " --mode multi_step --horizon 12 --input-len 12 --hidden 8 --embed-dim 4"
            " --decoder-hidden 8 --epochs 1 --batch 16 --seed 5") == 0,
        "multi-step train exits 0");
  {
    const std::string csv = slurp(run_ms / "metrics.csv");
    check(csv.find("mae") != std::string::npos && csv.find("rmse") != std::string::npos &&
              csv.find("mape") != std::string::npos,
          "multi-step report carries MAE/RMSE/MAPE");
    check(csv.find("multi_step,full,3,") != std::string::npos &&
              csv.find("multi_step,full,6,") != std::string::npos &&
              csv.find("multi_step,full,12,") != std::string::npos,
          "multi-step report has horizon rows 3, 6, 12");
  }

  // config file + flag precedence: flag overrides the file value
  const fs::path cfg_path = root / "file_config.json";
  {
    std::ofstream out(cfg_path);
    out << "{\"epochs\": 1, \"seed\": 5}\n";
  }
  const fs::path run4 = root / "run4";
  check(run(bin + " train --config " + cfg_path.string() + " --data " + data + " --out " +
            run4.string() + common) == 0,
        "train with config file exits 0");
  check(count_lines(run4 / "training_log.csv") == 3,
        "command-line epochs override the config file");

  // unknown config key is a user error (exit 1)
  const fs::path bad_cfg = root / "bad_config.json";
  {
    std::ofstream out(bad_cfg);
    out << "{\"epoches\": 3}\n";
  }
  check(run(bin + " train --config " + bad_cfg.string() + " --data " + data) == 1,
        "unknown config key exits 1");

  // missing data file is a user error
  check(run(bin + " train --data " + (root / "missing.csv").string()) == 1,
        "missing dataset exits 1");

  // node-count mismatch between checkpoint and data
  const fs::path synth5 = root / "synth5";
  (void)run(bin + " synth --out " + synth5.string() + " --nodes 5 --steps 300 --lag 2");
  check(run(bin + " eval --checkpoint " + (run1 / "checkpoint.json").string() + " --data " +
            (synth5 / "synth.csv").string()) == 1,
        "node-count mismatch exits 1");

  // verify suites: quick one here, full suite exercised by the unit/acceptance runs
  check(run(bin + " verify --suite bound") == 0, "verify --suite bound exits 0");
  check(run(bin + " verify --suite nonsense") == 1, "unknown suite exits 1");

  // output-directory override via the environment
  const fs::path env_dir = root / "env_override";
  setenv("ODECAST_OUT_DIR", env_dir.string().c_str(), 1);
  (void)run(bin + " synth --out " + (root / "ignored").string() + " --nodes 4 --steps 50");
  unsetenv("ODECAST_OUT_DIR");
  check(fs::exists(env_dir / "synth.csv") && !fs::exists(root / "ignored" / "synth.csv"),
        "ODECAST_OUT_DIR overrides --out");

  std::remove("cli_test_stdout.txt");
  std::remove("cli_test_stderr.txt");
  if (failures == 0) fs::remove_all(root);
  std::printf(failures == 0 ? "all cli checks passed\n" : "%d cli checks failed\n", failures);
  return failures == 0 ? 0 : 1;
}
