// Copyright 2026 The ppgbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ppgbench command-line tool. Talks to the library through the C API only.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppgbench/ppgbench.h"

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int exit_code(ppg_status s) {
  switch (s) {
    case PPG_OK: return kExitOk;
    case PPG_ERR_VALIDATION:
    case PPG_ERR_ARGUMENT: return kExitValidation;
    default: return kExitRuntime;
  }
}

int report_error(ppg_status s) {
  std::cerr << "ppgbench: " << (s == PPG_ERR_VALIDATION ? "invalid input: " : "error: ") << ppg_last_error()
            << "\n";
  return exit_code(s);
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> task;
  std::optional<std::string> arch;
  std::vector<std::string> sets;
  std::optional<int> dump_spectrograms;
  bool raw_json = false;
};

std::string take(char* s) {
  std::string out = s ? s : "";
  ppg_string_free(s);
  return out;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

std::string fmt(double v, const char* f = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void print_summary(const std::string& cmd, const json& j) {
  if (cmd == "synth") {
    std::cout << "synthesized " << j["subjects"] << " subjects, " << j["sessions"] << " sessions ("
              << j["files"] << " files)\n";
  } else if (cmd == "slice") {
    std::cout << "records: " << j["records"] << "\n"
              << "windows: " << j["candidates"] << " candidates, " << j["speech"] << " speech, "
              << j["non_speech"] << " non-speech, " << j["discarded"] << " discarded\n"
              << "balance: " << pct(j["speech_share"]) << "% speech / " << pct(j["non_speech_share"])
              << "% non-speech\n";
    for (const auto& w : j["warnings"]) std::cout << "warning: " << w.get<std::string>() << "\n";
  } else if (cmd == "run") {
    std::cout << j["task"].get<std::string>() << " | " << j["architecture"].get<std::string>()
              << " | window " << j["window_s"] << " s | " << j["runs"] << " runs\n"
              << "AUC " << fmt(j["auc"]["mean"]) << " +- " << fmt(j["auc"]["sem"]) << "   F1 "
              << fmt(j["f1"]["mean"]) << " +- " << fmt(j["f1"]["sem"]) << "\n";
    if (j.contains("auc_by_fold")) {
      std::cout << "by fold (" << j["auc_by_fold"]["n"] << "): AUC " << fmt(j["auc_by_fold"]["mean"]) << " +- "
                << fmt(j["auc_by_fold"]["sem"]) << "\n";
    }
    for (const auto& f : j["files"]) std::cout << "wrote " << f.get<std::string>() << "\n";
  } else if (cmd == "sweep") {
    int rank = 1;
    for (const auto& r : j["rows"]) {
      std::cout << rank++ << ". " << r["architecture"].get<std::string>() << "  ";
      if (r.contains("auc")) {
        std::cout << "AUC " << fmt(r["auc"]["mean"]) << " +- " << fmt(r["auc"]["sem"]) << "\n";
      } else {
        std::cout << "error: " << r["error"].get<std::string>() << "\n";
      }
    }
    for (const auto& f : j["files"]) std::cout << "wrote " << f.get<std::string>() << "\n";
  } else if (cmd == "gradcheck") {
    for (const auto& r : j["rows"]) {
      std::cout << (r["pass"].get<bool>() ? "PASS " : "FAIL ") << r["name"].get<std::string>()
                << "  max_rel_error=" << fmt(r["max_rel_error"], "%.3g") << "  coordinates=" << r["coordinates"]
                << "  skipped_kinks=" << r["skipped_kinks"] << "\n";
    }
  } else if (cmd == "report") {
    for (const auto& r : j["reports"]) {
      std::cout << r["task"].get<std::string>() << " | " << r["architecture"].get<std::string>() << " | "
                << r["window_s"] << " s | AUC " << fmt(r["auc"]["mean"]) << " +- " << fmt(r["auc"]["sem"])
                << "\n";
    }
    for (const auto& f : j["files"]) std::cout << "wrote " << f.get<std::string>() << "\n";
  }
}

int run_command(const std::string& cmd, const Options& o) {
  ppg_config* cfg = nullptr;
  ppg_status s = o.config.empty() ? ppg_config_default(&cfg) : ppg_config_load(o.config.c_str(), &cfg);
  if (s != PPG_OK) return report_error(s);
  std::unique_ptr<ppg_config, decltype(&ppg_config_free)> guard(cfg, ppg_config_free);

  auto set = [&](const std::string& key, const std::string& value) {
    const ppg_status st = ppg_config_set(cfg, key.c_str(), value.c_str());
    return st;
  };
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "ppgbench: invalid input: --set expects key=value, got '" << kv << "'\n";
      return kExitValidation;
    }
    overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.arch) overrides.emplace_back("architecture", *o.arch);
  if (o.task) overrides.emplace_back("task", json(*o.task).dump());
  if (o.seed) overrides.emplace_back("seed", std::to_string(*o.seed));
  if (o.workers) overrides.emplace_back("workers", std::to_string(*o.workers));
  if (o.dump_spectrograms) overrides.emplace_back("spectrogram_dump", std::to_string(*o.dump_spectrograms));
  for (const auto& [k, v] : overrides) {
    if ((s = set(k, v)) != PPG_OK) return report_error(s);
  }

  char* out = nullptr;
  int all_pass = 1;
  if (cmd == "synth") s = ppg_cmd_synth(cfg, &out);
  else if (cmd == "slice") s = ppg_cmd_slice(cfg, &out);
  else if (cmd == "run") s = ppg_cmd_run(cfg, &out);
  else if (cmd == "sweep") s = ppg_cmd_sweep(cfg, &out);
  else if (cmd == "gradcheck") s = ppg_cmd_gradcheck(cfg, &all_pass, &out);
  else if (cmd == "report") s = ppg_cmd_report(cfg, &out);
  if (s != PPG_OK) return report_error(s);
  const std::string text = take(out);
  if (o.raw_json) {
    std::cout << text << "\n";
  } else {
    print_summary(cmd, json::parse(text));
  }
  if (cmd == "gradcheck" && !all_pass) {
    std::cerr << "ppgbench: gradient check failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ppgbench: PPG speech, gender and speaker-verification CNN workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ppg_version()));
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--workers", o.workers, "parallel workers")->check(CLI::PositiveNumber);
    sub->add_option("--task", o.task, "speech | gender | verification");
    sub->add_option("--arch", o.arch, "pulsenet | pulsenet_var1 | pulsenet_var2 | vgg16_inv | cnn2d");
    sub->add_option("--set", o.sets, "override a config value, key=value (repeatable)");
    sub->add_flag("--json", o.raw_json, "print the raw JSON summary");
  };
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"synth", "generate a synthetic cohort into data_dir"},
      {"slice", "cut records into labeled windows"},
      {"run", "run repeated experiments for one task and architecture"},
      {"sweep", "rank PulseNet kernel-size configurations"},
      {"gradcheck", "finite-difference check of every layer and architecture"},
      {"report", "build Table 1 and boxplots from run outputs"},
  };
  std::string chosen;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub);
    if (std::string(s.name) == "slice") {
      sub->add_option("--dump-spectrograms", o.dump_spectrograms, "write N window spectrograms as CSV")
          ->check(CLI::NonNegativeNumber);
    }
    sub->callback([&chosen, name = std::string(s.name)] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  return run_command(chosen, o);
}
