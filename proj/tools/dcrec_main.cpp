#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcrec/cli.hpp"
#include "dcrec/error.hpp"

namespace {

void print(const dcrec::StageSummary& s) { std::cout << s.stage << ": " << s.info.dump() << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aspect-aware review recommender pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Flat JSON configuration file")->required();
  app.add_option("--seed", seed, "Overrides the config seed");
  app.add_option("--out", out, "Overrides the output directory");
  app.add_option("--set", overrides, "Overrides one config key (key=json-value)");

  auto* preprocess = app.add_subcommand("preprocess", "Normalize reviews, split, build vocabulary");
  auto* train = app.add_subcommand("train", "Balance with SMOTE and train the network");
  auto* extract = app.add_subcommand("extract", "Tag aspects, cluster, weight, blend ratings");
  auto* recommend = app.add_subcommand("recommend", "Fit the rating model and write top-n lists");
  std::string user;
  std::optional<std::size_t> n;
  recommend->add_option("--user", user, "Only this user (default: every user)");
  recommend->add_option("-n", n, "List length (default: config top_n)");
  auto* evaluate = app.add_subcommand("evaluate", "Score the held-out split");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? dcrec::kExitOk : dcrec::kExitConfig;
  }

  try {
    auto cfg = dcrec::PipelineConfig::load(config_path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw dcrec::ConfigError("--set expects key=value, got '" + o + "'");
      nlohmann::json value;
      try {
        value = nlohmann::json::parse(o.substr(eq + 1));
      } catch (const nlohmann::json::exception&) {
        value = o.substr(eq + 1);
      }
      cfg.set(o.substr(0, eq), value);
    }
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.out = out;

    if (*preprocess) print(dcrec::cmd_preprocess(cfg));
    if (*train) print(dcrec::cmd_train(cfg));
    if (*extract) print(dcrec::cmd_extract(cfg));
    if (*recommend) print(dcrec::cmd_recommend(cfg, user, n));
    if (*evaluate) print(dcrec::cmd_evaluate(cfg));
    if (*pipeline) {
      const auto all = dcrec::cmd_pipeline(cfg);
      for (const char* stage : {"preprocess", "train", "extract", "recommend", "evaluate"})
        std::cout << stage << ": " << all.at(stage).dump() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dcrec::exit_code_for(e);
  }
  return dcrec::kExitOk;
}
