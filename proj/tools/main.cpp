#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "uficlab/config.hpp"
#include "uficlab/pipeline.hpp"
#include "uficlab/types.hpp"

namespace {

bool quiet() {
  const char* lvl = std::getenv("UFICLAB_LOG");
  if (lvl == nullptr) return false;
  const std::string s(lvl);
  return s == "quiet" || s == "0" || s == "off";
}

void note(const std::string& msg) {
  if (!quiet()) std::cerr << "uficlab: " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"force-impedance skill lab: data collection, power estimation, "
               "tank budgeting"};
  app.require_subcommand(1);

  std::string config_path, out_dir, collect_dir, train_dir, model_path, skill_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
  };

  CLI::App* c_collect =
      app.add_subcommand("collect", "sample skills on the surface and record "
                                    "closed-loop power labels");
  add_common(c_collect);

  CLI::App* c_train = app.add_subcommand("train", "fit the power estimator on a "
                                                  "collect directory");
  add_common(c_train);
  c_train->add_option("--collect", collect_dir, "collect output directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  CLI::App* c_estimate =
      app.add_subcommand("estimate", "predict the power trace and task energy "
                                     "for one skill CSV");
  add_common(c_estimate);
  c_estimate->add_option("--model", model_path, "model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  c_estimate->add_option("--skill", skill_path, "skill CSV")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* c_eval = app.add_subcommand(
      "eval", "score the model on the held-out split and transfer surfaces");
  add_common(c_eval);
  c_eval->add_option("--collect", collect_dir, "collect output directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  c_eval->add_option("--train", train_dir, "train output directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  CLI::App* c_heatmap = app.add_subcommand(
      "heatmap", "predicted task energy over a grid of start points");
  add_common(c_heatmap);
  c_heatmap->add_option("--model", model_path, "model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* c_safety = app.add_subcommand(
      "safety", "compare tank budgeting modes through a contact-loss gap");
  add_common(c_safety);
  c_safety->add_option("--model", model_path, "model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    const uficlab::Config cfg = uficlab::Config::load(config_path);
    if (c_collect->parsed()) {
      uficlab::cmd_collect(cfg, out_dir);
      note("collect finished: " + out_dir + "/manifest.json");
    } else if (c_train->parsed()) {
      uficlab::cmd_train(cfg, collect_dir, out_dir);
      note("train finished: " + out_dir + "/train_report.json");
    } else if (c_estimate->parsed()) {
      uficlab::cmd_estimate(cfg, model_path, skill_path, out_dir);
      note("estimate finished: " + out_dir + "/estimate_report.json");
    } else if (c_eval->parsed()) {
      uficlab::cmd_eval(cfg, collect_dir, train_dir, out_dir);
      note("eval finished: " + out_dir + "/eval_report.json");
    } else if (c_heatmap->parsed()) {
      uficlab::cmd_heatmap(cfg, model_path, out_dir);
      note("heatmap finished: " + out_dir + "/heatmap_report.json");
    } else if (c_safety->parsed()) {
      uficlab::cmd_safety(cfg, model_path, out_dir);
      note("safety finished: " + out_dir + "/safety_report.json");
    }
    return 0;
  } catch (const uficlab::ConfigError& e) {
    std::cerr << "uficlab: config error: " << e.what() << "\n";
    return 2;
  } catch (const uficlab::ParseError& e) {
    std::cerr << "uficlab: input error: " << e.what() << "\n";
    return 2;
  } catch (const uficlab::SimulationFault& e) {
    std::cerr << "uficlab: simulation fault: " << e.what() << "\n";
    return 3;
  } catch (const uficlab::TrainingFault& e) {
    std::cerr << "uficlab: training fault: " << e.what() << "\n";
    return 4;
  } catch (const uficlab::Error& e) {
    std::cerr << "uficlab: error [" << e.category() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "uficlab: unexpected error: " << e.what() << "\n";
    return 1;
  }
}
