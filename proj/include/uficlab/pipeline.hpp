#pragma once

#include <string>

#include "uficlab/config.hpp"
#include "uficlab/simulation.hpp"

namespace uficlab {

/// Physics, controller, and tank setup shared by every command. Reads the
/// surface.*, robot.*, controller.*, tank.*, sim.* and seed keys.
SimConfig sim_config_from(const Config& cfg);

/// Each command writes its artifacts under out_dir plus a report JSON.
/// Outputs are deterministic for a fixed config and inputs: stable key order,
/// round-trip exact numbers, no timestamps, no absolute paths.

/// Samples skills on the configured surface, simulates each, and stores the
/// skill CSVs, per-step power labels, and a manifest with seeds and hashes.
void cmd_collect(const Config& cfg, const std::string& out_dir);

/// Trains the power estimator on a collect directory; writes model.json,
/// history.csv, and train_report.json (including the trajectory split).
void cmd_train(const Config& cfg, const std::string& collect_dir,
               const std::string& out_dir);

/// Predicts the power trace and task energy for one skill CSV.
void cmd_estimate(const Config& cfg, const std::string& model_path,
                  const std::string& skill_path, const std::string& out_dir);

/// Scores the model on the held-out test split and on freshly generated
/// skills over the configured transfer surfaces.
void cmd_eval(const Config& cfg, const std::string& collect_dir,
              const std::string& train_dir, const std::string& out_dir);

/// Predicted task energy over a grid of start points on the configured surface.
void cmd_heatmap(const Config& cfg, const std::string& model_path,
                 const std::string& out_dir);

/// Contact-loss comparison of scalar and scheduled tank budgeting.
void cmd_safety(const Config& cfg, const std::string& model_path,
                const std::string& out_dir);

}  // namespace uficlab
