#pragma once

#include <cstdint>
#include <string>

#include "uficlab/surface.hpp"
#include "uficlab/types.hpp"

namespace uficlab {

enum class Pattern { line, zigzag, spiral, arc, random_walk };

Pattern pattern_from_string(const std::string& s);
std::string to_string(Pattern p);

/// Desired trajectory on a surface plus a time-invariant wrench policy.
/// Rows of x_d / x_dot_d are samples at uniform 1 kHz; x_d = (position,
/// rotation vector aligning the tool z-axis with the local surface normal).
struct SkillProfile {
  VectorXd t;
  MatRM x_d;      // N x 6
  MatRM x_dot_d;  // N x 6
  Vec6 f_d = Vec6::Zero();  // EE frame, constant over the skill
  std::string surface_id;
  Eigen::Vector2d start_uv = Eigen::Vector2d::Zero();
  Pattern pattern = Pattern::line;
  bool truncated = false;  // path left the workspace and was cut short

  Eigen::Index size() const { return t.size(); }
  double dt() const { return t.size() > 1 ? t[1] - t[0] : kDefaultDt; }
};

struct PatternSpec {
  Pattern pattern = Pattern::line;
  Eigen::Vector2d start_uv = Eigen::Vector2d::Zero();
  double speed = 0.05;       // m/s along the 3D path, held constant
  double length = 0.5;       // m of 3D arclength (sets the duration)
  Vec6 f_d = (Vec6() << 0, 0, -5, 0, 0, 0).finished();
  std::uint64_t seed = 0;    // random_walk shape
  double heading = 0.0;      // rad, initial tangent direction in (u,v)
  double hold_s = 0.0;       // settle tail at the final pose, zero velocity
  double dt = kDefaultDt;

  // Pattern geometry.
  double zigzag_leg = 0.08;        // m per leg in (u,v)
  double zigzag_angle = 1.047197551196597746;  // rad, ±60° about the heading
  double arc_radius = 0.15;        // m
  double spiral_r0 = 0.02;         // m, initial radius
  double spiral_growth = 0.008;    // m per rad
};

/// Constant-speed path of the requested pattern in (u,v), lifted onto the
/// surface; velocities are analytic tangents scaled to `speed`, so ‖ẋ_d‖ of the
/// translational part equals `speed` exactly (zigzag corners switch legs
/// between samples). Throws DomainError if start_uv is outside the workspace;
/// a path that exits the workspace is truncated and flagged.
SkillProfile generate_pattern(const SurfaceModel& surface, const PatternSpec& spec);

SkillProfile generate_pattern(const SurfaceModel& surface, Pattern pattern,
                              const Eigen::Vector2d& start_uv, double speed, double length,
                              const Vec6& f_d, std::uint64_t seed);

/// CSV persistence; header `t,xd0..xd5,vd0..vd5,fd0..fd5`, one row per sample,
/// round-trip exact decimal. Profile metadata travels in `#` comment lines.
void skill_to_csv(const SkillProfile& skill, const std::string& path);
SkillProfile csv_to_skill(const std::string& path);

}  // namespace uficlab
