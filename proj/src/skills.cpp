#include "uficlab/skills.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "uficlab/csv.hpp"
#include "uficlab/rng.hpp"

namespace uficlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Planar curve γ(p) with tangent dγ/dp; p is the curve parameter
/// (2D arclength for all patterns except the spiral's polar angle).
struct PlanarPath {
  virtual ~PlanarPath() = default;
  virtual Eigen::Vector2d point(double p) const = 0;
  virtual Eigen::Vector2d tangent(double p) const = 0;
};

struct LinePath final : PlanarPath {
  Eigen::Vector2d start, dir;
  LinePath(const Eigen::Vector2d& s, double heading)
      : start(s), dir(std::cos(heading), std::sin(heading)) {}
  Eigen::Vector2d point(double p) const override { return start + p * dir; }
  Eigen::Vector2d tangent(double) const override { return dir; }
};

struct ZigzagPath final : PlanarPath {
  Eigen::Vector2d start;
  double heading, angle, leg;
  ZigzagPath(const Eigen::Vector2d& s, double heading_, double angle_, double leg_)
      : start(s), heading(heading_), angle(angle_), leg(leg_) {}
  Eigen::Vector2d dir_of_leg(long i) const {
    const double a = heading + ((i % 2 == 0) ? angle : -angle);
    return {std::cos(a), std::sin(a)};
  }
  Eigen::Vector2d point(double p) const override {
    const long i = std::max(0L, static_cast<long>(std::floor(p / leg)));
    // Corner positions telescope: even/odd legs alternate between two headings.
    Eigen::Vector2d q = start;
    const long pairs = i / 2;
    q += pairs * leg * (dir_of_leg(0) + dir_of_leg(1));
    if (i % 2 == 1) q += leg * dir_of_leg(0);
    return q + (p - i * leg) * dir_of_leg(i);
  }
  Eigen::Vector2d tangent(double p) const override {
    const long i = std::max(0L, static_cast<long>(std::floor(p / leg)));
    return dir_of_leg(i);
  }
};

struct ArcPath final : PlanarPath {
  Eigen::Vector2d center;
  double radius, phi0, turn;
  ArcPath(const Eigen::Vector2d& s, double heading, double radius_, double turn_)
      : radius(radius_), turn(turn_) {
    phi0 = heading - turn * kPi / 2.0;
    center = s - radius * Eigen::Vector2d(std::cos(phi0), std::sin(phi0));
  }
  Eigen::Vector2d point(double p) const override {
    const double phi = phi0 + turn * p / radius;
    return center + radius * Eigen::Vector2d(std::cos(phi), std::sin(phi));
  }
  Eigen::Vector2d tangent(double p) const override {
    const double phi = phi0 + turn * p / radius;
    return turn * Eigen::Vector2d(-std::sin(phi), std::cos(phi));
  }
};

struct SpiralPath final : PlanarPath {
  // p is the polar angle; the whole spiral is rotated so the initial tangent
  // points along `heading` and γ(0) = start.
  Eigen::Vector2d start;
  double r0, b;
  Eigen::Matrix2d rot;
  SpiralPath(const Eigen::Vector2d& s, double heading, double r0_, double b_)
      : start(s), r0(r0_), b(b_) {
    const double alpha = heading - std::atan2(r0, b);
    rot << std::cos(alpha), -std::sin(alpha), std::sin(alpha), std::cos(alpha);
  }
  Eigen::Vector2d point(double p) const override {
    const double r = r0 + b * p;
    const Eigen::Vector2d raw(r * std::cos(p) - r0, r * std::sin(p));
    return start + rot * raw;
  }
  Eigen::Vector2d tangent(double p) const override {
    const double r = r0 + b * p;
    const Eigen::Vector2d raw(b * std::cos(p) - r * std::sin(p),
                              b * std::sin(p) + r * std::cos(p));
    return rot * raw;
  }
};

struct RandomWalkPath final : PlanarPath {
  // Smooth seeded heading process θ(p) = heading + Σ a_j sin(ω_j p + φ_j).
  // point() integrates the heading with fine Simpson steps cached on a grid so
  // repeated queries are cheap and deterministic.
  Eigen::Vector2d start;
  double heading;
  std::array<double, 4> a{}, w{}, ph{};
  static constexpr double kGrid = 1e-4;  // m of p per cached node
  mutable std::vector<Eigen::Vector2d> cache{};

  RandomWalkPath(const Eigen::Vector2d& s, double heading_, std::uint64_t seed)
      : start(s), heading(heading_) {
    auto eng = make_engine(seed, seed_tag::kSkillWalk);
    std::uniform_real_distribution<double> ua(0.2, 0.7), uw(4.0, 20.0), up(0.0, 2.0 * kPi);
    for (int j = 0; j < 4; ++j) {
      a[static_cast<std::size_t>(j)] = ua(eng);
      w[static_cast<std::size_t>(j)] = uw(eng);
      ph[static_cast<std::size_t>(j)] = up(eng);
    }
    cache.push_back(start);
  }
  double theta(double p) const {
    double t = heading;
    for (int j = 0; j < 4; ++j)
      t += a[static_cast<std::size_t>(j)] *
           std::sin(w[static_cast<std::size_t>(j)] * p + ph[static_cast<std::size_t>(j)]);
    return t;
  }
  Eigen::Vector2d tangent(double p) const override {
    const double t = theta(p);
    return {std::cos(t), std::sin(t)};
  }
  Eigen::Vector2d point(double p) const override {
    const auto need = static_cast<std::size_t>(std::floor(p / kGrid));
    while (cache.size() <= need + 1) {
      const double p0 = kGrid * static_cast<double>(cache.size() - 1);
      // Simpson over one grid cell; integrand is smooth and slow.
      const Eigen::Vector2d inc =
          (tangent(p0) + 4.0 * tangent(p0 + kGrid / 2) + tangent(p0 + kGrid)) * (kGrid / 6.0);
      cache.push_back(cache.back() + inc);
    }
    const double p0 = kGrid * static_cast<double>(need);
    const Eigen::Vector2d inc =
        (tangent(p0) + 4.0 * tangent(0.5 * (p0 + p)) + tangent(p)) * ((p - p0) / 6.0);
    return cache[need] + inc;
  }
};

std::unique_ptr<PlanarPath> make_path(const PatternSpec& spec) {
  switch (spec.pattern) {
    case Pattern::line:
      return std::make_unique<LinePath>(spec.start_uv, spec.heading);
    case Pattern::zigzag:
      return std::make_unique<ZigzagPath>(spec.start_uv, spec.heading, spec.zigzag_angle,
                                          spec.zigzag_leg);
    case Pattern::arc:
      return std::make_unique<ArcPath>(spec.start_uv, spec.heading, spec.arc_radius, 1.0);
    case Pattern::spiral:
      return std::make_unique<SpiralPath>(spec.start_uv, spec.heading, spec.spiral_r0,
                                          spec.spiral_growth);
    case Pattern::random_walk:
      return std::make_unique<RandomWalkPath>(spec.start_uv, spec.heading, spec.seed);
  }
  throw DomainError("unreachable pattern");
}

/// Rotation vector taking the base z-axis onto the outward normal.
Vec3 normal_to_rotvec(const Vec3& n) {
  const Vec3 axis_raw(-n.y(), n.x(), 0.0);  // z × n
  const double s = axis_raw.norm();
  if (s < 1e-14) return Vec3::Zero();
  const double angle = std::atan2(s, n.z());
  return axis_raw / s * angle;
}

}  // namespace

Pattern pattern_from_string(const std::string& s) {
  if (s == "line") return Pattern::line;
  if (s == "zigzag") return Pattern::zigzag;
  if (s == "spiral") return Pattern::spiral;
  if (s == "arc") return Pattern::arc;
  if (s == "random_walk") return Pattern::random_walk;
  throw ConfigError("unknown pattern '" + s + "'");
}

std::string to_string(Pattern p) {
  switch (p) {
    case Pattern::line: return "line";
    case Pattern::zigzag: return "zigzag";
    case Pattern::spiral: return "spiral";
    case Pattern::arc: return "arc";
    case Pattern::random_walk: return "random_walk";
  }
  return "?";
}

SkillProfile generate_pattern(const SurfaceModel& surface, const PatternSpec& spec) {
  if (!(spec.speed > 0.0)) throw DomainError("pattern speed must be positive");
  if (!(spec.length > 0.0)) throw DomainError("pattern length must be positive");
  if (!surface.in_workspace(spec.start_uv.x(), spec.start_uv.y()))
    throw DomainError("pattern start outside workspace");

  const auto path = make_path(spec);
  const double dt = spec.dt;
  const auto n_move = static_cast<Eigen::Index>(std::llround(spec.length / spec.speed / dt));
  const auto n_hold = static_cast<Eigen::Index>(std::llround(spec.hold_s / dt));

  // ṗ = speed / ‖(γ', ∇h·γ')‖ keeps the 3D speed constant; γ' is dγ/dp.
  auto p_rate = [&](double p) {
    const Eigen::Vector2d g = path->tangent(p);
    const Eigen::Vector2d uv = path->point(p);
    const Eigen::Vector2d grad = surface.gradient(uv.x(), uv.y());
    const double dz = grad.dot(g);
    return spec.speed / std::sqrt(g.squaredNorm() + dz * dz);
  };

  SkillProfile out;
  out.f_d = spec.f_d;
  out.surface_id = surface.id;
  out.start_uv = spec.start_uv;
  out.pattern = spec.pattern;

  std::vector<double> ps;
  ps.reserve(static_cast<std::size_t>(n_move) + 1);
  double p = 0.0;
  ps.push_back(p);
  Eigen::Index n_valid = n_move + 1;
  for (Eigen::Index k = 0; k < n_move; ++k) {
    const double k1 = p_rate(p);
    const double k2 = p_rate(p + 0.5 * dt * k1);
    const double k3 = p_rate(p + 0.5 * dt * k2);
    const double k4 = p_rate(p + dt * k3);
    p += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    const Eigen::Vector2d uv = path->point(p);
    if (!surface.in_workspace(uv.x(), uv.y())) {
      out.truncated = true;
      n_valid = k + 1;
      break;
    }
    ps.push_back(p);
  }

  const Eigen::Index n = n_valid + n_hold;
  out.t.resize(n);
  out.x_d.resize(n, 6);
  out.x_dot_d.resize(n, 6);

  for (Eigen::Index k = 0; k < n_valid; ++k) {
    const double pk = ps[static_cast<std::size_t>(k)];
    const Eigen::Vector2d uv = path->point(pk);
    const Eigen::Vector2d g = path->tangent(pk);
    const Eigen::Vector2d grad = surface.gradient(uv.x(), uv.y());
    const double h = surface.height(uv.x(), uv.y());
    Vec3 n_hat(-grad.x(), -grad.y(), 1.0);
    n_hat.normalize();

    const double dz = grad.dot(g);
    const double rate = spec.speed / std::sqrt(g.squaredNorm() + dz * dz);

    out.t[k] = dt * static_cast<double>(k);
    out.x_d(k, 0) = uv.x();
    out.x_d(k, 1) = uv.y();
    out.x_d(k, 2) = h;
    out.x_d.row(k).tail<3>() = normal_to_rotvec(n_hat).transpose();
    out.x_dot_d(k, 0) = rate * g.x();
    out.x_dot_d(k, 1) = rate * g.y();
    out.x_dot_d(k, 2) = rate * dz;
    // Rotational rate by central differences once all rotation samples exist.
  }
  for (Eigen::Index k = n_valid; k < n; ++k) {
    out.t[k] = dt * static_cast<double>(k);
    out.x_d.row(k) = out.x_d.row(n_valid - 1);
    out.x_dot_d.row(k).setZero();
  }

  // Angular velocity of the normal-tracking rotation vector: central
  // differences interior, one-sided at the ends, zero over the hold tail.
  for (Eigen::Index k = 0; k < n_valid; ++k) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, k - 1);
    const Eigen::Index hi = std::min(n_valid - 1, k + 1);
    if (hi == lo) {
      out.x_dot_d.row(k).tail<3>().setZero();
    } else {
      out.x_dot_d.row(k).tail<3>() =
          (out.x_d.row(hi).tail<3>() - out.x_d.row(lo).tail<3>()) /
          (static_cast<double>(hi - lo) * dt);
    }
  }
  return out;
}

SkillProfile generate_pattern(const SurfaceModel& surface, Pattern pattern,
                              const Eigen::Vector2d& start_uv, double speed, double length,
                              const Vec6& f_d, std::uint64_t seed) {
  PatternSpec spec;
  spec.pattern = pattern;
  spec.start_uv = start_uv;
  spec.speed = speed;
  spec.length = length;
  spec.f_d = f_d;
  spec.seed = seed;
  return generate_pattern(surface, spec);
}

static const std::vector<std::string> kSkillColumns = {
    "t",   "xd0", "xd1", "xd2", "xd3", "xd4", "xd5", "vd0", "vd1", "vd2",
    "vd3", "vd4", "vd5", "fd0", "fd1", "fd2", "fd3", "fd4", "fd5"};

void skill_to_csv(const SkillProfile& skill, const std::string& path) {
  CsvTable table;
  table.metadata["pattern"] = to_string(skill.pattern);
  table.metadata["surface_id"] = skill.surface_id;
  table.metadata["start_u"] = double_to_string(skill.start_uv.x());
  table.metadata["start_v"] = double_to_string(skill.start_uv.y());
  table.metadata["truncated"] = skill.truncated ? "1" : "0";
  table.columns = kSkillColumns;
  const Eigen::Index n = skill.size();
  table.data.resize(n, 19);
  table.data.col(0) = skill.t;
  table.data.block(0, 1, n, 6) = skill.x_d;
  table.data.block(0, 7, n, 6) = skill.x_dot_d;
  table.data.block(0, 13, n, 6) = skill.f_d.transpose().replicate(n, 1);
  table.write(path);
}

SkillProfile csv_to_skill(const std::string& path) {
  const CsvTable table = CsvTable::read(path);
  if (table.columns != kSkillColumns)
    throw ParseError("skill CSV header mismatch in '" + path + "'", 1);
  if (table.rows() == 0) throw ParseError("skill CSV has no samples in '" + path + "'", 2);

  SkillProfile out;
  const Eigen::Index n = table.rows();
  out.t = table.data.col(0);
  out.x_d = table.data.block(0, 1, n, 6);
  out.x_dot_d = table.data.block(0, 7, n, 6);
  out.f_d = table.data.block(0, 13, n, 6).row(0).transpose();

  const auto meta = [&](const char* key) -> std::string {
    const auto it = table.metadata.find(key);
    return it == table.metadata.end() ? std::string() : it->second;
  };
  if (!meta("pattern").empty()) out.pattern = pattern_from_string(meta("pattern"));
  out.surface_id = meta("surface_id");
  if (!meta("start_u").empty()) out.start_uv.x() = string_to_double(meta("start_u"));
  if (!meta("start_v").empty()) out.start_uv.y() = string_to_double(meta("start_v"));
  out.truncated = meta("truncated") == "1";
  return out;
}

}  // namespace uficlab
