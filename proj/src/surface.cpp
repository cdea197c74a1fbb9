#include "uficlab/surface.hpp"

#include <cmath>

namespace uficlab {

SurfaceKind surface_kind_from_string(const std::string& s) {
  if (s == "planar") return SurfaceKind::planar;
  if (s == "inclined") return SurfaceKind::inclined;
  if (s == "curved") return SurfaceKind::curved;
  if (s == "heightfield" || s == "custom-heightfield") return SurfaceKind::heightfield;
  throw ConfigError("unknown surface kind '" + s + "'");
}

std::string to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::planar: return "planar";
    case SurfaceKind::inclined: return "inclined";
    case SurfaceKind::curved: return "curved";
    case SurfaceKind::heightfield: return "heightfield";
  }
  return "?";
}

SurfaceModel SurfaceModel::from_config(const Config& cfg, const std::string& prefix) {
  SurfaceModel s;
  s.kind = surface_kind_from_string(cfg.get_string(prefix + "kind", "planar"));
  s.mu = cfg.get_double(prefix + "mu", s.mu);
  s.k_n = cfg.get_double(prefix + "k_n", s.k_n);
  s.b_n = cfg.get_double(prefix + "b_n", s.b_n);
  s.amplitude = cfg.get_double(prefix + "amplitude", s.amplitude);
  s.frequency = cfg.get_double(prefix + "frequency", s.frequency);
  s.incline_grade = cfg.get_double(prefix + "incline_grade", s.incline_grade);
  s.workspace = cfg.get_double(prefix + "workspace", s.workspace);
  s.v_reg = cfg.get_double(prefix + "v_reg", s.v_reg);
  s.id = cfg.get_string(prefix + "id", to_string(s.kind));
  if (cfg.has(prefix + "poly")) s.poly = cfg.get_doubles(prefix + "poly");
  if (cfg.has(prefix + "gap_u_min")) {
    GapRegion g;
    g.u_min = cfg.get_double(prefix + "gap_u_min");
    g.u_max = cfg.get_double(prefix + "gap_u_max");
    g.v_min = cfg.get_double(prefix + "gap_v_min");
    g.v_max = cfg.get_double(prefix + "gap_v_max");
    s.gap = g;
  }
  s.validate();
  return s;
}

void SurfaceModel::validate() const {
  if (!(mu > 0.0 && mu <= 1.0)) throw ConfigError("surface mu must be in (0, 1]");
  if (!(k_n > 0.0)) throw ConfigError("surface k_n must be positive");
  if (b_n < 0.0) throw ConfigError("surface b_n must be nonnegative");
  if (!(workspace > 0.0)) throw ConfigError("surface workspace must be positive");
  if (!(v_reg > 0.0)) throw ConfigError("surface v_reg must be positive");
  if (kind == SurfaceKind::heightfield && poly.size() != 10)
    throw ConfigError("heightfield surface needs 10 cubic coefficients "
                      "(1,u,v,u2,uv,v2,u3,u2v,uv2,v3)");
  if (gap && (gap->u_min > gap->u_max || gap->v_min > gap->v_max))
    throw ConfigError("surface gap region is inverted");
}

double SurfaceModel::height(double u, double v) const {
  switch (kind) {
    case SurfaceKind::planar: return 0.0;
    case SurfaceKind::inclined: return incline_grade * u;
    case SurfaceKind::curved:
      return amplitude * std::sin(frequency * u) * std::cos(frequency * v);
    case SurfaceKind::heightfield: {
      const double* c = poly.data();
      return c[0] + c[1] * u + c[2] * v + c[3] * u * u + c[4] * u * v + c[5] * v * v +
             c[6] * u * u * u + c[7] * u * u * v + c[8] * u * v * v + c[9] * v * v * v;
    }
  }
  return 0.0;
}

Eigen::Vector2d SurfaceModel::gradient(double u, double v) const {
  switch (kind) {
    case SurfaceKind::planar: return {0.0, 0.0};
    case SurfaceKind::inclined: return {incline_grade, 0.0};
    case SurfaceKind::curved: {
      const double su = std::sin(frequency * u), cu = std::cos(frequency * u);
      const double sv = std::sin(frequency * v), cv = std::cos(frequency * v);
      return {amplitude * frequency * cu * cv, -amplitude * frequency * su * sv};
    }
    case SurfaceKind::heightfield: {
      const double* c = poly.data();
      return {c[1] + 2 * c[3] * u + c[4] * v + 3 * c[6] * u * u + 2 * c[7] * u * v + c[8] * v * v,
              c[2] + c[4] * u + 2 * c[5] * v + c[7] * u * u + 2 * c[8] * u * v + 3 * c[9] * v * v};
    }
  }
  return {0.0, 0.0};
}

std::pair<double, Vec3> SurfaceModel::eval(double u, double v) const {
  if (!in_workspace(u, v))
    throw DomainError("surface query (" + std::to_string(u) + ", " + std::to_string(v) +
                      ") outside workspace bound " + std::to_string(workspace));
  const Eigen::Vector2d g = gradient(u, v);
  Vec3 n(-g.x(), -g.y(), 1.0);
  n.normalize();
  return {height(u, v), n};
}

ContactState SurfaceModel::contact(const Vec3& position, const Vec3& velocity) const {
  ContactState out;
  const double u = position.x(), v = position.y();
  if (!in_workspace(u, v)) return out;
  if (gap && gap->contains(u, v)) return out;

  const Eigen::Vector2d grad = gradient(u, v);
  Vec3 n(-grad.x(), -grad.y(), 1.0);
  const double inv_len = 1.0 / n.norm();
  n *= inv_len;
  out.normal = n;

  // Perpendicular distance to the local tangent plane; n_z = inv_len.
  const double penetration = (height(u, v) - position.z()) * inv_len;
  if (penetration <= 0.0) return out;

  out.penetration = penetration;
  const double approach = velocity.dot(n);  // >0 separating
  const double f_n = std::max(0.0, k_n * penetration - b_n * approach);
  out.in_contact = true;
  if (f_n == 0.0) return out;

  const Vec3 v_t = velocity - approach * n;
  const double v_t_norm = v_t.norm();
  Vec3 force = f_n * n;
  if (v_t_norm > 0.0)
    force -= mu * f_n * std::tanh(v_t_norm / v_reg) * (v_t / v_t_norm);
  out.f_ext.head<3>() = force;
  return out;
}

}  // namespace uficlab
