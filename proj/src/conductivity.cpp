#include "calderon/conductivity.hpp"

#include <algorithm>
#include <cmath>

#include "calderon/error.hpp"

namespace calderon {

double bump_profile(double r, double support, double peak) {
  const double t = r / support;
  if (t >= 1.0) return 1.0;
  return 1.0 + (peak - 1.0) * std::exp(1.0 - 1.0 / (1.0 - t * t));
}

double bump_profile_derivative(double r, double support, double peak) {
  const double t = r / support;
  if (t >= 1.0) return 0.0;
  const double s = 1.0 - t * t;
  const double e = (peak - 1.0) * std::exp(1.0 - 1.0 / s);
  return e * (-2.0 * t / (s * s)) / support;
}

ConductivityField ConductivityField::unit() {
  ConductivityField f;
  f.value_ = [](cplx) { return 1.0; };
  f.dz_ = [](cplx) { return cplx(0.0); };
  f.support_radius_ = 0.0;
  f.lower_bound_ = 1.0;
  f.is_unit_ = true;
  f.kind_ = "unit";
  f.spec_ = {{"type", "unit"}};
  return f;
}

ConductivityField ConductivityField::bumps(std::vector<Bump> list) {
  for (const auto& b : list) {
    if (!(b.support > 0.0)) throw parameter_error("bump support must be positive");
    if (!(b.peak > 0.0)) throw domain_error("bump peak must be positive");
  }
  if (list.empty()) return unit();

  ConductivityField f;
  f.value_ = [list](cplx z) {
    double g = 1.0;
    for (const auto& b : list) g += bump_profile(std::abs(z - b.center), b.support, b.peak) - 1.0;
    return g;
  };
  f.dz_ = [list](cplx z) {
    // d/dz of a radial profile p(|w|), w = z - c, is p'(r) * conj(w) / (2 r).
    cplx d{0.0};
    for (const auto& b : list) {
      const cplx w = z - b.center;
      const double r = std::abs(w);
      if (r == 0.0 || r >= b.support) continue;
      d += bump_profile_derivative(r, b.support, b.peak) * std::conj(w) / (2.0 * r);
    }
    return d;
  };
  double support = 0.0;
  double low = 1.0;
  for (const auto& b : list) {
    support = std::max(support, std::abs(b.center) + b.support);
    low += std::min(0.0, b.peak - 1.0);
  }
  if (!(low > 0.0)) throw domain_error("bump superposition may reach gamma <= 0");
  f.support_radius_ = support;
  f.lower_bound_ = low;
  f.kind_ = list.size() == 1 && list[0].center == cplx(0.0) ? "radial-bump" : "offset-bump";
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : list)
    arr.push_back({{"center", {b.center.real(), b.center.imag()}}, {"support", b.support}, {"peak", b.peak}});
  f.spec_ = {{"type", f.kind_}, {"bumps", arr}};
  return f;
}

ConductivityField ConductivityField::custom(std::function<double(cplx)> value, double support_radius,
                                            double lower_bound, std::function<cplx(cplx)> dz) {
  if (!value) throw parameter_error("custom conductivity needs an evaluator");
  if (!(lower_bound > 0.0)) throw domain_error("conductivity lower bound must be positive");
  ConductivityField f;
  f.value_ = std::move(value);
  f.dz_ = std::move(dz);
  f.support_radius_ = support_radius;
  f.lower_bound_ = lower_bound;
  f.kind_ = "custom";
  f.spec_ = {{"type", "custom"}};
  return f;
}

std::optional<cplx> ConductivityField::dz(cplx z) const {
  if (!dz_) return std::nullopt;
  return dz_(z);
}

ConductivityField ConductivityField::from_json(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("type") || !spec["type"].is_string())
    throw parameter_error("phantom spec must be an object with a string \"type\"");
  const std::string type = spec["type"];
  auto number = [&](const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw parameter_error(std::string("phantom field \"") + key + "\" must be a number");
    return j[key].get<double>();
  };
  auto read_bump = [&](const nlohmann::json& j) {
    Bump b;
    b.support = number(j, "support", 0.8);
    b.peak = number(j, "peak", 1.5);
    if (j.contains("center")) {
      const auto& c = j["center"];
      if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
        throw parameter_error("phantom \"center\" must be [x, y]");
      b.center = {c[0].get<double>(), c[1].get<double>()};
    }
    return b;
  };

  if (type == "unit") return unit();
  if (type == "radial-bump") {
    Bump b = read_bump(spec);
    if (b.center != cplx(0.0)) throw parameter_error("radial-bump is centered; use offset-bump");
    return bumps({b});
  }
  if (type == "offset-bump") {
    if (spec.contains("bumps")) {
      if (!spec["bumps"].is_array()) throw parameter_error("\"bumps\" must be an array");
      std::vector<Bump> list;
      for (const auto& j : spec["bumps"]) list.push_back(read_bump(j));
      return bumps(std::move(list));
    }
    if (!spec.contains("center")) throw parameter_error("offset-bump needs \"center\"");
    return bumps({read_bump(spec)});
  }
  throw parameter_error("unknown phantom type \"" + type + "\"");
}

void ConductivityField::validate(double radius, int samples) const {
  if (support_radius_ >= radius)
    throw domain_error("conductivity support radius " + std::to_string(support_radius_) +
                       " must lie strictly inside the domain radius " + std::to_string(radius));
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < samples; ++j) {
      const cplx z{radius * (-1.0 + 2.0 * (i + 0.5) / samples), radius * (-1.0 + 2.0 * (j + 0.5) / samples)};
      const double r = std::abs(z);
      if (r > radius) continue;
      const double g = value_(z);
      if (!(g >= lower_bound_ * (1.0 - 1e-12)))
        throw domain_error("conductivity below its lower bound at sampled point");
      if (r >= support_radius_ && std::abs(g - 1.0) > 1e-12)
        throw domain_error("conductivity differs from 1 outside its declared support");
    }
  }
}

}  // namespace calderon
