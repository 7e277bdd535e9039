#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "calderon/types.hpp"

namespace calderon {

/// Smooth compactly supported bump: gamma contribution
///   (peak - 1) * exp(1 - 1 / (1 - |z - center|^2 / support^2))  for |z - center| < support.
struct Bump {
  cplx center{0.0};
  double support = 0.8;
  double peak = 1.5;  // gamma value at the center when the bump stands alone
};

/// Real isotropic conductivity on the plane, identically 1 outside a disk.
class ConductivityField {
 public:
  /// gamma == 1.
  static ConductivityField unit();
  /// Sum of bumps over the background 1.
  static ConductivityField bumps(std::vector<Bump> bumps);
  /// Arbitrary field; `dz` (the Wirtinger derivative of gamma) may be empty.
  static ConductivityField custom(std::function<double(cplx)> value, double support_radius,
                                  double lower_bound, std::function<cplx(cplx)> dz = {});

  /// Parses {"type": "unit" | "radial-bump" | "offset-bump", ...}.
  static ConductivityField from_json(const nlohmann::json& spec);
  nlohmann::json to_json() const { return spec_; }

  double operator()(cplx z) const { return value_(z); }
  /// d gamma / dz = (d_x - i d_y) gamma / 2 when known in closed form.
  std::optional<cplx> dz(cplx z) const;
  bool has_exact_gradient() const { return static_cast<bool>(dz_); }

  double support_radius() const { return support_radius_; }
  double lower_bound() const { return lower_bound_; }
  bool is_unit() const { return is_unit_; }
  const std::string& kind() const { return kind_; }

  /// Checks gamma >= lower bound on a sampling grid over the disk of radius
  /// `radius`, and gamma == 1 on the annulus support_radius <= |z| <= radius.
  void validate(double radius, int samples = 64) const;

 private:
  std::function<double(cplx)> value_;
  std::function<cplx(cplx)> dz_;
  double support_radius_ = 0.0;
  double lower_bound_ = 1.0;
  bool is_unit_ = false;
  std::string kind_ = "custom";
  nlohmann::json spec_;
};

/// Radial profile of a single centered bump and its derivative, for oracles.
double bump_profile(double r, double support, double peak);
double bump_profile_derivative(double r, double support, double peak);

}  // namespace calderon
