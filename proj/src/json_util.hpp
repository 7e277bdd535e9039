#pragma once

#include <nlohmann/json.hpp>

#include "calderon/error.hpp"
#include "calderon/types.hpp"

namespace calderon::detail {

inline nlohmann::json complex_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline cplx complex_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw io_error("expected [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline nlohmann::json vector_json(const Eigen::VectorXcd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(complex_json(v(i)));
  return a;
}

inline Eigen::VectorXcd vector_from(const nlohmann::json& j) {
  if (!j.is_array()) throw io_error("expected array of [re, im] pairs");
  Eigen::VectorXcd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from(j[i]);
  return v;
}

}  // namespace calderon::detail
