#pragma once

// Versioned JSON documents for groups and polynomials.

#include <json.hpp>

#include "bergcov/polynomial.hpp"
#include "bergcov/reflection_group.hpp"

namespace bergcov {

inline constexpr int kGroupFormatVersion = 1;

/// {"format": "bergcov.group", "version", "dimension", "name", "order",
///  "elements": [row-major [re, im] lists], "generators", "reflections",
///  "hyperplanes": [{"root", "multiplicity", "fixing_reflections", "orbit_id"}]}
nlohmann::json group_to_json(const ReflectionGroup& group);
/// Rebuilds the group from its elements, verifying closure. Throws InvalidArgument
/// on a malformed document or an unsupported version.
ReflectionGroup group_from_json(const nlohmann::json& doc);

/// [[exponents, re, im], …] in exponent order.
nlohmann::json polynomial_to_json(const Polynomial& p);
Polynomial polynomial_from_json(const nlohmann::json& doc, int dimension);

nlohmann::json complex_to_json(cplx c);
nlohmann::json vector_to_json(const Vec& v);
nlohmann::json matrix_to_json(const Mat& m);

}  // namespace bergcov
