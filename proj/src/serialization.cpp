#include "bergcov/serialization.hpp"

#include <cmath>

namespace bergcov {

using nlohmann::json;

namespace {

cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidArgument("complex number must be a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

json complex_to_json(cplx c) { return json::array({c.real(), c.imag()}); }

json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

json matrix_to_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(complex_to_json(m(i, j)));
  return out;
}

json group_to_json(const ReflectionGroup& group) {
  json doc;
  doc["format"] = "bergcov.group";
  doc["version"] = kGroupFormatVersion;
  doc["dimension"] = group.dimension();
  doc["name"] = group.name();
  doc["order"] = group.order();
  json elements = json::array();
  for (const GroupElement& g : group.elements()) elements.push_back(matrix_to_json(g.matrix()));
  doc["elements"] = std::move(elements);
  doc["generators"] = group.generators();
  doc["reflections"] = group.reflections();
  json hyperplanes = json::array();
  for (const Hyperplane& h : reflecting_hyperplanes(group)) {
    hyperplanes.push_back({{"root", vector_to_json(h.root)},
                           {"multiplicity", h.multiplicity},
                           {"fixing_reflections", h.fixing_reflections},
                           {"orbit_id", h.orbit_id}});
  }
  doc["hyperplanes"] = std::move(hyperplanes);
  return doc;
}

ReflectionGroup group_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "bergcov.group") throw InvalidArgument("not a group document");
    if (doc.at("version").get<int>() != kGroupFormatVersion) throw InvalidArgument("unsupported group format version");
    const int n = doc.at("dimension").get<int>();
    if (n < 1 || n > kMaxDim) throw InvalidArgument("group dimension must be in [1, 4]");
    std::vector<GroupElement> elements;
    for (const json& e : doc.at("elements")) {
      if (!e.is_array() || static_cast<int>(e.size()) != n * n) throw InvalidArgument("element has the wrong size");
      Mat m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = complex_from_json(e[static_cast<std::size_t>(i * n + j)]);
      elements.emplace_back(m);
    }
    std::vector<GroupElement> generators;
    for (const json& idx : doc.at("generators")) generators.push_back(elements.at(idx.get<std::size_t>()));
    return assemble_group(std::move(elements), generators, doc.value("name", std::string{}), true);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed group document: ") + e.what());
  } catch (const std::out_of_range&) {
    throw InvalidArgument("generator index out of range");
  }
}

json polynomial_to_json(const Polynomial& p) {
  json out = json::array();
  for (const auto& [e, c] : p.terms()) out.push_back(json::array({e, c.real(), c.imag()}));
  return out;
}

Polynomial polynomial_from_json(const json& doc, int dimension) {
  try {
    Polynomial p(dimension);
    for (const json& term : doc) {
      if (!term.is_array() || term.size() != 3) throw InvalidArgument("polynomial term must be [exponents, re, im]");
      p.add_term(term[0].get<Exponent>(), {term[1].get<double>(), term[2].get<double>()});
    }
    return p;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed polynomial document: ") + e.what());
  }
}

}  // namespace bergcov
