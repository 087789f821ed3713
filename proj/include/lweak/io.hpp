#ifndef LWEAK_IO_HPP_
#define LWEAK_IO_HPP_

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "lweak/coefficients.hpp"
#include "lweak/models.hpp"

// Model documents (schema_version 1):
//
//   {"schema_version": 1,
//    "variant": "iid" | "moving_average" | "cumsum_transform",
//    "coeffs": [numbers],                      // not used by iid
//    "law": {"type": "uniform", "a": -1, "b": 1}
//         | {"type": "rademacher"}
//         | {"type": "truncated_gaussian", "bound": 3},
//    "transform": {"type": "identity"} | {"type": "neg_exp"}
//               | {"type": "gauss_bump_plus_x", "beta": 2}}   // cumsum only
//
// Gamma documents (schema_version 1):
//
//   {"schema_version": 1, "variant": "finite", "values": [...], "note": "..."}
//   {"schema_version": 1, "variant": "geometric", "A": 1, "rho": 0.5, "note": "..."}

namespace lweak {

inline constexpr int kSchemaVersion = 1;

class ModelFormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void check_version(const nlohmann::json &j) {
  if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion)
    throw ModelFormatError("unsupported schema_version " + j.at("schema_version").dump());
}

}  // namespace detail

inline nlohmann::json to_json(const InnovationLaw &law) {
  return std::visit(overloaded{
                        [](const UniformOnInterval &u) {
                          return nlohmann::json{{"type", "uniform"}, {"a", u.a}, {"b", u.b}};
                        },
                        [](const Rademacher &) { return nlohmann::json{{"type", "rademacher"}}; },
                        [](const TruncatedGaussian &g) {
                          return nlohmann::json{{"type", "truncated_gaussian"}, {"bound", g.bound}};
                        },
                    },
                    law.variant());
}

inline InnovationLaw law_from_json(const nlohmann::json &j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "uniform") return InnovationLaw::uniform(j.at("a").get<double>(), j.at("b").get<double>());
  if (type == "rademacher") return InnovationLaw::rademacher();
  if (type == "truncated_gaussian") return InnovationLaw::truncated_gaussian(j.at("bound").get<double>());
  throw ModelFormatError("unknown law type '" + type + "'");
}

inline nlohmann::json to_json(const Transform &t) {
  nlohmann::json j{{"type", t.name()}};
  if (const auto *g = std::get_if<GaussBumpPlusX>(&t.variant())) j["beta"] = g->beta;
  return j;
}

inline Transform transform_from_json(const nlohmann::json &j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "identity") return Transform::identity();
  if (type == "neg_exp") return Transform::neg_exp();
  if (type == "gauss_bump_plus_x") return Transform::gauss_bump_plus_x(j.at("beta").get<double>());
  throw ModelFormatError("unknown transform type '" + type + "'");
}

inline nlohmann::json to_json(const ModelSpec &model) {
  nlohmann::json j{{"schema_version", kSchemaVersion}, {"variant", model.variant_name()},
                   {"law", to_json(model.law())}};
  std::visit(overloaded{
                 [](const IID &) {},
                 [&](const MovingAverage &m) { j["coeffs"] = m.coeffs; },
                 [&](const CumSumTransform &c) {
                   j["coeffs"] = c.coeffs;
                   j["transform"] = to_json(c.transform);
                 },
             },
             model.variant());
  return j;
}

/// Parses and validates a model document. Any structural problem or invalid
/// parameter surfaces as ModelFormatError.
inline ModelSpec model_from_json(const nlohmann::json &j) {
  try {
    detail::check_version(j);
    const auto variant = j.at("variant").get<std::string>();
    const auto law = law_from_json(j.at("law"));
    if (variant == "iid") return ModelSpec::iid(law);
    if (variant == "moving_average")
      return ModelSpec::moving_average(j.at("coeffs").get<std::vector<double>>(), law);
    if (variant == "cumsum_transform") {
      const auto t = j.contains("transform") ? transform_from_json(j.at("transform"))
                                             : Transform::identity();
      return ModelSpec::cumsum_transform(j.at("coeffs").get<std::vector<double>>(), t, law);
    }
    throw ModelFormatError("unknown model variant '" + variant + "'");
  } catch (const ModelFormatError &) {
    throw;
  } catch (const std::exception &e) {
    throw ModelFormatError(std::string("invalid model document: ") + e.what());
  }
}

inline ModelSpec model_from_string(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception &e) {
    throw ModelFormatError(std::string("malformed model JSON: ") + e.what());
  }
  return model_from_json(j);
}

inline ModelSpec load_model(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ModelFormatError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_string(ss.str());
}

inline nlohmann::json to_json(const GammaSequence &gamma) {
  nlohmann::json j{{"schema_version", kSchemaVersion}, {"note", gamma.note()}};
  std::visit(overloaded{
                 [&](const FiniteGamma &f) {
                   j["variant"] = "finite";
                   j["values"] = f.values;
                 },
                 [&](const GeometricGamma &g) {
                   j["variant"] = "geometric";
                   j["A"] = g.amplitude;
                   j["rho"] = g.rho;
                 },
             },
             gamma.variant());
  return j;
}

inline GammaSequence gamma_from_json(const nlohmann::json &j) {
  try {
    detail::check_version(j);
    const auto note = j.value("note", std::string{});
    const auto variant = j.at("variant").get<std::string>();
    if (variant == "finite")
      return GammaSequence::finite(j.at("values").get<std::vector<double>>(), note);
    if (variant == "geometric")
      return GammaSequence::geometric(j.at("A").get<double>(), j.at("rho").get<double>(), note);
    throw ModelFormatError("unknown gamma variant '" + variant + "'");
  } catch (const ModelFormatError &) {
    throw;
  } catch (const std::exception &e) {
    throw ModelFormatError(std::string("invalid gamma document: ") + e.what());
  }
}

}  // namespace lweak

#endif  // LWEAK_IO_HPP_
