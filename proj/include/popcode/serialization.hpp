#pragma once

// JSON form of a code:
//   {"mu": 30.0, "modules": [{"lambda": 1.0, "fields": [[a, b], ...]}, ...]}
// Doubles are emitted with shortest round-trip formatting, so parse(dump(c))
// reproduces every coordinate bit for bit.

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "popcode/codes.hpp"

namespace popcode {

inline nlohmann::json code_to_json(const Code& code) {
  nlohmann::json j;
  j["mu"] = code.mu();
  j["modules"] = nlohmann::json::array();
  for (const auto& m : code.modules()) {
    nlohmann::json jm;
    jm["lambda"] = m.lambda;
    jm["fields"] = nlohmann::json::array();
    for (const auto& f : m.fields)
      jm["fields"].push_back({f.start().theta(), f.end().theta()});
    j["modules"].push_back(std::move(jm));
  }
  return j;
}

inline Code code_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("mu") || !j.contains("modules"))
    throw std::invalid_argument("code json: need object with mu and modules");
  double mu = j.at("mu").get<double>();
  std::vector<Code::Module> mods;
  for (const auto& jm : j.at("modules")) {
    double lambda = jm.at("lambda").get<double>();
    Code::Module m{lambda, {}, {}};
    for (const auto& jf : jm.at("fields")) {
      if (!jf.is_array() || jf.size() != 2)
        throw std::invalid_argument("code json: field must be [start, end]");
      m.fields.emplace_back(CirclePoint(jf.at(0).get<double>(), lambda),
                            CirclePoint(jf.at(1).get<double>(), lambda));
    }
    mods.push_back(std::move(m));
  }
  return Code(mu, std::move(mods));
}

inline std::string canonical_code_json(const Code& code) { return code_to_json(code).dump(); }

}  // namespace popcode
