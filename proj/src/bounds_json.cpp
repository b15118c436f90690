#include <cmath>
#include <limits>

#include "permadde/bounds.hpp"
#include "permadde/error.hpp"

namespace permadde {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_number(const std::optional<double>& v) {
  return v ? number_or_null(*v) : json(nullptr);
}

std::optional<double> read_optional(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw Error(ErrorCode::ParseError, std::string(key) + ": expected a number");
  return it->get<double>();
}

}  // namespace

json to_json(const BoundsReport& r) {
  json hyps = json::array();
  for (const auto& v : r.hypotheses) {
    hyps.push_back({{"name", v.name}, {"pass", v.pass}, {"margin", number_or_null(v.margin)}});
  }
  return {{"family", to_string(r.family)},
          {"hypotheses", hyps},
          {"m0", optional_number(r.m0)},
          {"M0", optional_number(r.M0)},
          {"K_l", optional_number(r.K_l)},
          {"K_u", optional_number(r.K_u)},
          {"certified", {number_or_null(r.certified_lo), number_or_null(r.certified_hi)}},
          {"permanent", r.permanent},
          {"warnings", r.warnings}};
}

BoundsReport bounds_report_from_json(const json& j) {
  try {
    BoundsReport r;
    r.family = family_from_string(j.at("family").get<std::string>());
    for (const auto& h : j.at("hypotheses")) {
      const auto& m = h.at("margin");
      r.hypotheses.push_back({h.at("name").get<std::string>(), h.at("pass").get<bool>(),
                              m.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                          : m.get<double>()});
    }
    r.m0 = read_optional(j, "m0");
    r.M0 = read_optional(j, "M0");
    r.K_l = read_optional(j, "K_l");
    r.K_u = read_optional(j, "K_u");
    const auto& cert = j.at("certified");
    if (!cert.is_array() || cert.size() != 2) {
      throw Error(ErrorCode::ParseError, "certified: expected [lo, hi]");
    }
    r.certified_lo = cert[0].is_null() ? 0.0 : cert[0].get<double>();
    r.certified_hi =
        cert[1].is_null() ? std::numeric_limits<double>::infinity() : cert[1].get<double>();
    r.permanent = j.at("permanent").get<bool>();
    if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bounds report: ") + e.what());
  }
}

}  // namespace permadde
