#include <cmath>
#include <cstdio>

#include "priorfill/io.hpp"

namespace priorfill {

namespace {

void dump(const nlohmann::json& v, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      // nlohmann::json objects are std::map-backed, so iteration is sorted.
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + nlohmann::json(it.key()).dump() + ": ";
        dump(it.value(), indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump(v[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", d == 0.0 ? 0.0 : d);
      out += buf;
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& value) {
  std::string out;
  dump(value, 0, out);
  out += "\n";
  return out;
}

nlohmann::json to_json(const MetricsReport& m) {
  return {{"absrel", m.absrel},
          {"rmse", m.rmse},
          {"silog", m.silog},
          {"evaluated_pixels", m.evaluated_pixels}};
}

Bytes write_report(const ReportDocument& doc) {
  nlohmann::json j;
  j["version"] = doc.version;
  j["absrel_scale"] = kAbsRelScale;
  j["config"] = doc.config;
  j["results"] = nlohmann::json::array();
  for (const auto& r : doc.results) j["results"].push_back(r);
  if (doc.timings) {
    j["timings_ms"] = {{"synth", doc.timings->synth},
                       {"index", doc.timings->index},
                       {"prefill", doc.timings->prefill},
                       {"metrics", doc.timings->metrics}};
  } else {
    j["timings_ms"] = nullptr;
  }
  j["clamped_fill_count"] = doc.clamped_fill_count;
  const std::string text = canonical_dump(j);
  return Bytes(text.begin(), text.end());
}

}  // namespace priorfill
