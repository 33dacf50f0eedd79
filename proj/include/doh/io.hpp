// JSON file formats for instances, allocations and solve reports.
//
//   instance:   {"values":[v1,...,vn], "probs":[[p11,...,p1n],...,[pk1,...,pkn]]}
//   allocation: {"assignment":[h1,...,hn]}   (1-based; 0 marks an unassigned object)
//   report:     {"solver_name":..., "es":..., "allocation":{...}, "wall_ms":..., "meta":{...}}
#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "doh/core.hpp"

namespace doh {

using Json = nlohmann::json;

namespace detail {

inline const Json& require_field(const Json& j, const char* name) {
  if (!j.is_object()) throw ValidationError("document: expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) throw ValidationError(std::string(name) + ": missing field");
  return *it;
}

inline std::vector<double> number_array(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ValidationError(field + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ValidationError(field + "[" + std::to_string(i) + "]: expected a number");
    }
    out.push_back(j[i].get<double>());
  }
  return out;
}

/// "%.12g" round trip, so the serialized value carries 12 significant digits.
inline double round_sig12(double x) { return std::strtod(format_number(x).c_str(), nullptr); }

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path + ": parse error: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError(path + ": cannot open file for writing");
  out << text;
}

}  // namespace detail

inline Json to_json(const Instance& inst) {
  Json probs = Json::array();
  for (std::size_t i = 0; i < inst.k(); ++i) {
    auto r = inst.row(i);
    probs.push_back(std::vector<double>(r.begin(), r.end()));
  }
  auto v = inst.values();
  return Json{{"values", std::vector<double>(v.begin(), v.end())}, {"probs", std::move(probs)}};
}

inline Instance instance_from_json(const Json& j) {
  auto values = detail::number_array(detail::require_field(j, "values"), "values");
  const Json& probs = detail::require_field(j, "probs");
  if (!probs.is_array()) throw ValidationError("probs: expected an array of rows");
  std::vector<std::vector<double>> rows;
  rows.reserve(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    rows.push_back(detail::number_array(probs[i], "probs[" + std::to_string(i) + "]"));
  }
  return Instance(std::move(values), rows);
}

inline Json to_json(const Allocation& alloc) {
  Json a = Json::array();
  for (auto h : alloc.handlers()) a.push_back(h == Allocation::kUnassigned ? 0u : h + 1);
  return Json{{"assignment", std::move(a)}};
}

/// Reads 1-based handler indices; validation against an instance is separate.
inline Allocation allocation_from_json(const Json& j) {
  const Json& a = detail::require_field(j, "assignment");
  if (!a.is_array()) throw ValidationError("assignment: expected an array");
  std::vector<std::uint32_t> handlers;
  handlers.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number_integer() || a[i].get<long long>() < 0) {
      throw ValidationError("assignment[" + std::to_string(i) + "]: expected an integer >= 0");
    }
    const auto h = a[i].get<std::uint64_t>();
    handlers.push_back(h == 0 ? Allocation::kUnassigned : static_cast<std::uint32_t>(h - 1));
  }
  return Allocation(std::move(handlers));
}

struct ReportFormat {
  bool include_timing = true;
};

inline Json to_json(const SolveReport& r, ReportFormat fmt = {}) {
  Json j;
  j["solver_name"] = r.solver_name;
  j["es"] = detail::round_sig12(r.es);
  j["allocation"] = to_json(r.allocation);
  if (fmt.include_timing) j["wall_ms"] = detail::round_sig12(r.wall_time.count());
  j["meta"] = Json(r.meta);
  return j;
}

inline Instance load_instance(const std::string& path) {
  return instance_from_json(detail::read_json_file(path));
}

inline void save_instance(const Instance& inst, const std::string& path) {
  // nlohmann prints the shortest round-tripping form, so doubles survive a reload.
  detail::write_text_file(path, to_json(inst).dump() + "\n");
}

inline Allocation load_allocation(const std::string& path) {
  return allocation_from_json(detail::read_json_file(path));
}

inline void save_allocation(const Allocation& alloc, const std::string& path) {
  detail::write_text_file(path, to_json(alloc).dump() + "\n");
}

}  // namespace doh
