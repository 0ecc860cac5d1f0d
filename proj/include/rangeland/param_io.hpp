#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "params.hpp"

namespace rangeland {

struct LoadOptions {
  bool merge_defaults = false;  // fill ids missing from the file with shipped defaults
  bool strict = true;           // enforce the shipped set's counts
};

namespace detail {

inline nlohmann::json def_to_json(const ParamDef& d, double value) {
  nlohmann::json j;
  j["id"] = d.id;
  j["label"] = d.label;
  j["description"] = d.description;
  j["units"] = d.units;
  j["default"] = d.default_value;
  if (value != d.default_value) j["value"] = value;
  j["group"] = std::string(to_string(d.group));
  j["sector"] = std::string(to_string(d.sector));
  j["vary_in_sa"] = d.vary_in_sa;
  if (d.hard_bounds)
    j["hard_bounds"] = {d.hard_bounds->lo, d.hard_bounds->hi};
  else
    j["hard_bounds"] = nullptr;
  return j;
}

inline double number_of(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError("expected a number for " + where);
  return j.get<double>();
}

// Canonical form: {"parameters": [{id, description, units, default, group, vary_in_sa, hard_bounds}, ...]}.
// An optional "value" overrides "default" for the run.
inline ParamSet from_canonical(const nlohmann::json& root, const LoadOptions& opt) {
  const auto& arr = root.at("parameters");
  if (!arr.is_array()) throw ParseError("'parameters' must be an array");
  std::vector<ParamDef> defs;
  std::vector<double> values;
  const auto& shipped = *default_defs();
  for (const auto& e : arr) {
    if (!e.is_object()) throw ParseError("parameter entry must be an object");
    ParamDef d;
    try {
      d.id = e.at("id").get<std::string>();
      d.description = e.at("description").get<std::string>();
      d.units = e.at("units").get<std::string>();
      d.default_value = number_of(e.at("default"), d.id + ".default");
      d.group = group_from_string(e.at("group").get<std::string>());
      d.vary_in_sa = e.at("vary_in_sa").get<bool>();
      const auto& hb = e.at("hard_bounds");
      if (!hb.is_null()) {
        if (!hb.is_array() || hb.size() != 2) throw ParseError("hard_bounds of '" + d.id + "' must be [lo, hi]");
        d.hard_bounds = Bounds{number_of(hb[0], d.id + ".hard_bounds"), number_of(hb[1], d.id + ".hard_bounds")};
      }
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(std::string("malformed parameter entry: ") + ex.what());
    }
    auto it = std::find_if(shipped.begin(), shipped.end(), [&](const ParamDef& s) { return s.id == d.id; });
    if (it == shipped.end()) throw ValidationError("unknown parameter id '" + d.id + "'");
    d.label = e.contains("label") ? e["label"].get<std::string>() : it->label;
    d.sector = e.contains("sector") ? sector_from_string(e["sector"].get<std::string>()) : it->sector;
    values.push_back(e.contains("value") ? number_of(e["value"], d.id + ".value") : d.default_value);
    defs.push_back(std::move(d));
  }
  // Model code addresses parameters by slot, so reorder to canonical order.
  std::vector<ParamDef> ordered;
  std::vector<double> ordered_values;
  for (const auto& s : shipped) {
    auto it = std::find_if(defs.begin(), defs.end(), [&](const ParamDef& d) { return d.id == s.id; });
    if (it == defs.end()) {
      if (!opt.merge_defaults) throw ValidationError("parameter '" + s.id + "' missing from file");
      ordered.push_back(s);
      ordered_values.push_back(s.default_value);
    } else {
      ordered_values.push_back(values[static_cast<std::size_t>(it - defs.begin())]);
      ordered.push_back(*it);
    }
  }
  std::unordered_set<std::string> ids;
  for (const auto& d : defs)
    if (!ids.insert(d.id).second) throw ValidationError("duplicate parameter id '" + d.id + "'");
  ParamSet ps(std::make_shared<const std::vector<ParamDef>>(std::move(ordered)), std::move(ordered_values));
  validate(ps, opt.strict);
  return ps;
}

// Human form: {"<group>": {"<id>": value | {"value": v, "vary_in_sa": b}, ...}, ...}.
inline ParamSet from_sections(const nlohmann::json& root, const LoadOptions& opt) {
  auto defs = *default_defs();
  std::vector<double> values(defs.size());
  std::vector<bool> given(defs.size(), false);
  for (auto& [section, body] : root.items()) {
    const Group g = group_from_string(section);
    if (!body.is_object()) throw ParseError("section '" + section + "' must be an object");
    for (auto& [id, entry] : body.items()) {
      auto it = std::find_if(defs.begin(), defs.end(), [&](const ParamDef& d) { return d.id == id; });
      if (it == defs.end()) throw ValidationError("unknown parameter id '" + id + "'");
      const auto i = static_cast<std::size_t>(it - defs.begin());
      if (it->group != g)
        throw ValidationError("parameter '" + id + "' belongs to section '" + std::string(to_string(it->group)) + "'");
      if (given[i]) throw ValidationError("duplicate parameter id '" + id + "'");
      given[i] = true;
      if (entry.is_object()) {
        values[i] = number_of(entry.at("value"), id);
        if (entry.contains("vary_in_sa")) {
          if (!entry["vary_in_sa"].is_boolean()) throw ParseError("vary_in_sa of '" + id + "' must be boolean");
          it->vary_in_sa = entry["vary_in_sa"].get<bool>();
        }
      } else {
        values[i] = number_of(entry, id);
      }
    }
  }
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (given[i]) continue;
    if (!opt.merge_defaults) throw ValidationError("parameter '" + defs[i].id + "' missing from file");
    values[i] = defs[i].default_value;
  }
  ParamSet ps(std::make_shared<const std::vector<ParamDef>>(std::move(defs)), std::move(values));
  validate(ps, opt.strict);
  return ps;
}

} // namespace detail

inline ParamSet parse_params(const std::string& text, const LoadOptions& opt = {}) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("parameter file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("parameter file must be a JSON object");
  try {
    if (root.contains("parameters")) return detail::from_canonical(root, opt);
    return detail::from_sections(root, opt);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed parameter file: ") + e.what());
  }
}

inline ParamSet load_params(const std::filesystem::path& path, const LoadOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open parameter file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_params(ss.str(), opt);
}

/// Full export with every definition field.
inline nlohmann::json to_canonical_json(const ParamSet& ps) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < ps.size(); ++i) arr.push_back(detail::def_to_json(ps.defs()[i], ps[i]));
  return {{"parameters", std::move(arr)}};
}

/// Human-editable form: one section per group, canonical order inside
/// each section. The SA flag is written only where it differs from the
/// shipped definition.
inline std::string sections_text(const ParamSet& ps) {
  nlohmann::ordered_json root;
  const auto& shipped = *default_defs();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& d = ps.defs()[i];
    const std::string section(to_string(d.group));
    if (i < shipped.size() && shipped[i].id == d.id && shipped[i].vary_in_sa == d.vary_in_sa)
      root[section][d.id] = ps[i];
    else
      root[section][d.id] = {{"value", ps[i]}, {"vary_in_sa", d.vary_in_sa}};
  }
  return root.dump(2) + "\n";
}

inline void save_params(const ParamSet& ps, const std::filesystem::path& path, bool canonical = false) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write parameter file '" + path.string() + "'");
  if (canonical)
    out << to_canonical_json(ps).dump(2) << '\n';
  else
    out << sections_text(ps);
}

} // namespace rangeland
