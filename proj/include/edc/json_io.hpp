#pragma once
// JSON inputs. Rationals are written as strings ("7/10", "0.25") or plain JSON numbers; a number
// is read through its shortest decimal text, so 0.1 means exactly 1/10.
//
//   {"kind": "ifs", "rho": "1/3", "maps": [{"type": "affine", "a": "1/3", "b": "0"},
//                                         {"type": "polynomial", "c": ["0", "1/4", "1/20"]},
//                                         {"type": "series", "c": [...], "R": "2", "r": "1"}]}
//   {"kind": "rand", "distribution": "uniform:1/10,9/10", "seed": 7}
//   {"kind": "rand", "lambda": ["1/2", "2/3"]}
//   {"kind": "ck", "rho": "1/4", "theta": "1/2", "zeta": "1/20", "seed": 1, "distribution": "uniform:0,1"}
//
// A sweep config names its input relative to the config file:
//   {"codec": "poly", "input": "middle_third.json", "ell": [8, 20], "seeds": [1], "delta": 0.05,
//    "csv": "out.csv", "svg": "out.svg"}

#include "edc/experiments.hpp"

#include <json.hpp>

#include <filesystem>

namespace edc {

using Json = nlohmann::json;

namespace detail {

inline Rational json_rational(const Json& j, const std::string& what) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number()) return parse_rational(j.dump());
  throw format_error(what + " must be a rational string or a number");
}

inline const Json& json_field(const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) throw format_error("missing field '" + key + "'");
  return j.at(key);
}

inline std::vector<Rational> json_rationals(const Json& j, const std::string& what) {
  if (!j.is_array()) throw format_error(what + " must be an array");
  std::vector<Rational> out;
  for (const auto& v : j) out.push_back(json_rational(v, what));
  return out;
}

inline std::uint64_t json_seed(const Json& j) {
  if (!j.contains("seed")) return 1;
  const auto& s = j.at("seed");
  if (!s.is_number_unsigned()) throw format_error("seed must be a non-negative integer");
  return s.get<std::uint64_t>();
}

}  // namespace detail

inline IfsSpec ifs_from_json(const Json& j) {
  IfsSpec ifs;
  ifs.rho = detail::json_rational(detail::json_field(j, "rho"), "rho");
  const auto& maps = detail::json_field(j, "maps");
  if (!maps.is_array()) throw format_error("maps must be an array");
  for (const auto& m : maps) {
    std::string type = detail::json_field(m, "type").get<std::string>();
    if (type == "affine") {
      ifs.maps.push_back(Affine{detail::json_rational(detail::json_field(m, "a"), "a"),
                                detail::json_rational(detail::json_field(m, "b"), "b")});
    } else if (type == "polynomial") {
      ifs.maps.push_back(Polynomial{detail::json_rationals(detail::json_field(m, "c"), "c")});
    } else if (type == "series") {
      TruncatedSeries s;
      s.c = detail::json_rationals(detail::json_field(m, "c"), "c");
      if (m.contains("R")) s.R = detail::json_rational(m.at("R"), "R");
      if (m.contains("r")) s.r = detail::json_rational(m.at("r"), "r");
      ifs.maps.push_back(std::move(s));
    } else {
      throw format_error("unknown map type '" + type + "' (expected affine, polynomial or series)");
    }
  }
  return ifs;
}

inline ScalingParams scaling_from_json(const Json& j) {
  ScalingParams p;
  if (j.contains("rho")) p.rho = detail::json_rational(j.at("rho"), "rho");
  if (j.contains("theta")) p.theta = detail::json_rational(j.at("theta"), "theta");
  if (j.contains("zeta")) p.zeta = detail::json_rational(j.at("zeta"), "zeta");
  if (j.contains("distribution")) p.dist = Distribution::parse(j.at("distribution").get<std::string>());
  p.seed = detail::json_seed(j);
  p.check();
  return p;
}

inline CodecInput input_from_json(const Json& j) {
  try {
    std::string kind = detail::json_field(j, "kind").get<std::string>();
    if (kind == "ifs") return ifs_from_json(j);
    if (kind == "rand") {
      RandInput r;
      if (j.contains("distribution")) r.dist = Distribution::parse(j.at("distribution").get<std::string>());
      r.seed = detail::json_seed(j);
      if (j.contains("lambda")) r.lambda = detail::json_rationals(j.at("lambda"), "lambda");
      return r;
    }
    if (kind == "ck") return CkInput{scaling_from_json(j)};
    throw format_error("unknown input kind '" + kind + "' (expected ifs, rand or ck)");
  } catch (const Json::exception& e) {
    throw format_error(std::string("malformed input: ") + e.what());
  }
}

inline Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Error::Kind::Io, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw format_error("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline CodecInput load_input(const std::string& path) { return input_from_json(read_json(path)); }

struct LoadedSweep {
  SweepConfig config;
  std::string input_path;
};

inline LoadedSweep sweep_from_json(const Json& j, const std::string& base_dir = ".") {
  try {
    LoadedSweep s;
    s.config.codec = parse_codec(detail::json_field(j, "codec").get<std::string>());
    std::filesystem::path input = detail::json_field(j, "input").get<std::string>();
    s.input_path = (input.is_absolute() ? input : std::filesystem::path(base_dir) / input).string();
    if (j.contains("ell")) {
      const auto& e = j.at("ell");
      if (!e.is_array() || e.size() != 2) throw format_error("ell must be [min, max]");
      s.config.ell_min = e[0].get<unsigned>();
      s.config.ell_max = e[1].get<unsigned>();
    }
    if (j.contains("seeds")) s.config.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("delta")) s.config.delta = j.at("delta").get<double>();
    if (!(s.config.delta > 0)) throw validation_error("delta must be positive");
    if (j.contains("csv")) s.config.csv_path = j.at("csv").get<std::string>();
    if (j.contains("svg")) s.config.svg_path = j.at("svg").get<std::string>();
    if (s.config.ell_min > s.config.ell_max) throw validation_error("empty ell range");
    return s;
  } catch (const Json::exception& e) {
    throw format_error(std::string("malformed sweep config: ") + e.what());
  }
}

inline LoadedSweep load_sweep(const std::string& path) {
  auto dir = std::filesystem::path(path).parent_path();
  return sweep_from_json(read_json(path), dir.empty() ? "." : dir.string());
}

}  // namespace edc
