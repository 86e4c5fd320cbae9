#pragma once

// Command dispatch and report documents for the upsilon tool.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "upsilon/chern.hpp"
#include "upsilon/errors.hpp"
#include "upsilon/fixtures.hpp"
#include "upsilon/io.hpp"
#include "upsilon/search.hpp"
#include "upsilon/stability.hpp"
#include "upsilon/surface.hpp"

namespace upsilon {

inline constexpr const char* version = "0.1.0";

enum class Command { Chern, Stability, Upsilon, Blowup, Demo };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::Chern: return "chern";
    case Command::Stability: return "stability";
    case Command::Upsilon: return "upsilon";
    case Command::Blowup: return "blowup";
    case Command::Demo: return "demo";
  }
  return "?";
}

struct RunOptions {
  std::string stability_mode = "auto";  // auto, exact2, heuristic
  std::uint64_t seed = 0;
  std::size_t budget = 500;
  Rat epsilon = Rat(1, 100);
  std::size_t samples = 2000;
  std::string format = "json";  // json, csv
  std::optional<std::size_t> rank;
  std::vector<std::string> strategies{"random", "coincident", "generic"};
  std::size_t workers = 1;
};

struct RunManifest {
  Command command = Command::Demo;
  std::string input_path;
  RunOptions options;
  std::string version = upsilon::version;
  std::string timestamp;
};

struct RunResult {
  int exit_code = 0;
  std::string output;  // report document, empty on error
  std::string error;   // "location: message" on error
  json document;
};

inline std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json to_json(const RunManifest& m) {
  const auto& o = m.options;
  return {{"command", to_string(m.command)},
          {"input", m.input_path.empty() ? json(nullptr) : json(m.input_path)},
          {"version", m.version},
          {"timestamp", m.timestamp},
          {"options",
           {{"stability_mode", o.stability_mode},
            {"seed", o.seed},
            {"budget", o.budget},
            {"epsilon", to_json(o.epsilon)},
            {"samples", o.samples},
            {"format", o.format},
            {"rank", o.rank ? json(*o.rank) : json(nullptr)},
            {"strategies", o.strategies},
            {"workers", o.workers}}}};
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "random") return Strategy::Random;
  if (s == "coincident") return Strategy::Coincident;
  if (s == "generic") return Strategy::Generic;
  if (s == "user") return Strategy::UserSupplied;
  throw InvalidArgument("unknown strategy \"" + s + "\" (expected random, coincident, generic or user)");
}

inline StabilityMode parse_stability_mode(const std::string& s, std::size_t samples, std::uint64_t seed) {
  if (s == "auto") return Auto{};
  if (s == "exact2") return ExactRank2{};
  if (s == "heuristic") return Heuristic{samples, seed};
  throw InvalidArgument("unknown stability mode \"" + s + "\" (expected auto, exact2 or heuristic)");
}

/// Leaves of a document as (JSON pointer, scalar) rows.
inline std::string to_csv(const json& document) {
  std::ostringstream out;
  out << "key,value\n";
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  auto walk = [&](auto&& self, const json& j, const std::string& path) -> void {
    if (j.is_object()) {
      for (auto it = j.begin(); it != j.end(); ++it) self(self, it.value(), path + "/" + it.key());
    } else if (j.is_array()) {
      for (std::size_t k = 0; k < j.size(); ++k) self(self, j[k], path + "/" + std::to_string(k));
    } else {
      out << quote(path) << "," << quote(j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
    }
  };
  walk(walk, document, "");
  return out.str();
}

namespace detail {

inline json chern_section(const ConfigDocument& doc) {
  json out;
  if (doc.filtrations && doc.filtrations->is_balanced()) {
    const auto& fc = *doc.filtrations;
    Rat closed = c2_trivial(fc, doc.config);
    ChernReport general = c2_number(derive_tables(fc, doc.config), doc.config);
    if (general.c2_number != closed)
      throw TheoremViolation("closed-form c2 " + closed.to_string() + " disagrees with the general formula " +
                             general.c2_number.to_string());
    Rat norm = norm_sq(fc, doc.config);
    out["c2"] = to_json(closed);
    out["norm_sq"] = to_json(norm);
    out["ratio"] = norm.is_zero() ? json(nullptr) : to_json(closed / norm);
    out["report"] = to_json(general);
  } else if (doc.filtrations || doc.system) {
    ChernReport general =
        c2_number(doc.system ? *doc.system : derive_tables(*doc.filtrations, doc.config), doc.config);
    out["c2"] = to_json(general.c2_number);
    out["report"] = to_json(general);
  } else {
    throw ValidationError("the chern command needs either \"filtrations\" or \"system\"", "/");
  }
  return out;
}

inline bool conservation_holds(const PlaneArrangement& arr, const DivisorConfiguration& blown) {
  const std::size_t n = arr.curves.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      long through_both = 0;
      for (std::size_t p = 0; p < arr.points.size(); ++p) through_both += blown(i, n + p) * blown(j, n + p);
      if (blown(i, j) + through_both != arr.curves[i].degree * arr.curves[j].degree) return false;
    }
  return true;
}

inline json blowup_section(const PlaneArrangement& arr, const Rat& epsilon) {
  DivisorConfiguration blown = blow_up(arr, epsilon);
  return {{"epsilon", to_json(epsilon)},
          {"arrangement", to_json(arr)},
          {"configuration", to_json(blown)},
          {"conservation", conservation_holds(arr, blown)}};
}

inline json stability_section(const ConfigDocument& doc, const RunOptions& o) {
  if (!doc.filtrations) throw ValidationError("the stability command needs \"filtrations\"", "/");
  StabilityOptions sopts;
  sopts.workers = o.workers;
  StabilityVerdict v =
      check_stability(*doc.filtrations, doc.config, parse_stability_mode(o.stability_mode, o.samples, o.seed), sopts);
  return to_json(v);
}

inline json search_log_json(const SearchLog& log) {
  json improvements = json::array();
  for (const auto& [c, ratio] : log.improvements) improvements.push_back({{"candidate", c}, {"ratio", to_json(ratio)}});
  return {{"evaluated", log.evaluated},
          {"no_free_weights", log.no_free_weights},
          {"infeasible", log.infeasible},
          {"unstable", log.unstable},
          {"stable", log.stable},
          {"failed", log.failed},
          {"interior_minima", log.interior_minima},
          {"collapse_retries", log.collapse_retries},
          {"cutting_planes", log.cutting_planes},
          {"verification_rejections", log.verification_rejections},
          {"heuristic_negative_c2", log.heuristic_negative},
          {"bridge_max_relative_error", log.bridge_max_relative_error},
          {"per_strategy", log.per_strategy},
          {"improvements", std::move(improvements)}};
}

inline json violations_json(const std::vector<TheoremViolationRecord>& vs) {
  json out = json::array();
  for (const auto& v : vs)
    out.push_back({{"candidate", v.candidate}, {"c2", to_json(v.c2)}, {"filtrations", to_json(v.configuration)}});
  return out;
}

inline json upsilon_section(const ConfigDocument& doc, const RunOptions& o, bool& violated) {
  SearchOptions so;
  so.budget = o.budget;
  so.seed = o.seed;
  so.workers = o.workers;
  so.final_samples = o.samples;
  so.stability_mode = parse_stability_mode(o.stability_mode, o.samples, o.seed);
  so.strategies.clear();
  for (const auto& s : o.strategies) so.strategies.push_back(parse_strategy(s));
  std::size_t r = 0;
  if (o.rank) {
    r = *o.rank;
  } else if (doc.filtrations) {
    r = doc.filtrations->rank();
  } else {
    throw InvalidArgument("--rank is required when the input carries no filtrations");
  }
  if (std::find(so.strategies.begin(), so.strategies.end(), Strategy::UserSupplied) != so.strategies.end()) {
    if (!doc.filtrations) throw InvalidArgument("the user strategy needs \"filtrations\" in the input");
    so.user_shapes.push_back(*doc.filtrations);
  }
  UpsilonEstimate est = outer_search(doc.config, r, so);
  violated = !est.violations.empty();
  ConfigDocument best{doc.config, est.best_configuration, std::nullopt};
  return {{"rank", r},
          {"ratio", to_json(est.ratio)},
          {"ratio_float", est.float_ratio},
          {"c2", to_json(est.c2)},
          {"norm_sq", to_json(est.norm_sq)},
          {"attained", est.attained},
          {"candidate", est.candidate},
          {"strategy", to_string(est.strategy)},
          {"stability", to_json(est.verdict, false)},
          {"configuration", to_json(best)},
          {"search_log", search_log_json(est.log)},
          {"theorem_violations", violations_json(est.violations)}};
}

inline json demo_section(const RunOptions& o) {
  json steps = json::array();
  PlaneArrangement arr = fixtures::concurrent_lines();
  json blow = blowup_section(arr, o.epsilon);
  blow["name"] = "three concurrent lines, blown up at the common point";
  steps.push_back(std::move(blow));

  for (auto [name, doc] : {std::pair<const char*, ConfigDocument>{"two lines", fixtures::two_lines()},
                           std::pair<const char*, ConfigDocument>{"three generic lines", fixtures::three_generic_lines()}}) {
    json step = chern_section(doc);
    step["name"] = name;
    step["configuration"] = to_json(doc);
    step["stability"] = to_json(check_stability(*doc.filtrations, doc.config, ExactRank2{}));
    steps.push_back(std::move(step));
  }
  json ratio = steps.back()["ratio"];
  return {{"walkthrough", std::move(steps)}, {"ratio", std::move(ratio)}};
}

}  // namespace detail

inline RunResult run(const RunManifest& manifest) {
  RunResult result;
  try {
    const RunOptions& o = manifest.options;
    if (o.format != "json" && o.format != "csv")
      throw InvalidArgument("unknown output format \"" + o.format + "\" (expected json or csv)");
    if (manifest.command != Command::Demo && manifest.input_path.empty())
      throw InvalidArgument(std::string("the ") + to_string(manifest.command) + " command needs --input");

    json body;
    bool violated = false;
    switch (manifest.command) {
      case Command::Chern:
        body = detail::chern_section(parse_config(load_json_file(manifest.input_path), manifest.input_path));
        break;
      case Command::Stability:
        body = detail::stability_section(parse_config(load_json_file(manifest.input_path), manifest.input_path), o);
        break;
      case Command::Upsilon:
        body = detail::upsilon_section(parse_config(load_json_file(manifest.input_path), manifest.input_path), o,
                                       violated);
        break;
      case Command::Blowup:
        body = detail::blowup_section(parse_arrangement(load_json_file(manifest.input_path), manifest.input_path),
                                      o.epsilon);
        break;
      case Command::Demo:
        body = detail::demo_section(o);
        break;
    }
    json document = {{"manifest", to_json(manifest)}, {"result", std::move(body)}};
    result.output = o.format == "csv" ? to_csv(document) : dump_canonical(document);
    result.document = std::move(document);
    result.exit_code = violated ? 5 : 0;
  } catch (const Error& e) {
    result.exit_code = e.exit_code();
    result.error = e.what();
  }
  return result;
}

}  // namespace upsilon
