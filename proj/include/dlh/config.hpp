#ifndef DLH_CONFIG_HPP
#define DLH_CONFIG_HPP

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dlh/errors.hpp"
#include "dlh/hardy.hpp"
#include "dlh/integrate.hpp"
#include "dlh/lambda_system.hpp"

// Run configuration in a small INI dialect: sections [system], [params],
// [run], [schedule]; one `key = value` per line; '#' or ';' starts a
// comment. Unknown sections and unknown keys are rejected so a typo fails
// loudly instead of silently falling back to a default.

namespace dlh {

struct RunConfig {
  // [system]
  std::optional<int> k;
  std::optional<std::vector<int>> dims;
  std::optional<std::vector<double>> alpha;
  // [params]
  std::optional<double> p, s, t;
  std::optional<std::vector<double>> mu;
  std::optional<InequalityForm> variant;
  std::optional<NormVariant> norm;
  // [run]
  std::string command;
  std::optional<std::uint64_t> n;
  std::optional<std::uint64_t> seed;
  std::string domain;   // ball:<center-list>:<radius> | box:<lo-list>:<hi-list>
  std::string testfn;   // bump:<center-list>:<radius>
  std::string mode;     // verbatim | relaxed
  std::optional<bool> override_conditions;
  std::string output;   // report path; empty writes to stdout
  std::string format;   // text | csv
  std::string point;    // evaluation point for norm-eval, comma list
  std::optional<double> epsilon;
  // [schedule]
  std::optional<std::vector<double>> deltas;
  std::optional<std::vector<double>> radii;
};

namespace detail {

inline std::string trim(std::string_view sv) {
  size_t b = sv.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  size_t e = sv.find_last_not_of(" \t\r");
  return std::string(sv.substr(b, e - b + 1));
}

inline double parse_double(const std::string& tok, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size())
    throw ConfigParse("bad number '" + tok + "' for " + where);
  return v;
}

inline long long parse_int(const std::string& tok, const std::string& where) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size())
    throw ConfigParse("bad integer '" + tok + "' for " + where);
  return v;
}

inline std::uint64_t parse_uint(const std::string& tok,
                                const std::string& where) {
  const long long v = parse_int(tok, where);
  if (v < 0) throw ConfigParse(where + " must be non-negative");
  return static_cast<std::uint64_t>(v);
}

inline bool parse_bool(const std::string& tok, const std::string& where) {
  if (tok == "true" || tok == "1") return true;
  if (tok == "false" || tok == "0") return false;
  throw ConfigParse("bad boolean '" + tok + "' for " + where);
}

// Splits on commas and/or whitespace.
inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::vector<double> parse_double_list(const std::string& value,
                                             const std::string& where) {
  std::vector<double> out;
  for (const auto& tok : split_list(value)) out.push_back(parse_double(tok, where));
  if (out.empty()) throw ConfigParse("empty list for " + where);
  return out;
}

inline std::vector<int> parse_int_list(const std::string& value,
                                       const std::string& where) {
  std::vector<int> out;
  for (const auto& tok : split_list(value))
    out.push_back(static_cast<int>(parse_int(tok, where)));
  if (out.empty()) throw ConfigParse("empty list for " + where);
  return out;
}

inline InequalityForm parse_variant(const std::string& v) {
  if (v == "semi") return InequalityForm::SemiNorm;
  if (v == "dist") return InequalityForm::DistNorm;
  if (v == "unweighted") return InequalityForm::Unweighted;
  throw ConfigParse("variant must be semi, dist or unweighted, got '" + v +
                    "'");
}

inline NormVariant parse_norm(const std::string& v) {
  if (v == "bracket") return NormVariant::Bracket;
  if (v == "dist1") return NormVariant::Dist1;
  if (v == "dist2") return NormVariant::Dist2;
  throw ConfigParse("norm must be bracket, dist1 or dist2, got '" + v + "'");
}

inline const char* variant_name(InequalityForm f) {
  switch (f) {
    case InequalityForm::SemiNorm: return "semi";
    case InequalityForm::DistNorm: return "dist";
    default: return "unweighted";
  }
}

inline const char* norm_name(NormVariant v) {
  switch (v) {
    case NormVariant::Bracket: return "bracket";
    case NormVariant::Dist1: return "dist1";
    default: return "dist2";
  }
}

inline void apply_key(RunConfig& cfg, const std::string& sec,
                      const std::string& key, const std::string& value) {
  const std::string where = "[" + sec + "] " + key;
  if (sec == "system") {
    if (key == "k") cfg.k = static_cast<int>(parse_int(value, where));
    else if (key == "dims") cfg.dims = parse_int_list(value, where);
    else if (key == "alpha") cfg.alpha = parse_double_list(value, where);
    else throw ConfigParse("unknown key '" + key + "' in [system]");
  } else if (sec == "params") {
    if (key == "p") cfg.p = parse_double(value, where);
    else if (key == "s") cfg.s = parse_double(value, where);
    else if (key == "t") cfg.t = parse_double(value, where);
    else if (key == "mu") cfg.mu = parse_double_list(value, where);
    else if (key == "variant") cfg.variant = parse_variant(value);
    else if (key == "norm") cfg.norm = parse_norm(value);
    else throw ConfigParse("unknown key '" + key + "' in [params]");
  } else if (sec == "run") {
    if (key == "command") cfg.command = value;
    else if (key == "n") cfg.n = parse_uint(value, where);
    else if (key == "seed") cfg.seed = parse_uint(value, where);
    else if (key == "domain") cfg.domain = value;
    else if (key == "testfn") cfg.testfn = value;
    else if (key == "mode") cfg.mode = value;
    else if (key == "override_conditions")
      cfg.override_conditions = parse_bool(value, where);
    else if (key == "output") cfg.output = value;
    else if (key == "format") cfg.format = value;
    else if (key == "point") cfg.point = value;
    else if (key == "epsilon") cfg.epsilon = parse_double(value, where);
    else throw ConfigParse("unknown key '" + key + "' in [run]");
  } else if (sec == "schedule") {
    if (key == "deltas") cfg.deltas = parse_double_list(value, where);
    else if (key == "radii") cfg.radii = parse_double_list(value, where);
    else throw ConfigParse("unknown key '" + key + "' in [schedule]");
  } else {
    throw ConfigParse("unknown section [" + sec + "]");
  }
}

}  // namespace detail

// Merges the sections of `text` into cfg, later values winning. When
// `only_section` is non-empty every other section in the file is skipped;
// the file must contain the requested one.
inline void parse_config(std::string_view text, RunConfig& cfg,
                         const std::string& only_section = "") {
  std::string sec;
  bool seen_requested = only_section.empty();
  size_t lineno = 0, pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++lineno;
    const size_t cpos = line.find_first_of("#;");
    if (cpos != std::string::npos) line.erase(cpos);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigParse("line " + std::to_string(lineno) +
                          ": malformed section header");
      sec = detail::trim(line.substr(1, line.size() - 2));
      if (sec != "system" && sec != "params" && sec != "run" &&
          sec != "schedule")
        throw ConfigParse("unknown section [" + sec + "]");
      if (sec == only_section) seen_requested = true;
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigParse("line " + std::to_string(lineno) +
                        ": expected key = value");
    if (sec.empty())
      throw ConfigParse("line " + std::to_string(lineno) +
                        ": key before any [section]");
    if (!only_section.empty() && sec != only_section) continue;
    detail::apply_key(cfg, sec, detail::trim(line.substr(0, eq)),
                      detail::trim(line.substr(eq + 1)));
  }
  if (!seen_requested)
    throw ConfigParse("config lacks a [" + only_section + "] section");
}

inline void load_config_file(const std::string& path, RunConfig& cfg,
                             const std::string& only_section = "") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigParse("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  parse_config(ss.str(), cfg, only_section);
}

// System construction from the [system] section. All three keys are
// required and must agree; structural validation (triangularity, signs)
// happens inside the LambdaSystem constructor.
inline LambdaSystem build_system(const RunConfig& cfg) {
  if (!cfg.k || !cfg.dims || !cfg.alpha)
    throw ConfigParse("[system] needs k, dims and alpha");
  if (static_cast<size_t>(*cfg.k) != cfg.dims->size())
    throw ConfigParse("[system] k does not match the length of dims");
  if (cfg.alpha->size() != cfg.dims->size() * cfg.dims->size())
    throw ConfigParse("[system] alpha must hold k*k row-major entries");
  return LambdaSystem(*cfg.dims, *cfg.alpha);
}

// Inequality parameters with defaults: p=2, s=0, t=0, mu=0, semi-norm form,
// bracket norm. validate_params enforces the semantic rules.
inline HardyParams build_params(const RunConfig& cfg, const LambdaSystem& sys) {
  HardyParams prm;
  prm.form = cfg.variant.value_or(InequalityForm::SemiNorm);
  prm.p = cfg.p.value_or(2.0);
  prm.s = cfg.s.value_or(0.0);
  prm.t = cfg.t.value_or(0.0);
  prm.mu = cfg.mu.value_or(std::vector<double>(sys.k(), 0.0));
  prm.norm = cfg.norm.value_or(NormVariant::Bracket);
  return prm;
}

namespace detail {

// Broadcasts a one-element list to `dim` entries so configs can write
// ball:0:3 instead of spelling out the zero center.
inline std::vector<double> sized_list(std::vector<double> v, int dim,
                                      const std::string& where) {
  if (v.size() == 1 && dim > 1) v.assign(static_cast<size_t>(dim), v[0]);
  if (v.size() != static_cast<size_t>(dim))
    throw ConfigParse(where + ": expected " + std::to_string(dim) +
                      " coordinates, got " + std::to_string(v.size()));
  return v;
}

}  // namespace detail

inline Domain parse_domain(const std::string& spec, int dim) {
  const auto parts = [&] {
    std::vector<std::string> out;
    std::string cur;
    for (char c : spec) {
      if (c == ':') out.push_back(cur), cur.clear();
      else cur += c;
    }
    out.push_back(cur);
    return out;
  }();
  if (parts.size() != 3)
    throw ConfigParse("domain must be ball:<center>:<radius> or "
                      "box:<lo>:<hi>, got '" + spec + "'");
  if (parts[0] == "ball") {
    auto center = detail::sized_list(
        detail::parse_double_list(parts[1], "domain center"), dim,
        "domain center");
    return Domain::ball(std::move(center),
                        detail::parse_double(parts[2], "domain radius"));
  }
  if (parts[0] == "box") {
    auto lo = detail::sized_list(detail::parse_double_list(parts[1], "box lo"),
                                 dim, "box lo");
    auto hi = detail::sized_list(detail::parse_double_list(parts[2], "box hi"),
                                 dim, "box hi");
    return Domain::box(std::move(lo), std::move(hi));
  }
  throw ConfigParse("unknown domain shape '" + parts[0] + "'");
}

inline ScalarField parse_testfn(const std::string& spec, int dim) {
  const size_t c1 = spec.find(':');
  const size_t c2 = spec.rfind(':');
  if (c1 == std::string::npos || c2 == c1)
    throw ConfigParse("testfn must be bump:<center>:<radius>, got '" + spec +
                      "'");
  const std::string kind = spec.substr(0, c1);
  if (kind != "bump")
    throw ConfigParse("unknown test function '" + kind + "'");
  auto center = detail::sized_list(
      detail::parse_double_list(spec.substr(c1 + 1, c2 - c1 - 1),
                                "testfn center"),
      dim, "testfn center");
  return bump(std::move(center),
              detail::parse_double(spec.substr(c2 + 1), "testfn radius"));
}

namespace detail {

inline std::string fmt_double(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

inline std::string join_doubles(std::span<const double> v,
                                const char* spec = "%.17g",
                                const char* sep = " ") {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += fmt_double(v[i], spec);
  }
  return out;
}

}  // namespace detail

// The [system] section for sys; alpha entries are printed with enough
// digits to round-trip a double exactly.
inline std::string format_system_section(const LambdaSystem& sys) {
  std::string out = "[system]\nk = " + std::to_string(sys.k()) + "\ndims =";
  for (int i = 0; i < sys.k(); ++i)
    out += " " + std::to_string(sys.dim(i));
  out += "\nalpha =";
  for (int i = 0; i < sys.k(); ++i)
    for (int j = 0; j < sys.k(); ++j)
      out += " " + detail::fmt_double(sys.alpha(i, j));
  out += "\n";
  return out;
}

}  // namespace dlh

#endif
