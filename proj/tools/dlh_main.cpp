// Command line front end: config ingestion, dispatch, report emission.
//
// Exit codes: 0 success, 2 configuration or validation problem,
// 3 admissibility conditions not met, 4 numerical failure during a run.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dlh/dlh.hpp"

namespace {

using namespace dlh;

std::string comment_block(const std::string& raw) {
  std::string out;
  size_t pos = 0;
  while (pos < raw.size()) {
    size_t nl = raw.find('\n', pos);
    if (nl == std::string::npos) nl = raw.size();
    out += "# " + raw.substr(pos, nl - pos) + "\n";
    pos = nl + 1;
  }
  return out;
}

std::string format_params_section(const HardyParams& prm) {
  std::string out = "[params]\n";
  out += "p = " + detail::fmt_double(prm.p) + "\n";
  out += "s = " + detail::fmt_double(prm.s) + "\n";
  out += "t = " + detail::fmt_double(prm.t) + "\n";
  out += "mu = " + detail::join_doubles(prm.mu) + "\n";
  out += std::string("variant = ") + detail::variant_name(prm.form) + "\n";
  out += std::string("norm = ") + detail::norm_name(prm.norm) + "\n";
  return out;
}

// One "key = value" line per resolved run key that the command consumed.
struct RunEcho {
  std::string body = "[run]\n";
  void add(const std::string& k, const std::string& v) {
    body += k + " = " + v + "\n";
  }
  void add_u64(const std::string& k, std::uint64_t v) {
    add(k, std::to_string(v));
  }
};

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.output.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream out(cfg.output, std::ios::binary);
  if (!out) throw ConfigParse("cannot open output file '" + cfg.output + "'");
  out << text;
}

ConditionMode parse_mode(const std::string& m) {
  if (m.empty() || m == "verbatim") return ConditionMode::Verbatim;
  if (m == "relaxed") return ConditionMode::Relaxed;
  throw ConfigParse("mode must be verbatim or relaxed, got '" + m + "'");
}

std::string system_id(const LambdaSystem& sys) {
  std::string id = "dims=";
  for (int i = 0; i < sys.k(); ++i)
    id += (i ? " " : "") + std::to_string(sys.dim(i));
  id += " alpha=";
  for (int i = 0; i < sys.k(); ++i)
    for (int j = 0; j < sys.k(); ++j)
      id += (i + j ? " " : "") + detail::fmt_double(sys.alpha(i, j), "%.12g");
  return id;
}

int cmd_derive(const RunConfig& cfg) {
  const auto sys = build_system(cfg);
  RunEcho run;
  run.add("command", "derive");
  std::string out = comment_block(run.body);
  out += format_system_section(sys);
  std::string sig;
  for (int i = 0; i < sys.k(); ++i)
    sig += (i ? " " : "") + detail::fmt_double(sys.sigma(i), "%.15g");
  out += "# sigma = " + sig + "\n";
  out += "# Q = " + detail::fmt_double(sys.Q(), "%.15g") + "\n";
  emit(cfg, out);
  return 0;
}

int cmd_check(const RunConfig& cfg) {
  const auto sys = build_system(cfg);
  const auto prm = build_params(cfg, sys);
  const ConditionMode mode = parse_mode(cfg.mode);
  const auto report = check_conditions(sys, prm, mode);
  const auto cst = hardy_constant(sys, prm);

  RunEcho run;
  run.add("command", "check");
  run.add("mode", mode == ConditionMode::Verbatim ? "verbatim" : "relaxed");
  std::string out = comment_block(run.body + format_system_section(sys) +
                                  format_params_section(prm));
  for (const auto& r : report.records) {
    char line[256];
    std::snprintf(line, sizeof(line), "cond %s: lhs = %.15g rhs = %.15g %s\n",
                  r.label.c_str(), r.lhs, r.rhs,
                  r.satisfied ? "ok" : "FAIL");
    out += line;
  }
  out += "constant = " + detail::fmt_double(cst.value, "%.15g") + "\n";
  out += std::string("satisfied = ") +
         (report.all_satisfied ? "true" : "false") + "\n";
  emit(cfg, out);
  return report.all_satisfied ? 0 : 3;
}

int cmd_norm_eval(const RunConfig& cfg) {
  const auto sys = build_system(cfg);
  if (cfg.point.empty())
    throw ConfigParse("norm-eval needs a point (--point or [run] point)");
  const auto pt = detail::parse_double_list(cfg.point, "point");
  if (pt.size() != static_cast<size_t>(sys.total_dim()))
    throw ConfigParse("point has " + std::to_string(pt.size()) +
                      " coordinates, system needs " +
                      std::to_string(sys.total_dim()));
  const NormVariant v = cfg.norm.value_or(NormVariant::Bracket);

  RunEcho run;
  run.add("command", "norm-eval");
  run.add("variant", detail::norm_name(v));
  run.add("point", detail::join_doubles(pt));
  if (cfg.epsilon) run.add("epsilon", detail::fmt_double(*cfg.epsilon));
  std::string out = comment_block(run.body + format_system_section(sys));

  const double val = cfg.epsilon
                         ? norm_value_regularized(sys, pt, v, *cfg.epsilon)
                         : norm_value(sys, pt, v);
  out += detail::fmt_double(val, "%.15g") + "\n";
  emit(cfg, out);
  return 0;
}

McOptions make_mc_options(const LambdaSystem& sys, const HardyParams& prm,
                          const Domain& dom, const RunConfig& cfg) {
  McOptions opts;
  opts.n = cfg.n.value_or(opts.n);
  opts.seed = cfg.seed.value_or(opts.seed);
  // Concentrate sampling like the potential-side singularity when the
  // domain allows it; otherwise plain uniform.
  const double a =
      prm.form == InequalityForm::Unweighted ? prm.p : prm.s + prm.t;
  if (a > 0.0 && dom.origin_centered()) {
    opts.sampler = SamplerKind::RadialLogUniform;
    opts.concentration = std::min(a, sys.Q() - 0.5);
  }
  return opts;
}

std::string verify_record(const InequalityReport& rep) {
  char line[512];
  std::snprintf(
      line, sizeof(line),
      "constant=%.15g applicable=%s verbatim=%s relaxed=%s lhs=%.15g "
      "lhs_se=%.15g rhs=%.15g rhs_se=%.15g margin=%.15g z=%.15g n=%" PRIu64
      " rejected=%" PRIu64 " verdict=%s\n",
      rep.constant, rep.constant_applicable ? "true" : "false",
      rep.conditions_verbatim ? "true" : "false",
      rep.conditions_relaxed ? "true" : "false", rep.lhs, rep.lhs_se, rep.rhs,
      rep.rhs_se, rep.margin, rep.z, rep.n, rep.rejected,
      to_string(rep.verdict));
  return line;
}

int cmd_verify(const RunConfig& cfg) {
  const auto sys = build_system(cfg);
  const auto prm = build_params(cfg, sys);
  if (cfg.domain.empty())
    throw ConfigParse("verify needs a domain (--domain or [run] domain)");
  if (cfg.testfn.empty())
    throw ConfigParse("verify needs a test function (--testfn or [run] "
                      "testfn)");
  const Domain dom = parse_domain(cfg.domain, sys.total_dim());
  const ScalarField u = parse_testfn(cfg.testfn, sys.total_dim());
  const McOptions opts = make_mc_options(sys, prm, dom, cfg);
  const bool override_cond = cfg.override_conditions.value_or(false);
  const bool csv = cfg.format == "csv";
  if (!cfg.format.empty() && cfg.format != "csv" && cfg.format != "text")
    throw ConfigParse("format must be text or csv, got '" + cfg.format + "'");

  const auto rep = verify_hardy(sys, prm, u, dom, opts, override_cond);

  RunEcho run;
  run.add("command", "verify");
  run.add_u64("n", opts.n);
  run.add_u64("seed", opts.seed);
  run.add("domain", cfg.domain);
  run.add("testfn", cfg.testfn);
  run.add("override_conditions", override_cond ? "true" : "false");
  run.add("format", csv ? "csv" : "text");
  const std::string echo = comment_block(run.body + format_system_section(sys) +
                                         format_params_section(prm));
  std::string out;
  if (csv) {
    out = "# schema=1\n" + echo;
    out += "system_id,p,s,t,mu,constant,lhs,lhs_se,rhs,rhs_se,margin,z,"
           "verdict\n";
    out += system_id(sys) + ",";
    out += detail::fmt_double(prm.p) + "," + detail::fmt_double(prm.s) + "," +
           detail::fmt_double(prm.t) + ",";
    out += detail::join_doubles(prm.mu, "%.17g", ";");
    char buf[384];
    std::snprintf(buf, sizeof(buf),
                  ",%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
                  rep.constant, rep.lhs, rep.lhs_se, rep.rhs, rep.rhs_se,
                  rep.margin, rep.z, to_string(rep.verdict));
    out += buf;
  } else {
    out = echo + verify_record(rep);
  }
  emit(cfg, out);
  return 0;
}

int cmd_estimate_constant(const RunConfig& cfg) {
  const auto sys = build_system(cfg);
  // The sweep runs the fixed p=2, s=2, mu=0 weighted instance; reject
  // params that ask for anything else rather than silently ignoring them.
  if ((cfg.p && *cfg.p != 2.0) || (cfg.s && *cfg.s != 2.0) ||
      (cfg.t && *cfg.t != 0.0))
    throw ConfigParse("estimate-constant runs the p=2, s=2, t=0 instance");
  if (cfg.mu)
    for (double m : *cfg.mu)
      if (m != 0.0)
        throw ConfigParse("estimate-constant runs the mu=0 instance");
  const std::vector<double> deltas =
      cfg.deltas.value_or(std::vector<double>{0.5, 0.2, 0.1, 0.05});
  const std::vector<double> radii =
      cfg.radii.value_or(std::vector<double>{1.0, 4.0, 16.0});
  const std::uint64_t n = cfg.n.value_or(200000);
  const std::uint64_t seed = cfg.seed.value_or(1);

  const auto sweep = grushin_sharpness_sweep(sys, deltas, radii, n, seed);

  RunEcho run;
  run.add("command", "estimate-constant");
  run.add_u64("n", n);
  run.add_u64("seed", seed);
  std::string sched = "[schedule]\n";
  sched += "deltas = " + detail::join_doubles(deltas) + "\n";
  sched += "radii = " + detail::join_doubles(radii) + "\n";
  std::string out = "# schema=1\n";
  out += comment_block(run.body + format_system_section(sys) + sched);
  out += "delta,R,ratio,se\n";
  for (const auto& e : sweep.entries) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", e.delta, e.R,
                  e.ray.ratio, e.ray.ratio_se);
    out += buf;
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "# target=%.17g extrapolated_ratio=%.17g extrapolated_se=%.17g "
                "best_ratio=%.17g best_ratio_se=%.17g\n",
                sweep.target, sweep.extrapolated_ratio, sweep.extrapolated_se,
                sweep.best_ratio, sweep.best_ratio_se);
  out += buf;
  emit(cfg, out);
  return 0;
}

// ---------------------------------------------------------------------------
// selftest: fast invariant sweeps over every module, independent of the unit
// test suite. Exits nonzero on the first failing suite.

struct SelfTest {
  int failures = 0;

  void check(const char* suite, bool ok, const std::string& detail = "") {
    if (ok) {
      std::printf("selftest %s: ok\n", suite);
    } else {
      ++failures;
      std::printf("selftest %s: FAIL%s%s\n", suite, detail.empty() ? "" : " ",
                  detail.c_str());
    }
  }
};

LambdaSystem random_small_system(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kd(1, 3), nd(1, 3);
  std::uniform_real_distribution<double> ad(0.0, 2.0);
  const int k = kd(rng);
  std::vector<int> dims(k);
  for (auto& d : dims) d = nd(rng);
  std::vector<double> alpha(static_cast<size_t>(k) * k, 0.0);
  for (int i = 1; i < k; ++i)
    for (int j = 0; j < i; ++j) alpha[static_cast<size_t>(i) * k + j] = ad(rng);
  return LambdaSystem(dims, alpha);
}

std::vector<double> random_point(std::mt19937_64& rng,
                                 const LambdaSystem& sys) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> sd(0.3, 2.0);
  std::vector<double> x(sys.total_dim());
  for (int b = 0; b < sys.k(); ++b) {
    double norm2 = 0.0;
    for (int c = sys.offset(b); c < sys.offset(b) + sys.dim(b); ++c) {
      x[c] = nd(rng);
      norm2 += x[c] * x[c];
    }
    const double f = sd(rng) / std::sqrt(std::max(norm2, 1e-12));
    for (int c = sys.offset(b); c < sys.offset(b) + sys.dim(b); ++c) x[c] *= f;
  }
  return x;
}

int cmd_selftest() {
  SelfTest t;

  {  // dilation data against the worked closed forms
    auto g = make_grushin(3, 1, 1.0);
    bool ok = g.sigma(0) == 1.0 && g.sigma(1) == 2.0 && g.Q() == 5.0;
    auto g2 = make_grushin(5, 2, 3.0);
    ok = ok && g2.Q() == 5.0 + 2.0 * 4.0;
    LambdaSystem chain({1, 1, 1}, {0, 0, 0, 2, 0, 0, 1, 3, 0});
    ok = ok && chain.sigma(1) == 3.0 && chain.sigma(2) == 1.0 + 1.0 + 3.0 * 3.0;
    ok = ok && chain.Q() == 1.0 + 3.0 + 11.0;
    t.check("structure", ok);
  }

  {  // norm homogeneity, Euler relation, dual evaluation paths
    std::mt19937_64 rng(12021);
    bool ok = true;
    std::string detail;
    for (int rep = 0; rep < 20 && ok; ++rep) {
      const auto sys = random_small_system(rng);
      for (int pt = 0; pt < 50 && ok; ++pt) {
        const auto x = random_point(rng, sys);
        const double nb = bracket_norm(sys, x);
        for (double r : {1e-3, 0.37, 42.0, 1e3}) {
          const auto y = dilate(sys, r, x);
          if (std::abs(bracket_norm(sys, y) - r * nb) > 1e-10 * r * nb)
            ok = false, detail = "homogeneity";
          for (auto v : {NormVariant::Dist1, NormVariant::Dist2}) {
            const double dn = dist_norm(sys, x, v);
            if (std::abs(dist_norm(sys, y, v) - r * dn) > 1e-10 * r * dn)
              ok = false, detail = "dist homogeneity";
          }
        }
        if (std::abs(bracket_norm_expanded(sys, x) - nb) > 1e-12 * nb)
          ok = false, detail = "expanded path";
        if (std::abs(euler_residual(sys, x, NormVariant::Bracket)) >
            1e-6 * (1.0 + nb))
          ok = false, detail = "euler";
      }
    }
    auto g = make_grushin(2, 3, 1.5);
    std::mt19937_64 rng2(7);
    for (int pt = 0; pt < 200 && ok; ++pt) {
      const auto x = random_point(rng2, g);
      const double a = bracket_norm(g, x), b = dist_norm(g, x, NormVariant::Dist2);
      if (std::abs(a - b) > 1e-12 * a) ok = false, detail = "grushin dist2";
    }
    t.check("norms", ok, detail);
  }

  {  // divergence scalar bounds and limits, field magnitude identity
    auto sys = make_grushin(2, 2, 1.5);
    const double s = 1.5, tpar = 0.5;
    const std::vector<double> mu = {0.5, 0.25};
    double smu = 0.0;
    for (int i = 0; i < sys.k(); ++i) smu += sys.sigma(i) * mu[i];
    const double lo = sys.dim(0) + mu[0] - s;
    double hi = 0.0;
    for (int i = 0; i < sys.k(); ++i)
      hi += sys.sigma(i) * (sys.dim(i) + mu[i]);
    bool ok = true;
    std::string detail;
    std::mt19937_64 rng(99);
    for (int pt = 0; pt < 100 && ok; ++pt) {
      const auto x = random_point(rng, sys);
      for (double eps : {1e-6, 1e-2, 0.5, 2.0}) {
        const double c = c_eps(sys, s, mu, eps, x);
        if (!(c >= lo - 1e-9 && c <= hi + 1e-9)) ok = false, detail = "c bounds";
        const double eta = eta_eps(sys, tpar, eps, NormVariant::Dist2, x);
        if (!(eta >= -1e-12 && eta <= tpar + 1e-12))
          ok = false, detail = "eta range";
      }
      const double c0 = c_eps(sys, s, mu, 1e-12, x);
      if (std::abs(c0 - (sys.Q() - s + smu)) > 1e-6) ok = false, detail = "c limit";
      const double e0 = eta_eps(sys, tpar, 0.0, NormVariant::Dist2, x);
      if (std::abs(e0 - tpar) > 1e-12) ok = false, detail = "eta limit";
      auto h = h_eps_semi(sys, s, mu, 0.25);
      const auto v = h.value(x);
      double mag = 0.0;
      for (double c : v) mag += c * c;
      mag = std::sqrt(mag);
      const double want = h_semi_magnitude(sys, s, mu, 0.25, x);
      if (std::abs(mag - want) > 1e-10 * (1.0 + want))
        ok = false, detail = "field magnitude";
    }
    t.check("proof-objects", ok, detail);
  }

  {  // explicit constants and admissibility on the worked instances
    bool ok = true;
    std::string detail;
    HardyParams prm;
    prm.s = 2.0;
    auto cls = LambdaSystem({3}, {0.0});
    prm.mu = {0.0};
    ok = ok && hardy_constant(cls, prm).value == 0.25;
    auto g31 = make_grushin(3, 1, 1.0);
    prm.mu = {0.0, 0.0};
    ok = ok && hardy_constant(g31, prm).value == 2.25;
    auto g51 = make_grushin(5, 1, 1.0);
    ok = ok && hardy_constant(g51, prm).value == 6.25;
    if (!ok) detail = "constants";
    const auto rep_v = check_conditions(g31, prm, ConditionMode::Verbatim);
    const auto rep_r = check_conditions(g31, prm, ConditionMode::Relaxed);
    if (rep_v.all_satisfied || !rep_r.all_satisfied)
      ok = false, detail = "grushin gating";
    prm.mu = {0.0, 2.0};
    if (!check_conditions(g31, prm, ConditionMode::Verbatim).all_satisfied)
      ok = false, detail = "mu rescue";
    t.check("constants-conditions", ok, detail);
  }

  {  // estimator determinism and exactness on a flat integrand
    auto cls = LambdaSystem({3}, {0.0});
    Domain dom = Domain::ball({0.0, 0.0, 0.0}, 2.0);
    auto one = [](std::span<const double>) { return 1.0; };
    McOptions opts;
    opts.n = 50000;
    opts.seed = 11;
    auto e1 = estimate_integral(cls, one, dom, opts);
    auto e2 = estimate_integral(cls, one, dom, opts);
    opts.threads = 3;
    auto e3 = estimate_integral(cls, one, dom, opts);
    bool ok = e1.value == e2.value && e1.se == e2.se && e1.value == e3.value &&
              e1.se == e3.se;
    // Flat integrand: every weighted sample equals the volume, so the
    // estimate matches it up to accumulation rounding and the spread is
    // pure cancellation noise.
    ok = ok && std::abs(e1.value - dom.volume()) < 1e-10 * dom.volume() &&
         e1.se < 1e-6 * e1.value;
    opts.threads = 0;
    opts.seed = 12;
    opts.sampler = SamplerKind::RadialLogUniform;
    opts.concentration = 1.0;
    auto r1 = estimate_integral(cls, one, dom, opts);
    ok = ok && std::abs(r1.value - dom.volume()) < 5.0 * r1.se &&
         r1.se > 0.0;
    t.check("estimator", ok);
  }

  {  // extremal drift identities
    bool ok = true;
    std::mt19937_64 rng(5);
    for (double a : {0.5, 1.0, 2.0}) {
      auto g = make_grushin(2, 1, a);
      for (int pt = 0; pt < 50 && ok; ++pt) {
        const auto x = random_point(rng, g);
        if (drift_identity_residual(g, x) > 1e-10) ok = false;
        if (extremal_equation_residual(g, x) > 1e-11) ok = false;
      }
    }
    t.check("sharpness-identities", ok);
  }

  return t.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hardy-inequality toolkit for weighted degenerate Laplacians"};
  app.require_subcommand(1);

  struct Files {
    std::string config, system, params, schedule;
  };

  int rc = 0;
  auto dispatch = [&rc](const RunConfig& cfg) {
    if (cfg.command == "derive") rc = cmd_derive(cfg);
    else if (cfg.command == "check") rc = cmd_check(cfg);
    else if (cfg.command == "norm-eval") rc = cmd_norm_eval(cfg);
    else if (cfg.command == "verify") rc = cmd_verify(cfg);
    else if (cfg.command == "estimate-constant") rc = cmd_estimate_constant(cfg);
    else if (cfg.command == "selftest") rc = cmd_selftest();
    else
      throw ConfigParse("unknown command '" + cfg.command + "'");
  };

  auto add_common = [](CLI::App* cmd, Files& f, bool params, bool schedule) {
    cmd->add_option("--config", f.config, "config file, any sections");
    cmd->add_option("--system", f.system, "file with the [system] section");
    if (params)
      cmd->add_option("--params", f.params, "file with the [params] section");
    if (schedule)
      cmd->add_option("--schedule", f.schedule,
                      "file with the [schedule] section");
  };
  auto load = [](const Files& f) {
    RunConfig cfg;
    if (!f.config.empty()) load_config_file(f.config, cfg);
    if (!f.system.empty()) load_config_file(f.system, cfg, "system");
    if (!f.params.empty()) load_config_file(f.params, cfg, "params");
    if (!f.schedule.empty()) load_config_file(f.schedule, cfg, "schedule");
    return cfg;
  };

  // derive
  auto files_derive = std::make_shared<Files>();
  auto out_derive = std::make_shared<std::string>();
  auto* derive = app.add_subcommand("derive", "print dilation data");
  add_common(derive, *files_derive, false, false);
  derive->add_option("--output", *out_derive, "write the report here");
  derive->callback([&, files_derive, out_derive] {
    RunConfig cfg = load(*files_derive);
    cfg.command = "derive";
    if (!out_derive->empty()) cfg.output = *out_derive;
    dispatch(cfg);
  });

  // check
  auto files_check = std::make_shared<Files>();
  auto mode_check = std::make_shared<std::string>();
  auto out_check = std::make_shared<std::string>();
  auto* check = app.add_subcommand("check", "evaluate admissibility conditions");
  add_common(check, *files_check, true, false);
  check->add_option("--mode", *mode_check, "verbatim or relaxed");
  check->add_option("--output", *out_check, "write the report here");
  check->callback([&, files_check, mode_check, out_check] {
    RunConfig cfg = load(*files_check);
    cfg.command = "check";
    if (!mode_check->empty()) cfg.mode = *mode_check;
    if (!out_check->empty()) cfg.output = *out_check;
    dispatch(cfg);
  });

  // norm-eval
  auto files_ne = std::make_shared<Files>();
  auto variant_ne = std::make_shared<std::string>();
  auto point_ne = std::make_shared<std::string>();
  auto eps_ne = std::make_shared<double>(0.0);
  auto out_ne = std::make_shared<std::string>();
  auto* ne = app.add_subcommand("norm-eval", "evaluate a homogeneous norm");
  add_common(ne, *files_ne, true, false);
  ne->add_option("--variant", *variant_ne, "bracket, dist1 or dist2");
  ne->add_option("--point", *point_ne, "comma-separated coordinates");
  auto* eps_opt = ne->add_option("--epsilon", *eps_ne, "regularization");
  ne->add_option("--output", *out_ne, "write the report here");
  ne->callback([&, files_ne, variant_ne, point_ne, eps_ne, eps_opt, out_ne] {
    RunConfig cfg = load(*files_ne);
    cfg.command = "norm-eval";
    if (!variant_ne->empty()) cfg.norm = detail::parse_norm(*variant_ne);
    if (!point_ne->empty()) cfg.point = *point_ne;
    if (eps_opt->count() > 0) cfg.epsilon = *eps_ne;
    if (!out_ne->empty()) cfg.output = *out_ne;
    dispatch(cfg);
  });

  // verify
  auto files_v = std::make_shared<Files>();
  auto testfn_v = std::make_shared<std::string>();
  auto domain_v = std::make_shared<std::string>();
  auto n_v = std::make_shared<std::uint64_t>(0);
  auto seed_v = std::make_shared<std::uint64_t>(0);
  auto fmt_v = std::make_shared<std::string>();
  auto out_v = std::make_shared<std::string>();
  auto over_v = std::make_shared<bool>(false);
  auto* verify = app.add_subcommand("verify", "Monte Carlo inequality check");
  add_common(verify, *files_v, true, false);
  verify->add_option("--testfn", *testfn_v, "bump:<center>:<radius>");
  verify->add_option("--domain", *domain_v,
                     "ball:<center>:<radius> or box:<lo>:<hi>");
  auto* n_opt = verify->add_option("--n", *n_v, "sample count");
  auto* seed_opt = verify->add_option("--seed", *seed_v, "rng seed");
  verify->add_flag("--override-conditions", *over_v,
                   "integrate even when conditions fail");
  verify->add_option("--format", *fmt_v, "text or csv");
  verify->add_option("--output", *out_v, "write the report here");
  verify->callback([&, files_v, testfn_v, domain_v, n_v, seed_v, fmt_v, out_v,
                    over_v, n_opt, seed_opt] {
    RunConfig cfg = load(*files_v);
    cfg.command = "verify";
    if (!testfn_v->empty()) cfg.testfn = *testfn_v;
    if (!domain_v->empty()) cfg.domain = *domain_v;
    if (n_opt->count() > 0) cfg.n = *n_v;
    if (seed_opt->count() > 0) cfg.seed = *seed_v;
    if (*over_v) cfg.override_conditions = true;
    if (!fmt_v->empty()) cfg.format = *fmt_v;
    if (!out_v->empty()) cfg.output = *out_v;
    dispatch(cfg);
  });

  // estimate-constant
  auto files_ec = std::make_shared<Files>();
  auto n_ec = std::make_shared<std::uint64_t>(0);
  auto seed_ec = std::make_shared<std::uint64_t>(0);
  auto out_ec = std::make_shared<std::string>();
  auto* ec = app.add_subcommand("estimate-constant",
                                "sharpness sweep over the trial family");
  add_common(ec, *files_ec, true, true);
  auto* n_ec_opt = ec->add_option("--n", *n_ec, "samples per schedule entry");
  auto* seed_ec_opt = ec->add_option("--seed", *seed_ec, "rng seed");
  ec->add_option("--output", *out_ec, "write the report here");
  ec->callback([&, files_ec, n_ec, seed_ec, out_ec, n_ec_opt, seed_ec_opt] {
    RunConfig cfg = load(*files_ec);
    cfg.command = "estimate-constant";
    if (n_ec_opt->count() > 0) cfg.n = *n_ec;
    if (seed_ec_opt->count() > 0) cfg.seed = *seed_ec;
    if (!out_ec->empty()) cfg.output = *out_ec;
    dispatch(cfg);
  });

  // selftest
  auto* st = app.add_subcommand("selftest", "run module invariant suites");
  st->callback([&] {
    RunConfig cfg;
    cfg.command = "selftest";
    dispatch(cfg);
  });

  // run: command comes from the config file
  auto conf_run = std::make_shared<std::string>();
  auto* runcmd = app.add_subcommand("run", "execute a config-driven run");
  runcmd->add_option("--config", *conf_run, "config file")->required();
  runcmd->callback([&, conf_run] {
    RunConfig cfg;
    load_config_file(*conf_run, cfg);
    if (cfg.command.empty())
      throw ConfigParse("[run] command is required for the run subcommand");
    if (cfg.command == "run")
      throw ConfigParse("[run] command cannot itself be 'run'");
    dispatch(cfg);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigParse& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ConditionsNotMet& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const DegeneratePoint& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const NonIntegrableSample& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const ExcessiveRejections& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const DegenerateDenominator& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const NonPositiveDivergence& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  }
  return rc;
}
