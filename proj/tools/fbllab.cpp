// fbllab command-line front end.
//
// Every run produces a RunRecord {command, parameters, seed, outputs,
// wall_time_s, version}; --results appends it as one JSON line and
// `replay` re-executes a stored record and compares outputs.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "emit.hpp"
#include "fbllab/fbllab.hpp"

using json = nlohmann::json;
using namespace fbllab;

namespace {

constexpr int kExitOk = 0, kExitUsage = 1, kExitVerify = 2;

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(what, "not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw CLI::ValidationError(what, "empty list");
  return out;
}

json parse_json(const std::string& s, const char* what) {
  try {
    return json::parse(s);
  } catch (const json::exception& e) {
    throw CLI::ValidationError(what, e.what());
  }
}

Mat to_matrix(const json& j, const char* what) {
  try {
    return j.get<Mat>();
  } catch (const json::exception&) {
    throw CLI::ValidationError(what, "expected a JSON array of numeric arrays");
  }
}

// "name:k=v,k=v" -> name, {k: v}
std::pair<std::string, std::map<std::string, double>> parse_spec(const std::string& s, const char* what) {
  auto colon = s.find(':');
  std::string name = s.substr(0, colon);
  std::map<std::string, double> kv;
  if (colon != std::string::npos) {
    std::stringstream ss(s.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) throw CLI::ValidationError(what, "expected key=value in '" + item + "'");
      try {
        kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw CLI::ValidationError(what, "bad number in '" + item + "'");
      }
    }
  }
  return {name, kv};
}

double need(const std::map<std::string, double>& kv, const std::string& k, const char* what) {
  auto it = kv.find(k);
  if (it == kv.end()) throw CLI::ValidationError(what, "missing '" + k + "'");
  return it->second;
}

NormTag parse_tag(const std::string& s) {
  auto [name, kv] = parse_spec(s, "--tag");
  NormTag t;
  if (name == "lp") t = NormTag::lp(need(kv, "p", "--tag"));
  else if (name == "weak-quasi") t = NormTag::weak_quasi(need(kv, "p", "--tag"));
  else if (name == "weak-l1") t = NormTag::weak_l1(need(kv, "p", "--tag"));
  else if (name == "weak-lr") t = NormTag::weak_lr(need(kv, "p", "--tag"), need(kv, "r", "--tag"));
  else if (name == "lorentz-q1") t = NormTag::lorentz_q1(need(kv, "q", "--tag"));
  else throw CLI::ValidationError("--tag", "unknown tag '" + name + "'");
  t.validate();
  return t;
}

FiniteSpace parse_space(const std::string& s, const std::string& vertices) {
  if (s.rfind("lattice:", 0) == 0) return UnconditionalLattice::parse(s.substr(8)).as_space();
  if (s == "poly") return FiniteSpace::polytope(to_matrix(parse_json(vertices, "--vertices"), "--vertices"));
  auto [name, kv] = parse_spec(s, "--space");
  auto dim = [&]() {
    double d = need(kv, "d", "--space");
    if (d < 1 || d != std::floor(d)) throw CLI::ValidationError("--space", "d must be a positive integer");
    return static_cast<std::size_t>(d);
  };
  if (name == "l1") return FiniteSpace::l1(dim());
  if (name == "linf") return FiniteSpace::linf(dim());
  if (name == "lq") return FiniteSpace::lq(need(kv, "q", "--space"), dim());
  throw CLI::ValidationError("--space", "unknown space '" + name + "'");
}

json masks_json(const std::vector<Mask>& cover) {
  json out = json::array();
  for (Mask m : cover) out.push_back(mask_indices(m));
  return out;
}

json read_input(const std::string& file, const std::string& text) {
  if (!text.empty()) return parse_json(text, "--json");
  if (file.empty()) throw CLI::ValidationError("--input", "one of --input or --json is required");
  std::ifstream f(file);
  if (!f) throw CLI::ValidationError("--input", "cannot open " + file);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_json(ss.str(), "--input");
}

struct Emitters {
  std::string csv, svg;
};

struct Run {
  std::string command;
  json parameters = json::object();
  std::uint64_t seed = 0;
  json outputs = json::object();
  int exit_code = kExitOk;
  std::string text;  // human-readable summary
};

// Options that only route output and are not part of the experiment.
bool is_io_option(const std::string& name) {
  return name == "results" || name == "csv" || name == "svg" || name == "config" || name == "json-out" ||
         name == "help" || name == "quiet";
}

json collect_parameters(const CLI::App* sub) {
  json p = json::object();
  for (const CLI::Option* o : sub->get_options()) {
    std::string name = o->get_single_name();
    if (name.empty() || is_io_option(name)) continue;
    if (o->get_expected_min() == 0) {
      if (o->count() > 0) p[name] = true;
      continue;
    }
    if (o->count() > 0) {
      p[name] = o->results().size() == 1 ? o->results().front() : CLI::detail::join(o->results(), ",");
    } else if (!o->get_default_str().empty()) {
      p[name] = o->get_default_str();
    }
  }
  return p;
}

// ---------------------------------------------------------------- commands

struct NormArgs {
  std::string values, weights, norm = "weak-l1";
  double p = 2.0, q = 2.0, r = 1.0;
};

void cmd_norm(const NormArgs& a, Run& run, const Emitters& em) {
  auto v = parse_list(a.values, "--values");
  WeightedFunction h = a.weights.empty() ? WeightedFunction::counting(v)
                                         : WeightedFunction(v, AtomicSpace(parse_list(a.weights, "--weights")));
  double value = 0.0;
  json extra = json::object();
  if (a.norm == "lp") value = lp_norm(h, a.p);
  else if (a.norm == "weak-quasi") value = weak_quasinorm(h, PExponent(a.p));
  else if (a.norm == "weak-l1") value = weak_L1_norm(h, PExponent(a.p));
  else if (a.norm == "weak-lr") {
    value = weak_Lr_norm(h, PExponent(a.p), a.r);
    auto s = sandwich_check(h, PExponent(a.p), a.r);
    extra = {{"lhs", s.lhs}, {"mid", s.mid}, {"rhs", s.rhs}, {"slack", s.slack}, {"holds", s.holds}};
  } else if (a.norm == "lorentz-q1") value = lorentz_q1_norm(h, a.q);
  else throw CLI::ValidationError("--norm", "unknown norm '" + a.norm + "'");
  run.outputs = {{"value", value}};
  if (!extra.empty()) run.outputs["sandwich"] = extra;
  run.text = fmt::format("{:.8g}\n", value);

  auto rear = decreasing_rearrangement(h);
  if (!em.csv.empty()) {
    emit::Table t{{"rank", "value", "weight", "cumulative_weight"}, {}};
    double cum = 0;
    for (std::size_t k = 0; k < rear.size(); ++k) t.add(k + 1, rear[k].first, rear[k].second, cum += rear[k].second);
    emit::write_csv(em.csv, t);
  }
  if (!em.svg.empty()) {
    emit::Series s{"h*", {}, {}};
    double cum = 0;
    for (auto [val, w] : rear) {
      s.x.push_back(cum), s.y.push_back(val);
      s.x.push_back(cum += w), s.y.push_back(val);
    }
    emit::write_svg(em.svg, "decreasing rearrangement", "t", "h*(t)", {s});
  }
}

struct RhoArgs {
  std::string expr, gens, space = "l1:d=2", vertices, tag = "lp:p=2";
  int restarts = 64, nmax = 6;
  long evals = 3000;
  bool weighted = false;
};

void cmd_rho(const RhoArgs& a, Run& run, const Emitters& em) {
  Expr f = parse(a.expr);
  Mat gens = to_matrix(parse_json(a.gens, "--gens"), "--gens");
  FiniteSpace E = parse_space(a.space, a.vertices);
  NormTag tag = parse_tag(a.tag);
  RhoOptions o;
  o.restarts = a.restarts;
  o.n_max = a.nmax;
  o.evals_per_restart = a.evals;
  o.weighted = a.weighted;
  o.seed = run.seed;
  auto r = rho_estimate(f, gens, E, tag, o);
  json trace = json::array();
  for (const auto& t : r.trace) trace.push_back({t.n, t.restart, t.start, t.end});
  run.outputs = {{"value", r.value},
                 {"heuristic", r.heuristic},
                 {"expression", format(f)},
                 {"tag", tag.str()},
                 {"witness", r.witness.functionals},
                 {"weights", r.witness.weights},
                 {"trace", trace}};
  run.text = fmt::format("value {:.4f}{}\nwitness size {}\n", r.value, r.heuristic ? " (heuristic)" : "",
                         r.witness.functionals.size());
  if (!em.csv.empty()) {
    emit::Table t{{"n", "restart", "start", "end", "improved_best"}, {}};
    for (const auto& e : r.trace) t.add(e.n, e.restart, e.start, e.end, e.improved_best);
    emit::write_csv(em.csv, t);
  }
  if (!em.svg.empty()) {
    emit::Series run_end{"restart value", {}, {}, true}, best{"best so far", {}, {}};
    double b = -1;
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
      b = std::max(b, r.trace[k].end);
      run_end.x.push_back(double(k)), run_end.y.push_back(r.trace[k].end);
      best.x.push_back(double(k)), best.y.push_back(b);
    }
    emit::write_svg(em.svg, "rho lower bound: " + format(f), "run", "value", {run_end, best});
  }
}

struct CertifyArgs {
  std::string lattice, a;
  double C = 1.0, epsilon = 0.01;
  int budget = 16, samples = 1000;
  bool bisect = false;
};

void cmd_certify(const CertifyArgs& a, Run& run, const Emitters& em) {
  auto X = UnconditionalLattice::parse(a.lattice);
  auto av = parse_list(a.a, "--a");
  SearchOptions so;
  so.budget = a.budget;
  so.seed = run.seed;
  auto cs = certificate_search(X, av, a.epsilon, a.C, so);
  json out = {{"lattice", X.id()}, {"C", a.C}, {"found", cs.found}, {"attempts", cs.attempts}, {"heuristic", cs.heuristic}};
  std::string text;
  if (cs.found) {
    const auto& c = cs.certificate;
    auto v = certificate_verify(X, c);
    auto S = build_S(X, c);
    auto sr = verify_S(X, c, S, a.samples, run.seed);
    out["certificate"] = {{"a", c.a}, {"b", c.b}, {"d", c.d}, {"C", c.C}, {"epsilon", c.epsilon}};
    out["verify"] = {{"valid", v.valid}, {"violation", v.violation}, {"worst_excess", v.worst_excess},
                     {"pairing", v.pairing}};
    out["S"] = {{"multipliers", S.multipliers}, {"image_of_a", sr.image_of_a}, {"full_set_value", sr.full_set_value},
                {"max_ratio", sr.max_ratio},     {"lower_ok", sr.lower_ok},     {"upper_ok", sr.upper_ok}};
    text = fmt::format("Feasible at C={:.8g}\nd = [{:.6g}]\nverify {}{}\n||Sa|| = {:.8g}, sampled ||S|| <= {:.8g}\n", a.C,
                       fmt::join(c.d, ", "), v.valid ? "ok" : "FAILED ", v.violation, sr.image_of_a, sr.max_ratio);
    if (!v.valid || !sr.lower_ok || !sr.upper_ok) run.exit_code = kExitVerify;
  } else {
    json cover = json::array();
    for (const auto& cw : cs.last.cover) cover.push_back({{"set", mask_indices(cw.set)}, {"weight", cw.weight}});
    out["status"] = "Infeasible";
    out["margin"] = cs.last.margin;
    out["cover"] = cover;
    out["cover_gap"] = cs.last.cover_gap;
    text = fmt::format("Infeasible at C={:.8g}: margin {:.6g}, cover gap {:.6g} over {} sets\n", a.C, cs.last.margin,
                       cs.last.cover_gap, cs.last.cover.size());
    run.exit_code = kExitVerify;
  }
  if (a.bisect) {
    auto nf = X.norming_functional(cs.found ? cs.certificate.a : av);
    double cmin = minimal_feasible_C(X, nf.b);
    out["minimal_C"] = cmin;
    text += fmt::format("minimal feasible C for this b: {:.8g}\n", cmin);
  }
  run.outputs = out;
  run.text = text;
  if (!em.csv.empty() && cs.found) {
    emit::Table t{{"i", "a", "b", "d"}, {}};
    for (std::size_t i = 0; i < X.dim(); ++i) t.add(i, cs.certificate.a[i], cs.certificate.b[i], cs.certificate.d[i]);
    emit::write_csv(em.csv, t);
  }
  if (!em.svg.empty() && cs.found) {
    emit::Series b{"b", {}, {}}, d{"d", {}, {}};
    for (std::size_t i = 0; i < X.dim(); ++i)
      b.x.push_back(double(i)), b.y.push_back(cs.certificate.b[i]), d.x.push_back(double(i)), d.y.push_back(cs.certificate.d[i]);
    emit::write_svg(em.svg, "certificate for " + X.id(), "coordinate", "value", {b, d});
  }
}

struct ObstructArgs {
  std::string lattice, b, cover;
  int samples = 64, max_sets = 6, max_mult = 3;
};

double x3_closed_form(double p) {
  double q = p / (p - 1), t = std::pow(2.0, q);
  return std::pow(3 * t / (2 * (1 + t)), 1 / q);
}

void cmd_obstruct(const ObstructArgs& a, Run& run, const Emitters& em) {
  auto X = UnconditionalLattice::parse(a.lattice);
  json out = {{"lattice", X.id()}};
  if (!a.cover.empty()) {
    if (a.b.empty()) throw CLI::ValidationError("--b", "required with --cover");
    auto b = parse_list(a.b, "--b");
    std::vector<std::vector<int>> sets;
    try {
      sets = parse_json(a.cover, "--cover").get<std::vector<std::vector<int>>>();
    } catch (const json::exception&) {
      throw CLI::ValidationError("--cover", "expected a JSON array of index arrays");
    }
    auto cov = parse_cover(sets, X.dim());
    double v = cover_obstruction(X, b, cov);
    out.update({{"value", v}, {"b", b}, {"cover", masks_json(cov)}, {"exhaustive", false}});
    run.text = fmt::format("obstruction C >= {:.8g}\n", v);
  } else {
    ObstructionOptions o;
    o.samples = a.samples;
    o.max_sets = a.max_sets;
    o.max_multiplicity = a.max_mult;
    o.seed = run.seed;
    auto r = obstruction_search(X, o);
    out.update({{"value", r.value},
                {"b", r.b},
                {"cover", masks_json(r.cover)},
                {"multiplicity", r.multiplicity},
                {"exhaustive", r.exhaustive}});
    run.text = fmt::format("obstruction C >= {:.8g} (cover of {} sets, multiplicity {})\n", r.value, r.cover.size(),
                           r.multiplicity);
  }
  if (X.kind() == UnconditionalLattice::Kind::X3) {
    out["closed_form"] = x3_closed_form(X.p());
    run.text += fmt::format("closed form {:.8g}\n", x3_closed_form(X.p()));
  }
  run.outputs = out;
  if (!em.csv.empty()) {
    emit::Table t{{"set", "indices"}, {}};
    int k = 0;
    for (const auto& s : out["cover"]) t.add(k++, s.dump());
    emit::write_csv(em.csv, t);
  }
  if (!em.svg.empty()) {
    emit::Series s{"b", {}, {}};
    auto b = out["b"].get<Vec>();
    for (std::size_t i = 0; i < b.size(); ++i) s.x.push_back(double(i)), s.y.push_back(b[i]);
    emit::write_svg(em.svg, "obstruction direction for " + X.id(), "coordinate", "b", {s});
  }
}

struct IoArgs {
  std::string input, json_text;
  int samples = 1000;
};

void cmd_renorm(const IoArgs& a, Run& run, const Emitters& em) {
  json in = read_input(a.input, a.json_text);
  SimpleFunction f;
  double p = 0, r = 0;
  try {
    f = {in.at("a").get<Vec>(), in.at("mu").get<Vec>()};
    p = in.at("p").get<double>();
    r = in.at("r").get<double>();
  } catch (const json::exception&) {
    throw CLI::ValidationError("--input", "expected {a:[...], mu:[...], p, r}");
  }
  // Atoms with a_i = 0 carry nothing and are dropped.
  SimpleFunction g;
  for (std::size_t i = 0; i < f.a.size() && i < f.mu.size(); ++i)
    if (f.a[i] != 0.0) g.a.push_back(f.a[i]), g.mu.push_back(f.mu[i]);
  if (f.a.size() != f.mu.size()) throw Error(ErrorCode::DimensionMismatch, "a and mu differ in length");
  auto E = build_renorm_embedding(g, p, r);
  auto rep = verify_renorm(g, E, a.samples, run.seed);
  run.outputs = {{"M", E.M},
                 {"C", E.C},
                 {"s", E.s},
                 {"nu", E.d},
                 {"multipliers", E.multipliers},
                 {"gauge", {{"beta", E.gauge.beta}, {"b", E.gauge.b}}},
                 {"report",
                  {{"image_of_f", rep.image_of_f},
                   {"lower_target", rep.lower_target},
                   {"holder_bound", rep.holder_bound},
                   {"sampled_max", rep.sampled_max},
                   {"lower_ok", rep.lower_ok},
                   {"upper_ok", rep.upper_ok}}}};
  run.text = fmt::format("C = {:.8g}, s = {:.8g}\n||S f|| = {:.8g} (target C^r = {:.8g})\n||S|| <= {:.8g} (Holder), sampled {:.8g}\n",
                         E.C, E.s, rep.image_of_f, rep.lower_target, rep.holder_bound, rep.sampled_max);
  if (!rep.lower_ok || !rep.upper_ok) run.exit_code = kExitVerify;
  if (!em.csv.empty()) {
    emit::Table t{{"i", "a", "mu", "nu", "multiplier"}, {}};
    for (std::size_t i = 0; i < g.a.size(); ++i) t.add(i, g.a[i], g.mu[i], E.d[i], E.multipliers[i]);
    emit::write_csv(em.csv, t);
  }
  if (!em.svg.empty()) {
    emit::Series mu{"mu", {}, {}}, nu{"nu", {}, {}};
    for (std::size_t i = 0; i < g.a.size(); ++i)
      mu.x.push_back(double(i)), mu.y.push_back(g.mu[i]), nu.x.push_back(double(i)), nu.y.push_back(E.d[i]);
    emit::write_svg(em.svg, "atom masses", "atom", "mass", {mu, nu});
  }
}

void cmd_project(const IoArgs& a, Run& run, const Emitters& em) {
  json in = read_input(a.input, a.json_text);
  double p = 0, c = 0;
  std::size_t blocks = 0, k = 0;
  Mat xs;
  try {
    p = in.at("p").get<double>();
    c = in.at("c").get<double>();
    blocks = in.at("blocks").get<std::size_t>();
    k = in.at("k").get<std::size_t>();
    xs = in.at("vectors").get<Mat>();
  } catch (const json::exception&) {
    throw CLI::ValidationError("--input", "expected {p, blocks, k, vectors:[[...]], c}");
  }
  DisjointSystem sys(LpSumSpace(blocks, k, p), xs, c, a.samples, run.seed);
  Mat S = build_S_matrix(sys);
  auto ar = find_alpha(S, c, p);
  json out = {{"S", S}, {"game_value", ar.value}, {"target", std::pow(c, p)}, {"feasible", ar.feasible}};
  if (!ar.feasible) {
    out["separator"] = ar.separator;
    run.outputs = out;
    run.text = fmt::format("Infeasible: max_alpha min_n (S^T alpha)_n = {:.8g} < c^p = {:.8g}\n", ar.value, std::pow(c, p));
    run.exit_code = kExitVerify;
    return;
  }
  auto pr = build_projection(sys, ar.alpha);
  auto rep = verify_projection(pr, sys, a.samples, run.seed);
  out["alpha"] = ar.alpha;
  out["P"] = pr.P;
  out["report"] = {{"positive", rep.positive},         {"idempotent", rep.idempotent}, {"fixes_system", rep.fixes_system},
                   {"norm_estimate", rep.norm_estimate}, {"norm_bound", rep.norm_bound}, {"ok", rep.ok()}};
  run.outputs = out;
  run.text = fmt::format("alpha = [{:.6g}]\n||P|| ~ {:.8g} <= c^-p = {:.8g}: {}\n", fmt::join(ar.alpha, ", "),
                         rep.norm_estimate, rep.norm_bound, rep.ok() ? "ok" : "FAILED");
  if (!rep.ok()) run.exit_code = kExitVerify;
  if (!em.csv.empty()) {
    emit::Table t{{"row", "col", "value"}, {}};
    for (std::size_t i = 0; i < pr.P.size(); ++i)
      for (std::size_t j = 0; j < pr.P.size(); ++j) t.add(i, j, pr.P[i][j]);
    emit::write_csv(em.csv, t);
  }
  if (!em.svg.empty()) {
    emit::Series s{"alpha", {}, {}};
    for (std::size_t g = 0; g < ar.alpha.size(); ++g) s.x.push_back(double(g)), s.y.push_back(ar.alpha[g]);
    emit::write_svg(em.svg, "block weights", "block", "alpha", {s});
  }
}

struct SchreierArgs {
  int nmax = 20, samples = 500;
  double p = 2.0;
};

void cmd_schreier(const SchreierArgs& a, Run& run, const Emitters& em) {
  auto sets = schreier_sets(a.nmax);
  Rng rng(derive_seed(run.seed, 0x5c4));
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  int upper_fail = 0, lower_fail = 0;
  double lower_constant = 0;
  emit::Table t{{"sample", "ratio", "max_restricted", "level_set", "upper_ok", "lower_ok"}, {}};
  emit::Series pts{"max over Schreier sets", {}, {}, true};
  for (int s = 0; s < a.samples; ++s) {
    auto v = random_schreier_vector(rng, static_cast<std::size_t>(a.nmax), a.p);
    auto r = schreier_embedding_check(v, sets, a.p);
    lower_constant = r.lower_constant;
    lo = std::min(lo, r.max_restricted), hi = std::max(hi, r.ratio);
    upper_fail += !r.upper_ok;
    lower_fail += !r.lower_ok;
    t.add(s, r.ratio, r.max_restricted, r.level_set_size, r.upper_ok, r.lower_ok);
    pts.x.push_back(double(s)), pts.y.push_back(r.max_restricted);
  }
  run.outputs = {{"count", sets.size()},         {"samples", a.samples},        {"p", a.p},
                 {"lower_constant", lower_constant}, {"min_max_restricted", lo}, {"max_ratio", hi},
                 {"upper_failures", upper_fail}, {"lower_failures", lower_fail}};
  run.text = fmt::format("{} Schreier sets in [1, {}]\nupper failures {}, lower failures {} of {}\n"
                         "min over samples {:.8g} vs lower constant {:.8g}; max ratio {:.8g}\n",
                         sets.size(), a.nmax, upper_fail, lower_fail, a.samples, lo, lower_constant, hi);
  if (upper_fail || lower_fail) run.exit_code = kExitVerify;
  if (!em.csv.empty()) emit::write_csv(em.csv, t);
  if (!em.svg.empty()) {
    emit::Series c{"lower constant", {0.0, double(a.samples)}, {lower_constant, lower_constant}};
    emit::write_svg(em.svg, "Schreier restriction of unit vectors", "sample", "max restricted norm", {pts, c});
  }
}

void cmd_constants(double p, Run& run, const Emitters& em) {
  PExponent pe(p);
  double g = gamma_p(pe), x3 = x3_closed_form(p);
  double lc = 1.0 / (pe.conj() * std::pow(2.0, 1.0 / pe.conj()));
  run.outputs = {{"p", p},
                 {"pconj", pe.conj()},
                 {"gamma_p", g},
                 {"x3_bound", x3},
                 {"x3_bound_pow", std::pow(x3, pe.conj())},
                 {"schreier_lower", lc}};
  run.text = fmt::format("gamma_p = {:.8g}\nX3 bound C >= {:.8g}\nSchreier lower constant {:.8g}\n", g, x3, lc);
  std::vector<double> ps;
  for (double t = 1.1; t <= 10.0 + 1e-9; t += 0.1) ps.push_back(t);
  if (!em.csv.empty()) {
    emit::Table tb{{"p", "gamma_p", "x3_bound", "schreier_lower"}, {}};
    for (double t : ps) {
      double q = t / (t - 1);
      tb.add(t, gamma_p(PExponent(t)), x3_closed_form(t), 1.0 / (q * std::pow(2.0, 1.0 / q)));
    }
    emit::write_csv(em.csv, tb);
  }
  if (!em.svg.empty()) {
    emit::Series a{"gamma_p", {}, {}}, b{"X3 bound", {}, {}};
    for (double t : ps) a.x.push_back(t), a.y.push_back(gamma_p(PExponent(t))), b.x.push_back(t), b.y.push_back(x3_closed_form(t));
    emit::write_svg(em.svg, "constants", "p", "value", {a, b});
  }
}

// ---------------------------------------------------------------- driver

json make_record(const Run& run, double seconds) {
  return {{"command", run.command}, {"parameters", run.parameters}, {"seed", run.seed},
          {"outputs", run.outputs}, {"wall_time_s", seconds},       {"version", kVersion}};
}

struct Context {
  bool replaying = false;
  Run last;  // filled by execute()
};

int execute(std::vector<std::string> args, Context& ctx);

int cmd_replay(const std::string& file, int line) {
  std::ifstream f(file);
  if (!f) throw CLI::ValidationError("--record", "cannot open " + file);
  std::vector<std::string> lines;
  for (std::string l; std::getline(f, l);)
    if (!l.empty()) lines.push_back(l);
  if (lines.empty()) throw CLI::ValidationError("--record", "no records in " + file);
  std::vector<std::size_t> which;
  if (line == 0) {
    for (std::size_t i = 0; i < lines.size(); ++i) which.push_back(i);
  } else {
    if (line < 1 || static_cast<std::size_t>(line) > lines.size()) throw CLI::ValidationError("--line", "out of range");
    which.push_back(static_cast<std::size_t>(line - 1));
  }
  int mismatches = 0;
  for (auto i : which) {
    json rec = parse_json(lines[i], "--record");
    std::vector<std::string> args{"--seed", std::to_string(rec.at("seed").get<std::uint64_t>()),
                                  rec.at("command").get<std::string>()};
    for (auto& [k, v] : rec.at("parameters").items()) {
      if (v.is_boolean()) {
        if (v.get<bool>()) args.push_back("--" + k);
      } else {
        args.push_back("--" + k);
        args.push_back(v.get<std::string>());
      }
    }
    Context inner;
    inner.replaying = true;
    execute(args, inner);
    bool same = inner.last.outputs.dump() == rec.at("outputs").dump();
    mismatches += !same;
    std::cout << fmt::format("record {}: {} {}\n", i + 1, rec.at("command").get<std::string>(),
                             same ? "identical" : "MISMATCH");
  }
  return mismatches ? kExitVerify : kExitOk;
}

int execute(std::vector<std::string> args, Context& ctx) {
  CLI::App app{"fbllab: free Banach lattice norms, lattice embeddings and constants"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file mirroring the flags; use [command] sections for subcommand flags");

  std::uint64_t seed = 0;
  std::string results, csv, svg;
  bool json_out = false;
  app.add_option("--seed", seed, "master seed")->envname("FBLLAB_SEED")->capture_default_str();
  app.add_option("--results", results, "append the RunRecord as one JSON line to this file");
  app.add_option("--csv", csv, "write a CSV table");
  app.add_option("--svg", svg, "write an SVG plot");
  app.add_flag("--json-out", json_out, "print the RunRecord instead of the summary");

  NormArgs na;
  auto* norm = app.add_subcommand("norm", "norm of a sequence on an atomic measure space");
  norm->add_option("--values", na.values, "comma-separated values")->required();
  norm->add_option("--weights", na.weights, "comma-separated atom masses (default counting)");
  norm->add_option("--norm", na.norm, "lp | weak-quasi | weak-l1 | weak-lr | lorentz-q1")
      ->check(CLI::IsMember({"lp", "weak-quasi", "weak-l1", "weak-lr", "lorentz-q1"}))
      ->capture_default_str();
  norm->add_option("--p", na.p, "exponent p")->capture_default_str();
  norm->add_option("--q", na.q, "Lorentz exponent q")->capture_default_str();
  norm->add_option("--r", na.r, "inner exponent r of the weak-lr norm")->capture_default_str();

  RhoArgs ra;
  auto* rho = app.add_subcommand("rho", "lower bound for a free Banach lattice norm");
  rho->add_option("--expr", ra.expr, "lattice-linear expression, e.g. \"|d1| \\/ d2\"")->required();
  rho->add_option("--gens", ra.gens, "generators as a JSON matrix, e.g. [[1,0],[0,1]]")->required();
  rho->add_option("--space", ra.space, "l1:d=N | linf:d=N | lq:q=Q,d=N | poly | lattice:<id>")->capture_default_str();
  rho->add_option("--vertices", ra.vertices, "polytope vertices as a JSON matrix (with --space poly)");
  rho->add_option("--tag", ra.tag, "lp:p=P | weak-quasi:p=P | weak-l1:p=P | weak-lr:p=P,r=R | lorentz-q1:q=Q")
      ->capture_default_str();
  rho->add_option("--restarts", ra.restarts)->capture_default_str()->check(CLI::PositiveNumber);
  rho->add_option("--nmax", ra.nmax, "largest witness tuple size")->capture_default_str()->check(CLI::PositiveNumber);
  rho->add_option("--evals", ra.evals, "evaluations per restart")->capture_default_str()->check(CLI::PositiveNumber);
  rho->add_flag("--weighted", ra.weighted, "also search over atom masses");

  CertifyArgs ca;
  auto* certify = app.add_subcommand("certify", "search for an embedding certificate (b, d) at constant C");
  certify->add_option("--lattice", ca.lattice, "X3:p=P | lp:p=P,n=N | weaklp:p=P,n=N")->required();
  certify->add_option("--a", ca.a, "comma-separated vector a")->required();
  certify->add_option("--C", ca.C)->capture_default_str();
  certify->add_option("--epsilon", ca.epsilon, "pairing slack")->capture_default_str();
  certify->add_option("--budget", ca.budget, "perturbed retries")->capture_default_str();
  certify->add_option("--samples", ca.samples, "samples for the operator check")->capture_default_str();
  certify->add_flag("--bisect", ca.bisect, "also bisect the minimal feasible C");

  ObstructArgs oa;
  auto* obstruct = app.add_subcommand("obstruct", "lower bound on the embedding constant from covers");
  obstruct->add_option("--lattice", oa.lattice)->required();
  obstruct->add_option("--samples", oa.samples)->capture_default_str();
  obstruct->add_option("--max-sets", oa.max_sets)->capture_default_str();
  obstruct->add_option("--max-mult", oa.max_mult)->capture_default_str();
  obstruct->add_option("--b", oa.b, "evaluate this b with --cover instead of searching");
  obstruct->add_option("--cover", oa.cover, "cover as JSON index sets, e.g. [[0,1],[1,2],[0,2]]");

  IoArgs ia, ja;
  auto* renorm = app.add_subcommand("renorm-embed", "diagonal embedding for a simple function {a, mu, p, r}");
  renorm->add_option("--input", ia.input, "JSON file");
  renorm->add_option("--json", ia.json_text, "inline JSON");
  renorm->add_option("--samples", ia.samples)->capture_default_str();

  auto* project = app.add_subcommand("project", "positive projection onto a disjoint system {p, blocks, k, vectors, c}");
  project->add_option("--input", ja.input, "JSON file");
  project->add_option("--json", ja.json_text, "inline JSON");
  project->add_option("--samples", ja.samples)->capture_default_str();

  SchreierArgs sa;
  auto* schreier = app.add_subcommand("schreier", "Schreier family enumeration and embedding check");
  schreier->add_option("--nmax", sa.nmax)->capture_default_str()->check(CLI::Range(1, 24));
  schreier->add_option("--p", sa.p)->capture_default_str();
  schreier->add_option("--samples", sa.samples)->capture_default_str();

  double cp = 2.0;
  auto* constants = app.add_subcommand("constants", "closed-form constants for exponent p");
  constants->add_option("--p", cp)->capture_default_str();

  std::string record;
  int line = 0;
  auto* replay = app.add_subcommand("replay", "re-run stored RunRecords and compare outputs");
  replay->add_option("--record", record, "JSONL results file")->required();
  replay->add_option("--line", line, "1-based record index (0 = all)")->capture_default_str();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub == replay) return cmd_replay(record, line);

  Run run;
  run.command = sub->get_name();
  run.seed = seed;
  run.parameters = collect_parameters(sub);
  Emitters em{csv, svg};
  if (ctx.replaying) em = {};

  auto t0 = std::chrono::steady_clock::now();
  if (sub == norm) cmd_norm(na, run, em);
  else if (sub == rho) cmd_rho(ra, run, em);
  else if (sub == certify) cmd_certify(ca, run, em);
  else if (sub == obstruct) cmd_obstruct(oa, run, em);
  else if (sub == renorm) cmd_renorm(ia, run, em);
  else if (sub == project) cmd_project(ja, run, em);
  else if (sub == schreier) cmd_schreier(sa, run, em);
  else if (sub == constants) cmd_constants(cp, run, em);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ctx.last = run;
  if (ctx.replaying) return run.exit_code;
  json rec = make_record(run, secs);
  if (!results.empty()) {
    std::ofstream f(results, std::ios::app);
    if (!f) throw CLI::ValidationError("--results", "cannot open " + results);
    f << rec.dump() << '\n';
  }
  if (json_out) std::cout << rec.dump() << '\n';
  else std::cout << run.text;
  return run.exit_code;
}

// Library errors raised by a verification step rather than by bad input.
bool is_verification(ErrorCode c) {
  return c == ErrorCode::ScaleViolation || c == ErrorCode::ConstantRefuted || c == ErrorCode::SimplexViolation ||
         c == ErrorCode::PositivityViolation || c == ErrorCode::DegenerateFunctional;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  Context ctx;
  try {
    return execute(args, ctx);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_verification(e.code()) ? kExitVerify : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
