#include "ringmod/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ringmod/criteria.hpp"
#include "ringmod/discrete.hpp"
#include "ringmod/errors.hpp"
#include "ringmod/maps.hpp"
#include "ringmod/modulus.hpp"
#include "ringmod/sweep.hpp"

namespace ringmod::scenario {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Schema checks (parse stage, exit 2)

enum class Type { number, integer, boolean, string, array, object, radius };

struct Field {
  const char* name;
  Type type;
  bool required;
};

const char* type_name(Type t) {
  switch (t) {
    case Type::number: return "a number";
    case Type::integer: return "an integer";
    case Type::boolean: return "a boolean";
    case Type::string: return "a string";
    case Type::array: return "an array";
    case Type::object: return "an object";
    case Type::radius: return "a number or \"inf\"";
  }
  return "?";
}

bool has_type(const json& v, Type t) {
  switch (t) {
    case Type::number: return v.is_number();
    case Type::integer: return v.is_number_integer();
    case Type::boolean: return v.is_boolean();
    case Type::string: return v.is_string();
    case Type::array: return v.is_array();
    case Type::object: return v.is_object();
    case Type::radius: return v.is_number() || (v.is_string() && v.get<std::string>() == "inf");
  }
  return false;
}

void check_fields(const json& obj, const std::vector<Field>& fields, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  for (const Field& f : fields) {
    const auto it = obj.find(f.name);
    if (it == obj.end()) {
      if (f.required) throw ParseError(path + "." + f.name + ": required field is missing");
      continue;
    }
    if (!has_type(*it, f.type)) throw ParseError(path + "." + f.name + ": expected " + type_name(f.type));
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const Field& f : fields) known = known || it.key() == f.name;
    if (!known) throw ParseError(path + "." + it.key() + ": unknown field");
  }
}

void check_number_array(const json& v, const std::string& path) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ParseError(path + "[" + std::to_string(i) + "]: expected a number");
  }
}

void check_integer_array(const json& v, const std::string& path) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) throw ParseError(path + "[" + std::to_string(i) + "]: expected an integer");
  }
}

void check_point_array(const json& v, const std::string& path) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array()) throw ParseError(p + ": expected a point (array of numbers)");
    check_number_array(v[i], p);
  }
}

void check_profile(const json& v, const std::string& path) {
  if (!v.is_object() || !v.contains("kind") || !v["kind"].is_string()) {
    throw ParseError(path + ".kind: required string field is missing");
  }
  const std::string kind = v["kind"];
  if (kind == "constant") {
    check_fields(v, {{"kind", Type::string, true}, {"c", Type::number, true}}, path);
  } else if (kind == "power") {
    check_fields(v, {{"kind", Type::string, true}, {"c", Type::number, false}, {"exponent", Type::number, true}}, path);
  } else if (kind == "logarithmic") {
    check_fields(v, {{"kind", Type::string, true}, {"c", Type::number, false}, {"scale", Type::number, false}}, path);
  } else if (kind == "polynomial") {
    check_fields(v, {{"kind", Type::string, true}, {"coeffs", Type::array, true}}, path);
    check_number_array(v["coeffs"], path + ".coeffs");
  } else {
    throw ParseError(path + ".kind: unknown profile kind '" + kind +
                     "' (expected constant, power, logarithmic or polynomial)");
  }
}

const std::map<std::string, std::vector<Field>>& schemas() {
  static const std::map<std::string, std::vector<Field>> table = {
      {"ring_modulus",
       {{"n", Type::integer, true}, {"p", Type::number, true}, {"r1", Type::number, true}, {"r2", Type::radius, true}}},
      {"lemma74_identity",
       {{"n", Type::integer, true},
        {"r1", Type::number, true},
        {"r2", Type::number, true},
        {"weights", Type::array, true},
        {"center", Type::array, false},
        {"tolerance", Type::number, false}}},
      {"divergence_probe",
       {{"n", Type::integer, true},
        {"p", Type::number, true},
        {"profile", Type::object, true},
        {"delta", Type::number, false},
        {"probes", Type::integer, false}}},
      {"fmo_probe",
       {{"n", Type::integer, true},
        {"profile", Type::object, true},
        {"x0", Type::array, false},
        {"eps_start", Type::number, false},
        {"eps_ratio", Type::number, false},
        {"eps_count", Type::integer, false},
        {"at_infinity", Type::boolean, false}}},
      {"theorem3_counterexample",
       {{"n", Type::integer, true},
        {"p", Type::number, true},
        {"profile", Type::object, true},
        {"continuum", Type::array, true},
        {"a", Type::array, true},
        {"b", Type::array, true},
        {"m_list", Type::array, true}}},
      {"lightness_sweep",
       {{"n", Type::integer, true},
        {"p", Type::number, true},
        {"families", Type::array, true},
        {"members_log2", Type::integer, true},
        {"battery", Type::object, false},
        {"negative_control", Type::boolean, false},
        {"expect_below", Type::number, false},
        {"workers", Type::integer, false}}},
      {"discrete_oracle_check",
       {{"n", Type::integer, true},
        {"p", Type::number, true},
        {"r1", Type::number, true},
        {"r2", Type::number, true},
        {"levels", Type::array, true},
        {"tolerance", Type::number, false},
        {"solver_tolerance", Type::number, false}}},
  };
  return table;
}

void check_kind_details(const std::string& kind, const json& p) {
  const std::string base = "parameters";
  if (kind == "lemma74_identity") {
    for (std::size_t i = 0; i < p["weights"].size(); ++i) check_profile(p["weights"][i], base + ".weights[" + std::to_string(i) + "]");
    if (p.contains("center")) check_number_array(p["center"], base + ".center");
  } else if (kind == "divergence_probe" || kind == "fmo_probe") {
    check_profile(p["profile"], base + ".profile");
    if (p.contains("x0")) check_number_array(p["x0"], base + ".x0");
  } else if (kind == "theorem3_counterexample") {
    check_profile(p["profile"], base + ".profile");
    check_point_array(p["continuum"], base + ".continuum");
    check_number_array(p["a"], base + ".a");
    check_number_array(p["b"], base + ".b");
    check_integer_array(p["m_list"], base + ".m_list");
  } else if (kind == "lightness_sweep") {
    for (std::size_t i = 0; i < p["families"].size(); ++i) {
      const std::string path = base + ".families[" + std::to_string(i) + "]";
      check_fields(p["families"][i], {{"profile", Type::object, true}, {"label", Type::string, false}}, path);
      check_profile(p["families"][i]["profile"], path + ".profile");
    }
    if (p.contains("battery")) {
      check_fields(p["battery"],
                   {{"count", Type::integer, false},
                    {"epsilon", Type::number, false},
                    {"k_inner", Type::number, false},
                    {"k_outer", Type::number, false}},
                   base + ".battery");
    }
  } else if (kind == "discrete_oracle_check") {
    for (std::size_t i = 0; i < p["levels"].size(); ++i) {
      const std::string path = base + ".levels[" + std::to_string(i) + "]";
      if (!p["levels"][i].is_array() || p["levels"][i].size() != 2) {
        throw ParseError(path + ": expected [radial, angular]");
      }
      check_integer_array(p["levels"][i], path);
    }
  }
}

// ---------------------------------------------------------------------------
// Value helpers (run stage)

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

QProfile make_profile(const json& v) {
  const std::string kind = v["kind"];
  if (kind == "constant") return QProfile::constant(v["c"].get<double>());
  if (kind == "power") return QProfile::power(v.value("c", 1.0), v["exponent"].get<double>());
  if (kind == "logarithmic") return QProfile::logarithmic(v.value("c", 1.0), v.value("scale", std::numbers::e));
  return QProfile::polynomial(v["coeffs"].get<std::vector<double>>());
}

int dimension_of(const json& p) {
  const int n = p["n"].get<int>();
  if (n < 2) throw InputError("parameters.n: must be >= 2");
  return n;
}

Vec point_of(const json& v, int n, const std::string& name) {
  Vec x = v.get<Vec>();
  if (static_cast<int>(x.size()) != n) throw InputError(name + ": expected " + std::to_string(n) + " coordinates");
  return x;
}

double radius_of(const json& v) {
  return v.is_string() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

class Report {
 public:
  explicit Report(const Scenario& s) {
    os_ << "# kind: " << s.kind << "\n";
    os_ << "# seed: " << s.seed << "\n";
    for (auto it = s.parameters.begin(); it != s.parameters.end(); ++it) {
      os_ << "# parameters." << it.key() << ": " << it.value().dump() << "\n";
    }
    const QuadratureConfig& q = s.quadrature;
    os_ << "# quadrature: sphere_order=" << q.sphere_order << " sphere_samples=" << q.sphere_samples
        << " radial_points=" << q.radial_points << " target_rel_tol=" << num(q.target_rel_tol)
        << " max_subdivisions=" << q.max_subdivisions << "\n";
  }

  void line(const std::string& text) { os_ << text << "\n"; }
  void result(const std::string& key, const std::string& value) { results_ << "# result." << key << ": " << value << "\n"; }
  std::string str() const { return os_.str() + results_.str(); }

 private:
  std::ostringstream os_;
  std::ostringstream results_;
};

struct Outcome {
  std::string csv;
  std::string svg;
  std::vector<std::pair<std::string, std::string>> extra;  // (suffix, contents)
  std::string contract_failure;
};

void say(const RunOptions& o, const std::string& msg) {
  if (o.verbose && o.log) *o.log << msg << "\n";
}

Outcome run_ring_modulus(const Scenario& s, const RunOptions&) {
  const json& p = s.parameters;
  const auto r = ring_modulus_exact(dimension_of(p), p["p"].get<double>(), p["r1"].get<double>(), radius_of(p["r2"]));
  Report rep(s);
  rep.line("n,p,r1,r2,method,value");
  rep.line(std::to_string(r.n) + "," + num(r.p) + "," + num(r.r1) + "," + num(r.r2) + "," + to_string(r.method) + "," +
           num(r.value));
  return {rep.str(), {}, {}, {}};
}

Outcome run_weighted_identity(const Scenario& s, const RunOptions& o) {
  const json& p = s.parameters;
  const int n = dimension_of(p);
  const Vec center = p.contains("center") ? point_of(p["center"], n, "parameters.center") : Vec(static_cast<std::size_t>(n), 0.0);
  const double tol = p.value("tolerance", 1e-4);
  Report rep(s);
  rep.line("weight,J,bound,energy,relative_error");
  Outcome out;
  double worst = 0.0;
  for (const json& w : p["weights"]) {
    const QProfile prof = make_profile(w);
    const WeightField q = WeightField::radial(n, center, prof);
    say(o, "lemma74_identity: " + prof.description());
    const Eta0Bound b = eta0_weighted_bound(q, center, p["r1"].get<double>(), p["r2"].get<double>(), s.quadrature);
    const Eta0Identity id = eta0_identity(q, center, p["r1"].get<double>(), p["r2"].get<double>(), s.quadrature);
    rep.line("\"" + prof.description() + "\"," + num(b.J) + "," + num(id.bound) + "," + num(id.energy) + "," +
             num(id.relative_error));
    worst = std::max(worst, id.relative_error);
  }
  rep.result("max_relative_error", num(worst));
  if (!(worst < tol)) out.contract_failure = "lemma74_identity: relative error " + num(worst) + " exceeds " + num(tol);
  out.csv = rep.str();
  return out;
}

Outcome run_divergence(const Scenario& s, const RunOptions&) {
  const json& p = s.parameters;
  DivergenceOptions dopts;
  dopts.probes = p.value("probes", dopts.probes);
  const QProfile prof = make_profile(p["profile"]);
  const auto v = divergence_test(prof.function(), p["p"].get<double>(), dimension_of(p), p.value("delta", 0.5),
                                 s.quadrature, dopts);
  Report rep(s);
  rep.line("cutoff,partial");
  for (const auto& pt : v.trace) rep.line(num(pt.cutoff) + "," + num(pt.partial));
  rep.result("verdict", to_string(v.verdict));
  rep.result("value", num(v.value));
  if (!v.note.empty()) rep.result("note", v.note);
  return {rep.str(), {}, {}, {}};
}

Outcome run_fmo(const Scenario& s, const RunOptions&) {
  const json& p = s.parameters;
  const int n = dimension_of(p);
  const Vec x0 = p.contains("x0") ? point_of(p["x0"], n, "parameters.x0") : Vec(static_cast<std::size_t>(n), 0.0);
  const double start = p.value("eps_start", 0.5);
  const double ratio = p.value("eps_ratio", 0.5);
  const int count = p.value("eps_count", 12);
  if (!(start > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 2) {
    throw InputError("fmo_probe: need eps_start > 0, 0 < eps_ratio < 1, eps_count >= 2");
  }
  std::vector<double> eps;
  for (int k = 0; k < count; ++k) eps.push_back(start * std::pow(ratio, k));
  WeightField q = WeightField::radial(n, x0, make_profile(p["profile"]));
  if (p.value("at_infinity", false)) q = invert_at_infinity(q);
  const auto r = fmo_estimate(q, x0, eps, s.quadrature);
  Report rep(s);
  rep.line("eps,mean_oscillation");
  for (const auto& pt : r.trace) rep.line(num(pt.cutoff) + "," + num(pt.partial));
  rep.result("score", num(r.score));
  rep.result("infinite", r.infinite ? "true" : "false");
  return {rep.str(), {}, {}, {}};
}

Outcome run_collapse(const Scenario& s, const RunOptions&) {
  const json& p = s.parameters;
  const int n = dimension_of(p);
  std::vector<ExtendedPoint> verts;
  for (std::size_t i = 0; i < p["continuum"].size(); ++i) {
    verts.push_back(ExtendedPoint::finite(point_of(p["continuum"][i], n, "parameters.continuum[" + std::to_string(i) + "]")));
  }
  const Continuum c(std::move(verts));
  const auto a = ExtendedPoint::finite(point_of(p["a"], n, "parameters.a"));
  const auto b = ExtendedPoint::finite(point_of(p["b"], n, "parameters.b"));
  const auto report = collapse_experiment(make_profile(p["profile"]), p["p"].get<double>(), n, c, a, b,
                                        p["m_list"].get<std::vector<int>>(), {}, s.quadrature);
  Report rep(s);
  std::istringstream rows(collapse_csv(report));
  for (std::string line; std::getline(rows, line);) rep.line(line);
  rep.result("collapse_radius", num(report.collapse_radius));
  rep.result("realized_delta", num(report.realized_delta));
  rep.result("diameters_strictly_decreasing", report.diameters_strictly_decreasing ? "true" : "false");
  rep.result("ab_constant_from", std::to_string(report.ab_constant_from));
  Outcome out;
  out.csv = rep.str();
  if (s.svg) out.svg = collapse_svg(report);
  if (!report.diameters_strictly_decreasing) out.contract_failure = "collapse: image diameters are not strictly decreasing";
  else if (report.ab_constant_from == 0) out.contract_failure = "collapse: h(f_m(a), f_m(b)) never settles";
  return out;
}

Outcome run_lightness(const Scenario& s, const RunOptions& o) {
  const json& p = s.parameters;
  const int n = dimension_of(p);
  const double pp = p["p"].get<double>();
  const int L = p["members_log2"].get<int>();
  if (L < 0 || 2 * L + 1 > 30) throw InputError("parameters.members_log2: must lie in [0, 14]");
  const json battery = p.value("battery", json::object());
  Compactum k{battery.value("k_inner", 0.45), battery.value("k_outer", 0.9)};
  LightnessOptions lo;
  lo.epsilon = battery.value("epsilon", 0.1);
  lo.compactum = k;
  lo.negative_control = p.value("negative_control", false);
  lo.workers = p.value("workers", 1);
  lo.quad = s.quadrature;
  const auto continua = lightness_battery(n, k, lo.epsilon, battery.value("count", 16), s.seed);

  std::vector<std::pair<RadialMapFamily, std::string>> fams;
  for (std::size_t i = 0; i < p["families"].size(); ++i) {
    const json& f = p["families"][i];
    const QProfile prof = make_profile(f["profile"]);
    fams.emplace_back(RadialMapFamily(RadialProfile::build(prof, pp, n, MapIndex::limit, {}, s.quadrature)),
                      f.value("label", prof.description()));
  }
  const auto members = [&](int top) {
    std::vector<LightnessMember> out;
    for (const auto& [fam, label] : fams) {
      for (int e = 0; e <= top; ++e) out.push_back({fam, 1 << e, label});
    }
    return out;
  };
  say(o, "lightness_sweep: base sweep");
  const auto base = lightness_sweep(members(L), continua, lo);
  say(o, "lightness_sweep: doubled sweep");
  const auto doubled = lightness_sweep(members(2 * L + 1), continua, lo);
  const double change = std::abs(doubled.minimum - base.minimum) / base.minimum;

  Report rep(s);
  rep.line("sweep,label,m,min_h_image,argmin_continuum");
  for (const auto* sweep : {&base, &doubled}) {
    const char* name = sweep == &base ? "base" : "doubled";
    for (const auto& r : sweep->rows) {
      rep.line(std::string(name) + ",\"" + r.label + "\"," + std::to_string(r.m) + "," + num(r.min_image_diameter) +
               "," + std::to_string(r.argmin_continuum));
    }
  }
  rep.result("min_continuum_diameter", num(base.min_continuum_diameter));
  rep.result("minimum_base", num(base.minimum));
  rep.result("minimum_doubled", num(doubled.minimum));
  rep.result("relative_change", num(change));
  Outcome out;
  out.csv = rep.str();
  if (lo.negative_control) {
    if (p.contains("expect_below") && !(base.minimum < p["expect_below"].get<double>())) {
      out.contract_failure = "lightness_sweep: negative-control minimum " + num(base.minimum) + " is not below " +
                             num(p["expect_below"].get<double>());
    }
  } else if (!(base.minimum > 0.0) || !(change < 0.1)) {
    out.contract_failure = "lightness_sweep: minimum " + num(base.minimum) + " changed by " + num(change) +
                           " under doubling (contract: positive and < 0.1)";
  }
  return out;
}

Outcome run_discrete_check(const Scenario& s, const RunOptions& o) {
  const json& p = s.parameters;
  const int n = dimension_of(p);
  const double pp = p["p"].get<double>();
  const double r1 = p["r1"].get<double>();
  const double r2 = p["r2"].get<double>();
  const double tol = p.value("tolerance", 0.05);
  SolverConfig cfg;
  cfg.tolerance = p.value("solver_tolerance", cfg.tolerance);
  cfg.verbose = o.verbose;
  const double exact = ring_modulus_exact(n, pp, r1, r2).value;
  Report rep(s);
  rep.line("radial,angular,value,lower_bound,gap,exact,relative_error");
  Outcome out;
  std::vector<double> errors;
  for (const json& level : p["levels"]) {
    const int radial = level[0].get<int>();
    const int angular = level[1].get<int>();
    say(o, "discrete_oracle_check: level " + std::to_string(radial) + "x" + std::to_string(angular));
    const auto pb = annulus_problem(n, pp, r1, r2, radial, angular);
    const auto r = discrete_modulus(pb, cfg);
    const double err = std::abs(r.value - exact) / exact;
    errors.push_back(err);
    rep.line(std::to_string(radial) + "," + std::to_string(angular) + "," + num(r.value) + "," + num(r.lower_bound) +
             "," + num(r.gap) + "," + num(exact) + "," + num(err));
    if (o.verbose) out.extra.emplace_back("_trace_" + std::to_string(radial) + "x" + std::to_string(angular), r.trace_csv);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < errors.size(); ++i) monotone = monotone && errors[i] < errors[i - 1];
  rep.result("final_relative_error", num(errors.back()));
  rep.result("monotone_refinement", monotone ? "true" : "false");
  out.csv = rep.str();
  if (!(errors.back() <= tol)) {
    out.contract_failure = "discrete_oracle_check: relative error " + num(errors.back()) + " exceeds " + num(tol);
  } else if (!monotone) {
    out.contract_failure = "discrete_oracle_check: error does not decrease under refinement";
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

}  // namespace

const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : schemas()) out.push_back(k);
    return out;
  }();
  return kinds;
}

Scenario parse_scenario(const std::string& text, const std::string& fallback_output) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  check_fields(doc,
               {{"kind", Type::string, true},
                {"description", Type::string, false},
                {"seed", Type::integer, false},
                {"output", Type::string, false},
                {"svg", Type::boolean, false},
                {"quadrature", Type::object, false},
                {"parameters", Type::object, true}},
               "scenario");
  Scenario s;
  s.kind = doc["kind"];
  const auto schema = schemas().find(s.kind);
  if (schema == schemas().end()) {
    std::string known;
    for (const auto& k : scenario_kinds()) known += (known.empty() ? "" : ", ") + k;
    throw ParseError("scenario.kind: unknown kind '" + s.kind + "' (expected one of " + known + ")");
  }
  if (doc.contains("seed")) {
    if (doc["seed"].is_number_unsigned()) s.seed = doc["seed"].get<std::uint64_t>();
    else throw ParseError("scenario.seed: expected a non-negative integer");
  }
  s.output = doc.value("output", fallback_output);
  s.svg = doc.value("svg", false);
  if (doc.contains("quadrature")) {
    const json& q = doc["quadrature"];
    check_fields(q,
                 {{"sphere_order", Type::integer, false},
                  {"sphere_samples", Type::integer, false},
                  {"radial_points", Type::integer, false},
                  {"target_rel_tol", Type::number, false},
                  {"max_subdivisions", Type::integer, false},
                  {"workers", Type::integer, false}},
                 "scenario.quadrature");
    s.quadrature.sphere_order = q.value("sphere_order", s.quadrature.sphere_order);
    s.quadrature.sphere_samples = q.value("sphere_samples", s.quadrature.sphere_samples);
    s.quadrature.radial_points = q.value("radial_points", s.quadrature.radial_points);
    s.quadrature.target_rel_tol = q.value("target_rel_tol", s.quadrature.target_rel_tol);
    s.quadrature.max_subdivisions = q.value("max_subdivisions", s.quadrature.max_subdivisions);
    s.quadrature.workers = q.value("workers", s.quadrature.workers);
  }
  s.parameters = doc["parameters"];
  check_fields(s.parameters, schema->second, "parameters");
  check_kind_details(s.kind, s.parameters);
  return s;
}

RunResult run_scenario(const Scenario& input, const RunOptions& opts) {
  Scenario s = input;
  if (opts.seed) s.seed = *opts.seed;
  s.quadrature.rng_seed = s.seed;
  s.quadrature.validate();
  if (s.output.empty()) throw InputError("scenario.output: empty output prefix");

  using Runner = Outcome (*)(const Scenario&, const RunOptions&);
  static const std::map<std::string, Runner> runners = {
      {"ring_modulus", run_ring_modulus},       {"lemma74_identity", run_weighted_identity},
      {"divergence_probe", run_divergence},     {"fmo_probe", run_fmo},
      {"theorem3_counterexample", run_collapse}, {"lightness_sweep", run_lightness},
      {"discrete_oracle_check", run_discrete_check},
  };
  say(opts, "running " + s.kind + " (seed " + std::to_string(s.seed) + ")");
  const Outcome out = runners.at(s.kind)(s, opts);

  RunResult result;
  const std::filesystem::path prefix = opts.out_dir / s.output;
  const auto with_suffix = [&](const std::string& suffix) {
    return prefix.parent_path() / (prefix.filename().string() + suffix);
  };
  result.files.push_back(with_suffix(".csv"));
  write_file(result.files.back(), out.csv);
  if (!out.svg.empty()) {
    result.files.push_back(with_suffix(".svg"));
    write_file(result.files.back(), out.svg);
  }
  for (const auto& [suffix, text] : out.extra) {
    result.files.push_back(with_suffix(suffix + ".csv"));
    write_file(result.files.back(), text);
  }
  result.csv = out.csv;
  for (const auto& f : result.files) say(opts, "wrote " + f.string());
  if (!out.contract_failure.empty()) throw ContractError(out.contract_failure);
  return result;
}

int run_file(const std::filesystem::path& file, const RunOptions& opts, std::ostream& err) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    err << "error: cannot read scenario file " << file.string() << "\n";
    return kExitParse;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    const Scenario s = parse_scenario(buf.str(), file.stem().string());
    run_scenario(s, opts);
    return kExitOk;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const json::exception& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InputError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const RefusalError& e) {
    err << "validation error (refused): " << e.what() << "\n";
    return kExitValidation;
  } catch (const ContractError& e) {
    err << "contract failure: " << e.what() << "\n";
    return kExitContract;
  } catch (const NonConvergenceError& e) {
    err << "contract failure: " << e.what() << "\n";
    if (opts.verbose && !e.dump().empty()) err << e.dump() << "\n";
    return kExitContract;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ringmod::scenario
