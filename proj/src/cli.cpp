#include "alphaproj/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "alphaproj/divergence.hpp"
#include "alphaproj/families.hpp"
#include "alphaproj/forward_projection.hpp"
#include "alphaproj/reverse_projection.hpp"

namespace alphaproj::cli {
namespace {

using Json = nlohmann::ordered_json;
using Measure = ProbMeasure<double>;

// Malformed problem files; mapped to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Settings {
  std::string mode;
  std::string input;
  std::string scan_out;
  std::optional<double> alpha;
  std::optional<double> grid_step;
  SolverOptions solver;
};

Json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json vector_json(const Vector<double>& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

Json index_json(const std::vector<Index>& v) {
  Json out = Json::array();
  for (Index i : v) out.push_back(i);
  return out;
}

Json matrix_json(const Matrix<double>& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

Json divergence_json(const DivergenceValue<double>& d) { return d.finite ? Json(d.value) : Json("inf"); }

double read_number(const Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string() && j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  throw InputError(what + " must be a number");
}

Vector<double> read_vector(const Json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + " must be an array of numbers");
  Vector<double> v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = read_number(j[i], what);
  return v;
}

class Problem {
 public:
  Problem(Json doc, std::filesystem::path base) : doc_(std::move(doc)), base_(std::move(base)) {
    if (!doc_.is_object()) throw InputError("problem file must hold a JSON object");
    if (doc_.contains("alphabet")) {
      const Json& a = doc_["alphabet"];
      if (a.is_number_integer()) {
        alphabet_ = a.get<Index>();
      } else if (a.is_array()) {
        alphabet_ = static_cast<Index>(a.size());
      } else {
        throw InputError("alphabet must be a size or a list of labels");
      }
      if (alphabet_ < 2) throw InputError("alphabet needs at least two symbols");
    }
  }

  bool has(const std::string& key) const { return doc_.contains(key); }
  const Json& at(const std::string& key) const {
    if (!doc_.contains(key)) throw InputError("missing field '" + key + "'");
    return doc_.at(key);
  }
  std::string string_or(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!doc_[key].is_string()) throw InputError("'" + key + "' must be a string");
    return doc_[key].get<std::string>();
  }

  Index alphabet_size() const {
    if (alphabet_ < 0) throw InputError("missing field 'alphabet'");
    return alphabet_;
  }

  // Arrays are taken as they are; strings name a result document whose Q is
  // used; objects are embedded result documents.
  Measure measure(const std::string& key) const { return measure_from(at(key), key); }

  Matrix<double> constraints() const {
    const Index n = alphabet_size();
    if (!has("constraints")) return Matrix<double>(0, n);
    const Json& c = at("constraints");
    if (!c.is_array()) throw InputError("constraints must be a list");
    Matrix<double> f(static_cast<Index>(c.size()), n);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!c[i].is_object() || !c[i].contains("f")) throw InputError("each constraint needs an 'f' vector");
      const Vector<double> row = read_vector(c[i]["f"], "constraint f");
      if (row.size() != n) throw InputError("constraint f does not match the alphabet size");
      const double rhs = c[i].contains("rhs") ? read_number(c[i]["rhs"], "constraint rhs") : 0.0;
      // sum P f = rhs is sum P (f - rhs) = 0.
      f.row(static_cast<Index>(i)) = (row.array() - rhs).matrix().transpose();
    }
    return f;
  }

  std::filesystem::path resolve(const std::string& path) const {
    const std::filesystem::path p(path);
    return p.is_absolute() ? p : base_ / p;
  }

 private:
  Measure measure_from(const Json& j, const std::string& what) const {
    Vector<double> w;
    if (j.is_array()) {
      w = read_vector(j, what);
    } else if (j.is_object()) {
      if (!j.contains("Q")) throw InputError(what + ": embedded document has no Q");
      w = read_vector(j["Q"], what);
    } else if (j.is_string()) {
      const auto path = resolve(j.get<std::string>());
      std::ifstream in(path);
      if (!in) throw InputError(what + ": cannot open " + path.string());
      Json doc;
      try {
        doc = Json::parse(in);
      } catch (const Json::exception& e) {
        throw InputError(what + ": " + e.what());
      }
      if (!doc.is_object() || !doc.contains("Q")) throw InputError(what + ": result document has no Q");
      w = read_vector(doc["Q"], what);
    } else {
      throw InputError(what + " must be a weight vector, a result document or its path");
    }
    if (alphabet_ >= 0 && w.size() != alphabet_) throw InputError(what + " does not match the alphabet size");
    return Measure(w);
  }

  Json doc_;
  std::filesystem::path base_;
  Index alphabet_ = -1;
};

double resolve_alpha(const Settings& s, const Problem& p) {
  if (s.alpha) return *s.alpha;
  return read_number(p.at("alpha"), "alpha");
}

Json projection_json(const ProjectionResult<double>& res) {
  Json out;
  out["status"] = std::string(to_string(res.status));
  out["Q"] = vector_json(res.q.weights());
  out["theta_star"] = vector_json(res.theta_star);
  out["Z"] = number(res.z);
  out["active_support"] = index_json(res.active_support);
  out["family_support"] = index_json(res.family_support);
  out["kkt_residual"] = number(res.kkt_residual);
  out["pythagorean_gap_bound"] = number(res.pythagorean_gap_bound);
  out["divergence_to_reference"] = number(res.divergence);
  out["iterations"] = res.iterations;
  out["used_fallback"] = res.used_fallback;
  out["multistart"] = {{"runs", res.multistart_runs}, {"spread", number(res.multistart_spread)}};
  return out;
}

Json header(const Settings& s, double alpha) {
  Json out;
  out["mode"] = s.mode;
  out["alpha"] = alpha;
  out["objective"] = alpha == 1.0 ? "kl" : "relative_alpha_entropy";
  out["seed"] = s.solver.rng_seed;
  out["kkt_tol"] = s.solver.kkt_tol;
  return out;
}

void fail_if_unconverged(const ProjectionResult<double>& res) {
  if (res.status == SolverStatus::MaxIterations)
    throw Error(ErrorCode::NotConverged, "solver stopped at the iteration limit");
}

Json run_forward(const Settings& s, const Problem& p) {
  const double alpha = resolve_alpha(s, p);
  const Measure r = p.measure("R");
  const LinearFamily<double> family(p.constraints());
  const auto res = forward_project(family, r, Alpha(alpha), s.solver);
  fail_if_unconverged(res);
  Json out = header(s, alpha);
  const Json body = projection_json(res);
  for (const auto& [key, value] : body.items()) out[key] = value;
  out["kl_limit"] = res.kl_limit;
  if (p.has("P")) {
    const Measure pm = p.measure("P");
    const auto sides = pythagorean_check(family, pm, res, r, Alpha(alpha));
    out["pythagorean"] = {{"P", vector_json(pm.weights())},
                          {"lhs", number(sides.lhs)},
                          {"rhs", number(sides.rhs)},
                          {"gap", number(sides.lhs - sides.rhs)}};
  }
  return out;
}

Json reverse_json(const ReverseOutcome<double>& o) {
  Json out;
  out["case"] = std::string(to_string(o.kind));
  out["Q"] = vector_json(o.q.weights());
  out["theta"] = vector_json(o.theta);
  out["theta_kind"] = o.kind == ReverseCase::RequiresExtension ? "tilted_parameter"
                      : o.theta_is_limit                     ? "sequence_limit"
                                                             : "parameter";
  out["divergence"] = divergence_json(o.divergence);
  out["L_tilde"] = {{"constraints", matrix_json(o.l_tilde.original_constraints())}};
  Json w;
  w["kind"] = std::string(to_string(o.witness.kind));
  if (o.witness.kind != WitnessKind::None) {
    if (o.witness.anchor.size() > 0) w["anchor"] = vector_json(o.witness.anchor);
    Json n = Json::array();
    Json d = Json::array();
    for (std::size_t i = 0; i < o.witness.n_values.size(); ++i) {
      n.push_back(o.witness.n_values[i]);
      d.push_back(number(o.witness.distances[i]));
    }
    w["n"] = n;
    w["total_variation"] = d;
    w["log_log_slope"] = number(o.witness.log_log_slope);
    w["converges"] = o.witness.converges;
  }
  out["closure_witness"] = w;
  out["extended_member"] = o.extended_member;
  out["forward"] = projection_json(o.projection);
  return out;
}

Json run_reverse(const Settings& s, const Problem& p) {
  const double alpha = resolve_alpha(s, p);
  const PowerLawFamily<double> family{Alpha(alpha), p.measure("R"), p.constraints()};
  const Measure p_hat = p.measure("P_hat");
  const auto outcome = reverse_project(family, p_hat, s.solver);
  Json out = header(s, alpha);
  out["P_hat"] = vector_json(p_hat.weights());
  const Json body = reverse_json(outcome);
  for (const auto& [key, value] : body.items()) out[key] = value;
  return out;
}

SampleSet load_samples(const Problem& p) {
  const Json& j = p.at("samples");
  const Index n = p.alphabet_size();
  if (j.is_string()) {
    const auto path = p.resolve(j.get<std::string>());
    std::ifstream in(path);
    if (!in) throw InputError("cannot open sample file " + path.string());
    return SampleSet::from_csv(in, n);
  }
  if (!j.is_array()) throw InputError("samples must be a CSV path or a list of symbol indices");
  std::vector<Index> obs;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw InputError("samples must be integer symbol indices");
    obs.push_back(x.get<Index>());
  }
  return SampleSet(std::move(obs), n);
}

Json run_mmple(const Settings& s, const Problem& p) {
  const double c = read_number(p.at("c"), "c");
  const double alpha = s.alpha ? *s.alpha : (p.has("alpha") ? read_number(p.at("alpha"), "alpha") : 1.0 + c);
  const PowerLawFamily<double> family{Alpha(alpha), p.measure("R"), p.constraints()};
  const SampleSet samples = load_samples(p);
  const auto fit = mmple_fit(family, samples, c, s.solver);
  Json out = header(s, alpha);
  out["c"] = c;
  out["sample_size"] = samples.size();
  out["P_hat"] = vector_json(fit.empirical.weights());
  out["mean_power_likelihood"] = number(fit.mean_power_likelihood);
  const Json body = reverse_json(fit.outcome);
  for (const auto& [key, value] : body.items()) out[key] = value;
  return out;
}

Json run_scan(const Settings& s, const Problem& p) {
  const double alpha = resolve_alpha(s, p);
  const Json& grid = p.at("grid");
  if (!grid.is_object()) throw InputError("grid must be an object with lo, hi, step");
  const double lo = read_number(grid.at("lo"), "grid.lo");
  const double hi = read_number(grid.at("hi"), "grid.hi");
  const double step = s.grid_step ? *s.grid_step : read_number(grid.at("step"), "grid.step");
  if (!(hi > lo) || !(step > 0.0)) throw InputError("grid needs lo < hi and step > 0");

  ScalarMember member;
  std::optional<PowerLawFamily<double>> family;
  Json family_doc;
  const Json fam = p.has("family") ? p.at("family") : Json{{"type", "power_law"}};
  const std::string type = fam.value("type", "power_law");
  if (type == "binomial") {
    const Index trials = fam.value("trials", Index(-1));
    if (trials < 1) throw InputError("binomial family needs trials >= 1");
    if (p.alphabet_size() != trials + 1) throw InputError("binomial family needs alphabet size trials + 1");
    member = binomial_family(trials);
    family_doc = {{"type", "binomial"}, {"trials", trials}};
  } else if (type == "power_law") {
    family.emplace(Alpha(alpha), p.measure("R"), p.constraints());
    if (family->dimension() != 1) throw InputError("scans need exactly one constraint");
    member = [&family](double t) { return family->member(Vector<double>::Constant(1, t)); };
    family_doc = {{"type", "power_law"}};
  } else {
    throw InputError("unknown family type '" + type + "'");
  }
  const Measure target = p.has("P_hat") ? p.measure("P_hat") : p.measure("R");
  const ScanResult scan = parametric_reverse_scan(member, target, Alpha(alpha), lo, hi, step);

  Json out = header(s, alpha);
  out["family"] = family_doc;
  out["P_hat"] = vector_json(target.weights());
  out["grid"] = {{"lo", lo}, {"hi", hi}, {"step", step}, {"points", scan.series.size()}};
  auto points = [](const std::vector<ScanPoint>& v) {
    Json arr = Json::array();
    for (const auto& pt : v) arr.push_back({{"theta", pt.theta}, {"value", number(pt.value)}});
    return arr;
  };
  out["local_minima"] = points(scan.local_minima);
  out["global_minima"] = points(scan.global_minima);
  if (!s.scan_out.empty()) {
    std::ofstream file(s.scan_out);
    if (!file) throw InputError("cannot write " + s.scan_out);
    file << std::setprecision(17);
    file << "# theta divergence\n";
    for (const auto& pt : scan.series) file << pt.theta << ' ' << pt.value << '\n';
    out["series_file"] = s.scan_out;
  } else {
    Json series = Json::array();
    for (const auto& pt : scan.series) series.push_back({pt.theta, number(pt.value)});
    out["series"] = series;
  }
  return out;
}

Json run_divergence(const Settings& s, const Problem& p) {
  const double alpha = resolve_alpha(s, p);
  const Measure pm = p.measure("P");
  const Measure qm = p.measure("Q");
  if (pm.size() != qm.size()) throw InputError("P and Q have different sizes");
  Json out = header(s, alpha);
  out["P"] = vector_json(pm.weights());
  out["Q"] = vector_json(qm.weights());
  out["divergence"] = divergence_json(relative_alpha_entropy(pm, qm, Alpha(alpha)));
  out["renyi_entropy_P"] = number(renyi_entropy(pm, Alpha(alpha)));
  return out;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Infeasible: return kInfeasible;
    case ErrorCode::NotConverged: return kNotConverged;
    default: return kMalformed;
  }
}

int emit_error(std::ostream& out, const std::string& code, const std::string& message, int exit_code) {
  Json doc;
  doc["error"] = {{"code", code}, {"message", message}, {"exit_code", exit_code}};
  out << doc.dump(2) << '\n';
  return exit_code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Relative alpha-entropy projections on finite alphabets"};
  app.add_option("mode,--mode", s.mode, "divergence, forward, reverse, mmple or scan")
      ->check(CLI::IsMember({"divergence", "forward", "reverse", "mmple", "scan"}));
  app.add_option("--input", s.input, "problem file (JSON)")->required();
  app.add_option("--scan-out", s.scan_out, "write the scan series as two-column text");
  app.add_option("--kkt-tol", s.solver.kkt_tol, "KKT residual tolerance")->capture_default_str();
  app.add_option("--seed", s.solver.rng_seed, "seed for multistart")->capture_default_str();
  app.add_option("--multistart", s.solver.multistart_count, "extra random starts")->capture_default_str();
  app.add_option("--grid-step", s.grid_step, "override the scan grid step");
  app.add_option("--alpha", s.alpha, "override the problem's alpha");
  app.add_option("--max-newton-iters", s.solver.max_newton_iters)->capture_default_str();
  app.add_option("--max-fallback-iters", s.solver.max_fallback_iters)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    return emit_error(out, "UsageError", e.what(), kMalformed);
  }

  try {
    if (s.alpha && !(*s.alpha > 0.0)) throw InputError("alpha must be positive");
    if (s.grid_step && !(*s.grid_step > 0.0)) throw InputError("grid step must be positive");
    std::ifstream in(s.input);
    if (!in) throw InputError("cannot open " + s.input);
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const Json::exception& e) {
      throw InputError(e.what());
    }
    const Problem problem(std::move(doc), std::filesystem::path(s.input).parent_path());
    if (s.mode.empty()) s.mode = problem.string_or("mode", "");
    Json result;
    if (s.mode == "forward") {
      result = run_forward(s, problem);
    } else if (s.mode == "reverse") {
      result = run_reverse(s, problem);
    } else if (s.mode == "mmple") {
      result = run_mmple(s, problem);
    } else if (s.mode == "scan") {
      result = run_scan(s, problem);
    } else if (s.mode == "divergence") {
      result = run_divergence(s, problem);
    } else {
      throw InputError("unknown or missing mode '" + s.mode + "'");
    }
    out << result.dump(2) << '\n';
    return kOk;
  } catch (const InputError& e) {
    return emit_error(out, "MalformedInput", e.what(), kMalformed);
  } catch (const Json::exception& e) {
    return emit_error(out, "MalformedInput", e.what(), kMalformed);
  } catch (const Error& e) {
    return emit_error(out, std::string(to_string(e.code())), e.what(), exit_code_for(e.code()));
  } catch (const std::exception& e) {
    return emit_error(out, "Internal", e.what(), kInternal);
  }
}

}  // namespace alphaproj::cli
