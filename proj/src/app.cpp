#include "cocycle/app.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cocycle/deviations.hpp"
#include "cocycle/lyapunov.hpp"
#include "cocycle/parallel.hpp"
#include "cocycle/projmarkov.hpp"
#include "cocycle/transport.hpp"

namespace cocycle {

namespace {

const char* kRequired = "<required>";

const std::map<std::string, json>& defaults() {
  static const std::map<std::string, json> d = [] {
    const json lambdas = {10, 31.6, 100, 316, 1000};
    std::map<std::string, json> m;
    m["moments"] = {{"mu", kRequired}, {"p", 0.5}, {"n_angle", 4096}, {"starts", 64},
                    {"max_nodes", 512}, {"samples", 100000}};
    m["wasserstein"] = {{"mu", kRequired}, {"nu", kRequired}, {"p", 0.5},
                        {"norm", "spectral"}, {"max_nodes", 512}};
    m["lyapunov"] = {{"mu", kRequired}, {"n", 10000}, {"trials", 400}, {"r", 0}, {"warmup", 0}};
    m["stationary"] = {{"mu", kRequired}, {"method", "grid"}, {"n_grid", 4096},
                       {"tol", 1e-10},    {"max_iter", 200000}, {"burn_in", 1000},
                       {"samples", 100000}, {"max_nodes", 512}};
    m["mixing"] = {{"mu", kRequired}, {"alpha", 0.1},     {"n_grid", 4096},  {"n_max", 60},
                   {"tol", 1e-10},    {"max_iter", 200000}, {"max_nodes", 512}};
    m["holder-scan"] = {{"mu", kRequired}, {"family", json::array()}, {"shift", nullptr},
                        {"p", 0.5},        {"n", 2000},               {"trials", 200},
                        {"warmup", 100},   {"min_rows", 4},           {"max_nodes", 512}};
    m["ldp"] = {{"mu", kRequired},
                {"v0", nullptr},
                {"l1_ref", nullptr},
                {"n_list", {10, 20, 50, 100, 200, 400}},
                {"eps_list", {0.05, 0.1, 0.2}},
                {"trials", 100000},
                {"ref_n", 10000},
                {"ref_trials", 400}};
    m["example1"] = {{"dist", kRequired}, {"E", {0.0}}, {"n", 10000},
                     {"trials", 200},     {"p", 0.5},   {"max_nodes", 512}};
    m["example2"] = {{"a", kRequired},   {"E", kRequired},      {"q", kRequired},
                     {"dist", kRequired}, {"lambdas", lambdas}, {"n", 10000},
                     {"trials", 200},    {"warmup", 200},       {"N", 0},
                     {"M", 0},           {"mc_per_term", 2000}, {"identity_check", true},
                     {"p", 0.5}};
    m["example3"] = {{"m", kRequired},      {"E", kRequired},       {"dist", kRequired},
                     {"lambdas", lambdas},  {"n", 5000},            {"trials", 100},
                     {"warmup", 100},       {"exterior_check", true}, {"moment_p", 0.25}};
    m["frostman"] = {{"dist", kRequired}, {"p", 0.5}, {"a_grid", json::array()},
                     {"refine_tol", 1e-5}};
    return m;
  }();
  return d;
}

double num(const json& e, const char* key) {
  const auto& v = e.at(key);
  if (!v.is_number()) throw ConfigError(std::string(key) + " must be a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(std::string(key) + " must be finite");
  return x;
}

long integer(const json& e, const char* key) {
  const auto& v = e.at(key);
  if (v.is_number_integer()) return v.get<long>();
  if (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()))
    return static_cast<long>(v.get<double>());
  throw ConfigError(std::string(key) + " must be an integer");
}

std::vector<double> dlist(const json& e, const char* key) {
  const auto& v = e.at(key);
  if (!v.is_array()) throw ConfigError(std::string(key) + " must be a list");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(std::string(key) + " entries must be numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<long> llist(const json& e, const char* key) {
  std::vector<long> out;
  for (double x : dlist(e, key)) {
    if (x != std::floor(x) || x < 1) throw ConfigError(std::string(key) + " entries must be positive integers");
    out.push_back(static_cast<long>(x));
  }
  return out;
}

std::uint64_t seed_of(const json& e) {
  const auto& v = e.at("seed");
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
    throw ConfigError("seed must be a non-negative integer");
  return v.get<std::uint64_t>();
}

LyapunovOptions lyap_options(const json& e) {
  LyapunovOptions o;
  o.n = integer(e, "n");
  o.trials = static_cast<int>(integer(e, "trials"));
  o.seed = seed_of(e);
  if (e.contains("warmup")) o.warmup = integer(e, "warmup");
  if (e.contains("r")) o.r = static_cast<int>(integer(e, "r"));
  if (o.n < 1 || o.trials < 1) throw ConfigError("n and trials must be positive");
  if (o.warmup < 0) throw ConfigError("warmup must be >= 0");
  return o;
}

void check_p(double p, const char* what = "p") {
  if (!(p > 0 && p <= 1)) throw ConfigError(std::string(what) + " must lie in (0, 1]");
}

struct Context {
  std::string exp;
  json e;
  std::uint64_t hash = 0;
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  RunResult* res = nullptr;

  CsvWriter csv(const std::string& name, std::vector<std::string> header) const {
    return CsvWriter((dir / name).string(), std::move(header));
  }
  void finish(const CsvWriter& w) const {
    w.finish(hash, seed);
    res->files.push_back(w.path());
  }
  void write_json(const std::string& name, const json& j) const {
    auto path = (dir / name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    f << j.dump(2) << '\n';
    res->files.push_back(path);
  }
};

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

std::string fmt(double x) { return format_number(x); }

// ---------------------------------------------------------------- experiments

void run_moments(Context& c) {
  const json& e = c.e;
  double p = num(e, "p");
  check_p(p);
  auto mm = parse_measure(e["mu"]);
  auto mu = mm.discrete(static_cast<int>(integer(e, "max_nodes")));
  SphereSearch s;
  s.n_angle = static_cast<int>(integer(e, "n_angle"));
  s.starts = static_cast<int>(integer(e, "starts"));
  s.seed = c.seed;
  json out;
  out["p"] = p;
  out["realization"] = mm.realization;
  out["atoms"] = mu.size();
  double tb = theta_bar(mu, p);
  out["theta_bar"] = tb;
  double tu;
  try {
    auto r = theta_under(mu, p, s);
    tu = r.value;
    out["theta_under_argmax"] = vec_json(r.argmax.rep());
    out["mesh"] = r.mesh;
  } catch (const InfiniteMoment& ex) {
    tu = std::numeric_limits<double>::infinity();
    out["theta_under_note"] = ex.what();
  }
  out["theta_under"] = std::isinf(tu) ? json("inf") : json(tu);
  double C = std::max(tb, tu);
  out["C"] = std::isinf(C) ? json("inf") : json(C);
  if (mm.realization != "atoms") {
    auto est = theta_bar(mm.sampler(c.seed), p, static_cast<std::size_t>(integer(e, "samples")));
    out["theta_bar_mc"] = est.value;
    out["theta_bar_mc_se"] = est.se;
  }
  c.write_json("moments.json", out);
  c.res->details = out;
  c.res->summary = "theta_bar=" + fmt(tb) + " theta_under=" + fmt(tu);
}

void run_wasserstein(Context& c) {
  const json& e = c.e;
  double p = num(e, "p");
  check_p(p);
  int nodes = static_cast<int>(integer(e, "max_nodes"));
  auto mu = parse_measure(e["mu"]).discrete(nodes);
  auto nu = parse_measure(e["nu"]).discrete(nodes);
  const std::string norm = e["norm"].get<std::string>();
  if (norm != "spectral" && norm != "frobenius") throw ConfigError("norm is spectral or frobenius");
  auto r = wasserstein_p(mu, nu, p, norm == "spectral" ? CostNorm::Spectral : CostNorm::Frobenius);
  auto w = c.csv("coupling.csv", {"i", "j", "mass"});
  for (Eigen::Index i = 0; i < r.coupling.plan.rows(); ++i)
    for (Eigen::Index j = 0; j < r.coupling.plan.cols(); ++j)
      if (r.coupling.plan(i, j) > 0)
        w.row({static_cast<double>(i), static_cast<double>(j), r.coupling.plan(i, j)});
  c.finish(w);
  json out = {{"value", r.value}, {"p", p}, {"pivots", r.pivots}, {"norm", norm}};
  c.write_json("wasserstein.json", out);
  c.res->details = out;
  c.res->summary = "W_p=" + fmt(r.value);
}

void run_lyapunov(Context& c) {
  auto mm = parse_measure(c.e["mu"]);
  auto opt = lyap_options(c.e);
  auto rep = lyapunov_spectrum(mm.sampler(c.seed), opt);
  auto w = c.csv("lyapunov.csv", {"exponent_index", "value", "stderr", "minus_inf_fraction"});
  std::ostringstream s;
  for (Eigen::Index i = 0; i < rep.exponents.size(); ++i) {
    w.row({static_cast<double>(i + 1), rep.exponents(i), rep.se(i), rep.minus_inf_fraction(i)});
    s << (i ? " " : "") << "L" << i + 1 << "=" << fmt(rep.exponents(i));
  }
  c.finish(w);
  c.res->details = {{"n", rep.n}, {"trials", rep.trials}, {"exponents", vec_json(rep.exponents)}};
  c.res->summary = s.str();
}

void run_stationary(Context& c) {
  const json& e = c.e;
  auto mm = parse_measure(e["mu"]);
  const std::string method = e["method"].get<std::string>();
  EmpiricalProjMeasure eta;
  FurstenbergResult fr;
  if (method == "grid") {
    if (mm.dim != 2) throw ConfigError("grid stationary measures need m = 2");
    auto mu = mm.discrete(static_cast<int>(integer(e, "max_nodes")));
    GridStationaryOptions go;
    go.n_grid = static_cast<int>(integer(e, "n_grid"));
    go.tol = num(e, "tol");
    go.max_iter = integer(e, "max_iter");
    eta = stationary_measure_grid(mu, go);
    fr = furstenberg_le(mu, eta);
  } else if (method == "chain") {
    auto src = mm.sampler(c.seed);
    Vec v0 = Vec::Zero(mm.dim);
    v0(0) = 1;
    eta = stationary_measure_chain(src, integer(e, "burn_in"), integer(e, "samples"), c.seed,
                                   ProjPoint(v0));
    EmpiricalProjMeasure sub;
    const std::size_t stride = std::max<std::size_t>(1, eta.points.size() / 2000);
    for (std::size_t i = 0; i < eta.points.size(); i += stride) sub.points.push_back(eta.points[i]);
    sub.weights.assign(sub.points.size(), 1.0 / sub.points.size());
    fr = furstenberg_le(src, sub, 20000);
  } else {
    throw ConfigError("method is grid or chain");
  }
  std::vector<std::string> header{"index", "weight"};
  for (int i = 0; i < mm.dim; ++i) header.push_back("x" + std::to_string(i));
  auto w = c.csv("stationary.csv", header);
  for (std::size_t k = 0; k < eta.points.size(); ++k) {
    std::vector<double> row{static_cast<double>(k), eta.weights[k]};
    for (int i = 0; i < mm.dim; ++i) row.push_back(eta.points[k].rep()(i));
    w.row(row);
  }
  c.finish(w);
  json out = {{"provenance", eta.provenance},       {"converged", eta.converged},
              {"residual", eta.residual},           {"iterations", eta.iterations},
              {"kernel_hit_count", eta.kernel_hit_count}, {"furstenberg_l1", fr.value},
              {"furstenberg_se", fr.se},             {"lower_bound", fr.lower_bound}};
  c.write_json("stationary.json", out);
  c.res->details = out;
  c.res->summary = "furstenberg_l1=" + fmt(fr.value);
  if (!eta.converged)
    throw NoConvergence("grid iteration stopped at residual " + fmt(eta.residual));
}

std::vector<GridObservable> default_observables(int n) {
  return {GridObservable::sample(n, [](double t) { return std::cos(2 * t); }),
          GridObservable::sample(n, [](double t) { return std::sin(2 * t); }),
          GridObservable::sample(n, [](double t) { return std::exp(std::cos(2 * t)); })};
}

void run_mixing(Context& c) {
  const json& e = c.e;
  auto mm = parse_measure(e["mu"]);
  if (mm.dim != 2) throw ConfigError("mixing needs m = 2");
  double alpha = num(e, "alpha");
  if (!(alpha > 0 && alpha <= 1)) throw ConfigError("alpha must lie in (0, 1]");
  auto mu = mm.discrete(static_cast<int>(integer(e, "max_nodes")));
  const int N = static_cast<int>(integer(e, "n_grid"));
  GridOperator op(mu, N);
  bool conv = false;
  double resid = 0;
  long iters = 0;
  Vec eta = stationary_grid_masses(op, num(e, "tol"), integer(e, "max_iter"), &conv, &resid, &iters);
  auto phis = default_observables(N);
  auto r = mixing_rate(mu, phis, static_cast<int>(integer(e, "n_max")), eta);
  auto w = c.csv("mixing.csv", {"n", "phi_id", "sup_residual"});
  for (const auto& row : r.table)
    w.row({static_cast<double>(row.n), static_cast<double>(row.phi_id), row.sup_residual});
  c.finish(w);
  json holder = json::array();
  for (const auto& phi : phis) holder.push_back(phi.holder_norm(alpha));
  json out = {{"sigma", r.sigma},       {"K", r.K},
              {"r2", r.r2},             {"no_decay", r.no_decay},
              {"rows_used", r.rows_used}, {"stationary_converged", conv},
              {"stationary_residual", resid}, {"holder_norms", holder}};
  c.write_json("mixing.json", out);
  c.res->details = out;
  c.res->summary = r.no_decay ? "NoDecay sigma=" + fmt(r.sigma) : "sigma=" + fmt(r.sigma);
}

void run_holder(Context& c) {
  const json& e = c.e;
  double p = num(e, "p");
  check_p(p);
  int nodes = static_cast<int>(integer(e, "max_nodes"));
  auto mu = parse_measure(e["mu"]).discrete(nodes);
  std::vector<DiscreteMatrixMeasure> family;
  for (const auto& spec : e["family"]) family.push_back(parse_measure(spec).discrete(nodes));
  if (!e["shift"].is_null()) {
    const json& s = e["shift"];
    require_keys(s, {"atom", "direction", "eps"}, "shift");
    long idx = integer(s, "atom");
    if (idx < 0 || idx >= static_cast<long>(mu.size())) throw ConfigError("shift atom out of range");
    Mat D = parse_matrix(s.at("direction"), "shift direction");
    if (D.rows() != mu.dim()) throw DimensionMismatch("shift direction has another size");
    double nd = operator_norm(D);
    if (!(nd > 0)) throw ConfigError("shift direction must be nonzero");
    D /= nd;
    for (double eps : dlist(s, "eps")) {
      auto atoms = mu.atoms();
      atoms[idx] += eps * D;
      family.emplace_back(atoms, mu.weights());
    }
  }
  if (family.empty()) throw ConfigError("holder-scan needs a family or a shift");
  auto rows = holder_rows(mu, family, p, lyap_options(e));
  auto w = c.csv("holder.csv", {"w_p", "delta_l1", "stderr"});
  for (const auto& r : rows) w.row({r.w_p, r.delta_l1, r.se});
  c.finish(w);
  auto scan = fit_holder(rows, static_cast<int>(integer(e, "min_rows")));
  json fit = {{"slope", scan.slope}, {"intercept", scan.intercept}, {"rows_used", scan.rows_used},
              {"r2", scan.r2}};
  c.write_json("holder_fit.json", fit);
  c.res->details = fit;
  c.res->summary = fit.dump();
}

void run_ldp(Context& c) {
  const json& e = c.e;
  auto mm = parse_measure(e["mu"]);
  auto src = mm.sampler(c.seed);
  Vec v0 = Vec::Zero(mm.dim);
  v0(0) = 1;
  if (!e["v0"].is_null()) {
    auto v = dlist(e, "v0");
    if (static_cast<int>(v.size()) != mm.dim) throw DimensionMismatch("v0 has another size");
    v0 = Eigen::Map<Vec>(v.data(), mm.dim);
  }
  double l1;
  if (e["l1_ref"].is_null()) {
    LyapunovOptions o;
    o.n = integer(e, "ref_n");
    o.trials = static_cast<int>(integer(e, "ref_trials"));
    o.seed = c.seed ^ 0x1d1d1d1dULL;
    o.r = 1;
    l1 = lyapunov_spectrum(src, o).exponents(0);
  } else {
    l1 = num(e, "l1_ref");
  }
  auto table = ld_tail(src, ProjPoint(v0), l1, llist(e, "n_list"), dlist(e, "eps_list"),
                       integer(e, "trials"), c.seed);
  auto w = c.csv("ldp.csv", {"n", "epsilon", "p_hat", "ci_lo", "ci_hi"});
  for (const auto& r : table.rows)
    w.row({static_cast<double>(r.n), r.epsilon, r.p_hat, r.ci_lo, r.ci_hi});
  c.finish(w);
  auto rep = fit_rate(table);
  auto rw = c.csv("rates.csv", {"epsilon", "c_hat", "C_hat", "r2"});
  json fits = json::array();
  for (const auto& f : rep.fits) {
    if (f.fitted) rw.row({f.epsilon, f.c_hat, f.C_hat, f.r2});
    fits.push_back({{"epsilon", f.epsilon}, {"fitted", f.fitted}, {"c_hat", f.c_hat},
                    {"rows_used", f.rows_used}, {"shape_ratio", f.shape_ratio}});
  }
  c.finish(rw);
  json out = {{"l1_ref", l1}, {"fits", fits}, {"increasing_in_eps", rep.increasing_in_eps}};
  c.write_json("rates.json", out);
  c.res->details = out;
  c.res->summary = "l1_ref=" + fmt(l1) + " increasing_in_eps=" + (rep.increasing_in_eps ? "true" : "false");
}

std::vector<double> scalar_or_list(const json& e, const char* key) {
  if (e.at(key).is_number()) return {num(e, key)};
  return dlist(e, key);
}

void run_example1(Context& c) {
  const json& e = c.e;
  auto dist = parse_dist(e["dist"]);
  double p = num(e, "p");
  check_p(p);
  auto opt = lyap_options(e);
  opt.r = 1;
  auto w = c.csv("example1.csv",
                 {"E", "L1", "stderr", "theta_bar", "theta_under", "invariant_lines"});
  std::ostringstream s;
  for (double E : scalar_or_list(e, "E")) {
    auto mu = schrodinger_measure(dist, E, static_cast<int>(integer(e, "max_nodes")));
    auto rep = lyapunov_spectrum(schrodinger_sampler(dist, E, c.seed), opt);
    double tb = theta_bar(mu, p), tu = theta_under(mu, p).value;
    auto scan = invariant_subspace_scan(mu);
    w.row({E, rep.exponents(0), rep.se(0), tb, tu, static_cast<double>(scan.subspaces.size())});
    s << "E=" << fmt(E) << " L1=" << fmt(rep.exponents(0)) << "; ";
  }
  c.finish(w);
  c.res->details = {{"realization", dist.realization()}};
  c.res->summary = s.str();
}

MixedModelParams mixed_params(const json& e) {
  json spec = {{"a", e["a"]}, {"E", e["E"]}, {"q", e["q"]}, {"dist", e["dist"]}};
  return parse_mixed(spec);
}

void run_example2(Context& c) {
  const json& e = c.e;
  auto prm = mixed_params(e);
  Example2Options o;
  o.lambdas = dlist(e, "lambdas");
  o.lyap = lyap_options(e);
  o.N = static_cast<int>(integer(e, "N"));
  o.M = static_cast<int>(integer(e, "M"));
  o.mc_per_term = static_cast<int>(integer(e, "mc_per_term"));
  o.seed = c.seed;
  o.identity_check = e["identity_check"].get<bool>();
  auto r = example2_asymptotics(prm, o);
  auto w = c.csv("example2.csv",
                 {"lambda", "L1_mc", "stderr", "q_log_lambda", "L1_formula", "residual"});
  json plain = json::array();
  for (const auto& row : r.rows) {
    w.row({row.lambda, row.l1_mc, row.se, row.q_log_lambda, row.l1_formula, row.residual});
    plain.push_back({{"lambda", row.lambda}, {"L1_plain", row.l1_plain}, {"stderr", row.plain_se}});
  }
  c.finish(w);
  json out = {{"slope", r.slope},
              {"intercept", r.intercept},
              {"r2", r.r2},
              {"rows_used", r.rows_used},
              {"series_value", r.series_value},
              {"L1_formula", r.l1_formula},
              {"return_time_factor", prm.q * (1 - prm.q)},
              {"L1_mc_beta0", r.l1_mc_beta0},
              {"L1_mc_beta0_stderr", r.l1_mc_beta0_se},
              {"plain", plain},
              {"identity_ratio", r.identity_ratio},
              {"identity_ratio_stderr", r.identity_ratio_se},
              {"warnings", r.warnings}};
  c.write_json("example2.json", out);
  c.res->details = out;
  c.res->summary = "slope=" + fmt(r.slope) + " rows_used=" + std::to_string(r.rows_used);
}

void run_example3(Context& c) {
  const json& e = c.e;
  long m = integer(e, "m");
  if (m < 1) throw ConfigError("m must be positive");
  auto dist = parse_sym_dist(e["dist"], static_cast<int>(m));
  Example3Options o;
  o.lambdas = dlist(e, "lambdas");
  o.lyap = lyap_options(e);
  o.exterior_check = e["exterior_check"].get<bool>();
  o.moment_p = num(e, "moment_p");
  auto r = example3_asymptotics(dist, num(e, "E"), o);
  auto w = c.csv("example3.csv", {"lambda", "L1_mc", "stderr", "m_log_lambda",
                                  "log_det_integral", "residual"});
  json rows = json::array();
  for (const auto& row : r.rows) {
    w.row({row.lambda, row.l1_mc, row.se, row.m_log_lambda, row.log_det_integral, row.residual});
    rows.push_back({{"lambda", row.lambda},
                    {"exterior", row.exterior},
                    {"exterior_stderr", row.exterior_se},
                    {"top_sum", row.top_sum},
                    {"top_sum_stderr", row.top_sum_se},
                    {"max_symplectic_residual", row.max_symplectic_residual}});
  }
  c.finish(w);
  json out = {{"slope", r.slope},
              {"intercept", r.intercept},
              {"r2", r.r2},
              {"rows_used", r.rows_used},
              {"log_det_integral", r.integral.value},
              {"log_det_integral_stderr", r.integral.se},
              {"jacobi_moment", r.jacobi_moment},
              {"checks", rows}};
  c.write_json("example3.json", out);
  c.res->details = out;
  c.res->summary = "slope=" + fmt(r.slope) + " rows_used=" + std::to_string(r.rows_used);
}

void run_frostman(Context& c) {
  const json& e = c.e;
  auto dist = parse_dist(e["dist"]);
  double p = num(e, "p");
  if (!(p > 0 && p < 1)) throw ConfigError("p must lie in (0, 1)");
  auto r = frostman_moment(dist, p, dlist(e, "a_grid"), num(e, "refine_tol"));
  auto w = c.csv("frostman.csv", {"a", "integral"});
  for (const auto& [a, v] : r.table) w.row({a, v});
  c.finish(w);
  json out = {{"sup", r.infinite ? json("inf") : json(r.sup)},
              {"argmax", r.argmax},
              {"infinite", r.infinite}};
  c.write_json("frostman.json", out);
  c.res->details = out;
  c.res->summary = "sup=" + fmt(r.sup) + " at a=" + fmt(r.argmax);
}

using Runner = void (*)(Context&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> r = {
      {"moments", run_moments},   {"wasserstein", run_wasserstein}, {"lyapunov", run_lyapunov},
      {"stationary", run_stationary}, {"mixing", run_mixing},       {"holder-scan", run_holder},
      {"ldp", run_ldp},           {"example1", run_example1},       {"example2", run_example2},
      {"example3", run_example3}, {"frostman", run_frostman}};
  return r;
}

void preconditions(const std::string& exp, const json& e, ValidationReport& rep) {
  auto violation = [&](const std::string& s) { rep.violations.push_back(s); };
  auto try_measure = [&](const char* key) {
    if (!e.contains(key)) return;
    try {
      parse_measure(e[key]);
    } catch (const Error& ex) {
      violation(ex.what());
    }
  };
  try_measure("mu");
  try_measure("nu");
  if (e.contains("p") && e["p"].is_number()) {
    double p = e["p"].get<double>();
    if (!(p > 0 && p <= 1)) violation("p must lie in (0, 1]");
  }
  if (e.contains("n") && e["n"].is_number() && e["n"].get<double>() < 1) violation("n must be >= 1");
  if (e.contains("trials") && e["trials"].is_number() && e["trials"].get<double>() < 1)
    violation("trials must be >= 1");
  if (exp == "example2") {
    try {
      auto prm = mixed_params(e);
      for (const auto& v : prm.violations())
        if (v.find("lambda") == std::string::npos) violation(v);
      double p = e["p"].get<double>();
      if (std::abs(prm.a - prm.E) >= 1e-9 && !(prm.q < std::pow(std::abs(prm.a - prm.E), p)))
        rep.warnings.push_back("q >= |a - E|^p: the decay rate argument needs q < |a - E|^p");
    } catch (const Error& ex) {
      violation(ex.what());
    }
  }
  if (exp == "example2" || exp == "example3") {
    try {
      auto l = dlist(e, "lambdas");
      if (l.size() < 2) rep.warnings.push_back("single lambda: slope cannot be fitted");
      for (double x : l)
        if (!(x >= 1)) violation("lambda must be >= 1");
    } catch (const Error& ex) {
      violation(ex.what());
    }
  }
  if (exp == "example3") {
    try {
      parse_sym_dist(e["dist"], static_cast<int>(integer(e, "m")));
    } catch (const Error& ex) {
      violation(ex.what());
    }
  }
  if (exp == "example1" || exp == "frostman") {
    try {
      parse_dist(e["dist"]);
    } catch (const Error& ex) {
      violation(ex.what());
    }
  }
}

}  // namespace

const std::vector<std::string>& experiments() {
  static const std::vector<std::string> v = [] {
    std::vector<std::string> out;
    for (const auto& [k, r] : runners()) out.push_back(k);
    return out;
  }();
  return v;
}

json effective_config(const std::string& experiment, const json& config) {
  auto it = defaults().find(experiment);
  if (it == defaults().end()) throw ConfigError("unknown experiment '" + experiment + "'");
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  json e = it->second;
  for (const auto& [k, v] : config.items()) {
    if (k == "experiment") {
      if (!v.is_string() || v.get<std::string>() != experiment)
        throw ConfigError("config is for experiment '" + v.dump() + "'");
      continue;
    }
    if (k != "seed" && !e.contains(k))
      throw ConfigError("unknown key '" + k + "' for " + experiment);
    e[k] = v;
  }
  if (!e.contains("seed")) e["seed"] = 1;
  for (const auto& [k, v] : e.items())
    if (v.is_string() && v.get<std::string>() == kRequired)
      throw ConfigError("missing required key '" + k + "'");
  seed_of(e);
  return e;
}

ValidationReport validate(const std::string& experiment, const json& config) {
  ValidationReport rep;
  json e;
  try {
    e = effective_config(experiment, config);
  } catch (const Error& ex) {
    rep.violations.push_back(ex.what());
    return rep;
  } catch (const json::exception& ex) {
    rep.violations.push_back(ex.what());
    return rep;
  }
  preconditions(experiment, e, rep);
  return rep;
}

RunResult run(const std::string& experiment, const json& config, const RunOptions& opt) {
  RunResult res;
  Context c;
  c.exp = experiment;
  c.res = &res;
  auto fail = [&](int code, const std::string& kind, const std::string& what) {
    res.exit_code = code;
    res.diagnostic = {{"experiment", experiment}, {"error", kind}, {"message", what},
                      {"exit_code", code}};
    if (c.hash) res.diagnostic["config_hash"] = c.hash;
    return res;
  };
  try {
    json cfg = config;
    if (opt.seed) {
      if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
      cfg["seed"] = *opt.seed;
    }
    c.e = effective_config(experiment, cfg);
    auto rep = validate(experiment, cfg);
    if (!rep.ok()) throw ConfigError(rep.violations.front());
    c.seed = seed_of(c.e);
    c.hash = config_hash(c.e);
    c.dir = opt.out_dir;
    std::filesystem::create_directories(c.dir);
    set_threads(opt.threads);
    runners().at(experiment)(c);
    return res;
  } catch (const ConfigError& ex) {
    return fail(2, "ConfigError", ex.what());
  } catch (const NotSymmetric& ex) {
    return fail(2, "NotSymmetric", ex.what());
  } catch (const DimensionMismatch& ex) {
    return fail(2, "DimensionMismatch", ex.what());
  } catch (const json::exception& ex) {
    return fail(2, "ConfigError", ex.what());
  } catch (const Error& ex) {
    return fail(3, ex.kind(), ex.what());
  } catch (const std::exception& ex) {
    return fail(3, "Failure", ex.what());
  }
}

}  // namespace cocycle
