#include "cocycle/config.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

namespace cocycle {

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items())
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

namespace {

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + " must be finite");
  return x;
}

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

}  // namespace

Mat parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + " must be a non-empty array of rows");
  const auto m = j.size();
  Mat g(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!j[i].is_array() || j[i].size() != m) throw ConfigError(where + " must be square");
    for (std::size_t k = 0; k < m; ++k) g(i, k) = number(j[i][k], where);
  }
  return g;
}

ScalarDist parse_dist(const json& j) {
  if (!j.is_object() || j.size() != 1) throw ConfigError("dist must have exactly one kind");
  require_keys(j, {"uniform", "atoms", "gaussian"}, "dist");
  if (j.contains("uniform")) {
    const auto& u = j["uniform"];
    if (!u.is_array() || u.size() != 2) throw ConfigError("uniform dist is [lo, hi]");
    return ScalarDist::uniform(number(u[0], "uniform lo"), number(u[1], "uniform hi"));
  }
  if (j.contains("gaussian")) {
    const auto& g = j["gaussian"];
    if (!g.is_array() || g.size() != 2) throw ConfigError("gaussian dist is [mean, sd]");
    return ScalarDist::gaussian(number(g[0], "gaussian mean"), number(g[1], "gaussian sd"));
  }
  const auto& a = j["atoms"];
  if (!a.is_array()) throw ConfigError("atoms dist is [[t, w], ...]");
  std::vector<std::pair<double, double>> atoms;
  for (const auto& e : a) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("atoms dist entries are [t, w]");
    atoms.push_back({number(e[0], "atom location"), number(e[1], "atom weight")});
  }
  return ScalarDist::discrete(std::move(atoms));
}

SymDist parse_sym_dist(const json& j, int m) {
  SymDist d;
  d.m = m;
  if (j.is_object() && j.contains("sym_atoms")) {
    require_keys(j, {"sym_atoms"}, "dist");
    double total = 0;
    for (const auto& e : j["sym_atoms"]) {
      require_keys(e, {"matrix", "weight"}, "sym_atoms entry");
      Mat s = parse_matrix(field(e, "matrix", "sym_atoms entry"), "sym_atoms matrix");
      if (s.rows() != m) throw DimensionMismatch("sym_atoms matrix must be m x m");
      double w = number(field(e, "weight", "sym_atoms entry"), "sym_atoms weight");
      if (!(w > 0)) throw ConfigError("sym_atoms weights must be positive");
      total += w;
      d.atoms.push_back({s, w});
    }
    if (d.atoms.empty()) throw ConfigError("sym_atoms must not be empty");
    if (std::abs(total - 1) > 1e-9) throw ConfigError("sym_atoms weights must sum to 1");
    for (auto& a : d.atoms) {
      a.second /= total;
      if ((a.first - a.first.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * std::max(1.0, a.first.cwiseAbs().maxCoeff()))
        throw NotSymmetric("sym_atoms matrix is not symmetric");
    }
    return d;
  }
  d.entries = parse_dist(j);
  return d;
}

MixedModelParams parse_mixed(const json& j) {
  MixedModelParams prm;
  prm.a = number(field(j, "a", "mixed measure"), "a");
  prm.E = number(field(j, "E", "mixed measure"), "E");
  prm.q = number(field(j, "q", "mixed measure"), "q");
  prm.dist = parse_dist(field(j, "dist", "mixed measure"));
  if (j.contains("beta")) {
    double b = number(j["beta"], "beta");
    if (b < 0) throw ConfigError("beta must be >= 0");
    prm.lambda = b > 0 ? 1 / b : std::numeric_limits<double>::infinity();
  }
  if (j.contains("lambda")) prm.lambda = number(j["lambda"], "lambda");
  if (!(prm.q > 0 && prm.q < 1)) throw ConfigError("q must lie in (0, 1)");
  return prm;
}

MeasureModel parse_measure(const json& j) {
  if (!j.is_object()) throw ConfigError("measure spec must be an object");
  const std::string type = field(j, "type", "measure spec").get<std::string>();
  MeasureModel mm;
  mm.type = type;
  if (type == "atoms") {
    require_keys(j, {"type", "atoms"}, "atoms measure");
    std::vector<Mat> atoms;
    std::vector<double> w;
    for (const auto& e : field(j, "atoms", "atoms measure")) {
      require_keys(e, {"matrix", "weight"}, "atom");
      atoms.push_back(parse_matrix(field(e, "matrix", "atom"), "atom matrix"));
      w.push_back(number(field(e, "weight", "atom"), "atom weight"));
    }
    if (atoms.empty()) throw ConfigError("atoms measure needs at least one atom");
    for (const auto& a : atoms)
      if (a.rows() != atoms[0].rows()) throw DimensionMismatch("atoms of different sizes");
    double s = 0;
    for (double x : w) {
      if (!(x > 0)) throw ConfigError("atom weights must be positive");
      s += x;
    }
    if (std::abs(s - 1) > 1e-9) throw ConfigError("atom weights must sum to 1");
    DiscreteMatrixMeasure mu(std::move(atoms), std::move(w));
    mm.dim = mu.dim();
    mm.discrete = [mu](int) { return mu; };
    mm.sampler = [mu](std::uint64_t seed) { return mu.sampler(seed); };
    mm.realization = "atoms";
  } else if (type == "schrodinger") {
    require_keys(j, {"type", "E", "dist"}, "schrodinger measure");
    double E = number(field(j, "E", "schrodinger measure"), "E");
    ScalarDist d = parse_dist(field(j, "dist", "schrodinger measure"));
    mm.dim = 2;
    mm.discrete = [d, E](int n) { return schrodinger_measure(d, E, n); };
    mm.sampler = [d, E](std::uint64_t seed) { return schrodinger_sampler(d, E, seed); };
    mm.realization = d.realization();
  } else if (type == "mixed") {
    require_keys(j, {"type", "E", "a", "q", "beta", "dist"}, "mixed measure");
    MixedModelParams prm = parse_mixed(j);
    double beta = j.contains("beta") ? j["beta"].get<double>() : 0.0;
    mm.dim = 2;
    mm.discrete = [prm, beta](int n) { return mixed_measure(prm, beta, n); };
    mm.sampler = [prm, beta](std::uint64_t seed) { return mixed_sampler(prm, beta, seed); };
    mm.realization = prm.dist.realization();
  } else if (type == "jacobi") {
    require_keys(j, {"type", "E", "lambda", "m", "dist"}, "jacobi measure");
    double E = number(field(j, "E", "jacobi measure"), "E");
    double lambda = number(field(j, "lambda", "jacobi measure"), "lambda");
    const auto& mj = field(j, "m", "jacobi measure");
    if (!mj.is_number_integer() || mj.get<int>() < 1) throw ConfigError("m must be a positive integer");
    int m = mj.get<int>();
    SymDist d = parse_sym_dist(field(j, "dist", "jacobi measure"), m);
    mm.dim = 2 * m;
    mm.discrete = [d, E, lambda](int) {
      if (d.atoms.empty())
        throw ConfigError("jacobi measure with i.i.d. entries has no finite realization");
      std::vector<Mat> atoms;
      std::vector<double> w;
      for (const auto& [s, wt] : d.atoms) {
        atoms.push_back(jacobi_matrix(s, E, lambda));
        w.push_back(wt);
      }
      return DiscreteMatrixMeasure(std::move(atoms), std::move(w));
    };
    mm.sampler = [d, E, lambda](std::uint64_t seed) { return jacobi_sampler(d, E, lambda, seed); };
    mm.realization = d.atoms.empty() ? "samples" : "atoms";
  } else {
    throw ConfigError("unknown measure type '" + type + "'");
  }
  return mm;
}

std::uint64_t config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(std::string path, std::vector<std::string> header)
    : path_(std::move(path)), header_(std::move(header)) {}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != header_.size()) throw std::logic_error("csv row width mismatch");
  rows_.push_back(values);
}

void CsvWriter::finish(std::uint64_t hash, std::uint64_t seed) const {
  std::ofstream f(path_, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path_);
  for (std::size_t i = 0; i < header_.size(); ++i) f << (i ? "," : "") << header_[i];
  f << '\n';
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << format_number(r[i]);
    f << '\n';
  }
  char meta[96];
  std::snprintf(meta, sizeof meta, "# config_hash=%016" PRIx64 " seed=%" PRIu64 "\n", hash, seed);
  f << meta;
}

}  // namespace cocycle
