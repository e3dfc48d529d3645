#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"

#include "cocycle/measures.hpp"
#include "cocycle/models.hpp"

namespace cocycle {

using json = nlohmann::json;

// A measure read from a JSON spec: a finite realization for exact
// computations and a sampler for Monte Carlo.
struct MeasureModel {
  std::string type;
  int dim = 0;
  std::function<DiscreteMatrixMeasure(int max_nodes)> discrete;
  std::function<MatrixSampler(std::uint64_t seed)> sampler;
  std::string realization;  // "atoms", "quadrature" or "samples"
};

// Throws ConfigError on unknown keys or malformed values.
void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where);
Mat parse_matrix(const json& j, const std::string& where);
ScalarDist parse_dist(const json& j);
SymDist parse_sym_dist(const json& j, int m);
MeasureModel parse_measure(const json& j);
MixedModelParams parse_mixed(const json& j);  // keys a, E, q, dist, optional beta/lambda

// FNV-1a 64 of the compact dump (object keys are kept sorted).
std::uint64_t config_hash(const json& j);

// CSV with a header row, %.17g numbers and a trailing metadata comment.
class CsvWriter {
 public:
  CsvWriter(std::string path, std::vector<std::string> header);
  void row(const std::vector<double>& values);
  // Writes the file; the metadata line is "# config_hash=<hex> seed=<n>".
  void finish(std::uint64_t hash, std::uint64_t seed) const;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

std::string format_number(double x);

}  // namespace cocycle
