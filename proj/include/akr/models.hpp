#pragma once

// Builtin model domains and polynomial coefficient tables.

#include "akr/metric.hpp"

#include <map>
#include <string>
#include <vector>

namespace akr {

using ModelParams = std::map<std::string, std::string>;

struct ParamSpec {
  std::string name;
  enum class Kind { Integer, Real, Choice } kind = Kind::Real;
  double lo = 0.0, hi = 0.0;      // closed range for Integer and Real
  std::string default_value;
  std::vector<std::string> choices;
  std::string doc;
};

struct ModelInfo {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
};

struct ModelInstance {
  std::string name;
  ModelParams params;   // fully resolved, defaults filled in
  DomainSpec domain;
  StructureReport structure;
  bool strict_declared = false;
  std::optional<PshCertificate> strictness;
  Vec interior;  // reference point of D
  Vec boundary;  // boundary point reached from `interior` along the last real-normal axis
};

std::vector<ModelInfo> model_catalog();
const ModelInfo& model_info(const std::string& name);

// Fills defaults and checks ranges; throws std::invalid_argument naming the field.
ModelParams resolve_params(const ModelInfo& info, const ModelParams& given);

// Assembles the domain and checks the structure axiom; also certifies the
// defining function on the sampling region when the model declares it.
ModelInstance build_model(const std::string& name, const ModelParams& params = {}, bool certify = true);

// x -> sum_k c_k x^{e_k} with exponent tuples over (x_1, y_1, ..., x_n, y_n).
struct PolynomialTerm {
  std::vector<int> exponents;
  Mat coefficient;  // 1x1 for scalar tables, 2n x 2n for matrix tables
};

struct PolynomialTable {
  int n = 1;
  int rows = 1, cols = 1;
  std::vector<PolynomialTerm> terms;

  Mat value(const Vec& x) const;
  std::vector<Mat> derivative(const Vec& x) const;
  Mat second_derivative(const Vec& x, int i, int j) const;
  void validate() const;
};

ScalarField polynomial_field(const PolynomialTable& table);
// kind "structure": J is the table. kind "conjugator": J = P J_st P^{-1} with P the table.
AlmostComplexStructure polynomial_structure(const PolynomialTable& table, const std::string& kind);

// "e1 e2 ... : c" or "e1 ... : m11 m12 ... " (row-major).
PolynomialTerm parse_term(const std::string& text, int n, int rows, int cols);

int param_int(const ModelParams& p, const std::string& key);
double param_real(const ModelParams& p, const std::string& key);

}  // namespace akr
