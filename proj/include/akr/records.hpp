#pragma once

// Text artifacts: .cert certificate records (INI sections, %.17g numbers),
// .tbl columnar tables and .log step logs. LF line endings throughout.

#include "akr/models.hpp"
#include "akr/scaling.hpp"

#include <string>
#include <vector>

namespace akr {

std::string format_number(double x);  // %.17g, "inf" / "-inf" / "nan"
std::string format_vector(const Vec& x);  // space separated
Vec parse_vector(const std::string& text, const std::string& field);

struct Table {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::string> units;   // one per column, "-" when dimensionless
  std::vector<std::string> notes;   // "# key: value" lines, e.g. provenance of constants
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  std::string str() const;
  int column(const std::string& name) const;  // throws when missing
};

Table parse_table(const std::string& text);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// Strictness certificate of a model's defining function on its sampling region.
std::string psh_record(const ModelInstance& model, const PshCertificate& cert);

// Cutoff weight certified in the chart z = Z (x - center) of the model's structure.
struct WeightRecord {
  Vec center;
  Mat Z;
  double puncture = 0.02;
  WeightConstants weight;
};
std::string weight_record(const ModelInstance& model, const WeightRecord& w);

struct VerifyReport {
  bool parsed = false;
  bool passed = false;
  std::string kind;
  int recorded_grid = 0;
  int replay_grid = 0;
  double recorded_min = 0.0;
  double replay_min = 0.0;
  double drift = 0.0;
  std::string summary;  // one deterministic line
};

// Replays the recorded minimum on the recorded grid, or on a finer grid when
// `grid` exceeds it; a finer replay passes when the certificate still holds.
VerifyReport verify_record(const std::string& text, int grid = 0);
VerifyReport verify_certificate(const std::string& path, int grid = 0);

// One line per step with its chart norms and convergence row.
std::string scaling_log(const ScalingSequence& seq, const ConvergenceReport& report,
                        const ScaledCertificate* cert = nullptr);

}  // namespace akr
