#pragma once

#include "ifslab/sw_family.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ifslab::io {

using Matrix = math_types<double>::Matrix;
using Vector = math_types<double>::Vector;

/// Raised for malformed files and configuration values.
class ParseError : public InputError {
public:
  using InputError::InputError;
};

/// Round-trip decimal formatting (17 significant digits).
std::string format_decimal(double x);

/// Reads comma-separated rows. Blank lines and lines starting with '#' are
/// skipped; ragged rows, empty files and non-numeric fields are rejected.
Matrix parse_matrix_csv(std::istream &in, const std::string &source = "<stream>");
Matrix read_matrix_csv(const std::filesystem::path &path);
void write_matrix_csv(std::ostream &out, const Matrix &m);
void write_matrix_csv(const std::filesystem::path &path, const Matrix &m);

/// A vector file holds either a single row or a single column.
Vector read_vector_csv(const std::filesystem::path &path);
void write_vector_csv(const std::filesystem::path &path, const Vector &v);
/// Parses "1.5,2,-3" into a vector.
Vector parse_vector_inline(const std::string &text);

/// Point clouds: one point per line, d fields per line, no header.
PointCloudd read_cloud_csv(const std::filesystem::path &path);
void write_cloud_csv(std::ostream &out, const PointCloudd &cloud);

/// Attractor files are cloud CSVs preceded by `# radius=<r> iterations=<k>`.
void write_attractor_csv(std::ostream &out, const AttractorApprox<double> &approx);
void write_attractor_csv(const std::filesystem::path &path, const AttractorApprox<double> &approx);
struct AttractorHeader {
  double radius = 0;
  int iterations = 0;
};
AttractorHeader read_attractor_header(const std::filesystem::path &path);

std::string verdict_kind_name(VerdictKind kind);
/// `DISCONNECTED gap=<x>` | `CONNECTED witness=<tag>` | `UNDECIDED mingap=<x>`.
std::string verdict_line(const Verdict<double> &v);

/// Flat key=value configuration. Later assignments override earlier ones.
class Config {
public:
  Config() = default;
  static Config load(const std::filesystem::path &path);
  static Config parse(std::istream &in, std::filesystem::path base_dir = {});

  /// Applies one `key=value` override.
  void set(const std::string &assignment);
  void set(const std::string &key, const std::string &value);

  bool has(const std::string &key) const;
  const std::string &get(const std::string &key) const;
  std::string get_or(const std::string &key, const std::string &fallback) const;
  double get_double(const std::string &key) const;
  double get_double_or(const std::string &key, double fallback) const;
  long get_int(const std::string &key) const;
  long get_int_or(const std::string &key, long fallback) const;
  /// Comma-separated list of doubles.
  std::vector<double> get_doubles(const std::string &key) const;

  /// Path values are resolved against the directory of the config file.
  std::filesystem::path get_path(const std::string &key) const;
  Matrix get_matrix(const std::string &key) const;
  /// Inline comma-separated numbers, or a path to a vector file.
  Vector get_vector(const std::string &key) const;

  const std::map<std::string, std::string> &entries() const { return entries_; }
  const std::filesystem::path &base_dir() const { return base_dir_; }

private:
  std::map<std::string, std::string> entries_;
  std::filesystem::path base_dir_;
};

/// Key=value witness files consumed by `classify --witness`.
void write_witness(const std::filesystem::path &path, const Witness<double> &w);
Witness<double> read_witness(const std::filesystem::path &path);

/// Sweep CSV: header line then one row per cell in row-major order.
void write_sweep_csv(std::ostream &out, const SweepReport<double> &report);
/// Binary PGM (P5); one pixel per cell, first axis horizontal, second axis
/// increasing upwards. Disconnected=0, undecided or failed=128, connected=255.
void write_sweep_pgm(std::ostream &out, const SweepReport<double> &report);
void write_sweep_summary(std::ostream &out, const SweepReport<double> &report);

} // namespace ifslab::io
