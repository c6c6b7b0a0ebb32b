#include "ifslab/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace ifslab::io {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep))
    out.push_back(trim(field));
  if (!s.empty() && s.back() == sep)
    out.emplace_back();
  return out;
}

double parse_double(const std::string &text, const std::string &context) {
  const std::string t = trim(text);
  double value = 0;
  const char *first = t.data();
  const char *last = t.data() + t.size();
  if (!t.empty() && *first == '+')
    ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (t.empty() || ec != std::errc() || ptr != last)
    throw ParseError(context + ": not a number: '" + text + "'");
  return value;
}

std::ifstream open_in(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ParseError("cannot write " + path.string());
  return out;
}

std::string join(const Vector &v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i)
      s += ',';
    s += format_decimal(v(i));
  }
  return s;
}

std::string join(const std::vector<int> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i)
      s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

} // namespace

std::string format_decimal(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

Matrix parse_matrix_csv(std::istream &in, const std::string &source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    std::vector<double> row;
    for (const auto &field : split(t, ','))
      row.push_back(parse_double(field, source + ":" + std::to_string(lineno)));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(source + ":" + std::to_string(lineno) + ": ragged row (expected " +
                       std::to_string(rows.front().size()) + " fields, got " +
                       std::to_string(row.size()) + ")");
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw ParseError(source + ": no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
  if (!m.allFinite())
    throw ParseError(source + ": non-finite value");
  return m;
}

Matrix read_matrix_csv(const std::filesystem::path &path) {
  auto in = open_in(path);
  return parse_matrix_csv(in, path.string());
}

void write_matrix_csv(std::ostream &out, const Matrix &m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j)
        out << ',';
      out << format_decimal(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path &path, const Matrix &m) {
  auto out = open_out(path);
  write_matrix_csv(out, m);
}

Vector read_vector_csv(const std::filesystem::path &path) {
  const Matrix m = read_matrix_csv(path);
  if (m.rows() == 1)
    return m.row(0).transpose();
  if (m.cols() == 1)
    return m.col(0);
  throw ParseError(path.string() + ": expected a single row or column");
}

void write_vector_csv(const std::filesystem::path &path, const Vector &v) {
  write_matrix_csv(path, Matrix(v.transpose()));
}

Vector parse_vector_inline(const std::string &text) {
  const auto fields = split(trim(text), ',');
  if (fields.empty())
    throw ParseError("empty vector");
  Vector v(static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i)
    v(Eigen::Index(i)) = parse_double(fields[i], "vector");
  if (!v.allFinite())
    throw ParseError("vector: non-finite value");
  return v;
}

PointCloudd read_cloud_csv(const std::filesystem::path &path) {
  return PointCloudd(read_matrix_csv(path).transpose());
}

void write_cloud_csv(std::ostream &out, const PointCloudd &cloud) {
  write_matrix_csv(out, Matrix(cloud.points().transpose()));
}

void write_attractor_csv(std::ostream &out, const AttractorApprox<double> &approx) {
  out << "# radius=" << format_decimal(approx.radius) << " iterations=" << approx.iterations
      << '\n';
  write_cloud_csv(out, approx.cloud);
}

void write_attractor_csv(const std::filesystem::path &path,
                         const AttractorApprox<double> &approx) {
  auto out = open_out(path);
  write_attractor_csv(out, approx);
}

AttractorHeader read_attractor_header(const std::filesystem::path &path) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  std::istringstream fields(line);
  std::string hash, radius, iterations;
  fields >> hash >> radius >> iterations;
  if (hash != "#" || radius.rfind("radius=", 0) != 0 || iterations.rfind("iterations=", 0) != 0)
    throw ParseError(path.string() + ": missing attractor header");
  AttractorHeader h;
  h.radius = parse_double(radius.substr(7), path.string());
  h.iterations = static_cast<int>(parse_double(iterations.substr(11), path.string()));
  return h;
}

std::string verdict_kind_name(VerdictKind kind) {
  switch (kind) {
  case VerdictKind::Disconnected:
    return "DISCONNECTED";
  case VerdictKind::Connected:
    return "CONNECTED";
  case VerdictKind::Undecided:
    return "UNDECIDED";
  }
  return "UNKNOWN";
}

std::string verdict_line(const Verdict<double> &v) {
  switch (v.kind) {
  case VerdictKind::Disconnected:
    return "DISCONNECTED gap=" + format_decimal(v.value);
  case VerdictKind::Connected:
    return "CONNECTED witness=" + v.witness;
  case VerdictKind::Undecided:
    return "UNDECIDED mingap=" + format_decimal(v.value);
  }
  return "UNKNOWN";
}

// -- Config ------------------------------------------------------------------

Config Config::load(const std::filesystem::path &path) {
  auto in = open_in(path);
  return parse(in, path.parent_path());
}

Config Config::parse(std::istream &in, std::filesystem::path base_dir) {
  Config c;
  c.base_dir_ = std::move(base_dir);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    if (t.find('=') == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) + ": expected key=value");
    c.set(t);
  }
  return c;
}

void Config::set(const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || trim(assignment.substr(0, eq)).empty())
    throw ParseError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string &key, const std::string &value) { entries_[key] = value; }

bool Config::has(const std::string &key) const { return entries_.count(key) != 0; }

const std::string &Config::get(const std::string &key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end())
    throw ParseError("missing config key '" + key + "'");
  return it->second;
}

std::string Config::get_or(const std::string &key, const std::string &fallback) const {
  return has(key) ? get(key) : fallback;
}

double Config::get_double(const std::string &key) const { return parse_double(get(key), key); }

double Config::get_double_or(const std::string &key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long Config::get_int(const std::string &key) const {
  const std::string t = trim(get(key));
  long value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ParseError(key + ": not an integer: '" + t + "'");
  return value;
}

long Config::get_int_or(const std::string &key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> Config::get_doubles(const std::string &key) const {
  std::vector<double> out;
  for (const auto &field : split(get(key), ','))
    out.push_back(parse_double(field, key));
  return out;
}

std::filesystem::path Config::get_path(const std::string &key) const {
  std::filesystem::path p = get(key);
  if (p.is_relative() && !base_dir_.empty())
    p = base_dir_ / p;
  return p;
}

Matrix Config::get_matrix(const std::string &key) const { return read_matrix_csv(get_path(key)); }

Vector Config::get_vector(const std::string &key) const {
  const std::string &value = get(key);
  const bool inline_numbers =
      !value.empty() && value.find_first_not_of("0123456789+-.eE, \t") == std::string::npos;
  if (inline_numbers)
    return parse_vector_inline(value);
  return read_vector_csv(get_path(key));
}

// -- Witness files -------------------------------------------------------------

void write_witness(const std::filesystem::path &path, const Witness<double> &w) {
  auto out = open_out(path);
  out << "tag=" << w.tag << '\n'
      << "m=" << w.m << '\n'
      << "p=" << join(w.p) << '\n'
      << "p.fixed=" << w.p_cert.fixed_map << '\n'
      << "p.chain=" << join(w.p_cert.chain) << '\n'
      << "q=" << join(w.q) << '\n'
      << "q.fixed=" << w.q_cert.fixed_map << '\n'
      << "q.chain=" << join(w.q_cert.chain) << '\n';
}

Witness<double> read_witness(const std::filesystem::path &path) {
  const Config c = Config::load(path);
  auto chain = [&](const std::string &key) {
    std::vector<int> out;
    const std::string value = c.get_or(key, "");
    if (trim(value).empty())
      return out;
    for (const auto &field : split(value, ','))
      out.push_back(static_cast<int>(parse_double(field, key)));
    return out;
  };
  Witness<double> w;
  w.tag = c.get("tag");
  w.m = static_cast<int>(c.get_int("m"));
  w.p = parse_vector_inline(c.get("p"));
  w.p_cert.fixed_map = static_cast<int>(c.get_int("p.fixed"));
  w.p_cert.chain = chain("p.chain");
  w.q = parse_vector_inline(c.get("q"));
  w.q_cert.fixed_map = static_cast<int>(c.get_int("q.fixed"));
  w.q_cert.chain = chain("q.chain");
  return w;
}

// -- Sweep reports ---------------------------------------------------------------

void write_sweep_csv(std::ostream &out, const SweepReport<double> &report) {
  const Eigen::Index d = report.grid.origin.size();
  out << "col,row,s1,s2";
  for (Eigen::Index k = 0; k < d; ++k)
    out << ",w" << k + 1;
  out << ",verdict,value,exceptional_distance,radius,iterations,points\n";
  for (const auto &c : report.cells) {
    out << c.col << ',' << c.row << ',' << format_decimal(c.s1) << ',' << format_decimal(c.s2);
    for (Eigen::Index k = 0; k < d; ++k)
      out << ',' << format_decimal(c.w(k));
    if (c.verdict) {
      out << ',' << verdict_kind_name(c.verdict->kind) << ',';
      if (c.verdict->kind == VerdictKind::Connected)
        out << c.verdict->witness;
      else
        out << format_decimal(c.verdict->value);
    } else {
      out << ",ERROR,";
    }
    out << ',' << format_decimal(c.exceptional_distance) << ',' << format_decimal(c.radius) << ','
        << c.iterations << ',' << c.points << '\n';
  }
}

void write_sweep_pgm(std::ostream &out, const SweepReport<double> &report) {
  const int cols = report.grid.cols();
  const int rows = report.grid.rows();
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  for (int r = rows - 1; r >= 0; --r)
    for (int c = 0; c < cols; ++c) {
      const auto &cell = report.cells[static_cast<std::size_t>(r * cols + c)];
      unsigned char shade = 128;
      if (cell.verdict && cell.verdict->kind == VerdictKind::Disconnected)
        shade = 0;
      else if (cell.verdict && cell.verdict->kind == VerdictKind::Connected)
        shade = 255;
      out.put(static_cast<char>(shade));
    }
}

void write_sweep_summary(std::ostream &out, const SweepReport<double> &report) {
  const CrossTab tab = report.cross_tab();
  const char *names[4] = {"DISCONNECTED", "CONNECTED", "UNDECIDED", "ERROR"};
  out << "cells=" << report.cells.size() << " n_max=" << report.n_max
      << " (exceptional union truncated at n_max)\n";
  out << "verdict        near(<=" << format_decimal(report.far_threshold) << ")  far\n";
  for (int k = 0; k < 4; ++k) {
    std::string name = names[k];
    name.resize(15, ' ');
    out << name << tab.counts[k][0] << "  " << tab.counts[k][1] << '\n';
  }
}

} // namespace ifslab::io
