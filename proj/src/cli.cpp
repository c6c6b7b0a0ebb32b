#include "ifslab/cli.hpp"

#include "ifslab/io.hpp"
#include "ifslab/random.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace ifslab::cli {

namespace fs = std::filesystem;
using io::Config;
using io::format_decimal;
using Matrix = io::Matrix;
using Vector = io::Vector;

namespace {

struct Options {
  std::string config;
  std::string out_dir = ".";
  unsigned threads = 1;
  std::uint64_t seed = 20110101;
  std::string witness;
  std::vector<std::string> overrides;
};

Config load_config(const Options &opt) {
  Config c = opt.config.empty() ? Config() : Config::load(opt.config);
  for (const auto &o : opt.overrides)
    c.set(o);
  return c;
}

fs::path output_dir(const Options &opt) {
  fs::path dir = opt.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw io::ParseError("cannot create output directory " + dir.string());
  return dir;
}

IfsSystem<double> system_from_config(const Config &c) {
  if (c.has("S"))
    return build_ifs(SwConfig<double>{c.get_matrix("S"), c.get_matrix("T"), c.get_vector("w")});
  const long count = c.get_int("maps");
  if (count < 1)
    throw io::ParseError("maps must be positive");
  std::vector<AffineContraction<double>> maps;
  for (long k = 1; k <= count; ++k) {
    const std::string prefix = "map" + std::to_string(k);
    maps.emplace_back(c.get_matrix(prefix + ".matrix"), c.get_vector(prefix + ".offset"));
  }
  return IfsSystem<double>(std::move(maps));
}

AttractorOptions<double> attractor_options(const Config &c) {
  AttractorOptions<double> o;
  const std::string rho = c.get_or("rho", "auto");
  if (rho != "auto")
    o.rho = c.get_double("rho");
  o.max_iterations = static_cast<int>(c.get_int_or("max_iterations", o.max_iterations));
  o.max_points = c.get_int_or("max_points", o.max_points);
  return o;
}

int cmd_attractor(const Options &opt, std::ostream &out) {
  const Config c = load_config(opt);
  const auto sys = system_from_config(c);
  const double target_r = c.get_double("target_r");
  const auto opts = attractor_options(c);
  const fs::path dir = output_dir(opt);
  const auto approx = attractor(sys, target_r, opts);
  io::write_attractor_csv(dir / "attractor.csv", approx);
  out << "radius=" << format_decimal(approx.radius) << " iterations=" << approx.iterations
      << " points=" << approx.cloud.size() << '\n';
  return kOk;
}

int cmd_classify(const Options &opt, std::ostream &out) {
  const Config c = load_config(opt);
  const auto sys = system_from_config(c);
  const double target_r = c.get_double_or("target_r", 1e-3);
  const auto approx = attractor(sys, target_r, attractor_options(c));
  if (!opt.witness.empty()) {
    const auto w = io::read_witness(opt.witness);
    out << io::verdict_line(classify(sys, approx, w)) << '\n';
  } else {
    out << io::verdict_line(classify(sys, approx)) << '\n';
  }
  return kOk;
}

struct WitnessOutputs {
  std::string name;
  Matrix t;
  Vector w;
  Vector e;
  Witness<double> witness;
  std::vector<std::pair<std::string, double>> residuals;
  double norm = 0, bound = 0;
  int rank = 0;
};

void write_witness_outputs(const fs::path &dir, const WitnessOutputs &wo, double target_r) {
  io::write_matrix_csv(dir / (wo.name + "_T.csv"), wo.t);
  io::write_vector_csv(dir / (wo.name + "_w.csv"), wo.w);
  io::write_vector_csv(dir / (wo.name + "_e.csv"), wo.e);
  io::write_witness(dir / (wo.name + ".witness"), wo.witness);
  std::ofstream cfg(dir / (wo.name + ".cfg"));
  cfg << "# classify this with: ifslab classify --config " << wo.name << ".cfg --witness "
      << (dir / (wo.name + ".witness")).string() << '\n'
      << "S=S.csv\n"
      << "T=" << wo.name << "_T.csv\n"
      << "w=" << wo.name << "_w.csv\n"
      << "target_r=" << format_decimal(target_r) << '\n';
}

int witness_batch(const Options &opt, const Config &c, std::ostream &out) {
  const long count = c.get_int("batch");
  const int max_dim = static_cast<int>(c.get_int_or("max_dim", 8));
  const double max_norm = c.get_double_or("max_norm", 0.95);
  const std::vector<double> eps_list = c.has("eps") ? c.get_doubles("eps")
                                                    : std::vector<double>{0.1, 0.5};
  RandomMatrices<double> rnd(opt.seed);
  const fs::path dir = output_dir(opt);
  std::ofstream table(dir / "witness_batch.csv");
  const std::string header =
      "index,d,eps,low_rank,low_norm,low_bound,low_residual,high_rank,high_norm,high_bound,"
      "high_residual\n";
  out << header;
  table << header;
  bool ok = true;
  for (long i = 0; i < count; ++i) {
    const int d = rnd.integer(1, max_dim);
    const Matrix u = rnd.contraction(d, max_norm);
    for (double eps : eps_list) {
      std::ostringstream row;
      row << i << ',' << d << ',' << format_decimal(eps);
      try {
        const auto low = low_defect_contraction(u, eps);
        double low_res = 0;
        if (low.rank > 0) {
          const auto cw = connectivity_witness(u, eps, rnd.gaussian_vector(d));
          low_res = std::max(cw.image_residual, cw.projection_residual);
        }
        const auto high = high_defect_contraction(u, eps);
        double high_res = 0;
        if (high.rank > 0)
          high_res = annihilation_witness(u, eps, rnd.gaussian_vector(d)).residual;
        row << ',' << low.rank << ',' << format_decimal(low.norm) << ','
            << format_decimal(low.bound) << ',' << format_decimal(low_res) << ',' << high.rank
            << ',' << format_decimal(high.norm) << ',' << format_decimal(high.bound) << ','
            << format_decimal(high_res);
      } catch (const BoundaryEigenvalue &) {
        row << ",boundary,,,,,,,";
      } catch (const NumericError &e) {
        ok = false;
        row << ",FAILED: " << e.what() << ",,,,,,,";
      }
      row << '\n';
      out << row.str();
      table << row.str();
    }
  }
  return ok ? kOk : kNumericError;
}

int cmd_witness(const Options &opt, std::ostream &out) {
  const Config c = load_config(opt);
  if (c.has("batch"))
    return witness_batch(opt, c, out);

  Matrix s;
  int m = 1;
  if (c.has("S")) {
    s = c.get_matrix("S");
    m = static_cast<int>(c.get_int_or("m", 1));
    if (m < 1)
      throw io::ParseError("m must be positive");
  } else {
    s = c.get_matrix("U");
  }
  const Matrix u = matrix_power(s, m);
  const double eps = c.get_double("eps");
  if (!c.has("h") && !c.has("u"))
    throw io::ParseError("witness needs h (low-defect) and/or u (high-defect)");

  const fs::path dir = output_dir(opt);
  io::write_matrix_csv(dir / "S.csv", s);
  const double target_r = c.get_double_or("target_r", 1e-3);

  std::vector<WitnessOutputs> results;
  if (c.has("h")) {
    const auto cw = connectivity_witness(u, eps, c.get_vector("h"));
    results.push_back({"low-defect", cw.t(), cw.w, cw.e, cw.witness(m),
                       {{"image_residual", cw.image_residual},
                        {"projection_residual", cw.projection_residual}},
                       cw.certificate.norm, cw.certificate.bound, cw.certificate.rank});
  }
  if (c.has("u")) {
    const auto aw = annihilation_witness(u, eps, c.get_vector("u"));
    results.push_back({"high-defect", aw.t(), aw.w, aw.e, aw.witness(m),
                       {{"annihilation_residual", aw.residual}},
                       aw.certificate.norm, aw.certificate.bound, aw.certificate.rank});
  }

  std::ofstream report(dir / "residuals.txt");
  for (const auto &r : results) {
    // Validate against the witnessed system before publishing it.
    const auto sys = build_ifs(SwConfig<double>{s, r.t, r.w});
    attach_witness(sys, r.witness);
    write_witness_outputs(dir, r, target_r);
    std::ostringstream text;
    text << r.name << " rank=" << r.rank << " norm=" << format_decimal(r.norm)
         << " bound=" << format_decimal(r.bound);
    for (const auto &[name, value] : r.residuals)
      text << ' ' << name << '=' << format_decimal(value);
    text << '\n';
    out << text.str();
    report << text.str();
  }
  return kOk;
}

int cmd_sweep(const Options &opt, std::ostream &out) {
  const Config c = load_config(opt);
  const Matrix s = c.get_matrix("S");
  const Matrix t = c.get_matrix("T");

  SweepGrid<double> grid;
  grid.origin = c.has("origin") ? c.get_vector("origin") : Vector::Zero(s.rows());
  for (int k = 1; k <= 2; ++k) {
    const std::string axis = "axis" + std::to_string(k);
    if (!c.has(axis))
      break;
    GridAxis<double> a;
    a.direction = c.get_vector(axis);
    const auto range = c.get_doubles("range" + std::to_string(k));
    if (range.size() != 2)
      throw io::ParseError("range" + std::to_string(k) + " must be lo,hi");
    a.lo = range[0];
    a.hi = range[1];
    a.count = static_cast<int>(c.get_int("count" + std::to_string(k)));
    if (a.count < 0)
      throw io::ParseError("count" + std::to_string(k) + " must be nonnegative");
    grid.axes.push_back(a);
  }
  if (grid.axes.empty())
    throw io::ParseError("sweep needs at least axis1/range1/count1");

  SweepParams<double> params;
  params.target_r = c.get_double_or("target_r", 1e-3);
  params.attractor = attractor_options(c);
  params.n_max = static_cast<int>(c.get_int_or("n_max", 8));
  params.far_threshold = c.get_double_or("far_threshold", 0.1);
  params.threads = std::max(1u, opt.threads);
  if (params.n_max < 1)
    throw io::ParseError("n_max must be positive");

  const auto report = sweep(s, t, grid, params);
  const fs::path dir = output_dir(opt);
  {
    std::ofstream csv(dir / "sweep.csv", std::ios::binary);
    io::write_sweep_csv(csv, report);
  }
  if (grid.axes.size() == 2) {
    std::ofstream pgm(dir / "sweep.pgm", std::ios::binary);
    io::write_sweep_pgm(pgm, report);
  }
  io::write_sweep_summary(out, report);
  return kOk;
}

int cmd_operator_report(const Options &opt, std::ostream &out) {
  const Config c = load_config(opt);
  const Matrix u = c.has("U") ? c.get_matrix("U") : c.get_matrix("A");
  detail::require_square("operator-report", u);
  const std::vector<double> eps_list = c.has("eps") ? c.get_doubles("eps")
                                                    : std::vector<double>{0.1, 0.5};
  const double tau = c.get_double_or("tau", 1e-6);

  std::ostringstream r;
  const double norm = operator_norm(u);
  r << "dimension=" << u.rows() << '\n';
  r << "norm=" << format_decimal(norm) << '\n';
  r << "numerical_rank tau=" << format_decimal(tau) << " rank=" << numerical_rank(u, tau) << '\n';

  const auto spec = symmetric_eigen(defect_operator(u));
  r << "defect_spectrum=";
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k)
    r << (k ? "," : "") << format_decimal(spec.eigenvalues(k));
  r << '\n';

  if (norm < 1.0) {
    for (double eps : eps_list) {
      r << "eps=" << format_decimal(eps);
      try {
        if (eps < 1.0) {
          const auto low = low_defect_contraction(u, eps);
          r << " low_rank=" << low.rank << " low_norm=" << format_decimal(low.norm)
            << " low_bound=" << format_decimal(low.bound);
        } else {
          r << " low_rank=n/a";
        }
        const auto high = high_defect_contraction(u, eps);
        r << " high_rank=" << high.rank << " high_norm=" << format_decimal(high.norm)
          << " high_bound=" << format_decimal(high.bound);
      } catch (const BoundaryEigenvalue &) {
        r << " boundary_eigenvalue";
      }
      r << '\n';
    }
    r << "corollary_residual=" << format_decimal(corollary_217_residual(u)) << '\n';
  } else {
    r << "contractions=n/a (norm >= 1)\n";
  }
  try {
    r << "flip_residual=" << format_decimal(flip_identity_residual(u)) << '\n';
  } catch (const NumericError &) {
    r << "flip_residual=n/a (singular)\n";
  }

  out << r.str();
  const fs::path dir = output_dir(opt);
  std::ofstream(dir / "operator_report.txt") << r.str();
  return kOk;
}

void add_common(CLI::App *sub, Options &opt) {
  sub->add_option("--config", opt.config, "key=value configuration file");
  sub->add_option("--out", opt.out_dir, "output directory");
  sub->add_option("--threads", opt.threads, "worker threads");
  sub->add_option("--seed", opt.seed, "seed for randomized suites");
  sub->add_option("overrides", opt.overrides, "key=value overrides");
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"ifslab: certified attractors and connectivity for affine IFSs"};
  app.require_subcommand(1);
  Options opt;

  auto *attractor_cmd = app.add_subcommand("attractor", "certified attractor approximation");
  auto *classify_cmd = app.add_subcommand("classify", "connectivity verdict");
  auto *witness_cmd = app.add_subcommand("witness", "connectivity witness constructions");
  auto *sweep_cmd = app.add_subcommand("sweep", "classification sweep over w");
  auto *report_cmd = app.add_subcommand("operator-report", "operator diagnostics");
  for (auto *sub : {attractor_cmd, classify_cmd, witness_cmd, sweep_cmd, report_cmd})
    add_common(sub, opt);
  classify_cmd->add_option("--witness", opt.witness, "witness file from `ifslab witness`");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*attractor_cmd)
      return cmd_attractor(opt, out);
    if (*classify_cmd)
      return cmd_classify(opt, out);
    if (*witness_cmd)
      return cmd_witness(opt, out);
    if (*sweep_cmd)
      return cmd_sweep(opt, out);
    if (*report_cmd)
      return cmd_operator_report(opt, out);
  } catch (const InputError &e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError &e) {
    err << "error: " << e.what() << '\n';
    return kNumericError;
  } catch (const DegenerateError &e) {
    err << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

} // namespace ifslab::cli
