#include "concavlab/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace concavlab {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void config_fail_at(const std::string& text, std::size_t byte,
                                 const std::string& what) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  fail("config-parse",
       "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
}

Point parse_point(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2)
    fail("config-parse", std::string(what) + " must be a [x, y] pair");
  return Point(j[0].get<double>(), j[1].get<double>());
}

ConvexDomain parse_domain(const nlohmann::json& j) {
  std::string shape = j.value("shape", "disk");
  nlohmann::json p = j.value("params", nlohmann::json::object());
  if (shape == "disk")
    return ConvexDomain::disk(p.contains("center") ? parse_point(p["center"], "center")
                                                   : Point(0, 0),
                              p.value("radius", 1.0));
  if (shape == "ellipse")
    return ConvexDomain::ellipse(p.contains("center") ? parse_point(p["center"], "center")
                                                      : Point(0, 0),
                                 p.value("a", 1.0), p.value("b", 1.0));
  if (shape == "superellipse")
    return ConvexDomain::superellipse(
        p.contains("center") ? parse_point(p["center"], "center") : Point(0, 0),
        p.value("a", 1.0), p.value("b", 1.0), p.value("p", 4));
  if (shape == "square")
    return ConvexDomain::square(p.contains("corner") ? parse_point(p["corner"], "corner")
                                                     : Point(0, 0),
                                p.value("side", 1.0));
  fail("config-parse", "unknown shape '" + shape + "'");
}

}  // namespace

ProblemSpec ExperimentConfig::problem(double eps_value) const {
  ProblemSpec spec;
  spec.domain = domain;
  spec.resolution = resolution;
  spec.coeffs = coeffs;
  spec.eps = eps_value;
  spec.nonlinearity = nonlinearity;
  spec.controls = solver;
  return spec;
}

DeficitOptions ExperimentConfig::deficit_options(double h) const {
  DeficitOptions opts;
  opts.lambda_grid = deficit.lambda_grid;
  opts.top_k = deficit.top_k;
  opts.threads = threads;
  opts.rho_frac = deficit.rho_frac;
  if (deficit.rho >= 0.0) {
    opts.rho = deficit.rho;
  } else {
    // The log transform blows up at the boundary, so its default band is
    // wider; both floors are resolution-independent fractions of the inradius.
    double base = nonlinearity.kind == NonlinearitySpec::Kind::EigenPerturbed ? 5.0 : 3.0;
    opts.rho = std::max(base * h, deficit.rho_frac * domain.inradius());
  }
  return opts;
}

ExperimentConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    config_fail_at(text, e.byte, e.what());
  }

  ExperimentConfig cfg;
  try {
    if (j.contains("domain")) cfg.domain = parse_domain(j["domain"]);
    cfg.resolution = j.value("grid", nlohmann::json::object()).value("n", 65);

    if (j.contains("coefficients")) {
      const auto& c = j["coefficients"];
      cfg.coeffs = CoefficientSet(
          Expr::parse(c.value("a", "1")), Expr::parse(c.value("alpha11", "1")),
          Expr::parse(c.value("alpha12", "0")), Expr::parse(c.value("alpha22", "1")),
          c.value("zeta", 0.5));
    }

    if (j.contains("nonlinearity")) {
      const auto& n = j["nonlinearity"];
      std::string type = n.value("type", "power");
      if (type == "power") {
        cfg.nonlinearity.kind = NonlinearitySpec::Kind::Power;
        cfg.nonlinearity.beta = n.value("beta", 0.0);
      } else if (type == "eigen_perturbed") {
        cfg.nonlinearity.kind = NonlinearitySpec::Kind::EigenPerturbed;
        cfg.nonlinearity.phi = phi_from_name(n.value("phi", "one"));
        cfg.nonlinearity.gamma = n.value("gamma", 0.0);
        cfg.nonlinearity.eps_phi = n.value("eps_phi", 0.1);
      } else {
        fail("config-parse", "unknown nonlinearity '" + type + "'");
      }
    }

    if (j.contains("solver")) {
      cfg.solver.tol = j["solver"].value("tol", 1e-10);
      cfg.solver.max_iter = j["solver"].value("max_iter", 50);
      cfg.solver.damping = j["solver"].value("damping", 1.0);
      cfg.solver.u_floor = j["solver"].value("u_floor", 1e-12);
    }
    if (j.contains("deficit")) {
      cfg.deficit.lambda_grid = j["deficit"].value("lambda_grid", 9);
      cfg.deficit.top_k = j["deficit"].value("top_k", 16);
      cfg.deficit.rho = j["deficit"].value("rho", -1.0);
      cfg.deficit.rho_frac = j["deficit"].value("rho_frac", 0.05);
    }
    if (j.contains("audits")) {
      cfg.audits.theorem1 = j["audits"].value("theorem1", true);
      cfg.audits.theorem2 = j["audits"].value("theorem2", true);
      cfg.audits.propositions = j["audits"].value("propositions", true);
      cfg.audits.slack = j["audits"].value("slack", 0.05);
    }
    cfg.eps = j.value("eps", 0.0);
    if (j.contains("sweep")) {
      for (double v : j["sweep"].value("eps", std::vector<double>{})) cfg.sweep_eps.push_back(v);
    }
    cfg.output = j.value("output", "out");
    cfg.seed = j.value("seed", 0LL);
    cfg.threads = j.value("threads", 0);
  } catch (const nlohmann::json::exception& e) {
    fail("config-parse", e.what());
  }

  // Validation that does not need a solve.
  cfg.problem(cfg.eps).validate();
  if (!cfg.sweep_eps.empty()) {
    if (cfg.sweep_eps.size() < 4)
      fail("config-parse", "sweep needs at least 4 eps values");
    for (std::size_t k = 0; k < cfg.sweep_eps.size(); ++k) {
      if (!(cfg.sweep_eps[k] > 0)) fail("config-parse", "sweep eps must be positive");
      if (k && !(cfg.sweep_eps[k] > cfg.sweep_eps[k - 1]))
        fail("config-parse", "sweep eps must be strictly ascending");
    }
  }
  if (cfg.deficit.lambda_grid < 3) fail("config-parse", "lambda_grid must be >= 3");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("config-parse", "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

RunResult run_instance(const ExperimentConfig& cfg, double eps_value) {
  ProblemSpec spec = cfg.problem(eps_value);
  auto [u, srep] = solve(spec);

  bool power = cfg.nonlinearity.kind == NonlinearitySpec::Kind::Power;
  ScalarField f = power ? transform_power(u, cfg.nonlinearity.beta) : transform_log(u);
  ScalarField v = negate(f);

  DeficitOptions dopts = cfg.deficit_options(u.grid().h);
  DeficitReport deficit = max_deficit(f, dopts);

  EnvelopeResult env = hyers_ulam_witness(f, deficit.deficit);

  BFunction bfun = power
                       ? BFunction::power_transform(cfg.coeffs, eps_value, cfg.nonlinearity.beta)
                       : BFunction::log_transform(cfg.coeffs, eps_value, cfg.nonlinearity.phi,
                                                  cfg.nonlinearity.gamma,
                                                  cfg.nonlinearity.eps_phi);

  RunResult out{std::move(u),   srep, std::move(f), deficit, std::move(env),
                TheoremAudit{}, TheoremAudit{},     PropositionRecord{}};
  out.floor = 10.0 * out.transform.grid().h * out.transform.grid().h * out.transform.max_abs();
  if (cfg.audits.theorem1) out.audit1 = audit_theorem1(v, bfun, deficit, cfg.audits.slack);
  if (cfg.audits.theorem2) out.audit2 = audit_theorem2(v, bfun, deficit, cfg.audits.slack);
  if (cfg.audits.propositions) out.props = audit_propositions(spec, out.u, deficit);
  return out;
}

namespace {

void fit_rows(SweepReport& rep) {
  std::vector<std::pair<double, double>> pts;
  for (const SweepRow& r : rep.rows)
    if (!r.censored && !r.diverged && r.eps_meas > 0 && r.deficit > 0)
      pts.emplace_back(std::log(r.eps_meas), std::log(r.deficit));
  if (rep.rows.empty() || pts.empty()) {
    rep.fit_status = "all-censored";
    return;
  }
  if (pts.size() < 3) {
    rep.fit_status = pts.size() == rep.rows.size() ? "insufficient-rows" : "all-censored";
    return;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(pts.size());
  double denom = n * sxx - sx * sx;
  rep.slope = (n * sxy - sx * sy) / denom;
  rep.intercept = (sy - rep.slope * sx) / n;
  double ss = 0;
  for (auto [x, y] : pts) {
    double e = y - (rep.slope * x + rep.intercept);
    ss += e * e;
  }
  rep.fit_residual = std::sqrt(ss / n);
  rep.fit_status = "ok";
}

}  // namespace

SweepReport run_sweep(const ExperimentConfig& cfg) {
  if (cfg.sweep_eps.size() < 4) fail("config-parse", "sweep needs at least 4 eps values");

  SweepReport rep;
  rep.rows.resize(cfg.sweep_eps.size());

  int threads = effective_threads(cfg.threads);
  int row_workers = std::max(1, std::min<int>(threads, static_cast<int>(cfg.sweep_eps.size())));
  ExperimentConfig row_cfg = cfg;
  row_cfg.threads = std::max(1, threads / row_workers);

  parallel_chunks(cfg.sweep_eps.size(), row_workers, [&](std::size_t lo, std::size_t hi, int) {
    for (std::size_t k = lo; k < hi; ++k) {
      SweepRow& row = rep.rows[k];
      row.eps = cfg.sweep_eps[k];
      auto t0 = std::chrono::steady_clock::now();
      try {
        RunResult r = run_instance(row_cfg, row.eps);
        row.eps_meas = r.props.eps_meas;
        row.deficit = r.deficit.deficit;
        row.envelope_distance = r.envelope.distance;
        row.iterations = r.solve_report.iterations;
        row.censored = row.deficit <= r.floor;
        row.ratio = r.props.ratio_defined ? r.props.ratio : 0.0;
        row.audit1 = cfg.audits.theorem1 ? r.audit1.status : "skipped";
        row.audit2 = cfg.audits.theorem2 ? r.audit2.status : "skipped";
        row.detail["deficit"] = r.deficit.to_json();
        if (cfg.audits.theorem1) row.detail["audit_theorem1"] = r.audit1.to_json();
        if (cfg.audits.theorem2) row.detail["audit_theorem2"] = r.audit2.to_json();
      } catch (const Error& e) {
        if (e.code() == "newton-divergence" || e.code() == "positivity-loss") {
          row.diverged = true;
          row.error = e.code();
        } else {
          throw;
        }
      }
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  });

  for (const SweepRow& r : rep.rows)
    if (r.audit1 == "fail" || r.audit2 == "fail") ++rep.audit_failures;
  // Weak monotonicity: inversions beyond 10% are flagged, not failed.
  const SweepRow* prev = nullptr;
  for (SweepRow& r : rep.rows) {
    if (r.censored || r.diverged) continue;
    if (prev && r.deficit < 0.9 * prev->deficit) r.monotonicity_warning = true;
    prev = &r;
  }
  fit_rows(rep);
  return rep;
}

nlohmann::json SweepReport::to_json() const {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const SweepRow& r : rows) {
    nlohmann::json rj;
    rj["eps"] = r.eps;
    rj["eps_meas"] = r.eps_meas;
    rj["deficit"] = r.deficit;
    rj["envelope_distance"] = r.envelope_distance;
    rj["ratio"] = r.ratio;
    rj["audit_theorem1"] = r.audit1;
    rj["audit_theorem2"] = r.audit2;
    rj["iterations"] = r.iterations;
    rj["censored"] = r.censored;
    rj["diverged"] = r.diverged;
    rj["monotonicity_warning"] = r.monotonicity_warning;
    if (!r.error.empty()) rj["error"] = r.error;
    rj["detail"] = r.detail;
    j["rows"].push_back(rj);
  }
  j["slope"] = slope;
  j["intercept"] = intercept;
  j["fit_residual"] = fit_residual;
  j["fit_status"] = fit_status;
  j["audit_failures"] = audit_failures;
  return j;
}

std::string SweepReport::to_csv() const {
  std::ostringstream os;
  os << "#SWEEP v1\n";
  os << "eps,eps_meas,deficit,envelope_distance,ratio,audit_theorem1,audit_theorem2,"
        "iterations,censored,diverged,monotonicity_warning,error\n";
  for (const SweepRow& r : rows) {
    os << fmt17(r.eps) << "," << fmt17(r.eps_meas) << "," << fmt17(r.deficit) << ","
       << fmt17(r.envelope_distance) << "," << fmt17(r.ratio) << "," << r.audit1 << ","
       << r.audit2 << "," << r.iterations << "," << (r.censored ? 1 : 0) << ","
       << (r.diverged ? 1 : 0) << "," << (r.monotonicity_warning ? 1 : 0) << "," << r.error
       << "\n";
  }
  os << "#fit," << fit_status << "," << fmt17(slope) << "," << fmt17(intercept) << ","
     << fmt17(fit_residual) << "\n";
  return os.str();
}

BaselineReport run_baselines(int resolution, int threads) {
  BaselineReport rep;
  auto add = [&](const std::string& name, double value, double bound, bool greater) {
    BaselineRow row{name, value, bound, greater, greater ? value > bound : value <= bound};
    rep.all_pass = rep.all_pass && row.pass;
    rep.rows.push_back(row);
  };

  // (i) torsion on the unit disk vs the closed form (1 - |x|^2)/4.
  ExperimentConfig cfg;
  cfg.resolution = resolution;
  cfg.threads = threads;
  cfg.nonlinearity.kind = NonlinearitySpec::Kind::Power;
  cfg.nonlinearity.beta = 0.0;
  cfg.coeffs = CoefficientSet();
  {
    auto [u, srep] = solve(cfg.problem(0.0));
    const Grid& g = u.grid();
    double err = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (g.mask(i, j)) {
          Point p = g.node(i, j);
          err = std::max(err, std::abs(u.value(i, j) - 0.25 * (1.0 - p.squaredNorm())));
        }
    add("torsion-disk-max-error", err, 5e-3, false);

    // (ii) sqrt u stays concave up to the discretization floor.
    ScalarField root = transform_power(u, 0.0);
    DeficitOptions dopts = cfg.deficit_options(g.h);
    dopts.threads = threads;
    DeficitReport dr = max_deficit(root, dopts);
    add("torsion-sqrt-deficit", dr.deficit, 5e-3, false);
  }

  // (iii) first eigenfunction of the square: u is visibly non-concave while
  // log u is concave on the inner parallel set.
  {
    ConvexDomain sq = ConvexDomain::square(Point(0, 0), M_PI);
    auto grid = Grid::over_domain(sq, resolution);
    ScalarField u = ScalarField::from_function(
        grid, [](const Point& p) { return std::sin(p.x()) * std::sin(p.y()); }, 0.0);
    DeficitOptions opts;
    opts.threads = threads;
    DeficitReport du = max_deficit(u, opts);
    add("square-eigenfunction-u-deficit", du.deficit, 0.05, true);

    ScalarField logu = transform_log(u);
    DeficitOptions lopts;
    lopts.threads = threads;
    lopts.rho = 5.0 * grid->h;
    DeficitReport dl = max_deficit(logu, lopts);
    add("square-eigenfunction-log-deficit", dl.deficit, 1e-2, false);
  }

  // (iv) Kennington power: u^{1/4} for beta = 1/2, isotropic disk.
  {
    ExperimentConfig kcfg = cfg;
    kcfg.nonlinearity.beta = 0.5;
    auto [u, srep] = solve(kcfg.problem(0.0));
    ScalarField f = transform_power(u, 0.5);
    DeficitOptions dopts = kcfg.deficit_options(u.grid().h);
    dopts.threads = threads;
    DeficitReport dr = max_deficit(f, dopts);
    double floor = 10.0 * u.grid().h * u.grid().h * f.max_abs();
    add("kennington-quarter-power-deficit", dr.deficit, floor, false);
  }

  return rep;
}

nlohmann::json BaselineReport::to_json() const {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const BaselineRow& r : rows) {
    j["rows"].push_back({{"name", r.name},
                         {"value", r.value},
                         {"bound", r.bound},
                         {"comparison", r.greater_than ? ">" : "<="},
                         {"pass", r.pass}});
  }
  j["all_pass"] = all_pass;
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) fail("io-error", "cannot open " + path + " for writing");
  out << content;
}

std::string sweep_svg(const SweepReport& rep) {
  std::vector<std::pair<double, double>> pts;
  for (const SweepRow& r : rep.rows)
    if (!r.censored && !r.diverged && r.eps_meas > 0 && r.deficit > 0)
      pts.emplace_back(std::log10(r.eps_meas), std::log10(r.deficit));

  const double W = 480, H = 360, m = 50;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (pts.empty()) {
    os << "<text x=\"" << W / 2 << "\" y=\"" << H / 2
       << "\" text-anchor=\"middle\">all rows censored</text>\n</svg>\n";
    return os.str();
  }
  double xlo = pts[0].first, xhi = xlo, ylo = pts[0].second, yhi = ylo;
  for (auto [x, y] : pts) {
    xlo = std::min(xlo, x);
    xhi = std::max(xhi, x);
    ylo = std::min(ylo, y);
    yhi = std::max(yhi, y);
  }
  if (xhi - xlo < 1e-12) xhi = xlo + 1;
  if (yhi - ylo < 1e-12) yhi = ylo + 1;
  auto sx = [&](double x) { return m + (x - xlo) / (xhi - xlo) * (W - 2 * m); };
  auto sy = [&](double y) { return H - m - (y - ylo) / (yhi - ylo) * (H - 2 * m); };

  os << "<line x1=\"" << m << "\" y1=\"" << H - m << "\" x2=\"" << W - m << "\" y2=\""
     << H - m << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << H - m
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\" font-size=\"12\">log10 eps_meas</text>\n";
  os << "<text x=\"14\" y=\"" << H / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " << H / 2
     << ")\">log10 deficit</text>\n";
  for (auto [x, y] : pts)
    os << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
  if (rep.fit_status == "ok") {
    // The fit is in natural logs; convert to log10 for plotting.
    double ln10 = std::log(10.0);
    auto fit_y = [&](double x10) { return (rep.slope * (x10 * ln10) + rep.intercept) / ln10; };
    os << "<line x1=\"" << sx(xlo) << "\" y1=\"" << sy(fit_y(xlo)) << "\" x2=\"" << sx(xhi)
       << "\" y2=\"" << sy(fit_y(xhi)) << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << W - m << "\" y=\"" << m
       << "\" text-anchor=\"end\" font-size=\"12\">slope " << rep.slope << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail("io-error", "cannot create directory " + dir);
}

nlohmann::json solve_report_json(const SolveReport& r, const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  j["min_u"] = r.min_u;
  j["shortley_weller_used"] = r.shortley_weller_used;
  j["residual_history"] = r.residual_history;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace

nlohmann::json cmd_solve(const ExperimentConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  auto [u, srep] = solve(cfg.problem(cfg.eps));
  write_field(u, out_dir + "/u.field");
  nlohmann::json j = solve_report_json(srep, cfg);
  write_text_file(out_dir + "/solve_report.json", j.dump(2) + "\n");
  write_text_file(out_dir + "/timings.log",
                  "solve_wall_seconds " + std::to_string(srep.wall_seconds) + "\n");
  return j;
}

nlohmann::json cmd_deficit(const ExperimentConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  RunResult r = run_instance(cfg, cfg.eps);
  write_field(r.u, out_dir + "/u.field");
  write_field(r.transform, out_dir + "/transform.field");
  nlohmann::json j = r.deficit.to_json();
  j["seed"] = cfg.seed;
  write_text_file(out_dir + "/deficit.json", j.dump(2) + "\n");
  return j;
}

nlohmann::json cmd_envelope(const ExperimentConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  RunResult r = run_instance(cfg, cfg.eps);
  write_field(r.transform, out_dir + "/transform.field");
  write_field(r.envelope.envelope, out_dir + "/envelope.field");
  nlohmann::json j;
  j["distance"] = r.envelope.distance;
  j["delta"] = r.envelope.delta;
  if (r.envelope.ratio_defined) j["ratio"] = r.envelope.ratio;
  j["facet_count"] = r.envelope.facet_count;
  j["consistent"] = r.envelope.consistent;
  j["seed"] = cfg.seed;
  write_text_file(out_dir + "/envelope.json", j.dump(2) + "\n");
  return j;
}

nlohmann::json cmd_check(const ExperimentConfig& cfg, const std::string& out_dir,
                         const std::string& which) {
  ensure_dir(out_dir);
  nlohmann::json j;
  if (which == "remark") {
    j["witnesses"] = nlohmann::json::array();
    for (const char* src : {"1 + x", "exp(x)", "2 + sin(x)", "1"}) {
      RemarkWitness w = audit_remark_noconc(Expr::parse(src), 0.0, 1.0);
      j["witnesses"].push_back({{"g0", src},
                                {"found", w.found},
                                {"value", w.value},
                                {"x1", w.x1},
                                {"x3", w.x3},
                                {"s1", w.s1},
                                {"s3", w.s3},
                                {"lambda", w.lambda}});
    }
    write_text_file(out_dir + "/remark.json", j.dump(2) + "\n");
    return j;
  }

  RunResult r = run_instance(cfg, cfg.eps);
  bool failed = false;
  if (which == "1" || which == "") {
    j["audit_theorem1"] = r.audit1.to_json();
    failed = failed || r.audit1.status == "fail";
  }
  if (which == "2" || which == "") {
    j["audit_theorem2"] = r.audit2.to_json();
    failed = failed || r.audit2.status == "fail";
  }
  if (which == "props" || which == "") {
    j["propositions"] = {{"eps_meas", r.props.eps_meas},
                         {"deficit", r.props.deficit},
                         {"ratio", r.props.ratio},
                         {"ratio_defined", r.props.ratio_defined}};
    if (!r.props.warning.empty()) j["propositions"]["warning"] = r.props.warning;
  }
  j["deficit"] = r.deficit.to_json();
  write_text_file(out_dir + "/check.json", j.dump(2) + "\n");
  if (failed) fail("audit-inequality-failure", "a theorem inequality failed its margin");
  return j;
}

nlohmann::json cmd_sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  SweepReport rep = run_sweep(cfg);
  nlohmann::json j = rep.to_json();
  j["seed"] = cfg.seed;
  write_text_file(out_dir + "/sweep.json", j.dump(2) + "\n");
  write_text_file(out_dir + "/sweep.csv", rep.to_csv());
  {
    std::ostringstream dat;
    for (const SweepRow& r : rep.rows)
      if (!r.censored && !r.diverged)
        dat << fmt17(r.eps_meas) << " " << fmt17(r.deficit) << "\n";
    write_text_file(out_dir + "/sweep_deficit.dat", dat.str());
  }
  write_text_file(out_dir + "/sweep.svg", sweep_svg(rep));
  {
    std::ostringstream tl;
    for (const SweepRow& r : rep.rows)
      tl << "eps " << r.eps << " wall_seconds " << r.wall_seconds << "\n";
    write_text_file(out_dir + "/timings.log", tl.str());
  }
  if (rep.audit_failures > 0)
    fail("audit-inequality-failure", std::to_string(rep.audit_failures) + " sweep rows failed");
  return j;
}

int exit_code_for(const std::string& code) {
  if (code == "config-parse" || code == "invalid-domain" || code == "invalid-grid" ||
      code == "invalid-nonlinearity" || code == "beta-one-rejected" ||
      code == "invalid-options" || code == "malformed-header" ||
      code == "value-count-mismatch" || code == "io-error")
    return 2;
  if (code == "newton-divergence" || code == "positivity-loss" ||
      code == "ellipticity-violation" || code == "nonpositive-source" ||
      code == "positivity" || code == "empty-mask")
    return 3;
  if (code == "audit-inequality-failure") return 4;
  return 1;
}

}  // namespace concavlab
