#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <thread>

#include "config.hpp"
#include "floquet.hpp"
#include "gallery.hpp"

namespace fg {

namespace {

constexpr std::size_t kDefaultPoints = 101;
constexpr std::size_t kRiccatiPoints = 201;
constexpr double kFloquetTol = 1e-6;
constexpr double kGaugeTol = 1e-8;
constexpr double kTransportTol = 1e-6;
constexpr double kRiccatiResidualTol = 1e-5;
constexpr double kAlphaTol = 1e-6;
constexpr double kExamplesTol = 1e-8;
constexpr double kLiouvilleTol = 1e-6;

class Output {
 public:
  Output(std::filesystem::path dir, std::vector<std::string>& files) : dir_(std::move(dir)), files_(files) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("", "cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void text(const std::string& name, const std::string& body) {
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    f << body;
    if (!f) throw ConfigError("", "cannot write '" + (dir_ / name).string() + "'");
    files_.push_back(name);
  }

  void json(const std::string& name, const Json& j) { text(name, j.dump(2) + "\n"); }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows, const std::vector<std::string>& tail = {}) {
    std::string body;
    for (std::size_t i = 0; i < header.size(); ++i) body += (i ? "," : "") + header[i];
    body += "\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t i = 0; i < rows[r].size(); ++i) body += (i ? "," : "") + format_csv_number(rows[r][i]);
      if (!tail.empty()) body += "," + tail[r];
      body += "\n";
    }
    text(name, body);
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string>& files_;
};

std::vector<std::string> matrix_header(const std::string& symbol, std::size_t n) {
  std::vector<std::string> h{"t"};
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j)
      h.push_back(symbol + std::to_string(i) + (n >= 10 ? "_" : "") + std::to_string(j));
  return h;
}

std::vector<double> matrix_row(double t, const SquareMatrix& m) {
  std::vector<double> row{t};
  row.insert(row.end(), m.values().begin(), m.values().end());
  return row;
}

Json matrix_json(const SquareMatrix& m) { return matrix_to_json(m.values(), m.size()); }

std::vector<double> output_grid(Interval d, const CommandOptions& o, std::size_t fallback) {
  const std::size_t n = o.dense.value_or(fallback);
  if (n < 2) throw ConfigError("", "--dense needs at least 2 points");
  return uniform_grid(d[0], d[1], n);
}

std::string verdict(const Report& r) { return r.passed() ? "verification passed" : "verification FAILED"; }

std::array<double, 2> require_span(const SystemConfig& c) {
  if (!c.span) throw ConfigError("/span", "required key is missing");
  return *c.span;
}

CommandResult finish(const Report& r, std::string summary, std::vector<std::string>& files) {
  CommandResult res;
  res.exit_code = r.passed() ? kExitOk : kExitVerificationFailed;
  res.message = std::move(summary);
  res.files = files;
  return res;
}

CommandResult floquet(const CommandOptions& o, Output& out, std::vector<std::string>& files) {
  const SystemConfig c = load_config(o.config, o.params);
  if (!c.period) throw ConfigError("/period", "required key is missing");
  const TimeMatrix a = c.system_matrix();
  FloquetOptions fo;
  fo.integrator = c.integrator.apply(floquet_integrator_defaults());
  const FloquetDecomposition dec = floquet_decompose(a, *c.period, fo);
  const double tol = o.tol.value_or(kFloquetTol);

  Report r = verify_decomposition(dec, a, tol, 100, fo.integrator);
  r.name = "floquet";
  r.add("liouville", liouville_residual(dec.phi, a, fo.integrator), kLiouvilleTol, "fundamental matrix nodes",
        "|det Phi - exp(int tr A)| / exp(int tr A)");
  r.data["period"] = dec.period;
  r.data["effective_period"] = dec.effective_period();
  r.data["doubled"] = dec.doubled;
  r.data["B"] = matrix_json(dec.B);

  const std::size_t n = a.size();
  out.json("B.json", {{"B", matrix_json(dec.B)},
                      {"doubled", dec.doubled},
                      {"period", dec.period},
                      {"effective_period", dec.effective_period()}});
  Json mono{{"period", dec.period}, {"monodromy", matrix_json(dec.monodromy)}};
  if (dec.doubled) mono["monodromy_effective"] = matrix_json(dec.monodromy_effective);
  out.json("monodromy.json", mono);
  Json mult = Json::array();
  for (const auto& z : dec.multipliers.eigenvalues)
    mult.push_back({{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}});
  out.json("multipliers.json", {{"multipliers", mult}});
  std::vector<std::vector<double>> rows;
  for (double t : output_grid({0.0, dec.effective_period()}, o, kDefaultPoints)) rows.push_back(matrix_row(t, dec.P.value(t)));
  out.csv("P.csv", matrix_header("P", n), rows);
  out.json("report.json", r.to_json());
  return finish(r, std::string("floquet: ") + (dec.doubled ? "period doubled, " : "") + verdict(r), files);
}

// First grid node where |det P| drops below the relative threshold, scanning
// forward from the span start.
Interval regular_domain(const TimeMatrix& p, Interval span, std::vector<std::string>& warnings, bool& trimmed) {
  const auto grid = uniform_grid(span[0], span[1], 2049);
  const double dn = static_cast<double>(p.size());
  double running = 0.0;
  double last_good = span[0];
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const SquareMatrix m = p.value(grid[k]);
    running = std::max(running, std::pow(max_norm(m), dn));
    const double det = determinant(m);
    if (!std::isfinite(det) || std::abs(det) < GaugeTransform::kSingularRatio * running) {
      if (k == 0) throw NearSingularError(det, grid[k], true, "gauge is singular at the span start");
      trimmed = true;
      warnings.push_back("gauge nearly singular near t = " + format_csv_number(grid[k]) + "; domain trimmed");
      return {span[0], last_good};
    }
    last_good = grid[k];
  }
  return span;
}

CommandResult gauge(const CommandOptions& o, Output& out, std::vector<std::string>& files) {
  const SystemConfig c = load_config(o.config, o.params);
  const TimeMatrix a = c.system_matrix();
  const std::size_t n = a.size();
  const auto span = require_span(c);
  const Interval ordered{std::min(span[0], span[1]), std::max(span[0], span[1])};
  Report r;
  r.name = "gauge";

  if (c.gauge_p) {
    const TimeMatrix p = c.gauge_matrix();
    bool trimmed = false;
    const Interval d = regular_domain(p, ordered, r.warnings, trimmed);
    const GaugeTransform g(p.restricted(d), d);
    const TimeMatrix a_hat = push_linear(a, g);
    const auto grid = output_grid(d, o, kDefaultPoints);
    const SquareMatrix target = c.target_b ? *c.target_b : a_hat.value(d[0]);
    r.add("constancy", constancy_deviation(a_hat, target, grid), o.tol.value_or(kGaugeTol),
          std::to_string(grid.size()) + " output points",
          c.target_b ? "||A_hat(t) - target_B||" : "||A_hat(t) - A_hat(t0)||");
    r.data["mode"] = "apply";
    r.data["domain"] = d;
    r.data["trimmed"] = trimmed;
    r.data["B"] = matrix_json(target);
    std::vector<std::vector<double>> rows;
    for (double t : grid) rows.push_back(matrix_row(t, a_hat.value(t)));
    out.csv("A_hat.csv", matrix_header("A_hat", n), rows);
    out.json("report.json", r.to_json());
    return finish(r, "gauge apply: " + verdict(r), files);
  }

  if (!c.target_b || !c.p0)
    throw ConfigError(c.target_b ? "/P0" : "/target_B", "gauge needs /gauge/P, or /target_B with /P0");
  const TransportSolution sol =
      solve_transport(a, *c.target_b, *c.p0, span, c.integrator.apply(floquet_integrator_defaults()));
  r.warnings = sol.warnings;
  const auto grid = output_grid(sol.domain, o, kDefaultPoints);
  const double tol = o.tol.value_or(kTransportTol);
  r.add("transport_residual", transport_residual(a, sol.gauge, *c.target_b, grid), tol,
        std::to_string(grid.size()) + " output points", "||P' - A P + P B|| on the dense solution");
  r.add("constancy", constancy_deviation(push_linear(a, sol.gauge), *c.target_b, grid), tol,
        std::to_string(grid.size()) + " output points", "||P^-1 A P - P^-1 P' - B||");
  r.data["mode"] = "solve";
  r.data["domain"] = sol.domain;
  r.data["trimmed"] = sol.trimmed;
  std::vector<std::vector<double>> rows;
  for (double t : grid) rows.push_back(matrix_row(t, sol.gauge.value(t)));
  out.csv("P.csv", matrix_header("P", n), rows);
  out.json("report.json", r.to_json());
  return finish(r, std::string("gauge solve: ") + (sol.trimmed ? "domain trimmed, " : "") + verdict(r), files);
}

CommandResult simulate(const CommandOptions& o, Output& out, std::vector<std::string>& files) {
  const SystemConfig c = load_config(o.config, o.params);
  const TimeMatrix a = c.system_matrix();
  const NonlinearTerm nl = c.nonlinear_term();
  if (!c.x0) throw ConfigError("/x0", "required key is missing");
  const auto span = require_span(c);
  const std::size_t n = a.size();
  const bool has_nl = c.nonlinear.has_value();
  VectorRhs rhs = [&](double t, std::span<const double> x, std::span<double> dx) {
    const SquareMatrix m = a.value(t);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += m(i, j) * x[j];
      dx[i] = s;
    }
    if (has_nl) {
      const std::vector<double> f = nl(t, x);
      for (std::size_t i = 0; i < n; ++i) dx[i] += f[i];
    }
  };
  const Trajectory tr = integrate_vector(rhs, *c.x0, span, c.integrator.apply({}));

  std::vector<std::string> header{"t"};
  for (std::size_t i = 1; i <= n; ++i) header.push_back("x" + std::to_string(i));
  std::vector<std::vector<double>> rows;
  auto add_row = [&](double t, std::span<const double> x) {
    std::vector<double> row{t};
    row.insert(row.end(), x.begin(), x.end());
    rows.push_back(std::move(row));
  };
  if (o.dense) {
    const Interval d{tr.t_begin(), tr.t_end()};
    for (double t : output_grid(d, o, kDefaultPoints)) add_row(t, tr.eval(t));
  } else {
    for (std::size_t i = 0; i < tr.size(); ++i) add_row(tr.times()[i], tr.state(i));
  }
  // Backward runs are written in the direction of integration.
  if (span[1] < span[0]) std::reverse(rows.begin(), rows.end());
  out.csv("trajectory.csv", header, rows);

  Report r;
  r.name = "simulate";
  r.data["span"] = span;
  r.data["nodes"] = tr.size();
  r.data["accepted_steps"] = tr.stats().accepted;
  r.data["rejected_steps"] = tr.stats().rejected;
  r.data["rhs_evaluations"] = tr.stats().rhs_evals;
  const auto last = tr.eval(span[1]);
  r.data["final_state"] = last;
  out.json("report.json", r.to_json());
  return finish(r, "simulate: " + std::to_string(tr.size()) + " nodes", files);
}

CommandResult riccati(const CommandOptions& o, Output& out, std::vector<std::string>& files) {
  const SystemConfig c = load_config(o.config, o.params);
  if (!c.riccati) throw ConfigError("/riccati", "required key is missing");
  const auto span = require_span(c);
  RiccatiOptions ro;
  ro.integrator = c.integrator.apply(RiccatiOptions::default_integrator());
  ro.continue_through_poles = o.continue_through_poles;
  const double tol = o.tol.value_or(kRiccatiResidualTol);

  Report r;
  r.name = "riccati";
  RiccatiSolution sol;
  std::size_t n = 1;
  if (c.riccati->matrix) {
    const MatrixRiccati m = c.matrix_riccati();
    n = m.size();
    sol = solve_matrix(m, span, ro);
    const auto grid = output_grid(sol.domain(), o, kRiccatiPoints);
    r.add("riccati_residual", riccati_residual(m, sol, grid), tol, std::to_string(grid.size()) + " output points",
          "||Y' - M11 Y - M12 + Y M21 Y + Y M22|| away from poles");
  } else {
    const ScalarRiccati s = c.scalar_riccati();
    sol = solve_scalar(s, span, ro);
    const auto grid = output_grid(sol.domain(), o, kRiccatiPoints);
    r.add("riccati_residual", riccati_residual(s, sol, grid), tol, std::to_string(grid.size()) + " output points",
          "|y' - f - g y - h y^2| away from poles");
    const auto alphas = c.alpha_expressions();
    if (alphas.size() >= 2) {
      const Report inv = alpha_invariance(s, alphas, span, kAlphaTol, kRiccatiPoints, 0.05, ro);
      for (const auto& chk : inv.checks) r.checks.push_back(chk);
      r.data["alpha_invariance"] = inv.data;
    }
  }
  r.warnings.insert(r.warnings.end(), sol.warnings.begin(), sol.warnings.end());

  const auto grid = output_grid(sol.domain(), o, kRiccatiPoints);
  const auto pieces = sol.pieces();
  std::vector<std::string> header = n == 1 ? std::vector<std::string>{"t", "y"} : matrix_header("Y", n);
  header.push_back("piece");
  std::vector<std::vector<double>> rows;
  std::vector<std::string> piece_col;
  for (double t : grid) {
    if (sol.near_pole(t, 1e-9)) continue;
    std::size_t piece = 0;
    while (piece + 1 < pieces.size() && t >= pieces[piece][1]) ++piece;
    rows.push_back(n == 1 ? std::vector<double>{t, sol.value(t)} : matrix_row(t, sol.matrix_value(t)));
    piece_col.push_back(std::to_string(piece));
  }
  if (span[1] < span[0]) {
    std::reverse(rows.begin(), rows.end());
    std::reverse(piece_col.begin(), piece_col.end());
  }
  out.csv("y.csv", header, rows, piece_col);

  r.data["mode"] = c.riccati->matrix ? "matrix" : "scalar";
  r.data["span"] = span;
  r.data["domain"] = sol.domain();
  r.data["poles"] = sol.poles();
  r.data["stopped_at_pole"] = sol.stopped_at_pole();
  r.data["continue_through_poles"] = o.continue_through_poles;

  CommandResult res = finish(r, "riccati: " + std::to_string(sol.poles().size()) + " pole(s), " + verdict(r), files);
  if (sol.stopped_at_pole()) {
    r.warnings.push_back("stopped at the pole t = " + format_csv_number(sol.poles().front()) +
                         "; pass --continue-through-poles to integrate through it");
    res.exit_code = kExitNumericFailure;
    res.message = "riccati: pole at t = " + format_csv_number(sol.poles().front()) + " inside the span";
  }
  out.json("report.json", r.to_json());
  res.files = files;
  return res;
}

unsigned worker_count(const CommandOptions& o, std::size_t jobs) {
  unsigned n = 0;
  if (o.threads) {
    n = *o.threads;
  } else if (const char* env = std::getenv("FLOQUET_GAUGE_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("", "FLOQUET_GAUGE_THREADS must be a positive integer");
    n = static_cast<unsigned>(v);
  } else {
    n = std::thread::hardware_concurrency();
  }
  return static_cast<unsigned>(std::clamp<std::size_t>(n == 0 ? 1 : n, 1, jobs));
}

ExampleParams example_params(const std::vector<std::string>& kvs) {
  ExampleParams p;
  for (const auto& kv : kvs) {
    const auto [key, value] = split_assignment(kv);
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end && *end == '\0')
      p.numbers[key] = v;
    else
      p.expressions[key] = value;
  }
  return p;
}

void write_k_table(Output& out, const Report& r) {
  if (!r.data.contains("k_discrepancy")) return;
  std::vector<std::vector<double>> rows;
  for (const auto& e : r.data["k_discrepancy"])
    rows.push_back({e["t"].get<double>(), e["max_abs_diff"].get<double>(), e["entry"][0].get<double>(),
                    e["entry"][1].get<double>(), e["derived"].get<double>(), e["stated"].get<double>()});
  out.csv(r.name + "_k_discrepancy.csv", {"t", "max_abs_diff", "row", "col", "derived", "stated"}, rows);
}

CommandResult examples(const CommandOptions& o, Output& out, std::vector<std::string>& files) {
  std::vector<std::string> names;
  if (o.example) {
    example_info(*o.example);
    names.push_back(*o.example);
  } else {
    if (!o.params.empty()) throw ConfigError("/params", "parameter overrides need a single example name");
    for (const auto& e : list_examples()) names.push_back(e.name);
  }
  const ExampleParams params = example_params(o.params);
  const double tol = o.tol.value_or(kExamplesTol);

  // Build first so parameter errors surface as config errors.
  std::vector<ExampleSpec> specs;
  for (const auto& name : names) specs.push_back(build_example(name, params));

  std::vector<Report> reports(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) reports[i] = verify_example(specs[i], tol);
  };
  const unsigned workers = worker_count(o, specs.size());
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  Json summary;
  summary["schema"] = "floquet-gauge/summary/1";
  summary["tol"] = tol;
  Json list = Json::array();
  std::size_t passed = 0;
  for (const auto& r : reports) {
    out.json(r.name + ".json", r.to_json());
    write_k_table(out, r);
    Json failed = Json::array();
    for (const auto& chk : r.checks)
      if (chk.assertable && !chk.passed) failed.push_back(chk.name);
    list.push_back({{"name", r.name},
                    {"topic", example_info(r.name).topic},
                    {"passed", r.passed()},
                    {"failed_checks", failed}});
    passed += r.passed();
  }
  summary["examples"] = std::move(list);
  summary["passed"] = passed == reports.size();
  out.json("summary.json", summary);

  CommandResult res;
  res.exit_code = passed == reports.size() ? kExitOk : kExitVerificationFailed;
  res.message = "examples: " + std::to_string(passed) + "/" + std::to_string(reports.size()) + " passed";
  res.files = files;
  return res;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::NearSingular:
    case ErrorCode::NoRealLogarithm:
    case ErrorCode::Integration:
    case ErrorCode::Convergence:
    case ErrorCode::OutOfRange:
      return kExitNumericFailure;
    default:
      return kExitConfigError;
  }
}

// Report left behind by a numerical failure.
void write_failure(const std::filesystem::path& dir, std::string_view command, const Error& e,
                   std::vector<std::string>& files) {
  Report r;
  r.name = std::string(command);
  r.add("completed", std::numeric_limits<double>::infinity(), 0.0, {}, e.what());
  r.data["error"] = e.what();
  if (const auto* ie = dynamic_cast<const IntegrationError*>(&e)) r.data["last_good_time"] = ie->last_good_time();
  if (const auto* ns = dynamic_cast<const NearSingularError*>(&e); ns && ns->has_time())
    r.data["singular_time"] = ns->time();
  try {
    Output out(dir, files);
    out.json("report.json", r.to_json());
  } catch (const Error&) {
  }
}

}  // namespace

std::string format_csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CommandResult run_command(std::string_view command, const CommandOptions& opts) {
  std::vector<std::string> files;
  try {
    if (opts.out.empty()) throw ConfigError("", "an output directory is required");
    if (command != "examples" && opts.config.empty()) throw ConfigError("", "a config file is required");
    if (opts.tol && !(*opts.tol > 0.0)) throw ConfigError("", "--tol must be positive");
    Output out(opts.out, files);
    if (command == "floquet") return floquet(opts, out, files);
    if (command == "gauge") return gauge(opts, out, files);
    if (command == "simulate") return simulate(opts, out, files);
    if (command == "riccati") return riccati(opts, out, files);
    if (command == "examples") return examples(opts, out, files);
    throw ConfigError("", "unknown command '" + std::string(command) + "'");
  } catch (const Error& e) {
    const int code = exit_code_for(e);
    if (code == kExitNumericFailure) write_failure(opts.out, command, e, files);
    return {code, e.what(), files};
  } catch (const std::exception& e) {
    return {kExitNumericFailure, e.what(), files};
  }
}

}  // namespace fg
