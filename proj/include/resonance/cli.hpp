#pragma once

// Command execution behind the `resonance` tool: check, solve, verify, sweep
// and selftest, with the exit-code contract
//   0 success / condition holds, 2 condition violated, 3 no convergence,
//   4 invalid spec or usage, 1 selftest failure.

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "dispatch.hpp"
#include "report.hpp"

namespace resonance {

inline constexpr const char* tool_version = "1.0.0";

enum ExitCode : int {
  exit_ok = 0,
  exit_selftest_failed = 1,
  exit_condition_violated = 2,
  exit_no_convergence = 3,
  exit_invalid = 4,
};

struct SweepSpec {
  std::string parameter = "amplitude";
  double from = 0.0;
  double to = 0.0;
  int steps = 0;
};

inline SweepSpec parse_sweep(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() != 4) throw ConfigurationError("--sweep expects param:from:to:steps");
  SweepSpec s;
  s.parameter = parts[0];
  try {
    std::size_t p1 = 0, p2 = 0, p3 = 0;
    s.from = std::stod(parts[1], &p1);
    s.to = std::stod(parts[2], &p2);
    s.steps = std::stoi(parts[3], &p3);
    if (p1 != parts[1].size() || p2 != parts[2].size() || p3 != parts[3].size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw ConfigurationError("--sweep bounds must be numbers: " + text);
  }
  if (!std::isfinite(s.from) || !std::isfinite(s.to)) throw ConfigurationError("sweep bounds must be finite");
  if (s.steps < 2) throw ConfigurationError("sweep needs steps >= 2");
  if (s.parameter != "amplitude" && s.parameter != "forcing" && s.parameter != "forcing.h" &&
      s.parameter != "forcing.k")
    throw ConfigurationError("sweep parameter must be amplitude, forcing, forcing.h or forcing.k");
  return s;
}

struct RunConfig {
  std::string command;
  std::string spec_path;
  std::optional<int> modes;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<double> relax;
  std::optional<Accel> accel;
  bool gate = false;
  std::optional<SweepSpec> sweep;
  std::string json_path;
  std::string csv_path;
  bool quiet = false;
  std::string solution_path;  ///< verify: CSV candidate
  std::string echo_path;      ///< canonical echo of the loaded spec
  bool refine = false;        ///< sweep: bisect the verdict flip
  double refine_tol = 1e-3;
};

namespace detail {

struct Prepared {
  SpecDocument doc;
  SolveOptions opts;
};

inline Prepared prepare(const RunConfig& cfg) {
  Prepared out{load_document(cfg.spec_path), {}};
  ProblemSpec& p = out.doc.problem;
  if (cfg.modes) {
    if (*cfg.modes < 1) throw ConfigurationError("--modes must be >= 1");
    p.n_modes = *cfg.modes;
    p.domain.grid_size = oversampling * *cfg.modes;
    validate_structure(p);
  }
  out.doc.solver.apply(out.opts);
  if (cfg.tol) out.opts.tol = *cfg.tol;
  if (cfg.max_iter) out.opts.max_iter = *cfg.max_iter;
  if (cfg.relax) out.opts.relax = *cfg.relax;
  if (cfg.accel) out.opts.accel = *cfg.accel;
  if (cfg.gate) out.opts.gate = true;
  out.opts.validate();
  return out;
}

inline Json header(const RunConfig& cfg, const ProblemSpec& p) {
  Json j;
  j["schema_version"] = schema_version;
  j["command"] = cfg.command;
  j["spec"] = spec_summary(p);
  return j;
}

inline void finish_json(const RunConfig& cfg, Json& j, std::ostream& out) {
  if (!cfg.quiet) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["metadata"] = {{"tool_version", tool_version}, {"generated_at", buf}};
  }
  if (cfg.json_path.empty()) return;
  const std::string text = j.dump(2) + "\n";
  if (cfg.json_path == "-")
    out << text;
  else
    write_text_file(cfg.json_path, text);
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void print_conditions(std::ostream& out, const std::vector<ConditionReport>& reports) {
  if (reports.empty()) out << "conditions: none apply to this family\n";
  for (const auto& r : reports) {
    out << to_string(r.id) << ": " << to_string(r.verdict) << " (margin " << fmt(r.margin) << ")";
    if (!r.qualifier.empty()) out << " [" << r.qualifier << "]";
    out << '\n';
    for (const auto& [k, v] : r.quantities) out << "  " << k << " = " << fmt(v) << '\n';
    for (const auto& n : r.notes) out << "  note: " << n << '\n';
  }
}

inline int solve_exit(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return exit_ok;
    case SolveStatus::condition_violated: return exit_condition_violated;
    case SolveStatus::max_iter:
    case SolveStatus::diverged: return exit_no_convergence;
  }
  return exit_no_convergence;
}

inline ProblemSpec scaled_problem(const ProblemSpec& p, const std::string& param, double a) {
  ProblemSpec q = p;
  const bool sys = is_system(p.family);
  if (param == "amplitude" || param == "forcing") {
    if (sys) {
      q.forcing_h = p.forcing_h.scaled(a);
      q.forcing_k = p.forcing_k.scaled(a);
    } else {
      q.forcing = p.forcing.scaled(a);
    }
  } else if (param == "forcing.h" && sys) {
    q.forcing_h = p.forcing_h.scaled(a);
  } else if (param == "forcing.k" && sys) {
    q.forcing_k = p.forcing_k.scaled(a);
  } else {
    throw ConfigurationError("sweep parameter " + param + " does not apply to family " + to_string(p.family));
  }
  return q;
}

inline double best_margin(const std::vector<ConditionReport>& reports) {
  if (reports.empty()) return std::numeric_limits<double>::quiet_NaN();
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& r : reports) m = std::max(m, r.margin);
  return m;
}

// ---------------------------------------------------------------------------

inline int run_check(const RunConfig& cfg, std::ostream& out) {
  const Prepared prep = prepare(cfg);
  const auto reports = check_problem(prep.doc.problem);
  if (!cfg.quiet) print_conditions(out, reports);
  if (!cfg.echo_path.empty()) write_text_file(cfg.echo_path, spec_text(prep.doc.problem, prep.doc.solver));
  Json j = header(cfg, prep.doc.problem);
  Json c = Json::array();
  for (const auto& r : reports) c.push_back(to_json(r));
  j["conditions"] = c;
  finish_json(cfg, j, out);
  return conditions_permit(reports) ? exit_ok : exit_condition_violated;
}

inline int run_solve(const RunConfig& cfg, std::ostream& out) {
  const Prepared prep = prepare(cfg);
  const ProblemSpec& p = prep.doc.problem;
  if (!cfg.echo_path.empty()) write_text_file(cfg.echo_path, spec_text(p, prep.doc.solver));
  SolveReport r;
  try {
    r = solve(p, prep.opts);
  } catch (const ResonantModeNonOrthogonal& e) {
    if (!cfg.quiet) out << "linear system not solvable: " << e.what() << '\n';
    Json j = header(cfg, p);
    j["conditions"] = Json::array();
    j["solve"] = {{"status", "condition_violated"}, {"stop_reason", e.what()}};
    finish_json(cfg, j, out);
    return exit_condition_violated;
  }
  if (!cfg.quiet) {
    print_conditions(out, r.conditions);
    out << "status: " << to_string(r.status) << " after " << r.iterations << " iterations (" << r.stop_reason
        << ")\n";
    out << "residual: l2 " << fmt(r.residual_l2) << ", sup " << fmt(r.residual_sup) << '\n';
    if (r.canonical) out << "canonical form: " << r.canonical->describe() << '\n';
    for (const auto& n : r.notes) out << "note: " << n << '\n';
  }
  Json j = header(cfg, p);
  Json c = Json::array();
  for (const auto& rep : r.conditions) c.push_back(to_json(rep));
  j["conditions"] = c;
  j["solve"] = to_json(r);
  finish_json(cfg, j, out);
  if (!cfg.csv_path.empty() && !r.solution.empty()) {
    std::ostringstream csv;
    write_solution_csv(csv, p.basis(), r.solution);
    write_text_file(cfg.csv_path, csv.str());
  }
  return solve_exit(r.status);
}

inline int run_verify(const RunConfig& cfg, std::ostream& out) {
  const Prepared prep = prepare(cfg);
  const ProblemSpec& p = prep.doc.problem;
  const SpectralBasis basis = p.basis();
  const std::size_t arity = is_system(p.family) ? 2 : 1;
  std::vector<Field> candidate;
  if (!cfg.solution_path.empty()) {
    std::ifstream in(cfg.solution_path);
    if (!in) throw SpecError("cannot open solution file '" + cfg.solution_path + "'");
    candidate = read_solution_csv(in, basis, arity);
  } else if (!prep.doc.solution.empty()) {
    for (const auto& s : prep.doc.solution) candidate.push_back(s.field(basis));
  } else {
    throw SpecError("verify needs --solution PATH or a [solution] section");
  }
  const ResidualNorms res = residual(p, candidate);
  const bool ok = res.l2 <= prep.opts.tol;
  if (!cfg.quiet)
    out << "residual: l2 " << fmt(res.l2) << ", sup " << fmt(res.sup) << " (tol " << fmt(prep.opts.tol) << ") "
        << (ok ? "ok" : "above tolerance") << '\n';
  Json j = header(cfg, p);
  j["verify"] = {{"residual_l2", detail::number(res.l2)},
                 {"residual_sup", detail::number(res.sup)},
                 {"tol", prep.opts.tol},
                 {"passed", ok}};
  finish_json(cfg, j, out);
  return ok ? exit_ok : exit_no_convergence;
}

struct SweepRow {
  double amplitude = 0.0;
  double margin = 0.0;
  std::string verdict;
  std::string status;
  double residual = 0.0;
  int iterations = 0;
  int exit_code = 0;
  bool permits = true;
};

inline int run_sweep(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.sweep) throw ConfigurationError("sweep needs --sweep param:from:to:steps");
  const Prepared prep = prepare(cfg);
  const ProblemSpec& p = prep.doc.problem;
  const SweepSpec& s = *cfg.sweep;
  auto verdict_of = [&](double a) {
    const auto reports = check_problem(scaled_problem(p, s.parameter, a));
    return std::pair{conditions_permit(reports), reports};
  };

  std::vector<SweepRow> rows;
  for (int i = 0; i < s.steps; ++i) {
    const double a = s.from + (s.to - s.from) * i / (s.steps - 1);
    const ProblemSpec q = scaled_problem(p, s.parameter, a);
    SweepRow row;
    row.amplitude = a;
    const auto reports = check_problem(q);
    row.margin = best_margin(reports);
    row.permits = conditions_permit(reports);
    row.verdict = "n/a";
    if (!reports.empty()) {
      row.verdict = "fails";
      for (const auto& r : reports)
        if (r.verdict == Verdict::holds || (r.verdict == Verdict::boundary && row.verdict == "fails"))
          row.verdict = to_string(r.verdict);
    }
    try {
      const SolveReport r = solve(q, prep.opts);
      row.status = to_string(r.status);
      row.residual = r.residual_l2;
      row.iterations = r.iterations;
      row.exit_code = solve_exit(r.status);
    } catch (const ResonantModeNonOrthogonal&) {
      row.status = "condition_violated";
      row.residual = std::numeric_limits<double>::quiet_NaN();
      row.exit_code = exit_condition_violated;
    }
    rows.push_back(row);
  }

  std::optional<std::pair<double, double>> bracket;
  if (cfg.refine) {
    for (std::size_t i = 0; i + 1 < rows.size() && !bracket; ++i) {
      if (rows[i].verdict == "n/a") continue;
      if (rows[i].permits != rows[i + 1].permits) {
        double lo = rows[i].amplitude, hi = rows[i + 1].amplitude;
        const bool lo_holds = rows[i].permits;
        while (std::abs(hi - lo) > cfg.refine_tol) {
          const double mid = 0.5 * (lo + hi);
          if (verdict_of(mid).first == lo_holds)
            lo = mid;
          else
            hi = mid;
        }
        bracket = std::pair{lo, hi};
      }
    }
  }

  if (!cfg.quiet) {
    out << "amplitude,margin,verdict,status,residual,iterations,exit_code\n";
    for (const auto& r : rows)
      out << fmt(r.amplitude) << ',' << fmt(r.margin) << ',' << r.verdict << ',' << r.status << ','
          << fmt(r.residual) << ',' << r.iterations << ',' << r.exit_code << '\n';
    if (bracket)
      out << "verdict flips in [" << fmt(bracket->first) << ", " << fmt(bracket->second) << "], estimate "
          << fmt(0.5 * (bracket->first + bracket->second)) << '\n';
    else if (cfg.refine)
      out << "no verdict flip inside the sweep range\n";
  }
  if (!cfg.csv_path.empty()) {
    std::ostringstream csv;
    csv << "amplitude,margin,verdict,status,residual,iterations,exit_code\n";
    for (const auto& r : rows)
      csv << detail::csv_number(r.amplitude) << ',' << detail::csv_number(r.margin) << ',' << r.verdict << ','
          << r.status << ',' << detail::csv_number(r.residual) << ',' << r.iterations << ',' << r.exit_code
          << '\n';
    write_text_file(cfg.csv_path, csv.str());
  }
  Json j = header(cfg, p);
  Json t = Json::array();
  for (const auto& r : rows)
    t.push_back({{"amplitude", r.amplitude},
                 {"margin", detail::number(r.margin)},
                 {"verdict", r.verdict},
                 {"status", r.status},
                 {"residual", detail::number(r.residual)},
                 {"iterations", r.iterations},
                 {"exit_code", r.exit_code}});
  j["sweep"] = {{"parameter", s.parameter}, {"gate", prep.opts.gate}, {"rows", t}};
  if (bracket) j["sweep"]["threshold"] = {{"lower", bracket->first}, {"upper", bracket->second}};
  finish_json(cfg, j, out);
  return exit_ok;
}

// ---------------------------------------------------------------------------
// Built-in oracle suite

struct SelfCheck {
  std::string name;
  bool passed = false;
  double error = 0.0;
  double tolerance = 0.0;
};

inline std::vector<SelfCheck> selftest_checks() {
  using std::numbers::pi;
  std::vector<SelfCheck> out;
  auto add = [&](std::string name, double err, double tol) { out.push_back({std::move(name), err <= tol, err, tol}); };

  // Sign-split integrals of cos(n t - delta) are (2, -2) for every n, delta.
  double lemma = 0.0;
  for (int n = 1; n <= 8; ++n)
    for (int j = 0; j <= 20; ++j) {
      const auto [pos, neg] = lemma2_integrals(n, 0.3 * j);
      lemma = std::max({lemma, std::abs(pos - 2.0), std::abs(neg + 2.0)});
    }
  add("sign-split integrals of cos(nt - delta)", lemma, 1e-8);

  // Parseval: coefficient norm equals the quadrature norm of the samples.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (DomainKind kind : {DomainKind::interval, DomainKind::square, DomainKind::circle}) {
    const SpectralBasis b = build_basis(make_domain(kind, 16), 16);
    Eigen::VectorXd c(b.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = U(rng);
    const Field f = synthesize(b, c);
    add("Parseval on " + to_string(kind), std::abs(quadrature_l2(b, f.samples) - c.norm()), 1e-12 * c.norm());
    add("analysis inverts synthesis on " + to_string(kind), (b.to_coeffs(f.samples) - c).cwiseAbs().maxCoeff(),
        1e-12);
  }

  // Resolvent identity at a resonant shift.
  {
    const SpectralBasis b = build_basis(make_domain(DomainKind::interval, 32), 32);
    Eigen::VectorXd f(b.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = U(rng);
    f(1) = 0.0;
    const Eigen::VectorXd u = resolvent_coeffs(b, 4.0, f, 1);
    add("resolvent identity at resonance", (apply_shifted_laplacian(b, 4.0, u) - f).cwiseAbs().maxCoeff(), 1e-12);
    bool raised = false;
    f(1) = 0.5;
    try {
      (void)resolvent_coeffs(b, 4.0, f, 1);
    } catch (const NonOrthogonalForcing&) {
      raised = true;
    }
    add("Fredholm alternative rejects kernel forcing", raised ? 0.0 : 1.0, 0.0);
  }

  // Landesman-Lazer interval on the interval, k = 1.
  {
    const SpectralBasis b = build_basis(make_domain(DomainKind::interval, 64), 64);
    const LLInterval iv = landesman_lazer_interval(b, 0, -0.9, 0.9);
    const double exact = 0.9 * 2.0 * std::sqrt(2.0 / pi);
    add("Landesman-Lazer interval", std::max(std::abs(iv.L2 - exact), std::abs(iv.L1 + exact)), 1e-8);
  }

  // Canonical forms of the reference matrices.
  {
    const CanonicalForm j = canonical_reduce({2, 1, -1, 4});
    const CanonicalForm d = canonical_reduce({0, 2, 1, 1});
    double err = 0.0;
    for (const auto& [A, f] : {std::pair{CouplingMatrix{2, 1, -1, 4}, j}, std::pair{CouplingMatrix{0, 2, 1, 1}, d}})
      err = std::max(err, (f.Q_inv * to_matrix(A) * f.Q - f.form()).cwiseAbs().maxCoeff());
    const bool kinds = j.kind == CanonicalForm::Kind::jordan && std::abs(j.mu1 - 3.0) < 1e-12 &&
                       d.kind == CanonicalForm::Kind::diagonal && std::abs(d.mu1 - 2.0) < 1e-12 &&
                       std::abs(d.mu2 + 1.0) < 1e-12;
    add("canonical reduction", kinds ? err : 1.0, 1e-10);
  }

  // Williams margin on a circle group against the closed form.
  {
    const SpectralBasis b = build_basis(make_domain(DomainKind::circle, 8), 8);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(b.size());
    f(3) = 0.7;
    f(4) = -0.4;
    const ConditionReport w = williams_margin(b, 2, f, {-pi / 2, pi / 2}, 64);
    const ConditionReport ll = lazer_leach_check(b, f, 2, {-pi / 2, pi / 2});
    add("Williams margin equals Lazer-Leach margin", std::abs(w.margin - ll.margin), 1e-6);
  }
  return out;
}

inline int run_selftest(const RunConfig& cfg, std::ostream& out) {
  const auto checks = selftest_checks();
  bool all = true;
  Json arr = Json::array();
  for (const auto& c : checks) {
    all = all && c.passed;
    if (!cfg.quiet)
      out << (c.passed ? "PASS " : "FAIL ") << c.name << " (error " << fmt(c.error) << ", tol " << fmt(c.tolerance)
          << ")\n";
    arr.push_back({{"name", c.name}, {"passed", c.passed}, {"error", c.error}, {"tolerance", c.tolerance}});
  }
  Json j;
  j["schema_version"] = schema_version;
  j["command"] = "selftest";
  j["selftest"] = arr;
  finish_json(cfg, j, out);
  return all ? exit_ok : exit_selftest_failed;
}

}  // namespace detail

/// Runs one command; never throws on valid input, mapping errors to exit codes.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    if (cfg.command == "selftest") return detail::run_selftest(cfg, out);
    if (cfg.spec_path.empty()) throw ConfigurationError("command " + cfg.command + " needs a spec path");
    if (cfg.command == "check") return detail::run_check(cfg, out);
    if (cfg.command == "solve") return detail::run_solve(cfg, out);
    if (cfg.command == "verify") return detail::run_verify(cfg, out);
    if (cfg.command == "sweep") return detail::run_sweep(cfg, out);
    throw ConfigurationError("unknown command '" + cfg.command + "'");
  } catch (const SpecError& e) {
    err << "error: " << cfg.spec_path << ": " << e.what() << '\n';
    return exit_invalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_invalid;
  }
}

}  // namespace resonance
