#pragma once

// JSON reports with a fixed field order and CSV tables. JSON numbers use the
// shortest representation that round-trips exactly; CSV uses %.17g.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "canonical.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "problem.hpp"
#include "solvability.hpp"
#include "spectral.hpp"

namespace resonance {

using Json = nlohmann::ordered_json;

inline constexpr const char* schema_version = "1.0";

namespace detail {

inline Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline Json to_json(const ConditionReport& r) {
  Json j;
  j["condition_id"] = to_string(r.id);
  Json q = Json::object();
  for (const auto& [k, v] : r.quantities) q[k] = detail::number(v);
  j["quantities"] = q;
  j["margin"] = detail::number(r.margin);
  j["verdict"] = to_string(r.verdict);
  j["witness"] = r.witness ? detail::vector_json(*r.witness) : Json(nullptr);
  j["qualifier"] = r.qualifier.empty() ? Json(nullptr) : Json(r.qualifier);
  j["notes"] = r.notes;
  return j;
}

inline Json to_json(const CanonicalForm& f) {
  Json j;
  j["form"] = f.describe();
  j["kind"] = f.kind == CanonicalForm::Kind::jordan ? "jordan" : "diagonal";
  j["eigenvalues"] = Json::array({detail::number(f.mu1), detail::number(f.mu2)});
  j["Q"] = Json::array({Json::array({f.Q(0, 0), f.Q(0, 1)}), Json::array({f.Q(1, 0), f.Q(1, 1)})});
  j["Q_inv"] =
      Json::array({Json::array({f.Q_inv(0, 0), f.Q_inv(0, 1)}), Json::array({f.Q_inv(1, 0), f.Q_inv(1, 1)})});
  j["warnings"] = f.warnings;
  return j;
}

inline Json spec_summary(const ProblemSpec& p) {
  Json j;
  j["family"] = to_string(p.family);
  j["domain"] = to_string(p.domain.kind);
  j["modes"] = p.n_modes;
  j["grid"] = p.domain.grid_size;
  if (p.domain.kind == DomainKind::circle)
    j["n"] = p.n;
  else if (!is_system(p.family))
    j["k"] = p.k;
  if (p.matrix) j["matrix"] = Json::array({p.matrix->a, p.matrix->b, p.matrix->c, p.matrix->d});
  if (p.g) j["g"] = to_string(p.g->base);
  return j;
}

inline Json to_json(const SolveReport& r, bool with_trace = true) {
  Json j;
  j["status"] = to_string(r.status);
  j["stop_reason"] = r.stop_reason;
  j["iterations"] = r.iterations;
  j["residual_l2"] = detail::number(r.residual_l2);
  j["residual_sup"] = detail::number(r.residual_sup);
  j["xi"] = detail::vector_json(r.state.xi);
  if (!r.solution.empty()) {
    Json norms = Json::array();
    for (const Field& f : r.solution) norms.push_back(detail::number(l2_norm(f)));
    j["solution_l2"] = norms;
  }
  if (r.canonical) j["canonical"] = to_json(*r.canonical);
  if (r.classification) j["classification"] = describe(*r.classification);
  j["notes"] = r.notes;
  if (with_trace) {
    Json t = Json::array();
    for (const auto& h : r.state.history)
      t.push_back(Json::array({detail::number(h.dxi), detail::number(h.dU), detail::number(h.residual)}));
    j["trace"] = {{"columns", {"dxi", "dU", "residual"}}, {"rows", t}};
  }
  return j;
}

/// Solution table: node coordinate(s), then one column per field.
inline void write_solution_csv(std::ostream& os, const SpectralBasis& basis, const std::vector<Field>& fields) {
  const bool circle = basis.kind() == DomainKind::circle;
  os << (circle ? "t" : "x");
  if (basis.dimension() == 2) os << ",y";
  os << (fields.size() == 2 ? ",u,v" : ",u") << '\n';
  for (Eigen::Index p = 0; p < basis.grid_points(); ++p) {
    const auto [x, y] = basis.node(p);
    os << detail::csv_number(x);
    if (basis.dimension() == 2) os << ',' << detail::csv_number(y);
    for (const Field& f : fields) os << ',' << detail::csv_number(f.samples(p));
    os << '\n';
  }
}

/// Reads a solution table written by write_solution_csv and projects each
/// value column onto the basis.
inline std::vector<Field> read_solution_csv(std::istream& in, const SpectralBasis& basis, std::size_t arity) {
  std::string header;
  if (!std::getline(in, header)) throw SpecError("solution CSV is empty");
  std::vector<std::string> cols;
  {
    std::stringstream hs(header);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(c);
  }
  const std::size_t ncoord = static_cast<std::size_t>(basis.dimension());
  if (cols.size() != ncoord + arity)
    throw SpecError("solution CSV has " + std::to_string(cols.size()) + " columns, expected " +
                    std::to_string(ncoord + arity));
  std::vector<Eigen::VectorXd> samples(arity, Eigen::VectorXd(basis.grid_points()));
  std::string row;
  Eigen::Index p = 0;
  int line = 1;
  while (std::getline(in, row)) {
    ++line;
    if (row.empty()) continue;
    if (p >= basis.grid_points()) throw SpecError("solution CSV has more rows than grid nodes", line);
    std::stringstream rs(row);
    std::vector<double> vals;
    std::string c;
    while (std::getline(rs, c, ',')) {
      try {
        vals.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw SpecError("bad number '" + c + "' in solution CSV", line);
      }
    }
    if (vals.size() != cols.size()) throw SpecError("wrong column count in solution CSV", line);
    const auto [x, y] = basis.node(p);
    if (std::abs(vals[0] - x) > 1e-12 || (ncoord == 2 && std::abs(vals[1] - y) > 1e-12))
      throw SpecError("solution CSV node does not match the grid", line);
    for (std::size_t a = 0; a < arity; ++a) samples[a](p) = vals[ncoord + a];
    ++p;
  }
  if (p != basis.grid_points()) throw SpecError("solution CSV has fewer rows than grid nodes");
  std::vector<Field> out;
  for (const auto& s : samples) out.push_back(analyze(basis, s));
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace resonance
