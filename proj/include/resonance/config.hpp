#pragma once

// Sectioned key = value problem files.
//
//   # comment
//   [problem]   family, domain, modes, grid, k, m, n, mu, matrix = a b c d
//   [g]         scalar: name, amp, scale, shift, bound, limits.minus/plus,
//               G_limits.minus/plus, thresholds.c/d/C/D, sign_property
//   [f], [g]    systems: u.name, u.amp, u.scale, u.shift, v.*, bound, thresholds.*
//   [forcing]   (or [forcing.h], [forcing.k]) scale = orthonormal|trig,
//               description, then mode_label = value
//   [solver]    tol, max_iter, relax, accel, gate
//   [solution]  (or [solution.u], [solution.v]) mode_label = value

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "canonical.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "nonlinearity.hpp"
#include "problem.hpp"
#include "spectral.hpp"

namespace resonance {

struct SolverOverrides {
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<double> relax;
  std::optional<Accel> accel;
  std::optional<bool> gate;
  bool operator==(const SolverOverrides&) const = default;

  void apply(SolveOptions& o) const {
    if (tol) o.tol = *tol;
    if (max_iter) o.max_iter = *max_iter;
    if (relax) o.relax = *relax;
    if (accel) o.accel = *accel;
    if (gate) o.gate = *gate;
  }
};

struct SpecDocument {
  ProblemSpec problem;
  SolverOverrides solver;
  std::vector<ForcingSpec> solution;  ///< stored candidate, empty if absent
};

namespace detail {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
  bool used = false;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<Section> parse_sections(std::istream& in) {
  std::vector<Section> out;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (const auto h = s.find('#'); h != std::string::npos) s.erase(h);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw SpecError("unterminated section header", line);
      const std::string name = trim(s.substr(1, s.size() - 2));
      for (const auto& sec : out)
        if (sec.name == name) throw SpecError("duplicate section [" + name + "]", line, name);
      out.push_back({name, line, {}});
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw SpecError("expected key = value", line);
    if (out.empty()) throw SpecError("key outside of any section", line);
    Entry e{trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line, false};
    if (e.key.empty()) throw SpecError("empty key", line);
    for (const auto& prev : out.back().entries)
      if (prev.key == e.key) throw SpecError("duplicate key '" + e.key + "'", line, e.key);
    out.back().entries.push_back(std::move(e));
  }
  return out;
}

class Reader {
 public:
  explicit Reader(Section& s) : s_(s) {}

  Entry* find(const std::string& key) {
    for (auto& e : s_.entries)
      if (e.key == key) {
        e.used = true;
        return &e;
      }
    return nullptr;
  }

  std::optional<std::string> str(const std::string& key) {
    if (Entry* e = find(key)) return e->value;
    return std::nullopt;
  }

  std::optional<double> num(const std::string& key) {
    Entry* e = find(key);
    if (!e) return std::nullopt;
    return parse_double(*e);
  }

  std::optional<int> integer(const std::string& key) {
    Entry* e = find(key);
    if (!e) return std::nullopt;
    std::size_t pos = 0;
    try {
      const int v = std::stoi(e->value, &pos);
      if (pos == e->value.size()) return v;
    } catch (const std::exception&) {
    }
    throw SpecError("'" + key + "' must be an integer, got '" + e->value + "'", e->line, key);
  }

  std::optional<bool> boolean(const std::string& key) {
    Entry* e = find(key);
    if (!e) return std::nullopt;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    throw SpecError("'" + key + "' must be true or false", e->line, key);
  }

  std::string required(const std::string& key) {
    if (auto v = str(key)) return *v;
    throw SpecError("missing key '" + key + "' in [" + s_.name + "]", s_.line, key);
  }

  static double parse_double(const Entry& e) {
    std::size_t pos = 0;
    try {
      const double v = std::stod(e.value, &pos);
      if (pos == e.value.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw SpecError("'" + e.key + "' must be a finite number, got '" + e.value + "'", e.line, e.key);
  }

  int line_of(const std::string& key) const {
    for (const auto& e : s_.entries)
      if (e.key == key) return e.line;
    return s_.line;
  }

  void reject_unknown() const {
    for (const auto& e : s_.entries)
      if (!e.used) throw SpecError("unknown key '" + e.key + "' in [" + s_.name + "]", e.line, e.key);
  }

  Section& section() { return s_; }

 private:
  Section& s_;
};

inline std::optional<Thresholds> read_thresholds(Reader& r) {
  const auto c = r.num("thresholds.c"), d = r.num("thresholds.d");
  const auto C = r.num("thresholds.C"), D = r.num("thresholds.D");
  const int present = c.has_value() + d.has_value() + C.has_value() + D.has_value();
  if (present == 0) return std::nullopt;
  if (present != 4)
    throw SpecError("thresholds need all of thresholds.c, thresholds.d, thresholds.C, thresholds.D",
                    r.section().line, "thresholds");
  return Thresholds{*c, *d, *C, *D};
}

inline Nonlinearity read_registry(Reader& r, const std::string& prefix, bool required) {
  const auto name = r.str(prefix + "name");
  if (!name) {
    if (required) r.required(prefix + "name");
    return Nonlinearity::zero();
  }
  const auto base = parse_base_function(*name);
  if (!base)
    throw SpecError("unknown nonlinearity '" + *name + "' (arctan, tanh, bounded_gaussian, rational, zero)",
                    r.line_of(prefix + "name"), prefix + "name");
  const double amp = r.num(prefix + "amp").value_or(1.0);
  const double scale = r.num(prefix + "scale").value_or(1.0);
  const double shift = r.num(prefix + "shift").value_or(0.0);
  try {
    return Nonlinearity::make(*base, amp, scale, shift);
  } catch (const SpecificationError& e) {
    throw SpecError(e.what(), r.line_of(prefix + "amp"), prefix + "amp");
  }
}

inline Nonlinearity read_scalar(Reader& r) {
  Nonlinearity g = read_registry(r, "", true);
  if (auto b = r.num("bound")) g.declared_bound = *b;
  const auto lm = r.num("limits.minus"), lp = r.num("limits.plus");
  if (lm || lp) g.limits = Limits{lm.value_or(g.limits ? g.limits->minus : 0.0), lp.value_or(g.limits ? g.limits->plus : 0.0)};
  const auto Gm = r.num("G_limits.minus"), Gp = r.num("G_limits.plus");
  if (Gm || Gp)
    g.antiderivative_limits =
        Limits{Gm.value_or(g.antiderivative_limits ? g.antiderivative_limits->minus : 0.0),
               Gp.value_or(g.antiderivative_limits ? g.antiderivative_limits->plus : 0.0)};
  if (auto t = read_thresholds(r)) g.thresholds = t;
  if (auto sp = r.boolean("sign_property")) g.sign_property = *sp;
  if (const auto msg = metadata_problem(g); !msg.empty()) {
    int line = r.section().line;
    std::string key;
    for (const auto& e : r.section().entries)
      if (msg.find(e.key) != std::string::npos) {
        line = e.line;
        key = e.key;
        break;
      }
    throw SpecError(msg, line, key);
  }
  return g;
}

inline PairNonlinearity read_pair(Reader& r) {
  PairNonlinearity p = PairNonlinearity::of(read_registry(r, "u.", false), read_registry(r, "v.", false));
  if (auto b = r.num("bound")) p.declared_bound = *b;
  p.thresholds = read_thresholds(r);
  if (p.thresholds) {
    if (!(p.thresholds->c < p.thresholds->d))
      throw SpecError("thresholds.c must be < thresholds.d", r.line_of("thresholds.c"), "thresholds.c");
    if (!(p.thresholds->C < p.thresholds->D))
      throw SpecError("thresholds.C must be < thresholds.D", r.line_of("thresholds.C"), "thresholds.C");
  }
  return p;
}

/// Mode label -> orthonormal coefficient. `trig` values multiply the plain
/// trigonometric function (sin kx, cos nt, ...) instead of phi.
inline ForcingSpec read_coefficients(Reader& r, const SpectralBasis& basis, bool allow_scale) {
  ForcingSpec out;
  bool trig = false;
  if (allow_scale) {
    if (auto s = r.str("scale")) {
      if (*s == "trig")
        trig = true;
      else if (*s != "orthonormal")
        throw SpecError("scale must be orthonormal or trig", r.line_of("scale"), "scale");
    }
    out.description = r.str("description").value_or("");
  }
  for (auto& e : r.section().entries) {
    if (e.used) continue;
    const auto idx = basis.mode_from_label(e.key);
    if (!idx) throw SpecError("unknown mode label '" + e.key + "' for this basis", e.line, e.key);
    e.used = true;
    double v = Reader::parse_double(e);
    if (trig) v *= trig_norm(basis.mode(*idx));
    out.coeffs[*idx] = v;
  }
  return out;
}

}  // namespace detail

inline SpecDocument parse_spec(std::istream& in) {
  using namespace detail;
  std::vector<Section> sections = parse_sections(in);
  auto section = [&](const std::string& name) -> Section* {
    for (auto& s : sections)
      if (s.name == name) return &s;
    return nullptr;
  };
  const std::vector<std::string> known = {"problem", "g", "f", "forcing", "forcing.h", "forcing.k",
                                          "solver", "solution", "solution.u", "solution.v"};
  for (const auto& s : sections)
    if (std::find(known.begin(), known.end(), s.name) == known.end())
      throw SpecError("unknown section [" + s.name + "]", s.line, s.name);

  Section* ps = section("problem");
  if (!ps) throw SpecError("missing [problem] section", 0, "problem");
  Reader pr(*ps);
  SpecDocument doc;
  ProblemSpec& p = doc.problem;
  const std::string fam = pr.required("family");
  const auto family = parse_family(fam);
  if (!family) throw SpecError("unknown family '" + fam + "'", pr.line_of("family"), "family");
  p.family = *family;
  const std::string dom = pr.required("domain");
  const auto kind = parse_domain_kind(dom);
  if (!kind) throw SpecError("unknown domain '" + dom + "' (interval, square, circle)", pr.line_of("domain"), "domain");
  const auto modes = pr.integer("modes");
  if (!modes) pr.required("modes");
  if (*modes < 1) throw SpecError("modes must be >= 1", pr.line_of("modes"), "modes");
  p.n_modes = *modes;
  p.domain = {*kind, pr.integer("grid").value_or(oversampling * *modes)};
  p.k = pr.integer("k").value_or(0);
  p.m = pr.integer("m").value_or(0);
  p.n = pr.integer("n").value_or(0);
  p.mu = pr.num("mu").value_or(0.0);
  if (auto mat = pr.str("matrix")) {
    std::istringstream ms(*mat);
    double a, b, c, d;
    std::string extra;
    if (!(ms >> a >> b >> c >> d) || (ms >> extra))
      throw SpecError("matrix must be four numbers 'a b c d'", pr.line_of("matrix"), "matrix");
    p.matrix = CouplingMatrix{a, b, c, d};
  }
  pr.reject_unknown();

  std::optional<SpectralBasis> basis;
  try {
    basis.emplace(p.domain, p.n_modes);
  } catch (const Error& e) {
    throw SpecError(e.what(), pr.line_of("grid"), "grid");
  }

  const bool system = is_system(p.family);
  if (system) {
    if (Section* s = section("f")) {
      Reader r(*s);
      p.f_uv = read_pair(r);
      r.reject_unknown();
    }
    if (Section* s = section("g")) {
      Reader r(*s);
      p.g_uv = read_pair(r);
      r.reject_unknown();
    }
  } else {
    if (Section* s = section("f")) throw SpecError("[f] is only used by system families", s->line, "f");
    if (Section* s = section("g")) {
      Reader r(*s);
      p.g = read_scalar(r);
      r.reject_unknown();
    }
  }

  auto forcing = [&](const char* name, bool allowed, ForcingSpec& out) {
    Section* s = section(name);
    if (!s) return;
    if (!allowed)
      throw SpecError(std::string("[") + name + "] does not apply to family " + fam, s->line, name);
    Reader r(*s);
    out = read_coefficients(r, *basis, true);
    r.reject_unknown();
  };
  forcing("forcing", !system, p.forcing);
  forcing("forcing.h", system, p.forcing_h);
  forcing("forcing.k", system, p.forcing_k);

  if (Section* s = section("solver")) {
    Reader r(*s);
    doc.solver.tol = r.num("tol");
    doc.solver.max_iter = r.integer("max_iter");
    doc.solver.relax = r.num("relax");
    if (auto a = r.str("accel")) {
      doc.solver.accel = parse_accel(*a);
      if (!doc.solver.accel) throw SpecError("accel must be anderson or none", r.line_of("accel"), "accel");
    }
    doc.solver.gate = r.boolean("gate");
    r.reject_unknown();
  }

  auto solution = [&](const char* name) -> std::optional<ForcingSpec> {
    Section* s = section(name);
    if (!s) return std::nullopt;
    Reader r(*s);
    ForcingSpec f = read_coefficients(r, *basis, false);
    r.reject_unknown();
    return f;
  };
  if (system) {
    if (section("solution")) throw SpecError("systems store [solution.u] and [solution.v]", section("solution")->line);
    auto u = solution("solution.u");
    auto v = solution("solution.v");
    if (u || v) doc.solution = {u.value_or(ForcingSpec{}), v.value_or(ForcingSpec{})};
  } else {
    if (auto u = solution("solution")) doc.solution = {*u};
  }

  // Structural validation; errors point at the key they name when possible.
  auto locate = [&](const std::string& msg) {
    for (const auto& s : sections)
      for (const auto& e : s.entries)
        if (msg.find(e.key) != std::string::npos) return std::pair{e.line, e.key};
    for (const auto& [word, key] : std::vector<std::pair<std::string, std::string>>{
             {"frequency n", "n"}, {"index k", "k"}, {"k=", "k"}, {"matrix", "matrix"}, {"domain", "domain"}})
      if (msg.find(word) != std::string::npos) return std::pair{pr.line_of(key), key};
    return std::pair{ps->line, std::string("problem")};
  };
  try {
    validate_structure(p);
    if (system && p.family != Family::system_linear) {
      std::optional<CanonicalForm> form;
      try {
        form = canonical_reduce(*p.matrix);
      } catch (const UnsupportedError&) {
        if (p.family != Family::system_nonresonant) throw;
      }
      if (form) {
        const SystemClass cls = classify_system(*form, *basis);
        const bool ok = (cls.kind == SystemClass::Case::nonresonant && p.family == Family::system_nonresonant) ||
                        (cls.kind == SystemClass::Case::case_A && p.family == Family::system_case_A) ||
                        (cls.kind == SystemClass::Case::case_B && p.family == Family::system_case_B) ||
                        (cls.kind == SystemClass::Case::case_C && p.family == Family::system_case_C);
        if (!ok)
          throw SpecificationError("matrix classifies as " + describe(cls) + " (" + form->describe() +
                                   "), inconsistent with family " + fam);
      }
    }
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    const auto [line, key] = locate(e.what());
    throw SpecError(e.what(), line, key);
  }
  return doc;
}

inline SpecDocument load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file '" + path + "'");
  return parse_spec(in);
}

inline ProblemSpec load_spec(const std::string& path) { return load_document(path).problem; }

// ---------------------------------------------------------------------------
// Canonical echo

namespace detail {

inline std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_registry(std::ostream& os, const Nonlinearity& g, const std::string& prefix) {
  os << prefix << "name = " << to_string(g.base) << '\n';
  if (g.base == BaseFunction::zero) return;
  os << prefix << "amp = " << num17(g.amp) << '\n';
  os << prefix << "scale = " << num17(g.scale) << '\n';
  os << prefix << "shift = " << num17(g.shift) << '\n';
}

inline void write_thresholds(std::ostream& os, const std::optional<Thresholds>& t) {
  if (!t) return;
  os << "thresholds.c = " << num17(t->c) << '\n' << "thresholds.d = " << num17(t->d) << '\n';
  os << "thresholds.C = " << num17(t->C) << '\n' << "thresholds.D = " << num17(t->D) << '\n';
}

inline void write_coefficients(std::ostream& os, const SpectralBasis& basis, const ForcingSpec& f) {
  for (const auto& [i, c] : f.coeffs) os << mode_label(basis.mode(i)) << " = " << num17(c) << '\n';
}

}  // namespace detail

/// Writes a spec that loads back to an equal ProblemSpec. Systems carry their
/// canonical form and classification as comments.
inline void write_spec(std::ostream& os, const ProblemSpec& p, const SolverOverrides& solver = {}) {
  using detail::num17;
  const SpectralBasis basis = p.basis();
  os << "[problem]\n";
  os << "family = " << to_string(p.family) << '\n';
  os << "domain = " << to_string(p.domain.kind) << '\n';
  os << "modes = " << p.n_modes << '\n';
  os << "grid = " << p.domain.grid_size << '\n';
  if (p.k) os << "k = " << p.k << '\n';
  if (p.m) os << "m = " << p.m << '\n';
  if (p.n) os << "n = " << p.n << '\n';
  if (p.mu != 0.0) os << "mu = " << num17(p.mu) << '\n';
  if (p.matrix) {
    os << "matrix = " << num17(p.matrix->a) << ' ' << num17(p.matrix->b) << ' ' << num17(p.matrix->c) << ' '
       << num17(p.matrix->d) << '\n';
    try {
      const CanonicalForm form = canonical_reduce(*p.matrix);
      os << "# canonical form: " << form.describe() << '\n';
      os << "# classification: " << describe(classify_system(form, basis)) << '\n';
    } catch (const Error& e) {
      os << "# canonical form: unavailable (" << e.what() << ")\n";
    }
  }
  if (p.g) {
    const Nonlinearity& g = *p.g;
    os << "\n[g]\n";
    detail::write_registry(os, g, "");
    os << "bound = " << num17(g.declared_bound) << '\n';
    if (g.limits) os << "limits.minus = " << num17(g.limits->minus) << "\nlimits.plus = " << num17(g.limits->plus) << '\n';
    if (g.antiderivative_limits)
      os << "G_limits.minus = " << num17(g.antiderivative_limits->minus)
         << "\nG_limits.plus = " << num17(g.antiderivative_limits->plus) << '\n';
    detail::write_thresholds(os, g.thresholds);
    os << "sign_property = " << (g.sign_property ? "true" : "false") << '\n';
  }
  auto pair = [&](const char* name, const std::optional<PairNonlinearity>& q) {
    if (!q) return;
    os << "\n[" << name << "]\n";
    detail::write_registry(os, q->u_term, "u.");
    detail::write_registry(os, q->v_term, "v.");
    os << "bound = " << num17(q->declared_bound) << '\n';
    detail::write_thresholds(os, q->thresholds);
  };
  pair("f", p.f_uv);
  if (is_system(p.family)) pair("g", p.g_uv);
  auto forcing = [&](const char* name, const ForcingSpec& f) {
    os << "\n[" << name << "]\n";
    if (!f.description.empty()) os << "description = " << f.description << '\n';
    detail::write_coefficients(os, basis, f);
  };
  if (is_system(p.family)) {
    forcing("forcing.h", p.forcing_h);
    forcing("forcing.k", p.forcing_k);
  } else {
    forcing("forcing", p.forcing);
  }
  if (solver.tol || solver.max_iter || solver.relax || solver.accel || solver.gate) {
    os << "\n[solver]\n";
    if (solver.tol) os << "tol = " << num17(*solver.tol) << '\n';
    if (solver.max_iter) os << "max_iter = " << *solver.max_iter << '\n';
    if (solver.relax) os << "relax = " << num17(*solver.relax) << '\n';
    if (solver.accel) os << "accel = " << to_string(*solver.accel) << '\n';
    if (solver.gate) os << "gate = " << (*solver.gate ? "true" : "false") << '\n';
  }
}

inline std::string spec_text(const ProblemSpec& p, const SolverOverrides& solver = {}) {
  std::ostringstream os;
  write_spec(os, p, solver);
  return os.str();
}

}  // namespace resonance
