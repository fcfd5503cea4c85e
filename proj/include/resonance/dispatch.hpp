#pragma once

// Family dispatch for solving and residual evaluation.

#include <string>
#include <utility>
#include <vector>

#include "engine.hpp"
#include "errors.hpp"
#include "problem.hpp"
#include "systems.hpp"

namespace resonance {

struct ResidualNorms {
  double l2 = 0.0;
  double sup = 0.0;
};

/// Left side minus right side of the family's equation, assembled spectrally.
inline ResidualNorms residual(const ProblemSpec& p, const std::vector<Field>& candidate) {
  const SpectralBasis basis = p.basis();
  const std::size_t arity = is_system(p.family) ? 2 : 1;
  if (candidate.size() != arity)
    throw DimensionError("family " + to_string(p.family) + " takes " + std::to_string(arity) +
                         " field(s), got " + std::to_string(candidate.size()));
  for (const Field& f : candidate)
    if (f.coeffs.size() != basis.size()) throw DimensionError("candidate does not match basis");
  if (arity == 1) {
    const double lambda = basis.group(basis.group_for_index(p.resonant_index())).value;
    const Field r =
        synthesize(basis, group_residual(basis, lambda, p.forcing.vector(basis), scalar_term(p, basis),
                                         candidate[0].coeffs));
    return {l2_norm(r), sup_norm(r)};
  }
  const auto [r1, r2] = system_residual_coeffs(p, basis, candidate[0].coeffs, candidate[1].coeffs);
  return {std::sqrt(r1.squaredNorm() + r2.squaredNorm()),
          std::max(sup_norm(synthesize(basis, r1)), sup_norm(synthesize(basis, r2)))};
}

inline SolveReport solve(const ProblemSpec& p, const SolveOptions& opts) {
  validate_structure(p);
  opts.validate();
  switch (p.family) {
    case Family::scalar_resonant: return solve_scalar_resonant(p, opts);
    case Family::scalar_multi: return solve_multi_resonant(p, opts);
    case Family::periodic_LL:
    case Family::periodic_damped:
    case Family::periodic_FN: return solve_periodic(p, opts);
    case Family::system_linear: return solve_system_linear(p);
    case Family::system_nonresonant: return solve_system_nonresonant(p, opts);
    case Family::system_case_A:
    case Family::system_case_B:
    case Family::system_case_C: return solve_system_resonant(p, opts);
  }
  throw SpecificationError("unknown family");
}

}  // namespace resonance
