#pragma once

#include <optional>
#include <vector>

#include "spa/attractor.hpp"
#include "spa/table.hpp"

namespace spa {

/// Rows (delta, dist_H(A(t + delta), A(t))) for delta = -d_max..+d_max,
/// sections outside the family grid computed on demand. Verdict: every row
/// satisfies d <= slope |delta| + 2 section_tol, with slope = slope_bound when
/// given, otherwise the envelope slope max d / |delta| over the two largest
/// offsets (so distances must shrink at least linearly as delta -> 0).
ConvergenceTable continuity_modulus(const ProcessModel& model, const AttractorFamily& family, double t,
                                    const std::vector<double>& deltas,
                                    std::optional<double> slope_bound = std::nullopt);

/// Rows (t, semidist(A(t), limit)); verdict eventually below tol (default
/// 2 section_tol) and the forward compactness proxy passes.
ConvergenceTable forward_convergence(const AttractorFamily& family, const SetCloud& limit,
                                     std::optional<double> tol = std::nullopt);
/// Mirror over t -> -inf; rows ordered by decreasing t.
ConvergenceTable backward_convergence(const AttractorFamily& family, const SetCloud& limit,
                                      std::optional<double> tol = std::nullopt);

/// Rows (tau, max_t |phi_tau(t + tau) - phi(t)|): phi_tau solves the model
/// from x_tau in A(tau) at time tau, phi solves the autonomous model from the
/// same datum. x_tau follows a matched chain (nearest point to the previous
/// tau's choice). Extra column initial_gap = d(x_tau, x_tau_last).
ConvergenceTable asymptotic_autonomy_check(const ProcessModel& model, const ProcessModel& autonomous_model,
                                           const AttractorFamily& family, const std::vector<double>& t_offsets,
                                           const std::vector<double>& tau_list, double tol);

/// Rows (t, semidist(A(t), A_inf)) with the forward compactness proxy in
/// the summary; verdict needs both.
ConvergenceTable autonomous_tracking(const AttractorFamily& family, const SetCloud& a_inf,
                                     std::optional<double> tol = std::nullopt);
ConvergenceTable backward_autonomous_tracking(const AttractorFamily& family, const SetCloud& a_inf,
                                              std::optional<double> tol = std::nullopt);

}  // namespace spa
