#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfteq/model.hpp"

namespace hfteq {

/// Linear equilibrium: pricing rule and strategy coefficients.
///
/// Prices follow P_n = S_{n-1} + lambda*dY_n + sum_j mu_j*M^j_{n-1}; each
/// trader's predicted inventory follows dM^j_n = beta_j*dS_n - phi_j*M^j_{n-1}.
struct Equilibrium {
    std::vector<double> betas;  ///< shares per unit of value increment
    double beta_sigma = 0.0;    ///< sum of betas
    double lambda = 0.0;        ///< price impact per share of net order flow
    std::vector<double> phis;   ///< inventory mean-reversion fraction per round
    std::vector<double> mus;    ///< price sensitivity to predicted inventory
    double tax = 0.0;           ///< c this equilibrium was solved under

    std::size_t k() const { return betas.size(); }
};

struct RejectedRoot {
    double value;
    std::string reason;
};

struct SolveDiagnostics {
    std::size_t iterations = 0;
    double bracket_lo = 0.0;  ///< final bracket for beta_sigma (beta for the quartic)
    double bracket_hi = 0.0;
    /// Relative residual of each trader's best-response equation at the solution.
    std::vector<double> residuals;
    double sum_residual = 0.0;  ///< |sum(betas) - beta_sigma|
    std::vector<RejectedRoot> rejected_roots;
    std::size_t continuation_steps = 0;
    bool monotone_witness = false;  ///< aggregate gap sampled strictly decreasing
    bool closed_form = false;       ///< dt == 0 limit, no iteration
};

enum class SolverErrc {
    NoRootInBracket,
    RootsNotSeparated,
    NegativeDiscriminant,
    ConstraintViolated,
    ContinuationFailed,
    NotMonotone,
    InvalidInput,
};

const char* to_string(SolverErrc code);

class SolverError : public std::runtime_error {
public:
    SolverError(SolverErrc code, const std::string& what);
    SolverErrc code() const { return code_; }

private:
    SolverErrc code_;
};

struct Solution {
    Equilibrium eq;
    SolveDiagnostics diagnostics;
};

struct SolverTolerances {
    double bracket_width = 1e-14;  ///< relative bisection stopping width
    int newton_steps = 3;
    int max_expansions = 60;
    int continuation_steps = 32;
    int monotone_samples = 10;
};

// ---------------------------------------------------------------------------
// Monopolist (k = 1, no tax)

/// Right-hand side of the monopoly quartic for trader 0 of params.
double monopoly_quartic(double beta, const ValidatedParams& params);

/// |quartic(beta)| divided by the sum of the magnitudes of its terms.
double monopoly_quartic_relative_residual(double beta, const ValidatedParams& params);

/// Root of the monopoly quartic in (0, sigma_K/sigma_S].
/// Throws SolverError{NoRootInBracket} when the endpoints do not change sign.
double solve_monopoly_beta(const ValidatedParams& params, const SolverTolerances& tol = {});

struct QuarticRoots {
    double admissible;        ///< in (0, sigma_K/sigma_S)
    double inadmissible;      ///< in (sigma_K/sigma_S, inf)
    double inadmissible_phi;  ///< mean-reversion the second root would imply; negative
};

/// Both positive real roots; requires dt > 0 so that they are distinct.
QuarticRoots monopoly_quartic_roots(const ValidatedParams& params, const SolverTolerances& tol = {});

Solution solve_monopoly(const ValidatedParams& params, const SolverTolerances& tol = {});

// ---------------------------------------------------------------------------
// k traders

/// Best-response polynomial g_i(beta_sigma, beta_i) under tax c (c = 0 is the untaxed system).
double best_response_polynomial(double beta_i, double beta_sigma, std::size_t i,
                                const ValidatedParams& params, double c);

/// Smaller root of the untaxed best-response quadratic at fixed beta_sigma > 0.
double nash_best_response_beta(double beta_sigma, std::size_t i, const ValidatedParams& params);

/// Smaller root of the taxed best-response quadratic; c = 0 reproduces the untaxed root.
double taxed_best_response_beta(double beta_sigma, std::size_t i, const ValidatedParams& params,
                                double c);

/// h(beta_sigma) = sum_i u_i(beta_sigma) - beta_sigma.
double aggregate_gap(double beta_sigma, const ValidatedParams& params, double c);

/// lambda = beta_sigma*sigma_S^2 / (sigma_K^2 + beta_sigma^2*sigma_S^2).
double price_impact(double beta_sigma, const ValidatedParams& params);

/// Nash equilibrium of the untaxed system (params.tax() is ignored).
Solution solve_nash(const ValidatedParams& params, const SolverTolerances& tol = {});

/// Taxed system at c = params.tax(), tracked by continuation from c = 0.
Solution solve_taxed(const ValidatedParams& params, const SolverTolerances& tol = {});

/// Dispatch: monopoly quartic for k = 1 untaxed, Nash otherwise, taxed when tax > 0.
Solution solve(const ValidatedParams& params, const SolverTolerances& tol = {});

/// Builds lambda, phis and mus from betas and checks every equilibrium invariant.
Equilibrium assemble_equilibrium(std::vector<double> betas, double beta_sigma,
                                 const ValidatedParams& params, double c);

}  // namespace hfteq
