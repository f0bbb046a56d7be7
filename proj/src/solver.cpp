#include "hfteq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace hfteq {

const char* to_string(SolverErrc code) {
    switch (code) {
        case SolverErrc::NoRootInBracket: return "NoRootInBracket";
        case SolverErrc::RootsNotSeparated: return "RootsNotSeparated";
        case SolverErrc::NegativeDiscriminant: return "NegativeDiscriminant";
        case SolverErrc::ConstraintViolated: return "ConstraintViolated";
        case SolverErrc::ContinuationFailed: return "ContinuationFailed";
        case SolverErrc::NotMonotone: return "NotMonotone";
        case SolverErrc::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

SolverError::SolverError(SolverErrc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {

struct Bracket {
    double lo;
    double hi;
    std::size_t iterations;
};

// Sign-change bisection; f(lo) and f(hi) must differ in sign.
template <class F>
Bracket bisect(F&& f, double lo, double hi, double rel_width) {
    double f_lo = f(lo);
    std::size_t it = 0;
    while (hi - lo > rel_width * std::abs(hi) && it < 2000) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = f(mid);
        ++it;
        if (f_mid == 0.0) return {mid, mid, it};
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return {lo, hi, it};
}

// Newton steps from the bracket midpoint; falls back to the midpoint if an
// iterate leaves the bracket.
template <class F, class DF>
double polish(F&& f, DF&& df, const Bracket& b, int steps) {
    const double mid = 0.5 * (b.lo + b.hi);
    double x = mid;
    for (int s = 0; s < steps; ++s) {
        const double d = df(x);
        if (!(d != 0.0) || !std::isfinite(d)) break;
        const double next = x - f(x) / d;
        if (!(next >= b.lo && next <= b.hi)) return mid;
        if (next == x) break;
        x = next;
    }
    return std::abs(f(x)) <= std::abs(f(mid)) ? x : mid;
}

struct Quadratic {
    double a;
    double b;
    double c;
    double disc;
};

// g(beta_i) = a*beta_i^2 + b*beta_i + c at fixed beta_sigma, with
// Q = beta_sigma + 2c(r + beta_sigma^2) and W = gamma*dt*(r + beta_sigma^2).
// b^2 - 4ac is expanded into nonnegative terms, so small dt loses no digits.
Quadratic best_response_quadratic(double beta_sigma, const TraderParams& t, double dt, double r,
                                  double tax) {
    const double eps = t.rho * dt;
    const double spread = r + beta_sigma * beta_sigma;
    const double Q = beta_sigma + 2.0 * tax * spread;
    const double W = t.gamma * dt * spread;
    Quadratic q;
    q.a = (1.0 - eps) * Q * Q;
    q.b = -r * (Q * (2.0 - eps) + W);
    q.c = r * r;
    q.disc = r * r * (Q * Q * eps * eps + 2.0 * Q * (2.0 - eps) * W + W * W);
    return q;
}

double smaller_root(const Quadratic& q) {
    if (!(q.disc >= 0.0)) {
        std::ostringstream os;
        os << "best-response discriminant " << q.disc << " < 0";
        throw SolverError(SolverErrc::NegativeDiscriminant, os.str());
    }
    // b < 0 here, so q_ = (|b| + sqrt(disc))/2 and the roots are q_/a and c/q_.
    const double q_ = -0.5 * (q.b - std::sqrt(q.disc));
    return q.c / q_;
}

// d u_i / d beta_sigma by implicit differentiation of g.
double best_response_slope(double beta_i, double beta_sigma, const TraderParams& t, double dt,
                           double r, double tax) {
    const double eps = t.rho * dt;
    const double spread = r + beta_sigma * beta_sigma;
    const double Q = beta_sigma + 2.0 * tax * spread;
    const double dQ = 1.0 + 4.0 * tax * beta_sigma;
    const double W = t.gamma * dt * spread;
    const double dW = 2.0 * t.gamma * dt * beta_sigma;
    const double g_sigma =
        2.0 * (1.0 - eps) * Q * dQ * beta_i * beta_i - r * (dQ * (2.0 - eps) + dW) * beta_i;
    const double g_i = 2.0 * (1.0 - eps) * Q * Q * beta_i - r * (Q * (2.0 - eps) + W);
    return -g_sigma / g_i;
}

double best_response_scale(double beta_i, double beta_sigma, const TraderParams& t, double dt,
                           double r, double tax) {
    const auto q = best_response_quadratic(beta_sigma, t, dt, r, tax);
    return std::abs(q.a) * beta_i * beta_i + std::abs(q.b) * beta_i + q.c;
}

double aggregate_gap_slope(double beta_sigma, const ValidatedParams& p, double c) {
    double slope = -1.0;
    for (std::size_t i = 0; i < p.k(); ++i) {
        const double bi = taxed_best_response_beta(beta_sigma, i, p, c);
        slope += best_response_slope(bi, beta_sigma, p.trader(i), p.dt(), p.r(), c);
    }
    return slope;
}

bool strictly_decreasing_on(double lo, double hi, const ValidatedParams& p, double c, int samples) {
    double prev = aggregate_gap(lo, p, c);
    for (int s = 1; s <= samples; ++s) {
        const double x = lo + (hi - lo) * s / (samples + 1);
        const double h = aggregate_gap(x, p, c);
        if (!(h < prev)) return false;
        prev = h;
    }
    return aggregate_gap(hi, p, c) < prev;
}

std::vector<double> best_responses(double beta_sigma, const ValidatedParams& p, double c) {
    std::vector<double> betas(p.k());
    for (std::size_t i = 0; i < p.k(); ++i) betas[i] = taxed_best_response_beta(beta_sigma, i, p, c);
    return betas;
}

void fill_residuals(SolveDiagnostics& diag, const Equilibrium& eq, const ValidatedParams& p) {
    diag.residuals.resize(eq.k());
    double sum = 0.0;
    for (std::size_t i = 0; i < eq.k(); ++i) {
        const double g = best_response_polynomial(eq.betas[i], eq.beta_sigma, i, p, eq.tax);
        diag.residuals[i] = std::abs(g) / best_response_scale(eq.betas[i], eq.beta_sigma,
                                                              p.trader(i), p.dt(), p.r(), eq.tax);
        sum += eq.betas[i];
    }
    diag.sum_residual = std::abs(sum - eq.beta_sigma);
}

void require_single_untaxed(const ValidatedParams& p, const char* op) {
    if (p.k() != 1) {
        throw SolverError(SolverErrc::InvalidInput, std::string(op) + " needs exactly one trader");
    }
}

// Root of h on a bracket known to change sign; Newton-polished.
std::pair<double, Bracket> root_of_gap(const ValidatedParams& p, double c, double lo, double hi,
                                       const SolverTolerances& tol) {
    auto h = [&](double x) { return aggregate_gap(x, p, c); };
    auto dh = [&](double x) { return aggregate_gap_slope(x, p, c); };
    const Bracket b = bisect(h, lo, hi, tol.bracket_width);
    return {polish(h, dh, b, tol.newton_steps), b};
}

Solution closed_form_limit(const ValidatedParams& p) {
    // dt = 0: beta_i * beta_sigma = r for every i.
    const double k = static_cast<double>(p.k());
    Solution s;
    s.eq.beta_sigma = std::sqrt(k) * p.sigma_ratio();
    s.eq.betas.assign(p.k(), p.sigma_ratio() / std::sqrt(k));
    s.eq.lambda = std::sqrt(k) / (1.0 + k) / p.sigma_ratio();
    s.eq.phis.assign(p.k(), 0.0);
    s.eq.mus.assign(p.k(), 0.0);
    s.eq.tax = 0.0;
    s.diagnostics.closed_form = true;
    s.diagnostics.monotone_witness = true;
    s.diagnostics.bracket_lo = s.diagnostics.bracket_hi = s.eq.beta_sigma;
    fill_residuals(s.diagnostics, s.eq, p);
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------

double monopoly_quartic(double beta, const ValidatedParams& p) {
    const auto& t = p.trader(0);
    const double eps = t.rho * p.dt();
    const double gdt = t.gamma * p.dt();
    const double r = p.r();
    const double b2 = beta * beta;
    return b2 * b2 * (1.0 - eps) - (2.0 - eps + beta * gdt) * r * b2 + r * r * (1.0 - beta * gdt);
}

double monopoly_quartic_relative_residual(double beta, const ValidatedParams& p) {
    const auto& t = p.trader(0);
    const double eps = t.rho * p.dt();
    const double gdt = t.gamma * p.dt();
    const double r = p.r();
    const double b2 = beta * beta;
    const double scale = b2 * b2 * (1.0 - eps) + (2.0 - eps + beta * gdt) * r * b2 +
                         r * r * (1.0 + beta * gdt);
    return std::abs(monopoly_quartic(beta, p)) / scale;
}

namespace {

double monopoly_quartic_slope(double beta, const ValidatedParams& p) {
    const auto& t = p.trader(0);
    const double eps = t.rho * p.dt();
    const double gdt = t.gamma * p.dt();
    const double r = p.r();
    return 4.0 * (1.0 - eps) * beta * beta * beta - 3.0 * gdt * r * beta * beta -
           2.0 * (2.0 - eps) * r * beta - r * r * gdt;
}

}  // namespace

namespace {

// Admissible quartic root with its final bisection bracket.
std::pair<double, Bracket> monopoly_root(const ValidatedParams& p, const SolverTolerances& tol) {
    const double s = p.sigma_ratio();
    auto q = [&](double b) { return monopoly_quartic(b, p); };
    const double q_hi = q(s);
    if (!(q_hi < 0.0)) {
        std::ostringstream os;
        os << "quartic does not change sign on (0, " << s << "]; dt = " << p.dt()
           << " is infeasible";
        throw SolverError(SolverErrc::NoRootInBracket, os.str());
    }
    const Bracket b = bisect(q, 0.0, s, tol.bracket_width);
    const double root =
        polish(q, [&](double x) { return monopoly_quartic_slope(x, p); }, b, tol.newton_steps);
    return {root, b};
}

}  // namespace

double solve_monopoly_beta(const ValidatedParams& p, const SolverTolerances& tol) {
    require_single_untaxed(p, "solve_monopoly_beta");
    if (p.dt() == 0.0) return p.sigma_ratio();  // quartic collapses to (beta^2 - r)^2
    return monopoly_root(p, tol).first;
}

QuarticRoots monopoly_quartic_roots(const ValidatedParams& p, const SolverTolerances& tol) {
    require_single_untaxed(p, "monopoly_quartic_roots");
    const double s = p.sigma_ratio();
    auto q = [&](double b) { return monopoly_quartic(b, p); };
    if (!(p.dt() > 0.0) || !(q(s) < 0.0)) {
        throw SolverError(SolverErrc::RootsNotSeparated,
                          "quartic has no interior sign change at sigma_K/sigma_S");
    }
    QuarticRoots roots{};
    roots.admissible = solve_monopoly_beta(p, tol);

    double hi = 2.0 * s;
    int expansions = 0;
    while (!(q(hi) > 0.0)) {
        if (++expansions > tol.max_expansions) {
            throw SolverError(SolverErrc::RootsNotSeparated, "second root not bracketed");
        }
        hi *= 2.0;
    }
    const Bracket b = bisect(q, s, hi, tol.bracket_width);
    roots.inadmissible =
        polish(q, [&](double x) { return monopoly_quartic_slope(x, p); }, b, tol.newton_steps);
    if (!(roots.inadmissible > roots.admissible)) {
        throw SolverError(SolverErrc::RootsNotSeparated, "roots coincide numerically");
    }
    const double lam = price_impact(roots.inadmissible, p);
    const double lb = lam * roots.inadmissible;
    roots.inadmissible_phi = 1.0 - lb / (1.0 - lb);
    return roots;
}

Solution solve_monopoly(const ValidatedParams& p, const SolverTolerances& tol) {
    require_single_untaxed(p, "solve_monopoly");
    if (p.tax() != 0.0) {
        throw SolverError(SolverErrc::InvalidInput, "solve_monopoly requires tax = 0");
    }
    if (p.dt() == 0.0) return closed_form_limit(p);

    Solution s;
    const auto [beta, bracket] = monopoly_root(p, tol);
    s.eq = assemble_equilibrium({beta}, beta, p, 0.0);
    s.diagnostics.iterations = bracket.iterations;
    s.diagnostics.bracket_lo = bracket.lo;
    s.diagnostics.bracket_hi = bracket.hi;
    s.diagnostics.monotone_witness = strictly_decreasing_on(
        1e-12, p.sigma_ratio() + 1.0, p, 0.0, tol.monotone_samples);
    fill_residuals(s.diagnostics, s.eq, p);
    s.diagnostics.residuals[0] = monopoly_quartic_relative_residual(beta, p);
    try {
        const auto roots = monopoly_quartic_roots(p, tol);
        std::ostringstream os;
        os << "beta > sigma_K/sigma_S gives phi = " << roots.inadmissible_phi
           << " < 0 (inadmissible)";
        s.diagnostics.rejected_roots.push_back({roots.inadmissible, os.str()});
    } catch (const SolverError&) {
        // Only the admissible root is needed for the equilibrium.
    }
    return s;
}

// ---------------------------------------------------------------------------

double best_response_polynomial(double beta_i, double beta_sigma, std::size_t i,
                                const ValidatedParams& p, double c) {
    const auto q = best_response_quadratic(beta_sigma, p.trader(i), p.dt(), p.r(), c);
    return (q.a * beta_i + q.b) * beta_i + q.c;
}

double nash_best_response_beta(double beta_sigma, std::size_t i, const ValidatedParams& p) {
    return taxed_best_response_beta(beta_sigma, i, p, 0.0);
}

double taxed_best_response_beta(double beta_sigma, std::size_t i, const ValidatedParams& p,
                                double c) {
    if (!(beta_sigma > 0.0)) {
        throw SolverError(SolverErrc::InvalidInput, "beta_sigma must be > 0");
    }
    return smaller_root(best_response_quadratic(beta_sigma, p.trader(i), p.dt(), p.r(), c));
}

double aggregate_gap(double beta_sigma, const ValidatedParams& p, double c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.k(); ++i) sum += taxed_best_response_beta(beta_sigma, i, p, c);
    return sum - beta_sigma;
}

double price_impact(double beta_sigma, const ValidatedParams& p) {
    const double s2 = p.sigma_S() * p.sigma_S();
    return beta_sigma * s2 / (p.sigma_K() * p.sigma_K() + beta_sigma * beta_sigma * s2);
}

Equilibrium assemble_equilibrium(std::vector<double> betas, double beta_sigma,
                                 const ValidatedParams& p, double c) {
    Equilibrium eq;
    eq.betas = std::move(betas);
    eq.beta_sigma = beta_sigma;
    eq.tax = c;
    eq.lambda = price_impact(beta_sigma, p);

    auto violated = [](const std::string& what) {
        throw SolverError(SolverErrc::ConstraintViolated, what);
    };
    if (!(beta_sigma > 0.0)) violated("beta_sigma <= 0");
    const double lb_sigma = eq.lambda * beta_sigma;
    if (!(lb_sigma < 1.0)) violated("lambda*beta_sigma >= 1");

    const double spread = p.r() + beta_sigma * beta_sigma;
    const double upper = p.r() / (beta_sigma + 2.0 * c * spread);
    eq.phis.resize(eq.k());
    eq.mus.resize(eq.k());
    for (std::size_t i = 0; i < eq.k(); ++i) {
        const double bi = eq.betas[i];
        std::ostringstream who;
        who << "trader " << i << ": ";
        if (!(bi > 0.0)) violated(who.str() + "beta_i <= 0");
        if (!(bi <= upper)) violated(who.str() + "beta_i above its admissible upper bound");
        eq.phis[i] = 1.0 - (eq.lambda + 2.0 * c) * bi / (1.0 - lb_sigma);
        eq.mus[i] = eq.lambda * eq.phis[i];
        if (p.dt() > 0.0 && !(eq.phis[i] > 0.0 && eq.phis[i] <= 1.0)) {
            std::ostringstream os;
            os << who.str() << "phi = " << eq.phis[i] << " outside (0,1]";
            violated(os.str());
        }
    }
    return eq;
}

Solution solve_nash(const ValidatedParams& p, const SolverTolerances& tol) {
    if (p.dt() == 0.0) return closed_form_limit(p);

    const double lo = 1e-12;
    double hi = std::sqrt(static_cast<double>(p.k())) * p.sigma_ratio() + 1.0;
    int expansions = 0;
    while (aggregate_gap(hi, p, 0.0) > 0.0) {
        if (++expansions > tol.max_expansions) {
            throw SolverError(SolverErrc::NoRootInBracket, "bracket expansion exhausted");
        }
        hi *= 2.0;
    }
    Solution s;
    s.diagnostics.monotone_witness = strictly_decreasing_on(lo, hi, p, 0.0, tol.monotone_samples);
    if (!s.diagnostics.monotone_witness) {
        throw SolverError(SolverErrc::NotMonotone, "aggregate gap not decreasing on the bracket");
    }
    const auto [beta_sigma, bracket] = root_of_gap(p, 0.0, lo, hi, tol);
    s.eq = assemble_equilibrium(best_responses(beta_sigma, p, 0.0), beta_sigma, p, 0.0);
    s.diagnostics.iterations = bracket.iterations;
    s.diagnostics.bracket_lo = bracket.lo;
    s.diagnostics.bracket_hi = bracket.hi;
    fill_residuals(s.diagnostics, s.eq, p);
    return s;
}

Solution solve_taxed(const ValidatedParams& p, const SolverTolerances& tol) {
    const double target = p.tax();
    const Solution untaxed = solve_nash(p.with_tax(0.0), tol);
    if (target == 0.0) return untaxed;

    double beta_sigma = untaxed.eq.beta_sigma;
    Bracket last{beta_sigma, beta_sigma, 0};
    std::size_t iterations = 0;
    for (int step = 1; step <= tol.continuation_steps; ++step) {
        const double c = target * std::ldexp(1.0, step - tol.continuation_steps);
        auto h = [&](double x) { return aggregate_gap(x, p, c); };

        // Local bracket around the previous root; the continuation keeps the
        // branch connected to the untaxed solution.
        double lo = beta_sigma;
        double hi = beta_sigma;
        double width = 1e-3;
        int expansions = 0;
        const bool root_above = h(beta_sigma) > 0.0;
        while (true) {
            if (root_above) {
                hi = beta_sigma * (1.0 + width);
                if (h(hi) < 0.0) break;
            } else {
                lo = beta_sigma / (1.0 + width);
                if (h(lo) > 0.0) break;
            }
            width *= 2.0;
            if (++expansions > tol.max_expansions) {
                std::ostringstream os;
                os << "no sign change near beta_sigma = " << beta_sigma << " at c = " << c;
                throw SolverError(SolverErrc::ContinuationFailed, os.str());
            }
        }
        if (!strictly_decreasing_on(lo, hi, p, c, tol.monotone_samples)) {
            std::ostringstream os;
            os << "aggregate gap loses monotonicity at c = " << c << " (possible fold)";
            throw SolverError(SolverErrc::ContinuationFailed, os.str());
        }
        const auto [root, bracket] = root_of_gap(p, c, lo, hi, tol);
        beta_sigma = root;
        last = bracket;
        iterations += bracket.iterations;
    }

    Solution out;
    out.eq = assemble_equilibrium(best_responses(beta_sigma, p, target), beta_sigma, p, target);
    out.diagnostics.iterations = iterations;
    out.diagnostics.bracket_lo = last.lo;
    out.diagnostics.bracket_hi = last.hi;
    out.diagnostics.continuation_steps = static_cast<std::size_t>(tol.continuation_steps);
    out.diagnostics.monotone_witness = true;
    fill_residuals(out.diagnostics, out.eq, p);
    return out;
}

Solution solve(const ValidatedParams& p, const SolverTolerances& tol) {
    if (p.tax() > 0.0) return solve_taxed(p, tol);
    if (p.k() == 1) return solve_monopoly(p, tol);
    return solve_nash(p, tol);
}

}  // namespace hfteq
