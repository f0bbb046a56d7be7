#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfteq/model.hpp"

namespace hfteq {

/// Order of the remainder the closed-form expansion leaves out.
enum class Remainder { O_dt, O_dt_3_2 };

const char* to_string(Remainder r);

/// limit + half_order_coeff*sqrt(dt) + dt_coeff*dt.
///
/// dt_coeff is nonzero only for the monopolist's price impact, whose first
/// correction is at order dt rather than sqrt(dt).
struct Expansion {
    double limit = 0.0;
    double half_order_coeff = 0.0;
    double dt_coeff = 0.0;
    Remainder stated_remainder = Remainder::O_dt;

    double evaluate(double dt) const;
};

enum class Quantity { Beta, BetaSigma, Lambda, Phi, Mu, A, B, C, D };

const char* to_string(Quantity q);
std::optional<Quantity> quantity_from_string(const std::string& name);

struct MonopolyExpansions {
    Expansion beta, lambda, phi, mu, A, B, C, D;

    const Expansion& at(Quantity q) const;
};

struct TraderExpansions {
    Expansion beta, phi, mu, A, B, C, D;
};

struct NashExpansions {
    Expansion beta_sigma;
    Expansion lambda;
    std::vector<TraderExpansions> traders;

    /// Aggregate quantities ignore `trader`.
    const Expansion& at(Quantity q, std::size_t trader) const;
};

/// Single trader; uses trader 0.
MonopolyExpansions monopoly_expansions(const ValidatedParams& params);

/// k traders, heterogeneous gamma/rho allowed. For k = 1 the result coincides
/// with monopoly_expansions, including the order-dt term of lambda.
NashExpansions nash_expansions(const ValidatedParams& params);

struct ConvergenceRow {
    double dt;
    double exact;
    double expansion;
    double abs_error;
    std::optional<double> order;  ///< log(e_prev/e)/log(dt_prev/dt); absent on the first row
};

struct ConvergenceTable {
    Quantity quantity;
    std::size_t trader;
    std::vector<ConvergenceRow> rows;
    std::vector<double> infeasible;  ///< grid points where the solve failed
};

class InfeasiblePoint : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact value of a quantity at params (solve + value coefficients as needed).
double exact_quantity(Quantity q, std::size_t trader, const ValidatedParams& params);

/// Expansion of a quantity for params' trader set (monopoly form when k = 1).
Expansion expansion_of(Quantity q, std::size_t trader, const ValidatedParams& params);

/// Exact vs expansion on each grid point, with consecutive-pair order estimates.
/// Needs at least four feasible points.
ConvergenceTable convergence_order(Quantity q, const std::vector<double>& dt_grid,
                                   const ValidatedParams& params, std::size_t trader = 0);

/// n points from a to b, geometrically spaced (both ends included).
std::vector<double> geometric_grid(double a, double b, std::size_t n);

}  // namespace hfteq
