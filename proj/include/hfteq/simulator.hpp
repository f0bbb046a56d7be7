#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfteq/model.hpp"
#include "hfteq/solver.hpp"

namespace hfteq {

// ---------------------------------------------------------------------------
// Random numbers

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Two independent standard normals for (seed, path, step, stream).
/// Pure function of its arguments, so draws do not depend on execution order.
std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                                  std::uint32_t stream);

// ---------------------------------------------------------------------------
// Strategies

enum class StrategyKind {
    Equilibrium,      ///< dL = beta dS - phi M
    DeviationScaled,  ///< dL = s_beta beta dS - s_phi phi L
    DeviationWithZ,   ///< dL = beta dS - phi M - zeta' Z, Z = L - M
};

struct StrategySpec {
    StrategyKind kind = StrategyKind::Equilibrium;
    double beta_scale = 1.0;
    double phi_scale = 1.0;
    double zeta = 0.0;               ///< response to Z, DeviationWithZ only
    double initial_deviation = 0.0;  ///< Z_0 = L_0 - M_0

    static StrategySpec equilibrium() { return {}; }
    static StrategySpec scaled(double beta_scale, double phi_scale);
    static StrategySpec with_z(double zeta, double initial_deviation);

    std::string label() const;
};

class SimulationError : public std::runtime_error {
public:
    enum class Code { HorizonTooShort, InadmissibleStrategy, MissingPaths, BadConfig };
    SimulationError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

struct SimConfig {
    std::size_t n_paths = 1000;
    std::size_t horizon = 0;  ///< 0 selects default_horizon(params, tail_tol)
    std::uint64_t seed = 1;
    double tail_tol = 1e-6;
    bool record_paths = false;
    unsigned workers = 1;
};

/// N = ceil(log(tail_tol) / log(1 - rho_min dt)). Throws HorizonTooShort above 1e7.
std::size_t default_horizon(const ValidatedParams& params, double tail_tol = 1e-6);

// ---------------------------------------------------------------------------
// Simulation

struct PathBatch {
    std::size_t n_paths = 0;
    std::size_t horizon = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<double> discounts;          ///< 1 - rho_i dt per trader
    std::vector<double> initial_inventory;  ///< M_0 per trader
    double tail_bound = 0.0;                ///< bound on E[L_n^2] used for the tail check

    /// Discounted objective and mark-to-market sum, indexed [path * k + trader].
    std::vector<double> objective;
    std::vector<double> mark_to_market;

    /// Max over paths, rounds and equilibrium traders of |full - reduced| per-period term.
    double max_reduced_gap = 0.0;
    /// Max |L - M| over paths, rounds and traders.
    double max_deviation = 0.0;

    /// Recorded trajectories (record_paths). Market arrays are [path * horizon + (n-1)];
    /// trader arrays are [(path * horizon + (n-1)) * k + trader].
    std::vector<double> dS, dK, dY, price_adj;
    std::vector<double> L, M, payoff;

    bool recorded() const { return !dS.empty(); }
};

/// Runs the market with the given per-trader strategies. Dealers price with eq and
/// predict inventories with the equilibrium coefficients; M_0 = initial_inventory.
PathBatch simulate(const Equilibrium& eq, const std::vector<StrategySpec>& strategies,
                   const ValidatedParams& params, const SimConfig& config);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    double ci_lo = 0.0;  ///< mean - 1.96 SE
    double ci_hi = 0.0;  ///< mean + 1.96 SE

    bool covers(double x) const { return ci_lo <= x && x <= ci_hi; }
};

Estimate estimate_mean(const std::vector<double>& samples);

/// Discounted objective of trader i across paths. Throws HorizonTooShort when the
/// truncated tail may exceed tail_tol.
Estimate estimate_objective(const PathBatch& batch, std::size_t trader, double tail_tol = 1e-6);

/// Discounted sum of L_{n-1} dS_n, which the objective drops.
Estimate estimate_mark_to_market(const PathBatch& batch, std::size_t trader);

struct DealerProfit {
    Estimate profit;         ///< per-round (lambda dY + sum mu M - dS) dY, path means
    double slope = 0.0;      ///< OLS slope of dS on dY + sum phi M, no intercept
    double slope_se = 0.0;
    std::size_t rounds = 0;  ///< path-rounds used
};

/// Uses recorded paths; pricing coefficients come from eq so a perturbed rule can be tested.
DealerProfit dealer_profit_check(const PathBatch& batch, const Equilibrium& eq);

/// E[M_n^2] for dM = beta dS - phi M from M_0.
double inventory_second_moment(double m0, double beta, double phi, const ValidatedParams& params,
                               std::size_t n);

/// True iff E[M_n^2] stays bounded in n, i.e. phi in (0, 2).
bool second_moment_bounded(double phi);

Estimate mc_inventory_second_moment(double m0, double beta, double phi,
                                    const ValidatedParams& params, std::size_t n,
                                    std::size_t n_paths, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Deviation sweep

struct SweepRow {
    StrategySpec spec;
    Estimate objective;
    Estimate gain;  ///< paired difference against the reference row
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::size_t reference = 0;
    std::size_t argmax = 0;  ///< row with the largest mean objective
};

/// Trader `trader` plays each spec in turn while the others play the equilibrium.
/// All rows share one set of draws, so differences are paired.
SweepResult deviation_sweep(const Equilibrium& eq, std::size_t trader,
                            const ValidatedParams& params, const std::vector<StrategySpec>& specs,
                            std::size_t reference, const SimConfig& config);

// ---------------------------------------------------------------------------
// Export

/// Columns: path, n, dS, dK, price_adj, then L_j, M_j, payoff_j per trader.
std::vector<std::string> path_columns(std::size_t k);
void write_paths_csv(const PathBatch& batch, std::ostream& out);

/// "HFTEQPB1", u64 rows, u64 cols, rows*cols little-endian f64 in path_columns order.
void write_paths_binary(const PathBatch& batch, std::ostream& out);

}  // namespace hfteq
