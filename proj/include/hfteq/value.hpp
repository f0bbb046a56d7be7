#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfteq/model.hpp"
#include "hfteq/solver.hpp"

namespace hfteq {

/// Quadratic value function of one trader in the reduced state
/// (M = predicted inventory, dS = current signal, Z = L - M):
///
///   v = -A/2 M^2 + B/2 dS^2 - C M dS + D - E/2 Z^2 - F M Z + G dS Z
struct ValueCoefficients {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double D = 0.0;
    double E = 0.0;
    double zeta = 0.0;  ///< optimal deviation response: dZ = -zeta*Z
    double F = 0.0;
    double G = 0.0;
    double eta = 0.0;   ///< 1 - lambda*beta_sigma
};

class ValueError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Coefficients for trader i of an untaxed equilibrium with phi_i in (0,1) and dt > 0.
/// Throws ValueError when (1-rho*dt)(1-phi)^2 >= 1 or the equilibrium is taxed.
ValueCoefficients value_coefficients(const Equilibrium& eq, std::size_t i,
                                     const ValidatedParams& params);

double evaluate_value(const ValueCoefficients& v, double M, double dS, double Z);

/// One-period reward of trader i in the reduced problem, given the others
/// follow their equilibrium strategies.
double reduced_reward(const Equilibrium& eq, std::size_t i, const ValidatedParams& params,
                      double M, double dS, double Z, double dZ);

/// Right-hand side of the dynamic programming equation at a given control dZ,
/// with the next-period signal integrated out in closed form.
double dpe_rhs(const ValueCoefficients& v, const Equilibrium& eq, std::size_t i,
               const ValidatedParams& params, double M, double dS, double Z, double dZ);

struct StatePoint {
    double M;
    double dS;
    double Z;
};

struct DpeResidual {
    double max_abs = 0.0;     ///< max |lhs - rhs|
    double max_scaled = 0.0;  ///< max |lhs - rhs| / (1 + |v|)
    StatePoint worst{};
};

/// LHS v/(1-rho*dt) against RHS at the optimal control dZ = -zeta*Z, over grid.
DpeResidual dpe_residual(const ValueCoefficients& v, const Equilibrium& eq, std::size_t i,
                         const ValidatedParams& params, std::span<const StatePoint> grid);

/// 5x5x5 grid: M over +-3 stationary std, dS over +-3 sigma_S sqrt(dt), Z in {-1,...,1}.
std::vector<StatePoint> default_dpe_grid(const Equilibrium& eq, std::size_t i,
                                         const ValidatedParams& params);

/// |F + gamma*dt - lambda*phi/(1-phi)|
double deviation_identity_residual(const ValueCoefficients& v, const Equilibrium& eq,
                                   std::size_t i, const ValidatedParams& params);

/// |E - 2*lambda*zeta*(1-rho*dt)|
double zeta_identity_residual(const ValueCoefficients& v, const Equilibrium& eq, std::size_t i,
                              const ValidatedParams& params);

/// Grid maximiser of dpe_rhs over dZ in [center - half_width, center + half_width].
double argmax_control(const ValueCoefficients& v, const Equilibrium& eq, std::size_t i,
                      const ValidatedParams& params, double M, double dS, double Z,
                      double center, double half_width, std::size_t points);

/// Deviations under the optimal response: Z_n = (1 - zeta)^n Z_0 for n = 0..steps.
std::vector<double> deviation_path(double zeta, double z0, std::size_t steps);

/// Names of coefficients with an unexpected sign (A, E, F >= 0; zeta in (0,1); G <= 0).
std::vector<std::string> sign_anomalies(const ValueCoefficients& v);

}  // namespace hfteq
