#include "hfteq/value.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hfteq {

ValueCoefficients value_coefficients(const Equilibrium& eq, std::size_t i,
                                     const ValidatedParams& p) {
    if (eq.tax != 0.0) throw ValueError("value coefficients are defined for untaxed equilibria");
    if (!(p.dt() > 0.0)) throw ValueError("value coefficients need dt > 0");
    const auto& t = p.trader(i);
    const double disc = 1.0 - t.rho * p.dt();  // one-period discount factor
    const double gdt = t.gamma * p.dt();
    const double lam = eq.lambda;
    const double beta = eq.betas.at(i);
    const double phi = eq.phis.at(i);
    const double ss2 = p.sigma_S() * p.sigma_S();

    ValueCoefficients v;
    v.eta = 1.0 - lam * eq.beta_sigma;

    const double keep2 = disc * (1.0 - phi) * (1.0 - phi);
    if (!(keep2 < 1.0)) {
        std::ostringstream os;
        os << "(1-rho*dt)(1-phi)^2 = " << keep2 << " >= 1";
        throw ValueError(os.str());
    }
    v.A = keep2 / (1.0 - keep2) * gdt;
    v.B = disc * beta * (2.0 * v.eta - beta * (v.A + gdt));
    v.C = disc * (beta * (1.0 - phi) * (v.A + gdt) + phi * v.eta);
    v.D = disc * v.B * ss2 / (2.0 * t.rho);

    // E^2 + E(gamma dt + 2 lambda rho dt) - 2 lambda gamma dt (1 - rho dt) = 0, positive root.
    const double b = gdt + 2.0 * lam * t.rho * p.dt();
    const double c = -2.0 * lam * gdt * disc;
    const double q = -0.5 * (b + std::sqrt(b * b - 4.0 * c));
    v.E = c / q;
    v.zeta = (v.E + gdt) / (v.E + gdt + 2.0 * lam);

    const double num = lam * phi * v.zeta + (1.0 - v.zeta) * (1.0 - phi) * gdt;
    const double den = phi + (1.0 - phi) * (v.zeta * disc + t.rho * p.dt());
    v.F = disc * num / den;
    v.G = disc * (-beta * (1.0 - v.zeta) * (v.F + gdt) + v.zeta * (lam * beta - v.eta));
    return v;
}

double evaluate_value(const ValueCoefficients& v, double M, double dS, double Z) {
    return -0.5 * v.A * M * M + 0.5 * v.B * dS * dS - v.C * M * dS + v.D - 0.5 * v.E * Z * Z -
           v.F * M * Z + v.G * dS * Z;
}

double reduced_reward(const Equilibrium& eq, std::size_t i, const ValidatedParams& p, double M,
                      double dS, double Z, double dZ) {
    const double eta = 1.0 - eq.lambda * eq.beta_sigma;
    const double beta = eq.betas.at(i);
    const double phi = eq.phis.at(i);
    const double gdt = p.trader(i).gamma * p.dt();
    const double trade = beta * dS - phi * M + dZ;
    const double inventory = beta * dS + (1.0 - phi) * M + Z + dZ;
    return (eta * dS - eq.lambda * dZ) * trade - 0.5 * gdt * inventory * inventory;
}

double dpe_rhs(const ValueCoefficients& v, const Equilibrium& eq, std::size_t i,
               const ValidatedParams& p, double M, double dS, double Z, double dZ) {
    const double m = eq.betas.at(i) * dS + (1.0 - eq.phis.at(i)) * M;
    const double z = Z + dZ;
    // E[v(m, sigma_S sqrt(dt) X, z)]: odd moments of X vanish.
    const double expected_next = -0.5 * v.A * m * m +
                                 0.5 * v.B * p.sigma_S() * p.sigma_S() * p.dt() + v.D -
                                 0.5 * v.E * z * z - v.F * m * z;
    return reduced_reward(eq, i, p, M, dS, Z, dZ) + expected_next;
}

DpeResidual dpe_residual(const ValueCoefficients& v, const Equilibrium& eq, std::size_t i,
                         const ValidatedParams& p, std::span<const StatePoint> grid) {
    const double disc = 1.0 - p.trader(i).rho * p.dt();
    DpeResidual out;
    for (const auto& pt : grid) {
        const double value = evaluate_value(v, pt.M, pt.dS, pt.Z);
        const double lhs = value / disc;
        const double rhs = dpe_rhs(v, eq, i, p, pt.M, pt.dS, pt.Z, -v.zeta * pt.Z);
        const double diff = std::abs(lhs - rhs);
        if (diff > out.max_abs) {
            out.max_abs = diff;
            out.worst = pt;
        }
        out.max_scaled = std::max(out.max_scaled, diff / (1.0 + std::abs(value)));
    }
    return out;
}

std::vector<StatePoint> default_dpe_grid(const Equilibrium& eq, std::size_t i,
                                         const ValidatedParams& p) {
    const double beta = eq.betas.at(i);
    const double phi = eq.phis.at(i);
    const double step_var = p.sigma_S() * p.sigma_S() * p.dt();
    const double keep2 = (1.0 - phi) * (1.0 - phi);
    // Stationary E[M^2] from the AR(1) second-moment recursion.
    const double m_std = keep2 < 1.0 ? std::sqrt(beta * beta * step_var / (1.0 - keep2)) : 1.0;
    const double s_std = std::sqrt(step_var);

    const double unit[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    std::vector<StatePoint> grid;
    grid.reserve(125);
    for (double a : unit) {
        for (double b : unit) {
            for (double z : unit) grid.push_back({3.0 * m_std * a, 3.0 * s_std * b, z});
        }
    }
    return grid;
}

double deviation_identity_residual(const ValueCoefficients& v, const Equilibrium& eq,
                                   std::size_t i, const ValidatedParams& p) {
    const double phi = eq.phis.at(i);
    return std::abs(v.F + p.trader(i).gamma * p.dt() - eq.lambda * phi / (1.0 - phi));
}

double zeta_identity_residual(const ValueCoefficients& v, const Equilibrium& eq, std::size_t i,
                              const ValidatedParams& p) {
    return std::abs(v.E - 2.0 * eq.lambda * v.zeta * (1.0 - p.trader(i).rho * p.dt()));
}

double argmax_control(const ValueCoefficients& v, const Equilibrium& eq, std::size_t i,
                      const ValidatedParams& p, double M, double dS, double Z, double center,
                      double half_width, std::size_t points) {
    double best = center;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < points; ++j) {
        const double dz =
            center - half_width + 2.0 * half_width * static_cast<double>(j) / (points - 1);
        const double value = dpe_rhs(v, eq, i, p, M, dS, Z, dz);
        if (value > best_value) {
            best_value = value;
            best = dz;
        }
    }
    return best;
}

std::vector<double> deviation_path(double zeta, double z0, std::size_t steps) {
    std::vector<double> z(steps + 1);
    z[0] = z0;
    for (std::size_t n = 1; n <= steps; ++n) z[n] = z[n - 1] - zeta * z[n - 1];
    return z;
}

std::vector<std::string> sign_anomalies(const ValueCoefficients& v) {
    std::vector<std::string> out;
    if (v.A < 0.0) out.emplace_back("A");
    if (!(v.E > 0.0)) out.emplace_back("E");
    if (!(v.zeta > 0.0 && v.zeta < 1.0)) out.emplace_back("zeta");
    if (v.F < 0.0) out.emplace_back("F");
    if (v.G > 0.0) out.emplace_back("G");
    return out;
}

}  // namespace hfteq
