#include "hfteq/asymptotics.hpp"

#include <cmath>
#include <sstream>

#include "hfteq/solver.hpp"
#include "hfteq/value.hpp"

namespace hfteq {

const char* to_string(Remainder r) {
    switch (r) {
        case Remainder::O_dt: return "O(dt)";
        case Remainder::O_dt_3_2: return "O(dt^3/2)";
    }
    return "?";
}

double Expansion::evaluate(double dt) const {
    return limit + half_order_coeff * std::sqrt(dt) + dt_coeff * dt;
}

namespace {

constexpr std::pair<Quantity, const char*> kNames[] = {
    {Quantity::Beta, "beta"}, {Quantity::BetaSigma, "beta_sigma"}, {Quantity::Lambda, "lambda"},
    {Quantity::Phi, "phi"},   {Quantity::Mu, "mu"},                {Quantity::A, "A"},
    {Quantity::B, "B"},       {Quantity::C, "C"},                  {Quantity::D, "D"},
};

bool is_aggregate(Quantity q) { return q == Quantity::BetaSigma || q == Quantity::Lambda; }

}  // namespace

const char* to_string(Quantity q) {
    for (const auto& [quantity, name] : kNames) {
        if (quantity == q) return name;
    }
    return "?";
}

std::optional<Quantity> quantity_from_string(const std::string& name) {
    for (const auto& [quantity, n] : kNames) {
        if (name == n) return quantity;
    }
    return std::nullopt;
}

const Expansion& MonopolyExpansions::at(Quantity q) const {
    switch (q) {
        case Quantity::Beta:
        case Quantity::BetaSigma: return beta;
        case Quantity::Lambda: return lambda;
        case Quantity::Phi: return phi;
        case Quantity::Mu: return mu;
        case Quantity::A: return A;
        case Quantity::B: return B;
        case Quantity::C: return C;
        case Quantity::D: return D;
    }
    throw std::invalid_argument("unknown quantity");
}

const Expansion& NashExpansions::at(Quantity q, std::size_t trader) const {
    if (q == Quantity::BetaSigma) return beta_sigma;
    if (q == Quantity::Lambda) return lambda;
    const auto& t = traders.at(trader);
    switch (q) {
        case Quantity::Beta: return t.beta;
        case Quantity::Phi: return t.phi;
        case Quantity::Mu: return t.mu;
        case Quantity::A: return t.A;
        case Quantity::B: return t.B;
        case Quantity::C: return t.C;
        case Quantity::D: return t.D;
        default: break;
    }
    throw std::invalid_argument("unknown quantity");
}

NashExpansions nash_expansions(const ValidatedParams& p) {
    const double k = static_cast<double>(p.k());
    const double s = p.sigma_ratio();
    const double sS = p.sigma_S();
    const double sK = p.sigma_K();
    const double k14 = std::pow(k, 0.25);
    const double k34 = std::pow(k, 0.75);
    const double root1k = std::sqrt(1.0 + k);

    double sum_g = 0.0;
    for (std::size_t i = 0; i < p.k(); ++i) sum_g += std::sqrt(p.trader(i).gamma);
    const double mean_g = sum_g / k;

    NashExpansions out;
    out.beta_sigma = {std::sqrt(k) * s, -root1k / (2.0 * k34) * sum_g * std::pow(s, 1.5)};
    out.lambda = {std::sqrt(k) / (1.0 + k) / s,
                  k14 * (k - 1.0) / (2.0 * std::pow(1.0 + k, 1.5)) * mean_g / std::sqrt(s)};

    out.traders.reserve(p.k());
    for (std::size_t i = 0; i < p.k(); ++i) {
        const double g = std::sqrt(p.trader(i).gamma);
        const double rho = p.trader(i).rho;
        const double bracket = (2.0 + 6.0 * k) * mean_g - 5.0 * (1.0 + k) * g;
        TraderExpansions t;
        t.beta = {s / std::sqrt(k), -root1k / (2.0 * k34) * (2.0 * g - mean_g) * std::pow(s, 1.5)};
        t.phi = {0.0, root1k / k14 * g * std::sqrt(s)};
        t.mu = {0.0, k14 / root1k * g / std::sqrt(s)};
        t.A = {0.0, k14 / (2.0 * root1k) * g / std::sqrt(s)};
        t.B = {2.0 * s / (std::sqrt(k) * (1.0 + k)),
               bracket * std::pow(s, 1.5) / (2.0 * k34 * std::pow(1.0 + k, 1.5))};
        t.C = {0.0, 3.0 / (2.0 * k14 * root1k) * g * std::sqrt(s)};
        t.D = {sS * sK / (std::sqrt(k) * (1.0 + k) * rho),
               bracket * std::sqrt(sS) * std::pow(sK, 1.5) /
                   (4.0 * k34 * std::pow(1.0 + k, 1.5) * rho)};
        out.traders.push_back(t);
    }

    if (p.k() == 1) {
        // The single-trader price impact has no sqrt(dt) term; its first
        // correction is -gamma/8 * dt.
        out.lambda.half_order_coeff = 0.0;
        out.lambda.dt_coeff = -p.trader(0).gamma / 8.0;
        out.lambda.stated_remainder = Remainder::O_dt_3_2;
    }
    return out;
}

MonopolyExpansions monopoly_expansions(const ValidatedParams& p) {
    const ValidatedParams single = p.k() == 1 ? p : p.with_traders({p.trader(0)});
    const NashExpansions n = nash_expansions(single);
    const TraderExpansions& t = n.traders.front();
    return {t.beta, n.lambda, t.phi, t.mu, t.A, t.B, t.C, t.D};
}

Expansion expansion_of(Quantity q, std::size_t trader, const ValidatedParams& p) {
    return nash_expansions(p).at(q, trader);
}

double exact_quantity(Quantity q, std::size_t trader, const ValidatedParams& p) {
    const Solution sol = solve(p);
    const Equilibrium& eq = sol.eq;
    switch (q) {
        case Quantity::Beta: return eq.betas.at(trader);
        case Quantity::BetaSigma: return eq.beta_sigma;
        case Quantity::Lambda: return eq.lambda;
        case Quantity::Phi: return eq.phis.at(trader);
        case Quantity::Mu: return eq.mus.at(trader);
        default: break;
    }
    const ValueCoefficients v = value_coefficients(eq, trader, p);
    switch (q) {
        case Quantity::A: return v.A;
        case Quantity::B: return v.B;
        case Quantity::C: return v.C;
        case Quantity::D: return v.D;
        default: break;
    }
    throw std::invalid_argument("unknown quantity");
}

ConvergenceTable convergence_order(Quantity q, const std::vector<double>& dt_grid,
                                   const ValidatedParams& p, std::size_t trader) {
    ConvergenceTable table{q, is_aggregate(q) ? 0 : trader, {}, {}};
    const Expansion e = expansion_of(q, trader, p);
    for (double dt : dt_grid) {
        double exact = 0.0;
        try {
            exact = exact_quantity(q, trader, p.with_dt(dt));
        } catch (const SolverError&) {
            table.infeasible.push_back(dt);
            continue;
        } catch (const ValueError&) {
            table.infeasible.push_back(dt);
            continue;
        } catch (const InvalidParams&) {
            table.infeasible.push_back(dt);
            continue;
        }
        ConvergenceRow row{dt, exact, e.evaluate(dt), 0.0, std::nullopt};
        row.abs_error = std::abs(row.exact - row.expansion);
        if (!table.rows.empty()) {
            const ConvergenceRow& prev = table.rows.back();
            row.order = std::log(prev.abs_error / row.abs_error) / std::log(prev.dt / row.dt);
        }
        table.rows.push_back(row);
    }
    if (table.rows.size() < 4) {
        std::ostringstream os;
        os << "only " << table.rows.size() << " feasible grid points for " << to_string(q)
           << "; need at least 4";
        throw InfeasiblePoint(os.str());
    }
    return table;
}

std::vector<double> geometric_grid(double a, double b, std::size_t n) {
    if (n < 2 || !(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("geometric grid needs n >= 2 and positive ends");
    }
    std::vector<double> out(n);
    const double la = std::log(a);
    const double step = (std::log(b) - la) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) out[j] = std::exp(la + step * static_cast<double>(j));
    out.front() = a;
    out.back() = b;
    return out;
}

}  // namespace hfteq
