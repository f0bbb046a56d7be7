#include "hfteq/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace hfteq {

// ---------------------------------------------------------------------------
// Philox4x32-10

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

/// (0, 1) from 53 bits; never 0 so the log in Box-Muller is finite.
inline double open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, c[0], hi0, lo0);
        mulhilo(kPhiloxM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ key[0], lo1, hi0 ^ c[3] ^ key[1], lo0};
    }
    return c;
}

std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                                  std::uint32_t stream) {
    const auto x = philox4x32(
        {step, stream, static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)},
        {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    const double u1 = open_unit(x[0], x[1]);
    const double u2 = open_unit(x[2], x[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

// ---------------------------------------------------------------------------
// Strategies

StrategySpec StrategySpec::scaled(double beta_scale, double phi_scale) {
    StrategySpec s;
    s.kind = StrategyKind::DeviationScaled;
    s.beta_scale = beta_scale;
    s.phi_scale = phi_scale;
    return s;
}

StrategySpec StrategySpec::with_z(double zeta, double initial_deviation) {
    StrategySpec s;
    s.kind = StrategyKind::DeviationWithZ;
    s.zeta = zeta;
    s.initial_deviation = initial_deviation;
    return s;
}

std::string StrategySpec::label() const {
    std::ostringstream os;
    switch (kind) {
        case StrategyKind::Equilibrium: os << "equilibrium"; break;
        case StrategyKind::DeviationScaled:
            os << "scaled(beta*" << beta_scale << ",phi*" << phi_scale << ")";
            break;
        case StrategyKind::DeviationWithZ: os << "z_response(" << zeta << ")"; break;
    }
    if (initial_deviation != 0.0) os << "[Z0=" << initial_deviation << "]";
    return os.str();
}

namespace {

using Code = SimulationError::Code;

std::size_t horizon_for(double discount, double tail_tol) {
    const double n = std::ceil(std::log(tail_tol) / std::log(discount));
    if (!(n <= 1e7)) {
        std::ostringstream os;
        os << "horizon for tail " << tail_tol << " needs " << n << " steps (cap 1e7)";
        throw SimulationError(Code::HorizonTooShort, os.str());
    }
    return static_cast<std::size_t>(std::max(1.0, n));
}

double min_discount_complement(const ValidatedParams& p) {
    double rho = p.trader(0).rho;
    for (std::size_t j = 1; j < p.k(); ++j) rho = std::min(rho, p.trader(j).rho);
    return 1.0 - rho * p.dt();
}

/// Coefficients of trader j's own inventory recursion under a strategy.
struct Rule {
    double beta;
    double phi;    ///< applied to L for DeviationScaled, to M otherwise
    double zeta;   ///< applied to Z = L - M
    bool on_own_inventory;
};

Rule rule_for(const StrategySpec& s, double beta, double phi) {
    switch (s.kind) {
        case StrategyKind::Equilibrium: return {beta, phi, 0.0, false};
        case StrategyKind::DeviationScaled:
            return {s.beta_scale * beta, s.phi_scale * phi, 0.0, true};
        case StrategyKind::DeviationWithZ: return {beta, phi, s.zeta, false};
    }
    return {beta, phi, 0.0, false};
}

void check_admissible(const StrategySpec& s, double phi) {
    if (s.kind == StrategyKind::DeviationScaled) {
        const double effective = s.phi_scale * phi;
        if (!(effective > 0.0 && effective < 2.0)) {
            std::ostringstream os;
            os << s.label() << ": mean reversion " << effective
               << " outside (0,2) gives unbounded inventory";
            throw SimulationError(Code::InadmissibleStrategy, os.str());
        }
    }
    if (s.kind == StrategyKind::DeviationWithZ && !(s.zeta >= 0.0 && s.zeta < 2.0)) {
        std::ostringstream os;
        os << s.label() << ": deviation response outside [0,2) gives unbounded inventory";
        throw SimulationError(Code::InadmissibleStrategy, os.str());
    }
}

/// Bound on E[L_n^2] for a strategy: initial terms plus the stationary variance.
double inventory_bound(const StrategySpec& s, double beta, double phi, double m0,
                       const ValidatedParams& p) {
    const Rule rule = rule_for(s, beta, phi);
    const double keep = (1.0 - rule.phi) * (1.0 - rule.phi);
    const double step_var = rule.beta * rule.beta * p.sigma_S() * p.sigma_S() * p.dt();
    const double z0 = s.initial_deviation;
    return m0 * m0 + z0 * z0 + step_var / (1.0 - keep);
}

void require_dt(const ValidatedParams& p) {
    if (!(p.dt() > 0.0)) throw SimulationError(Code::BadConfig, "simulation needs dt > 0");
}

std::size_t resolve_horizon(const SimConfig& cfg, const ValidatedParams& p, double bound) {
    if (cfg.horizon > 0) return cfg.horizon;
    return horizon_for(min_discount_complement(p), cfg.tail_tol / std::max(1.0, bound));
}

/// Runs body(path) for every path, split into contiguous chunks over workers.
void for_each_path(std::size_t n_paths, unsigned workers,
                   const std::function<void(std::size_t)>& body) {
    const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(workers, n_paths));
    if (w == 1) {
        for (std::size_t path = 0; path < n_paths; ++path) body(path);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t lo = n_paths * t / w;
        const std::size_t hi = n_paths * (t + 1) / w;
        threads.emplace_back([lo, hi, &body] {
            for (std::size_t path = lo; path < hi; ++path) body(path);
        });
    }
    for (auto& th : threads) th.join();
}

void check_tail(double discount, std::size_t horizon, double bound, double tail_tol) {
    const double tail = std::pow(discount, static_cast<double>(horizon)) * std::max(1.0, bound);
    if (tail > tail_tol) {
        std::ostringstream os;
        os << "discounted tail " << tail << " after " << horizon << " steps exceeds " << tail_tol;
        throw SimulationError(Code::HorizonTooShort, os.str());
    }
}

}  // namespace

std::size_t default_horizon(const ValidatedParams& p, double tail_tol) {
    require_dt(p);
    return horizon_for(min_discount_complement(p), tail_tol);
}

// ---------------------------------------------------------------------------
// Simulation

PathBatch simulate(const Equilibrium& eq, const std::vector<StrategySpec>& strategies,
                   const ValidatedParams& p, const SimConfig& cfg) {
    require_dt(p);
    const std::size_t k = p.k();
    if (strategies.size() != k || eq.k() != k) {
        throw SimulationError(Code::BadConfig, "need one strategy per trader");
    }
    if (cfg.n_paths == 0) throw SimulationError(Code::BadConfig, "n_paths must be positive");

    double bound = 0.0;
    std::vector<Rule> rules;
    std::vector<double> m0(k), z0(k), gdt(k);
    for (std::size_t j = 0; j < k; ++j) {
        check_admissible(strategies[j], eq.phis[j]);
        rules.push_back(rule_for(strategies[j], eq.betas[j], eq.phis[j]));
        m0[j] = p.trader(j).initial_inventory;
        z0[j] = strategies[j].initial_deviation;
        gdt[j] = p.trader(j).gamma * p.dt();
        bound = std::max(bound, inventory_bound(strategies[j], eq.betas[j], eq.phis[j], m0[j], p));
    }
    const std::size_t n_eq_deviators = std::count_if(
        strategies.begin(), strategies.end(),
        [](const StrategySpec& s) { return s.kind != StrategyKind::Equilibrium; });

    PathBatch b;
    b.n_paths = cfg.n_paths;
    b.horizon = resolve_horizon(cfg, p, bound);
    b.k = k;
    b.seed = cfg.seed;
    b.tail_bound = bound;
    b.initial_inventory = m0;
    for (std::size_t j = 0; j < k; ++j) b.discounts.push_back(1.0 - p.trader(j).rho * p.dt());
    b.objective.assign(cfg.n_paths * k, 0.0);
    b.mark_to_market.assign(cfg.n_paths * k, 0.0);
    const std::size_t N = b.horizon;
    if (cfg.record_paths) {
        const std::size_t cells = cfg.n_paths * N;
        b.dS.resize(cells);
        b.dK.resize(cells);
        b.dY.resize(cells);
        b.price_adj.resize(cells);
        b.L.resize(cells * k);
        b.M.resize(cells * k);
        b.payoff.resize(cells * k);
    }

    const double sd_S = p.sigma_S() * std::sqrt(p.dt());
    const double sd_K = p.sigma_K() * std::sqrt(p.dt());
    const double lam = eq.lambda;
    const double eta = 1.0 - lam * eq.beta_sigma;
    const double tax = eq.tax;
    std::vector<double> path_gap(cfg.n_paths, 0.0), path_dev(cfg.n_paths, 0.0);

    for_each_path(cfg.n_paths, cfg.workers, [&](std::size_t path) {
        std::vector<double> L(k), M(k), dL(k), dM(k), weight(k, 1.0);
        for (std::size_t j = 0; j < k; ++j) {
            M[j] = m0[j];
            L[j] = m0[j] + z0[j];
        }
        double* obj = &b.objective[path * k];
        double* mtm = &b.mark_to_market[path * k];
        double gap = 0.0;
        double dev = 0.0;
        for (std::size_t n = 1; n <= N; ++n) {
            const auto z = normal_pair(cfg.seed, path, static_cast<std::uint32_t>(n), 0);
            const double dS = sd_S * z[0];
            const double dK = sd_K * z[1];
            double flow = dK;
            double adj_m = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                const Rule& r = rules[j];
                dM[j] = eq.betas[j] * dS - eq.phis[j] * M[j];
                dL[j] = r.on_own_inventory ? r.beta * dS - r.phi * L[j]
                                           : r.beta * dS - r.phi * M[j] - r.zeta * (L[j] - M[j]);
                flow += dL[j];
                adj_m += eq.mus[j] * M[j];
            }
            const double adj = lam * flow + adj_m;
            const std::size_t cell = path * N + (n - 1);
            if (cfg.record_paths) {
                b.dS[cell] = dS;
                b.dK[cell] = dK;
                b.dY[cell] = flow;
                b.price_adj[cell] = adj;
            }
            for (std::size_t j = 0; j < k; ++j) {
                const double L_new = L[j] + dL[j];
                const double term =
                    (dS - adj) * dL[j] - tax * dL[j] * dL[j] - 0.5 * gdt[j] * L_new * L_new;
                // Others on the equilibrium rule: only own M and Z enter the price.
                const bool others_eq =
                    n_eq_deviators == 0 ||
                    (n_eq_deviators == 1 && strategies[j].kind != StrategyKind::Equilibrium);
                if (others_eq) {
                    const double dZ = dL[j] - dM[j];
                    const double reduced = (eta * dS - lam * dK - lam * dZ) * dL[j] -
                                           tax * dL[j] * dL[j] - 0.5 * gdt[j] * L_new * L_new;
                    gap = std::max(gap, std::abs(term - reduced));
                }
                weight[j] *= b.discounts[j];
                obj[j] += weight[j] * term;
                mtm[j] += weight[j] * L[j] * dS;
                L[j] = L_new;
                M[j] += dM[j];
                dev = std::max(dev, std::abs(L[j] - M[j]));
                if (cfg.record_paths) {
                    b.L[cell * k + j] = L[j];
                    b.M[cell * k + j] = M[j];
                    b.payoff[cell * k + j] = term;
                }
            }
        }
        path_gap[path] = gap;
        path_dev[path] = dev;
    });

    for (std::size_t path = 0; path < cfg.n_paths; ++path) {
        b.max_reduced_gap = std::max(b.max_reduced_gap, path_gap[path]);
        b.max_deviation = std::max(b.max_deviation, path_dev[path]);
    }
    return b;
}

Estimate estimate_mean(const std::vector<double>& x) {
    Estimate e;
    e.n_samples = x.size();
    if (x.empty()) return e;
    double sum = 0.0;
    for (double v : x) sum += v;
    e.mean = sum / static_cast<double>(x.size());
    if (x.size() > 1) {
        double ss = 0.0;
        for (double v : x) ss += (v - e.mean) * (v - e.mean);
        e.std_error = std::sqrt(ss / static_cast<double>(x.size() - 1) /
                                static_cast<double>(x.size()));
    }
    e.ci_lo = e.mean - 1.96 * e.std_error;
    e.ci_hi = e.mean + 1.96 * e.std_error;
    return e;
}

namespace {

std::vector<double> column(const std::vector<double>& data, std::size_t n_paths, std::size_t k,
                           std::size_t trader) {
    std::vector<double> out(n_paths);
    for (std::size_t path = 0; path < n_paths; ++path) out[path] = data[path * k + trader];
    return out;
}

}  // namespace

Estimate estimate_objective(const PathBatch& batch, std::size_t trader, double tail_tol) {
    check_tail(batch.discounts.at(trader), batch.horizon, batch.tail_bound, tail_tol);
    return estimate_mean(column(batch.objective, batch.n_paths, batch.k, trader));
}

Estimate estimate_mark_to_market(const PathBatch& batch, std::size_t trader) {
    if (trader >= batch.k) throw std::out_of_range("trader index");
    return estimate_mean(column(batch.mark_to_market, batch.n_paths, batch.k, trader));
}

DealerProfit dealer_profit_check(const PathBatch& b, const Equilibrium& eq) {
    if (!b.recorded()) {
        throw SimulationError(Code::MissingPaths, "dealer profit check needs recorded paths");
    }
    const std::size_t k = b.k;
    const std::size_t N = b.horizon;
    std::vector<double> path_profit(b.n_paths);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t path = 0; path < b.n_paths; ++path) {
        double total = 0.0;
        for (std::size_t n = 1; n <= N; ++n) {
            const std::size_t cell = path * N + (n - 1);
            double adj_m = 0.0;
            double reverted = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                const double m_prev = n == 1 ? b.initial_inventory[j] : b.M[(cell - 1) * k + j];
                adj_m += eq.mus[j] * m_prev;
                reverted += eq.phis[j] * m_prev;
            }
            const double dY = b.dY[cell];
            const double dS = b.dS[cell];
            total += (eq.lambda * dY + adj_m - dS) * dY;
            const double x = dY + reverted;
            sxy += x * dS;
            sxx += x * x;
        }
        path_profit[path] = total / static_cast<double>(N);
    }

    DealerProfit out;
    out.profit = estimate_mean(path_profit);
    out.rounds = b.n_paths * N;
    out.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    double rss = 0.0;
    for (std::size_t path = 0; path < b.n_paths; ++path) {
        for (std::size_t n = 1; n <= N; ++n) {
            const std::size_t cell = path * N + (n - 1);
            double reverted = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                const double m_prev = n == 1 ? b.initial_inventory[j] : b.M[(cell - 1) * k + j];
                reverted += eq.phis[j] * m_prev;
            }
            const double resid = b.dS[cell] - out.slope * (b.dY[cell] + reverted);
            rss += resid * resid;
        }
    }
    if (sxx > 0.0 && out.rounds > 1) {
        out.slope_se = std::sqrt(rss / static_cast<double>(out.rounds - 1) / sxx);
    }
    return out;
}

double inventory_second_moment(double m0, double beta, double phi, const ValidatedParams& p,
                               std::size_t n) {
    const double keep = (1.0 - phi) * (1.0 - phi);
    const double step_var = beta * beta * p.sigma_S() * p.sigma_S() * p.dt();
    const double nn = static_cast<double>(n);
    const double decay = std::pow(keep, nn);
    const double sum = std::abs(1.0 - phi) == 1.0 ? nn : (1.0 - decay) / (1.0 - keep);
    return decay * m0 * m0 + step_var * sum;
}

bool second_moment_bounded(double phi) { return phi > 0.0 && phi < 2.0; }

Estimate mc_inventory_second_moment(double m0, double beta, double phi, const ValidatedParams& p,
                                    std::size_t n, std::size_t n_paths, std::uint64_t seed) {
    const double sd_S = p.sigma_S() * std::sqrt(p.dt());
    std::vector<double> samples(n_paths);
    for (std::size_t path = 0; path < n_paths; ++path) {
        double m = m0;
        for (std::size_t step = 1; step <= n; ++step) {
            const double dS = sd_S * normal_pair(seed, path, static_cast<std::uint32_t>(step), 1)[0];
            m += beta * dS - phi * m;
        }
        samples[path] = m * m;
    }
    return estimate_mean(samples);
}

// ---------------------------------------------------------------------------
// Deviation sweep

SweepResult deviation_sweep(const Equilibrium& eq, std::size_t trader, const ValidatedParams& p,
                            const std::vector<StrategySpec>& specs, std::size_t reference,
                            const SimConfig& cfg) {
    require_dt(p);
    const std::size_t k = p.k();
    const std::size_t R = specs.size();
    if (trader >= k || reference >= R || cfg.n_paths < 2) {
        throw SimulationError(Code::BadConfig, "bad sweep: trader, reference or path count");
    }
    double bound = 0.0;
    std::vector<Rule> rules;
    for (const auto& s : specs) {
        check_admissible(s, eq.phis[trader]);
        rules.push_back(rule_for(s, eq.betas[trader], eq.phis[trader]));
        bound = std::max(bound, inventory_bound(s, eq.betas[trader], eq.phis[trader],
                                                p.trader(trader).initial_inventory, p));
    }
    const std::size_t N = resolve_horizon(cfg, p, bound);
    const double discount = 1.0 - p.trader(trader).rho * p.dt();
    check_tail(discount, N, bound, cfg.tail_tol);

    const double sd_S = p.sigma_S() * std::sqrt(p.dt());
    const double sd_K = p.sigma_K() * std::sqrt(p.dt());
    const double lam = eq.lambda;
    const double half_gdt = 0.5 * p.trader(trader).gamma * p.dt();
    const double tax = eq.tax;
    std::vector<double> obj(cfg.n_paths * R, 0.0);

    for_each_path(cfg.n_paths, cfg.workers, [&](std::size_t path) {
        std::vector<double> M(k), L(R), dL(R);
        for (std::size_t j = 0; j < k; ++j) M[j] = p.trader(j).initial_inventory;
        for (std::size_t r = 0; r < R; ++r) L[r] = M[trader] + specs[r].initial_deviation;
        double* out = &obj[path * R];
        double weight = 1.0;
        for (std::size_t n = 1; n <= N; ++n) {
            const auto z = normal_pair(cfg.seed, path, static_cast<std::uint32_t>(n), 0);
            const double dS = sd_S * z[0];
            const double dK = sd_K * z[1];
            // Everything in the price except trader `trader`'s own order.
            double others = dK;
            double adj_m = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                adj_m += eq.mus[j] * M[j];
                if (j != trader) others += eq.betas[j] * dS - eq.phis[j] * M[j];
            }
            const double common = dS - lam * others - adj_m;
            const double m_own = M[trader];
            weight *= discount;
            for (std::size_t r = 0; r < R; ++r) {
                const Rule& rule = rules[r];
                const double d = rule.on_own_inventory
                                     ? rule.beta * dS - rule.phi * L[r]
                                     : rule.beta * dS - rule.phi * m_own - rule.zeta * (L[r] - m_own);
                const double L_new = L[r] + d;
                out[r] += weight * ((common - lam * d) * d - tax * d * d - half_gdt * L_new * L_new);
                L[r] = L_new;
            }
            for (std::size_t j = 0; j < k; ++j) M[j] += eq.betas[j] * dS - eq.phis[j] * M[j];
        }
    });

    SweepResult res;
    res.reference = reference;
    std::vector<double> own(cfg.n_paths), diff(cfg.n_paths);
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t path = 0; path < cfg.n_paths; ++path) {
            own[path] = obj[path * R + r];
            diff[path] = own[path] - obj[path * R + reference];
        }
        res.rows.push_back({specs[r], estimate_mean(own), estimate_mean(diff)});
        if (res.rows[r].objective.mean > res.rows[res.argmax].objective.mean) res.argmax = r;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Export

std::vector<std::string> path_columns(std::size_t k) {
    std::vector<std::string> cols = {"path", "n", "dS", "dK", "price_adj"};
    for (std::size_t j = 0; j < k; ++j) {
        cols.push_back("L_" + std::to_string(j));
        cols.push_back("M_" + std::to_string(j));
        cols.push_back("payoff_" + std::to_string(j));
    }
    return cols;
}

namespace {

template <typename Row>
void for_each_row(const PathBatch& b, Row&& row) {
    if (!b.recorded()) {
        throw SimulationError(Code::MissingPaths, "export needs recorded paths");
    }
    std::vector<double> values(5 + 3 * b.k);
    for (std::size_t path = 0; path < b.n_paths; ++path) {
        for (std::size_t n = 1; n <= b.horizon; ++n) {
            const std::size_t cell = path * b.horizon + (n - 1);
            values[0] = static_cast<double>(path);
            values[1] = static_cast<double>(n);
            values[2] = b.dS[cell];
            values[3] = b.dK[cell];
            values[4] = b.price_adj[cell];
            for (std::size_t j = 0; j < b.k; ++j) {
                values[5 + 3 * j] = b.L[cell * b.k + j];
                values[6 + 3 * j] = b.M[cell * b.k + j];
                values[7 + 3 * j] = b.payoff[cell * b.k + j];
            }
            row(values);
        }
    }
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

}  // namespace

void write_paths_csv(const PathBatch& b, std::ostream& out) {
    const auto cols = path_columns(b.k);
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << '\n';
    const auto old = out.precision(17);
    for_each_row(b, [&](const std::vector<double>& v) {
        out << static_cast<std::size_t>(v[0]) << ',' << static_cast<std::size_t>(v[1]);
        for (std::size_t c = 2; c < v.size(); ++c) out << ',' << v[c];
        out << '\n';
    });
    out.precision(old);
}

void write_paths_binary(const PathBatch& b, std::ostream& out) {
    out.write("HFTEQPB1", 8);
    put_u64(out, b.n_paths * b.horizon);
    put_u64(out, 5 + 3 * b.k);
    for_each_row(b, [&](const std::vector<double>& v) {
        for (double x : v) put_u64(out, std::bit_cast<std::uint64_t>(x));
    });
}

}  // namespace hfteq
