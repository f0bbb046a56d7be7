#include "hfteq/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "hfteq/asymptotics.hpp"
#include "hfteq/simulator.hpp"
#include "hfteq/value.hpp"

namespace hfteq::cli {

using nlohmann::json;

Tolerances Tolerances::halved() const {
    Tolerances t = *this;
    t.quartic_residual /= 2.0;
    t.nash_residual /= 2.0;
    t.identity /= 2.0;
    t.dpe_scaled /= 2.0;
    return t;
}

bool VerificationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.pass || c.advisory; });
}

json VerificationReport::to_json() const {
    json arr = json::array();
    for (const auto& c : checks) {
        arr.push_back({{"name", c.name},
                       {"value", c.value},
                       {"tolerance", c.tolerance},
                       {"pass", c.pass},
                       {"advisory", c.advisory},
                       {"detail", c.detail}});
    }
    return {{"passed", passed()}, {"checks", arr}};
}

json equilibrium_to_json(const Equilibrium& eq) {
    return {{"betas", eq.betas}, {"beta_sigma", eq.beta_sigma}, {"lambda", eq.lambda},
            {"phis", eq.phis},   {"mus", eq.mus},               {"tax", eq.tax}};
}

namespace {

json value_to_json(const ValueCoefficients& v) {
    return {{"A", v.A}, {"B", v.B}, {"C", v.C},       {"D", v.D},   {"E", v.E},
            {"zeta", v.zeta}, {"F", v.F}, {"G", v.G}, {"eta", v.eta}};
}

json estimate_to_json(const Estimate& e) {
    return {{"mean", e.mean},
            {"std_error", e.std_error},
            {"n_samples", e.n_samples},
            {"ci95", {e.ci_lo, e.ci_hi}}};
}

std::vector<std::string> split(const std::string& s, const std::string& sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + sep.size();
    }
    return parts;
}

double to_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw ConfigError("bad number '" + s + "' in " + what);
    return v;
}

struct GridSpec {
    double a, b;
    std::size_t n;
};

GridSpec parse_grid(const std::string& spec) {
    const auto parts = split(spec, ":");
    if (parts.size() != 3) throw ConfigError("grid must be a:b:n, got '" + spec + "'");
    const double n = to_double(parts[2], spec);
    if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("grid count must be a positive integer");
    return {to_double(parts[0], spec), to_double(parts[1], spec), static_cast<std::size_t>(n)};
}

}  // namespace

std::vector<double> parse_geometric_grid(const std::string& spec) {
    const GridSpec g = parse_grid(spec);
    if (!(g.a > 0.0 && g.b > 0.0)) throw ConfigError("geometric grid needs positive ends");
    if (g.n == 1) return {g.a};
    return geometric_grid(g.a, g.b, g.n);
}

std::vector<double> parse_linear_grid(const std::string& spec) {
    const GridSpec g = parse_grid(spec);
    if (g.n == 1) return {g.a};
    std::vector<double> out(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
        out[j] = g.a + (g.b - g.a) * static_cast<double>(j) / static_cast<double>(g.n - 1);
    }
    return out;
}

std::vector<std::size_t> parse_int_range(const std::string& spec) {
    const auto parts = split(spec, "..");
    if (parts.size() != 2) throw ConfigError("range must be a..b, got '" + spec + "'");
    const double a = to_double(parts[0], spec);
    const double b = to_double(parts[1], spec);
    if (!(a >= 1.0) || a != std::floor(a) || b != std::floor(b) || b < a) {
        throw ConfigError("range needs integers 1 <= a <= b, got '" + spec + "'");
    }
    std::vector<std::size_t> out;
    for (auto v = static_cast<std::size_t>(a); v <= static_cast<std::size_t>(b); ++v) out.push_back(v);
    return out;
}

MarketParams params_from_document(const json& doc) {
    if (doc.is_object() && doc.contains("params")) return params_from_json(doc.at("params"));
    return params_from_json(doc);
}

// ---------------------------------------------------------------------------
// verify

namespace {

CheckResult bound_check(std::string name, double value, double tol, std::string detail = {}) {
    return {std::move(name), value, tol, value <= tol, false, std::move(detail)};
}

std::string trader_suffix(std::size_t i) { return "[" + std::to_string(i) + "]"; }

}  // namespace

VerificationReport verify(const ValidatedParams& p, const VerifyOptions& opt) {
    if (!(p.dt() > 0.0)) throw ConfigError("verify needs dt > 0");
    const Tolerances& tol = opt.tol;
    VerificationReport rep;
    auto& checks = rep.checks;

    const Solution sol = solve(p);
    const Equilibrium& eq = sol.eq;
    const auto& diag = sol.diagnostics;
    const bool monopoly = p.k() == 1 && p.tax() == 0.0;
    const double worst = *std::max_element(diag.residuals.begin(), diag.residuals.end());
    checks.push_back(bound_check(monopoly ? "quartic_residual" : "best_response_residual", worst,
                                 monopoly ? tol.quartic_residual : tol.nash_residual));
    checks.push_back({"gap_decreasing", diag.monotone_witness ? 1.0 : 0.0, 1.0,
                      diag.monotone_witness, false, "10 interior samples of the aggregate gap"});
    checks.push_back(bound_check("lambda_beta_sigma", eq.lambda * eq.beta_sigma,
                                 std::nextafter(1.0, 0.0), "must stay below 1"));

    std::vector<ValueCoefficients> values;
    if (p.tax() == 0.0) {
        for (std::size_t i = 0; i < p.k(); ++i) {
            const ValueCoefficients v = value_coefficients(eq, i, p);
            values.push_back(v);
            const std::string s = trader_suffix(i);
            checks.push_back(bound_check("deviation_identity" + s,
                                         deviation_identity_residual(v, eq, i, p), tol.identity));
            checks.push_back(bound_check("zeta_identity" + s, zeta_identity_residual(v, eq, i, p),
                                         tol.identity));
            const auto grid = default_dpe_grid(eq, i, p);
            checks.push_back(
                bound_check("dpe_residual" + s, dpe_residual(v, eq, i, p, grid).max_scaled,
                            tol.dpe_scaled, "max |lhs-rhs|/(1+|v|) over 125 points"));
            const auto odd = sign_anomalies(v);
            std::string names;
            for (const auto& n : odd) names += (names.empty() ? "" : ",") + n;
            checks.push_back({"coefficient_signs" + s, static_cast<double>(odd.size()), 0.0,
                              odd.empty(), true, odd.empty() ? "as expected" : names});
        }
    }

    const std::vector<StrategySpec> all_eq(p.k(), StrategySpec::equilibrium());

    // Dealer break-even over path-rounds.
    {
        SimConfig cfg;
        cfg.n_paths = opt.paths;
        cfg.horizon = 1000;
        cfg.seed = opt.seed;
        cfg.record_paths = true;
        cfg.workers = opt.workers;
        const PathBatch batch = simulate(eq, all_eq, p, cfg);
        const DealerProfit dp = dealer_profit_check(batch, eq);
        const double z = dp.profit.std_error > 0.0 ? std::abs(dp.profit.mean) / dp.profit.std_error : 0.0;
        checks.push_back({"dealer_profit", z, 1.96, dp.profit.covers(0.0), false,
                          "|mean|/SE of per-round dealer profit"});
        const double zs = dp.slope_se > 0.0 ? std::abs(dp.slope - eq.lambda) / dp.slope_se : 0.0;
        checks.push_back(bound_check("impact_slope", zs, tol.slope_se,
                                     "|slope - lambda|/SE of the flow regression"));
    }

    // Second moment of predicted inventory against the closed form.
    for (std::size_t n : {1u, 10u, 100u}) {
        const double m0 = p.trader(0).initial_inventory;
        const double exact = inventory_second_moment(m0, eq.betas[0], eq.phis[0], p, n);
        const Estimate e = mc_inventory_second_moment(m0, eq.betas[0], eq.phis[0], p, n,
                                                      10 * opt.paths, opt.seed);
        const double z = e.std_error > 0.0 ? std::abs(e.mean - exact) / e.std_error : 0.0;
        checks.push_back(bound_check("inventory_moment[n=" + std::to_string(n) + "]", z,
                                     tol.moment_se, "|mc - closed form|/SE"));
    }

    // Discounted objective against the value function.
    if (!values.empty()) {
        SimConfig cfg;
        cfg.n_paths = opt.paths;
        cfg.seed = opt.seed + 1;
        cfg.workers = opt.workers;
        const PathBatch batch = simulate(eq, all_eq, p, cfg);
        for (std::size_t i = 0; i < p.k(); ++i) {
            const ValueCoefficients& v = values[i];
            const double m0 = p.trader(i).initial_inventory;
            const double target = -0.5 * v.A * m0 * m0 +
                                  0.5 * v.B * p.sigma_S() * p.sigma_S() * p.dt() + v.D;
            const Estimate e = estimate_objective(batch, i);
            const double z = std::abs(e.mean - target) / e.std_error;
            checks.push_back(bound_check("objective_vs_value" + trader_suffix(i), z, tol.value_se,
                                         "|mc - analytic|/SE"));
            const Estimate mtm = estimate_mark_to_market(batch, i);
            checks.push_back(bound_check("mark_to_market" + trader_suffix(i),
                                         std::abs(mtm.mean) / mtm.std_error, tol.value_se,
                                         "|mean|/SE of the dropped L dS term"));
        }
    }

    // Unilateral deviations by trader 0.
    {
        SimConfig cfg;
        cfg.n_paths = opt.paths;
        cfg.seed = opt.seed + 2;
        cfg.workers = opt.workers;
        std::vector<StrategySpec> specs = {StrategySpec::equilibrium()};
        for (double s : {0.8, 0.9, 1.1, 1.2}) specs.push_back(StrategySpec::scaled(s, 1.0));
        for (double s : {0.8, 0.9, 1.1, 1.2}) specs.push_back(StrategySpec::scaled(1.0, s));
        const SweepResult sweep = deviation_sweep(eq, 0, p, specs, 0, cfg);
        double worst_z = -std::numeric_limits<double>::infinity();
        std::string worst_label;
        for (std::size_t r = 1; r < sweep.rows.size(); ++r) {
            const Estimate& g = sweep.rows[r].gain;
            const double z = g.mean / g.std_error;
            if (z > worst_z) {
                worst_z = z;
                worst_label = sweep.rows[r].spec.label();
            }
        }
        checks.push_back(bound_check("deviation_gain", worst_z, tol.deviation_se,
                                     "largest (deviation - equilibrium)/SE: " + worst_label));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// run

namespace {

struct Inline {
    double sigma_S = 1.0, sigma_K = 1.0, dt = 0.004, tax = 0.0;
    std::vector<double> gamma{1.0}, rho{0.05}, initial_inventory{0.0};
    std::size_t num_traders = 1;
};

struct Options {
    std::string config;
    std::string out;
    std::string format = "json";
    std::size_t paths = 0;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::size_t horizon = 0;
    std::string dt_grid, k_grid, c_grid, paths_out;
    bool strict = false;
    Inline in;
};

std::vector<double> broadcast(const std::vector<double>& v, std::size_t k, const char* name) {
    if (v.size() == k) return v;
    if (v.size() == 1) return std::vector<double>(k, v[0]);
    throw ConfigError(std::string("--") + name + " needs 1 or " + std::to_string(k) + " values");
}

MarketParams resolve_params(const Options& o, const CLI::App& app) {
    MarketParams m;
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) throw ConfigError("cannot open config " + o.config);
        json doc;
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        m = params_from_document(doc);
    } else {
        m.sigma_S = o.in.sigma_S;
        m.sigma_K = o.in.sigma_K;
        m.dt = o.in.dt;
        m.tax = o.in.tax;
    }
    const auto given = [&](const char* name) { return app.count(name) > 0; };
    if (given("--sigma-S")) m.sigma_S = o.in.sigma_S;
    if (given("--sigma-K")) m.sigma_K = o.in.sigma_K;
    if (given("--dt")) m.dt = o.in.dt;
    if (given("--tax")) m.tax = o.in.tax;

    const bool trader_flags = given("--gamma") || given("--rho") || given("--num-traders") ||
                              given("--initial-inventory");
    if (o.config.empty() || trader_flags) {
        std::size_t k = o.in.num_traders;
        if (!given("--num-traders")) {
            k = std::max({o.in.gamma.size(), o.in.rho.size(), o.in.initial_inventory.size()});
            if (!o.config.empty() && !m.traders.empty() && k == 1) k = m.traders.size();
        }
        if (k == 0) throw ConfigError("--num-traders must be at least 1");
        const auto base = m.traders;
        const auto pick = [&](const std::vector<double>& v, const char* flag, double TraderParams::*f) {
            std::vector<double> out(k);
            if (given((std::string("--") + flag).c_str()) || base.empty()) {
                out = broadcast(v, k, flag);
            } else {
                for (std::size_t j = 0; j < k; ++j) out[j] = base[std::min(j, base.size() - 1)].*f;
            }
            return out;
        };
        const auto g = pick(o.in.gamma, "gamma", &TraderParams::gamma);
        const auto r = pick(o.in.rho, "rho", &TraderParams::rho);
        const auto l = pick(o.in.initial_inventory, "initial-inventory",
                            &TraderParams::initial_inventory);
        m.traders.clear();
        for (std::size_t j = 0; j < k; ++j) m.traders.push_back({g[j], r[j], l[j]});
    }
    return m;
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

/// Rows of named numeric columns, printed as CSV or a JSON array of objects.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;

    void emit(std::ostream& out, const std::string& format) const {
        if (format == "json") {
            json arr = json::array();
            for (const auto& row : rows) {
                json obj = json::object();
                for (std::size_t c = 0; c < columns.size(); ++c) obj[columns[c]] = row[c];
                arr.push_back(obj);
            }
            out << arr.dump(2) << '\n';
            return;
        }
        for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
        out << '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out << ',';
                const json& v = row[c];
                if (v.is_number_float()) out << format_double(v.get<double>());
                else if (v.is_string()) out << v.get<std::string>();
                else out << v.dump();
            }
            out << '\n';
        }
    }
};

int cmd_solve(const ValidatedParams& p, const Options& o, std::ostream& out) {
    const Solution sol = solve(p);
    const Equilibrium& eq = sol.eq;
    std::vector<ValueCoefficients> values;
    if (p.tax() == 0.0 && p.dt() > 0.0) {
        for (std::size_t i = 0; i < p.k(); ++i) values.push_back(value_coefficients(eq, i, p));
    }
    if (o.format == "csv") {
        Table t;
        t.columns = {"trader", "beta", "phi", "mu", "beta_sigma", "lambda", "tax"};
        if (!values.empty()) {
            for (const char* c : {"A", "B", "C", "D", "E", "zeta", "F", "G", "eta"}) t.columns.push_back(c);
        }
        for (std::size_t i = 0; i < p.k(); ++i) {
            std::vector<json> row = {i, eq.betas[i], eq.phis[i], eq.mus[i], eq.beta_sigma, eq.lambda, eq.tax};
            if (!values.empty()) {
                const auto& v = values[i];
                for (double x : {v.A, v.B, v.C, v.D, v.E, v.zeta, v.F, v.G, v.eta}) row.push_back(x);
            }
            t.rows.push_back(row);
        }
        t.emit(out, "csv");
        return Ok;
    }
    json doc;
    doc["params"] = params_to_json(p.raw());
    doc["equilibrium"] = equilibrium_to_json(eq);
    json vs = json::array();
    for (const auto& v : values) vs.push_back(value_to_json(v));
    doc["value"] = vs;
    const auto& d = sol.diagnostics;
    json rejected = json::array();
    for (const auto& r : d.rejected_roots) rejected.push_back({{"value", r.value}, {"reason", r.reason}});
    doc["diagnostics"] = {{"iterations", d.iterations},
                          {"bracket", {d.bracket_lo, d.bracket_hi}},
                          {"residuals", d.residuals},
                          {"sum_residual", d.sum_residual},
                          {"rejected_roots", rejected},
                          {"continuation_steps", d.continuation_steps},
                          {"monotone_witness", d.monotone_witness},
                          {"closed_form", d.closed_form}};
    out << doc.dump(2) << '\n';
    return Ok;
}

int cmd_expand(const ValidatedParams& p, const Options& o, std::ostream& out) {
    const NashExpansions e = nash_expansions(p);
    Table t;
    t.columns = {"quantity", "trader", "limit", "half_order_coeff", "dt_coeff", "remainder"};
    const auto add = [&](Quantity q, std::size_t i) {
        const Expansion& x = e.at(q, i);
        t.rows.push_back({to_string(q), i, x.limit, x.half_order_coeff, x.dt_coeff,
                          to_string(x.stated_remainder)});
    };
    add(Quantity::BetaSigma, 0);
    add(Quantity::Lambda, 0);
    for (std::size_t i = 0; i < p.k(); ++i) {
        for (Quantity q : {Quantity::Beta, Quantity::Phi, Quantity::Mu, Quantity::A, Quantity::B,
                           Quantity::C, Quantity::D}) {
            add(q, i);
        }
    }
    t.emit(out, o.format);
    return Ok;
}

int cmd_sweep_dt(const ValidatedParams& p, const Options& o, std::ostream& out, std::ostream& err) {
    const auto grid = parse_geometric_grid(o.dt_grid);
    const NashExpansions e = nash_expansions(p);
    const TraderExpansions& te = e.traders.front();
    Table t;
    t.columns = {"dt",        "beta_exact",       "beta_limit",       "beta_expansion",
                 "lambda_exact", "lambda_limit",   "lambda_expansion", "phi_over_dt_exact",
                 "phi_over_dt_expansion", "mu_exact", "mu_expansion", "D_exact",
                 "D_limit",   "D_expansion"};
    for (double dt : grid) {
        try {
            const ValidatedParams q = p.with_dt(dt);
            const Equilibrium eq = solve(q).eq;
            const double D = value_coefficients(eq, 0, q).D;
            t.rows.push_back({dt, eq.betas[0], te.beta.limit, te.beta.evaluate(dt), eq.lambda,
                              e.lambda.limit, e.lambda.evaluate(dt), eq.phis[0] / dt,
                              te.phi.evaluate(dt) / dt, eq.mus[0], te.mu.evaluate(dt), D,
                              te.D.limit, te.D.evaluate(dt)});
        } catch (const std::exception& ex) {
            err << "dt=" << format_double(dt) << " skipped: " << ex.what() << '\n';
        }
    }
    t.emit(out, o.format);
    return Ok;
}

int cmd_sweep_k(const ValidatedParams& p, const Options& o, std::ostream& out, std::ostream& err) {
    Table t;
    t.columns = {"k", "beta_sigma", "lambda_exact", "lambda_limit", "lambda_rel_gap", "beta",
                 "phi", "mu"};
    for (std::size_t k : parse_int_range(o.k_grid)) {
        try {
            const ValidatedParams q = p.with_traders(homogeneous(k, p.trader(0)));
            const Equilibrium eq = solve(q).eq;
            const double limit = nash_expansions(q).lambda.limit;
            t.rows.push_back({k, eq.beta_sigma, eq.lambda, limit, std::abs(eq.lambda - limit) / limit,
                              eq.betas[0], eq.phis[0], eq.mus[0]});
        } catch (const std::exception& ex) {
            err << "k=" << k << " skipped: " << ex.what() << '\n';
        }
    }
    t.emit(out, o.format);
    return Ok;
}

int cmd_tax_sweep(const ValidatedParams& p, const Options& o, std::ostream& out, std::ostream& err) {
    if (o.c_grid.empty()) throw ConfigError("tax-sweep needs --c-grid a:b:n");
    Table t;
    t.columns = {"c", "lambda", "lambda_plus_c", "beta_sigma", "beta", "phi"};
    for (double c : parse_linear_grid(o.c_grid)) {
        try {
            const Equilibrium eq = solve_taxed(p.with_tax(c)).eq;
            t.rows.push_back({c, eq.lambda, eq.lambda + c, eq.beta_sigma, eq.betas[0], eq.phis[0]});
        } catch (const std::exception& ex) {
            err << "c=" << format_double(c) << " skipped: " << ex.what() << '\n';
        }
    }
    t.emit(out, o.format);
    return Ok;
}

int cmd_simulate(const ValidatedParams& p, const Options& o, std::ostream& out, std::ostream& err) {
    const Equilibrium eq = solve(p).eq;
    SimConfig cfg;
    cfg.n_paths = o.paths ? o.paths : 1000;
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    cfg.horizon = o.horizon;
    cfg.record_paths = !o.paths_out.empty();
    const PathBatch batch = simulate(eq, std::vector<StrategySpec>(p.k()), p, cfg);

    if (!o.paths_out.empty()) {
        const bool binary = o.paths_out.size() > 4 &&
                            o.paths_out.compare(o.paths_out.size() - 4, 4, ".bin") == 0;
        std::ofstream f(o.paths_out, binary ? std::ios::binary : std::ios::out);
        if (!f) throw ConfigError("cannot write " + o.paths_out);
        if (binary) write_paths_binary(batch, f);
        else write_paths_csv(batch, f);
    }

    std::vector<Estimate> objectives, mtms;
    std::vector<json> targets;
    for (std::size_t i = 0; i < p.k(); ++i) {
        try {
            objectives.push_back(estimate_objective(batch, i, cfg.tail_tol));
        } catch (const SimulationError& e) {
            if (e.code() != SimulationError::Code::HorizonTooShort) throw;
            err << "warning: trader " << i << ": " << e.what() << '\n';
            std::vector<double> v(batch.n_paths);
            for (std::size_t j = 0; j < batch.n_paths; ++j) v[j] = batch.objective[j * batch.k + i];
            objectives.push_back(estimate_mean(v));
        }
        mtms.push_back(estimate_mark_to_market(batch, i));
        json target = nullptr;
        if (p.tax() == 0.0) {
            const ValueCoefficients v = value_coefficients(eq, i, p);
            const double m0 = p.trader(i).initial_inventory;
            target = -0.5 * v.A * m0 * m0 + 0.5 * v.B * p.sigma_S() * p.sigma_S() * p.dt() + v.D;
        }
        targets.push_back(target);
    }

    if (o.format == "csv") {
        Table t;
        t.columns = {"trader", "objective_mean", "objective_se", "value_target",
                     "mark_to_market_mean", "mark_to_market_se"};
        for (std::size_t i = 0; i < p.k(); ++i) {
            t.rows.push_back({i, objectives[i].mean, objectives[i].std_error, targets[i],
                              mtms[i].mean, mtms[i].std_error});
        }
        t.emit(out, "csv");
        return Ok;
    }
    json doc;
    doc["params"] = params_to_json(p.raw());
    doc["equilibrium"] = equilibrium_to_json(eq);
    doc["config"] = {{"paths", cfg.n_paths}, {"horizon", batch.horizon}, {"seed", cfg.seed}};
    json traders = json::array();
    for (std::size_t i = 0; i < p.k(); ++i) {
        traders.push_back({{"trader", i},
                           {"objective", estimate_to_json(objectives[i])},
                           {"value_target", targets[i]},
                           {"mark_to_market", estimate_to_json(mtms[i])}});
    }
    doc["traders"] = traders;
    doc["max_reduced_gap"] = batch.max_reduced_gap;
    doc["max_deviation"] = batch.max_deviation;
    out << doc.dump(2) << '\n';
    return Ok;
}

int cmd_verify(const ValidatedParams& p, const Options& o, std::ostream& out, std::ostream& err) {
    VerifyOptions vo;
    if (o.paths) vo.paths = o.paths;
    vo.seed = o.seed;
    vo.workers = o.workers;
    if (o.strict) vo.tol = vo.tol.halved();
    const VerificationReport rep = verify(p, vo);
    if (o.format == "csv") {
        Table t;
        t.columns = {"check", "value", "tolerance", "pass", "advisory"};
        for (const auto& c : rep.checks) {
            t.rows.push_back({c.name, c.value, c.tolerance, c.pass, c.advisory});
        }
        t.emit(out, "csv");
    } else {
        out << rep.to_json().dump(2) << '\n';
    }
    for (const auto& c : rep.checks) {
        if (!c.pass && !c.advisory) {
            err << "FAILED " << c.name << ": " << format_double(c.value) << " > "
                << format_double(c.tolerance) << '\n';
        }
    }
    return rep.passed() ? Ok : CheckFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Linear equilibria of the insider-trading model with inventory-averse HFTs"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    Options o;

    app.add_option("--config", o.config, "JSON params file");
    app.add_option("--out", o.out, "write output here instead of stdout");
    app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--paths", o.paths, "Monte Carlo paths");
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--workers", o.workers, "simulation threads")->check(CLI::PositiveNumber);
    app.add_flag("--strict", o.strict, "halve deterministic tolerances");
    app.add_option("--sigma-S", o.in.sigma_S, "value volatility per unit time");
    app.add_option("--sigma-K", o.in.sigma_K, "noise-trade volatility per unit time");
    app.add_option("--dt", o.in.dt, "trading interval");
    app.add_option("--tax", o.in.tax, "quadratic tax coefficient c");
    app.add_option("--gamma", o.in.gamma, "inventory cost per trader (comma list)")->delimiter(',');
    app.add_option("--rho", o.in.rho, "discount rate per trader (comma list)")->delimiter(',');
    app.add_option("--initial-inventory", o.in.initial_inventory, "L_0 per trader (comma list)")
        ->delimiter(',');
    app.add_option("--num-traders", o.in.num_traders, "k; single-valued trader flags are repeated");

    auto* solve_cmd = app.add_subcommand("solve", "equilibrium and value coefficients");
    auto* expand_cmd = app.add_subcommand("expand", "high-frequency limits and sqrt(dt) terms");
    auto* sweep_cmd = app.add_subcommand("sweep", "exact vs expansion over a dt or k grid");
    auto* dt_opt = sweep_cmd->add_option("--dt-grid", o.dt_grid, "a:b:n, geometric");
    auto* k_opt = sweep_cmd->add_option("--k-grid,--k", o.k_grid, "a..b");
    dt_opt->excludes(k_opt);
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo objective estimates");
    simulate_cmd->add_option("--horizon", o.horizon, "rounds; default from the discount tail");
    simulate_cmd->add_option("--paths-out", o.paths_out, "trajectories (.bin binary, else csv)");
    auto* verify_cmd = app.add_subcommand("verify", "full invariant battery");
    auto* tax_cmd = app.add_subcommand("tax-sweep", "price impact over a tax grid");
    tax_cmd->add_option("--c-grid", o.c_grid, "a:b:n, evenly spaced");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return BadConfig;
    }

    std::ofstream file;
    std::ostream* sink = &out;
    if (!o.out.empty()) {
        file.open(o.out);
        if (!file) {
            err << "cannot write " << o.out << '\n';
            return BadConfig;
        }
        sink = &file;
    }

    try {
        const ValidatedParams p = ValidatedParams::from(resolve_params(o, app));
        if (solve_cmd->parsed()) return cmd_solve(p, o, *sink);
        if (expand_cmd->parsed()) return cmd_expand(p, o, *sink);
        if (sweep_cmd->parsed()) {
            if (!o.dt_grid.empty()) return cmd_sweep_dt(p, o, *sink, err);
            if (!o.k_grid.empty()) return cmd_sweep_k(p, o, *sink, err);
            throw ConfigError("sweep needs --dt-grid or --k-grid");
        }
        if (simulate_cmd->parsed()) return cmd_simulate(p, o, *sink, err);
        if (verify_cmd->parsed()) return cmd_verify(p, o, *sink, err);
        if (tax_cmd->parsed()) return cmd_tax_sweep(p, o, *sink, err);
    } catch (const InvalidParams& e) {
        err << "invalid parameters:\n";
        for (const auto& v : e.violations()) err << "  " << v.field << ": " << v.message << '\n';
        return BadConfig;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return BadConfig;
    } catch (const std::exception& e) {
        err << "failed: " << e.what() << '\n';
        return CheckFailed;
    }
    return BadConfig;
}

}  // namespace hfteq::cli
