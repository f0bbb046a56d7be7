#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace hfteq {

/// Per-trader preferences. Rates are per unit time; the model multiplies by dt.
struct TraderParams {
    double gamma = 1.0;              ///< inventory-cost rate
    double rho = 0.05;               ///< discount rate
    double initial_inventory = 0.0;  ///< L_0 in shares
};

/// Exogenous model constants. Plain data; see ValidatedParams for the checked form.
struct MarketParams {
    double sigma_S = 1.0;  ///< fundamental-value volatility per unit time
    double sigma_K = 1.0;  ///< noise-trade volatility per unit time
    double dt = 0.004;     ///< trading interval
    std::vector<TraderParams> traders;
    double tax = 0.0;      ///< quadratic transaction-tax coefficient c
};

enum class ViolationKind {
    NonPositiveVolatility,
    DiscountOutOfRange,
    NonPositiveGamma,
    NegativeTax,
    EmptyTraderList,
    NegativeDt,
};

const char* to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string field;
    std::string message;
};

class InvalidParams : public std::invalid_argument {
public:
    explicit InvalidParams(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Parameters that passed validation. The factory is the only way to build one,
/// so a ValidatedParams never carries a violating field.
///
/// dt == 0 is accepted and denotes the high-frequency limit; the discount
/// constraint rho*dt in (0,1) then reduces to rho > 0.
class ValidatedParams {
public:
    /// Throws InvalidParams with the complete violation list.
    static ValidatedParams from(const MarketParams& params);

    const MarketParams& raw() const { return params_; }
    std::size_t k() const { return params_.traders.size(); }
    double sigma_S() const { return params_.sigma_S; }
    double sigma_K() const { return params_.sigma_K; }
    double dt() const { return params_.dt; }
    double tax() const { return params_.tax; }
    const TraderParams& trader(std::size_t i) const { return params_.traders.at(i); }

    /// sigma_K / sigma_S
    double sigma_ratio() const { return sigma_ratio_; }
    /// r = (sigma_K / sigma_S)^2, computed once and shared by every module.
    double r() const { return r_; }

    /// Copies with one field replaced; re-validated.
    ValidatedParams with_dt(double dt) const;
    ValidatedParams with_tax(double tax) const;
    ValidatedParams with_traders(std::vector<TraderParams> traders) const;

private:
    explicit ValidatedParams(MarketParams params);

    MarketParams params_;
    double sigma_ratio_;
    double r_;
};

/// Every violated invariant, in field order. Empty iff the params are valid.
std::vector<Violation> check(const MarketParams& params);

using Validation = std::variant<ValidatedParams, std::vector<Violation>>;

Validation validate(const MarketParams& params);

/// k identical traders.
std::vector<TraderParams> homogeneous(std::size_t k, const TraderParams& trader);

// JSON config: keys exactly sigma_S, sigma_K, dt, tax, traders[{gamma, rho, initial_inventory}].
// tax and initial_inventory default to 0; unknown keys are rejected.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

MarketParams params_from_json(const nlohmann::json& doc);
nlohmann::json params_to_json(const MarketParams& params);

}  // namespace hfteq
