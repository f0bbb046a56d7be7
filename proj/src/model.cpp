#include "hfteq/model.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <utility>

namespace hfteq {

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::NonPositiveVolatility: return "NonPositiveVolatility";
        case ViolationKind::DiscountOutOfRange: return "DiscountOutOfRange";
        case ViolationKind::NonPositiveGamma: return "NonPositiveGamma";
        case ViolationKind::NegativeTax: return "NegativeTax";
        case ViolationKind::EmptyTraderList: return "EmptyTraderList";
        case ViolationKind::NegativeDt: return "NegativeDt";
    }
    return "Unknown";
}

namespace {

std::string join_messages(const std::vector<Violation>& violations) {
    std::ostringstream os;
    os << "invalid market parameters:";
    for (const auto& v : violations) {
        os << "\n  " << to_string(v.kind) << " (" << v.field << "): " << v.message;
    }
    return os.str();
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

InvalidParams::InvalidParams(std::vector<Violation> violations)
    : std::invalid_argument(join_messages(violations)), violations_(std::move(violations)) {}

std::vector<Violation> check(const MarketParams& p) {
    std::vector<Violation> out;
    if (!positive(p.sigma_S)) {
        out.push_back({ViolationKind::NonPositiveVolatility, "sigma_S", "must be > 0"});
    }
    if (!positive(p.sigma_K)) {
        out.push_back({ViolationKind::NonPositiveVolatility, "sigma_K", "must be > 0"});
    }
    const bool dt_ok = std::isfinite(p.dt) && p.dt >= 0.0;
    if (!dt_ok) {
        out.push_back({ViolationKind::NegativeDt, "dt", "must be >= 0"});
    }
    if (p.traders.empty()) {
        out.push_back({ViolationKind::EmptyTraderList, "traders", "need at least one trader"});
    }
    for (std::size_t i = 0; i < p.traders.size(); ++i) {
        const auto& t = p.traders[i];
        const std::string prefix = "traders[" + std::to_string(i) + "].";
        if (dt_ok) {
            const double rho_dt = t.rho * p.dt;
            const bool in_range =
                p.dt > 0.0 ? (std::isfinite(rho_dt) && rho_dt > 0.0 && rho_dt < 1.0) : positive(t.rho);
            if (!in_range) {
                out.push_back({ViolationKind::DiscountOutOfRange, prefix + "rho",
                               "rho*dt must lie in (0,1), got " + std::to_string(rho_dt)});
            }
        }
        if (!positive(t.gamma)) {
            out.push_back({ViolationKind::NonPositiveGamma, prefix + "gamma", "must be > 0"});
        }
    }
    if (!(std::isfinite(p.tax) && p.tax >= 0.0)) {
        out.push_back({ViolationKind::NegativeTax, "tax", "must be >= 0"});
    }
    return out;
}

ValidatedParams::ValidatedParams(MarketParams params)
    : params_(std::move(params)),
      sigma_ratio_(params_.sigma_K / params_.sigma_S),
      r_(sigma_ratio_ * sigma_ratio_) {}

ValidatedParams ValidatedParams::from(const MarketParams& params) {
    auto violations = check(params);
    if (!violations.empty()) throw InvalidParams(std::move(violations));
    return ValidatedParams(params);
}

ValidatedParams ValidatedParams::with_dt(double dt) const {
    MarketParams p = params_;
    p.dt = dt;
    return from(p);
}

ValidatedParams ValidatedParams::with_tax(double tax) const {
    MarketParams p = params_;
    p.tax = tax;
    return from(p);
}

ValidatedParams ValidatedParams::with_traders(std::vector<TraderParams> traders) const {
    MarketParams p = params_;
    p.traders = std::move(traders);
    return from(p);
}

Validation validate(const MarketParams& params) {
    auto violations = check(params);
    if (!violations.empty()) return violations;
    return ValidatedParams::from(params);
}

std::vector<TraderParams> homogeneous(std::size_t k, const TraderParams& trader) {
    return std::vector<TraderParams>(k, trader);
}

namespace {

double required_number(const nlohmann::json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(where + ": missing required key '" + key + "'");
    if (!it->is_number()) throw ConfigError(where + ": key '" + key + "' must be a number");
    return it->get<double>();
}

double optional_number(const nlohmann::json& obj, const char* key, double fallback,
                       const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) throw ConfigError(where + ": key '" + key + "' must be a number");
    return it->get<double>();
}

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

}  // namespace

MarketParams params_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown(doc, {"sigma_S", "sigma_K", "dt", "tax", "traders"}, "config");

    MarketParams p;
    p.sigma_S = required_number(doc, "sigma_S", "config");
    p.sigma_K = required_number(doc, "sigma_K", "config");
    p.dt = required_number(doc, "dt", "config");
    p.tax = optional_number(doc, "tax", 0.0, "config");

    auto it = doc.find("traders");
    if (it == doc.end()) throw ConfigError("config: missing required key 'traders'");
    if (!it->is_array()) throw ConfigError("config: 'traders' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& t = (*it)[i];
        const std::string where = "traders[" + std::to_string(i) + "]";
        if (!t.is_object()) throw ConfigError(where + ": expected an object");
        reject_unknown(t, {"gamma", "rho", "initial_inventory"}, where);
        TraderParams tp;
        tp.gamma = required_number(t, "gamma", where);
        tp.rho = required_number(t, "rho", where);
        tp.initial_inventory = optional_number(t, "initial_inventory", 0.0, where);
        p.traders.push_back(tp);
    }
    return p;
}

nlohmann::json params_to_json(const MarketParams& p) {
    nlohmann::json traders = nlohmann::json::array();
    for (const auto& t : p.traders) {
        traders.push_back(
            {{"gamma", t.gamma}, {"rho", t.rho}, {"initial_inventory", t.initial_inventory}});
    }
    return {{"sigma_S", p.sigma_S}, {"sigma_K", p.sigma_K}, {"dt", p.dt},
            {"tax", p.tax},         {"traders", traders}};
}

}  // namespace hfteq
