#include <gtest/gtest.h>

#include <algorithm>

#include "hfteq/model.hpp"

using namespace hfteq;

namespace {

MarketParams daily_monopoly() {
    MarketParams m;
    m.sigma_S = 1.0;
    m.sigma_K = 1.0;
    m.dt = 0.004;
    m.traders = {{1.0, 0.05, 0.0}};
    return m;
}

bool has(const std::vector<Violation>& v, ViolationKind kind) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == kind; });
}

}  // namespace

TEST(Validate, AcceptsBaselineParameters) {
    const Validation v = validate(daily_monopoly());
    ASSERT_TRUE(std::holds_alternative<ValidatedParams>(v));
    const auto& p = std::get<ValidatedParams>(v);
    EXPECT_EQ(p.k(), 1u);
    EXPECT_DOUBLE_EQ(p.r(), 1.0);
}

TEST(Validate, RejectsDiscountAboveOne) {
    MarketParams m = daily_monopoly();
    m.traders[0].rho = 300.0;  // rho*dt = 1.2
    const auto errs = check(m);
    ASSERT_EQ(errs.size(), 1u);
    EXPECT_EQ(errs[0].kind, ViolationKind::DiscountOutOfRange);
    EXPECT_THROW(ValidatedParams::from(m), InvalidParams);
}

TEST(Validate, RejectsZeroNoiseVolatility) {
    MarketParams m = daily_monopoly();
    m.sigma_K = 0.0;
    EXPECT_TRUE(has(check(m), ViolationKind::NonPositiveVolatility));
}

TEST(Validate, ReportsEveryViolation) {
    MarketParams m;
    m.sigma_S = -1.0;
    m.sigma_K = 0.0;
    m.dt = -0.1;
    m.tax = -1.0;
    const auto errs = check(m);
    EXPECT_TRUE(has(errs, ViolationKind::NonPositiveVolatility));
    EXPECT_TRUE(has(errs, ViolationKind::NegativeDt));
    EXPECT_TRUE(has(errs, ViolationKind::NegativeTax));
    EXPECT_TRUE(has(errs, ViolationKind::EmptyTraderList));
    EXPECT_EQ(std::count_if(errs.begin(), errs.end(),
                            [](const Violation& v) { return v.kind == ViolationKind::NonPositiveVolatility; }),
              2);

    MarketParams g = daily_monopoly();
    g.traders.push_back({0.0, 0.05, 0.0});
    const auto gerrs = check(g);
    ASSERT_EQ(gerrs.size(), 1u);
    EXPECT_EQ(gerrs[0].kind, ViolationKind::NonPositiveGamma);
    EXPECT_EQ(gerrs[0].field, "traders[1].gamma");
}

TEST(Validate, ZeroDtIsTheHighFrequencyLimit) {
    MarketParams m = daily_monopoly();
    m.dt = 0.0;
    EXPECT_TRUE(check(m).empty());
    m.traders[0].rho = 0.0;
    EXPECT_TRUE(has(check(m), ViolationKind::DiscountOutOfRange));
}

TEST(Validate, IsIdempotent) {
    const auto p = ValidatedParams::from(daily_monopoly());
    const auto again = ValidatedParams::from(p.raw());
    EXPECT_EQ(again.r(), p.r());
    EXPECT_EQ(again.sigma_ratio(), p.sigma_ratio());
}

TEST(Validate, CopiesAreRevalidated) {
    const auto p = ValidatedParams::from(daily_monopoly());
    EXPECT_THROW((void)p.with_dt(30.0), InvalidParams);  // rho*dt = 1.5
    EXPECT_THROW((void)p.with_tax(-0.1), InvalidParams);
    EXPECT_THROW((void)p.with_traders({}), InvalidParams);
    EXPECT_DOUBLE_EQ(p.with_dt(0.001).dt(), 0.001);
}

TEST(Validate, RatioSharedAcrossCopies) {
    MarketParams m = daily_monopoly();
    m.sigma_S = 0.3;
    m.sigma_K = 0.7;
    const auto p = ValidatedParams::from(m);
    EXPECT_EQ(p.r(), p.with_dt(0.01).r());
    EXPECT_EQ(p.r(), p.with_tax(0.5).r());
    EXPECT_DOUBLE_EQ(p.r(), (0.7 / 0.3) * (0.7 / 0.3));
}

TEST(Config, ParsesAndDefaults) {
    const auto doc = nlohmann::json::parse(R"({
        "sigma_S": 1.5, "sigma_K": 0.5, "dt": 0.001,
        "traders": [{"gamma": 2, "rho": 0.1}, {"gamma": 1, "rho": 0.05, "initial_inventory": 3}]
    })");
    const MarketParams m = params_from_json(doc);
    EXPECT_DOUBLE_EQ(m.sigma_S, 1.5);
    EXPECT_DOUBLE_EQ(m.tax, 0.0);
    ASSERT_EQ(m.traders.size(), 2u);
    EXPECT_DOUBLE_EQ(m.traders[0].initial_inventory, 0.0);
    EXPECT_DOUBLE_EQ(m.traders[1].initial_inventory, 3.0);
}

TEST(Config, RejectsUnknownAndMissingKeys) {
    EXPECT_THROW(params_from_json(nlohmann::json::parse(
                     R"({"sigma_S":1,"sigma_K":1,"dt":0.1,"traders":[{"gamma":1,"rho":1}],"extra":1})")),
                 ConfigError);
    EXPECT_THROW(params_from_json(nlohmann::json::parse(R"({"sigma_S":1,"dt":0.1,"traders":[]})")),
                 ConfigError);
    EXPECT_THROW(params_from_json(nlohmann::json::parse(
                     R"({"sigma_S":1,"sigma_K":1,"dt":0.1,"traders":[{"gamma":1}]})")),
                 ConfigError);
    EXPECT_THROW(params_from_json(nlohmann::json::parse(
                     R"({"sigma_S":"1","sigma_K":1,"dt":0.1,"traders":[{"gamma":1,"rho":1}]})")),
                 ConfigError);
}

TEST(Config, RoundTrips) {
    MarketParams m = daily_monopoly();
    m.tax = 0.25;
    m.traders.push_back({0.5, 0.2, -1.5});
    const MarketParams back = params_from_json(params_to_json(m));
    EXPECT_EQ(params_to_json(back), params_to_json(m));
}

TEST(Homogeneous, Replicates) {
    const auto t = homogeneous(3, {2.0, 0.1, 1.0});
    ASSERT_EQ(t.size(), 3u);
    EXPECT_DOUBLE_EQ(t[2].gamma, 2.0);
}
