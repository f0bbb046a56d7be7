#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hfteq/solver.hpp"
#include "oracle.hpp"

using namespace hfteq;

namespace {

ValidatedParams make(double sS, double sK, double dt, std::vector<TraderParams> traders,
                     double tax = 0.0) {
    MarketParams m;
    m.sigma_S = sS;
    m.sigma_K = sK;
    m.dt = dt;
    m.traders = std::move(traders);
    m.tax = tax;
    return ValidatedParams::from(m);
}

ValidatedParams mono(double dt, double sS = 1.0, double sK = 1.0, double gamma = 1.0) {
    return make(sS, sK, dt, {{gamma, 0.05, 0.0}});
}

ValidatedParams homog(std::size_t k, double dt, double tax = 0.0) {
    return make(1.0, 1.0, dt, homogeneous(k, {1.0, 0.05, 0.0}), tax);
}

}  // namespace

// Values marked "oracle" were computed with 50-digit bisection on the model
// equations and frozen here.

TEST(Monopoly, ZeroDtGivesRatio) {
    EXPECT_EQ(solve_monopoly_beta(mono(0.0)), 1.0);
    EXPECT_EQ(solve_monopoly_beta(mono(0.0, 2.0, 1.0)), 0.5);
}

TEST(Monopoly, MatchesOracle) {
    EXPECT_NEAR(solve_monopoly_beta(mono(0.01)), 0.93181244195427218455, 1e-14);
    EXPECT_NEAR(solve_monopoly_beta(mono(0.004)), 0.95630247438115536278, 1e-14);
    EXPECT_NEAR(solve_monopoly_beta(mono(0.004, 2.0, 1.0)), 0.48445817229517128011, 1e-14);
    // Within O(dt) of the leading expansion 1 - sqrt(1/2)*0.1.
    EXPECT_NEAR(solve_monopoly_beta(mono(0.01)), 1.0 - std::sqrt(0.5) * 0.1, 0.01);
}

TEST(Monopoly, QuarticResidualTiny) {
    for (double dt : {0.1, 0.01, 0.004, 1e-4, 1e-6}) {
        const auto p = mono(dt);
        const Solution s = solve_monopoly(p);
        EXPECT_LE(s.diagnostics.residuals[0], 1e-12) << dt;
        EXPECT_TRUE(s.diagnostics.monotone_witness);
        EXPECT_LE(s.diagnostics.bracket_hi - s.diagnostics.bracket_lo, 1e-13);
    }
}

TEST(Monopoly, AgreesWithLongDoubleOracle) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> vol(0.2, 3.0), gam(0.1, 5.0), ldt(-6.0, -2.0);
    for (int trial = 0; trial < 25; ++trial) {
        const double sS = vol(rng), sK = vol(rng), g = gam(rng), dt = std::pow(10.0, ldt(rng));
        const auto p = make(sS, sK, dt, {{g, 0.05, 0.0}});
        const double expect = static_cast<double>(oracle::monopoly_beta(sS, sK, g, 0.05, dt));
        EXPECT_NEAR(solve_monopoly_beta(p), expect, 1e-13 * (sK / sS));
    }
}

TEST(Monopoly, BothRootsClassified) {
    const auto r = monopoly_quartic_roots(mono(0.01));
    EXPECT_NEAR(r.admissible, 0.93181244195427218455, 1e-14);
    EXPECT_NEAR(r.inadmissible, 1.0734464085482122324, 1e-13);
    EXPECT_LT(r.inadmissible_phi, 0.0);

    const auto r2 = monopoly_quartic_roots(mono(0.004, 1.0, 2.0, 0.5));
    EXPECT_NEAR(r2.admissible, 1.9126049487623107256, 1e-13);
    EXPECT_NEAR(r2.inadmissible, 2.0915978821024168802, 1e-13);
    EXPECT_LT(r2.admissible, 2.0);
    EXPECT_GT(r2.inadmissible, 2.0);
}

TEST(Monopoly, RootsCoalesceAsDtShrinks) {
    double prev_gap = 1.0;
    for (double dt : {1e-2, 1e-3, 1e-4, 1e-5}) {
        const auto r = monopoly_quartic_roots(mono(dt));
        EXPECT_LT(r.admissible, 1.0);
        EXPECT_GT(r.inadmissible, 1.0);
        const double gap = r.inadmissible - r.admissible;
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
    }
    EXPECT_THROW(monopoly_quartic_roots(mono(0.0)), SolverError);
}

TEST(Monopoly, SecondRootReportedAsRejected) {
    const Solution s = solve_monopoly(mono(0.004));
    ASSERT_EQ(s.diagnostics.rejected_roots.size(), 1u);
    EXPECT_NEAR(s.diagnostics.rejected_roots[0].value, 1.0457989410512084401, 1e-13);
}

TEST(BestResponse, MatchesOracle) {
    const auto p = mono(0.01);
    // Recomputed from the stated quadratic; see the project notes on this example.
    EXPECT_NEAR(nash_best_response_beta(1.0, 0, p), 0.86842715908136059061, 1e-14);
    EXPECT_NEAR(nash_best_response_beta(1.5, 0, p), 0.57562604013217316517, 1e-14);
    EXPECT_NEAR(nash_best_response_beta(2.0, 0, p), 0.42704466617133755065, 1e-14);
}

TEST(BestResponse, DecreasingInAggregate) {
    const auto p = mono(0.01);
    EXPECT_GT(nash_best_response_beta(1.5, 0, p), nash_best_response_beta(2.0, 0, p));
}

TEST(BestResponse, ZeroDtDoubleRoot) {
    const auto p = homog(4, 0.0);
    EXPECT_DOUBLE_EQ(nash_best_response_beta(2.0, 0, p), 0.5);
}

TEST(BestResponse, StrictlyInsideConstraint) {
    const auto p = homog(3, 0.004);
    for (double bs : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        const double b = nash_best_response_beta(bs, 0, p);
        EXPECT_GT(b * bs, 0.0);
        EXPECT_LT(b * bs, p.r());
        EXPECT_NEAR(best_response_polynomial(b, bs, 0, p, 0.0), 0.0, 1e-14);
    }
}

TEST(BestResponse, TaxedReducesToUntaxed) {
    const auto p = homog(2, 0.004);
    for (double bs : {0.3, 1.4, 3.0}) {
        EXPECT_DOUBLE_EQ(taxed_best_response_beta(bs, 0, p, 0.0), nash_best_response_beta(bs, 0, p));
    }
}

TEST(Nash, ZeroDtClosedForm) {
    const Solution s = solve_nash(homog(4, 0.0));
    EXPECT_TRUE(s.diagnostics.closed_form);
    EXPECT_DOUBLE_EQ(s.eq.beta_sigma, 2.0);
    EXPECT_DOUBLE_EQ(s.eq.lambda, 0.4);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_DOUBLE_EQ(s.eq.betas[i], 0.5);
        EXPECT_EQ(s.eq.phis[i], 0.0);
    }
}

TEST(Nash, SingleTraderMatchesMonopoly) {
    for (double dt : {0.01, 0.004, 1e-5}) {
        const auto p = mono(dt);
        const Solution a = solve_monopoly(p);
        const Solution b = solve_nash(p);
        EXPECT_NEAR(a.eq.betas[0], b.eq.betas[0], 1e-10);
        EXPECT_NEAR(a.eq.lambda, b.eq.lambda, 1e-10);
        EXPECT_NEAR(a.eq.phis[0], b.eq.phis[0], 1e-10);
    }
}

TEST(Nash, TwoTradersMatchOracle) {
    const Solution s = solve_nash(homog(2, 0.004));
    EXPECT_NEAR(s.eq.beta_sigma, 1.3510840013879891539, 1e-12);
    EXPECT_NEAR(s.eq.lambda, 0.4781873795837003054, 1e-12);
    EXPECT_NEAR(s.eq.phis[0], 0.087286010596710060989, 1e-12);
    EXPECT_LT(s.eq.beta_sigma, std::sqrt(2.0));
    EXPECT_GT(s.eq.lambda, std::sqrt(2.0) / 3.0);
}

TEST(Nash, HeterogeneousMatchOracle) {
    const Solution s = solve_nash(make(1.0, 1.0, 0.004, {{0.5, 0.05, 0.0}, {2.0, 0.05, 0.0}}));
    EXPECT_NEAR(s.eq.beta_sigma, 1.347728493486182233, 1e-12);
    EXPECT_NEAR(s.eq.betas[0], 0.69561343910082911046, 1e-12);
    EXPECT_NEAR(s.eq.betas[1], 0.65211505438535312256, 1e-12);
    EXPECT_NEAR(s.eq.phis[1], 0.12112596017356824154, 1e-12);

    const Solution t =
        solve_nash(make(1.5, 0.7, 0.001, {{1.0, 0.05, 0.0}, {3.0, 0.2, 0.0}}));
    EXPECT_NEAR(t.eq.beta_sigma, 0.64602497999022817641, 1e-12);
    EXPECT_NEAR(t.eq.lambda, 1.0171602588137135841, 1e-12);
    EXPECT_NEAR(t.eq.phis[1], 0.052761520197761369455, 1e-12);
}

TEST(Nash, InvariantsHold) {
    const Solution s = solve_nash(make(1.0, 1.0, 0.004, {{0.5, 0.05, 0.0}, {2.0, 0.1, 0.0}, {1.0, 0.02, 0.0}}));
    const auto& eq = s.eq;
    double sum = 0.0;
    for (double b : eq.betas) sum += b;
    EXPECT_NEAR(sum, eq.beta_sigma, 1e-14);
    EXPECT_LT(eq.lambda * eq.beta_sigma, 1.0);
    for (std::size_t i = 0; i < eq.k(); ++i) {
        EXPECT_GT(eq.phis[i], 0.0);
        EXPECT_LE(eq.phis[i], 1.0);
        EXPECT_DOUBLE_EQ(eq.mus[i], eq.lambda * eq.phis[i]);
        EXPECT_LE(s.diagnostics.residuals[i], 1e-10);
    }
    EXPECT_TRUE(s.diagnostics.monotone_witness);
}

TEST(Nash, AgreesWithLongDoubleOracle) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> vol(0.3, 2.0), gam(0.2, 4.0), ldt(-5.0, -2.5), rh(0.01, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t k = 2 + trial % 3;
        std::vector<TraderParams> ts;
        std::vector<long double> gs, rs;
        for (std::size_t i = 0; i < k; ++i) {
            ts.push_back({gam(rng), rh(rng), 0.0});
            gs.push_back(ts.back().gamma);
            rs.push_back(ts.back().rho);
        }
        const double sS = vol(rng), sK = vol(rng), dt = std::pow(10.0, ldt(rng));
        const Solution s = solve_nash(make(sS, sK, dt, ts));
        const auto o = oracle::nash(sS, sK, gs, rs, dt);
        EXPECT_NEAR(s.eq.beta_sigma, static_cast<double>(o.beta_sigma), 1e-12 * static_cast<double>(o.beta_sigma));
        EXPECT_NEAR(s.eq.lambda, static_cast<double>(o.lambda), 1e-12 * static_cast<double>(o.lambda));
        for (std::size_t i = 0; i < k; ++i) {
            EXPECT_NEAR(s.eq.phis[i], static_cast<double>(o.phis[i]), 1e-11);
        }
    }
}

TEST(Nash, PermutationSymmetry) {
    const std::vector<TraderParams> a = {{0.5, 0.05, 0.0}, {2.0, 0.1, 0.0}, {1.0, 0.02, 0.0}};
    const std::vector<TraderParams> b = {a[2], a[0], a[1]};
    const Solution sa = solve_nash(make(1.0, 1.0, 0.004, a));
    const Solution sb = solve_nash(make(1.0, 1.0, 0.004, b));
    EXPECT_NEAR(sa.eq.beta_sigma, sb.eq.beta_sigma, 1e-14);
    EXPECT_NEAR(sa.eq.lambda, sb.eq.lambda, 1e-14);
    EXPECT_NEAR(sa.eq.betas[0], sb.eq.betas[1], 1e-14);
    EXPECT_NEAR(sa.eq.phis[1], sb.eq.phis[2], 1e-14);
    EXPECT_NEAR(sa.eq.mus[2], sb.eq.mus[0], 1e-14);
}

TEST(Nash, ScaleCovariance) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    const Solution base = solve_nash(make(1.2, 0.8, 0.004, homogeneous(3, {1.0, 0.05, 0.0})));
    for (int t = 0; t < 5; ++t) {
        const double a = scale(rng);
        const Solution s = solve_nash(make(1.2 * a, 0.8 * a, 0.004, homogeneous(3, {1.0, 0.05, 0.0})));
        EXPECT_NEAR(s.eq.beta_sigma, base.eq.beta_sigma, 1e-12);
        EXPECT_NEAR(s.eq.phis[0], base.eq.phis[0], 1e-12);
        EXPECT_NEAR(s.eq.lambda, base.eq.lambda, 1e-12);
        EXPECT_NEAR(s.eq.mus[0], base.eq.mus[0], 1e-12);
    }
}

TEST(Nash, HomogeneousLimit) {
    for (std::size_t k : {1u, 2u, 5u, 9u}) {
        const Solution s = solve_nash(make(2.0, 3.0, 0.0, homogeneous(k, {1.0, 0.05, 0.0})));
        EXPECT_DOUBLE_EQ(s.eq.beta_sigma, std::sqrt(static_cast<double>(k)) * 1.5);
    }
    // Monopolist with gamma/k shares the limit sigma_K/sigma_S.
    EXPECT_DOUBLE_EQ(solve_monopoly_beta(mono(0.0, 2.0, 3.0, 1.0 / 4.0)), 1.5);
}

TEST(Nash, LargeDtIsInfeasible) {
    // gamma*dt large enough that phi leaves (0,1] or no bracket exists.
    const auto p = make(1.0, 1.0, 0.5, {{50.0, 0.05, 0.0}, {50.0, 0.05, 0.0}});
    try {
        (void)solve_nash(p);
        SUCCEED();
    } catch (const SolverError& e) {
        EXPECT_TRUE(e.code() == SolverErrc::ConstraintViolated || e.code() == SolverErrc::NoRootInBracket);
    }
}

TEST(Taxed, ZeroTaxEqualsNash) {
    for (std::size_t k : {1u, 2u, 4u}) {
        const auto p = homog(k, 4e-5);
        const Solution a = solve_taxed(p);
        const Solution b = solve_nash(p);
        EXPECT_NEAR(a.eq.lambda, b.eq.lambda, 1e-10);
        EXPECT_NEAR(a.eq.beta_sigma, b.eq.beta_sigma, 1e-10);
    }
}

TEST(Taxed, MatchesOracle) {
    EXPECT_NEAR(solve_taxed(homog(1, 4e-5, 0.001)).eq.lambda, 0.49998957114265755791, 1e-12);
    EXPECT_NEAR(solve_taxed(homog(1, 4e-5, 0.01)).eq.lambda, 0.49985601918255016179, 1e-12);
    EXPECT_NEAR(solve_taxed(homog(2, 4e-5, 0.001)).eq.lambda, 0.47244946646235658368, 1e-12);
    const Solution s = solve_taxed(homog(2, 4e-5, 0.01));
    EXPECT_NEAR(s.eq.lambda, 0.47523202891584436535, 1e-12);
    EXPECT_NEAR(s.eq.beta_sigma, 1.379152078931425229, 1e-12);
    EXPECT_NEAR(s.eq.phis[0], 0.0089459444674720422478, 1e-12);
    EXPECT_GT(s.diagnostics.continuation_steps, 0u);
    EXPECT_EQ(s.eq.tax, 0.01);
}

TEST(Taxed, MonopolyImpactFallsAndCompetitiveImpactRises) {
    const double base1 = solve_nash(homog(1, 4e-5)).eq.lambda;
    const double base2 = solve_nash(homog(2, 4e-5)).eq.lambda;
    EXPECT_LT(solve_taxed(homog(1, 4e-5, 1e-3)).eq.lambda, base1);
    EXPECT_GT(solve_taxed(homog(2, 4e-5, 1e-3)).eq.lambda, base2);
}

TEST(Taxed, DispatchUsesTax) {
    const auto p = homog(2, 4e-5, 0.01);
    EXPECT_DOUBLE_EQ(solve(p).eq.lambda, solve_taxed(p).eq.lambda);
    EXPECT_DOUBLE_EQ(solve(mono(0.004)).eq.lambda, solve_monopoly(mono(0.004)).eq.lambda);
}

TEST(Assemble, RejectsViolations) {
    const auto p = homog(2, 0.004);
    EXPECT_THROW(assemble_equilibrium({0.9, 0.9}, 1.8, p, 0.0), SolverError);  // beta*bs > r
    EXPECT_THROW(assemble_equilibrium({-0.1, 0.2}, 0.1, p, 0.0), SolverError);
}
