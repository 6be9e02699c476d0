#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dwe/corpus.hpp"
#include "dwe/linmod.hpp"

namespace c = dwe::corpus;
namespace l = dwe::linmod;
namespace r = dwe::rud;
using dwe::Date;

namespace {

// Solves the normal equations in long double by Gauss-Jordan elimination.
std::vector<long double> normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const auto p = static_cast<std::size_t>(X.cols());
    std::vector<std::vector<long double>> A(p, std::vector<long double>(p + 1, 0.0L));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b < p; ++b)
                A[a][b] += static_cast<long double>(X(i, static_cast<Eigen::Index>(a))) * X(i, static_cast<Eigen::Index>(b));
            A[a][p] += static_cast<long double>(X(i, static_cast<Eigen::Index>(a))) * y(i);
        }
    for (std::size_t k = 0; k < p; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < p; ++i)
            if (std::fabs(A[i][k]) > std::fabs(A[piv][k])) piv = i;
        std::swap(A[k], A[piv]);
        for (std::size_t i = 0; i < p; ++i) {
            if (i == k) continue;
            const long double f = A[i][k] / A[k][k];
            for (std::size_t j = k; j <= p; ++j) A[i][j] -= f * A[k][j];
        }
    }
    std::vector<long double> beta(p);
    for (std::size_t k = 0; k < p; ++k) beta[k] = A[k][p] / A[k][k];
    return beta;
}

double oracle_r2(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const auto b = normal_equations(X, y);
    long double mean = 0, sse = 0, sst = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) mean += y(i);
    mean /= y.size();
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        long double fit = 0;
        for (Eigen::Index j = 0; j < X.cols(); ++j) fit += b[static_cast<std::size_t>(j)] * X(i, j);
        sse += (y(i) - fit) * (y(i) - fit);
        sst += (y(i) - mean) * (y(i) - mean);
    }
    return static_cast<double>(1.0L - sse / sst);
}

l::DesignMatrix planted(std::size_t n, unsigned seed, double noise, std::vector<double> beta = {0.3, 0.02, -0.2}) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ux(-5.0, 5.0);
    l::DesignMatrix d;
    const auto N = static_cast<Eigen::Index>(n);
    d.X.resize(N, 3);
    d.y.resize(N);
    d.columns = {"Intercept", "x1", "x2"};
    for (Eigen::Index i = 0; i < N; ++i) {
        d.X(i, 0) = 1.0;
        d.X(i, 1) = ux(rng);
        d.X(i, 2) = ux(rng);
        d.y(i) = beta[0] + beta[1] * d.X(i, 1) + beta[2] * d.X(i, 2) + noise * nd(rng);
    }
    return d;
}

const char* kCfg =
    "iso=RO continent=europe hdi=0.802 lto=52\n"
    "iso=SA continent=asia hdi=0.847 lto=36 swc=yes from=1900-01-01 days=4,5 from=2013-06-29 days=5,6\n"
    "iso=US continent=america hdi=0.920 lto=26\n"
    "iso=JP continent=asia hdi=0.903 lto=88\n"
    "iso=AU continent=oceania hdi=0.939 lto=21\n"
    "iso=TN continent=africa hdi=0.725 lto=\n";

r::RudObservation synthetic_obs(long long id, const Date& d, const c::CountryProfile& p, int authors, double y) {
    c::ArticleRecord rec{id, 1, d, {}, {}, authors, 0, p.iso};
    r::RudObservation o;
    o.article_id = id;
    o.journal = 1;
    o.country = p.iso;
    o.received = d;
    o.year = d.year();
    o.features = c::derive_features(rec, p);
    o.weekday = o.features.weekday;
    o.rud = 1.0;
    o.y_star_star = y;
    return o;
}

// Planted effects: weekends lower, Christmas higher, everything else noise.
std::vector<r::RudObservation> planted_corpus(std::size_t n, unsigned seed, const c::CountryTable& t,
                                              std::vector<std::string> isos = {"RO", "US", "JP", "AU", "SA"}) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 0.25);
    std::uniform_int_distribution<int> day(0, 6208);  // 2000-01-01 .. 2016-12-31
    std::uniform_int_distribution<int> authors(1, 12);
    std::uniform_int_distribution<std::size_t> pick(0, isos.size() - 1);
    std::vector<r::RudObservation> out;
    for (std::size_t i = 0; i < n; ++i) {
        const Date d = Date(2000, 1, 1).plus_days(day(rng));
        const auto& p = *t.find(isos[pick(rng)]);
        auto o = synthetic_obs(static_cast<long long>(i + 1), d, p, authors(rng), 0.0);
        o.y_star_star = 0.5 - 0.4 * o.features.is_weekend + 0.15 * o.features.is_christmas + nd(rng);
        out.push_back(o);
    }
    return out;
}

}  // namespace

TEST(ModelSpec, LadderTermsAndParsing) {
    EXPECT_EQ(l::model(1).terms.size(), 6u);
    EXPECT_EQ(l::model(2).terms.size(), 4u);
    EXPECT_EQ(l::model(3).terms.size(), 5u);
    EXPECT_EQ(l::model(4).terms.size(), 9u);
    EXPECT_EQ(l::model(5).terms.size(), 13u);
    for (int m = 6; m <= 9; ++m) {
        const auto prev = l::model(m - 1).terms;
        auto cur = l::model(m).terms;
        ASSERT_EQ(cur.size(), prev.size() + 1);
        cur.pop_back();
        EXPECT_EQ(cur, prev);
    }
    EXPECT_EQ(l::model(6).terms.back(), l::Term::christmas);
    EXPECT_EQ(l::model(9).terms.back(), l::Term::log10_lto);
    EXPECT_EQ(l::parse_model_list("M1..M9").size(), 9u);
    const auto some = l::parse_model_list("M1,M4,m9");
    ASSERT_EQ(some.size(), 3u);
    EXPECT_EQ(some[1].id, "M4");
    EXPECT_THROW((void)l::parse_model_list("M0"), l::LinmodError);
    EXPECT_THROW((void)l::model(10), l::LinmodError);
    for (l::Term t : l::kAllTerms) EXPECT_EQ(l::parse_term(l::term_label(t)), t);
}

TEST(BuildDesign, WeekdayRowsAndSpecialWeekend) {
    const auto t = c::parse_countries_cfg(kCfg);
    std::vector<r::RudObservation> obs;
    long long id = 1;
    // A full week for RO and SA, in 2015 (SA rests Friday and Saturday).
    for (int k = 0; k < 7; ++k) {
        obs.push_back(synthetic_obs(id++, Date(2015, 3, 2).plus_days(k), *t.find("RO"), 2, 0.1 * k));
        obs.push_back(synthetic_obs(id++, Date(2015, 3, 2).plus_days(k), *t.find("SA"), 3, 0.2 * k + 0.05));
    }
    const auto d = l::build_design(obs, l::model(1));
    ASSERT_EQ(d.columns, (std::vector<std::string>{"Intercept", "MON", "TUE", "WED", "THU", "WEEKEND"}));
    // Monday Romanian paper.
    Eigen::RowVectorXd mon(6);
    mon << 1, 1, 0, 0, 0, 0;
    EXPECT_EQ(d.X.row(0), mon);
    // Friday Saudi paper: id 10.
    const auto row = std::find(d.row_ids.begin(), d.row_ids.end(), 10) - d.row_ids.begin();
    ASSERT_EQ(obs[9].features.weekday, 5);
    Eigen::RowVectorXd fri(6);
    fri << 1, 0, 0, 0, 0, 1;
    EXPECT_EQ(d.X.row(row), fri);
    // Sunday is a working day in SA and joins the reference.
    Eigen::RowVectorXd sun(6);
    sun << 1, 0, 0, 0, 0, 0;
    EXPECT_EQ(d.X.row(13), sun);
}

TEST(BuildDesign, MissingContinentDroppedAndListwiseLto) {
    const auto t = c::parse_countries_cfg(kCfg);
    auto obs = planted_corpus(400, 5, t, {"RO", "US", "JP", "AU"});
    const auto d7 = l::build_design(obs, l::model(7));
    EXPECT_EQ(d7.dropped_columns, std::vector<std::string>{"AFRICA"});
    EXPECT_EQ(d7.p(), l::model(7).terms.size() - 1);
    auto with_tn = planted_corpus(300, 6, t, {"RO", "US", "JP", "TN"});
    const auto d9 = l::build_design(with_tn, l::model(9));
    std::size_t tn = 0;
    for (const auto& o : with_tn) tn += o.country == "TN";
    EXPECT_EQ(d9.listwise_dropped, tn);
    EXPECT_EQ(d9.n(), with_tn.size() - tn);
    // Without LTO the same rows stay.
    EXPECT_EQ(l::build_design(with_tn, l::model(8)).listwise_dropped, 0u);
    // y** unset is an error.
    with_tn[3].y_star_star = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW((void)l::build_design(with_tn, l::model(1)), l::LinmodError);
}

TEST(BuildDesign, TooFewRowsIsAnError) {
    const auto t = c::parse_countries_cfg(kCfg);
    auto obs = planted_corpus(4, 1, t);
    EXPECT_THROW((void)l::build_design(obs, l::model(9)), l::LinmodError);
}

TEST(Ols, ExactLinearAndTwoPointInterpolation) {
    auto d = planted(50, 2, 0.0);
    const auto f = l::ols_fit(d);
    EXPECT_LT(f.residuals.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    l::DesignMatrix two;
    two.X.resize(2, 2);
    two.X << 1, 2.0, 1, 5.0;
    two.y.resize(2);
    two.y << 3.0, 9.0;
    two.columns = {"Intercept", "x"};
    const auto g = l::ols_fit(two);
    const double slope = (9.0 - 3.0) / (5.0 - 2.0), icept = 3.0 - slope * 2.0;
    EXPECT_NEAR(g.beta(1), slope, 1e-12);
    EXPECT_NEAR(g.beta(0), icept, 1e-12);
    EXPECT_FALSE(g.coefficients[0].se_available());
}

TEST(Ols, PlantedRecoveryWithinThreeSe) {
    const std::vector<double> truth = {0.3, 0.02, -0.2};
    const auto d = planted(1000, 20180, 1.0, truth);
    const auto f = l::ols_fit(d);
    for (std::size_t j = 0; j < 3; ++j) {
        const auto& co = f.coefficients[j];
        EXPECT_LE(std::abs(co.estimate - truth[j]), 3.0 * co.se) << co.label;
    }
    // Against the long-double normal equations and the classical covariance.
    const auto b = normal_equations(d.X, d.y);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(f.beta(static_cast<Eigen::Index>(j)), static_cast<double>(b[j]), 1e-12);
    const Eigen::MatrixXd inv = (d.X.transpose() * d.X).ldlt().solve(Eigen::MatrixXd::Identity(3, 3));
    const double s2 = f.residuals.squaredNorm() / 997.0;
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(f.coefficients[static_cast<std::size_t>(j)].se, std::sqrt(s2 * inv(j, j)), 1e-12);
}

TEST(Ols, ConfidenceCoverageMatchesNominal) {
    int covered = 0, total = 0;
    for (unsigned seed = 1; seed <= 300; ++seed) {
        const auto d = planted(200, seed, 0.7);
        const auto f = l::ols_fit(d);
        const double truth[] = {0.3, 0.02, -0.2};
        for (std::size_t j = 0; j < 3; ++j) {
            covered += std::abs(f.coefficients[j].estimate - truth[j]) <= 1.96 * f.coefficients[j].se;
            ++total;
        }
    }
    EXPECT_NEAR(static_cast<double>(covered) / total, 0.95, 0.02);
}

TEST(Ols, ResidualsOrthogonalToColumns) {
    const auto t = c::parse_countries_cfg(kCfg);
    const auto obs = planted_corpus(3000, 8, t);
    const auto d = l::build_design(obs, l::model(8));
    const auto f = l::ols_fit(d);
    EXPECT_LT((d.X.transpose() * f.residuals).cwiseAbs().maxCoeff(), 1e-8 * d.y.norm());
}

TEST(Ols, ZeroColumnIsDroppedWithoutChangingCoefficients) {
    auto d = planted(300, 4, 0.5);
    const auto base = l::ols_fit(d);
    l::DesignMatrix z = d;
    z.X.conservativeResize(Eigen::NoChange, 4);
    z.X.col(3).setZero();
    z.columns.push_back("zero");
    l::drop_degenerate_columns(z);
    EXPECT_EQ(z.dropped_columns, std::vector<std::string>{"zero"});
    EXPECT_EQ(l::ols_fit(z).beta, base.beta);
}

TEST(Ols, RankDeficiencyNamesDependentColumn) {
    auto d = planted(100, 3, 0.5);
    d.X.conservativeResize(Eigen::NoChange, 4);
    d.X.col(3) = 2.0 * d.X.col(1) - d.X.col(2);
    d.columns.push_back("combo");
    try {
        (void)l::ols_fit(d);
        FAIL();
    } catch (const l::LinmodError& e) {
        EXPECT_NE(std::string(e.what()).find("combo"), std::string::npos);
    }
    l::drop_degenerate_columns(d);
    EXPECT_EQ(d.dropped_columns, std::vector<std::string>{"combo"});
}

TEST(Ols, StarsFollowThresholdsAndAreMonotone) {
    EXPECT_EQ(l::stars_for(0.01), 3);
    EXPECT_EQ(l::stars_for(0.0100001), 2);
    EXPECT_EQ(l::stars_for(0.05), 2);
    EXPECT_EQ(l::stars_for(0.10), 1);
    EXPECT_EQ(l::stars_for(0.11), 0);
    auto d = planted(400, 9, 1.0);
    int last = 0;
    double last_t = 0;
    const auto f0 = l::ols_fit(d);
    (void)f0;
    std::vector<std::pair<double, int>> ts;
    for (unsigned s = 1; s <= 60; ++s) {
        const auto f = l::ols_fit(planted(400, s, 1.0, {0.0, 0.01 * s / 6.0, 0.0}));
        ts.emplace_back(std::abs(f.coefficients[1].t), f.coefficients[1].stars);
    }
    std::sort(ts.begin(), ts.end());
    for (const auto& [t, st] : ts) {
        EXPECT_GE(st, last) << t << " after " << last_t;
        last = st;
        last_t = t;
    }
}

TEST(Ols, DeterministicRefit) {
    const auto d = planted(2000, 10, 1.0);
    const auto a = l::ols_fit(d), b = l::ols_fit(d);
    EXPECT_EQ(a.beta, b.beta);
    EXPECT_EQ(a.covariance, b.covariance);
}

TEST(Rls, BisquareKernelEndpoints) {
    EXPECT_EQ(l::bisquare_weight(0.0), 1.0);
    EXPECT_EQ(l::bisquare_weight(4.685), 0.0);
    EXPECT_EQ(l::bisquare_weight(-4.685), 0.0);
    EXPECT_EQ(l::bisquare_weight(9.0), 0.0);
    EXPECT_DOUBLE_EQ(l::bisquare_weight(2.0, 4.0), 0.5625);
}

TEST(Rls, InfiniteTuningEqualsOls) {
    const auto d = planted(500, 11, 1.0);
    const auto o = l::ols_fit(d);
    const auto r = l::rls_fit(d, {.tuning = 1e12});
    EXPECT_TRUE(r.converged);
    for (Eigen::Index j = 0; j < 3; ++j) {
        EXPECT_NEAR(r.beta(j), o.beta(j), 1e-6);
        EXPECT_NEAR(r.coefficients[static_cast<std::size_t>(j)].se, o.coefficients[static_cast<std::size_t>(j)].se,
                    1e-6 * o.coefficients[static_cast<std::size_t>(j)].se);
    }
    EXPECT_NEAR(r.r2, o.r2, 1e-9);
}

TEST(Rls, CleanDataAgreesWithOls) {
    const auto d = planted(1000, 12, 1.0);
    const auto o = l::ols_fit(d);
    const auto r = l::rls_fit(d);
    EXPECT_TRUE(r.converged);
    for (std::size_t j = 0; j < 3; ++j)
        EXPECT_LE(std::abs(r.coefficients[j].estimate - o.coefficients[j].estimate), 2.0 * o.coefficients[j].se);
}

TEST(Rls, GrossOutliersBarelyMoveTheSlope) {
    std::mt19937_64 rng(314);
    std::normal_distribution<double> nd(0.0, 0.5);
    std::uniform_real_distribution<double> ux(0.0, 10.0);
    l::DesignMatrix d;
    const int n = 500;
    d.X.resize(n, 2);
    d.y.resize(n);
    d.columns = {"Intercept", "x"};
    for (int i = 0; i < n; ++i) {
        const double x = ux(rng);
        d.X(i, 0) = 1;
        d.X(i, 1) = x;
        d.y(i) = 2.0 + 0.5 * x + nd(rng);
        if (i % 10 == 0) d.y(i) += 3.0 * x + 15.0;  // gross contamination growing with x
    }
    const auto o = l::ols_fit(d);
    const auto r = l::rls_fit(d);
    EXPECT_TRUE(r.converged);
    const double ols_err = std::abs(o.beta(1) - 0.5), rls_err = std::abs(r.beta(1) - 0.5);
    EXPECT_LE(rls_err, ols_err / 3.0);
    // Contaminated points end with zero weight.
    for (int i = 0; i < n; i += 10) EXPECT_EQ(r.irls_weights(i), 0.0);
}

TEST(Rls, NonConvergenceIsFlaggedAndFallbackIsOls) {
    std::mt19937_64 rng(2);
    std::cauchy_distribution<double> heavy(0.0, 1.0);
    auto d = planted(300, 13, 1.0);
    for (Eigen::Index i = 0; i < d.y.size(); ++i) d.y(i) += heavy(rng);
    const auto r = l::rls_fit(d, {.max_iterations = 1});
    EXPECT_FALSE(r.converged);
    const auto fb = l::rls_fit(d, {.max_iterations = 1, .fallback_to_ols = true});
    EXPECT_TRUE(fb.ols_fallback);
    EXPECT_EQ(fb.beta, l::ols_fit(d).beta);
    EXPECT_THROW((void)l::rls_fit(d, {.tuning = 1e-12}), l::LinmodError);
}

TEST(Vif, OrthogonalDuplicatedAndSeasonDummies) {
    // Centred two-level factorial columns are mutually orthogonal.
    l::DesignMatrix d;
    d.X.resize(16, 4);
    d.y = Eigen::VectorXd::LinSpaced(16, 0, 1);
    d.columns = {"Intercept", "a", "b", "c"};
    for (int i = 0; i < 16; ++i) {
        d.X(i, 0) = 1;
        d.X(i, 1) = (i & 1) ? 1 : -1;
        d.X(i, 2) = (i & 2) ? 1 : -1;
        d.X(i, 3) = (i & 4) ? 1 : -1;
    }
    for (double v : l::vif(d)) EXPECT_NEAR(v, 1.0, 1e-9);
    d.X.col(3) = d.X.col(2);
    const auto dup = l::vif(d);
    EXPECT_TRUE(std::isinf(dup[1]));
    EXPECT_TRUE(std::isinf(dup[2]));

    const auto t = c::parse_countries_cfg(kCfg);
    const auto obs = planted_corpus(4000, 14, t);
    const auto m2 = l::build_design(obs, l::model(2));
    const auto v = l::vif(m2);
    ASSERT_EQ(v.size(), 3u);
    for (Eigen::Index j = 1; j <= 3; ++j) {
        Eigen::MatrixXd others(m2.X.rows(), 3);
        others.col(0).setOnes();
        Eigen::Index at = 1;
        for (Eigen::Index k = 1; k <= 3; ++k)
            if (k != j) others.col(at++) = m2.X.col(k);
        const double r2 = oracle_r2(others, m2.X.col(j));
        EXPECT_NEAR(v[static_cast<std::size_t>(j - 1)], 1.0 / (1.0 - r2), 1e-9);
        EXPECT_GT(v[static_cast<std::size_t>(j - 1)], 1.0);
    }
    // Balanced four-way dummies correlate at about -1/3.
    const Eigen::VectorXd a = m2.X.col(1).array() - m2.X.col(1).mean();
    const Eigen::VectorXd b = m2.X.col(2).array() - m2.X.col(2).mean();
    EXPECT_NEAR(a.dot(b) / (a.norm() * b.norm()), -0.33, 0.03);
}

TEST(Heteroskedasticity, ConstantResidualsAndOracle) {
    const auto d = planted(200, 15, 1.0);
    const Eigen::VectorXd flat = Eigen::VectorXd::Constant(200, 0.7);
    EXPECT_EQ(l::breusch_pagan(flat, d).statistic, 0.0);
    const auto f = l::ols_fit(d);
    const auto h = l::heteroskedasticity_tests(f, d);
    const Eigen::VectorXd e2 = f.residuals.cwiseAbs2();
    EXPECT_NEAR(h.breusch_pagan.statistic, 200.0 * oracle_r2(d.X, e2), 1e-8);
    EXPECT_EQ(h.breusch_pagan.df, 2);
    Eigen::MatrixXd W(200, 6);
    W << d.X, d.X.col(1).cwiseAbs2(), d.X.col(1).cwiseProduct(d.X.col(2)), d.X.col(2).cwiseAbs2();
    EXPECT_NEAR(h.white.statistic, 200.0 * oracle_r2(W, e2), 1e-8);
    EXPECT_EQ(h.white.df, 5);
}

TEST(Heteroskedasticity, WhiteDropsDuplicatedDummyColumns) {
    const auto t = c::parse_countries_cfg(kCfg);
    const auto obs = planted_corpus(2000, 16, t);
    const auto d = l::build_design(obs, l::model(1));
    const auto f = l::ols_fit(d);
    const auto h = l::heteroskedasticity_tests(f, d);
    // Five dummies: squares duplicate them and every cross product is zero.
    EXPECT_EQ(h.white_dropped, 15u);
    EXPECT_EQ(h.white.df, 5);
    EXPECT_NEAR(h.white.statistic, h.breusch_pagan.statistic, 1e-9);
}

TEST(Heteroskedasticity, BreuschPaganSizeAndPower) {
    const double size = l::bp_rejection_rate({.n = 1000, .replications = 1000, .seed = 7});
    EXPECT_NEAR(size, 0.05, 0.02);
    const double power = l::bp_rejection_rate({.n = 1000, .replications = 200, .seed = 8, .heteroskedastic = true});
    EXPECT_GT(power, 0.90);
    const l::BpSimulation s{.n = 200, .replications = 64, .seed = 3};
    EXPECT_EQ(l::bp_rejection_rate(s, dwe::Execution::serial), l::bp_rejection_rate(s, dwe::Execution::parallel));
}

TEST(Diagnostics, VifAtLeastOne) {
    const auto t = c::parse_countries_cfg(kCfg);
    const auto obs = planted_corpus(1500, 17, t);
    const auto d = l::build_design(obs, l::model(8));
    const auto dg = l::diagnose(l::ols_fit(d), d);
    ASSERT_EQ(dg.vif.size(), d.p() - 1);
    for (double v : dg.vif) EXPECT_GE(v, 1.0 - 1e-12);
    EXPECT_GT(dg.residual_jb.df, 0);
}

TEST(RollWindow, SingleYearCorpusFillsOneWindow) {
    const auto t = c::parse_countries_cfg(kCfg);
    auto obs = planted_corpus(600, 18, t);
    for (auto& o : obs) o.year = 2006;
    const std::vector<l::ScopeData> scopes = {{"consolidated", obs}};
    const auto windows = l::default_windows();
    const auto specs = l::parse_model_list("M1,M2");
    const auto rep = l::roll_window_run(scopes, windows, specs);
    ASSERT_EQ(rep.blocks.size(), 5u);
    for (const auto& b : rep.blocks) {
        for (const auto& m : b.models) {
            if (b.window.label() == "2005-2007") {
                EXPECT_EQ(m.n, 600u);
                EXPECT_EQ(m.status, "ols");
            } else {
                EXPECT_EQ(m.n, 0u);
                EXPECT_EQ(m.status, "empty");
            }
        }
    }
}

TEST(RollWindow, PlantedWeekendDeficitInEveryWindow) {
    const auto t = c::parse_countries_cfg(kCfg);
    const auto obs = planted_corpus(12000, 19, t);
    const std::vector<l::ScopeData> scopes = {{"consolidated", obs}};
    const auto windows = l::default_windows();
    std::vector<l::ModelSpec> specs = {l::model(1), l::model(6, l::Method::rls)};
    const auto rep = l::roll_window_run(scopes, windows, specs);
    const auto weekend = static_cast<std::size_t>(l::Term::weekend);
    const auto christmas = static_cast<std::size_t>(l::Term::christmas);
    for (const auto& b : rep.blocks) {
        for (const auto& m : b.models) {
            EXPECT_LT(m.cells[weekend].value, 0.0);
            EXPECT_EQ(m.cells[weekend].stars, 3) << b.window.label() << " " << m.model_id;
        }
        EXPECT_GT(b.models[1].cells[christmas].value, 0.0);
    }
    const auto serial = l::roll_window_run(scopes, windows, specs, {}, dwe::Execution::serial);
    EXPECT_EQ(serial, rep);
}

TEST(RollWindow, ReportCsvRoundTrip) {
    const auto t = c::parse_countries_cfg(kCfg);
    const auto obs = planted_corpus(3000, 20, t, {"RO", "US", "JP"});
    const std::vector<l::ScopeData> scopes = {{"consolidated", obs}, {"1", obs}};
    const std::vector<l::YearWindow> windows = {{2000, 2008}, {2009, 2016}, {2017, 2018}};
    const auto specs = l::parse_model_list("M1..M9");
    const auto rep = l::roll_window_run(scopes, windows, specs);
    std::ostringstream os;
    l::write_report_csv(os, rep);
    const auto back = l::parse_report_csv(os.str());
    EXPECT_EQ(back, rep);
    // Missing continents show as dropped.
    const auto africa = static_cast<std::size_t>(l::Term::africa);
    EXPECT_EQ(rep.blocks[0].models[4].cells[africa].kind, l::CellKind::dropped);
    EXPECT_NE(os.str().find("N.A."), std::string::npos);
}

TEST(RollWindow, CellTextForms) {
    EXPECT_EQ(l::format_cell({l::CellKind::estimate, -0.467, 3}), "-0.467***");
    EXPECT_EQ(l::format_cell({l::CellKind::no_se, 0.25, 0}), "0.25?");
    EXPECT_EQ(l::parse_cell("0.084**"), (l::ReportCell{l::CellKind::estimate, 0.084, 2}));
    EXPECT_EQ(l::parse_cell(""), l::ReportCell{});
    EXPECT_THROW((void)l::parse_windows("2000-2005,2004-2007"), l::LinmodError);
    EXPECT_EQ(l::parse_windows("default").size(), 5u);
}
