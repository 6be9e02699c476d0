#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "dwe/corpus.hpp"
#include "dwe/csv.hpp"
#include "dwe/panel.hpp"
#include "dwe/rud.hpp"
#include "dwe/text.hpp"

namespace c = dwe::corpus;
namespace r = dwe::rud;
namespace pn = dwe::panel;
using dwe::Date;

namespace {

std::string fixture(const std::string& rel) { return std::string(DWE_FIXTURE_DIR) + "/" + rel; }

const char* kCfg =
    "iso=US continent=america hdi=0.920 lto=26\n"
    "iso=RO continent=europe hdi=0.802 lto=52\n"
    "iso=JP continent=asia hdi=0.903 lto=88\n"
    "iso=TN continent=africa hdi=0.725 lto=\n";

r::RudObservation obs_at(long long id, const Date& d, const c::CountryProfile& p, int authors, double rud) {
    c::ArticleRecord rec{id, 1, d, {}, {}, authors, 0, p.iso};
    r::RudObservation o;
    o.article_id = id;
    o.journal = 1;
    o.country = p.iso;
    o.received = d;
    o.rud = rud;
    o.features = c::derive_features(rec, p);
    return o;
}

// Cells of a synthetic country x day panel with a country effect u_c and
// cell noise lambda. u is centred and rescaled so its sample variance is
// exactly sigma_u^2.
struct Planted {
    int countries = 11;
    int days = 2435;
    double sigma_u = 0.05;
    double sigma_lambda = 1.0;
    double weekend = 0.0;
    double fill = 1.0;  // share of populated days
    std::uint64_t seed = 1;
};

std::vector<pn::PanelCell> planted_cells(const Planted& pl) {
    std::mt19937_64 rng(pl.seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<double> u(static_cast<std::size_t>(pl.countries));
    for (auto& v : u) v = z(rng);
    double mean = 0.0;
    for (double v : u) mean += v;
    mean /= static_cast<double>(u.size());
    double ss = 0.0;
    for (double& v : u) ss += (v - mean) * (v - mean);
    const double scale = pl.sigma_u > 0.0 ? pl.sigma_u / std::sqrt(ss / static_cast<double>(u.size() - 1)) : 0.0;
    for (double& v : u) v = (v - mean) * scale;

    std::vector<pn::PanelCell> cells;
    const Date start(2010, 1, 1);
    for (int c = 0; c < pl.countries; ++c) {
        const std::string iso = {static_cast<char>('A' + c / 26), static_cast<char>('A' + c % 26)};
        const double hdi = std::log10(0.7 + 0.02 * c);
        const double lto = std::log10(20.0 + 7.0 * c);
        for (int t = 1; t <= pl.days; ++t) {
            if (u01(rng) >= pl.fill) continue;
            pn::PanelCell cell;
            cell.country = iso;
            cell.t = t;
            cell.day = start.plus_days(t - 1);
            cell.n_ct = 1 + static_cast<long long>(u01(rng) * 3.0);
            cell.weekday = cell.day.iso_weekday();
            cell.weekend = cell.weekday >= 6;
            cell.season = c::derive_season(cell.day);
            cell.christmas = c::in_christmas_window(cell.day);
            cell.mean_log10_authors = std::log10(1.0 + std::floor(u01(rng) * 8.0));
            cell.log10_hdi = hdi;
            cell.log10_lto = lto;
            cell.trend = std::log10(static_cast<double>(t));
            cell.y = 0.3 + pl.weekend * (cell.weekend ? 1.0 : 0.0) + 0.1 * cell.mean_log10_authors +
                     0.02 * cell.trend + u[static_cast<std::size_t>(c)] + pl.sigma_lambda * z(rng);
            cells.push_back(cell);
        }
    }
    return cells;
}

// Small panel data with an intercept and two time-varying regressors.
pn::PanelData small_panel(const std::vector<int>& sizes, std::uint64_t seed, double sigma_u) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    int n = 0;
    for (int s : sizes) n += s;
    pn::PanelData d;
    d.X.resize(n, 3);
    d.y.resize(n);
    d.columns = {"Intercept", "x1", "x2"};
    int row = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        d.group_labels.push_back("G" + std::to_string(g));
        const double u = sigma_u * z(rng);
        for (int t = 0; t < sizes[g]; ++t, ++row) {
            d.X(row, 0) = 1.0;
            d.X(row, 1) = z(rng);
            d.X(row, 2) = z(rng) + 0.3 * static_cast<double>(t);
            d.y(row) = 1.0 + 0.5 * d.X(row, 1) - 0.25 * d.X(row, 2) + u + 0.3 * z(rng);
            d.group.push_back(static_cast<int>(g));
        }
    }
    return d;
}

Eigen::VectorXd brute_force_gls(const pn::PanelData& d, double s2u, double s2l) {
    const auto n = d.X.rows();
    Eigen::MatrixXd omega = s2l * Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (d.group[static_cast<std::size_t>(i)] == d.group[static_cast<std::size_t>(j)]) omega(i, j) += s2u;
    const Eigen::MatrixXd oi = omega.inverse();
    const Eigen::MatrixXd a = d.X.transpose() * oi * d.X;
    const Eigen::VectorXd b = d.X.transpose() * oi * d.y;
    return a.fullPivLu().solve(b);
}

}  // namespace

TEST(PanelBuild, EqualRudsGiveTheirLog) {
    const auto t = c::parse_countries_cfg(kCfg);
    const Date d(2012, 5, 9);
    std::vector<r::RudObservation> obs = {obs_at(1, d, *t.find("US"), 2, 7.0), obs_at(2, d, *t.find("US"), 4, 7.0)};
    pn::PanelOptions opt;
    opt.top_n = 1;
    const auto cells = pn::build_panel(obs, t, opt);
    ASSERT_EQ(cells.size(), 1u);
    EXPECT_EQ(cells[0].country, "US");
    EXPECT_EQ(cells[0].n_ct, 2);
    EXPECT_NEAR(cells[0].y, std::log10(7.0), 1e-15);
    EXPECT_NEAR(cells[0].mean_log10_authors, (std::log10(2.0) + std::log10(4.0)) / 2, 1e-15);
    EXPECT_EQ(cells[0].t, static_cast<int>(d.days_since(opt.start)) + 1);
    EXPECT_EQ(cells[0].weekday, 3);
    EXPECT_FALSE(cells[0].weekend);
    EXPECT_NEAR(cells[0].trend, std::log10(static_cast<double>(cells[0].t)), 1e-15);
    EXPECT_NEAR(cells[0].log10_hdi, std::log10(0.92), 1e-15);
    ASSERT_TRUE(cells[0].log10_lto.has_value());
    EXPECT_NEAR(*cells[0].log10_lto, std::log10(26.0), 1e-15);
}

TEST(PanelBuild, WorkedExampleMondayCell) {
    const auto countries = c::parse_countries_cfg("iso=US continent=america hdi=0.92 lto=26\n");
    const auto corpus = c::clean_corpus(c::read_corpus_file(fixture("worked_example_corpus.csv")), countries);
    const auto obs = r::build_rud_dataset(corpus, r::ScopeMode::consolidated);
    // Recount: the day of week 32 with the most submissions.
    std::map<Date, int> per_day;
    for (const auto& o : obs)
        if (o.week == 32) ++per_day[o.received];
    ASSERT_FALSE(per_day.empty());
    auto busiest = per_day.begin();
    for (auto it = per_day.begin(); it != per_day.end(); ++it)
        if (it->second > busiest->second) busiest = it;
    ASSERT_EQ(busiest->second, 16);
    EXPECT_EQ(busiest->first.iso_weekday(), 1);

    pn::PanelOptions opt;
    opt.top_n = 1;
    opt.start = Date(2000, 1, 1);
    opt.end = Date(2020, 12, 31);
    const auto cells = pn::build_panel(obs, countries, opt);
    const pn::PanelCell* monday = nullptr;
    std::size_t total = 0;
    for (const auto& cell : cells) {
        total += static_cast<std::size_t>(cell.n_ct);
        if (cell.day == busiest->first) monday = &cell;
    }
    EXPECT_EQ(total, obs.size());
    std::map<Date, int> all_days;
    for (const auto& o : obs) ++all_days[o.received];
    EXPECT_EQ(cells.size(), all_days.size());
    ASSERT_NE(monday, nullptr);
    EXPECT_EQ(monday->n_ct, 16);
    EXPECT_NEAR(monday->y, std::log10(4.30769), 1e-6);
}

TEST(PanelBuild, EmptyDaysEmitNoCellAndRangeIsHonoured) {
    const auto t = c::parse_countries_cfg(kCfg);
    std::vector<r::RudObservation> obs = {
        obs_at(1, Date(2011, 3, 1), *t.find("US"), 1, 2.0), obs_at(2, Date(2011, 3, 3), *t.find("US"), 1, 3.0),
        obs_at(3, Date(2011, 3, 3), *t.find("RO"), 1, 1.0), obs_at(4, Date(2009, 3, 3), *t.find("RO"), 1, 1.0),
        obs_at(5, Date(2011, 3, 4), *t.find("US"), 1, 0.5)};
    pn::PanelOptions opt;
    opt.top_n = 2;
    const auto cells = pn::build_panel(obs, t, opt);
    ASSERT_EQ(cells.size(), 4u);
    EXPECT_EQ(cells[0].country, "RO");
    EXPECT_EQ(cells[1].country, "US");
    EXPECT_EQ(cells[1].day, Date(2011, 3, 1));
    EXPECT_EQ(cells[2].day, Date(2011, 3, 3));
    EXPECT_EQ(cells[3].day, Date(2011, 3, 4));
    for (const auto& cell : cells) EXPECT_GE(cell.n_ct, 1);
}

TEST(PanelBuild, TopCountriesRankingAndErrors) {
    const auto t = c::parse_countries_cfg(kCfg);
    std::vector<r::RudObservation> obs;
    long long id = 1;
    for (int i = 0; i < 3; ++i) obs.push_back(obs_at(id++, Date(2012, 1, 2 + i), *t.find("RO"), 1, 1.0));
    for (int i = 0; i < 2; ++i) obs.push_back(obs_at(id++, Date(2012, 1, 2 + i), *t.find("US"), 1, 1.0));
    for (int i = 0; i < 2; ++i) obs.push_back(obs_at(id++, Date(2012, 1, 2 + i), *t.find("JP"), 1, 1.0));
    pn::PanelOptions opt;
    opt.top_n = 2;
    EXPECT_EQ(pn::top_countries(obs, opt), (std::vector<std::string>{"RO", "JP"}));
    opt.top_n = 4;
    EXPECT_THROW((void)pn::build_panel(obs, t, opt), pn::PanelError);
    opt.top_n = 2;
    opt.start = Date(2013, 1, 1);
    EXPECT_THROW((void)pn::build_panel(obs, t, opt), pn::PanelError);
}

TEST(PanelBuild, SerialEqualsParallel) {
    Planted pl;
    pl.days = 300;
    const auto src = planted_cells(pl);
    // Turn the cells back into observations of a known country table.
    std::string cfg;
    for (int i = 0; i < pl.countries; ++i) {
        const std::string iso = {static_cast<char>('A' + i / 26), static_cast<char>('A' + i % 26)};
        cfg += "iso=" + iso + " continent=europe hdi=0.8 lto=40\n";
    }
    const auto t = c::parse_countries_cfg(cfg);
    std::vector<r::RudObservation> obs;
    long long id = 1;
    for (const auto& cell : src)
        for (long long k = 0; k < cell.n_ct; ++k)
            obs.push_back(obs_at(id++, cell.day, *t.find(cell.country), 1 + static_cast<int>(k), 0.5 + 0.25 * k));
    const auto a = pn::build_panel(obs, t, {}, dwe::Execution::serial);
    const auto b = pn::build_panel(obs, t, {}, dwe::Execution::parallel);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(a.size(), src.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].country, b[i].country);
        EXPECT_EQ(a[i].t, b[i].t);
        EXPECT_EQ(a[i].n_ct, b[i].n_ct);
        EXPECT_EQ(a[i].y, b[i].y);
        EXPECT_EQ(a[i].mean_log10_authors, b[i].mean_log10_authors);
    }
}

TEST(PanelDesign, ColumnsWeightingAndListwiseDrop) {
    Planted pl;
    pl.countries = 3;
    pl.days = 40;
    auto cells = planted_cells(pl);
    cells[0].log10_lto.reset();
    const auto d = pn::panel_design(cells, pn::Weighting::none);
    EXPECT_EQ(d.listwise_dropped, 1u);
    EXPECT_EQ(d.X.rows(), static_cast<Eigen::Index>(cells.size() - 1));
    // Forty days of January and February: winter only.
    for (const char* gone : {"FALL", "SUMMER", "SPRING"})
        EXPECT_NE(std::find(d.dropped_columns.begin(), d.dropped_columns.end(), gone), d.dropped_columns.end())
            << gone;
    EXPECT_EQ(std::find(d.dropped_columns.begin(), d.dropped_columns.end(), "CHRISTMAS"), d.dropped_columns.end());
    EXPECT_EQ(d.group_labels.size(), 3u);

    const auto m = pn::panel_design(cells, pn::Weighting::multiply);
    const auto w = pn::panel_design(cells, pn::Weighting::wls);
    const auto& cell = cells[1];
    const double n = static_cast<double>(cell.n_ct);
    auto col = [](const pn::PanelData& p, const std::string& name) {
        return static_cast<Eigen::Index>(std::find(p.columns.begin(), p.columns.end(), name) - p.columns.begin());
    };
    EXPECT_DOUBLE_EQ(m.y(0), n * cell.y);
    EXPECT_DOUBLE_EQ(m.X(0, col(m, "Intercept")), 1.0);
    EXPECT_DOUBLE_EQ(m.X(0, col(m, "WEEKEND")), cell.weekend ? 1.0 : 0.0);
    EXPECT_DOUBLE_EQ(m.X(0, col(m, "log10AUTHORS")), n * cell.mean_log10_authors);
    EXPECT_DOUBLE_EQ(m.X(0, col(m, "TREND")), n * cell.trend);
    EXPECT_DOUBLE_EQ(w.y(0), std::sqrt(n) * cell.y);
    EXPECT_DOUBLE_EQ(w.X(0, col(w, "Intercept")), std::sqrt(n));
    EXPECT_DOUBLE_EQ(w.X(0, col(w, "TREND")), std::sqrt(n) * cell.trend);
}

TEST(PanelEgls, MatchesBruteForceGls) {
    for (const auto& sizes : {std::vector<int>{5, 5, 5}, std::vector<int>{3, 4, 5}, std::vector<int>{2, 5}}) {
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
            const auto d = small_panel(sizes, seed, 1.0);
            const auto f = pn::re_egls(d);
            if (f.sigma2_u_clamped) continue;
            const auto b = brute_force_gls(d, f.sigma2_u, f.sigma2_lambda);
            for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(f.beta(j), b(j), 1e-8) << "seed " << seed;
        }
    }
    // At least one balanced instance must exercise the unclamped path.
    const auto d = small_panel({5, 5, 5}, 3, 2.0);
    const auto f = pn::re_egls(d);
    ASSERT_FALSE(f.sigma2_u_clamped);
    EXPECT_DOUBLE_EQ(f.theta[0], f.theta[1]);
    EXPECT_DOUBLE_EQ(f.theta[0], f.theta[2]);
    const auto b = brute_force_gls(d, f.sigma2_u, f.sigma2_lambda);
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(f.beta(j), b(j), 1e-8);
}

TEST(PanelEgls, ZeroCountryEffectEqualsPooledOls) {
    // Noise orthogonal to the country indicators and the regressors: the
    // between residual form vanishes and sigma2_u clamps to zero.
    auto d = small_panel({40, 50, 60, 45}, 11, 0.0);
    const auto n = d.X.rows();
    const auto N = static_cast<Eigen::Index>(d.group_labels.size());
    Eigen::MatrixXd zx(n, N + d.X.cols());
    zx.setZero();
    for (Eigen::Index i = 0; i < n; ++i) zx(i, d.group[static_cast<std::size_t>(i)]) = 1.0;
    zx.rightCols(d.X.cols()) = d.X;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::VectorXd e(n);
    for (auto& v : e) v = z(rng);
    e -= zx * zx.colPivHouseholderQr().solve(e);
    d.y = d.X * Eigen::Vector3d(1.0, 0.5, -0.25) + e;

    const auto f = pn::re_egls(d);
    const auto ols = pn::pooled_ols(d);
    EXPECT_TRUE(f.sigma2_u_clamped);
    EXPECT_EQ(f.sigma2_u, 0.0);
    EXPECT_EQ(f.rho, 0.0);
    for (double th : f.theta) EXPECT_EQ(th, 0.0);
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(f.beta(j), ols.beta(j), 1e-6);

    // Independent noise without a country effect: rho stays near zero.
    Planted pl;
    pl.sigma_u = 0.0;
    pl.days = 400;
    const auto g = pn::re_egls_fit(planted_cells(pl));
    EXPECT_GE(g.rho, 0.0);
    EXPECT_LT(g.rho, 0.01);
}

TEST(PanelEgls, PlantedVarianceShareRecovered) {
    Planted pl;  // 11 countries x 2435 days, sigma_u / sigma_lambda = 0.05
    const double planted = 0.0025 / 1.0025;
    double sum = 0.0;
    const int reps = 16;
    for (int rep = 0; rep < reps; ++rep) {
        pl.seed = 900 + static_cast<std::uint64_t>(rep);
        const auto cells = planted_cells(pl);
        ASSERT_EQ(cells.size(), 26785u);
        const auto f = pn::re_egls_fit(cells);
        EXPECT_GE(f.rho, 0.0);
        EXPECT_LT(f.rho, 1.0);
        sum += f.rho;
    }
    EXPECT_NEAR(sum / reps, planted, 0.3 * planted);
}

TEST(PanelEgls, PlantedWeekendDeficitRecovered) {
    Planted pl;
    pl.weekend = -0.37;
    pl.sigma_lambda = 0.5;
    pl.fill = 0.8;
    pl.seed = 77;
    const auto f = pn::re_egls_fit(planted_cells(pl));
    const auto* we = f.find("WEEKEND");
    ASSERT_NE(we, nullptr);
    EXPECT_LT(we->estimate, 0.0);
    EXPECT_EQ(we->stars, 3);
    EXPECT_NEAR(we->estimate, -0.37, 4 * we->se);
    const auto* au = f.find("log10AUTHORS");
    ASSERT_NE(au, nullptr);
    EXPECT_NEAR(au->estimate, 0.1, 4 * au->se);
    for (double th : f.theta) {
        EXPECT_GE(th, 0.0);
        EXPECT_LT(th, 1.0);
    }
}

TEST(PanelEgls, DoublingCellCounts) {
    Planted pl;
    pl.countries = 5;
    pl.days = 500;
    pl.sigma_u = 0.3;
    pl.seed = 5;
    const auto cells = planted_cells(pl);
    auto doubled = cells;
    for (auto& cell : doubled) cell.n_ct *= 2;

    const auto a = pn::re_egls_fit(cells);
    const auto b = pn::re_egls_fit(doubled);
    ASSERT_EQ(a.beta.size(), b.beta.size());
    for (Eigen::Index j = 0; j < a.beta.size(); ++j) EXPECT_EQ(a.beta(j), b.beta(j));

    // Literal multiplication: y and continuous regressors scale together, so
    // continuous slopes stay and intercept and dummy coefficients double.
    const auto wa = pn::re_egls_fit(cells, pn::Weighting::multiply);
    const auto wb = pn::re_egls_fit(doubled, pn::Weighting::multiply);
    ASSERT_EQ(wa.coefficients.size(), wb.coefficients.size());
    const std::set<std::string> continuous = {"log10AUTHORS", "log10HDI", "log10LTO", "TREND"};
    for (std::size_t j = 0; j < wa.coefficients.size(); ++j) {
        const auto& ca = wa.coefficients[j];
        const auto& cb = wb.coefficients[j];
        ASSERT_EQ(ca.label, cb.label);
        const double factor = continuous.contains(ca.label) ? 1.0 : 2.0;
        EXPECT_NEAR(cb.estimate, factor * ca.estimate, 1e-7 * (1.0 + std::abs(factor * ca.estimate))) << ca.label;
        EXPECT_NEAR(cb.t, ca.t, 1e-6 * (1.0 + std::abs(ca.t))) << ca.label;
    }
    EXPECT_NEAR(wb.sigma2_lambda, 4.0 * wa.sigma2_lambda, 1e-9 * wb.sigma2_lambda);
    for (std::size_t c = 0; c < wa.theta.size(); ++c) EXPECT_NEAR(wb.theta[c], wa.theta[c], 1e-9);

    // Variance weights: doubling every count rescales all rows alike.
    const auto va = pn::re_egls_fit(cells, pn::Weighting::wls);
    const auto vb = pn::re_egls_fit(doubled, pn::Weighting::wls);
    for (Eigen::Index j = 0; j < va.beta.size(); ++j)
        EXPECT_NEAR(vb.beta(j), va.beta(j), 1e-8 * (1.0 + std::abs(va.beta(j))));
}

TEST(PanelEgls, Preconditions) {
    EXPECT_THROW((void)pn::re_egls(small_panel({10}, 1, 1.0)), pn::PanelError);
    EXPECT_THROW((void)pn::re_egls(small_panel({10, 1}, 1, 1.0)), pn::PanelError);
}

TEST(PanelEgls, FitCsvListsTermsAndComponents) {
    Planted pl;
    pl.countries = 3;
    pl.days = 200;
    pl.sigma_u = 0.5;
    const auto f = pn::re_egls_fit(planted_cells(pl));
    std::ostringstream os;
    pn::write_panel_fit_csv(os, f);
    const auto table = dwe::csv::parse(os.str());
    EXPECT_EQ(table.header, pn::kPanelFitColumns);
    EXPECT_EQ(table.rows.size(), f.coefficients.size() + f.dropped_columns.size());
    EXPECT_NE(os.str().find("# rho="), std::string::npos);
    EXPECT_NE(os.str().find("# sigma2_u_over_sigma2_lambda="), std::string::npos);
    EXPECT_NE(os.str().find("# theta_AA="), std::string::npos);
}
