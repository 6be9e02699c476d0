#include "dwe/panel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "dwe/csv.hpp"
#include "dwe/text.hpp"

namespace dwe::panel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

const linmod::Coefficient* PanelFit::find(std::string_view label) const {
    for (const auto& c : coefficients)
        if (c.label == label) return &c;
    return nullptr;
}

const std::vector<std::string>& panel_columns() {
    static const std::vector<std::string> cols = {"Intercept", "MON",       "TUE",    "WED",    "THU",
                                                  "WEEKEND",   "log10AUTHORS", "CHRISTMAS", "FALL", "SUMMER",
                                                  "SPRING",    "log10HDI",  "log10LTO", "TREND"};
    return cols;
}

std::vector<std::string> top_countries(std::span<const rud::RudObservation> obs, const PanelOptions& opt) {
    std::map<std::string, long long> counts;
    for (const auto& o : obs)
        if (!(o.received < opt.start) && !(opt.end < o.received) && !o.country.empty()) ++counts[o.country];
    std::vector<std::pair<std::string, long long>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (opt.top_n < 1) throw PanelError("top_n must be at least 1");
    if (ranked.size() < static_cast<std::size_t>(opt.top_n))
        throw PanelError("only " + std::to_string(ranked.size()) + " countries have papers between " +
                         opt.start.iso() + " and " + opt.end.iso() + "; " + std::to_string(opt.top_n) + " requested");
    std::vector<std::string> out;
    for (int i = 0; i < opt.top_n; ++i) out.push_back(ranked[static_cast<std::size_t>(i)].first);
    return out;
}

std::vector<PanelCell> build_panel(std::span<const rud::RudObservation> obs, const corpus::CountryTable& countries,
                                   const PanelOptions& opt, Execution ex) {
    if (opt.end < opt.start) throw PanelError("panel end date precedes start date");
    auto top = top_countries(obs, opt);
    std::sort(top.begin(), top.end());
    std::map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < top.size(); ++i) slot[top[i]] = i;
    std::vector<std::vector<const rud::RudObservation*>> by_country(top.size());
    for (const auto& o : obs) {
        if (o.received < opt.start || opt.end < o.received) continue;
        auto it = slot.find(o.country);
        if (it != slot.end()) by_country[it->second].push_back(&o);
    }
    for (const auto& iso : top)
        if (!countries.find(iso)) throw PanelError("country '" + iso + "' is missing from the country table");

    std::vector<std::vector<PanelCell>> parts(top.size());
    for_each_index(top.size(), ex, [&](std::size_t c) {
        auto& list = by_country[c];
        std::stable_sort(list.begin(), list.end(),
                         [](const auto* a, const auto* b) { return a->received < b->received; });
        const auto& profile = *countries.find(top[c]);
        for (std::size_t i = 0; i < list.size();) {
            std::size_t j = i;
            double sum_y = 0.0, sum_a = 0.0;
            while (j < list.size() && list[j]->received == list[i]->received) {
                if (!(list[j]->rud > 0.0)) throw PanelError("non-positive RUD in panel input");
                sum_y += std::log10(list[j]->rud);
                sum_a += list[j]->features.log10_authors;
                ++j;
            }
            PanelCell cell;
            cell.country = top[c];
            cell.day = list[i]->received;
            cell.t = static_cast<int>(cell.day.days_since(opt.start)) + 1;
            cell.n_ct = static_cast<long long>(j - i);
            cell.y = sum_y / static_cast<double>(cell.n_ct);
            cell.mean_log10_authors = sum_a / static_cast<double>(cell.n_ct);
            cell.weekday = corpus::derive_weekday(cell.day);
            cell.weekend = corpus::classify_weekend(cell.day, profile);
            cell.season = corpus::derive_season(cell.day);
            cell.christmas = corpus::in_christmas_window(cell.day);
            cell.log10_hdi = std::log10(profile.hdi);
            if (profile.lto && *profile.lto > 0.0) cell.log10_lto = std::log10(*profile.lto);
            cell.trend = opt.trend_base == TrendBase::log10 ? std::log10(static_cast<double>(cell.t))
                                                            : std::log(static_cast<double>(cell.t));
            parts[c].push_back(cell);
            i = j;
        }
    });
    std::vector<PanelCell> out;
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

PanelData panel_design(std::span<const PanelCell> cells, Weighting w) {
    PanelData d;
    std::vector<const PanelCell*> rows;
    for (const auto& c : cells) {
        if (c.log10_lto) {
            rows.push_back(&c);
        } else {
            ++d.listwise_dropped;
        }
    }
    const auto& cols = panel_columns();
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto k = static_cast<Eigen::Index>(cols.size());
    linmod::DesignMatrix m;
    m.X.resize(n, k);
    m.y.resize(n);
    m.columns = cols;
    std::map<std::string, int> gid;
    using corpus::Season;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& c = *rows[static_cast<std::size_t>(i)];
        auto day = [&](int wd) { return (c.weekday == wd && !c.weekend) ? 1.0 : 0.0; };
        const double nc = static_cast<double>(c.n_ct);
        const double mult = w == Weighting::multiply ? nc : 1.0;
        const double all = w == Weighting::wls ? std::sqrt(nc) : 1.0;
        const double v[] = {1.0,
                            day(1),
                            day(2),
                            day(3),
                            day(4),
                            c.weekend ? 1.0 : 0.0,
                            mult * c.mean_log10_authors,
                            c.christmas ? 1.0 : 0.0,
                            c.season == Season::fall ? 1.0 : 0.0,
                            c.season == Season::summer ? 1.0 : 0.0,
                            c.season == Season::spring ? 1.0 : 0.0,
                            mult * c.log10_hdi,
                            mult * *c.log10_lto,
                            mult * c.trend};
        for (Eigen::Index j = 0; j < k; ++j) m.X(i, j) = all * v[j];
        m.y(i) = all * mult * c.y;
        auto [it, fresh] = gid.emplace(c.country, static_cast<int>(d.group_labels.size()));
        if (fresh) d.group_labels.push_back(c.country);
        d.group.push_back(it->second);
    }
    linmod::drop_degenerate_columns(m);
    d.y = std::move(m.y);
    d.X = std::move(m.X);
    d.columns = std::move(m.columns);
    d.dropped_columns = std::move(m.dropped_columns);
    return d;
}

namespace {

Eigen::MatrixXd group_means(const Eigen::MatrixXd& A, const std::vector<int>& g, const Eigen::VectorXd& T) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(T.size(), A.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i) s.row(g[static_cast<std::size_t>(i)]) += A.row(i);
    return T.cwiseInverse().asDiagonal() * s;
}

}  // namespace

linmod::FitResult pooled_ols(const PanelData& data) {
    linmod::DesignMatrix m;
    m.X = data.X;
    m.y = data.y;
    m.columns = data.columns;
    m.dropped_columns = data.dropped_columns;
    return linmod::ols_fit(m);
}

PanelFit re_egls(const PanelData& data) {
    const auto n = data.X.rows(), k = data.X.cols();
    const auto N = static_cast<Eigen::Index>(data.group_labels.size());
    if (N < 2) throw PanelError("random effects need at least two countries");
    Eigen::VectorXd T = Eigen::VectorXd::Zero(N);
    for (int g : data.group) T(g) += 1.0;
    if (T.minCoeff() < 2.0) throw PanelError("every country needs at least two populated days");
    if (n <= k) throw PanelError("panel has no more cells than regressors");

    // Pooled OLS residuals.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(data.X);
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> piv(data.X);
        piv.setThreshold(1e-10);
        if (piv.rank() < k) throw PanelError("panel design is rank deficient");
    }
    const Eigen::VectorXd e = data.y - data.X * qr.solve(data.y);

    // Within regression for sigma2_lambda.
    linmod::DesignMatrix within;
    {
        const Eigen::MatrixXd xm = group_means(data.X, data.group, T);
        const Eigen::MatrixXd ym = group_means(data.y, data.group, T);
        within.X.resize(n, k);
        within.y.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int g = data.group[static_cast<std::size_t>(i)];
            within.X.row(i) = data.X.row(i) - xm.row(g);
            within.y(i) = data.y(i) - ym(g, 0);
        }
        for (const auto& c : data.columns) within.columns.push_back("within " + c);
        linmod::drop_degenerate_columns(within);
    }
    const auto kw = within.X.cols();
    const double dfw = static_cast<double>(n - N - kw);
    if (dfw <= 0) throw PanelError("no degrees of freedom left for the within variance");
    double ssr_w = within.y.squaredNorm();
    if (kw > 0) {
        Eigen::HouseholderQR<Eigen::MatrixXd> wq(within.X);
        ssr_w = (within.y - within.X * wq.solve(within.y)).squaredNorm();
    }
    const double s2l = ssr_w / dfw;

    // Between quadratic form B = sum_c T_c ebar_c^2 with
    // E[B] = s2l tr(PM) + s2u tr(G' D^-1 G), G = D - S (X'X)^-1 S', S = Z'X.
    const Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd xtx_inv = Rinv * Rinv.transpose();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(N, k);
    Eigen::VectorXd esum = Eigen::VectorXd::Zero(N);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int g = data.group[static_cast<std::size_t>(i)];
        S.row(g) += data.X.row(i);
        esum(g) += e(i);
    }
    const double B = (esum.cwiseAbs2().array() / T.array()).sum();
    const Eigen::MatrixXd SA = S * xtx_inv * S.transpose();  // N x N
    const double tr_pm = static_cast<double>(N) - (SA.diagonal().array() / T.array()).sum();
    Eigen::MatrixXd G = -SA;
    G.diagonal() += T;
    double tr_u = 0.0;
    for (Eigen::Index a = 0; a < N; ++a) tr_u += G.row(a).squaredNorm() / T(a);
    if (!(tr_u > 0.0)) throw PanelError("country effect not identified: between variation absorbed by regressors");

    PanelFit f;
    f.sigma2_lambda = s2l;
    f.sigma2_u = (B - s2l * tr_pm) / tr_u;
    if (f.sigma2_u < 0.0) {
        f.sigma2_u = 0.0;
        f.sigma2_u_clamped = true;
    }
    f.rho = f.sigma2_u + s2l > 0.0 ? f.sigma2_u / (f.sigma2_u + s2l) : 0.0;
    f.ratio = s2l > 0.0 ? f.sigma2_u / s2l : (f.sigma2_u > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    f.countries = data.group_labels;
    f.theta.resize(static_cast<std::size_t>(N));
    for (Eigen::Index g = 0; g < N; ++g) {
        const double denom = s2l + T(g) * f.sigma2_u;
        f.theta[static_cast<std::size_t>(g)] = denom > 0.0 ? 1.0 - std::sqrt(s2l / denom) : 0.0;
    }

    linmod::DesignMatrix q;
    q.columns = data.columns;
    q.dropped_columns = data.dropped_columns;
    q.X = data.X;
    q.y = data.y;
    const Eigen::MatrixXd xm = group_means(data.X, data.group, T);
    const Eigen::MatrixXd ym = group_means(data.y, data.group, T);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int g = data.group[static_cast<std::size_t>(i)];
        const double th = f.theta[static_cast<std::size_t>(g)];
        if (th == 0.0) continue;
        q.X.row(i) -= th * xm.row(g);
        q.y(i) -= th * ym(g, 0);
    }
    const auto ols = linmod::ols_fit(q);
    f.coefficients = ols.coefficients;
    f.beta = ols.beta;
    f.dropped_columns = data.dropped_columns;
    f.adjusted_r2 = ols.adjusted_r2;
    f.cases = static_cast<std::size_t>(n);
    f.listwise_dropped = data.listwise_dropped;
    return f;
}

PanelFit re_egls_fit(std::span<const PanelCell> cells, Weighting w) {
    auto f = re_egls(panel_design(cells, w));
    f.weighting = w;
    return f;
}

void write_panel_fit_csv(std::ostream& os, const PanelFit& fit) {
    csv::write_row(os, kPanelFitColumns);
    for (const auto& c : fit.coefficients) {
        const bool se = c.se_available();
        csv::write_row(os, {c.label, format_double(c.estimate), se ? format_double(c.se) : "?",
                            se ? format_double(c.t) : "?", se ? format_double(c.p_value) : "?",
                            linmod::star_text(c.stars)});
    }
    for (const auto& d : fit.dropped_columns) csv::write_row(os, {d, "", "", "", "", "N.A."});
    const char* weighting = fit.weighting == Weighting::none ? "none"
                            : fit.weighting == Weighting::multiply ? "multiply"
                                                                   : "wls";
    os << "# weighting=" << weighting << "\n";
    os << "# trend=" << (fit.trend_base == TrendBase::log10 ? "log10" : "ln") << "\n";
    os << "# cases=" << fit.cases << "\n";
    os << "# listwise_dropped=" << fit.listwise_dropped << "\n";
    os << "# sigma2_u=" << format_double(fit.sigma2_u) << (fit.sigma2_u_clamped ? " (clamped)" : "") << "\n";
    os << "# sigma2_lambda=" << format_double(fit.sigma2_lambda) << "\n";
    os << "# rho=" << format_double(fit.rho) << "\n";
    os << "# sigma2_u_over_sigma2_lambda=" << format_double(fit.ratio) << "\n";
    os << "# adjusted_r2=" << (std::isfinite(fit.adjusted_r2) ? format_double(fit.adjusted_r2) : "?") << "\n";
    for (std::size_t i = 0; i < fit.countries.size(); ++i)
        os << "# theta_" << fit.countries[i] << "=" << format_double(fit.theta[i]) << "\n";
    if (!fit.note.empty()) os << "# note=" << fit.note << "\n";
}

}  // namespace dwe::panel
