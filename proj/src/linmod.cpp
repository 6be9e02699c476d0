#include "dwe/linmod.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "dwe/csv.hpp"
#include "dwe/text.hpp"

namespace dwe::linmod {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

using corpus::Continent;
using corpus::Season;

}  // namespace

std::string term_label(Term t) {
    switch (t) {
        case Term::intercept: return "Intercept";
        case Term::mon: return "MON";
        case Term::tue: return "TUE";
        case Term::wed: return "WED";
        case Term::thu: return "THU";
        case Term::weekend: return "WEEKEND";
        case Term::spring: return "SPRING";
        case Term::summer: return "SUMMER";
        case Term::fall: return "FALL";
        case Term::america: return "AMERICA";
        case Term::africa: return "AFRICA";
        case Term::asia: return "ASIA";
        case Term::oceania: return "OCEANIA";
        case Term::christmas: return "CHRISTMAS";
        case Term::log10_authors: return "log10AUTHORS";
        case Term::log10_hdi: return "log10HDI";
        case Term::log10_lto: return "log10LTO";
    }
    return "?";
}

Term parse_term(std::string_view label) {
    for (Term t : kAllTerms)
        if (to_lower(term_label(t)) == to_lower(trim(label))) return t;
    throw LinmodError("unknown term '" + std::string(label) + "'");
}

Method parse_method(std::string_view text) {
    const auto t = to_lower(trim(text));
    if (t == "ols") return Method::ols;
    if (t == "rls" || t == "robust") return Method::rls;
    throw LinmodError("unknown method '" + std::string(text) + "' (expected ols or rls)");
}

std::string_view method_name(Method m) { return m == Method::ols ? "ols" : "rls"; }

ModelSpec model(int number, Method method) {
    const std::vector<Term> days = {Term::mon, Term::tue, Term::wed, Term::thu, Term::weekend};
    const std::vector<Term> seasons = {Term::spring, Term::summer, Term::fall};
    const std::vector<Term> continents = {Term::america, Term::africa, Term::asia, Term::oceania};
    const std::vector<Term> controls = {Term::christmas, Term::log10_authors, Term::log10_hdi, Term::log10_lto};
    if (number < 1 || number > 9) throw LinmodError("model number must be 1..9");
    ModelSpec s;
    s.id = "M" + std::to_string(number);
    s.method = method;
    s.terms.push_back(Term::intercept);
    auto add = [&](const std::vector<Term>& v) { s.terms.insert(s.terms.end(), v.begin(), v.end()); };
    if (number == 1) add(days);
    if (number == 2) add(seasons);
    if (number == 3) add(continents);
    if (number >= 4) {
        add(days);
        add(seasons);
    }
    if (number >= 5) add(continents);
    for (int k = 6; k <= number; ++k) s.terms.push_back(controls[static_cast<std::size_t>(k - 6)]);
    return s;
}

std::vector<ModelSpec> parse_model_list(std::string_view text, Method method) {
    const auto t = to_lower(trim(text));
    auto number = [&](std::string_view tok) {
        auto s = trim(tok);
        if (!s.empty() && (s.front() == 'm' || s.front() == 'M')) s.remove_prefix(1);
        return static_cast<int>(parse_int(s));
    };
    std::vector<int> ids;
    if (t == "all") {
        for (int i = 1; i <= 9; ++i) ids.push_back(i);
    } else {
        for (const auto& part : split(t, ',')) {
            if (trim(part).empty()) continue;
            if (auto dots = part.find(".."); dots != std::string::npos) {
                const int a = number(std::string_view(part).substr(0, dots));
                const int b = number(std::string_view(part).substr(dots + 2));
                if (a > b) throw LinmodError("empty model range '" + part + "'");
                for (int i = a; i <= b; ++i) ids.push_back(i);
            } else {
                ids.push_back(number(part));
            }
        }
    }
    if (ids.empty()) throw LinmodError("no models selected");
    std::vector<ModelSpec> out;
    std::set<int> seen;
    for (int i : ids)
        if (seen.insert(i).second) out.push_back(model(i, method));
    return out;
}

bool DesignMatrix::has_intercept() const {
    return std::find(columns.begin(), columns.end(), term_label(Term::intercept)) != columns.end();
}

std::optional<double> term_value(const rud::RudObservation& o, Term t) {
    const auto& f = o.features;
    auto b = [](bool v) { return v ? 1.0 : 0.0; };
    // A working day that is not Monday..Thursday joins the Friday reference.
    auto day = [&](int k) { return b(f.weekday == k && !f.is_weekend); };
    switch (t) {
        case Term::intercept: return 1.0;
        case Term::mon: return day(1);
        case Term::tue: return day(2);
        case Term::wed: return day(3);
        case Term::thu: return day(4);
        case Term::weekend: return b(f.is_weekend);
        case Term::spring: return b(f.season == Season::spring);
        case Term::summer: return b(f.season == Season::summer);
        case Term::fall: return b(f.season == Season::fall);
        case Term::america: return b(f.continent == Continent::america);
        case Term::africa: return b(f.continent == Continent::africa);
        case Term::asia: return b(f.continent == Continent::asia);
        case Term::oceania: return b(f.continent == Continent::oceania);
        case Term::christmas: return b(f.is_christmas);
        case Term::log10_authors: return f.log10_authors;
        case Term::log10_hdi: return f.log10_hdi;
        case Term::log10_lto: return f.log10_lto;
    }
    return std::nullopt;
}

void attach_transform(std::span<rud::RudObservation> obs, const diststat::TransformSpec& spec) {
    std::vector<double> r(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) r[i] = obs[i].rud;
    const auto t = diststat::apply_transform(std::span<const double>(r), spec);
    for (std::size_t i = 0; i < obs.size(); ++i) {
        obs[i].y_star = t.y_star[i];
        obs[i].y_star_star = t.y_star_star[i];
    }
}

void drop_degenerate_columns(DesignMatrix& d, double rel_tol) {
    const auto n = d.X.rows();
    const std::string intercept = term_label(Term::intercept);
    std::vector<Eigen::VectorXd> basis;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
        const Eigen::VectorXd c = d.X.col(j);
        const bool is_intercept = d.columns[static_cast<std::size_t>(j)] == intercept;
        const double norm = c.norm();
        bool degenerate = norm == 0.0;
        if (!degenerate && !is_intercept && n > 0) degenerate = c.maxCoeff() == c.minCoeff();
        if (!degenerate) {
            // Two Gram-Schmidt passes keep the residual accurate.
            Eigen::VectorXd r = c;
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& q : basis) r -= q.dot(r) * q;
            const double rn = r.norm();
            if (rn <= rel_tol * norm) {
                degenerate = true;
            } else {
                basis.push_back(r / rn);
            }
        }
        if (degenerate) {
            d.dropped_columns.push_back(d.columns[static_cast<std::size_t>(j)]);
        } else {
            keep.push_back(j);
        }
    }
    if (keep.size() == static_cast<std::size_t>(d.X.cols())) return;
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(keep.size()));
    std::vector<std::string> cols;
    for (std::size_t k = 0; k < keep.size(); ++k) {
        X.col(static_cast<Eigen::Index>(k)) = d.X.col(keep[k]);
        cols.push_back(d.columns[static_cast<std::size_t>(keep[k])]);
    }
    d.X = std::move(X);
    d.columns = std::move(cols);
}

DesignMatrix build_design(std::span<const rud::RudObservation> obs, const ModelSpec& spec) {
    if (obs.empty()) throw LinmodError(spec.id + ": no observations");
    if (spec.terms.empty()) throw LinmodError(spec.id + ": no terms");
    std::vector<std::size_t> rows;
    DesignMatrix d;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (!std::isfinite(obs[i].y_star_star))
            throw LinmodError(spec.id + ": y** not set for article " + std::to_string(obs[i].article_id));
        bool complete = true;
        for (Term t : spec.terms) complete = complete && term_value(obs[i], t).has_value();
        if (complete) {
            rows.push_back(i);
        } else {
            ++d.listwise_dropped;
        }
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(spec.terms.size());
    d.y.resize(n);
    d.X.resize(n, p);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& o = obs[rows[static_cast<std::size_t>(r)]];
        d.y(r) = o.y_star_star;
        d.row_ids.push_back(o.article_id);
        for (Eigen::Index j = 0; j < p; ++j) d.X(r, j) = *term_value(o, spec.terms[static_cast<std::size_t>(j)]);
    }
    for (Term t : spec.terms) d.columns.push_back(term_label(t));
    drop_degenerate_columns(d);
    if (d.n() <= d.p())
        throw LinmodError(spec.id + ": " + std::to_string(d.n()) + " observations for " + std::to_string(d.p()) +
                          " columns");
    return d;
}

int stars_for(double p) {
    if (!(p == p)) return 0;
    if (p <= 0.01) return 3;
    if (p <= 0.05) return 2;
    if (p <= 0.10) return 1;
    return 0;
}

std::string star_text(int stars) { return std::string(static_cast<std::size_t>(std::max(0, stars)), '*'); }

const Coefficient* FitResult::find(std::string_view label) const {
    for (const auto& c : coefficients)
        if (c.label == label) return &c;
    return nullptr;
}

namespace {

struct Fstat {
    double f = kNaN;
    double p = kNaN;
};

Fstat overall_f(double r2, std::size_t n, std::size_t p, bool intercept) {
    Fstat out;
    const double df1 = static_cast<double>(intercept ? p - 1 : p);
    const double df2 = static_cast<double>(n) - static_cast<double>(p);
    if (df1 <= 0 || df2 <= 0 || !(r2 == r2)) return out;
    if (r2 >= 1.0) {
        out.f = kInf;
        out.p = 0.0;
        return out;
    }
    out.f = (r2 / df1) / ((1.0 - r2) / df2);
    out.p = boost::math::cdf(boost::math::complement(boost::math::fisher_f(df1, df2), std::max(0.0, out.f)));
    return out;
}

double adjusted(double r2, std::size_t n, std::size_t p, bool intercept) {
    const double dn = static_cast<double>(n), dp = static_cast<double>(p);
    if (dn <= dp || !(r2 == r2)) return kNaN;
    return 1.0 - (1.0 - r2) * (intercept ? (dn - 1.0) : dn) / (dn - dp);
}

// Labels of the columns that lie in the span of earlier ones.
std::string dependent_columns(const DesignMatrix& d) {
    DesignMatrix copy = d;
    copy.dropped_columns.clear();
    drop_degenerate_columns(copy);
    std::string out;
    for (const auto& c : copy.dropped_columns) out += (out.empty() ? "" : ", ") + c;
    return out.empty() ? "(numerically)" : out;
}

// (X'X)^-1 from the R factor of a full-rank X.
Eigen::MatrixXd xtx_inverse(const Eigen::HouseholderQR<Eigen::MatrixXd>& qr, Eigen::Index p) {
    const Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    return Rinv * Rinv.transpose();
}

void require_full_rank(const DesignMatrix& d) {
    if (d.X.rows() < d.X.cols())
        throw LinmodError("fewer observations (" + std::to_string(d.n()) + ") than columns (" +
                          std::to_string(d.p()) + ")");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> piv(d.X);
    piv.setThreshold(1e-10);
    if (piv.rank() < d.X.cols()) throw LinmodError("rank-deficient design; dependent columns: " + dependent_columns(d));
}

double centered_ss(const Eigen::VectorXd& y) { return (y.array() - y.mean()).square().sum(); }

// Centred R2 of y regressed on X (which includes a constant column).
double aux_r2(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
    const double sst = centered_ss(y);
    if (sst <= 1e-20 * y.squaredNorm()) return 0.0;  // constant up to rounding
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::VectorXd r = y - X * qr.solve(y);
    return std::clamp(1.0 - r.squaredNorm() / sst, 0.0, 1.0);
}

}  // namespace

FitResult ols_fit(const DesignMatrix& d) {
    require_full_rank(d);
    const auto n = d.X.rows(), p = d.X.cols();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(d.X);
    FitResult f;
    f.method = Method::ols;
    f.n = d.n();
    f.p = d.p();
    f.dropped_columns = d.dropped_columns;
    f.listwise_dropped = d.listwise_dropped;
    f.beta = qr.solve(d.y);
    f.residuals = d.y - d.X * f.beta;
    const bool intercept = d.has_intercept();
    const double sse = f.residuals.squaredNorm();
    const double sst = intercept ? centered_ss(d.y) : d.y.squaredNorm();
    f.r2 = sst > 0.0 ? 1.0 - sse / sst : kNaN;
    f.adjusted_r2 = adjusted(f.r2, f.n, f.p, intercept);
    const auto F = overall_f(f.r2, f.n, f.p, intercept);
    f.f_stat = F.f;
    f.f_p_value = F.p;
    f.f_significant = F.p < 0.01;
    const auto df = n - p;
    if (df > 0) {
        f.scale = std::sqrt(sse / static_cast<double>(df));
        f.covariance = f.scale * f.scale * xtx_inverse(qr, p);
    } else {
        f.covariance = Eigen::MatrixXd::Constant(p, p, kNaN);
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        Coefficient c;
        c.label = d.columns[static_cast<std::size_t>(j)];
        c.estimate = f.beta(j);
        const double var = f.covariance(j, j);
        if (var == var && var >= 0.0) {
            c.se = std::sqrt(var);
            c.t = c.se > 0.0 ? c.estimate / c.se : (c.estimate == 0.0 ? 0.0 : std::copysign(kInf, c.estimate));
            const boost::math::students_t dist(static_cast<double>(df));
            c.p_value = std::isfinite(c.t) ? 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(c.t)))
                                           : (c.estimate == 0.0 ? 1.0 : 0.0);
            c.stars = stars_for(c.p_value);
        }
        f.coefficients.push_back(std::move(c));
    }
    return f;
}

double bisquare_weight(double u, double c) {
    const double a = std::abs(u);
    if (!(a < c)) return 0.0;
    const double z = u / c;
    const double t = 1.0 - z * z;
    return t * t;
}

namespace {

double median(std::vector<double> v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

double mad_scale(const Eigen::VectorXd& r) {
    std::vector<double> v(r.data(), r.data() + r.size());
    const double m = median(v);
    for (auto& x : v) x = std::abs(x - m);
    return median(std::move(v)) / 0.6745;
}

Eigen::VectorXd weighted_solve(const DesignMatrix& d, const Eigen::VectorXd& w) {
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const Eigen::MatrixXd Xw = sw.asDiagonal() * d.X;
    const Eigen::VectorXd yw = sw.cwiseProduct(d.y);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> piv(Xw);
    piv.setThreshold(1e-10);
    if (piv.rank() < Xw.cols()) throw LinmodError("weighted design lost rank: too few observations with positive weight");
    return Eigen::HouseholderQR<Eigen::MatrixXd>(Xw).solve(yw);
}

}  // namespace

FitResult rls_fit(const DesignMatrix& d, const RlsOptions& opt) {
    if (!(opt.tuning > 0.0)) throw LinmodError("bisquare tuning constant must be positive");
    const FitResult ols = ols_fit(d);
    const auto n = d.X.rows(), p = d.X.cols();
    if (n <= p) throw LinmodError("robust fit needs more observations than columns");
    const double c = opt.tuning;
    const double tiny = 1e-14 * (1.0 + d.y.cwiseAbs().maxCoeff());

    FitResult f;
    f.method = Method::rls;
    f.n = d.n();
    f.p = d.p();
    f.dropped_columns = d.dropped_columns;
    f.listwise_dropped = d.listwise_dropped;
    f.converged = false;

    Eigen::VectorXd beta = ols.beta;
    Eigen::VectorXd r = ols.residuals;
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    double s = mad_scale(r);
    bool exact = false;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        f.iterations = it;
        if (s <= tiny) {
            // More than half the sample is fitted exactly; the bisquare limit keeps only those points.
            exact = true;
            f.converged = true;
            break;
        }
        for (Eigen::Index i = 0; i < n; ++i) w(i) = bisquare_weight(r(i) / s, c);
        if (w.maxCoeff() <= 0.0) throw LinmodError("all bisquare weights are zero");
        const Eigen::VectorXd next = weighted_solve(d, w);
        const double delta = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        r = d.y - d.X * beta;
        s = mad_scale(r);
        if (delta < opt.tolerance) {
            f.converged = true;
            break;
        }
    }
    if (!f.converged && opt.fallback_to_ols) {
        FitResult fb = ols;
        fb.converged = false;
        fb.ols_fallback = true;
        fb.iterations = f.iterations;
        return fb;
    }

    f.beta = beta;
    f.residuals = r;
    f.scale = s;
    if (exact) {
        for (Eigen::Index i = 0; i < n; ++i) w(i) = std::abs(r(i)) <= tiny ? 1.0 : 0.0;
    } else {
        for (Eigen::Index i = 0; i < n; ++i) w(i) = bisquare_weight(r(i) / s, c);
    }
    f.irls_weights = w;

    // Huber's correction for the M-estimator covariance.
    f.covariance = Eigen::MatrixXd::Constant(p, p, kNaN);
    if (!exact) {
        double sum_psi2 = 0.0, sum_dpsi = 0.0;
        std::vector<double> dpsi(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            const double u = r(i) / s;
            const double psi = u * bisquare_weight(u, c);
            const double z2 = (u / c) * (u / c);
            const double dp = std::abs(u) < c ? (1.0 - z2) * (1.0 - 5.0 * z2) : 0.0;
            dpsi[static_cast<std::size_t>(i)] = dp;
            sum_psi2 += psi * psi;
            sum_dpsi += dp;
        }
        const double dn = static_cast<double>(n), dpp = static_cast<double>(p);
        const double m = sum_dpsi / dn;
        if (m > 0.0) {
            double var_dpsi = 0.0;
            for (double v : dpsi) var_dpsi += (v - m) * (v - m);
            var_dpsi /= dn;
            const double K = 1.0 + dpp / dn * var_dpsi / (m * m);
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(d.X);
            f.covariance = K * K * (sum_psi2 / (dn - dpp)) / (m * m) * s * s * xtx_inverse(qr, p);
        }
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        Coefficient co;
        co.label = d.columns[static_cast<std::size_t>(j)];
        co.estimate = beta(j);
        const double var = f.covariance(j, j);
        if (var == var && var > 0.0) {
            co.se = std::sqrt(var);
            co.t = co.estimate / co.se;
            co.p_value = std::erfc(std::abs(co.t) / std::sqrt(2.0));
            co.stars = stars_for(co.p_value);
        }
        f.coefficients.push_back(std::move(co));
    }

    const bool intercept = d.has_intercept();
    const double sw = w.sum();
    const double ybar = intercept ? w.dot(d.y) / sw : 0.0;
    const double sse = w.dot(r.cwiseAbs2());
    const double sst = w.dot((d.y.array() - ybar).square().matrix());
    f.r2 = sst > 0.0 ? 1.0 - sse / sst : kNaN;
    f.adjusted_r2 = adjusted(f.r2, f.n, f.p, intercept);
    const auto F = overall_f(f.r2, f.n, f.p, intercept);
    f.f_stat = F.f;
    f.f_p_value = F.p;
    f.f_significant = F.p < 0.01;
    return f;
}

FitResult fit(const DesignMatrix& d, Method m, const RlsOptions& opt) {
    return m == Method::ols ? ols_fit(d) : rls_fit(d, opt);
}

std::vector<double> vif(const DesignMatrix& d) {
    const std::string intercept = term_label(Term::intercept);
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < d.X.cols(); ++j)
        if (d.columns[static_cast<std::size_t>(j)] != intercept) cols.push_back(j);
    if (cols.size() < 2) throw LinmodError("VIF needs at least two non-intercept columns");
    const auto n = d.X.rows();
    std::vector<double> out;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        Eigen::MatrixXd A(n, static_cast<Eigen::Index>(cols.size()));
        A.col(0).setOnes();
        Eigen::Index at = 1;
        for (std::size_t m = 0; m < cols.size(); ++m)
            if (m != k) A.col(at++) = d.X.col(cols[m]);
        const Eigen::VectorXd xj = d.X.col(cols[k]);
        const double sst = centered_ss(xj);
        if (sst <= 0.0) {
            out.push_back(kInf);
            continue;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        const double sse = (xj - A * qr.solve(xj)).squaredNorm();
        const double r2 = 1.0 - sse / sst;
        out.push_back(r2 >= 1.0 - 1e-12 ? kInf : 1.0 / (1.0 - r2));
    }
    return out;
}

namespace {

diststat::TestResult lm_test(const Eigen::VectorXd& e2, DesignMatrix aux, double alpha, std::size_t* dropped) {
    drop_degenerate_columns(aux);
    if (dropped) *dropped = aux.dropped_columns.size();
    diststat::TestResult t;
    t.alpha = alpha;
    t.df = static_cast<int>(aux.p()) - 1;
    const double r2 = aux_r2(e2, aux.X);
    t.statistic = static_cast<double>(e2.size()) * r2;
    if (t.df >= 1) {
        t.critical_value = diststat::chi_square_critical(t.df, alpha);
        t.p_value = diststat::chi_square_sf(t.statistic, t.df);
        t.reject_null = t.statistic > t.critical_value;
    }
    return t;
}

DesignMatrix with_intercept_first(const DesignMatrix& d) {
    const std::string intercept = term_label(Term::intercept);
    DesignMatrix a;
    std::vector<Eigen::Index> others;
    for (Eigen::Index j = 0; j < d.X.cols(); ++j)
        if (d.columns[static_cast<std::size_t>(j)] != intercept) others.push_back(j);
    a.X.resize(d.X.rows(), static_cast<Eigen::Index>(others.size()) + 1);
    a.X.col(0).setOnes();
    a.columns.push_back(intercept);
    for (std::size_t k = 0; k < others.size(); ++k) {
        a.X.col(static_cast<Eigen::Index>(k) + 1) = d.X.col(others[k]);
        a.columns.push_back(d.columns[static_cast<std::size_t>(others[k])]);
    }
    return a;
}

}  // namespace

diststat::TestResult breusch_pagan(const Eigen::VectorXd& residuals, const DesignMatrix& d, double alpha) {
    return lm_test(residuals.cwiseAbs2(), with_intercept_first(d), alpha, nullptr);
}

HeteroskedasticityTests heteroskedasticity_tests(const FitResult& fit, const DesignMatrix& d, double alpha) {
    HeteroskedasticityTests out;
    const Eigen::VectorXd e2 = fit.residuals.cwiseAbs2();
    const DesignMatrix base = with_intercept_first(d);
    out.breusch_pagan = lm_test(e2, base, alpha, nullptr);

    const auto q = base.X.cols() - 1;
    DesignMatrix white;
    const auto extra = q + q * (q + 1) / 2;
    white.X.resize(base.X.rows(), 1 + extra);
    white.X.leftCols(q + 1) = base.X;
    white.columns = base.columns;
    Eigen::Index at = q + 1;
    for (Eigen::Index i = 1; i <= q; ++i) {
        for (Eigen::Index j = i; j <= q; ++j) {
            white.X.col(at++) = base.X.col(i).cwiseProduct(base.X.col(j));
            white.columns.push_back(base.columns[static_cast<std::size_t>(i)] + "*" +
                                    base.columns[static_cast<std::size_t>(j)]);
        }
    }
    out.white = lm_test(e2, std::move(white), alpha, &out.white_dropped);
    return out;
}

Diagnostics diagnose(const FitResult& fit, const DesignMatrix& d) {
    Diagnostics out;
    const std::string intercept = term_label(Term::intercept);
    for (const auto& c : d.columns)
        if (c != intercept) out.columns.push_back(c);
    if (out.columns.size() >= 2) {
        out.vif = vif(d);
    } else {
        out.vif.assign(out.columns.size(), 1.0);
    }
    out.heteroskedasticity = heteroskedasticity_tests(fit, d);
    std::vector<double> r(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
    try {
        out.residual_jb = diststat::jarque_bera(diststat::moments(r));
    } catch (const diststat::DiststatError&) {
        out.residual_jb = diststat::jarque_bera(r.size(), 0.0, 0.0);
    }
    return out;
}

double bp_rejection_rate(const BpSimulation& sim, Execution ex) {
    if (sim.n < 3 || sim.replications == 0) throw LinmodError("simulation needs n >= 3 and replications >= 1");
    std::vector<unsigned char> reject(sim.replications, 0);
    for_each_index(sim.replications, ex, [&](std::size_t rep) {
        std::mt19937_64 rng(sim.seed * 0x9E3779B97F4A7C15ULL + rep);
        std::uniform_real_distribution<double> ux(1.0, 10.0);
        std::normal_distribution<double> nd(0.0, 1.0);
        DesignMatrix d;
        const auto n = static_cast<Eigen::Index>(sim.n);
        d.X.resize(n, 2);
        d.y.resize(n);
        d.columns = {term_label(Term::intercept), "x"};
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = ux(rng);
            const double sd = sim.heteroskedastic ? std::sqrt(x) : 1.0;
            d.X(i, 0) = 1.0;
            d.X(i, 1) = x;
            d.y(i) = 1.0 + 0.5 * x + sd * nd(rng);
        }
        const auto f = ols_fit(d);
        reject[rep] = breusch_pagan(f.residuals, d, sim.alpha).reject_null ? 1 : 0;
    });
    const auto hits = std::accumulate(reject.begin(), reject.end(), std::size_t{0});
    return static_cast<double>(hits) / static_cast<double>(sim.replications);
}

// ---------------------------------------------------------------------------
// roll windows

std::string YearWindow::label() const { return std::to_string(from) + "-" + std::to_string(to); }

std::vector<YearWindow> default_windows() {
    return {{2000, 2004}, {2005, 2007}, {2008, 2010}, {2011, 2013}, {2014, 2016}};
}

std::vector<YearWindow> parse_windows(std::string_view text) {
    const auto t = to_lower(trim(text));
    if (t == "default") return default_windows();
    if (t == "all") return {{1900, 2100}};
    std::vector<YearWindow> out;
    for (const auto& part : split(t, ',')) {
        if (trim(part).empty()) continue;
        const auto dash = part.find('-', 1);
        if (dash == std::string::npos) throw LinmodError("window '" + part + "' is not FROM-TO");
        YearWindow w{static_cast<int>(parse_int(std::string_view(part).substr(0, dash))),
                     static_cast<int>(parse_int(std::string_view(part).substr(dash + 1)))};
        if (w.from > w.to) throw LinmodError("window '" + part + "' is reversed");
        out.push_back(w);
    }
    if (out.empty()) throw LinmodError("no windows given");
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (out[i].from <= out[j].to && out[j].from <= out[i].to)
                throw LinmodError("windows " + out[i].label() + " and " + out[j].label() + " overlap");
    return out;
}

ModelColumn summarize(const FitResult& fit, const ModelSpec& spec) {
    ModelColumn col;
    col.model_id = spec.id;
    col.n = fit.n;
    col.status = fit.ols_fallback ? "ols-fallback"
                 : fit.method == Method::ols ? "ols"
                 : fit.converged             ? "rls"
                                             : "rls-nonconverged";
    for (Term t : kAllTerms) {
        ReportCell cell;
        const auto label = term_label(t);
        const bool used = std::find(spec.terms.begin(), spec.terms.end(), t) != spec.terms.end();
        if (!used) {
            cell.kind = CellKind::absent;
        } else if (const auto* c = fit.find(label)) {
            cell.value = c->estimate;
            if (c->se_available()) {
                cell.kind = CellKind::estimate;
                cell.stars = c->stars;
            } else {
                cell.kind = CellKind::no_se;
            }
        } else {
            cell.kind = CellKind::dropped;
        }
        col.cells.push_back(cell);
    }
    col.adjusted_r2.value = fit.adjusted_r2;
    col.adjusted_r2.kind = std::isfinite(fit.adjusted_r2) && std::isfinite(fit.f_p_value) ? CellKind::estimate
                                                                                          : CellKind::no_se;
    col.adjusted_r2.stars = stars_for(fit.f_p_value);
    return col;
}

RollReport roll_window_run(std::span<const ScopeData> scopes, std::span<const YearWindow> windows,
                           std::span<const ModelSpec> specs, const RlsOptions& opt, Execution ex) {
    for (std::size_t i = 0; i < windows.size(); ++i)
        for (std::size_t j = i + 1; j < windows.size(); ++j)
            if (windows[i].from <= windows[j].to && windows[j].from <= windows[i].to)
                throw LinmodError("windows " + windows[i].label() + " and " + windows[j].label() + " overlap");
    RollReport report;
    std::vector<std::vector<rud::RudObservation>> subsets;
    for (const auto& s : scopes) {
        for (const auto& w : windows) {
            ReportBlock b;
            b.scope = s.label;
            b.window = w;
            b.models.resize(specs.size());
            report.blocks.push_back(std::move(b));
            std::vector<rud::RudObservation> sub;
            for (const auto& o : s.observations)
                if (w.contains(o.year)) sub.push_back(o);
            subsets.push_back(std::move(sub));
        }
    }
    const std::size_t jobs = report.blocks.size() * specs.size();
    for_each_index(jobs, ex, [&](std::size_t job) {
        const std::size_t b = job / specs.size(), m = job % specs.size();
        const auto& spec = specs[m];
        auto& col = report.blocks[b].models[m];
        col.model_id = spec.id;
        col.cells.assign(std::size(kAllTerms), ReportCell{});
        if (subsets[b].empty()) {
            col.status = "empty";
            col.adjusted_r2.kind = CellKind::absent;
            return;
        }
        try {
            const auto d = build_design(subsets[b], spec);
            col = summarize(fit(d, spec.method, opt), spec);
        } catch (const std::exception&) {
            col.status = "failed";
            col.n = subsets[b].size();
            for (std::size_t k = 0; k < std::size(kAllTerms); ++k)
                if (std::find(spec.terms.begin(), spec.terms.end(), kAllTerms[k]) != spec.terms.end())
                    col.cells[k].kind = CellKind::failed;
            col.adjusted_r2.kind = CellKind::failed;
        }
    });
    return report;
}

std::string format_cell(const ReportCell& c) {
    switch (c.kind) {
        case CellKind::absent: return "";
        case CellKind::dropped: return "N.A.";
        case CellKind::failed: return "ERR";
        case CellKind::no_se: return std::isfinite(c.value) ? format_double(c.value) + "?" : "?";
        case CellKind::estimate: return format_double(c.value) + star_text(c.stars);
    }
    return "";
}

ReportCell parse_cell(std::string_view text) {
    auto t = trim(text);
    ReportCell c;
    if (t.empty()) return c;
    if (t == "N.A.") {
        c.kind = CellKind::dropped;
        return c;
    }
    if (t == "ERR") {
        c.kind = CellKind::failed;
        return c;
    }
    if (t.back() == '?') {
        c.kind = CellKind::no_se;
        t.remove_suffix(1);
        c.value = t.empty() ? kNaN : parse_double(t);
        return c;
    }
    while (!t.empty() && t.back() == '*') {
        ++c.stars;
        t.remove_suffix(1);
    }
    if (c.stars > 3) throw LinmodError("more than three stars in '" + std::string(text) + "'");
    c.kind = CellKind::estimate;
    c.value = parse_double(t);
    return c;
}

namespace {

constexpr std::string_view kRowR2 = "Adjusted R2";
constexpr std::string_view kRowN = "n";
constexpr std::string_view kRowStatus = "status";

}  // namespace

void write_report_csv(std::ostream& os, const RollReport& report) {
    std::vector<std::string> header = {"scope", "window", "row"};
    if (!report.blocks.empty())
        for (const auto& m : report.blocks.front().models) header.push_back(m.model_id);
    csv::write_row(os, header);
    for (const auto& b : report.blocks) {
        if (b.models.size() + 3 != header.size()) throw LinmodError("report blocks disagree on model columns");
        auto row = [&](std::string_view label, auto cell_text) {
            std::vector<std::string> f = {b.scope, b.window.label(), std::string(label)};
            for (const auto& m : b.models) f.push_back(cell_text(m));
            csv::write_row(os, f);
        };
        for (std::size_t k = 0; k < std::size(kAllTerms); ++k) {
            const bool any = std::any_of(b.models.begin(), b.models.end(), [&](const ModelColumn& m) {
                return k < m.cells.size() && m.cells[k].kind != CellKind::absent;
            });
            if (!any) continue;
            row(term_label(kAllTerms[k]), [&](const ModelColumn& m) { return format_cell(m.cells[k]); });
        }
        row(kRowR2, [](const ModelColumn& m) { return format_cell(m.adjusted_r2); });
        row(kRowN, [](const ModelColumn& m) { return std::to_string(m.n); });
        row(kRowStatus, [](const ModelColumn& m) { return m.status; });
    }
}

RollReport parse_report_csv(std::string_view text) {
    const auto table = csv::parse(text);
    if (table.header.size() < 4 || table.header[0] != "scope" || table.header[1] != "window" ||
        table.header[2] != "row")
        throw LinmodError("report header must start with scope,window,row");
    const std::size_t models = table.header.size() - 3;
    RollReport report;
    for (const auto& f : table.rows) {
        if (f.size() != table.header.size()) throw LinmodError("ragged report row");
        const auto windows = parse_windows(f[1]);
        if (report.blocks.empty() || report.blocks.back().scope != f[0] ||
            report.blocks.back().window.label() != windows.front().label()) {
            ReportBlock b;
            b.scope = f[0];
            b.window = windows.front();
            for (std::size_t m = 0; m < models; ++m) {
                ModelColumn col;
                col.model_id = table.header[m + 3];
                col.cells.assign(std::size(kAllTerms), ReportCell{});
                b.models.push_back(std::move(col));
            }
            report.blocks.push_back(std::move(b));
        }
        auto& b = report.blocks.back();
        for (std::size_t m = 0; m < models; ++m) {
            auto& col = b.models[m];
            const auto& v = f[m + 3];
            if (f[2] == kRowR2) {
                col.adjusted_r2 = parse_cell(v);
            } else if (f[2] == kRowN) {
                col.n = static_cast<std::size_t>(parse_int(v));
            } else if (f[2] == kRowStatus) {
                col.status = v;
            } else {
                const Term t = parse_term(f[2]);
                const auto k = static_cast<std::size_t>(std::find(std::begin(kAllTerms), std::end(kAllTerms), t) -
                                                        std::begin(kAllTerms));
                col.cells[k] = parse_cell(v);
            }
        }
    }
    return report;
}

}  // namespace dwe::linmod
