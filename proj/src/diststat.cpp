#include "dwe/diststat.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "dwe/text.hpp"

namespace dwe::diststat {

namespace {

// Returns false instead of throwing; used inside grid searches.
bool try_moments(std::span<const double> x, Estimator est, MomentSummary& out) {
    const std::size_t n = x.size();
    if (n < 4) return false;
    double sum = 0.0;
    for (double v : x) {
        if (!std::isfinite(v)) return false;
        sum += v;
    }
    const double mean = sum / static_cast<double>(n);
    double s2 = 0.0, s3 = 0.0, s4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    if (!(s2 > 0.0) || !std::isfinite(s4)) return false;
    const double nn = static_cast<double>(n);
    const double m2 = s2 / nn;
    const double g1 = (s3 / nn) / std::pow(m2, 1.5);
    out.n = n;
    out.mean = mean;
    out.variance = s2 / (nn - 1.0);
    if (est == Estimator::adjusted) {
        out.skewness = g1 * std::sqrt(nn * (nn - 1.0)) / (nn - 2.0);
        const double v = out.variance;
        out.excess_kurtosis = nn * (nn + 1.0) / ((nn - 1.0) * (nn - 2.0) * (nn - 3.0)) * s4 / (v * v) -
                              3.0 * (nn - 1.0) * (nn - 1.0) / ((nn - 2.0) * (nn - 3.0));
    } else {
        out.skewness = g1;
        out.excess_kurtosis = (s4 / nn) / (m2 * m2) - 3.0;
    }
    return std::isfinite(out.skewness) && std::isfinite(out.excess_kurtosis);
}

double jb_value(std::size_t n, double s, double k) {
    return static_cast<double>(n) * (s * s / 6.0 + k * k / 24.0);
}

}  // namespace

MomentSummary moments(std::span<const double> sample, Estimator est) {
    if (sample.size() < 4) throw DiststatError("moments need at least 4 observations");
    for (double v : sample)
        if (!std::isfinite(v)) throw DiststatError("non-finite value in sample");
    MomentSummary m;
    if (!try_moments(sample, est, m)) throw DiststatError("sample has zero variance");
    return m;
}

double chi_square_critical(int df, double alpha) {
    if (df < 1) throw DiststatError("chi-square needs df >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DiststatError("alpha must lie in (0, 1)");
    if (std::abs(alpha - 0.05) < 1e-12) {
        if (df == 2) return 5.99;
        if (df == 4) return 9.49;
        if (df == 6) return 12.59;
    }
    return boost::math::quantile(boost::math::complement(boost::math::chi_squared(df), alpha));
}

double chi_square_sf(double x, int df) {
    if (!(x > 0.0)) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

TestResult jarque_bera(std::size_t n, double skewness, double excess_kurtosis, double alpha) {
    TestResult r;
    r.statistic = jb_value(n, skewness, excess_kurtosis);
    r.df = 2;
    r.alpha = alpha;
    r.critical_value = chi_square_critical(2, alpha);
    r.reject_null = r.statistic > r.critical_value;
    r.p_value = chi_square_sf(r.statistic, 2);
    return r;
}

TestResult jarque_bera(const MomentSummary& m, double alpha) {
    return jarque_bera(m.n, m.skewness, m.excess_kurtosis, alpha);
}

TestResult chi_square_uniformity(std::span<const long long> counts, double alpha) {
    if (counts.size() < 2) throw DiststatError("uniformity test needs at least 2 cells");
    long long total = 0;
    for (auto c : counts) {
        if (c < 0) throw DiststatError("negative count");
        total += c;
    }
    if (total < 1) throw DiststatError("all counts are zero");
    const double m = static_cast<double>(counts.size());
    const double expected = static_cast<double>(total) / m;
    double stat = 0.0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    TestResult r;
    r.statistic = stat;
    r.df = static_cast<int>(counts.size()) - 1;
    r.alpha = alpha;
    r.critical_value = chi_square_critical(r.df, alpha);
    r.reject_null = r.statistic > r.critical_value;
    r.p_value = chi_square_sf(stat, r.df);
    return r;
}

// ---------------------------------------------------------------------------

double power_step(double y, double lambda) {
    if (!(y > -1.0)) throw TransformDomainError(0, y, "power step needs y + 1 > 0");
    const double l = std::log1p(y);
    return lambda == 0.0 ? l : std::expm1(lambda * l) / lambda;
}

double apply_step1(double rud, const TransformSpec& spec) {
    if (!(rud > 0.0)) throw TransformDomainError(0, rud, "RUD must be positive");
    if (spec.step1 == Step1Kind::log10_shift) return std::log10(rud) + spec.step1_param;
    const double l = std::log(rud);
    return spec.step1_param == 0.0 ? l : std::expm1(spec.step1_param * l) / spec.step1_param;
}

double apply_step2(double y_star, const TransformSpec& spec) { return power_step(y_star, spec.lambda2); }

double apply_transform(double rud, const TransformSpec& spec) { return apply_step2(apply_step1(rud, spec), spec); }

Transformed apply_transform(std::span<const double> rud, const TransformSpec& spec) {
    Transformed t;
    t.y_star.reserve(rud.size());
    t.y_star_star.reserve(rud.size());
    for (std::size_t i = 0; i < rud.size(); ++i) {
        try {
            const double ys = apply_step1(rud[i], spec);
            t.y_star.push_back(ys);
            t.y_star_star.push_back(apply_step2(ys, spec));
        } catch (const TransformDomainError& e) {
            throw TransformDomainError(i, rud[i], e.reason());
        }
    }
    return t;
}

std::vector<double> GridRange::values() const {
    if (!(step > 0.0) || hi < lo) throw DiststatError("invalid grid range");
    const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    const double k0 = lo / step;
    const bool aligned = std::abs(k0 - std::round(k0)) < 1e-9;
    // k / (1 / step) rounds correctly where k * step does not (19 * 0.05).
    const double inv = 1.0 / step;
    const bool integral_inv = std::abs(inv - std::round(inv)) < 1e-9;
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) {
        if (!aligned) {
            v.push_back(lo + static_cast<double>(i) * step);
            continue;
        }
        const double k = std::round(k0) + static_cast<double>(i);
        v.push_back(integral_inv ? k / std::round(inv) : k * step);
    }
    return v;
}

std::vector<double> jb_over_power_grid(std::span<const double> log1p_y, std::span<const double> lambdas,
                                       Estimator est, Execution ex) {
    std::vector<double> out(lambdas.size(), std::numeric_limits<double>::quiet_NaN());
    for_each_index(lambdas.size(), ex, [&](std::size_t j) {
        thread_local std::vector<double> buf;
        buf.resize(log1p_y.size());
        const double lam = lambdas[j];
        if (lam == 0.0) {
            std::copy(log1p_y.begin(), log1p_y.end(), buf.begin());
        } else {
            for (std::size_t i = 0; i < log1p_y.size(); ++i) buf[i] = std::expm1(lam * log1p_y[i]) / lam;
        }
        MomentSummary m;
        if (try_moments(buf, est, m)) out[j] = jb_value(m.n, m.skewness, m.excess_kurtosis);
    });
    return out;
}

namespace {

struct Best {
    double cost = std::numeric_limits<double>::infinity();
    double tie1 = 0.0;
    double tie2 = 0.0;
    bool found = false;

    // Strictly lower cost wins; equal cost falls to the tie keys.
    bool offer(double c, double t1, double t2) {
        if (std::isnan(c)) return false;
        if (!found || c < cost || (c == cost && (t1 < tie1 || (t1 == tie1 && t2 < tie2)))) {
            cost = c;
            tie1 = t1;
            tie2 = t2;
            found = true;
            return true;
        }
        return false;
    }
};

struct FamilyResult {
    bool feasible = false;
    TransformSpec spec;
    double jb = 0.0;
    double skew = 0.0;
};

FamilyResult fit_log10(std::span<const double> rud, const TransformGrid& g, Execution ex) {
    FamilyResult r;
    std::vector<double> z(rud.size());
    for (std::size_t i = 0; i < rud.size(); ++i) z[i] = std::log10(rud[i]);
    MomentSummary mz;
    if (!try_moments(z, g.estimator, mz)) return r;
    const double zmin = *std::min_element(z.begin(), z.end());
    const auto shifts = g.shift.values();
    const auto lambdas = g.lambda2.values();
    Best best;
    std::vector<double> L(z.size());
    for (double c : shifts) {
        if (!(zmin + c > -1.0)) continue;
        for (std::size_t i = 0; i < z.size(); ++i) L[i] = std::log1p(z[i] + c);
        const auto jb = jb_over_power_grid(L, lambdas, g.estimator, ex);
        for (std::size_t j = 0; j < lambdas.size(); ++j) {
            if (best.offer(jb[j], std::abs(lambdas[j]), std::abs(c))) {
                r.spec = {Step1Kind::log10_shift, c, lambdas[j]};
            }
        }
    }
    if (!best.found) return r;
    r.feasible = true;
    r.jb = best.cost;
    r.skew = mz.skewness;
    return r;
}

FamilyResult fit_power(std::span<const double> rud, const TransformGrid& g, Execution ex) {
    FamilyResult r;
    const auto l1 = g.lambda1.values();
    std::vector<double> lnr(rud.size());
    for (std::size_t i = 0; i < rud.size(); ++i) lnr[i] = std::log(rud[i]);
    std::vector<double> skew(l1.size(), std::numeric_limits<double>::quiet_NaN());
    for_each_index(l1.size(), ex, [&](std::size_t j) {
        thread_local std::vector<double> buf;
        buf.resize(lnr.size());
        const double lam = l1[j];
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < lnr.size(); ++i) {
            buf[i] = lam == 0.0 ? lnr[i] : std::expm1(lam * lnr[i]) / lam;
            lo = std::min(lo, buf[i]);
        }
        MomentSummary m;
        if (lo > -1.0 && try_moments(buf, g.estimator, m)) skew[j] = m.skewness;
    });
    Best stage1;
    double lambda1 = 0.0;
    for (std::size_t j = 0; j < l1.size(); ++j)
        if (!std::isnan(skew[j]) && stage1.offer(std::abs(skew[j]), std::abs(l1[j]), 0.0)) lambda1 = l1[j];
    if (!stage1.found) return r;

    const TransformSpec step1{Step1Kind::power, lambda1, 1.0};
    std::vector<double> L(rud.size());
    for (std::size_t i = 0; i < rud.size(); ++i) L[i] = std::log1p(apply_step1(rud[i], step1));
    const auto lambdas = g.lambda2.values();
    const auto jb = jb_over_power_grid(L, lambdas, g.estimator, ex);
    Best stage2;
    for (std::size_t j = 0; j < lambdas.size(); ++j)
        if (stage2.offer(jb[j], std::abs(lambdas[j]), 0.0)) r.spec = {Step1Kind::power, lambda1, lambdas[j]};
    if (!stage2.found) return r;
    r.feasible = true;
    r.jb = stage2.cost;
    r.skew = skew[static_cast<std::size_t>(std::find(l1.begin(), l1.end(), lambda1) - l1.begin())];
    return r;
}

}  // namespace

TransformFit fit_transform_spec(std::span<const double> rud, const TransformGrid& grid, Execution ex) {
    if (rud.size() < 4) throw DiststatError("transform fit needs at least 4 observations");
    for (std::size_t i = 0; i < rud.size(); ++i)
        if (!(rud[i] > 0.0) || !std::isfinite(rud[i])) throw TransformDomainError(i, rud[i], "RUD must be positive");

    const auto raw = moments(rud, grid.estimator);
    TransformFit fit;
    fit.raw_jb = jarque_bera(raw).statistic;

    const auto identity = apply_transform(rud, kIdentitySpec);
    MomentSummary mid;
    const bool identity_ok = try_moments(identity.y_star_star, grid.estimator, mid);

    const auto lg = fit_log10(rud, grid, ex);
    const auto pw = fit_power(rud, grid, ex);
    if (!lg.feasible && !pw.feasible && !identity_ok) throw DiststatError("no feasible transform on the grid");

    const FamilyResult* winner = nullptr;
    if (lg.feasible) winner = &lg;
    if (pw.feasible && (!winner || pw.jb < winner->jb)) winner = &pw;

    const double identity_jb = identity_ok ? jb_value(mid.n, mid.skewness, mid.excess_kurtosis)
                                           : std::numeric_limits<double>::infinity();
    if (winner && winner->jb < identity_jb) {
        fit.spec = winner->spec;
        fit.step1_skewness = winner->skew;
    } else {
        fit.spec = kIdentitySpec;
        fit.step1_skewness = moments(identity.y_star, grid.estimator).skewness;
    }
    const auto final_values = apply_transform(rud, fit.spec);
    fit.final_moments = moments(final_values.y_star_star, grid.estimator);
    fit.jb = jarque_bera(fit.final_moments).statistic;
    return fit;
}

// ---------------------------------------------------------------------------

void write_spec_cfg(std::ostream& os, const TransformSpec& spec) {
    os << "step1=" << (spec.step1 == Step1Kind::log10_shift ? "log10-shift" : "power") << '\n';
    os << "step1_param=" << format_double(spec.step1_param) << '\n';
    os << "lambda2=" << format_double(spec.lambda2) << '\n';
}

TransformSpec parse_spec_cfg(std::string_view text) {
    TransformSpec spec;
    bool have[3] = {false, false, false};
    for (const auto& raw : split(text, '\n')) {
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw DiststatError("spec.cfg: expected key=value, got '" + std::string(line) + "'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        try {
            if (key == "step1") {
                if (value == "log10-shift") spec.step1 = Step1Kind::log10_shift;
                else if (value == "power") spec.step1 = Step1Kind::power;
                else throw DiststatError("unknown step1 family '" + std::string(value) + "'");
                have[0] = true;
            } else if (key == "step1_param") {
                spec.step1_param = parse_double(value);
                have[1] = true;
            } else if (key == "lambda2") {
                spec.lambda2 = parse_double(value);
                have[2] = true;
            } else {
                throw DiststatError("unknown key '" + std::string(key) + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw DiststatError("spec.cfg: " + std::string(e.what()));
        }
    }
    if (!have[0] || !have[1] || !have[2]) throw DiststatError("spec.cfg needs step1, step1_param and lambda2");
    return spec;
}

TransformSpec read_spec_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DiststatError("cannot open spec file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_spec_cfg(ss.str());
}

std::string describe(const TransformSpec& spec) {
    std::string s = spec.step1 == Step1Kind::log10_shift ? "log10(RUD) + " + format_double(spec.step1_param)
                                                         : "power(" + format_double(spec.step1_param) + ") of RUD";
    return s + ", then power(" + format_double(spec.lambda2) + ")";
}

}  // namespace dwe::diststat
