// Serial reference against the OpenMP path of each parallel kernel.
// Argument 0 runs serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "dwe/corpus.hpp"
#include "dwe/diststat.hpp"
#include "dwe/geo.hpp"
#include "dwe/linmod.hpp"
#include "dwe/panel.hpp"
#include "dwe/rud.hpp"

namespace c = dwe::corpus;
namespace d = dwe::diststat;
namespace g = dwe::geo;
namespace l = dwe::linmod;
namespace pn = dwe::panel;
namespace r = dwe::rud;
using dwe::Date;

namespace {

dwe::Execution exec_of(const benchmark::State& s) {
    return s.range(0) == 0 ? dwe::Execution::serial : dwe::Execution::parallel;
}

const char* kCountries =
    "iso=US continent=america hdi=0.920 lto=26\n"
    "iso=CA continent=america hdi=0.920 lto=36\n"
    "iso=BR continent=america hdi=0.754 lto=44\n"
    "iso=GB continent=europe hdi=0.909 lto=51\n"
    "iso=DE continent=europe hdi=0.926 lto=83\n"
    "iso=FR continent=europe hdi=0.897 lto=63\n"
    "iso=IT continent=europe hdi=0.887 lto=61\n"
    "iso=ES continent=europe hdi=0.884 lto=48\n"
    "iso=RO continent=europe hdi=0.802 lto=52\n"
    "iso=CN continent=asia hdi=0.738 lto=87\n"
    "iso=JP continent=asia hdi=0.903 lto=88\n"
    "iso=SA continent=asia hdi=0.847 lto=36 swc=yes from=1900-01-01 days=4,5 from=2013-06-29 days=5,6\n";

const c::CountryTable& countries() {
    static const auto t = c::parse_countries_cfg(kCountries);
    return t;
}

// Weekend-thinned submissions, 2000-2016, RUD and y** attached.
const std::vector<r::RudObservation>& observations() {
    static const auto obs = [] {
        std::mt19937_64 rng(11);
        const auto codes = countries().codes();
        std::uniform_int_distribution<int> day(0, 6208);
        std::uniform_int_distribution<std::size_t> who(0, codes.size() - 1);
        std::uniform_int_distribution<int> authors(1, 9);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<c::CorpusRow> rows;
        while (rows.size() < 60000) {
            const Date dt = Date(2000, 1, 1).plus_days(day(rng));
            if (dt.iso_weekday() >= 6 && u(rng) > 0.4) continue;
            c::CorpusRow row;
            row.id = static_cast<long long>(rows.size() + 1);
            row.journal = 1 + static_cast<int>(rows.size() % 3);
            row.received = dt;
            row.author_count = authors(rng);
            row.country = codes[who(rng)];
            rows.push_back(row);
        }
        auto out = r::build_rud_dataset(c::clean_corpus(rows, countries()), r::ScopeMode::consolidated);
        std::vector<double> ruds;
        for (const auto& o : out) ruds.push_back(o.rud);
        l::attach_transform(out, d::fit_transform_spec(ruds).spec);
        return out;
    }();
    return obs;
}

void BM_jb_over_power_grid(benchmark::State& state) {
    std::vector<double> log1p;
    for (const auto& o : observations()) log1p.push_back(std::log1p(o.rud));
    const auto lambdas = d::TransformGrid{}.lambda1.values();
    for (auto _ : state)
        benchmark::DoNotOptimize(d::jb_over_power_grid(log1p, lambdas, d::Estimator::adjusted, exec_of(state)));
}
BENCHMARK(BM_jb_over_power_grid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_fit_transform_spec(benchmark::State& state) {
    std::vector<double> ruds;
    for (const auto& o : observations()) ruds.push_back(o.rud);
    ruds.resize(10000);
    for (auto _ : state) benchmark::DoNotOptimize(d::fit_transform_spec(ruds, {}, exec_of(state)));
}
BENCHMARK(BM_fit_transform_spec)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_roll_window_run(benchmark::State& state) {
    const std::vector<l::ScopeData> scopes = {{"consolidated", observations()}};
    const auto windows = l::default_windows();
    const auto specs = l::parse_model_list("M1..M9", l::Method::rls);
    for (auto _ : state) benchmark::DoNotOptimize(l::roll_window_run(scopes, windows, specs, {}, exec_of(state)));
}
BENCHMARK(BM_roll_window_run)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_bp_rejection_rate(benchmark::State& state) {
    const l::BpSimulation sim{.n = 1000, .replications = 200, .seed = 3};
    for (auto _ : state) benchmark::DoNotOptimize(l::bp_rejection_rate(sim, exec_of(state)));
}
BENCHMARK(BM_bp_rejection_rate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_localization_quotient(benchmark::State& state) {
    static const auto corpus = [] {
        std::vector<c::Article> arts;
        for (const auto& o : observations()) {
            c::Article a;
            a.record.id = o.article_id;
            a.record.country = o.country;
            a.record.journal = o.journal;
            a.record.received = o.received;
            a.features = o.features;
            arts.push_back(a);
        }
        return arts;
    }();
    const auto sel = g::SelectionExpr::parse("weekday in 2,3,4");
    for (auto _ : state) benchmark::DoNotOptimize(g::localization_quotient(corpus, sel, exec_of(state)));
}
BENCHMARK(BM_localization_quotient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_build_panel(benchmark::State& state) {
    pn::PanelOptions opt;
    opt.top_n = 11;
    for (auto _ : state) benchmark::DoNotOptimize(pn::build_panel(observations(), countries(), opt, exec_of(state)));
}
BENCHMARK(BM_build_panel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
