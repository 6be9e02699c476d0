#include "dwe/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "dwe/corpus.hpp"
#include "dwe/csv.hpp"
#include "dwe/diststat.hpp"
#include "dwe/geo.hpp"
#include "dwe/text.hpp"

namespace dwe::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr Stage kAllStages[] = {Stage::harvest,   Stage::clean,   Stage::rud,   Stage::normality,
                                Stage::transform, Stage::regress, Stage::panel, Stage::lq};

const std::map<std::string, std::string>& default_files() {
    static const std::map<std::string, std::string> files = {
        {"harvested", "harvested_corpus.csv"}, {"rejected", "harvest_rejected.csv"},
        {"clean", "clean_corpus.csv"},         {"cleaning", "cleaning_report.csv"},
        {"rud", "rud.csv"},                    {"normality", "normality.csv"},
        {"transform", "transform.csv"},        {"spec", "spec.cfg"},
        {"regress", "regress.csv"},            {"diagnostics", "diagnostics.csv"},
        {"panel", "panelfit.csv"},             {"lq", "lq.csv"},
        {"geojson", "lq.geojson"}};
    return files;
}

bool parse_bool(std::string_view key, std::string_view v) {
    const auto t = to_lower(trim(v));
    if (t == "yes" || t == "true" || t == "1" || t == "on") return true;
    if (t == "no" || t == "false" || t == "0" || t == "off") return false;
    throw ConfigError("config key '" + std::string(key) + "': expected yes or no, got '" + std::string(v) + "'");
}

std::string resolve(const std::string& base, std::string_view p) {
    if (p.empty()) return {};
    fs::path path{std::string(p)};
    if (path.is_absolute()) return path.string();
    return (fs::path(base) / path).lexically_normal().string();
}

bool has_stage(const RunConfig& cfg, Stage s) {
    return std::find(cfg.stages.begin(), cfg.stages.end(), s) != cfg.stages.end();
}

bool needs_stage(const RunConfig& cfg, Stage s) {
    // Stage s is needed when it or something downstream of it is requested.
    auto after = [&](Stage x) {
        for (Stage r : cfg.stages)
            if (r >= x) return true;
        return false;
    };
    switch (s) {
        case Stage::harvest: return has_stage(cfg, Stage::harvest) || (!cfg.harvest_dir.empty() && cfg.corpus.empty() && after(Stage::clean));
        case Stage::clean: return after(Stage::clean);
        case Stage::rud: return has_stage(cfg, Stage::rud) || has_stage(cfg, Stage::normality) ||
                                has_stage(cfg, Stage::transform) || has_stage(cfg, Stage::regress) ||
                                has_stage(cfg, Stage::panel);
        case Stage::transform: return has_stage(cfg, Stage::transform) || has_stage(cfg, Stage::regress);
        default: return has_stage(cfg, s);
    }
}

void require_file(std::string_view key, const std::string& path) {
    if (path.empty()) throw ConfigError("config key '" + std::string(key) + "' is required by the requested stages");
    if (!fs::is_regular_file(path)) throw ConfigError("file not found for '" + std::string(key) + "': " + path);
}

class Writer {
public:
    Writer(const RunConfig& cfg, StageResult& result) : cfg_(cfg), result_(result) {}

    /// Writes a text report with the tag comment line first.
    void report(const std::string& artifact, const std::string& body, bool comment_tag = true) {
        const auto path = artifact_path(cfg_, artifact);
        if (path.empty()) return;  // artifact disabled
        if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path);
        if (comment_tag) out << "# " << report_tag(cfg_) << "\n";
        out << body;
        if (!out) throw std::runtime_error("write failed: " + path);
        result_.outputs.push_back(path);
    }

private:
    const RunConfig& cfg_;
    StageResult& result_;
};

std::string rejected_csv(const harvest::HarvestReport& r) {
    std::ostringstream os;
    csv::write_row(os, {"file", "reason"});
    for (const auto& [file, why] : r.rejected) csv::write_row(os, {file, why});
    return os.str();
}

std::string cleaning_csv(const corpus::CleaningReport& r) {
    std::ostringstream os;
    csv::write_row(os, {"item", "count"});
    csv::write_row(os, {"input", std::to_string(r.input)});
    csv::write_row(os, {"retained", std::to_string(r.retained)});
    for (const auto& [reason, n] : r.dropped) csv::write_row(os, {"dropped:" + reason, std::to_string(n)});
    return os.str();
}

struct ScopeTransform {
    std::string scope;
    diststat::TransformSpec spec;
    std::optional<diststat::TransformFit> fit;  // set when fitted
};

std::vector<ScopeTransform> scope_transforms(const RunConfig& cfg, std::span<const linmod::ScopeData> scopes) {
    std::vector<ScopeTransform> out;
    const auto mode = to_lower(trim(cfg.transform));
    std::optional<diststat::TransformSpec> fixed;
    if (mode == "identity") fixed = diststat::kIdentitySpec;
    else if (mode != "fit") fixed = diststat::read_spec_file(cfg.transform);
    for (const auto& s : scopes) {
        ScopeTransform t;
        t.scope = s.label;
        if (fixed) {
            t.spec = *fixed;
        } else {
            std::vector<double> rud;
            rud.reserve(s.observations.size());
            for (const auto& o : s.observations) rud.push_back(o.rud);
            t.fit = diststat::fit_transform_spec(rud);
            t.spec = t.fit->spec;
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::string transform_csv(std::span<const ScopeTransform> ts, std::span<const linmod::ScopeData> scopes) {
    std::ostringstream os;
    csv::write_row(os, {"scope", "n", "spec", "step1", "step1_param", "lambda2", "raw_jb", "jb", "skewness",
                        "excess_kurtosis"});
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto& t = ts[i];
        std::vector<double> rud;
        for (const auto& o : scopes[i].observations) rud.push_back(o.rud);
        const auto raw = diststat::jarque_bera(diststat::moments(rud));
        const auto tr = diststat::apply_transform(rud, t.spec);
        const auto m = diststat::moments(tr.y_star_star);
        const auto jb = diststat::jarque_bera(m);
        csv::write_row(os, {t.scope, std::to_string(rud.size()), diststat::describe(t.spec),
                            t.spec.step1 == diststat::Step1Kind::log10_shift ? "log10-shift" : "power",
                            format_double(t.spec.step1_param), format_double(t.spec.lambda2),
                            format_double(raw.statistic), format_double(jb.statistic), format_double(m.skewness),
                            format_double(m.excess_kurtosis)});
    }
    return os.str();
}

std::string diagnostics_csv(std::span<const linmod::ScopeData> scopes, std::span<const linmod::ModelSpec> specs,
                            const RunConfig& cfg) {
    std::ostringstream os;
    csv::write_row(os, {"scope", "model", "item", "value"});
    linmod::RlsOptions opt;
    opt.fallback_to_ols = cfg.fallback_ols;
    for (const auto& s : scopes)
        for (const auto& spec : specs) {
            auto row = [&](const std::string& item, const std::string& value) {
                csv::write_row(os, {s.label, spec.id, item, value});
            };
            try {
                const auto d = linmod::build_design(s.observations, spec);
                const auto f = linmod::fit(d, spec.method, opt);
                const auto diag = linmod::diagnose(f, d);
                for (std::size_t j = 0; j < diag.columns.size(); ++j)
                    row("vif:" + diag.columns[j], format_double(diag.vif[j]));
                const auto& h = diag.heteroskedasticity;
                row("breusch_pagan", format_double(h.breusch_pagan.statistic));
                row("breusch_pagan_df", std::to_string(h.breusch_pagan.df));
                row("breusch_pagan_reject", h.breusch_pagan.reject_null ? "yes" : "no");
                row("white", format_double(h.white.statistic));
                row("white_df", std::to_string(h.white.df));
                row("white_reject", h.white.reject_null ? "yes" : "no");
                row("white_dropped", std::to_string(h.white_dropped));
                row("residual_jb", format_double(diag.residual_jb.statistic));
            } catch (const std::exception& e) {
                row("error", e.what());
            }
        }
    linmod::BpSimulation sim;
    sim.seed = cfg.seed;
    sim.replications = 200;
    csv::write_row(os, {"", "", "bp_simulated_size_seed_" + std::to_string(cfg.seed),
                        format_double(linmod::bp_rejection_rate(sim))});
    return os.str();
}

std::string with_generator(const std::string& geojson, const std::string& tag) {
    auto j = nlohmann::ordered_json::parse(geojson);
    j["generator"] = tag;
    return j.dump(1) + "\n";
}

}  // namespace

std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::harvest: return "harvest";
        case Stage::clean: return "clean";
        case Stage::rud: return "rud";
        case Stage::normality: return "normality";
        case Stage::transform: return "transform";
        case Stage::regress: return "regress";
        case Stage::panel: return "panel";
        case Stage::lq: return "lq";
    }
    return "?";
}

Stage parse_stage(std::string_view name) {
    const auto t = to_lower(trim(name));
    for (Stage s : kAllStages)
        if (stage_name(s) == t) return s;
    throw ConfigError("unknown stage '" + std::string(name) + "'");
}

std::vector<Stage> parse_stage_list(std::string_view text) {
    const auto t = to_lower(trim(text));
    if (t.empty() || t == "none") return {};
    if (t == "all") return {std::begin(kAllStages), std::end(kAllStages)};
    std::vector<Stage> out;
    for (const auto& part : split(t, ',')) out.push_back(parse_stage(part));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

RunConfig parse_run_config(std::string_view text, const std::string& base_dir) {
    RunConfig cfg;
    cfg.hash = fnv1a_hex(text);
    std::map<std::string, std::string> seen;
    int line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        auto line = trim(raw);
        if (auto h = line.find('#'); h != std::string_view::npos) line = trim(line.substr(0, h));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = to_lower(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (seen.contains(key)) throw ConfigError("config key '" + key + "' given twice");
        seen[key] = value;
        try {
            if (key == "corpus") cfg.corpus = resolve(base_dir, value);
            else if (key == "countries") cfg.countries = resolve(base_dir, value);
            else if (key == "output_dir") cfg.output_dir = resolve(base_dir, value);
            else if (key == "harvest_dir") cfg.harvest_dir = resolve(base_dir, value);
            else if (key == "harvest_style") cfg.harvest_style = harvest::parse_style(value);
            else if (key == "harvest_journal") cfg.harvest_journal = static_cast<int>(parse_int(value));
            else if (key == "scope") cfg.scope = rud::parse_scope_mode(value);
            else if (key == "stages") cfg.stages = parse_stage_list(value);
            else if (key == "transform") {
                const auto t = to_lower(value);
                cfg.transform = (t == "fit" || t == "identity") ? t : resolve(base_dir, value);
            } else if (key == "models") {
                (void)linmod::parse_model_list(value);
                cfg.models = value;
            } else if (key == "method") cfg.method = linmod::parse_method(value);
            else if (key == "fallback_ols") cfg.fallback_ols = parse_bool(key, value);
            else if (key == "diagnostics") cfg.diagnostics = parse_bool(key, value);
            else if (key == "windows") {
                (void)linmod::parse_windows(value);
                cfg.windows = value;
            } else if (key == "panel_top") cfg.panel.top_n = static_cast<int>(parse_int(value));
            else if (key == "panel_from") cfg.panel.start = parse_iso_date(value);
            else if (key == "panel_to") cfg.panel.end = parse_iso_date(value);
            else if (key == "panel_weighted") {
                const auto t = to_lower(value);
                if (t == "wls") cfg.panel_weighting = panel::Weighting::wls;
                else cfg.panel_weighting = parse_bool(key, value) ? panel::Weighting::multiply : panel::Weighting::none;
            } else if (key == "panel_trend") {
                const auto t = to_lower(value);
                if (t == "log10") cfg.panel.trend_base = panel::TrendBase::log10;
                else if (t == "ln") cfg.panel.trend_base = panel::TrendBase::ln;
                else throw ConfigError("panel_trend must be log10 or ln");
            } else if (key == "lq_select") {
                (void)geo::SelectionExpr::parse(value);
                cfg.lq_select = value;
            } else if (key == "lq_classes") cfg.lq_classes = static_cast<int>(parse_int(value));
            else if (key == "lq_geometry") cfg.lq_geometry = resolve(base_dir, value);
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value));
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
    if (cfg.lq_classes < 1) throw ConfigError("lq_classes must be at least 1");
    if (cfg.panel.top_n < 1) throw ConfigError("panel_top must be at least 1");
    validate_inputs(cfg);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto base = fs::path(path).parent_path().string();
    if (base.empty()) base = ".";
    auto cfg = parse_run_config(ss.str(), base);
    if (const char* env = std::getenv("DWE_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    return cfg;
}

void validate_inputs(const RunConfig& cfg) {
    if (cfg.stages.empty()) return;
    if (needs_stage(cfg, Stage::harvest)) {
        if (cfg.harvest_dir.empty()) throw ConfigError("config key 'harvest_dir' is required by the harvest stage");
        if (!fs::is_directory(cfg.harvest_dir)) throw ConfigError("directory not found for 'harvest_dir': " + cfg.harvest_dir);
    }
    if (needs_stage(cfg, Stage::clean)) {
        if (!needs_stage(cfg, Stage::harvest)) require_file("corpus", cfg.corpus);
        require_file("countries", cfg.countries);
    }
    if (needs_stage(cfg, Stage::transform)) {
        if (cfg.transform != "fit" && cfg.transform != "identity") require_file("transform", cfg.transform);
    }
    if (has_stage(cfg, Stage::lq) && !cfg.lq_geometry.empty()) require_file("lq_geometry", cfg.lq_geometry);
}

std::string report_tag(const RunConfig& cfg) { return std::string("dwe ") + DWE_VERSION + " config=" + cfg.hash; }

std::string artifact_path(const RunConfig& cfg, const std::string& artifact) {
    if (auto it = cfg.output_paths.find(artifact); it != cfg.output_paths.end()) return it->second;
    const auto& files = default_files();
    auto it = files.find(artifact);
    if (it == files.end()) throw ConfigError("unknown artifact '" + artifact + "'");
    return (fs::path(cfg.output_dir) / it->second).string();
}

std::vector<linmod::ScopeData> split_scopes(std::span<const rud::RudObservation> obs) {
    std::map<int, std::vector<rud::RudObservation>> by_scope;
    for (const auto& o : obs) by_scope[o.scope].push_back(o);
    std::vector<linmod::ScopeData> out;
    for (auto& [scope, list] : by_scope) out.push_back({rud::scope_label(scope), std::move(list)});
    return out;
}

void write_normality_csv(std::ostream& os, std::span<const rud::RudObservation> obs) {
    csv::write_row(os, kNormalityColumns);
    for (const auto& s : split_scopes(obs)) {
        std::vector<double> rud;
        std::vector<long long> week(7, 0);
        for (const auto& o : s.observations) {
            rud.push_back(o.rud);
            ++week[static_cast<std::size_t>(o.weekday - 1)];
        }
        const std::vector<long long> work(week.begin(), week.begin() + 5);
        std::vector<std::string> row = {s.label, std::to_string(rud.size())};
        try {
            const auto m = diststat::moments(rud);
            const auto jb = diststat::jarque_bera(m);
            for (double v : {m.mean, m.variance, m.skewness, m.excess_kurtosis, jb.statistic})
                row.push_back(format_double(v));
            row.push_back(jb.reject_null ? "yes" : "no");
        } catch (const diststat::DiststatError&) {
            for (int i = 0; i < 6; ++i) row.push_back("?");
        }
        const auto c7 = diststat::chi_square_uniformity(week);
        row.push_back(format_double(c7.statistic));
        row.push_back(c7.reject_null ? "yes" : "no");
        long long wsum = 0;
        for (auto c : work) wsum += c;
        if (wsum > 0) {
            const auto c5 = diststat::chi_square_uniformity(work);
            row.push_back(format_double(c5.statistic));
            row.push_back(c5.reject_null ? "yes" : "no");
        } else {
            row.push_back("?");
            row.push_back("?");
        }
        csv::write_row(os, row);
    }
}

PipelineResult run_pipeline(const RunConfig& cfg, std::ostream& log) {
    PipelineResult result;
    if (cfg.stages.empty()) return result;
    validate_inputs(cfg);

    std::vector<corpus::CorpusRow> rows;
    corpus::Corpus clean;
    std::vector<rud::RudObservation> obs;
    std::vector<linmod::ScopeData> scopes;
    std::vector<ScopeTransform> transforms;

    auto run = [&](Stage stage, auto&& body) -> bool {
        if (!needs_stage(cfg, stage)) return true;
        StageResult r;
        r.stage = stage;
        Writer w(cfg, r);
        try {
            body(w, has_stage(cfg, stage));
            r.message = "ok";
        } catch (const std::exception& e) {
            r.ok = false;
            r.message = e.what();
        }
        log << stage_name(stage) << ": " << (r.ok ? "ok" : "FAILED: " + r.message) << "\n";
        const bool ok = r.ok;
        result.stages.push_back(std::move(r));
        if (!ok) {
            result.exit_code = 1;
            std::error_code ec;
            fs::create_directories(cfg.output_dir, ec);
            std::ofstream marker(fs::path(cfg.output_dir) / std::string(kFailedMarker), std::ios::binary);
            marker << "# " << report_tag(cfg) << "\n" << stage_name(stage) << ": " << result.stages.back().message
                   << "\n";
        }
        return ok;
    };

    const bool ok =
        run(Stage::harvest,
            [&](Writer& w, bool write) {
                const auto report = harvest::harvest_directory(cfg.harvest_dir, cfg.harvest_style, cfg.harvest_journal,
                                                               harvest::default_country_names());
                rows = report.rows;
                if (write) {
                    std::ostringstream os;
                    corpus::write_corpus_csv(os, rows);
                    w.report("harvested", os.str());
                    w.report("rejected", rejected_csv(report));
                }
            }) &&
        run(Stage::clean,
            [&](Writer& w, bool write) {
                if (!needs_stage(cfg, Stage::harvest)) rows = corpus::read_corpus_file(cfg.corpus);
                clean = corpus::clean_corpus(rows, corpus::load_countries_file(cfg.countries));
                if (write) {
                    std::ostringstream os;
                    corpus::write_corpus_csv(os, corpus::to_rows(clean));
                    w.report("clean", os.str());
                    w.report("cleaning", cleaning_csv(clean.cleaning_report));
                }
            }) &&
        run(Stage::rud,
            [&](Writer& w, bool write) {
                obs = rud::build_rud_dataset(clean, cfg.scope);
                scopes = split_scopes(obs);
                if (write) {
                    std::ostringstream os;
                    rud::write_rud_csv(os, obs);
                    w.report("rud", os.str());
                }
            }) &&
        run(Stage::normality,
            [&](Writer& w, bool) {
                std::ostringstream os;
                write_normality_csv(os, obs);
                w.report("normality", os.str());
            }) &&
        run(Stage::transform,
            [&](Writer& w, bool write) {
                transforms = scope_transforms(cfg, scopes);
                for (std::size_t i = 0; i < scopes.size(); ++i)
                    linmod::attach_transform(scopes[i].observations, transforms[i].spec);
                if (write) {
                    w.report("transform", transform_csv(transforms, scopes));
                    if (transforms.size() == 1) {
                        std::ostringstream os;
                        diststat::write_spec_cfg(os, transforms[0].spec);
                        w.report("spec", os.str());
                    }
                }
            }) &&
        run(Stage::regress,
            [&](Writer& w, bool) {
                const auto specs = linmod::parse_model_list(cfg.models, cfg.method);
                const auto windows = linmod::parse_windows(cfg.windows);
                linmod::RlsOptions opt;
                opt.fallback_to_ols = cfg.fallback_ols;
                const auto report = linmod::roll_window_run(scopes, windows, specs, opt);
                std::ostringstream os;
                linmod::write_report_csv(os, report);
                w.report("regress", os.str());
                if (cfg.diagnostics) w.report("diagnostics", diagnostics_csv(scopes, specs, cfg));
            }) &&
        run(Stage::panel,
            [&](Writer& w, bool) {
                const auto cells = panel::build_panel(obs, clean.countries, cfg.panel);
                auto fit = panel::re_egls_fit(cells, cfg.panel_weighting);
                fit.trend_base = cfg.panel.trend_base;
                std::ostringstream os;
                panel::write_panel_fit_csv(os, fit);
                w.report("panel", os.str());
            }) &&
        run(Stage::lq, [&](Writer& w, bool) {
            const auto sel = geo::SelectionExpr::parse(cfg.lq_select);
            const auto lq = geo::localization_quotient(clean.records, sel);
            std::vector<double> values;
            for (const auto& e : lq.entries) values.push_back(e.lq);
            const auto breaks = geo::jenks_breaks(values, cfg.lq_classes);
            const auto universe = clean.countries.codes();
            const auto table = geo::choropleth_rows(lq, breaks, universe);
            std::ostringstream os;
            geo::write_choropleth_csv(os, table);
            w.report("lq", os.str());
            std::optional<std::string> geometry;
            if (!cfg.lq_geometry.empty()) {
                std::ifstream in(cfg.lq_geometry, std::ios::binary);
                std::ostringstream g;
                g << in.rdbuf();
                geometry = g.str();
            }
            const auto gj = geometry ? geo::choropleth_geojson(table, breaks, std::string_view(*geometry))
                                     : geo::choropleth_geojson(table, breaks);
            w.report("geojson", with_generator(gj.text, report_tag(cfg)), false);
        });
    (void)ok;
    return result;
}

}  // namespace dwe::pipeline
