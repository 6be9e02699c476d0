#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "dwe/pipeline.hpp"
#include "dwe/text.hpp"

namespace pl = dwe::pipeline;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string corpus;
    std::string countries;
    std::string scope = "consolidated";
};

void add_inputs(CLI::App* app, Common& c, bool with_scope) {
    app->add_option("--corpus", c.corpus, "corpus CSV")->required();
    app->add_option("--countries", c.countries, "countries.cfg")->required();
    if (with_scope) app->add_option("--scope", c.scope, "journal or consolidated");
}

/// Collects key=value lines so that subcommands go through the same
/// validation as configuration files.
struct ConfigText {
    std::string text;
    void set(const std::string& key, const std::string& value) {
        if (!value.empty()) text += key + "=" + value + "\n";
    }
};

int run(pl::RunConfig cfg) {
    const auto result = pl::run_pipeline(cfg, std::cerr);
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Day-of-the-week submission analysis"};
    app.set_version_flag("--version", std::string("dwe ") + DWE_VERSION);
    app.require_subcommand(1);

    std::string args_text;
    for (int i = 1; i < argc; ++i) args_text += std::string(argv[i]) + '\n';

    ConfigText ct;
    std::map<std::string, std::string> outputs;
    auto out_opt = [&](CLI::App* sub, const std::string& flag, const std::string& artifact, const std::string& help,
                       bool required) {
        auto* o = sub->add_option_function<std::string>(
            flag, [&, artifact](const std::string& v) { outputs[artifact] = v; }, help);
        if (required) o->required();
    };

    Common common;

    auto* harvest = app.add_subcommand("harvest", "parse saved JATS and archive pages into a corpus CSV");
    std::string h_dir, h_style = "plos-like", h_journal = "1";
    harvest->add_option("--dir", h_dir, "directory of .xml and .txt files")->required();
    harvest->add_option("--style", h_style, "history string style: plos-like, physica-like, nature-like");
    harvest->add_option("--journal", h_journal, "journal id for every record");
    out_opt(harvest, "--out", "harvested", "corpus CSV", true);
    out_opt(harvest, "--rejected", "rejected", "rejected files CSV", false);

    auto* clean = app.add_subcommand("clean", "drop unusable records and derive calendar features");
    add_inputs(clean, common, false);
    out_opt(clean, "--out", "clean", "clean corpus CSV", true);
    out_opt(clean, "--report", "cleaning", "cleaning report CSV", false);

    auto* rud = app.add_subcommand("rud", "relative uniform deviation per article");
    add_inputs(rud, common, true);
    out_opt(rud, "--out", "rud", "rud CSV", true);

    auto* normality = app.add_subcommand("normality", "moments, Jarque-Bera and weekday chi-square per scope");
    add_inputs(normality, common, true);
    out_opt(normality, "--out", "normality", "normality CSV", true);

    auto* transform = app.add_subcommand("transform", "fit the two-step normalising transform per scope");
    add_inputs(transform, common, true);
    out_opt(transform, "--out", "transform", "transform CSV", true);
    out_opt(transform, "--spec", "spec", "spec.cfg of a single scope", false);

    auto* regress = app.add_subcommand("regress", "roll-window regressions M1..M9");
    add_inputs(regress, common, true);
    std::string r_models = "M1..M9", r_method = "ols", r_windows = "default", r_transform = "fit";
    bool r_fallback = false;
    regress->add_option("--models", r_models, "M1..M9, M1,M4 or all");
    regress->add_option("--method", r_method, "ols or rls");
    regress->add_option("--windows", r_windows, "default, all or 2000-2004,2005-2007");
    regress->add_option("--transform", r_transform, "fit, identity or a spec.cfg path");
    regress->add_flag("--fallback-ols", r_fallback, "replace non-converged RLS fits by OLS");
    out_opt(regress, "--out", "regress", "report CSV", true);
    out_opt(regress, "--diagnostics", "diagnostics", "VIF and heteroskedasticity CSV", false);
    std::string seed = "1";
    regress->add_option("--seed", seed, "seed of the simulated Breusch-Pagan size");

    auto* panel = app.add_subcommand("panel", "country x day random-effects panel");
    add_inputs(panel, common, true);
    std::string p_top = "11", p_from = "2010-01-01", p_to = "2016-08-31", p_trend = "log10";
    bool p_weighted = false, p_wls = false;
    panel->add_option("--top", p_top, "number of countries");
    panel->add_option("--from", p_from, "first day");
    panel->add_option("--to", p_to, "last day");
    panel->add_option("--trend", p_trend, "log10 or ln");
    panel->add_flag("--weighted", p_weighted, "multiply y and continuous regressors by the cell count");
    panel->add_flag("--wls", p_wls, "weight every variable by the square root of the cell count");
    out_opt(panel, "--out", "panel", "fit CSV", true);

    auto* lq = app.add_subcommand("lq", "localization quotients and natural-breaks classes");
    add_inputs(lq, common, false);
    std::string l_select = "weekday in 2,3,4", l_classes = "5", l_geometry;
    lq->add_option("--select", l_select, "selection, e.g. \"weekday in 2,3,4\"");
    lq->add_option("--classes", l_classes, "number of classes");
    lq->add_option("--geometry", l_geometry, "GeoJSON FeatureCollection to join on ISO code");
    out_opt(lq, "--out", "lq", "LQ CSV", true);
    out_opt(lq, "--geojson", "geojson", "GeoJSON output", false);

    auto* pipeline = app.add_subcommand("pipeline", "run the stages listed in a configuration file");
    std::string config_path;
    pipeline->add_option("--config", config_path, "run configuration")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (pipeline->parsed()) return run(pl::load_run_config(config_path));

        CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        ct.set("stages", name);
        if (name != "harvest") {
            ct.set("corpus", common.corpus);
            ct.set("countries", common.countries);
            ct.set("scope", common.scope);
        }
        if (harvest->parsed()) {
            ct.set("harvest_dir", h_dir);
            ct.set("harvest_style", h_style);
            ct.set("harvest_journal", h_journal);
        }
        if (regress->parsed()) {
            ct.set("models", r_models);
            ct.set("method", r_method);
            ct.set("windows", r_windows);
            ct.set("transform", r_transform);
            ct.set("fallback_ols", r_fallback ? "yes" : "no");
            ct.set("diagnostics", outputs.contains("diagnostics") ? "yes" : "no");
            ct.set("seed", seed);
        }
        if (panel->parsed()) {
            if (p_weighted && p_wls) throw pl::ConfigError("--weighted and --wls are exclusive");
            ct.set("panel_top", p_top);
            ct.set("panel_from", p_from);
            ct.set("panel_to", p_to);
            ct.set("panel_trend", p_trend);
            ct.set("panel_weighted", p_wls ? "wls" : (p_weighted ? "yes" : "no"));
        }
        if (lq->parsed()) {
            ct.set("lq_select", l_select);
            ct.set("lq_classes", l_classes);
            ct.set("lq_geometry", l_geometry);
        }
        auto cfg = pl::parse_run_config(ct.text, ".");
        cfg.hash = dwe::fnv1a_hex(args_text);
        // The failure marker sits next to the main report; optional artifacts
        // stay off unless named.
        const std::string main_artifact = name == "harvest" ? "harvested" : name;
        const auto parent = fs::path(outputs.at(main_artifact)).parent_path();
        cfg.output_dir = parent.empty() ? "." : parent.string();
        for (const char* optional : {"rejected", "cleaning", "spec", "diagnostics", "geojson"})
            if (!outputs.contains(optional)) outputs[optional] = "";
        cfg.output_paths = outputs;
        return run(std::move(cfg));
    } catch (const std::exception& e) {
        std::cerr << "dwe: " << e.what() << "\n";
        return 2;
    }
}
