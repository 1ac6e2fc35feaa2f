#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <driftwatch/driftwatch.hpp>

namespace {

void write_output(const std::string& path, const std::string& bytes) {
    if (path.empty()) {
        std::cout << bytes;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) driftwatch::fail("cannot open output file '" + path + "'");
    out << bytes;
}

bool any_drift(const nlohmann::json& doc) {
    for (const auto& ej : doc.at("events")) {
        if (ej.at("verdict").at("detected").get<bool>()) return true;
    }
    return false;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"temporal drift detection for model prediction logs"};
    app.require_subcommand(1);

    std::string config_path;
    std::string input_path;
    std::string format_name;
    std::string out_path;
    std::string emit;
    bool fail_on_drift = false;
    std::uint64_t seed = 0;

    const auto add_common = [&](CLI::App* cmd, bool with_input) {
        cmd->add_option("--config", config_path, "run configuration file (JSON, comments ok)");
        if (with_input) {
            cmd->add_option("--input", input_path, "input path (overrides config)");
            cmd->add_option("--format", format_name, "input format: jsonl or csv")
                ->check(CLI::IsMember({"jsonl", "csv"}));
        }
        cmd->add_option("--out", out_path, "output path (default stdout)");
        return cmd;
    };

    auto* analyze = add_common(app.add_subcommand("analyze", "run the full drift pipeline"),
                               true);
    analyze->add_option("--emit", emit, "report format: json, markdown, or csv-series")
        ->check(CLI::IsMember({"json", "markdown", "csv-series"}));
    analyze->add_flag("--fail-on-drift", fail_on_drift,
                      "exit 1 when any event verdict fires");
    auto* analyze_seed = analyze->add_option("--seed", seed, "override the statistics seed");

    auto* synth =
        add_common(app.add_subcommand("synth", "generate a synthetic prediction stream"),
                   false);
    auto* synth_seed = synth->add_option("--seed", seed, "override the generator seed");

    auto* baselines = add_common(
        app.add_subcommand("baselines", "run comparison baselines with permutation p-values"),
        true);
    auto* baselines_seed = baselines->add_option("--seed", seed, "override the statistics seed");

    auto* report =
        app.add_subcommand("report", "re-render a stored JSON report");
    report->add_option("--input", input_path, "stored report path")->required();
    report->add_option("--emit", emit, "output format: json, markdown, or csv-series")
        ->check(CLI::IsMember({"json", "markdown", "csv-series"}));
    report->add_option("--out", out_path, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (analyze->parsed() || baselines->parsed()) {
            auto cfg = config_path.empty() ? driftwatch::RunConfig{}
                                           : driftwatch::load_run_config(config_path);
            if (!input_path.empty()) cfg.input_path = input_path;
            if (!format_name.empty()) cfg.input_format = driftwatch::parse_format(format_name);
            if (!out_path.empty()) cfg.out_path = out_path;
            if (!emit.empty()) cfg.emit = emit;
            if (analyze->parsed()) {
                if (analyze_seed->count() > 0) cfg.stats.seed = seed;
                const auto result = driftwatch::run_analyze(cfg);
                write_output(cfg.out_path, driftwatch::emit_report(result, cfg.emit));
                if (fail_on_drift && any_drift(result.doc)) return 1;
            } else {
                if (baselines_seed->count() > 0) cfg.stats.seed = seed;
                if (cfg.input_path.empty()) {
                    driftwatch::fail_config("ingest: no input path configured");
                }
                const auto dataset = driftwatch::detail::run_stage("ingest", [&] {
                    return driftwatch::load_records(cfg.input_path, cfg.input_format,
                                                    driftwatch::LabelSet(cfg.labels));
                });
                const auto result = driftwatch::run_baselines(dataset, cfg);
                write_output(cfg.out_path, result.doc.dump(2) + "\n");
            }
        } else if (synth->parsed()) {
            auto cfg = config_path.empty() ? driftwatch::RunConfig{}
                                           : driftwatch::load_run_config(config_path);
            auto sc = cfg.synth.value_or(driftwatch::SynthConfig{});
            if (synth_seed->count() > 0) sc.seed = seed;
            const auto dataset = driftwatch::generate_stream(sc);
            write_output(out_path, driftwatch::serialize_records(dataset));
        } else if (report->parsed()) {
            std::ifstream in(input_path);
            if (!in) driftwatch::fail("cannot open report file '" + input_path + "'");
            driftwatch::DriftReport stored;
            try {
                stored.doc = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                driftwatch::fail(std::string("report is not valid JSON: ") + e.what());
            }
            write_output(out_path,
                         driftwatch::emit_report(stored, emit.empty() ? "json" : emit));
        }
    } catch (const driftwatch::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const driftwatch::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
