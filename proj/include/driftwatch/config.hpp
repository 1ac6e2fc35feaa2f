#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftwatch/alerting.hpp"
#include "driftwatch/parse.hpp"
#include "driftwatch/synth.hpp"

namespace driftwatch {

struct StatsParams {
    int iterations = 1000;
    std::uint64_t seed = 42;
    double level = 0.95;
    double alpha = 0.05;
};

struct BaselineParams {
    std::vector<std::string> enabled = {"ks",  "psi", "wasserstein",
                                        "tfidf_centroid", "mmd", "clustering_js"};
    int psi_bins = 10;
    int kmeans_k = 5;
    int permutation_iterations = 200;
    std::optional<double> mmd_sigma_sq; ///< unset = median heuristic
    int sample_cap = 400; ///< per-window cap for the quadratic text/embedding methods
};

/// Everything a run needs, with defaults usable out of the box. The
/// config file is JSON with // and /* */ comments allowed.
struct RunConfig {
    std::string input_path;
    Format input_format = Format::Jsonl;
    std::vector<std::string> labels = {"negative", "neutral", "positive"};
    std::vector<EventConfig> events;
    std::size_t min_bin_size = 5;
    StatsParams stats;
    DetectionParams detection;
    BaselineParams baselines;
    std::vector<IndustryProfile> profiles = default_industry_profiles();
    std::string out_path;  ///< empty = stdout
    std::string emit = "json";
    bool include_runtime = false; ///< wall-clock field breaks byte-determinism
    std::optional<SynthConfig> synth;
};

namespace detail {

inline void check_known_keys(const nlohmann::json& obj, const char* where,
                             std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) fail_config(std::string(where) + ": unknown key '" + key + "'");
    }
}

template <typename T>
T get_field(const nlohmann::json& obj, const char* where, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        fail_config(std::string(where) + ": field '" + key + "' has the wrong type");
    }
}

/// Date fields inside a config are config errors when malformed, not
/// data errors.
inline std::int64_t parse_config_day(const std::string& s) {
    try {
        return parse_day(s);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail_config(e.what());
    }
}

inline EventConfig parse_event(const nlohmann::json& j) {
    if (!j.is_object()) fail_config("events: each entry must be an object");
    check_known_keys(j, "events", {"name", "start", "end", "pre_days", "post_days"});
    if (!j.contains("start") || !j.contains("end") || !j.at("start").is_string() ||
        !j.at("end").is_string()) {
        fail_config("events: entries need 'start' and 'end' dates");
    }
    EventConfig e;
    e.name = get_field<std::string>(j, "events", "name", "event");
    e.event_start = parse_config_day(j.at("start").get<std::string>());
    e.event_end = parse_config_day(j.at("end").get<std::string>());
    e.pre_days = get_field<int>(j, "events", "pre_days", e.pre_days);
    e.post_days = get_field<int>(j, "events", "post_days", e.post_days);
    if (e.event_end < e.event_start) {
        fail_config("events: '" + e.name + "' has end before start");
    }
    if (e.pre_days < 1) fail_config("events: '" + e.name + "' needs pre_days >= 1");
    if (e.post_days < 0) fail_config("events: '" + e.name + "' needs post_days >= 0");
    return e;
}

inline DriftSpec parse_drift(const nlohmann::json& j) {
    check_known_keys(j, "synth.drift",
                     {"confidence_delta", "accuracy_delta", "label_shift", "transition_boost",
                      "vocab_shift"});
    DriftSpec d;
    d.confidence_delta = get_field<double>(j, "synth.drift", "confidence_delta", 0.0);
    d.accuracy_delta = get_field<double>(j, "synth.drift", "accuracy_delta", 0.0);
    d.label_shift = get_field<std::vector<double>>(j, "synth.drift", "label_shift", {});
    d.transition_boost = get_field<double>(j, "synth.drift", "transition_boost", 0.0);
    d.vocab_shift = get_field<double>(j, "synth.drift", "vocab_shift", 0.0);
    return d;
}

inline SynthConfig parse_synth(const nlohmann::json& j,
                               const std::vector<std::string>& default_labels) {
    check_known_keys(j, "synth",
                     {"n_days", "records_per_day", "labels", "baseline_label_probs",
                      "baseline_confidence_mean", "baseline_confidence_std",
                      "baseline_accuracy", "event_start", "event_end", "drift", "seed",
                      "start_day", "emit_class_probs", "emit_text", "tokens_per_text",
                      "vocab_size", "emit_embeddings", "embedding_dim"});
    SynthConfig s;
    s.labels = get_field<std::vector<std::string>>(j, "synth", "labels", default_labels);
    s.n_days = get_field<int>(j, "synth", "n_days", s.n_days);
    if (j.contains("records_per_day")) {
        if (j.at("records_per_day").is_array()) {
            s.records_per_day_list =
                j.at("records_per_day").get<std::vector<std::size_t>>();
        } else {
            s.records_per_day = get_field<int>(j, "synth", "records_per_day", s.records_per_day);
        }
    }
    s.baseline_label_probs = get_field<std::vector<double>>(j, "synth", "baseline_label_probs",
                                                            s.baseline_label_probs);
    s.baseline_confidence_mean =
        get_field<double>(j, "synth", "baseline_confidence_mean", s.baseline_confidence_mean);
    s.baseline_confidence_std =
        get_field<double>(j, "synth", "baseline_confidence_std", s.baseline_confidence_std);
    s.baseline_accuracy = get_field<double>(j, "synth", "baseline_accuracy", s.baseline_accuracy);
    s.event_start = get_field<int>(j, "synth", "event_start", s.event_start);
    s.event_end = get_field<int>(j, "synth", "event_end", s.event_end);
    if (j.contains("drift")) s.drift = parse_drift(j.at("drift"));
    s.seed = get_field<std::uint64_t>(j, "synth", "seed", s.seed);
    if (j.contains("start_day")) {
        s.start_day = civil_from_days(parse_config_day(j.at("start_day").get<std::string>()));
    }
    s.emit_class_probs = get_field<bool>(j, "synth", "emit_class_probs", s.emit_class_probs);
    s.emit_text = get_field<bool>(j, "synth", "emit_text", s.emit_text);
    s.tokens_per_text = get_field<int>(j, "synth", "tokens_per_text", s.tokens_per_text);
    s.vocab_size = get_field<int>(j, "synth", "vocab_size", s.vocab_size);
    s.emit_embeddings = get_field<bool>(j, "synth", "emit_embeddings", s.emit_embeddings);
    s.embedding_dim = get_field<int>(j, "synth", "embedding_dim", s.embedding_dim);
    return s;
}

} // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
    if (!j.is_object()) fail_config("config root must be an object");
    detail::check_known_keys(j, "config",
                             {"input", "labels", "events", "min_bin_size", "stats", "detection",
                              "baselines", "industry_profiles", "output", "synth"});
    RunConfig c;
    if (j.contains("input")) {
        const auto& in = j.at("input");
        detail::check_known_keys(in, "input", {"path", "format"});
        c.input_path = detail::get_field<std::string>(in, "input", "path", "");
        c.input_format = parse_format(detail::get_field<std::string>(in, "input", "format",
                                                                     "jsonl"));
    }
    c.labels = detail::get_field<std::vector<std::string>>(j, "config", "labels", c.labels);
    if (c.labels.size() < 2) fail_config("labels must contain at least 2 entries");
    if (j.contains("events")) {
        if (!j.at("events").is_array()) fail_config("events must be an array");
        for (const auto& e : j.at("events")) c.events.push_back(detail::parse_event(e));
    }
    c.min_bin_size = detail::get_field<std::size_t>(j, "config", "min_bin_size", c.min_bin_size);
    if (c.min_bin_size < 1) fail_config("min_bin_size must be >= 1");

    if (j.contains("stats")) {
        const auto& s = j.at("stats");
        detail::check_known_keys(s, "stats", {"iterations", "seed", "level", "alpha"});
        c.stats.iterations = detail::get_field<int>(s, "stats", "iterations", c.stats.iterations);
        c.stats.seed = detail::get_field<std::uint64_t>(s, "stats", "seed", c.stats.seed);
        c.stats.level = detail::get_field<double>(s, "stats", "level", c.stats.level);
        c.stats.alpha = detail::get_field<double>(s, "stats", "alpha", c.stats.alpha);
    }
    if (c.stats.iterations < 1) fail_config("stats.iterations must be >= 1");
    if (c.stats.level <= 0.0 || c.stats.level >= 1.0) fail_config("stats.level out of (0, 1)");
    if (c.stats.alpha <= 0.0 || c.stats.alpha >= 1.0) fail_config("stats.alpha out of (0, 1)");

    if (j.contains("detection")) {
        const auto& d = j.at("detection");
        detail::check_known_keys(d, "detection", {"z_threshold", "min_abs_drop", "min_pre_days"});
        c.detection.z_threshold =
            detail::get_field<double>(d, "detection", "z_threshold", c.detection.z_threshold);
        c.detection.min_abs_drop =
            detail::get_field<double>(d, "detection", "min_abs_drop", c.detection.min_abs_drop);
        c.detection.min_pre_days = detail::get_field<std::size_t>(d, "detection", "min_pre_days",
                                                                  c.detection.min_pre_days);
    }
    if (c.detection.z_threshold <= 0.0) fail_config("detection.z_threshold must be positive");
    if (c.detection.min_abs_drop < 0.0) fail_config("detection.min_abs_drop must be >= 0");
    if (c.detection.min_pre_days < 2) fail_config("detection.min_pre_days must be >= 2");

    if (j.contains("baselines")) {
        const auto& b = j.at("baselines");
        detail::check_known_keys(b, "baselines",
                                 {"enabled", "psi_bins", "kmeans_k", "permutation_iterations",
                                  "mmd_sigma_sq", "sample_cap"});
        c.baselines.enabled = detail::get_field<std::vector<std::string>>(
            b, "baselines", "enabled", c.baselines.enabled);
        c.baselines.psi_bins = detail::get_field<int>(b, "baselines", "psi_bins",
                                                      c.baselines.psi_bins);
        c.baselines.kmeans_k = detail::get_field<int>(b, "baselines", "kmeans_k",
                                                      c.baselines.kmeans_k);
        c.baselines.permutation_iterations = detail::get_field<int>(
            b, "baselines", "permutation_iterations", c.baselines.permutation_iterations);
        if (b.contains("mmd_sigma_sq")) {
            c.baselines.mmd_sigma_sq =
                detail::get_field<double>(b, "baselines", "mmd_sigma_sq", 1.0);
        }
        c.baselines.sample_cap = detail::get_field<int>(b, "baselines", "sample_cap",
                                                        c.baselines.sample_cap);
    }
    if (c.baselines.psi_bins < 2) fail_config("baselines.psi_bins must be >= 2");
    if (c.baselines.sample_cap < 2) fail_config("baselines.sample_cap must be >= 2");
    if (c.baselines.kmeans_k < 2) fail_config("baselines.kmeans_k must be >= 2");
    if (c.baselines.permutation_iterations < 1) {
        fail_config("baselines.permutation_iterations must be >= 1");
    }
    for (const auto& name : c.baselines.enabled) {
        if (name != "ks" && name != "psi" && name != "wasserstein" &&
            name != "tfidf_centroid" && name != "mmd" && name != "clustering_js") {
            fail_config("baselines.enabled: unknown method '" + name + "'");
        }
    }

    if (j.contains("industry_profiles")) {
        if (!j.at("industry_profiles").is_array()) {
            fail_config("industry_profiles must be an array");
        }
        c.profiles.clear();
        for (const auto& p : j.at("industry_profiles")) {
            detail::check_known_keys(p, "industry_profiles", {"name", "threshold_points"});
            IndustryProfile profile;
            profile.name = detail::get_field<std::string>(p, "industry_profiles", "name", "");
            profile.threshold_points =
                detail::get_field<double>(p, "industry_profiles", "threshold_points", 0.0);
            if (profile.name.empty()) fail_config("industry_profiles: entries need a name");
            if (profile.threshold_points <= 0.0) {
                fail_config("industry_profiles: '" + profile.name +
                            "' needs threshold_points > 0");
            }
            c.profiles.push_back(std::move(profile));
        }
    }

    if (j.contains("output")) {
        const auto& o = j.at("output");
        detail::check_known_keys(o, "output", {"path", "emit", "include_runtime"});
        c.out_path = detail::get_field<std::string>(o, "output", "path", "");
        c.emit = detail::get_field<std::string>(o, "output", "emit", c.emit);
        c.include_runtime =
            detail::get_field<bool>(o, "output", "include_runtime", c.include_runtime);
    }
    if (c.emit != "json" && c.emit != "markdown" && c.emit != "csv-series") {
        fail_config("output.emit must be json, markdown, or csv-series");
    }
    if (!c.out_path.empty() && c.out_path == c.input_path) {
        fail_config("output.path must differ from input.path");
    }

    if (j.contains("synth")) c.synth = detail::parse_synth(j.at("synth"), c.labels);
    return c;
}

inline RunConfig parse_run_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::exception& e) {
        fail_config(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_run_config(j);
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_config("cannot open config file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_run_config(text);
}

/// The fully resolved configuration, defaults included — what the
/// report echoes so a run can be reproduced from its own output.
inline nlohmann::json config_echo(const RunConfig& c) {
    nlohmann::json j;
    j["input"] = {{"path", c.input_path},
                  {"format", c.input_format == Format::Jsonl ? "jsonl" : "csv"}};
    j["labels"] = c.labels;
    j["events"] = nlohmann::json::array();
    for (const auto& e : c.events) {
        j["events"].push_back({{"name", e.name},
                               {"start", format_day(e.event_start)},
                               {"end", format_day(e.event_end)},
                               {"pre_days", e.pre_days},
                               {"post_days", e.post_days}});
    }
    j["min_bin_size"] = c.min_bin_size;
    j["stats"] = {{"iterations", c.stats.iterations},
                  {"seed", c.stats.seed},
                  {"level", c.stats.level},
                  {"alpha", c.stats.alpha}};
    j["detection"] = {{"z_threshold", c.detection.z_threshold},
                      {"min_abs_drop", c.detection.min_abs_drop},
                      {"min_pre_days", c.detection.min_pre_days}};
    nlohmann::json b = {{"enabled", c.baselines.enabled},
                        {"psi_bins", c.baselines.psi_bins},
                        {"kmeans_k", c.baselines.kmeans_k},
                        {"permutation_iterations", c.baselines.permutation_iterations},
                        {"sample_cap", c.baselines.sample_cap}};
    if (c.baselines.mmd_sigma_sq) b["mmd_sigma_sq"] = *c.baselines.mmd_sigma_sq;
    j["baselines"] = std::move(b);
    j["industry_profiles"] = nlohmann::json::array();
    for (const auto& p : c.profiles) {
        j["industry_profiles"].push_back(
            {{"name", p.name}, {"threshold_points", p.threshold_points}});
    }
    j["output"] = {{"path", c.out_path}, {"emit", c.emit}, {"include_runtime", c.include_runtime}};
    return j;
}

} // namespace driftwatch
