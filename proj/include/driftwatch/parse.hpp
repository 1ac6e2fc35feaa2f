#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "driftwatch/record.hpp"

namespace driftwatch {

enum class Format { Jsonl, Csv };

inline Format parse_format(std::string_view name) {
    if (name == "jsonl") return Format::Jsonl;
    if (name == "csv") return Format::Csv;
    fail_config("unknown input format '" + std::string(name) + "' (expected jsonl or csv)");
}

namespace detail {

inline PredictionRecord record_from_json(const nlohmann::json& j) {
    PredictionRecord r;
    if (!j.is_object()) fail("expected a JSON object");
    if (!j.contains("timestamp")) fail("missing field 'timestamp'");
    if (!j.contains("predicted_label")) fail("missing field 'predicted_label'");
    if (!j.contains("confidence")) fail("missing field 'confidence'");
    r.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
    r.predicted_label = j.at("predicted_label").get<std::string>();
    r.confidence = j.at("confidence").get<double>();
    if (j.contains("class_probs") && !j.at("class_probs").is_null()) {
        for (const auto& [label, p] : j.at("class_probs").items()) {
            r.class_probs[label] = p.get<double>();
        }
    }
    if (j.contains("true_label") && !j.at("true_label").is_null()) {
        r.true_label = j.at("true_label").get<std::string>();
    }
    if (j.contains("embedding") && !j.at("embedding").is_null()) {
        r.embedding = j.at("embedding").get<std::vector<double>>();
    }
    if (j.contains("text") && !j.at("text").is_null()) {
        r.text = j.at("text").get<std::string>();
    }
    if (j.contains("source_id") && !j.at("source_id").is_null()) {
        r.source_id = j.at("source_id").get<std::string>();
    }
    return r;
}

inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) fail("line " + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(std::move(cur));
    return fields;
}

inline double parse_double_field(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) fail("trailing characters in number '" + s + "'");
    return v;
}

} // namespace detail

/// Parses a prediction log into a validated Dataset. Records come back
/// sorted by timestamp with stable tie-breaking on input order; every
/// malformed line reports its 1-based line number.
inline Dataset parse_records(std::istream& source, Format format, const LabelSet& label_set,
                             std::string name = "dataset") {
    std::vector<PredictionRecord> records;
    std::string line;
    std::size_t line_no = 0;

    if (format == Format::Jsonl) {
        while (std::getline(source, line)) {
            ++line_no;
            if (line.empty()) continue;
            PredictionRecord r;
            try {
                const auto j = nlohmann::json::parse(line);
                r = detail::record_from_json(j);
                validate_record(r, label_set);
            } catch (const nlohmann::json::exception& e) {
                fail("line " + std::to_string(line_no) + ": " + e.what());
            } catch (const Error& e) {
                fail("line " + std::to_string(line_no) + ": " + e.what());
            }
            records.push_back(std::move(r));
        }
    } else {
        if (!std::getline(source, line)) fail("no records");
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto header = detail::split_csv_line(line, line_no);
        // Fixed interchange columns; anything else is a schema error.
        static const std::vector<std::string> known = {"timestamp", "predicted_label",
                                                       "confidence", "true_label", "text",
                                                       "source_id"};
        int col_ts = -1, col_label = -1, col_conf = -1, col_true = -1, col_text = -1,
            col_src = -1;
        for (std::size_t i = 0; i < header.size(); ++i) {
            const auto& h = header[i];
            if (h == "timestamp") col_ts = static_cast<int>(i);
            else if (h == "predicted_label") col_label = static_cast<int>(i);
            else if (h == "confidence") col_conf = static_cast<int>(i);
            else if (h == "true_label") col_true = static_cast<int>(i);
            else if (h == "text") col_text = static_cast<int>(i);
            else if (h == "source_id") col_src = static_cast<int>(i);
            else fail("line 1: unknown CSV column '" + h + "'");
        }
        if (col_ts < 0 || col_label < 0 || col_conf < 0) {
            fail("line 1: CSV header must include timestamp, predicted_label, confidence");
        }
        while (std::getline(source, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            try {
                const auto fields = detail::split_csv_line(line, line_no);
                if (fields.size() != header.size()) {
                    fail("expected " + std::to_string(header.size()) + " fields, got " +
                         std::to_string(fields.size()));
                }
                PredictionRecord r;
                r.timestamp = parse_timestamp(fields[col_ts]);
                r.predicted_label = fields[col_label];
                r.confidence = detail::parse_double_field(fields[col_conf]);
                if (col_true >= 0 && !fields[col_true].empty()) r.true_label = fields[col_true];
                if (col_text >= 0 && !fields[col_text].empty()) r.text = fields[col_text];
                if (col_src >= 0 && !fields[col_src].empty()) r.source_id = fields[col_src];
                validate_record(r, label_set);
                records.push_back(std::move(r));
            } catch (const Error& e) {
                const std::string what = e.what();
                if (what.rfind("line ", 0) == 0) throw;
                fail("line " + std::to_string(line_no) + ": " + what);
            } catch (const std::exception& e) {
                fail("line " + std::to_string(line_no) + ": " + e.what());
            }
        }
    }
    if (records.empty()) fail("no records");
    return make_dataset(std::move(records), label_set, std::move(name));
}

inline Dataset parse_records(std::string_view source, Format format, const LabelSet& label_set,
                             std::string name = "dataset") {
    std::istringstream in{std::string(source)};
    return parse_records(in, format, label_set, std::move(name));
}

inline Dataset load_records(const std::string& path, Format format, const LabelSet& label_set) {
    std::ifstream in(path);
    if (!in) fail("cannot open input file '" + path + "'");
    return parse_records(in, format, label_set, path);
}

inline nlohmann::json record_to_json(const PredictionRecord& r) {
    nlohmann::json j;
    j["timestamp"] = format_timestamp(r.timestamp);
    j["predicted_label"] = r.predicted_label;
    j["confidence"] = r.confidence;
    if (!r.class_probs.empty()) j["class_probs"] = r.class_probs;
    if (r.true_label) j["true_label"] = *r.true_label;
    if (!r.embedding.empty()) j["embedding"] = r.embedding;
    if (r.text) j["text"] = *r.text;
    if (r.source_id) j["source_id"] = *r.source_id;
    return j;
}

/// Canonical JSONL form: sorted keys, shortest round-trip numbers, one
/// record per line. parse followed by serialize is the normal form.
inline std::string serialize_records(const Dataset& dataset) {
    std::string out;
    for (const auto& r : dataset.records()) {
        out += record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

} // namespace driftwatch
