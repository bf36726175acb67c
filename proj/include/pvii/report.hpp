#pragma once

// Machine-readable result records. CSV output follows RFC 4180 quoting and
// renders floats with 17 significant digits so every value parses back to
// the identical double; JSON output is newline-delimited, one record per
// line.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace pvii {

using json = nlohmann::ordered_json;

struct OutputRecord {
    std::string schema_version = "1";
    std::string command;
    json params = json::object();   // echoed inputs, including the seed
    json results = json::object();  // command-specific payload
    double timing_s = 0.0;
};

inline json to_json(const OutputRecord& rec) {
    json j;
    j["schema_version"] = rec.schema_version;
    j["command"] = rec.command;
    j["params"] = rec.params;
    j["results"] = rec.results;
    j["timing_s"] = rec.timing_s;
    return j;
}

inline OutputRecord record_from_json(const json& j) {
    OutputRecord rec;
    rec.schema_version = j.at("schema_version").get<std::string>();
    rec.command = j.at("command").get<std::string>();
    rec.params = j.at("params");
    rec.results = j.at("results");
    rec.timing_s = j.at("timing_s").get<double>();
    return rec;
}

inline std::string format_double_17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

namespace detail {

inline std::string csv_cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return csv_quote(v.get<std::string>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return format_double_17(v.get<double>());
    return csv_quote(v.dump());
}

}  // namespace detail

// One JSON object per line.
inline void emit_json(const std::vector<OutputRecord>& records, std::ostream& out) {
    for (const auto& rec : records) out << to_json(rec).dump() << '\n';
}

// Header row, then one data row per record. Columns are the fixed fields
// followed by the params and results keys; pass an explicit column list to
// control the header when the record list may be empty.
inline std::vector<std::string> csv_columns(const OutputRecord& rec) {
    std::vector<std::string> cols{"schema_version", "command"};
    for (const auto& item : rec.params.items()) cols.push_back(item.key());
    for (const auto& item : rec.results.items()) cols.push_back(item.key());
    cols.push_back("timing_s");
    return cols;
}

inline void emit_csv(const std::vector<OutputRecord>& records, std::ostream& out,
                     std::vector<std::string> columns = {}) {
    if (columns.empty() && !records.empty()) columns = csv_columns(records.front());
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << (i ? "," : "") << csv_quote(columns[i]);
    out << '\n';

    for (const auto& rec : records) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) out << ',';
            const std::string& col = columns[i];
            if (col == "schema_version") {
                out << csv_quote(rec.schema_version);
            } else if (col == "command") {
                out << csv_quote(rec.command);
            } else if (col == "timing_s") {
                out << format_double_17(rec.timing_s);
            } else if (rec.params.contains(col)) {
                out << detail::csv_cell(rec.params.at(col));
            } else if (rec.results.contains(col)) {
                out << detail::csv_cell(rec.results.at(col));
            }
        }
        out << '\n';
    }
}

}  // namespace pvii
