#include "adialag/io.hpp"

#include <cstdio>
#include <json.hpp>

namespace adialag {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& scenario_hash,
                     const std::vector<std::string>& columns)
    : out_(path, std::ios::binary), n_cols_(columns.size()) {
    if (!out_) throw ValidationError("cannot open output file: " + path);
    out_ << "# scenario_hash=" << scenario_hash << "\n";
    for (size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != n_cols_) throw ValidationError("CSV row width mismatch");
    for (size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << "\n";
}

void CsvWriter::close() { out_.close(); }

bool RunManifest::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

void RunManifest::write(const std::string& path) const {
    nlohmann::json j;
    j["scenario_hash"] = scenario_hash;
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["wall_clock_s"] = wall_clock_s;
    nlohmann::json defaults = nlohmann::json::object();
    for (const auto& [k, v] : resolved_defaults) defaults[k] = v;
    j["resolved_defaults"] = defaults;
    nlohmann::json jchecks = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["pass"] = c.pass;
        jc["value"] = c.value;
        jc["threshold"] = c.threshold;
        jchecks.push_back(jc);
    }
    j["checks"] = jchecks;
    j["artifacts"] = artifacts;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open manifest file: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace adialag
