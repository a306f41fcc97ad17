#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "entroport/errors.hpp"
#include "entroport/strategies.hpp"

namespace entroport {

/// Line-based `key = value` configuration shared by strategy specs, run
/// configs, hierarchy descriptions, and diffusion specs. Keys may repeat;
/// order is preserved. `#` starts a comment.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in) {
        KeyValueConfig cfg;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos) {
                throw DataError("config line " + std::to_string(line_no) +
                                ": expected 'key = value'");
            }
            std::string key = trim(trimmed.substr(0, eq));
            std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty()) {
                throw DataError("config line " + std::to_string(line_no) + ": empty key");
            }
            cfg.entries_.emplace_back(std::move(key), std::move(value));
        }
        return cfg;
    }

    void set(std::string key, std::string value) {
        entries_.emplace_back(std::move(key), std::move(value));
    }

    void set(std::string key, double value) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        set(std::move(key), std::string(buf));
    }

    bool has(const std::string& key) const {
        for (const auto& [k, v] : entries_) {
            if (k == key) return true;
        }
        return false;
    }

    const std::string& get(const std::string& key) const {
        for (const auto& [k, v] : entries_) {
            if (k == key) return v;
        }
        throw DataError("config: missing key '" + key + "'");
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? get(key) : fallback;
    }

    double get_double(const std::string& key) const { return parse_double(key, get(key)); }

    double get_double_or(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    long get_long_or(const std::string& key, long fallback) const {
        if (!has(key)) return fallback;
        try {
            std::size_t pos = 0;
            const long v = std::stol(get(key), &pos);
            if (pos != get(key).size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw DataError("config: key '" + key + "' is not an integer");
        }
    }

    std::vector<double> get_doubles(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(get(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            out.push_back(parse_double(key, trim(item)));
        }
        if (out.empty()) throw DataError("config: key '" + key + "' has no values");
        return out;
    }

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    void write(std::ostream& out) const {
        for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
    }

    static std::string trim(const std::string& s) {
        const auto begin = s.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos) return "";
        const auto end = s.find_last_not_of(" \t\r\n");
        return s.substr(begin, end - begin + 1);
    }

private:
    static double parse_double(const std::string& key, const std::string& text) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(text, &pos);
            if (pos != text.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw DataError("config: key '" + key + "' is not a number: '" + text + "'");
        }
    }

    std::vector<std::pair<std::string, std::string>> entries_;
};

inline StrategySpec strategy_spec_from_config(const KeyValueConfig& cfg) {
    StrategySpec spec;
    spec.kind = strategy_kind_from_string(cfg.get_or("kind", "constant"));
    if (cfg.has("pi0")) spec.pi0 = cfg.get_doubles("pi0");
    spec.lambda = cfg.get_double_or("lambda", 0.0);
    if (spec.lambda < 0.0 || spec.lambda > 1.0) {
        throw DataError("strategy: lambda must lie in [0,1]");
    }
    if (cfg.has("field")) spec.field = field_kind_from_string(cfg.get("field"));
    const std::string dir = cfg.get_or("direction", "forward");
    if (dir == "forward") {
        spec.direction = FlowDirection::forward;
    } else if (dir == "reverse") {
        spec.direction = FlowDirection::reverse;
    } else {
        throw DataError("strategy: direction must be forward or reverse");
    }
    spec.substeps = static_cast<int>(cfg.get_long_or("substeps", 64));
    if (spec.substeps < 1) throw DataError("strategy: substeps must be positive");
    spec.duration = cfg.get_double_or("duration", 1.0);
    return spec;
}

inline KeyValueConfig strategy_spec_to_config(const StrategySpec& spec) {
    KeyValueConfig cfg;
    cfg.set("kind", to_string(spec.kind));
    if (!spec.pi0.empty()) {
        std::string joined;
        char buf[64];
        for (std::size_t i = 0; i < spec.pi0.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", spec.pi0[i]);
            if (i) joined += ',';
            joined += buf;
        }
        cfg.set("pi0", joined);
    }
    cfg.set("lambda", spec.lambda);
    cfg.set("field", to_string(spec.field));
    cfg.set("direction", spec.direction == FlowDirection::forward ? "forward" : "reverse");
    cfg.set("substeps", std::to_string(spec.substeps));
    cfg.set("duration", spec.duration);
    return cfg;
}

} // namespace entroport
