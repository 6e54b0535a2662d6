#pragma once

// Declarative experiment configuration: a TOML document with one table
// per subcommand. The whole document is schema-validated up front and
// unknown keys are rejected; command-line flags override config values.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "shiftlab/common.hpp"
#include "shiftlab/csv.hpp"
#include "shiftlab/rng.hpp"
#include "shiftlab/toml.hpp"

namespace shiftlab {

class ExperimentConfig {
  public:
    ExperimentConfig() = default;

    static const std::set<std::string>& schema() {
        static const std::set<std::string> keys = {
            "run.seed",
            "gen.preset", "gen.scaling", "gen.n", "gen.d", "gen.envs",
            "fit.data", "fit.method",
            "shift.preset", "shift.scaling",
            "bounds.theorem", "bounds.alpha", "bounds.beta", "bounds.m", "bounds.E",
            "bounds.delta", "bounds.eps", "bounds.log-base",
            "massart.K", "massart.E", "massart.m", "massart.beta", "massart.n",
            "massart.eps", "massart.delta", "massart.trials", "massart.mode",
            "massart.tilt", "massart.x2-fraction",
            "colored.envs", "colored.n",
            "sweep.e1", "sweep.e2-grid", "sweep.e-test", "sweep.n", "sweep.trials",
            "hyptest.csv", "hyptest.y-col", "hyptest.x-cols", "hyptest.intercept",
        };
        return keys;
    }

    static ExperimentConfig load(const std::string& path) {
        ExperimentConfig cfg;
        cfg.table_ = toml::parse_file(path);
        for (const auto& [key, value] : cfg.table_) {
            (void)value;
            if (!schema().count(key))
                throw validation_error(path + ": unknown config key '" + key + "'");
        }
        return cfg;
    }

    bool has(const std::string& key) const { return table_.count(key) > 0; }

    double number(const std::string& key) const {
        return at(key).as_number();
    }

    std::int64_t integer(const std::string& key) const {
        const auto& v = at(key);
        if (v.kind != toml::Value::Kind::integer)
            throw validation_error("config key '" + key + "' must be an integer");
        return v.i;
    }

    std::string string(const std::string& key) const {
        const auto& v = at(key);
        if (v.kind != toml::Value::Kind::string)
            throw validation_error("config key '" + key + "' must be a string");
        return v.s;
    }

    bool boolean(const std::string& key) const {
        const auto& v = at(key);
        if (v.kind != toml::Value::Kind::boolean)
            throw validation_error("config key '" + key + "' must be a boolean");
        return v.b;
    }

    std::vector<double> number_array(const std::string& key) const {
        const auto& v = at(key);
        if (v.kind != toml::Value::Kind::array)
            throw validation_error("config key '" + key + "' must be an array");
        std::vector<double> out;
        out.reserve(v.items.size());
        for (const auto& item : v.items) out.push_back(item.as_number());
        return out;
    }

    std::vector<std::string> string_array(const std::string& key) const {
        const auto& v = at(key);
        if (v.kind != toml::Value::Kind::array)
            throw validation_error("config key '" + key + "' must be an array");
        std::vector<std::string> out;
        out.reserve(v.items.size());
        for (const auto& item : v.items) {
            if (item.kind != toml::Value::Kind::string)
                throw validation_error("config key '" + key + "' must hold strings");
            out.push_back(item.s);
        }
        return out;
    }

  private:
    const toml::Value& at(const std::string& key) const {
        auto it = table_.find(key);
        if (it == table_.end()) throw validation_error("missing config key '" + key + "'");
        return it->second;
    }

    toml::Table table_;
};

// FNV-1a over the canonical "key=value;" rendering of an effective config.
inline std::uint64_t config_hash(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string canon;
    for (const auto& [k, v] : kv) {
        canon += k;
        canon += '=';
        canon += v;
        canon += ';';
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace shiftlab
