#pragma once

// RunConfig: every input of one CLI invocation. JSON keys are the field
// names. Angles are in units of pi.

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "swapqkd/errors.hpp"
#include "swapqkd/parallel.hpp"

namespace swapqkd::cli {

/// Malformed configuration text or keys (exit code 2).
class ConfigParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SweepAxis {
    std::string parameter;
    double from = 0.0;
    double to = 0.0;
    int steps = 1;

    std::vector<double> values() const {
        std::vector<double> out;
        for (int k = 0; k < steps; ++k) {
            out.push_back(steps == 1 ? from : (k == steps - 1 ? to : from + (to - from) * k / (steps - 1)));
        }
        return out;
    }
};

struct TradeOffConfig {
    double a = 6.1e-7;
    double b = 17.0;
};

struct OptimizerConfig {
    int coarse_points = 32;
    int refine_points = 9;
    int refinement_levels = 3;
    int search_truncation = 2;
    int final_truncation = 3;
    double chi_min = 0.01;
    double chi_max = 0.5;
    double eta0_min = 0.05;
    double eta0_max = 0.95;
};

struct RunConfig {
    std::string command;
    std::string figure;  // reproduce only
    double chi = 0.1;
    double eta0 = 0.7;
    std::optional<double> eta;  // effective detector efficiency, bypasses eta0 and the link
    std::optional<double> dark = 1e-5;
    std::optional<TradeOffConfig> trade_off;
    double alpha = 0.25;
    double alpha0 = 4.0;
    double length_km = 0.0;
    double delta_a = 0.5;
    double delta_b = 0.5;
    std::vector<int> n_swaps{1};
    int truncation = 3;
    double kappa = 1.0;
    std::string loss_base = "10";
    std::string herald = "1010";
    std::optional<SweepAxis> sweep;
    OptimizerConfig optimizer;
    std::optional<int> oracle_truncation;
    std::string output;
    std::string format = "csv";
    int workers = swapqkd::default_workers();
    bool timing = true;

    void validate() const {
        using swapqkd::detail::require;
        require(!n_swaps.empty(), "n_swaps must list at least one chain length");
        for (int n : n_swaps) {
            require(n >= 1, "n_swaps entries must be at least 1");
        }
        require(dark.has_value() != trade_off.has_value(),
                "exactly one of an explicit dark count and the trade-off must be active");
        require(loss_base == "10" || loss_base == "e", "loss_base must be \"10\" or \"e\"");
        require(format == "csv" || format == "json", "format must be csv or json");
        require(workers >= 1, "workers must be at least 1");
        require(truncation >= 1, "truncation must be at least 1");
        if (sweep) {
            require(sweep->steps >= 1, "sweep steps must be at least 1");
        }
    }
};

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["command"] = c.command;
    j["figure"] = c.figure;
    j["chi"] = c.chi;
    j["eta0"] = c.eta0;
    j["eta"] = c.eta ? nlohmann::json(*c.eta) : nlohmann::json(nullptr);
    j["dark"] = c.dark ? nlohmann::json(*c.dark) : nlohmann::json(nullptr);
    j["trade_off"] = c.trade_off ? nlohmann::json{{"a", c.trade_off->a}, {"b", c.trade_off->b}} : nlohmann::json(nullptr);
    j["alpha"] = c.alpha;
    j["alpha0"] = c.alpha0;
    j["length_km"] = c.length_km;
    j["delta_a"] = c.delta_a;
    j["delta_b"] = c.delta_b;
    j["n_swaps"] = c.n_swaps;
    j["truncation"] = c.truncation;
    j["kappa"] = c.kappa;
    j["loss_base"] = c.loss_base;
    j["herald"] = c.herald;
    j["sweep"] = c.sweep ? nlohmann::json{{"parameter", c.sweep->parameter},
                                          {"from", c.sweep->from},
                                          {"to", c.sweep->to},
                                          {"steps", c.sweep->steps}}
                         : nlohmann::json(nullptr);
    const auto& o = c.optimizer;
    j["optimizer"] = {{"coarse_points", o.coarse_points},       {"refine_points", o.refine_points},
                      {"refinement_levels", o.refinement_levels}, {"search_truncation", o.search_truncation},
                      {"final_truncation", o.final_truncation}, {"chi_min", o.chi_min},
                      {"chi_max", o.chi_max},                   {"eta0_min", o.eta0_min},
                      {"eta0_max", o.eta0_max}};
    j["oracle_truncation"] = c.oracle_truncation ? nlohmann::json(*c.oracle_truncation) : nlohmann::json(nullptr);
    j["output"] = c.output;
    j["format"] = c.format;
    j["workers"] = c.workers;
    j["timing"] = c.timing;
    return j;
}

namespace detail {

template <class T>
T get_value(const nlohmann::json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception& error) {
        throw ConfigParseError("config key '" + key + "': " + error.what());
    }
}

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) {
        throw ConfigParseError(where + " must be a JSON object");
    }
    for (const auto& item : j.items()) {
        if (!allowed.contains(item.key())) {
            throw ConfigParseError("unknown config key '" + item.key() + "' in " + where);
        }
    }
}

}  // namespace detail

/// Overlays the keys present in `j` onto `c`. A sidecar object holding a
/// "config" member is accepted as well.
inline void merge_json(RunConfig& c, const nlohmann::json& input) {
    const nlohmann::json& j = (input.is_object() && input.contains("config") && input["config"].is_object())
                                  ? input["config"]
                                  : input;
    detail::check_keys(j,
                       {"command", "figure", "chi", "eta0", "eta", "dark", "trade_off", "alpha", "alpha0",
                        "length_km", "delta_a", "delta_b", "n_swaps", "truncation", "kappa", "loss_base", "herald",
                        "sweep", "optimizer", "oracle_truncation", "output", "format", "workers", "timing"},
                       "config");
    using detail::get_value;
    auto number = [&](const char* key, double& field) {
        if (j.contains(key)) {
            field = get_value<double>(j[key], key);
        }
    };
    auto optional_number = [&](const char* key, std::optional<double>& field) {
        if (j.contains(key)) {
            field = j[key].is_null() ? std::nullopt : std::optional<double>(get_value<double>(j[key], key));
        }
    };
    auto integer = [&](const char* key, int& field) {
        if (j.contains(key)) {
            field = get_value<int>(j[key], key);
        }
    };
    auto text = [&](const char* key, std::string& field) {
        if (j.contains(key)) {
            field = get_value<std::string>(j[key], key);
        }
    };
    text("command", c.command);
    text("figure", c.figure);
    number("chi", c.chi);
    number("eta0", c.eta0);
    optional_number("eta", c.eta);
    optional_number("dark", c.dark);
    if (j.contains("trade_off")) {
        const auto& t = j["trade_off"];
        if (t.is_null()) {
            c.trade_off.reset();
        } else {
            detail::check_keys(t, {"a", "b"}, "trade_off");
            TradeOffConfig value;
            if (t.contains("a")) value.a = get_value<double>(t["a"], "trade_off.a");
            if (t.contains("b")) value.b = get_value<double>(t["b"], "trade_off.b");
            c.trade_off = value;
        }
    }
    number("alpha", c.alpha);
    number("alpha0", c.alpha0);
    number("length_km", c.length_km);
    number("delta_a", c.delta_a);
    number("delta_b", c.delta_b);
    if (j.contains("n_swaps")) {
        c.n_swaps = j["n_swaps"].is_array() ? get_value<std::vector<int>>(j["n_swaps"], "n_swaps")
                                            : std::vector<int>{get_value<int>(j["n_swaps"], "n_swaps")};
    }
    integer("truncation", c.truncation);
    number("kappa", c.kappa);
    text("loss_base", c.loss_base);
    text("herald", c.herald);
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        if (s.is_null()) {
            c.sweep.reset();
        } else {
            detail::check_keys(s, {"parameter", "from", "to", "steps"}, "sweep");
            SweepAxis axis = c.sweep.value_or(SweepAxis{});
            if (s.contains("parameter")) axis.parameter = get_value<std::string>(s["parameter"], "sweep.parameter");
            if (s.contains("from")) axis.from = get_value<double>(s["from"], "sweep.from");
            if (s.contains("to")) axis.to = get_value<double>(s["to"], "sweep.to");
            if (s.contains("steps")) axis.steps = get_value<int>(s["steps"], "sweep.steps");
            c.sweep = axis;
        }
    }
    if (j.contains("optimizer")) {
        const auto& o = j["optimizer"];
        detail::check_keys(o,
                           {"coarse_points", "refine_points", "refinement_levels", "search_truncation",
                            "final_truncation", "chi_min", "chi_max", "eta0_min", "eta0_max"},
                           "optimizer");
        auto& t = c.optimizer;
        if (o.contains("coarse_points")) t.coarse_points = get_value<int>(o["coarse_points"], "coarse_points");
        if (o.contains("refine_points")) t.refine_points = get_value<int>(o["refine_points"], "refine_points");
        if (o.contains("refinement_levels")) t.refinement_levels = get_value<int>(o["refinement_levels"], "refinement_levels");
        if (o.contains("search_truncation")) t.search_truncation = get_value<int>(o["search_truncation"], "search_truncation");
        if (o.contains("final_truncation")) t.final_truncation = get_value<int>(o["final_truncation"], "final_truncation");
        if (o.contains("chi_min")) t.chi_min = get_value<double>(o["chi_min"], "chi_min");
        if (o.contains("chi_max")) t.chi_max = get_value<double>(o["chi_max"], "chi_max");
        if (o.contains("eta0_min")) t.eta0_min = get_value<double>(o["eta0_min"], "eta0_min");
        if (o.contains("eta0_max")) t.eta0_max = get_value<double>(o["eta0_max"], "eta0_max");
    }
    if (j.contains("oracle_truncation")) {
        c.oracle_truncation = j["oracle_truncation"].is_null()
                                  ? std::nullopt
                                  : std::optional<int>(get_value<int>(j["oracle_truncation"], "oracle_truncation"));
    }
    text("output", c.output);
    text("format", c.format);
    integer("workers", c.workers);
    if (j.contains("timing")) {
        c.timing = get_value<bool>(j["timing"], "timing");
    }
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigParseError("cannot open config file " + path);
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& error) {
        throw ConfigParseError("config file " + path + ": " + error.what());
    }
}

/// "1,2,3" -> {1, 2, 3}
inline std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw ConfigParseError("expected a comma-separated integer list, got '" + text + "'");
        }
    }
    if (out.empty()) {
        throw ConfigParseError("empty integer list");
    }
    return out;
}

}  // namespace swapqkd::cli
