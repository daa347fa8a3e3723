#pragma once

// swapqkd command line. Exit codes: 0 ok, 1 domain or degenerate input,
// 2 parse error, 3 some sweep points failed (partial output written),
// 4 oracle-check deviation above 1e-9.

#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "swapqkd/cli/commands.hpp"
#include "swapqkd/cli/config.hpp"
#include "swapqkd/cli/format.hpp"
#include "swapqkd/errors.hpp"

namespace swapqkd::cli {

inline constexpr int kFormatVersion = 1;

namespace detail {

class Overrides {
public:
    template <class T>
    void add(CLI::App* app, const std::string& name, const std::string& help,
             std::function<void(RunConfig&, const T&)> apply) {
        auto value = std::make_shared<T>();
        CLI::Option* option = app->add_option(name, *value, help);
        appliers_.push_back([option, value, apply](RunConfig& c) {
            if (option->count() > 0) {
                apply(c, *value);
            }
        });
    }

    void flag(CLI::App* app, const std::string& name, const std::string& help, std::function<void(RunConfig&)> apply) {
        CLI::Option* option = app->add_flag(name, help);
        appliers_.push_back([option, apply](RunConfig& c) {
            if (option->count() > 0) {
                apply(c);
            }
        });
    }

    void apply(RunConfig& c) const {
        for (const auto& f : appliers_) {
            f(c);
        }
    }

private:
    std::vector<std::function<void(RunConfig&)>> appliers_;
};

struct DarkChoice {
    bool dark = false;
    bool trade_off = false;
};

inline void add_common(CLI::App* app, Overrides& o, DarkChoice& choice) {
    using D = double;
    using I = int;
    using S = std::string;
    o.add<D>(app, "--chi", "pair-production parameter chi", [](RunConfig& c, const D& v) { c.chi = v; });
    o.add<D>(app, "--eta0", "intrinsic detector efficiency", [](RunConfig& c, const D& v) { c.eta0 = v; });
    o.add<D>(app, "--eta", "effective per-detector efficiency (bypasses eta0 and fibre loss)",
             [](RunConfig& c, const D& v) { c.eta = v; });
    o.add<D>(app, "--dark", "dark-count probability per window", [&choice](RunConfig& c, const D& v) {
        c.dark = v;
        c.trade_off.reset();
        choice.dark = true;
    });
    o.flag(app, "--trade-off", "slave the dark count to eta0: p = A exp(B eta0)", [&choice](RunConfig& c) {
        if (!c.trade_off) {
            c.trade_off = TradeOffConfig{};
        }
        c.dark.reset();
        choice.trade_off = true;
    });
    o.add<D>(app, "--trade-off-a", "trade-off constant A (default 6.1e-7)", [&choice](RunConfig& c, const D& v) {
        c.trade_off = c.trade_off.value_or(TradeOffConfig{});
        c.trade_off->a = v;
        c.dark.reset();
        choice.trade_off = true;
    });
    o.add<D>(app, "--trade-off-b", "trade-off constant B (default 17)", [&choice](RunConfig& c, const D& v) {
        c.trade_off = c.trade_off.value_or(TradeOffConfig{});
        c.trade_off->b = v;
        c.dark.reset();
        choice.trade_off = true;
    });
    o.add<D>(app, "--alpha", "fibre loss, dB/km", [](RunConfig& c, const D& v) { c.alpha = v; });
    o.add<D>(app, "--alpha0", "distance-independent loss, dB", [](RunConfig& c, const D& v) { c.alpha0 = v; });
    o.add<D>(app, "--length,-l", "distance between A and B, km", [](RunConfig& c, const D& v) { c.length_km = v; });
    o.add<D>(app, "--delta-a", "rotator angle at A in units of pi (0.5 means pi/2)",
             [](RunConfig& c, const D& v) { c.delta_a = v; });
    o.add<D>(app, "--delta-b", "rotator angle at B in units of pi (0.5 means pi/2)",
             [](RunConfig& c, const D& v) { c.delta_b = v; });
    o.add<S>(app, "--n-swaps,-N", "number of swaps, or a list such as 1,2,3",
             [](RunConfig& c, const S& v) { c.n_swaps = parse_int_list(v); });
    o.add<I>(app, "--truncation,-t", "photon-number cutoff per detector index",
             [](RunConfig& c, const I& v) { c.truncation = v; });
    o.add<D>(app, "--kappa", "reconciliation efficiency", [](RunConfig& c, const D& v) { c.kappa = v; });
    o.add<S>(app, "--loss-base", "channel loss base: 10 (dB) or e", [](RunConfig& c, const S& v) { c.loss_base = v; });
    o.add<S>(app, "--herald", "click pattern required at every station", [](RunConfig& c, const S& v) { c.herald = v; });
    o.add<S>(app, "--sweep-param", "parameter to sweep", [](RunConfig& c, const S& v) {
        c.sweep = c.sweep.value_or(SweepAxis{});
        c.sweep->parameter = v;
    });
    o.add<D>(app, "--from", "sweep start", [](RunConfig& c, const D& v) {
        c.sweep = c.sweep.value_or(SweepAxis{});
        c.sweep->from = v;
    });
    o.add<D>(app, "--to", "sweep end", [](RunConfig& c, const D& v) {
        c.sweep = c.sweep.value_or(SweepAxis{});
        c.sweep->to = v;
    });
    o.add<I>(app, "--steps", "sweep points, ends included", [](RunConfig& c, const I& v) {
        c.sweep = c.sweep.value_or(SweepAxis{});
        c.sweep->steps = v;
    });
    o.add<I>(app, "--coarse-points", "optimizer coarse grid points per axis",
             [](RunConfig& c, const I& v) { c.optimizer.coarse_points = v; });
    o.add<I>(app, "--refinement-levels", "optimizer refinement levels",
             [](RunConfig& c, const I& v) { c.optimizer.refinement_levels = v; });
    o.add<I>(app, "--search-truncation", "truncation inside the optimizer search",
             [](RunConfig& c, const I& v) { c.optimizer.search_truncation = v; });
    o.add<I>(app, "--final-truncation", "truncation for the reported optimum",
             [](RunConfig& c, const I& v) { c.optimizer.final_truncation = v; });
    o.add<I>(app, "--oracle-truncation", "oracle truncation (must equal --truncation)",
             [](RunConfig& c, const I& v) { c.oracle_truncation = v; });
    o.add<S>(app, "--output,-o", "write <name>.csv and <name>.meta.json instead of stdout",
             [](RunConfig& c, const S& v) { c.output = v; });
    o.add<S>(app, "--format", "csv or json", [](RunConfig& c, const S& v) { c.format = v; });
    o.add<I>(app, "--workers,-j", "worker threads (default: SWAPQKD_WORKERS or hardware)",
             [](RunConfig& c, const I& v) { c.workers = v; });
    o.flag(app, "--no-timing", "write NA in wall-time columns", [](RunConfig& c) { c.timing = false; });
}

inline CommandOutput dispatch(const RunConfig& c) {
    if (c.command == "visibility") return cmd_visibility(c);
    if (c.command == "coincidence") return cmd_coincidence(c);
    if (c.command == "keyrate") return cmd_keyrate(c);
    if (c.command == "sweep") return cmd_sweep(c);
    if (c.command == "optimize") return cmd_optimize(c);
    if (c.command == "tgw") return cmd_tgw(c);
    if (c.command == "oracle-check") return cmd_oracle_check(c);
    if (c.command == "reproduce") return cmd_reproduce(c);
    throw ConfigParseError("unknown command '" + c.command + "'");
}

inline void write_table(std::ostream& out, const RunConfig& c, const Table& table) {
    if (c.format == "json") {
        out << table_to_json(table).dump(2) << '\n';
    } else {
        write_csv(out, table);
    }
}

inline void emit(const RunConfig& c, const CommandOutput& result, std::ostream& out) {
    if (c.output.empty()) {
        write_table(out, c, result.table);
        return;
    }
    const std::string data_path = c.output + (c.format == "json" ? ".json" : ".csv");
    {
        std::ofstream file(data_path, std::ios::binary);
        if (!file) {
            throw DomainError("cannot write " + data_path);
        }
        write_table(file, c, result.table);
    }
    nlohmann::json meta;
    meta["format_version"] = kFormatVersion;
    meta["tool"] = "swapqkd";
    meta["command"] = c.command;
    meta["figure"] = c.figure;
    meta["config"] = to_json(c);
    meta["columns"] = result.table.columns;
    meta["rows"] = result.table.rows.size();
    meta["exit_code"] = result.exit_code;
    meta["summary"] = result.summary;
    std::ofstream file(c.output + ".meta.json", std::ios::binary);
    if (!file) {
        throw DomainError("cannot write " + c.output + ".meta.json");
    }
    file << meta.dump(2) << '\n';
}

}  // namespace detail

/// Runs one invocation; argv[0] is the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Concatenated entanglement swapping: visibility, key rates and optimization"};
    app.require_subcommand(0, 1);
    std::string top_config;
    app.add_option("--config", top_config, "JSON RunConfig; its \"command\" key selects the subcommand");

    struct Sub {
        CLI::App* app;
        std::string config;
        std::string figure;
        detail::Overrides overrides;
        detail::DarkChoice choice;
    };
    const std::vector<std::pair<std::string, std::string>> commands{
        {"visibility", "visibility and coincidence sums per chain length"},
        {"coincidence", "all 16 outer coincidence probabilities"},
        {"keyrate", "visibility, QBER and key rates at one operating point"},
        {"sweep", "key-rate records along one parameter axis"},
        {"optimize", "maximize the key rate over (chi, eta0)"},
        {"tgw", "repeaterless TGW bound"},
        {"oracle-check", "compare the closed form with the Fock-space oracle (N = 1)"},
        {"reproduce", "data behind a figure"}};
    std::vector<std::unique_ptr<Sub>> subs;
    for (const auto& [name, help] : commands) {
        auto sub = std::make_unique<Sub>();
        sub->app = app.add_subcommand(name, help);
        sub->app->add_option("--config", sub->config, "JSON RunConfig (a .meta.json sidecar also works)");
        if (name == "reproduce") {
            sub->app->add_option("figure", sub->figure, "figure id")->required()->check(CLI::IsMember(figure_ids()));
        }
        detail::add_common(sub->app, sub->overrides, sub->choice);
        subs.push_back(std::move(sub));
    }

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kParseError;
    }

    try {
        Sub* active = nullptr;
        for (auto& sub : subs) {
            if (sub->app->parsed()) {
                active = sub.get();
            }
        }
        nlohmann::json file_config;
        const std::string& config_path = active ? active->config : top_config;
        if (!config_path.empty()) {
            file_config = read_json_file(config_path);
        }
        RunConfig c;
        if (active) {
            c.command = active->app->get_name();
        } else if (file_config.is_object()) {
            const auto& inner = file_config.contains("config") ? file_config["config"] : file_config;
            if (!inner.contains("command")) {
                throw ConfigParseError("config file has no \"command\" key and no subcommand was given");
            }
            c.command = inner["command"].get<std::string>();
        } else {
            err << app.help();
            return kParseError;
        }
        std::string figure = active ? active->figure : "";
        if (figure.empty() && file_config.is_object()) {
            const auto& inner = file_config.contains("config") ? file_config["config"] : file_config;
            if (inner.contains("figure") && inner["figure"].is_string()) {
                figure = inner["figure"].get<std::string>();
            }
        }
        if (c.command == "optimize") {
            c.dark.reset();
            c.trade_off = TradeOffConfig{};
        }
        if (c.command == "reproduce") {
            apply_figure_defaults(c, figure);
        }
        if (!file_config.is_null()) {
            const std::string command = c.command;
            merge_json(c, file_config);
            c.command = command;
        }
        c.figure = c.command == "reproduce" ? figure : "";
        if (active) {
            active->overrides.apply(c);
            if (active->choice.dark && active->choice.trade_off) {
                throw DomainError("--dark and --trade-off are mutually exclusive");
            }
        }
        c.validate();
        const auto result = detail::dispatch(c);
        detail::emit(c, result, out);
        if (result.summary.contains("max_abs")) {
            err << "max_abs=" << format_number(result.summary["max_abs"].get<double>())
                << " rms=" << format_number(result.summary["rms"].get<double>()) << '\n';
        }
        return result.exit_code;
    } catch (const ConfigParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kParseError;
    } catch (const nlohmann::json::exception& e) {
        err << "parse error: " << e.what() << '\n';
        return kParseError;
    } catch (const DegenerateInputError& e) {
        err << "degenerate input: " << e.what() << '\n';
        return kDomainError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    }
}

inline int run(int argc, char** argv) {
    return run(std::vector<std::string>(argv, argv + argc));
}

}  // namespace swapqkd::cli
