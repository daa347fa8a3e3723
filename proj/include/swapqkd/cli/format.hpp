#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

namespace swapqkd::cli {

/// Shortest round-trip text; scientific below 1e-4 in magnitude, "NA" when
/// not finite.
inline std::string format_number(double x) {
    if (!std::isfinite(x)) {
        return "NA";
    }
    char buffer[64];
    const double magnitude = std::fabs(x);
    std::chars_format style = std::chars_format::fixed;
    if ((magnitude != 0.0 && magnitude < 1e-4) || magnitude >= 1e16) {
        style = std::chars_format::scientific;
    }
    const auto [end, error] = std::to_chars(buffer, buffer + sizeof buffer, x, style);
    if (error != std::errc{}) {
        return "NA";
    }
    return {buffer, end};
}

inline std::string format_number(int x) { return std::to_string(x); }
inline std::string format_number(long x) { return std::to_string(x); }
inline std::string format_bool(bool x) { return x ? "true" : "false"; }

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

inline std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(text);
    }
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"') {
            quoted += '"';
        }
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

inline void write_csv(std::ostream& out, const Table& table) {
    auto line = [&out](const std::vector<std::string>& fields) {
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (k > 0) {
                out << ',';
            }
            out << csv_field(fields[k]);
        }
        out << "\r\n";
    };
    line(table.columns);
    for (const auto& row : table.rows) {
        line(row);
    }
}

/// Rows as JSON objects; numeric-looking cells become numbers, NA becomes null.
inline nlohmann::json table_to_json(const Table& table) {
    auto cell = [](const std::string& text) -> nlohmann::json {
        if (text == "NA") {
            return nullptr;
        }
        if (text == "true" || text == "false") {
            return text == "true";
        }
        // click patterns such as "0101" stay text
        if (text.size() > 1 && text[0] == '0' && text[1] != '.') {
            return text;
        }
        double value = 0.0;
        const auto [end, error] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (error == std::errc{} && end == text.data() + text.size() && !text.empty()) {
            return value;
        }
        return text;
    };
    auto rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json object = nlohmann::json::object();
        for (std::size_t k = 0; k < table.columns.size() && k < row.size(); ++k) {
            object[table.columns[k]] = cell(row[k]);
        }
        rows.push_back(std::move(object));
    }
    return rows;
}

}  // namespace swapqkd::cli
