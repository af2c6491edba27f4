// table.hpp — tabular results with units and run metadata, emitted as CSV or
// JSON with stable, reproducible formatting.

#pragma once

#include <json.hpp>

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace nvsim {

struct Column {
    std::string name;
    std::string unit;
};

struct ResultTable {
    std::vector<Column> columns;
    std::vector<std::vector<double>> rows;
    nlohmann::json metadata;

    void validate() const {
        if (columns.empty())
            throw std::invalid_argument("ResultTable: no columns");
        for (const auto& c : columns)
            if (c.unit.empty())
                throw std::invalid_argument("ResultTable: column '" + c.name + "' has no unit");
        for (const auto& r : rows)
            if (r.size() != columns.size())
                throw std::invalid_argument("ResultTable: row width mismatch");
    }
};

enum class OutputFormat { csv, json };

namespace detail {

inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace detail

// CSV: UTF-8, header "name(unit)", '.' decimal, 12 significant digits.
inline std::string emit_csv(const ResultTable& table) {
    table.validate();
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += table.columns[i].name + "(" + table.columns[i].unit + ")";
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += detail::format_value(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline std::string emit_json(const ResultTable& table) {
    table.validate();
    nlohmann::json j;
    j["metadata"] = table.metadata;
    j["columns"] = nlohmann::json::array();
    for (const auto& c : table.columns)
        j["columns"].push_back({{"name", c.name}, {"unit", c.unit}});
    j["rows"] = table.rows;
    return j.dump(2) + "\n";
}

inline std::string emit(const ResultTable& table, OutputFormat format) {
    return format == OutputFormat::csv ? emit_csv(table) : emit_json(table);
}

}  // namespace nvsim
