#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcpurify/errors.hpp"

namespace tcpurify::cli {

// 17 significant digits, shortest exponent form, independent of the locale.
inline std::string format_real(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    if (ec != std::errc{}) throw NumericError("cannot format number");
    return std::string(buf, ptr);
}

// A cell is either text or a real; empty text renders as an empty field.
struct Cell {
    std::string text;
    double real = 0.0;
    bool is_real = false;

    Cell(double x) : real(x), is_real(true) {}
    Cell(std::string s) : text(std::move(s)) {}
    Cell(const char* s) : text(s) {}
    static Cell integer(long long v) { return Cell{std::to_string(v)}; }
    static Cell empty() { return Cell{std::string{}}; }
};

class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add(std::vector<Cell> row) {
        if (row.size() != columns_.size()) throw NumericError("row width does not match header");
        rows_.push_back(std::move(row));
    }

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }

    std::string to_csv() const {
        std::string out;
        for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
        out += '\n';
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += ',';
                out += row[i].is_real ? format_real(row[i].real) : row[i].text;
            }
            out += '\n';
        }
        return out;
    }

    nlohmann::json to_json_rows() const {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : rows_) {
            nlohmann::json obj = nlohmann::json::object();
            for (std::size_t i = 0; i < row.size(); ++i) {
                const Cell& c = row[i];
                if (c.is_real) obj[columns_[i]] = std::isfinite(c.real) ? nlohmann::json(c.real) : nlohmann::json();
                else if (c.text.empty()) obj[columns_[i]] = nullptr;
                else obj[columns_[i]] = c.text;
            }
            rows.push_back(std::move(obj));
        }
        return rows;
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

// Writes to `path`, or standard output when empty.
inline void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << content;
    if (!out) throw NumericError("failed writing '" + path + "'");
}

} // namespace tcpurify::cli
