#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "entroport/config.hpp"
#include "entroport/errors.hpp"
#include "entroport/market_path.hpp"
#include "entroport/simplex.hpp"

namespace entroport {

enum class TableMode { price, capitalization };

/// Date-aligned positive values per ticker, pivoted from the long CSV
/// format. Dates are opaque ordered labels in first-appearance order.
struct PriceTable {
    std::vector<std::string> tickers;
    std::vector<std::string> dates;
    std::vector<std::vector<double>> values; // [date][ticker]
    TableMode mode = TableMode::price;
    std::size_t dropped_dates = 0; // dates discarded for missing cells
};

/// Read `date,ticker,value` rows and pivot. Dates missing any ticker are
/// dropped and counted. Nonpositive values and malformed rows are errors.
inline PriceTable ingest_csv(std::istream& in, TableMode mode = TableMode::price) {
    PriceTable table;
    table.mode = mode;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> date_order;
    std::map<std::string, std::size_t> date_index, ticker_index;
    std::vector<std::map<std::size_t, double>> cells; // per date: ticker -> value

    bool header_checked = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (KeyValueConfig::trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string date, ticker, value_text;
        if (!std::getline(ss, date, ',') || !std::getline(ss, ticker, ',') ||
            !std::getline(ss, value_text)) {
            throw DataError("csv line " + std::to_string(line_no) +
                            ": expected date,ticker,value");
        }
        date = KeyValueConfig::trim(date);
        ticker = KeyValueConfig::trim(ticker);
        value_text = KeyValueConfig::trim(value_text);
        if (!header_checked) {
            header_checked = true;
            if (date == "date" && ticker == "ticker") continue; // header row
        }
        double value = 0.0;
        try {
            std::size_t pos = 0;
            value = std::stod(value_text, &pos);
            if (pos != value_text.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw DataError("csv line " + std::to_string(line_no) + ": unparseable value '" +
                            value_text + "'");
        }
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw DataError("csv line " + std::to_string(line_no) + ": nonpositive value for " +
                            ticker + " at " + date);
        }
        auto [dit, dnew] = date_index.try_emplace(date, date_order.size());
        if (dnew) {
            date_order.push_back(date);
            cells.emplace_back();
        }
        auto [tit, tnew] = ticker_index.try_emplace(ticker, ticker_index.size());
        if (tnew) table.tickers.push_back(ticker);
        if (!cells[dit->second].emplace(tit->second, value).second) {
            throw DataError("csv line " + std::to_string(line_no) + ": duplicate cell for " +
                            ticker + " at " + date);
        }
    }
    if (date_order.empty()) throw DataError("csv: no data rows");
    if (table.tickers.size() < 1) throw DataError("csv: no tickers");

    const std::size_t n = table.tickers.size();
    for (std::size_t d = 0; d < date_order.size(); ++d) {
        if (cells[d].size() != n) {
            ++table.dropped_dates;
            continue;
        }
        std::vector<double> row(n);
        for (const auto& [tidx, v] : cells[d]) row[tidx] = v;
        table.values.push_back(std::move(row));
        table.dates.push_back(date_order[d]);
    }
    if (table.values.empty()) {
        throw DataError("csv: every date is missing at least one ticker");
    }
    return table;
}

inline PriceTable ingest_csv_file(const std::string& path, TableMode mode = TableMode::price) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);
    return ingest_csv(in, mode);
}

/// Long-format export, lossless round trip at 17 significant digits.
inline void write_table_csv(const PriceTable& table, std::ostream& out) {
    out << "date,ticker,value\n";
    char buf[64];
    for (std::size_t d = 0; d < table.dates.size(); ++d) {
        for (std::size_t t = 0; t < table.tickers.size(); ++t) {
            std::snprintf(buf, sizeof(buf), "%.17g", table.values[d][t]);
            out << table.dates[d] << ',' << table.tickers[t] << ',' << buf << '\n';
        }
    }
}

/// Turn a table into a market path. Capitalization mode normalizes each
/// date directly. Price mode synthesizes capitalizations from the given
/// initial weights (equal weights when omitted): X_i(t) = w_i P_i(t)/P_i(0),
/// so mu(0) equals the declared weights exactly and later weights evolve by
/// relative returns.
inline MarketPath to_market_path(const PriceTable& table,
                                 const std::vector<double>& initial_weights = {}) {
    const std::size_t n = table.tickers.size();
    if (table.mode == TableMode::capitalization) {
        if (!initial_weights.empty()) {
            throw DataError("to_market_path: initial weights apply to price mode only; "
                            "capitalization mode derives them from the data");
        }
        return MarketPath::from_caps(table.values, table.dates);
    }
    std::vector<double> w0 = initial_weights;
    if (w0.empty()) {
        w0.assign(n, 1.0 / static_cast<double>(n));
    }
    if (w0.size() != n) {
        throw DataError("to_market_path: initial weights dimension mismatch");
    }
    const SimplexVector check{std::vector<double>(w0)}; // validates the weights
    if (!check.strictly_positive()) {
        throw DataError("to_market_path: price mode needs strictly positive initial weights");
    }
    std::vector<std::vector<double>> caps(table.values.size(), std::vector<double>(n));
    for (std::size_t d = 0; d < table.values.size(); ++d) {
        for (std::size_t i = 0; i < n; ++i) {
            caps[d][i] = check[i] * table.values[d][i] / table.values[0][i];
        }
    }
    return MarketPath::from_caps(std::move(caps), table.dates);
}

} // namespace entroport
