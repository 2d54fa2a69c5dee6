#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "probpnn/calendar.hpp"
#include "probpnn/error.hpp"

namespace probpnn {

/// Univariate series on a fixed time grid.
struct TimeSeries {
    std::string name;
    Timestamp start{};
    Duration step{std::chrono::hours{1}};
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    Timestamp timestamp(std::size_t i) const { return start + step * static_cast<long long>(i); }
    Timestamp end() const { return timestamp(values.empty() ? 0 : values.size() - 1); }

    /// Index of an exact grid timestamp, if inside the series.
    std::optional<std::size_t> index_of(Timestamp ts) const {
        if (ts < start || step.count() <= 0) return std::nullopt;
        auto offset = (ts - start).count();
        if (offset % step.count() != 0) return std::nullopt;
        auto idx = static_cast<std::size_t>(offset / step.count());
        if (idx >= values.size()) return std::nullopt;
        return idx;
    }

    /// Throws DataError unless the series is non-empty, finite and has a positive step.
    void validate() const {
        if (values.empty()) throw DataError("series '" + name + "' is empty");
        if (step.count() <= 0) throw DataError("series '" + name + "' has non-positive step");
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!std::isfinite(values[i]))
                throw DataError("series '" + name + "' has non-finite value at index " + std::to_string(i));
    }
};

struct CsvOptions {
    char delimiter = ',';
    /// Values use ',' as decimal separator (the UCI electricity export does).
    bool decimal_comma = false;
};

/// Parsed CSV: header plus rows of raw cells, with source line numbers.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;

    std::size_t column_index(std::string_view column) const {
        auto it = std::find(header.begin(), header.end(), column);
        if (it == header.end()) throw DataError("missing column '" + std::string(column) + "' at row 1");
        return static_cast<std::size_t>(it - header.begin());
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"') {
            if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else {
                quoted = !quoted;
            }
        } else if (c == delimiter && !quoted) {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

inline std::optional<double> parse_double(std::string cell, bool decimal_comma) {
    auto first = cell.find_first_not_of(" \t");
    if (first == std::string::npos) return std::nullopt;
    cell = cell.substr(first, cell.find_last_not_of(" \t") - first + 1);
    if (decimal_comma) std::replace(cell.begin(), cell.end(), ',', '.');
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
    return value;
}

}  // namespace detail

inline CsvTable read_csv(const std::string& path, const CsvOptions& options = {}) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_csv_line(line, options.delimiter);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        table.rows.push_back(std::move(cells));
        table.line_numbers.push_back(line_no);
    }
    if (table.header.empty()) throw DataError("'" + path + "' has no header row");
    return table;
}

/// Extracts one value column as a TimeSeries. Rows are sorted by time; the
/// step must be constant and timestamps unique. Errors name the CSV row
/// (1-based file line, header is row 1).
inline TimeSeries series_from_table(const CsvTable& table, std::string_view column,
                                    std::string_view timestamp_column, const CsvOptions& options = {}) {
    const auto ts_col = table.column_index(timestamp_column);
    const auto val_col = table.column_index(column);
    struct Row {
        Timestamp ts;
        double value;
        std::size_t line;
    };
    std::vector<Row> rows;
    rows.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const auto line = table.line_numbers[r];
        if (cells.size() <= std::max(ts_col, val_col))
            throw DataError("missing cell at row " + std::to_string(line));
        Timestamp ts;
        try {
            ts = parse_timestamp(cells[ts_col]);
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " at row " + std::to_string(line));
        }
        auto value = detail::parse_double(cells[val_col], options.decimal_comma);
        if (!value || !std::isfinite(*value))
            throw DataError("cannot parse value '" + cells[val_col] + "' at row " + std::to_string(line));
        rows.push_back({ts, *value, line});
    }
    if (rows.empty()) throw DataError("no data rows for column '" + std::string(column) + "'");
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.ts < b.ts; });

    TimeSeries ts;
    ts.name = std::string(column);
    ts.start = rows.front().ts;
    ts.values.reserve(rows.size());
    ts.values.push_back(rows.front().value);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto delta = rows[i].ts - rows[i - 1].ts;
        if (delta.count() == 0) throw DataError("duplicate timestamp at row " + std::to_string(rows[i].line));
        if (i == 1) {
            ts.step = delta;
        } else if (delta != ts.step) {
            throw DataError("non-constant step at row " + std::to_string(rows[i].line));
        }
        ts.values.push_back(rows[i].value);
    }
    return ts;
}

inline TimeSeries load_csv(const std::string& path, std::string_view column, std::string_view timestamp_column,
                           const CsvOptions& options = {}) {
    return series_from_table(read_csv(path, options), column, timestamp_column, options);
}

/// Writes one or more equally gridded series as a CSV with a "timestamp" column.
inline void write_csv(const std::string& path, const std::vector<TimeSeries>& series) {
    if (series.empty()) throw ConfigError("nothing to write");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "timestamp";
    for (const auto& s : series) out << ',' << s.name;
    out << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < series.front().size(); ++i) {
        out << format_timestamp(series.front().timestamp(i));
        for (const auto& s : series) out << ',' << s.values.at(i);
        out << '\n';
    }
}

enum class Aggregation { Mean, Sum };

/// Aggregates a sub-hourly series to hourly buckets. Incomplete hours at
/// either end are dropped; an hourly series is returned unchanged.
inline TimeSeries resample_hourly(const TimeSeries& ts, Aggregation agg) {
    using namespace std::chrono;
    const auto hour = duration_cast<Duration>(hours{1});
    if (ts.step.count() <= 0 || ts.step > hour || hour.count() % ts.step.count() != 0)
        throw DataError("step of " + std::to_string(ts.step.count()) + " s does not divide one hour");
    if (ts.step == hour) return ts;
    const auto per_hour = static_cast<std::size_t>(hour.count() / ts.step.count());

    // first sample that sits on an hour boundary
    std::size_t first = 0;
    while (first < ts.size() && floor<hours>(ts.timestamp(first)) != ts.timestamp(first)) ++first;

    TimeSeries out;
    out.name = ts.name;
    out.step = hour;
    out.start = first < ts.size() ? ts.timestamp(first) : ts.start;
    for (std::size_t i = first; i + per_hour <= ts.size(); i += per_hour) {
        double acc = 0.0;
        for (std::size_t j = 0; j < per_hour; ++j) acc += ts.values[i + j];
        out.values.push_back(agg == Aggregation::Mean ? acc / static_cast<double>(per_hour) : acc);
    }
    if (out.values.empty()) throw DataError("series '" + ts.name + "' has no complete hour");
    return out;
}

enum class DatasetStyle { Electricity, Traffic };

inline DatasetStyle parse_dataset_style(std::string_view name) {
    if (name == "electricity") return DatasetStyle::Electricity;
    if (name == "traffic") return DatasetStyle::Traffic;
    throw ConfigError("unknown dataset style '" + std::string(name) + "'");
}

inline std::string to_string(DatasetStyle style) {
    return style == DatasetStyle::Electricity ? "electricity" : "traffic";
}

/// Per-timestep calendar encodings, row-major [timestep x channel].
struct ExogenousFeatures {
    std::vector<std::string> channels;
    std::vector<double> data;

    std::size_t channel_count() const { return channels.size(); }
    std::size_t size() const { return channels.empty() ? 0 : data.size() / channels.size(); }
    double at(std::size_t t, std::size_t c) const { return data[t * channels.size() + c]; }

    std::size_t channel_index(std::string_view name) const {
        auto it = std::find(channels.begin(), channels.end(), name);
        if (it == channels.end()) throw ConfigError("no exogenous channel '" + std::string(name) + "'");
        return static_cast<std::size_t>(it - channels.begin());
    }
};

inline std::vector<std::string> exogenous_channels(DatasetStyle style) {
    if (style == DatasetStyle::Electricity) return {"sin_hour", "cos_hour", "sin_month", "cos_month", "weekend_flag"};
    return {"sin_hour", "cos_hour", "weekend_flag"};
}

inline ExogenousFeatures encode_exogenous(const TimeSeries& ts, DatasetStyle style) {
    ExogenousFeatures exo;
    exo.channels = exogenous_channels(style);
    exo.data.reserve(ts.size() * exo.channels.size());
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto t = ts.timestamp(i);
        const double hour_angle = two_pi * hour_of_day(t) / 24.0;
        exo.data.push_back(std::sin(hour_angle));
        exo.data.push_back(std::cos(hour_angle));
        if (style == DatasetStyle::Electricity) {
            const double month_angle = two_pi * (month_of_year(t) - 1) / 12.0;
            exo.data.push_back(std::sin(month_angle));
            exo.data.push_back(std::cos(month_angle));
        }
        exo.data.push_back(is_weekend(t) ? 1.0 : 0.0);
    }
    return exo;
}

}  // namespace probpnn
