#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "probpnn/error.hpp"
#include "probpnn/evaluate.hpp"
#include "probpnn/metrics.hpp"

namespace probpnn {

inline constexpr int kReportSchemaVersion = 1;

inline const std::vector<std::string>& report_metrics() {
    static const std::vector<std::string> names{"ncrps", "npl", "dicr", "nmae"};
    return names;
}

inline double metric_value(const SeriesScores& s, const std::string& metric) {
    if (metric == "ncrps") return s.ncrps;
    if (metric == "npl") return s.npl;
    if (metric == "dicr") return s.dicr;
    if (metric == "nmae") return s.nmae;
    if (metric == "training_seconds") return s.training_seconds;
    throw ConfigError("unknown metric '" + metric + "'");
}

struct SeriesReport {
    std::string name;
    double y_max = 0.0;
    std::map<std::string, SeriesScores> scores;  // by method
};

/// Per-series scores and ranks for every method, plus averages over series.
struct EvaluationReport {
    std::vector<std::string> methods;
    std::vector<SeriesReport> series;

    /// metric -> method -> rank within one series (1 = best, ties averaged).
    std::map<std::string, std::map<std::string, double>> ranks(const SeriesReport& s) const {
        std::map<std::string, std::map<std::string, double>> out;
        for (const auto& metric : report_metrics()) {
            std::vector<double> row;
            for (const auto& m : methods) row.push_back(metric_value(s.scores.at(m), metric));
            const auto r = rank_row(row);
            for (std::size_t i = 0; i < methods.size(); ++i) out[metric][methods[i]] = r[i];
        }
        return out;
    }

    SeriesScores average(const std::string& method) const {
        SeriesScores a;
        if (series.empty()) return a;
        for (const auto& s : series) {
            const auto& x = s.scores.at(method);
            a.ncrps += x.ncrps;
            a.npl += x.npl;
            a.dicr += x.dicr;
            a.nmae += x.nmae;
            a.training_seconds += x.training_seconds;
        }
        const double n = static_cast<double>(series.size());
        a.ncrps /= n;
        a.npl /= n;
        a.dicr /= n;
        a.nmae /= n;
        a.training_seconds /= n;
        return a;
    }

    std::map<std::string, std::map<std::string, double>> average_ranks() const {
        std::map<std::string, std::map<std::string, double>> out;
        if (series.empty()) return out;
        for (const auto& metric : report_metrics()) {
            std::vector<std::vector<double>> table;
            for (const auto& s : series) {
                std::vector<double> row;
                for (const auto& m : methods) row.push_back(metric_value(s.scores.at(m), metric));
                table.push_back(std::move(row));
            }
            const auto r = rank_methods(table);
            for (std::size_t i = 0; i < methods.size(); ++i) out[metric][methods[i]] = r[i];
        }
        return out;
    }
};

inline nlohmann::json to_json(const SeriesScores& s) {
    return {{"ncrps", s.ncrps}, {"npl", s.npl}, {"dicr", s.dicr}, {"nmae", s.nmae}, {"training_seconds", s.training_seconds}};
}

inline nlohmann::json to_json(const EvaluationReport& r) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["methods"] = r.methods;
    j["metrics"] = report_metrics();
    j["series"] = nlohmann::json::array();
    for (const auto& s : r.series) {
        nlohmann::json e;
        e["name"] = s.name;
        e["y_max"] = s.y_max;
        for (const auto& m : r.methods) e["scores"][m] = to_json(s.scores.at(m));
        e["ranks"] = r.ranks(s);
        j["series"].push_back(std::move(e));
    }
    j["averages"] = nlohmann::json::object();
    for (const auto& m : r.methods) j["averages"][m] = to_json(r.average(m));
    j["average_ranks"] = r.average_ranks();
    return j;
}

/// Structural check of a report document; throws DataError naming the first problem.
inline void validate_report_json(const nlohmann::json& j) {
    auto fail = [](const std::string& what) { throw DataError("invalid report: " + what); };
    if (!j.is_object()) fail("not an object");
    if (j.value("schema_version", 0) != kReportSchemaVersion) fail("unsupported schema_version");
    for (const char* key : {"methods", "metrics", "series"})
        if (!j.contains(key) || !j[key].is_array()) fail(std::string("'") + key + "' must be an array");
    for (const char* key : {"averages", "average_ranks"})
        if (!j.contains(key) || !j[key].is_object()) fail(std::string("'") + key + "' must be an object");
    const auto methods = j["methods"].get<std::vector<std::string>>();
    const auto metrics = j["metrics"].get<std::vector<std::string>>();
    if (methods.empty()) fail("no methods");
    const double n_methods = static_cast<double>(methods.size());
    const double rank_sum = n_methods * (n_methods + 1.0) / 2.0;
    auto check_scores = [&](const nlohmann::json& s, const std::string& where) {
        for (const auto& m : methods) {
            if (!s.contains(m) || !s[m].is_object()) fail(where + ": missing method '" + m + "'");
            for (const auto& metric : metrics)
                if (!s[m].contains(metric) || !s[m][metric].is_number()) fail(where + ": missing " + metric);
            if (!s[m].contains("training_seconds")) fail(where + ": missing training_seconds");
        }
    };
    for (const auto& s : j["series"]) {
        if (!s.contains("name") || !s["name"].is_string()) fail("series entry without name");
        const std::string name = s["name"];
        if (!s.contains("y_max") || !(s["y_max"].get<double>() > 0.0)) fail(name + ": y_max must be positive");
        if (!s.contains("scores")) fail(name + ": missing scores");
        check_scores(s["scores"], name);
        if (!s.contains("ranks")) fail(name + ": missing ranks");
        for (const auto& metric : metrics) {
            if (!s["ranks"].contains(metric)) fail(name + ": missing ranks for " + metric);
            double sum = 0.0;
            for (const auto& m : methods) {
                const double r = s["ranks"][metric].at(m).get<double>();
                if (r < 1.0 || r > n_methods) fail(name + ": rank out of range");
                sum += r;
            }
            if (std::fabs(sum - rank_sum) > 1e-9) fail(name + ": ranks of " + metric + " are not a ranking");
        }
    }
    check_scores(j["averages"], "averages");
    for (const auto& metric : metrics)
        for (const auto& m : methods)
            if (!j["average_ranks"].contains(metric) || !j["average_ranks"][metric].contains(m))
                fail("average_ranks: missing " + metric + " for " + m);
}

/// Copy of a document without wall-clock fields, for reproducibility comparisons.
inline nlohmann::json strip_timing(nlohmann::json j) {
    if (j.is_object()) {
        j.erase("training_seconds");
        j.erase("seconds");
        for (auto& [k, v] : j.items()) v = strip_timing(v);
    } else if (j.is_array()) {
        for (auto& v : j) v = strip_timing(v);
    }
    return j;
}

/// One row per (series, method, metric), training time included.
inline void write_metrics_long_csv(const std::string& path, const EvaluationReport& r) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.precision(17);
    out << "series,method,metric,value\n";
    for (const auto& s : r.series)
        for (const auto& m : r.methods) {
            for (const auto& metric : report_metrics())
                out << s.name << ',' << m << ',' << metric << ',' << metric_value(s.scores.at(m), metric) << '\n';
            out << s.name << ',' << m << ",training_seconds," << s.scores.at(m).training_seconds << '\n';
        }
}

}  // namespace probpnn
