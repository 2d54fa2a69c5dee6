#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "probpnn/config.hpp"
#include "probpnn/diff/param_store.hpp"
#include "probpnn/dist.hpp"
#include "probpnn/evaluate.hpp"
#include "probpnn/psf.hpp"
#include "probpnn/report.hpp"
#include "probpnn/rollstats.hpp"
#include "probpnn/synthetic.hpp"
#include "probpnn/timeseries.hpp"
#include "probpnn/train.hpp"
#include "probpnn/windows.hpp"

namespace probpnn {

namespace fs = std::filesystem;

enum class YMaxMode { TestMax, TrainMax, GlobalMax };

inline YMaxMode parse_ymax_mode(std::string_view name) {
    if (name == "test_max") return YMaxMode::TestMax;
    if (name == "train_max") return YMaxMode::TrainMax;
    if (name == "global_max") return YMaxMode::GlobalMax;
    throw ConfigError("unknown y_max mode '" + std::string(name) + "'");
}

inline std::string to_string(YMaxMode m) {
    switch (m) {
        case YMaxMode::TestMax: return "test_max";
        case YMaxMode::TrainMax: return "train_max";
        case YMaxMode::GlobalMax: return "global_max";
    }
    return "test_max";
}

inline const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> names{"probpnn_sigma", "probpnn_sigma_squared", "psf", "climatology"};
    return names;
}

inline bool is_probpnn_method(const std::string& m) { return m.rfind("probpnn_", 0) == 0; }

inline Variant method_variant(const std::string& m) {
    return m == "probpnn_sigma_squared" ? Variant::SigmaSquared : Variant::Sigma;
}

struct DatasetSpec {
    std::string path;  // resolved against the config file's directory
    std::string timestamp_column = "timestamp";
    std::vector<std::string> columns;  // empty: every non-timestamp column
    char delimiter = ',';
    bool decimal_comma = false;
    std::optional<Aggregation> resample;
};

struct RunConfig {
    std::vector<DatasetSpec> datasets;
    std::optional<std::vector<std::string>> series;  // unset: all loaded series
    DatasetStyle style = DatasetStyle::Electricity;
    std::optional<Timestamp> train_start;  // unset: the series start
    Timestamp train_end{};
    Timestamp test_start{};
    Timestamp test_end{};
    std::vector<std::string> methods{"probpnn_sigma", "probpnn_sigma_squared", "psf"};
    ProbPNNConfig model;
    CalendarGrouping psf_grouping{GroupingKind::HourOfDay};
    std::size_t train_stride = 1;
    std::size_t test_stride = 24;
    std::optional<std::size_t> warmup;  // steps; default one statistics window
    std::size_t ensemble_size = 1000;
    YMaxMode y_max = YMaxMode::TestMax;
    std::uint64_t seed = 0;
    std::size_t jobs = 0;  // 0: hardware concurrency
    std::string output_dir = "out";

    std::size_t warmup_steps() const { return warmup.value_or(model.window_days * 24); }

    void validate() const {
        if (datasets.empty()) throw ConfigError("no datasets configured");
        if (series && series->empty()) throw ConfigError("no series selected");
        if (train_start && !(*train_start < train_end)) throw ConfigError("train_start must precede train_end");
        if (!(train_end < test_start)) throw ConfigError("train_end must precede test_start");
        if (test_end < test_start) throw ConfigError("test_end must not precede test_start");
        if (methods.empty()) throw ConfigError("no methods requested");
        std::set<std::string> seen;
        for (const auto& m : methods) {
            if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
                throw ConfigError("unknown method '" + m + "'");
            if (!seen.insert(m).second) throw ConfigError("method '" + m + "' listed twice");
        }
        if (train_stride == 0 || test_stride == 0) throw ConfigError("strides must be positive");
        if (ensemble_size < 2) throw ConfigError("ensemble_size must be at least 2");
        if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
        model.validate();
    }
};

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["datasets"] = nlohmann::json::array();
    for (const auto& d : c.datasets) {
        nlohmann::json e{{"path", d.path},
                         {"timestamp_column", d.timestamp_column},
                         {"delimiter", std::string(1, d.delimiter)},
                         {"decimal_comma", d.decimal_comma}};
        if (!d.columns.empty()) e["columns"] = d.columns;
        if (d.resample) e["resample"] = *d.resample == Aggregation::Mean ? "mean" : "sum";
        j["datasets"].push_back(std::move(e));
    }
    if (c.series) j["series"] = *c.series;
    j["dataset_style"] = to_string(c.style);
    if (c.train_start) j["train_start"] = format_timestamp(*c.train_start);
    j["train_end"] = format_timestamp(c.train_end);
    j["test_start"] = format_timestamp(c.test_start);
    j["test_end"] = format_timestamp(c.test_end);
    j["methods"] = c.methods;
    j["model"] = to_json(c.model);
    j["psf_grouping"] = to_string(c.psf_grouping.kind);
    j["train_stride"] = c.train_stride;
    j["test_stride"] = c.test_stride;
    j["warmup"] = c.warmup_steps();
    j["ensemble_size"] = c.ensemble_size;
    j["y_max"] = to_string(c.y_max);
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["output_dir"] = c.output_dir;
    return j;
}

/// Relative dataset paths resolve against `base_dir`.
inline RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir = {}) {
    RunConfig c;
    try {
        if (!j.is_object()) throw ConfigError("run config must be a JSON object");
        if (!j.contains("datasets") || !j.at("datasets").is_array()) throw ConfigError("'datasets' must be an array");
        for (const auto& d : j.at("datasets")) {
            DatasetSpec s;
            fs::path p = d.at("path").get<std::string>();
            s.path = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
            s.timestamp_column = d.value("timestamp_column", s.timestamp_column);
            s.columns = d.value("columns", s.columns);
            const auto delim = d.value("delimiter", std::string(","));
            if (delim.size() != 1) throw ConfigError("delimiter must be one character");
            s.delimiter = delim[0];
            s.decimal_comma = d.value("decimal_comma", false);
            const auto resample = d.value("resample", std::string("none"));
            if (resample == "mean") s.resample = Aggregation::Mean;
            else if (resample == "sum") s.resample = Aggregation::Sum;
            else if (resample != "none") throw ConfigError("resample must be none, mean or sum");
            c.datasets.push_back(std::move(s));
        }
        if (j.contains("series") && !j.at("series").is_null()) c.series = j.at("series").get<std::vector<std::string>>();
        if (j.contains("dataset_style")) c.style = parse_dataset_style(j.at("dataset_style").get<std::string>());
        for (const char* key : {"train_end", "test_start", "test_end"})
            if (!j.contains(key)) throw ConfigError(std::string("missing '") + key + "'");
        auto stamp = [&](const char* key) {
            try {
                return parse_timestamp(j.at(key).get<std::string>());
            } catch (const DataError& e) {
                throw ConfigError(std::string(key) + ": " + e.what());
            }
        };
        if (j.contains("train_start") && !j.at("train_start").is_null()) c.train_start = stamp("train_start");
        c.train_end = stamp("train_end");
        c.test_start = stamp("test_start");
        c.test_end = stamp("test_end");
        c.methods = j.value("methods", c.methods);
        c.model.exo_channels = exogenous_channels(c.style).size();
        if (j.contains("model")) c.model = config_from_json(j.at("model"), c.model);
        c.model.exo_channels = exogenous_channels(c.style).size();
        if (j.contains("psf_grouping")) c.psf_grouping.kind = parse_grouping(j.at("psf_grouping").get<std::string>());
        c.train_stride = j.value("train_stride", c.train_stride);
        c.test_stride = j.value("test_stride", c.test_stride);
        if (j.contains("warmup")) c.warmup = j.at("warmup").get<std::size_t>();
        c.ensemble_size = j.value("ensemble_size", c.ensemble_size);
        if (j.contains("y_max")) c.y_max = parse_ymax_mode(j.at("y_max").get<std::string>());
        c.seed = j.value("seed", c.seed);
        c.jobs = j.value("jobs", c.jobs);
        c.output_dir = j.value("output_dir", c.output_dir);
        if (fs::path(c.output_dir).is_relative() && !base_dir.empty()) c.output_dir = (base_dir / c.output_dir).string();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid run config: ") + e.what());
    }
    c.validate();
    return c;
}

inline nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

inline RunConfig load_run_config(const fs::path& path) {
    nlohmann::json j;
    try {
        j = read_json(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return run_config_from_json(j, path.parent_path());
}

/// Every selected series, hourly, in selection order.
inline std::vector<TimeSeries> load_selected_series(const RunConfig& c) {
    std::vector<TimeSeries> all;
    for (const auto& d : c.datasets) {
        const CsvOptions opts{d.delimiter, d.decimal_comma};
        CsvTable table;
        try {
            table = read_csv(d.path, opts);
        } catch (const DataError& e) {
            throw DataError(d.path + ": " + e.what());
        }
        auto columns = d.columns;
        if (columns.empty())
            for (const auto& h : table.header)
                if (h != d.timestamp_column) columns.push_back(h);
        for (const auto& col : columns) {
            try {
                auto ts = series_from_table(table, col, d.timestamp_column, opts);
                if (d.resample) ts = resample_hourly(ts, *d.resample);
                ts.validate();
                all.push_back(std::move(ts));
            } catch (const DataError& e) {
                throw DataError(d.path + ": " + e.what());
            }
        }
    }
    std::vector<TimeSeries> out;
    if (!c.series) {
        out = std::move(all);
    } else {
        for (const auto& name : *c.series) {
            auto it = std::find_if(all.begin(), all.end(), [&](const TimeSeries& t) { return t.name == name; });
            if (it == all.end()) throw ConfigError("selected series '" + name + "' not found in the datasets");
            out.push_back(*it);
        }
    }
    if (out.empty()) throw ConfigError("no series selected");
    std::set<std::string> names;
    for (const auto& ts : out) {
        if (!names.insert(ts.name).second) throw ConfigError("duplicate series name '" + ts.name + "'");
        if (ts.step != std::chrono::hours{1})
            throw ConfigError("series '" + ts.name + "' is not hourly; set \"resample\" on its dataset");
    }
    return out;
}

/// Series, statistics, windows and split indices of one series under a run config.
struct SeriesData {
    TimeSeries ts;
    RollingStats stats;
    RollingStats psf_stats;
    ExogenousFeatures exo;
    std::size_t train_start = 0; // index
    std::size_t train_end = 0;   // index, inclusive
    std::size_t test_start = 0;  // index
    std::size_t test_end = 0;    // index, inclusive
    WindowSet train;
    WindowSet test;
    double scale = 1.0;
    double y_max = 1.0;
};

inline WindowOptions window_options(const RunConfig& c) {
    WindowOptions o;
    o.history = c.model.history;
    o.horizon = c.model.horizon;
    o.period = c.model.period;
    o.trend_depth = c.model.trend_depth;
    o.warmup = c.warmup_steps();
    return o;
}

inline SeriesData prepare_series(const RunConfig& c, TimeSeries ts) {
    SeriesData d;
    d.ts = std::move(ts);
    auto index = [&](Timestamp t, const char* what) {
        auto i = d.ts.index_of(t);
        if (!i) throw ConfigError(std::string(what) + " " + format_timestamp(t) + " is outside series '" + d.ts.name + "'");
        return *i;
    };
    if (c.train_start) d.train_start = index(*c.train_start, "train_start");
    d.train_end = index(c.train_end, "train_end");
    d.test_start = index(c.test_start, "test_start");
    d.test_end = index(c.test_end, "test_end");
    if (d.test_start == 0) throw ConfigError("test_start must leave at least one observed step");

    const auto window = std::chrono::hours{24 * c.model.window_days};
    d.stats = compute_rolling_stats(d.ts, c.model.grouping, window);
    d.psf_stats = compute_rolling_stats(d.ts, c.psf_grouping, window);
    d.exo = encode_exogenous(d.ts, c.style);

    const auto h = c.model.horizon;
    auto o = window_options(c);
    o.stride = c.train_stride;
    o.warmup = std::max(o.warmup, d.train_start);
    if (d.train_end >= h) {
        o.last_origin = d.train_end - h;
        d.train = make_windows(d.ts, d.stats, d.exo, o);
    } else {
        d.train.diagnostic = "training period is shorter than the horizon";
    }
    o.stride = c.test_stride;
    o.warmup = c.warmup_steps();
    o.first_origin = d.test_start - 1;
    o.last_origin.reset();
    if (d.test_end >= h && d.test_end - h + 1 >= d.test_start) {
        o.last_origin = d.test_end - h;
        d.test = make_windows(d.ts, d.stats, d.exo, o);
        // PSF uses its own statistics; keep only origins valid for both
        std::vector<SampleWindow> kept;
        for (auto& w : d.test.windows) {
            bool ok = true;
            for (std::size_t s = 1; s <= h && ok; ++s) ok = d.psf_stats.defined(w.origin + s);
            if (ok) kept.push_back(std::move(w));
            else ++d.test.skipped;
        }
        d.test.windows = std::move(kept);
    } else {
        d.test.diagnostic = "test period is shorter than the horizon";
    }

    double scale = 0.0;
    for (std::size_t i = d.train_start; i <= d.train_end; ++i) scale = std::max(scale, std::fabs(d.ts.values[i]));
    d.scale = scale > 0.0 ? scale : 1.0;

    double y_max = 0.0;
    switch (c.y_max) {
        case YMaxMode::TestMax:
            for (const auto& w : d.test.windows)
                for (double y : w.target) y_max = std::max(y_max, y);
            break;
        case YMaxMode::TrainMax:
            for (std::size_t i = d.train_start; i <= d.train_end; ++i) y_max = std::max(y_max, d.ts.values[i]);
            break;
        case YMaxMode::GlobalMax:
            for (double y : d.ts.values) y_max = std::max(y_max, y);
            break;
    }
    d.y_max = y_max;
    return d;
}

/// Output layout under the run's output directory.
struct RunPaths {
    fs::path root;

    fs::path run_config() const { return root / "run_config.json"; }
    fs::path prepared(const std::string& series) const { return root / "prepared" / series; }
    fs::path prepared_index() const { return root / "prepared" / "index.json"; }
    fs::path model_dir(const std::string& series, const std::string& method) const {
        return root / "models" / series / method;
    }
    fs::path train_summary() const { return root / "train_summary.json"; }
    fs::path forecast(const std::string& method) const { return root / "forecasts" / ("forecast_" + method + ".csv"); }
    fs::path report() const { return root / "report.json"; }
    fs::path metrics_long() const { return root / "metrics_long.csv"; }
};

/// Runs task(i) for i in [0, n) on up to `jobs` threads. Exceptions are
/// captured per task and returned as messages (empty on success).
template <typename Task>
std::vector<std::string> run_pool(std::size_t n, std::size_t jobs, Task task) {
    std::vector<std::string> errors(n);
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                task(i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                if (errors[i].empty()) errors[i] = "unknown error";
            }
        }
    };
    if (jobs == 1) {
        worker();
        return errors;
    }
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return errors;
}

// prepare ---------------------------------------------------------------

inline nlohmann::json series_manifest(const SeriesData& d) {
    nlohmann::json j;
    j["series"] = d.ts.name;
    j["points"] = d.ts.size();
    j["start"] = format_timestamp(d.ts.start);
    j["end"] = format_timestamp(d.ts.end());
    j["train_start_index"] = d.train_start;
    j["train_end_index"] = d.train_end;
    j["test_start_index"] = d.test_start;
    j["test_end_index"] = d.test_end;
    j["train_windows"] = d.train.windows.size();
    j["train_skipped"] = d.train.skipped;
    j["test_windows"] = d.test.windows.size();
    j["test_skipped"] = d.test.skipped;
    j["scale"] = d.scale;
    j["y_max"] = d.y_max;
    j["statistics_defined_from"] = d.stats.defined_from;
    std::vector<std::string> origins;
    for (const auto& w : d.test.windows) origins.push_back(format_timestamp(w.origin_time));
    j["test_origins"] = origins;
    if (!d.train.diagnostic.empty()) j["train_diagnostic"] = d.train.diagnostic;
    if (!d.test.diagnostic.empty()) j["test_diagnostic"] = d.test.diagnostic;
    return j;
}

/// Loads and checks every selected series and writes per-series artifacts.
inline int cmd_prepare(const RunConfig& c, std::ostream& log = std::cout) {
    const auto series = load_selected_series(c);
    const RunPaths paths{c.output_dir};
    fs::create_directories(paths.root);
    write_json(paths.run_config(), to_json(c));
    std::size_t total_train = 0, total_test = 0, skipped = 0;
    for (const auto& ts : series) {
        const auto d = prepare_series(c, ts);
        if (d.train.windows.empty())
            throw DataError("series '" + ts.name + "': no training windows (" + d.train.diagnostic + ")");
        if (d.test.windows.empty())
            throw DataError("series '" + ts.name + "': no test windows (" + d.test.diagnostic + ")");
        const auto dir = paths.prepared(ts.name);
        fs::create_directories(dir);
        write_csv((dir / "series.csv").string(), {d.ts});
        write_stats_csv((dir / "stats.csv").string(), d.ts, d.stats);
        write_stats_csv((dir / "psf_stats.csv").string(), d.ts, d.psf_stats);
        write_json(dir / "manifest.json", series_manifest(d));
        total_train += d.train.windows.size();
        total_test += d.test.windows.size();
        skipped += d.train.skipped + d.test.skipped;
        log << ts.name << ": " << d.ts.size() << " points, " << d.train.windows.size() << " training windows, "
            << d.test.windows.size() << " test windows, " << d.train.skipped + d.test.skipped << " skipped origins\n";
    }
    std::vector<std::string> names;
    for (const auto& ts : series) names.push_back(ts.name);
    write_json(paths.prepared_index(), {{"series", names}});
    log << "prepared " << series.size() << " series: " << total_train << " training windows, " << total_test
        << " test windows, " << skipped << " skipped origins\n";
    return 0;
}

/// The prepared copy of one series; the later stages start from it.
inline SeriesData load_prepared(const RunConfig& c, const std::string& name) {
    const auto path = RunPaths{c.output_dir}.prepared(name) / "series.csv";
    if (!fs::exists(path)) throw DataError("series '" + name + "' is not prepared; run prepare first");
    return prepare_series(c, load_csv(path.string(), name, "timestamp"));
}

inline std::vector<std::string> prepared_series_names(const RunConfig& c) {
    const auto path = RunPaths{c.output_dir}.prepared_index();
    if (!fs::exists(path)) throw DataError("no prepared run in '" + c.output_dir + "'; run prepare first");
    try {
        return read_json(path).at("series").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("corrupt '" + path.string() + "': " + e.what());
    }
}

// train -----------------------------------------------------------------

struct TrainOutcome {
    std::string series;
    std::string method;
    bool ok = false;
    std::string error;
    double seconds = 0.0;
    double final_loss = 0.0;
};

inline ProbPNNConfig model_config_for(const RunConfig& c, const std::string& method, std::size_t series_index) {
    auto m = c.model;
    m.variant = method_variant(method);
    m.seed = mix_seed(c.seed, 100 + series_index);
    return m;
}

/// Trains one model per (series, ProbPNN method) and writes checkpoints.
/// A failing model is reported and the others continue; returns 1 if any failed.
inline int cmd_train(const RunConfig& c, std::ostream& log = std::cout) {
    const auto names = prepared_series_names(c);
    std::vector<std::string> methods;
    for (const auto& m : c.methods)
        if (is_probpnn_method(m)) methods.push_back(m);
    const RunPaths paths{c.output_dir};
    std::vector<std::optional<SeriesData>> data(names.size());
    std::vector<std::string> load_errors(names.size());
    for (std::size_t s = 0; s < names.size(); ++s) {
        try {
            data[s] = load_prepared(c, names[s]);
        } catch (const DataError& e) {
            load_errors[s] = e.what();
        }
    }

    std::vector<TrainOutcome> outcomes(names.size() * methods.size());
    std::mutex log_mutex;
    auto errors = run_pool(outcomes.size(), c.jobs, [&](std::size_t i) {
        const std::size_t s = i / methods.size();
        const auto& method = methods[i % methods.size()];
        auto& out = outcomes[i];
        out.series = names[s];
        out.method = method;
        if (!data[s]) throw DataError(load_errors[s]);
        const auto& d = *data[s];
        ProbPNNModel model(model_config_for(c, method, s));
        model.set_scale(d.scale);
        const auto report = train(model, d.train.windows);
        const auto dir = paths.model_dir(d.ts.name, method);
        fs::create_directories(dir);
        diff::save_checkpoint((dir / "checkpoint.json").string(), model.params());
        write_json(dir / "model.json", {{"series", d.ts.name},
                                        {"method", method},
                                        {"scale", d.scale},
                                        {"config", to_json(model.config())}});
        write_json(dir / "training.json", to_json(report));
        out.ok = true;
        out.seconds = report.total_seconds;
        out.final_loss = report.epochs.back().loss;
        std::lock_guard lock(log_mutex);
        log << d.ts.name << " " << method << ": " << report.epochs.size() << " epochs in " << std::fixed
            << std::setprecision(1) << report.total_seconds << std::defaultfloat << std::setprecision(6)
            << " s, final loss " << out.final_loss << "\n";
    });

    nlohmann::json summary;
    summary["models"] = nlohmann::json::array();
    std::size_t failures = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        auto& o = outcomes[i];
        if (!errors[i].empty()) {
            o.ok = false;
            o.error = errors[i];
            ++failures;
            log << o.series << " " << o.method << ": FAILED: " << o.error << "\n";
        }
        nlohmann::json e{{"series", o.series}, {"method", o.method}, {"ok", o.ok}, {"training_seconds", o.seconds}};
        if (o.ok) e["final_loss"] = o.final_loss;
        else e["error"] = o.error;
        summary["models"].push_back(std::move(e));
    }
    summary["failures"] = failures;
    write_json(paths.train_summary(), summary);
    log << "trained " << outcomes.size() - failures << " of " << outcomes.size() << " models\n";
    return failures ? 1 : 0;
}

inline ProbPNNModel load_model(const RunConfig& c, const std::string& series, const std::string& method) {
    const auto dir = RunPaths{c.output_dir}.model_dir(series, method);
    if (!fs::exists(dir / "checkpoint.json") || !fs::exists(dir / "model.json"))
        throw DataError("missing checkpoint for method '" + method + "' on series '" + series + "'");
    const auto meta = read_json(dir / "model.json");
    ProbPNNModel model(config_from_json(meta.at("config")));
    model.set_scale(meta.at("scale").get<double>());
    diff::load_checkpoint((dir / "checkpoint.json").string(), model.params());
    return model;
}

inline double recorded_training_seconds(const RunConfig& c, const std::string& series, const std::string& method) {
    const auto path = RunPaths{c.output_dir}.model_dir(series, method) / "training.json";
    if (!fs::exists(path)) return 0.0;
    return read_json(path).value("training_seconds", 0.0);
}

// evaluate --------------------------------------------------------------

/// Forecasts of one method for every test window of a series.
inline std::vector<GaussianForecast> method_forecasts(const RunConfig& c, const SeriesData& d, const std::string& method) {
    std::vector<GaussianForecast> out;
    if (is_probpnn_method(method)) {
        const auto model = load_model(c, d.ts.name, method);
        for (const auto& w : d.test.windows) out.push_back(to_gaussian(model.predict(w)));
    } else if (method == "psf") {
        for (const auto& w : d.test.windows) {
            auto g = to_gaussian(psf_forecast(d.psf_stats, w.origin, c.model.horizon));
            g.origin = w.origin_time;
            out.push_back(std::move(g));
        }
    } else if (method == "climatology") {
        const std::span<const double> ref(d.ts.values.data() + d.train_start, d.train_end + 1 - d.train_start);
        for (const auto& w : d.test.windows) out.push_back(climatology_forecast(ref, c.model.horizon, w.origin_time));
    } else {
        throw ConfigError("unknown method '" + method + "'");
    }
    return out;
}

/// Levels exported in the forecast CSV, ascending.
inline std::vector<double> export_levels() {
    auto levels = QuantileSets::standard().pinball;
    std::sort(levels.begin(), levels.end());
    return levels;
}

inline std::string level_name(double alpha) {
    std::ostringstream s;
    s << "q_" << std::fixed << std::setprecision(2) << alpha;
    return s.str();
}

inline void write_forecast_header(std::ostream& out) {
    out << "series,origin,step,mu,sigma";
    for (double a : export_levels()) out << ',' << level_name(a);
    out << '\n';
}

inline void write_forecast_rows(std::ostream& out, const std::string& series, const std::vector<GaussianForecast>& fs) {
    const auto levels = export_levels();
    std::vector<double> z;
    for (double a : levels) z.push_back(normal_quantile(a));
    for (const auto& f : fs)
        for (std::size_t h = 0; h < f.size(); ++h) {
            out << series << ',' << format_timestamp(f.origin) << ',' << h + 1 << ',' << f.mu[h] << ',' << f.sigma[h];
            for (double zi : z) out << ',' << f.mu[h] + f.sigma[h] * zi;
            out << '\n';
        }
}

/// Scores every requested method on every prepared series and writes the
/// report, the long-format metrics table and the forecast curves.
inline int cmd_evaluate(const RunConfig& c, std::ostream& log = std::cout) {
    const auto names = prepared_series_names(c);
    const RunPaths paths{c.output_dir};
    for (std::size_t s = 0; s < names.size(); ++s)
        for (const auto& m : c.methods)
            if (is_probpnn_method(m) && !fs::exists(paths.model_dir(names[s], m) / "checkpoint.json"))
                throw DataError("missing checkpoint for method '" + m + "' on series '" + names[s] + "'");

    EvaluationReport report;
    report.methods = c.methods;
    report.series.resize(names.size());
    std::vector<std::vector<std::string>> csv_parts(names.size(), std::vector<std::string>(c.methods.size()));
    auto errors = run_pool(names.size(), c.jobs, [&](std::size_t s) {
        const auto d = load_prepared(c, names[s]);
        if (d.test.windows.empty()) throw DataError("series '" + names[s] + "' has no test windows");
        auto& sr = report.series[s];
        sr.name = d.ts.name;
        sr.y_max = d.y_max;
        for (std::size_t m = 0; m < c.methods.size(); ++m) {
            const auto& method = c.methods[m];
            EvaluationInput in;
            in.forecasts = method_forecasts(c, d, method);
            for (const auto& w : d.test.windows) in.targets.push_back(w.target);
            // common sampling seed per series so methods see the same random numbers
            auto scores = score_forecasts(in, d.y_max, c.ensemble_size, mix_seed(c.seed, 7000 + s));
            scores.training_seconds = is_probpnn_method(method) ? recorded_training_seconds(c, d.ts.name, method) : 0.0;
            sr.scores[method] = scores;
            std::ostringstream rows;
            rows.precision(17);
            write_forecast_rows(rows, d.ts.name, in.forecasts);
            csv_parts[s][m] = rows.str();
        }
    });
    for (std::size_t s = 0; s < names.size(); ++s)
        if (!errors[s].empty()) throw DataError("evaluating '" + names[s] + "': " + errors[s]);

    fs::create_directories(paths.root / "forecasts");
    for (std::size_t m = 0; m < c.methods.size(); ++m) {
        std::ofstream out(paths.forecast(c.methods[m]));
        if (!out) throw DataError("cannot write '" + paths.forecast(c.methods[m]).string() + "'");
        write_forecast_header(out);
        for (std::size_t s = 0; s < names.size(); ++s) out << csv_parts[s][m];
    }
    const auto doc = to_json(report);
    validate_report_json(doc);
    write_json(paths.report(), doc);
    write_metrics_long_csv(paths.metrics_long().string(), report);

    log << std::left << std::setw(24) << "method";
    for (const auto& metric : report_metrics()) log << std::setw(12) << metric;
    log << "avg rank (ncrps)\n";
    const auto ranks = report.average_ranks();
    for (const auto& m : c.methods) {
        const auto a = report.average(m);
        log << std::setw(24) << m;
        for (const auto& metric : report_metrics()) log << std::setw(12) << metric_value(a, metric);
        log << ranks.at("ncrps").at(m) << '\n';
    }
    log << std::right;
    return 0;
}

// synthetic -------------------------------------------------------------

struct SyntheticRunOptions {
    SyntheticOptions data;
    std::size_t test_weeks = 4;
    std::string output_dir;
};

/// Writes synthetic.csv plus a ready-to-run config.json that holds out the
/// last `test_weeks` weeks.
inline int cmd_synthetic(const SyntheticRunOptions& o, std::ostream& log = std::cout) {
    if (o.output_dir.empty()) throw ConfigError("synthetic needs an output directory");
    if (o.data.series == 0 || o.data.weeks == 0) throw ConfigError("series and weeks must be positive");
    if (o.test_weeks == 0 || o.test_weeks >= o.data.weeks) throw ConfigError("test_weeks must be in [1, weeks)");
    const auto series = generate_synthetic(o.data);
    const fs::path dir = o.output_dir;
    fs::create_directories(dir);
    write_csv((dir / "synthetic.csv").string(), series);
    const auto& ts = series.front();
    const std::size_t test_start = ts.size() - o.test_weeks * 168;
    nlohmann::json cfg{
        {"datasets", {{{"path", "synthetic.csv"}, {"timestamp_column", "timestamp"}}}},
        {"dataset_style", "electricity"},
        {"train_end", format_timestamp(ts.timestamp(test_start - 1))},
        {"test_start", format_timestamp(ts.timestamp(test_start))},
        {"test_end", format_timestamp(ts.end())},
        {"methods", {"probpnn_sigma", "probpnn_sigma_squared", "psf", "climatology"}},
        {"seed", o.data.seed},
        {"output_dir", "out"},
    };
    write_json(dir / "config.json", cfg);
    log << "wrote " << series.size() << " series of " << ts.size() << " points to " << (dir / "synthetic.csv").string()
        << "\n";
    return 0;
}

}  // namespace probpnn
