#include "cli/commands.hpp"

#include "idxcast/model.hpp"
#include "idxcast/parallel.hpp"
#include "idxcast/reference_tables.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace idxcast::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using tune::ModelKind;

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::MissingFile, "cannot write " + path.string());
    out << text;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        err << "configuration error:\n";
        for (const auto& p : e.problems()) err << "  " << p << '\n';
        return kExitUsageError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::InvalidConfig ? kExitUsageError : kExitDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDataError;
    }
}

ingest::PriceSeries load_series(const ExperimentConfig& cfg, const std::string& index) {
    auto it = cfg.data.find(index);
    if (it == cfg.data.end()) throw Error(ErrorKind::InvalidConfig, "index '" + index + "' not in config data");
    return ingest::clean(ingest::parse_csv(it->second, cfg.columns), index).series;
}

const preprocess::DatasetSlice& find_slice(const ExperimentConfig& cfg, const std::string& name) {
    auto it = std::find_if(cfg.slices.begin(), cfg.slices.end(),
                           [&](const preprocess::DatasetSlice& s) { return s.name == name; });
    if (it == cfg.slices.end()) throw Error(ErrorKind::InvalidConfig, "slice '" + name + "' not in config");
    return *it;
}

class AuditLog {
public:
    AuditLog(const fs::path& path, std::uint64_t seed) : seed_(seed) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        out_.open(path, std::ios::app);
        if (!out_) throw Error(ErrorKind::MissingFile, "cannot write " + path.string());
    }

    void operator()(std::size_t iteration, const tune::HistoryEntry& entry) {
        const json line{{"iteration", iteration},  {"point", tune::to_json(entry.point)},
                        {"score", entry.score},     {"per_fold", entry.per_fold},
                        {"seed", seed_},            {"timestamp", utc_timestamp()}};
        out_ << line.dump() << '\n';
        out_.flush();
    }

private:
    std::uint64_t seed_;
    std::ofstream out_;
};

struct CellOutcome {
    eval::FitReport report;
    json access;
};

CellOutcome run_cell(const ExperimentConfig& cfg, const ingest::PriceSeries& series,
                     const preprocess::DatasetSlice& slice, ModelKind kind, std::size_t inner_threads) {
    const auto pair = preprocess::slice_regime(series, slice);
    const fs::path dir = cell_dir(cfg.output_dir, series.index_name, slice.name, kind);
    const auto method = cfg.method_for(kind);

    eval::FitReport report;
    report.index_name = series.index_name;
    report.slice_name = slice.name;
    report.model_kind = kind;
    report.seed = cfg.tuner.seed;
    report.train_samples = pair.train.size();
    report.train_end = format_date(slice.train_end);

    const bool tuned = kind != ModelKind::Persistence &&
                       (method == TunerMethod::Random || method == TunerMethod::Bayesian);
    if (tuned) {
        fs::remove(dir / "audit.jsonl");
        AuditLog audit(dir / "audit.jsonl", cfg.tuner.seed);
        ExperimentConfig inner = cfg;
        inner.threads = inner_threads;
        const auto result = run_tuner(inner, kind, pair.train, method, std::ref(audit));
        write_text(dir / "tune_result.json", tune::to_json(result).dump(2) + "\n");
        report.hyperparams = result.best_point;
        for (const auto& entry : result.history) {
            if (entry.point == result.best_point) {
                report.cv_metrics = entry.per_fold;
                break;
            }
        }
    } else {
        report.hyperparams = untuned_point(cfg, kind, series.index_name, slice.name, method);
        if (kind != ModelKind::Persistence) {
            report.cv_metrics = tune::cv_objective(kind, report.hyperparams, pair.train, cfg.cv, cfg.tuner.seed,
                                                   inner_threads)
                                    .per_fold;
        }
    }

    // Fit on the training slice only.
    const auto train_values = pair.train.values();
    const auto normalizer = preprocess::fit_normalizer(train_values);
    const auto window = window_size_of(report.hyperparams);
    const auto data = preprocess::make_windows(preprocess::normalize(train_values, normalizer),
                                               pair.train.dates(), window);
    const auto model = train_forecaster(kind, report.hyperparams, data, {cfg.tuner.seed, inner_threads});
    const Date fit_max_date = data.target_dates.back();
    if (slice.train_end < fit_max_date) {
        throw Error(ErrorKind::CutoffOutOfRange, "fit read data after the cutoff");  // leakage guard
    }

    const auto evaluation = eval::evaluate_slice(*model, pair.context, pair.test, normalizer);
    report.metrics = evaluation.metrics;
    report.forecast_rows = evaluation.rows;

    save_model(*model, normalizer, dir / "model.json");
    write_text(dir / "report.json", eval::to_json(report).dump(2) + "\n");
    eval::write_forecast_csv(report.forecast_rows, dir / "forecast.csv");

    CellOutcome outcome{std::move(report), {}};
    outcome.access = {{"index", series.index_name},
                      {"slice", slice.name},
                      {"model", tune::to_string(kind)},
                      {"train_end", format_date(slice.train_end)},
                      {"fit_first_date", format_date(pair.train.observations.front().date)},
                      {"fit_last_date", format_date(fit_max_date)},
                      {"test_first_date", format_date(pair.test.observations.front().date)},
                      {"test_last_date", format_date(pair.test.observations.back().date)}};
    return outcome;
}

std::string param_text(const tune::HyperparamPoint& point, const std::string& name) {
    auto it = point.find(name);
    if (it == point.end()) return "";
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else if constexpr (std::is_same_v<T, double>) {
                return format_double(v);
            } else {
                return std::to_string(v);
            }
        },
        it->second);
}

std::string optional_number(double v) { return std::isfinite(v) ? format_double(v) : ""; }

const std::vector<std::string> kSummaryParams{"window_size",       "max_depth",  "max_features", "min_samples_leaf",
                                              "min_samples_split", "n_estimators", "epochs",     "l1",
                                              "l2",                "batch_size", "units",        "learning_rate"};

std::string summary_csv(const std::vector<eval::FitReport>& reports) {
    std::ostringstream out;
    out << "index,samples,model";
    for (const auto& p : kSummaryParams) out << ',' << p;
    out << ",r2,mse,ref_r2,ref_mse\n";
    for (const auto& r : reports) {
        out << r.index_name << ',' << r.slice_name << ',' << tune::to_string(r.model_kind);
        for (const auto& p : kSummaryParams) out << ',' << param_text(r.hyperparams, p);
        out << ',' << optional_number(r.metrics.r2) << ',' << format_double(r.metrics.mse);
        if (auto ref = find_reference(r.index_name, r.slice_name, r.model_kind)) {
            out << ',' << format_double(ref->r2) << ',' << format_double(ref->mse);
        } else {
            out << ",,";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace

ExperimentConfig resolve_config(const GlobalOptions& options) {
    if (options.config.empty()) throw ConfigError({"--config is required"});
    auto cfg = load_config(options.config);
    if (options.seed) cfg.tuner.seed = *options.seed;
    if (options.out) cfg.output_dir = *options.out;
    if (options.threads) cfg.threads = std::max<std::size_t>(1, *options.threads);
    return cfg;
}

tune::TuneResult run_tuner(const ExperimentConfig& cfg, ModelKind kind, const ingest::PriceSeries& train,
                           TunerMethod method, const tune::EvaluationSink& sink) {
    const auto space = cfg.space_for(kind);
    const auto objective = tune::make_cv_objective(kind, train, cfg.cv);
    if (method == TunerMethod::Default) method = kind == ModelKind::Lstm ? TunerMethod::Bayesian : TunerMethod::Random;
    switch (method) {
    case TunerMethod::Random:
        return tune::random_search(space, objective, {cfg.tuner.budget, cfg.tuner.seed, cfg.threads}, sink);
    case TunerMethod::Bayesian: {
        tune::BayesOptions opts;
        opts.n_iterations = cfg.tuner.budget;
        opts.n_init = std::min(cfg.tuner.n_init, cfg.tuner.budget);
        opts.n_candidates = cfg.tuner.n_candidates;
        opts.seed = cfg.tuner.seed;
        return tune::bayesian_optimize(space, objective, opts, sink);
    }
    default:
        throw Error(ErrorKind::InvalidConfig, "method '" + std::string(to_string(method)) + "' does not tune");
    }
}

tune::HyperparamPoint untuned_point(const ExperimentConfig& cfg, ModelKind kind, const std::string& index_name,
                                    const std::string& slice_name, TunerMethod method) {
    if (kind == ModelKind::Persistence) return {{"window_size", std::int64_t{1}}};
    if (method == TunerMethod::Fixed) {
        auto it = cfg.fixed.find(kind);
        if (it == cfg.fixed.end()) throw Error(ErrorKind::InvalidConfig, "no fixed point for this model");
        return it->second;
    }
    if (method == TunerMethod::Reference) {
        auto ref = find_reference(index_name, slice_name, kind);
        if (!ref) {
            throw Error(ErrorKind::InvalidConfig, "no published configuration for " + index_name + "/" + slice_name +
                                                      "/" + std::string(tune::to_string(kind)));
        }
        return ref->hyperparams;
    }
    throw Error(ErrorKind::InvalidConfig, "method '" + std::string(to_string(method)) + "' requires tuning");
}

fs::path cell_dir(const fs::path& out, const std::string& index, const std::string& slice, ModelKind kind) {
    return out / index / slice / std::string(tune::to_string(kind));
}

int cmd_ingest(const fs::path& csv, const std::string& index, const fs::path& out_dir, std::ostream& out,
               std::ostream& err) {
    return guarded(err, [&] {
        if (index.empty()) throw Error(ErrorKind::InvalidConfig, "--index is required");
        auto cleaned = ingest::clean(ingest::parse_csv(csv), index);
        ingest::write_series_csv(cleaned.series, out_dir / (index + ".csv"));
        json report = ingest::to_json(cleaned.report);
        report["index_name"] = index;
        report["source"] = csv.string();
        report["observations"] = cleaned.series.size();
        report["first_date"] = format_date(cleaned.series.observations.front().date);
        report["last_date"] = format_date(cleaned.series.observations.back().date);
        write_text(out_dir / (index + ".cleaning.json"), report.dump(2) + "\n");
        out << report.dump(2) << '\n';
        return kExitOk;
    });
}

int cmd_tune(const GlobalOptions& options, const TuneRequest& request, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto cfg = resolve_config(options);
        if (request.budget) {
            if (*request.budget < 1) throw ConfigError({"--budget must be >= 1"});
            cfg.tuner.budget = *request.budget;
        }
        const auto kind = tune::parse_model_kind(request.model);
        auto method = cfg.method_for(kind);
        if (request.method) {
            if (*request.method == "random") {
                method = TunerMethod::Random;
            } else if (*request.method == "bayesian") {
                method = TunerMethod::Bayesian;
            } else {
                throw ConfigError({"--method must be random or bayesian"});
            }
        }
        if (method != TunerMethod::Random && method != TunerMethod::Bayesian) {
            throw ConfigError({"tune needs a random or bayesian tuner, config says '" +
                               std::string(to_string(method)) + "'"});
        }
        const auto series = load_series(cfg, request.index);
        const auto pair = preprocess::slice_regime(series, find_slice(cfg, request.slice));
        const auto dir = cell_dir(cfg.output_dir, request.index, request.slice, kind);

        fs::remove(dir / "audit.jsonl");
        AuditLog audit(dir / "audit.jsonl", cfg.tuner.seed);
        const auto result = run_tuner(cfg, kind, pair.train, method, std::ref(audit));
        write_text(dir / "tune_result.json", tune::to_json(result).dump(2) + "\n");
        out << json{{"best_point", tune::to_json(result.best_point)},
                    {"best_score", result.best_score},
                    {"iterations", result.iterations},
                    {"output", (dir / "tune_result.json").string()}}
                   .dump(2)
            << '\n';
        return kExitOk;
    });
}

int cmd_run(const GlobalOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = resolve_config(options);
        std::vector<ingest::PriceSeries> series;
        for (const auto& [index, path] : cfg.data) series.push_back(load_series(cfg, index));

        struct Cell {
            std::size_t series;
            std::size_t slice;
            ModelKind kind;
        };
        std::vector<Cell> cells;
        for (std::size_t s = 0; s < series.size(); ++s) {
            for (std::size_t k = 0; k < cfg.slices.size(); ++k) {
                for (auto kind : cfg.models) cells.push_back({s, k, kind});
            }
        }

        // Cells run concurrently when threads > 1; otherwise the threads go to
        // the work inside each cell. Outputs are identical either way.
        const std::size_t outer = std::min(cfg.threads, cells.size());
        const std::size_t inner = outer > 1 ? 1 : cfg.threads;
        std::vector<CellOutcome> outcomes(cells.size());
        parallel_for(cells.size(), outer, [&](std::size_t i) {
            const auto& cell = cells[i];
            outcomes[i] = run_cell(cfg, series[cell.series], cfg.slices[cell.slice], cell.kind, inner);
        });

        std::vector<eval::FitReport> reports;
        for (auto& o : outcomes) reports.push_back(o.report);
        write_text(cfg.output_dir / "summary.csv", summary_csv(reports));

        if (options.verbose) {
            std::string log;
            for (const auto& o : outcomes) log += o.access.dump() + "\n";
            write_text(cfg.output_dir / "access_log.jsonl", log);
            for (const auto& o : outcomes) {
                out << "fit " << o.access["index"].get<std::string>() << '/' << o.access["slice"].get<std::string>()
                    << '/' << o.access["model"].get<std::string>() << " read "
                    << o.access["fit_first_date"].get<std::string>() << ".."
                    << o.access["fit_last_date"].get<std::string>() << " (cutoff "
                    << o.access["train_end"].get<std::string>() << ")\n";
            }
        }

        out << std::left << std::setw(10) << "index" << std::setw(8) << "slice" << std::setw(13) << "model"
            << std::setw(12) << "R2" << "MSE\n";
        for (const auto& r : reports) {
            out << std::left << std::setw(10) << r.index_name << std::setw(8) << r.slice_name << std::setw(13)
                << tune::to_string(r.model_kind) << std::setw(12) << std::setprecision(4) << r.metrics.r2
                << std::setprecision(6) << r.metrics.mse << '\n';
        }
        out << "wrote " << reports.size() << " reports and " << (cfg.output_dir / "summary.csv").string() << '\n';
        return kExitOk;
    });
}

int cmd_forecast(const fs::path& model_path, const fs::path& series_path, std::size_t n_steps,
                 const std::optional<fs::path>& output, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (n_steps < 1) throw Error(ErrorKind::InvalidConfig, "--steps must be >= 1");
        const auto saved = load_model(model_path);
        const auto series = ingest::read_series_csv(series_path, series_path.stem().string());
        const auto values = series.values();
        const auto forecast = forecast_recursive(*saved.forecaster, saved.normalizer, values, n_steps);

        std::ostringstream csv;
        csv << "step,predicted\n";
        for (std::size_t i = 0; i < forecast.size(); ++i) csv << (i + 1) << ',' << format_double(forecast[i]) << '\n';
        if (output) {
            write_text(*output, csv.str());
        } else {
            out << csv.str();
        }
        return kExitOk;
    });
}

int cmd_report(const fs::path& out_dir, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!fs::is_directory(out_dir)) throw Error(ErrorKind::MissingFile, "no output directory " + out_dir.string());
        std::vector<fs::path> files;
        for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
            if (entry.is_regular_file() && entry.path().filename() == "report.json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw Error(ErrorKind::MissingFile, "no report.json files under " + out_dir.string());

        std::vector<eval::FitReport> reports;
        for (const auto& f : files) {
            std::ifstream in(f);
            json j;
            in >> j;
            reports.push_back(eval::fit_report_from_json(j));
        }

        auto fmt = [](double v, int precision) {
            if (!std::isfinite(v)) return std::string("-");
            std::ostringstream s;
            s << std::fixed << std::setprecision(precision) << v;
            return s.str();
        };
        out << std::left << std::setw(10) << "index" << std::setw(7) << "slice" << std::setw(13) << "model"
            << std::setw(10) << "R2" << std::setw(14) << "MSE" << std::setw(10) << "ref_R2" << "ref_MSE\n";
        for (const auto& r : reports) {
            auto ref = find_reference(r.index_name, r.slice_name, r.model_kind);
            out << std::left << std::setw(10) << r.index_name << std::setw(7) << r.slice_name << std::setw(13)
                << tune::to_string(r.model_kind) << std::setw(10) << fmt(r.metrics.r2, 4) << std::setw(14)
                << fmt(r.metrics.mse, 2) << std::setw(10) << (ref ? fmt(ref->r2, 2) : "-")
                << (ref ? fmt(ref->mse, 2) : "-") << '\n';
        }

        // Directional checks: R2 rises D1 -> D2 -> D3 per model, and the
        // LSTM is at least as good as the forest per slice.
        auto lookup = [&](const std::string& index, const std::string& slice, ModelKind kind) -> const eval::FitReport* {
            for (const auto& r : reports) {
                if (r.index_name == index && r.slice_name == slice && r.model_kind == kind) return &r;
            }
            return nullptr;
        };
        std::vector<std::string> indices;
        for (const auto& r : reports) {
            if (std::find(indices.begin(), indices.end(), r.index_name) == indices.end()) indices.push_back(r.index_name);
        }
        out << "\nordering checks\n";
        for (const auto& index : indices) {
            for (auto kind : {ModelKind::Forest, ModelKind::Lstm}) {
                const auto *d1 = lookup(index, "D1", kind), *d2 = lookup(index, "D2", kind), *d3 = lookup(index, "D3", kind);
                if (!d1 || !d2 || !d3) continue;
                const bool ok = d1->metrics.r2 < d2->metrics.r2 && d2->metrics.r2 < d3->metrics.r2;
                out << "  " << index << ' ' << tune::to_string(kind) << " R2(D1) < R2(D2) < R2(D3): "
                    << (ok ? "yes" : "no") << '\n';
            }
            for (const std::string slice : {"D1", "D2", "D3"}) {
                const auto *rf = lookup(index, slice, ModelKind::Forest), *nn = lookup(index, slice, ModelKind::Lstm);
                if (!rf || !nn) continue;
                out << "  " << index << ' ' << slice << " R2(lstm) >= R2(forest): "
                    << (nn->metrics.r2 >= rf->metrics.r2 ? "yes" : "no") << '\n';
            }
        }
        return kExitOk;
    });
}

}  // namespace idxcast::cli
