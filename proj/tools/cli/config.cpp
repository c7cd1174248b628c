#include "cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace idxcast::cli {
namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& lines) {
    std::ostringstream out;
    for (std::size_t i = 0; i < lines.size(); ++i) out << (i ? "\n" : "") << lines[i];
    return out.str();
}

class Checker {
public:
    std::vector<std::string> problems;

    void fail(const std::string& where, const std::string& what) { problems.push_back(where + ": " + what); }

    std::optional<std::uint64_t> count(const json& j, const std::string& where, std::uint64_t min) {
        if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
            fail(where, "expected a non-negative integer");
            return std::nullopt;
        }
        const auto v = j.get<std::uint64_t>();
        if (v < min) {
            fail(where, "must be >= " + std::to_string(min));
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::string> string(const json& j, const std::string& where) {
        if (!j.is_string()) {
            fail(where, "expected a string");
            return std::nullopt;
        }
        return j.get<std::string>();
    }

    std::optional<Date> date(const json& j, const std::string& where) {
        auto s = string(j, where);
        if (!s) return std::nullopt;
        auto d = parse_iso_date(*s);
        if (!d) fail(where, "expected an ISO date (YYYY-MM-DD), got '" + *s + "'");
        return d;
    }

    void known_keys(const json& j, const std::string& where, const std::set<std::string>& keys) {
        for (const auto& [key, _] : j.items()) {
            if (!keys.contains(key)) fail(where, "unknown key '" + key + "'");
        }
    }
};

std::optional<TunerMethod> parse_method(const std::string& text) {
    if (text == "default") return TunerMethod::Default;
    if (text == "random") return TunerMethod::Random;
    if (text == "bayesian") return TunerMethod::Bayesian;
    if (text == "reference") return TunerMethod::Reference;
    if (text == "fixed") return TunerMethod::Fixed;
    return std::nullopt;
}

std::optional<tune::ModelKind> parse_kind(Checker& c, const std::string& text, const std::string& where) {
    try {
        return tune::parse_model_kind(text);
    } catch (const Error&) {
        c.fail(where, "unknown model '" + text + "' (expected forest, lstm or persistence)");
        return std::nullopt;
    }
}

}  // namespace

std::string_view to_string(TunerMethod method) {
    switch (method) {
    case TunerMethod::Default: return "default";
    case TunerMethod::Random: return "random";
    case TunerMethod::Bayesian: return "bayesian";
    case TunerMethod::Reference: return "reference";
    case TunerMethod::Fixed: return "fixed";
    }
    return "default";
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error(ErrorKind::InvalidConfig, join(problems)), problems_(std::move(problems)) {}

tune::HyperparamSpace ExperimentConfig::space_for(tune::ModelKind kind) const {
    auto it = spaces.find(kind);
    return it != spaces.end() ? it->second : tune::default_space(kind);
}

TunerMethod ExperimentConfig::method_for(tune::ModelKind kind) const {
    if (tuner.method != TunerMethod::Default) return tuner.method;
    return kind == tune::ModelKind::Lstm ? TunerMethod::Bayesian : TunerMethod::Random;
}

ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    Checker c;
    ExperimentConfig cfg;
    if (!doc.is_object()) throw ConfigError({"config: top level must be an object"});
    c.known_keys(doc, "config",
                 {"data", "columns", "slices", "cv", "tuner", "spaces", "fixed", "models", "output", "threads"});

    if (!doc.contains("data") || !doc["data"].is_object() || doc["data"].empty()) {
        c.fail("data", "required object mapping index name to CSV path");
    } else {
        for (const auto& [name, path] : doc["data"].items()) {
            if (auto p = c.string(path, "data." + name)) {
                std::filesystem::path file(*p);
                cfg.data[name] = file.is_relative() && !base_dir.empty() ? base_dir / file : file;
            }
        }
    }

    if (doc.contains("columns")) {
        const auto& col = doc["columns"];
        c.known_keys(col, "columns", {"date", "close"});
        if (col.contains("date")) {
            if (auto s = c.string(col["date"], "columns.date")) cfg.columns.date_names = {*s};
        }
        if (col.contains("close")) {
            if (auto s = c.string(col["close"], "columns.close")) cfg.columns.close_names = {*s};
        }
    }

    if (doc.contains("slices")) {
        cfg.slices.clear();
        if (!doc["slices"].is_array() || doc["slices"].empty()) {
            c.fail("slices", "expected a non-empty array");
        } else {
            std::set<std::string> names;
            for (std::size_t i = 0; i < doc["slices"].size(); ++i) {
                const auto& s = doc["slices"][i];
                const std::string where = "slices[" + std::to_string(i) + "]";
                if (!s.is_object()) {
                    c.fail(where, "expected an object");
                    continue;
                }
                c.known_keys(s, where, {"name", "train_end", "test_horizon", "test_start"});
                preprocess::DatasetSlice slice;
                auto name = s.contains("name") ? c.string(s["name"], where + ".name") : std::nullopt;
                if (!s.contains("name")) c.fail(where + ".name", "required");
                auto end = s.contains("train_end") ? c.date(s["train_end"], where + ".train_end") : std::nullopt;
                if (!s.contains("train_end")) c.fail(where + ".train_end", "required");
                if (s.contains("test_horizon")) {
                    if (auto h = c.count(s["test_horizon"], where + ".test_horizon", 1)) slice.test_horizon = *h;
                }
                if (s.contains("test_start")) slice.test_start = c.date(s["test_start"], where + ".test_start");
                if (name && !names.insert(*name).second) c.fail(where + ".name", "duplicate slice '" + *name + "'");
                if (name && end) {
                    slice.name = *name;
                    slice.train_end = *end;
                    if (slice.test_start && *slice.test_start <= *end) {
                        c.fail(where + ".test_start", "must be after train_end");
                    }
                    if (!cfg.slices.empty() && !(cfg.slices.back().train_end < slice.train_end)) {
                        c.fail(where + ".train_end", "slices must be ordered by strictly increasing train_end");
                    }
                    cfg.slices.push_back(slice);
                }
            }
        }
    } else {
        cfg.slices = preprocess::default_slices();
    }

    if (doc.contains("cv")) {
        const auto& cv = doc["cv"];
        c.known_keys(cv, "cv", {"initial_fraction", "horizon", "folds"});
        if (cv.contains("initial_fraction")) {
            const auto& f = cv["initial_fraction"];
            if (!f.is_number() || !(f.get<double>() > 0.0 && f.get<double>() < 1.0)) {
                c.fail("cv.initial_fraction", "expected a number in (0, 1)");
            } else {
                cfg.cv.initial_fraction = f.get<double>();
            }
        }
        if (cv.contains("horizon")) {
            if (auto h = c.count(cv["horizon"], "cv.horizon", 0)) cfg.cv.horizon = *h;
        }
        if (cv.contains("folds")) {
            if (auto f = c.count(cv["folds"], "cv.folds", 1)) cfg.cv.folds = *f;
        }
    }

    if (doc.contains("tuner")) {
        const auto& t = doc["tuner"];
        c.known_keys(t, "tuner", {"method", "budget", "n_init", "n_candidates", "seed"});
        if (t.contains("method")) {
            if (auto s = c.string(t["method"], "tuner.method")) {
                if (auto m = parse_method(*s)) {
                    cfg.tuner.method = *m;
                } else {
                    c.fail("tuner.method", "expected default, random, bayesian, reference or fixed");
                }
            }
        }
        if (t.contains("budget")) {
            if (auto b = c.count(t["budget"], "tuner.budget", 1)) cfg.tuner.budget = *b;
        }
        if (t.contains("n_init")) {
            if (auto b = c.count(t["n_init"], "tuner.n_init", 2)) cfg.tuner.n_init = *b;
        }
        if (t.contains("n_candidates")) {
            if (auto b = c.count(t["n_candidates"], "tuner.n_candidates", 1)) cfg.tuner.n_candidates = *b;
        }
        if (t.contains("seed")) {
            if (auto s = c.count(t["seed"], "tuner.seed", 0)) cfg.tuner.seed = *s;
        }
    }

    if (doc.contains("models")) {
        cfg.models.clear();
        if (!doc["models"].is_array() || doc["models"].empty()) {
            c.fail("models", "expected a non-empty array");
        } else {
            for (std::size_t i = 0; i < doc["models"].size(); ++i) {
                const std::string where = "models[" + std::to_string(i) + "]";
                if (auto s = c.string(doc["models"][i], where)) {
                    if (auto k = parse_kind(c, *s, where)) cfg.models.push_back(*k);
                }
            }
        }
    }

    if (doc.contains("spaces")) {
        if (!doc["spaces"].is_object()) {
            c.fail("spaces", "expected an object keyed by model");
        } else {
            for (const auto& [model, specs] : doc["spaces"].items()) {
                const std::string where = "spaces." + model;
                auto kind = parse_kind(c, model, where);
                if (!specs.is_array() || specs.empty()) {
                    c.fail(where, "expected a non-empty array of parameter specs");
                    continue;
                }
                std::vector<tune::ParamSpec> parsed;
                bool has_window = false;
                for (std::size_t i = 0; i < specs.size(); ++i) {
                    try {
                        parsed.push_back(tune::spec_from_json(specs[i]));
                        has_window = has_window || parsed.back().name == "window_size";
                    } catch (const Error& e) {
                        c.fail(where + "[" + std::to_string(i) + "]", e.what());
                    }
                }
                if (!has_window) c.fail(where, "must declare window_size");
                if (kind && parsed.size() == specs.size()) {
                    try {
                        cfg.spaces[*kind] = tune::HyperparamSpace(*kind, std::move(parsed));
                    } catch (const Error& e) {
                        c.fail(where, e.what());
                    }
                }
            }
        }
    }

    if (doc.contains("fixed")) {
        if (!doc["fixed"].is_object()) {
            c.fail("fixed", "expected an object keyed by model");
        } else {
            for (const auto& [model, point] : doc["fixed"].items()) {
                const std::string where = "fixed." + model;
                auto kind = parse_kind(c, model, where);
                try {
                    auto p = tune::point_from_json(point);
                    if (!p.contains("window_size")) c.fail(where, "must set window_size");
                    if (kind) cfg.fixed[*kind] = std::move(p);
                } catch (const Error& e) {
                    c.fail(where, e.what());
                }
            }
        }
    }

    if (doc.contains("output")) {
        if (auto s = c.string(doc["output"], "output")) {
            std::filesystem::path out(*s);
            cfg.output_dir = out.is_relative() && !base_dir.empty() ? base_dir / out : out;
        }
    }
    if (doc.contains("threads")) {
        if (auto t = c.count(doc["threads"], "threads", 1)) cfg.threads = *t;
    }

    // Cross-field rules.
    for (auto kind : cfg.models) {
        const auto method = cfg.method_for(kind);
        if (method == TunerMethod::Fixed && kind != tune::ModelKind::Persistence && !cfg.fixed.contains(kind)) {
            c.fail("fixed", "method 'fixed' needs a point for model '" + std::string(tune::to_string(kind)) + "'");
        }
        if (method == TunerMethod::Bayesian && kind != tune::ModelKind::Persistence && cfg.tuner.budget < 2) {
            c.fail("tuner.budget", "Bayesian optimization needs a budget of at least 2");
        }
    }

    if (!c.problems.empty()) throw ConfigError(std::move(c.problems));
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"config: cannot open " + path.string()});
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError({"config: " + path.string() + " is not valid JSON (" + e.what() + ")"});
    }
    return parse_config(doc, path.parent_path());
}

}  // namespace idxcast::cli
