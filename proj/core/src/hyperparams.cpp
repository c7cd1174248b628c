#include "idxcast/hyperparams.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace idxcast::tune {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const ParamValue& lookup(const HyperparamPoint& point, const std::string& name) {
    auto it = point.find(name);
    if (it == point.end()) throw Error(ErrorKind::InvalidConfig, "hyperparameter '" + name + "' missing");
    return it->second;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::string_view to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::Forest: return "forest";
    case ModelKind::Lstm: return "lstm";
    case ModelKind::Persistence: return "persistence";
    }
    return "forest";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "forest" || text == "rf" || text == "random_forest") return ModelKind::Forest;
    if (text == "lstm") return ModelKind::Lstm;
    if (text == "persistence" || text == "naive") return ModelKind::Persistence;
    throw Error(ErrorKind::InvalidConfig, "unknown model kind '" + std::string(text) + "'");
}

void ParamSpec::validate() const {
    if (name.empty()) throw Error(ErrorKind::InvalidConfig, "parameter without a name");
    std::visit(overloaded{
                   [&](const IntUniform& d) {
                       if (!(d.lo < d.hi)) throw Error(ErrorKind::InvalidConfig, name + ": need low < high");
                   },
                   [&](const RealUniform& d) {
                       if (!(d.lo < d.hi)) throw Error(ErrorKind::InvalidConfig, name + ": need low < high");
                   },
                   [&](const RealLogUniform& d) {
                       if (!(d.lo > 0.0 && d.lo < d.hi)) {
                           throw Error(ErrorKind::InvalidConfig, name + ": need 0 < low < high");
                       }
                   },
                   [&](const Categorical& d) {
                       if (d.options.empty()) throw Error(ErrorKind::InvalidConfig, name + ": no options");
                   },
               },
               domain);
}

bool ParamSpec::contains(const ParamValue& value) const {
    return std::visit(overloaded{
                          [&](const IntUniform& d) {
                              const auto* v = std::get_if<std::int64_t>(&value);
                              return v && *v >= d.lo && *v <= d.hi;
                          },
                          [&](const RealUniform& d) {
                              const auto* v = std::get_if<double>(&value);
                              return v && *v >= d.lo && *v <= d.hi;
                          },
                          [&](const RealLogUniform& d) {
                              const auto* v = std::get_if<double>(&value);
                              return v && *v >= d.lo && *v <= d.hi;
                          },
                          [&](const Categorical& d) {
                              return std::find(d.options.begin(), d.options.end(), value) != d.options.end();
                          },
                      },
                      domain);
}

std::size_t ParamSpec::encoded_width() const {
    if (const auto* c = std::get_if<Categorical>(&domain)) return c->options.size();
    return 1;
}

HyperparamSpace::HyperparamSpace(ModelKind kind, std::vector<ParamSpec> specs)
    : kind_(kind), specs_(std::move(specs)) {
    std::set<std::string> names;
    for (const auto& spec : specs_) {
        spec.validate();
        if (!names.insert(spec.name).second) {
            throw Error(ErrorKind::InvalidConfig, "duplicate parameter '" + spec.name + "'");
        }
    }
}

std::size_t HyperparamSpace::encoded_dim() const {
    std::size_t d = 0;
    for (const auto& spec : specs_) d += spec.encoded_width();
    return d;
}

HyperparamPoint HyperparamSpace::sample(Rng& rng) const {
    HyperparamPoint point;
    for (const auto& spec : specs_) {
        point[spec.name] = std::visit(
            overloaded{
                [&](const IntUniform& d) -> ParamValue {
                    return d.lo + static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(d.hi - d.lo) + 1));
                },
                [&](const RealUniform& d) -> ParamValue { return rng.uniform(d.lo, d.hi); },
                [&](const RealLogUniform& d) -> ParamValue {
                    return std::clamp(std::exp(rng.uniform(std::log(d.lo), std::log(d.hi))), d.lo, d.hi);
                },
                [&](const Categorical& d) -> ParamValue { return d.options[rng.index(d.options.size())]; },
            },
            spec.domain);
    }
    return point;
}

Eigen::VectorXd HyperparamSpace::encode(const HyperparamPoint& point) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(encoded_dim()));
    Eigen::Index k = 0;
    for (const auto& spec : specs_) {
        const ParamValue& value = lookup(point, spec.name);
        std::visit(overloaded{
                       [&](const IntUniform& d) {
                           x(k++) = clamp01(static_cast<double>(std::get<std::int64_t>(value) - d.lo) /
                                            static_cast<double>(d.hi - d.lo));
                       },
                       [&](const RealUniform& d) { x(k++) = clamp01((std::get<double>(value) - d.lo) / (d.hi - d.lo)); },
                       [&](const RealLogUniform& d) {
                           x(k++) = clamp01((std::log(std::get<double>(value)) - std::log(d.lo)) /
                                            (std::log(d.hi) - std::log(d.lo)));
                       },
                       [&](const Categorical& d) {
                           const auto it = std::find(d.options.begin(), d.options.end(), value);
                           if (it == d.options.end()) {
                               throw Error(ErrorKind::InvalidConfig, spec.name + ": value not among options");
                           }
                           x(k + (it - d.options.begin())) = 1.0;
                           k += static_cast<Eigen::Index>(d.options.size());
                       },
                   },
                   spec.domain);
    }
    return x;
}

HyperparamPoint HyperparamSpace::decode(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != encoded_dim()) {
        throw Error(ErrorKind::ShapeMismatch, "encoded vector has the wrong dimension");
    }
    HyperparamPoint point;
    Eigen::Index k = 0;
    for (const auto& spec : specs_) {
        point[spec.name] = std::visit(
            overloaded{
                [&](const IntUniform& d) -> ParamValue {
                    const double span = static_cast<double>(d.hi - d.lo);
                    return d.lo + static_cast<std::int64_t>(std::llround(clamp01(x(k++)) * span));
                },
                [&](const RealUniform& d) -> ParamValue {
                    return std::clamp(d.lo + clamp01(x(k++)) * (d.hi - d.lo), d.lo, d.hi);
                },
                [&](const RealLogUniform& d) -> ParamValue {
                    const double l = std::log(d.lo) + clamp01(x(k++)) * (std::log(d.hi) - std::log(d.lo));
                    return std::clamp(std::exp(l), d.lo, d.hi);
                },
                [&](const Categorical& d) -> ParamValue {
                    Eigen::Index best = 0;
                    const auto n = static_cast<Eigen::Index>(d.options.size());
                    for (Eigen::Index j = 1; j < n; ++j) {
                        if (x(k + j) > x(k + best)) best = j;
                    }
                    k += n;
                    return d.options[static_cast<std::size_t>(best)];
                },
            },
            spec.domain);
    }
    return point;
}

bool HyperparamSpace::contains(const HyperparamPoint& point) const {
    for (const auto& spec : specs_) {
        auto it = point.find(spec.name);
        if (it == point.end() || !spec.contains(it->second)) return false;
    }
    return true;
}

HyperparamPoint sample_point(const HyperparamSpace& space, Rng& rng) { return space.sample(rng); }

HyperparamSpace default_space(ModelKind kind) {
    using V = std::vector<ParamValue>;
    switch (kind) {
    case ModelKind::Forest:
        return {kind,
                {
                    {"window_size", IntUniform{1, 10}},
                    {"n_estimators", IntUniform{50, 400}},
                    {"max_depth", Categorical{V{std::int64_t{5}, std::int64_t{10}, std::int64_t{14},
                                                std::int64_t{20}, std::int64_t{30}, std::string("None")}}},
                    {"max_features", Categorical{V{std::string("All"), std::string("Log2"), std::string("Sqrt")}}},
                    {"min_samples_leaf", IntUniform{1, 5}},
                    {"min_samples_split", IntUniform{2, 14}},
                }};
    case ModelKind::Lstm:
        return {kind,
                {
                    {"window_size", IntUniform{1, 10}},
                    {"epochs", IntUniform{1, 30}},
                    {"units", Categorical{V{std::int64_t{8}, std::int64_t{16}, std::int64_t{32}}}},
                    {"batch_size", Categorical{V{std::int64_t{16}, std::int64_t{32}, std::int64_t{64}}}},
                    {"l1", RealLogUniform{1e-6, 1e-1}},
                    {"l2", RealLogUniform{1e-6, 1e-1}},
                    {"learning_rate", RealLogUniform{1e-4, 1e-1}},
                }};
    case ModelKind::Persistence:
        return {kind, {{"window_size", Categorical{V{std::int64_t{1}}}}}};
    }
    return {};
}

std::int64_t get_int(const HyperparamPoint& point, const std::string& name) {
    const ParamValue& v = lookup(point, name);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    if (const auto* d = std::get_if<double>(&v); d && std::floor(*d) == *d) return static_cast<std::int64_t>(*d);
    throw Error(ErrorKind::InvalidConfig, "hyperparameter '" + name + "' must be an integer");
}

double get_real(const HyperparamPoint& point, const std::string& name) {
    const ParamValue& v = lookup(point, name);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw Error(ErrorKind::InvalidConfig, "hyperparameter '" + name + "' must be numeric");
}

std::string get_string(const HyperparamPoint& point, const std::string& name) {
    const ParamValue& v = lookup(point, name);
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw Error(ErrorKind::InvalidConfig, "hyperparameter '" + name + "' must be a string");
}

nlohmann::json to_json(const ParamValue& value) {
    return std::visit([](const auto& v) { return nlohmann::json(v); }, value);
}

ParamValue param_value_from_json(const nlohmann::json& j) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_null()) return std::string("None");
    throw Error(ErrorKind::InvalidConfig, "unsupported hyperparameter value " + j.dump());
}

nlohmann::json to_json(const HyperparamPoint& point) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, value] : point) j[name] = to_json(value);
    return j;
}

HyperparamPoint point_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "hyperparameter point must be an object");
    HyperparamPoint point;
    for (const auto& [name, value] : j.items()) point[name] = param_value_from_json(value);
    return point;
}

nlohmann::json to_json(const ParamSpec& spec) {
    nlohmann::json j{{"name", spec.name}};
    std::visit(overloaded{
                   [&](const IntUniform& d) { j.update({{"type", "int"}, {"low", d.lo}, {"high", d.hi}}); },
                   [&](const RealUniform& d) { j.update({{"type", "real"}, {"low", d.lo}, {"high", d.hi}}); },
                   [&](const RealLogUniform& d) {
                       j.update({{"type", "loguniform"}, {"low", d.lo}, {"high", d.hi}});
                   },
                   [&](const Categorical& d) {
                       nlohmann::json options = nlohmann::json::array();
                       for (const auto& o : d.options) options.push_back(to_json(o));
                       j.update({{"type", "categorical"}, {"options", options}});
                   },
               },
               spec.domain);
    return j;
}

ParamSpec spec_from_json(const nlohmann::json& j) {
    try {
        ParamSpec spec;
        spec.name = j.at("name").get<std::string>();
        const auto type = j.at("type").get<std::string>();
        if (type == "int") {
            spec.domain = IntUniform{j.at("low").get<std::int64_t>(), j.at("high").get<std::int64_t>()};
        } else if (type == "real") {
            spec.domain = RealUniform{j.at("low").get<double>(), j.at("high").get<double>()};
        } else if (type == "loguniform") {
            spec.domain = RealLogUniform{j.at("low").get<double>(), j.at("high").get<double>()};
        } else if (type == "categorical") {
            Categorical c;
            for (const auto& o : j.at("options")) c.options.push_back(param_value_from_json(o));
            spec.domain = std::move(c);
        } else {
            throw Error(ErrorKind::InvalidConfig, "unknown parameter type '" + type + "'");
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, std::string("parameter spec: ") + e.what());
    }
}

nlohmann::json to_json(const HyperparamSpace& space) {
    nlohmann::json specs = nlohmann::json::array();
    for (const auto& spec : space.specs()) specs.push_back(to_json(spec));
    return {{"model", to_string(space.model_kind())}, {"specs", specs}};
}

}  // namespace idxcast::tune
