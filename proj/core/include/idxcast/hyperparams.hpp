#pragma once

#include "idxcast/common.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace idxcast::tune {

enum class ModelKind { Forest, Lstm, Persistence };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

using ParamValue = std::variant<std::int64_t, double, std::string>;

struct IntUniform {
    std::int64_t lo = 0;
    std::int64_t hi = 1;
};
struct RealUniform {
    double lo = 0.0;
    double hi = 1.0;
};
struct RealLogUniform {
    double lo = 1e-4;
    double hi = 1.0;
};
struct Categorical {
    std::vector<ParamValue> options;
};

using ParamDomain = std::variant<IntUniform, RealUniform, RealLogUniform, Categorical>;

struct ParamSpec {
    std::string name;
    ParamDomain domain;

    /// Throws InvalidConfig for empty ranges or option lists.
    void validate() const;
    bool contains(const ParamValue& value) const;
    /// Width of this parameter in the unit-cube encoding.
    std::size_t encoded_width() const;
};

using HyperparamPoint = std::map<std::string, ParamValue>;

class HyperparamSpace {
public:
    HyperparamSpace() = default;
    HyperparamSpace(ModelKind kind, std::vector<ParamSpec> specs);

    ModelKind model_kind() const { return kind_; }
    const std::vector<ParamSpec>& specs() const { return specs_; }
    std::size_t encoded_dim() const;

    /// One independent draw per spec.
    HyperparamPoint sample(Rng& rng) const;

    /// Integers and reals map affinely into [0, 1] (log scale for
    /// log-uniform); categoricals become one-hot blocks.
    Eigen::VectorXd encode(const HyperparamPoint& point) const;
    /// Inverse of encode(): integers round, categoricals take the argmax.
    HyperparamPoint decode(const Eigen::VectorXd& x) const;

    bool contains(const HyperparamPoint& point) const;

private:
    ModelKind kind_ = ModelKind::Forest;
    std::vector<ParamSpec> specs_;
};

HyperparamPoint sample_point(const HyperparamSpace& space, Rng& rng);

/// Search spaces spanning the ranges seen in published best configurations.
HyperparamSpace default_space(ModelKind kind);

std::int64_t get_int(const HyperparamPoint& point, const std::string& name);
double get_real(const HyperparamPoint& point, const std::string& name);
std::string get_string(const HyperparamPoint& point, const std::string& name);

nlohmann::json to_json(const ParamValue& value);
ParamValue param_value_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HyperparamPoint& point);
HyperparamPoint point_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ParamSpec& spec);
/// {"name": .., "type": "int"|"real"|"loguniform"|"categorical", "low", "high", "options"}
ParamSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HyperparamSpace& space);

}  // namespace idxcast::tune
