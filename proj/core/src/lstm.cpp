#include "idxcast/lstm.hpp"

#include <cmath>

namespace idxcast::lstm {
namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& a) {
    return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Eigen::VectorXd tanh_of(const Eigen::VectorXd& a) {
    return a.unaryExpr([](double v) { return std::tanh(v); });
}

void check_window(const LstmParams& params, std::span<const double> window) {
    if (window.empty() || window.size() % params.input_size() != 0) {
        throw Error(ErrorKind::ShapeMismatch, "window length " + std::to_string(window.size()) +
                                                  " incompatible with input size " +
                                                  std::to_string(params.input_size()));
    }
}

double penalty(const LstmParams& params, double l1, double l2) {
    double total = 0.0;
    params.visit([&](std::span<const double> block, bool is_weight) {
        if (!is_weight) return;
        for (double w : block) total += l1 * std::abs(w) + l2 * w * w;
    });
    return total;
}

// Accumulates d(loss)/d(params) for one sample whose output error is dy.
void backprop_sample(const LstmParams& p, const ForwardCache& cache, double dy, LstmParams& grad) {
    grad.w_y += dy * cache.h_out;
    grad.b_y += dy;
    Eigen::VectorXd dh = dy * p.w_y;
    if (cache.mask.size() > 0) dh = dh.cwiseProduct(cache.mask);
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.units()));
    for (auto it = cache.steps.rbegin(); it != cache.steps.rend(); ++it) {
        const StepCache& s = *it;
        const Eigen::ArrayXd one_minus_tc2 = 1.0 - s.tanh_c.array().square();
        const Eigen::ArrayXd d_o = dh.array() * s.tanh_c.array();
        dc.array() += dh.array() * s.o.array() * one_minus_tc2;
        const Eigen::ArrayXd d_f = dc.array() * s.c_prev.array();
        const Eigen::ArrayXd d_i = dc.array() * s.g.array();
        const Eigen::ArrayXd d_g = dc.array() * s.i.array();

        std::array<Eigen::VectorXd, kGates> da;
        da[Forget] = (d_f * s.f.array() * (1.0 - s.f.array())).matrix();
        da[Input] = (d_i * s.i.array() * (1.0 - s.i.array())).matrix();
        da[Output] = (d_o * s.o.array() * (1.0 - s.o.array())).matrix();
        da[Candidate] = (d_g * (1.0 - s.g.array().square())).matrix();

        dh.setZero();
        for (std::size_t k = 0; k < kGates; ++k) {
            grad.W[k].noalias() += da[k] * s.x.transpose();
            grad.U[k].noalias() += da[k] * s.h_prev.transpose();
            grad.b[k] += da[k];
            dh.noalias() += p.U[k].transpose() * da[k];
        }
        dc.array() *= s.f.array();
    }
}

void add_penalty_gradient(const LstmParams& params, double l1, double l2, LstmParams& grad) {
    std::vector<std::span<const double>> source;
    params.visit([&](std::span<const double> block, bool) { source.push_back(block); });
    std::size_t b = 0;
    grad.visit([&](std::span<double> block, bool is_weight) {
        const auto src = source[b++];
        if (!is_weight) return;
        for (std::size_t k = 0; k < block.size(); ++k) {
            const double w = src[k];
            const double sign = w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
            block[k] += l1 * sign + 2.0 * l2 * w;
        }
    });
}

// Gradient of the batch rows [begin, end) with optional per-row dropout masks.
LstmParams batch_gradient(const LstmParams& params, const FeatureMatrix& x, std::span<const double> y,
                          std::size_t begin, std::size_t end, double l1, double l2,
                          const std::vector<Eigen::VectorXd>* masks) {
    LstmParams grad = LstmParams::zeros(params.units(), params.input_size());
    const double scale = 2.0 / static_cast<double>(end - begin);
    ForwardCache cache;
    for (std::size_t r = begin; r < end; ++r) {
        const Eigen::VectorXd* mask = masks ? &(*masks)[r - begin] : nullptr;
        const double pred = forward(params, x.row(r), &cache, mask);
        backprop_sample(params, cache, scale * (pred - y[r]), grad);
    }
    add_penalty_gradient(params, l1, l2, grad);
    return grad;
}

double batch_loss(const LstmParams& params, const FeatureMatrix& x, std::span<const double> y, double l1,
                  double l2) {
    double sse = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double e = forward(params, x.row(r)) - y[r];
        sse += e * e;
    }
    return sse / static_cast<double>(x.rows()) + penalty(params, l1, l2);
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
    if (j.at("rows").get<Eigen::Index>() != rows || j.at("cols").get<Eigen::Index>() != cols ||
        j.at("data").size() != static_cast<std::size_t>(rows * cols)) {
        throw Error(ErrorKind::InvalidModel, "weight block has the wrong shape");
    }
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at("data")[k++].get<double>();
    }
    return m;
}

constexpr std::array<const char*, kGates> kGateNames{"forget", "input", "output", "candidate"};

}  // namespace

void LstmConfig::validate() const {
    if (window_size < 1) throw Error(ErrorKind::InvalidConfig, "window_size must be >= 1");
    if (units < 1) throw Error(ErrorKind::InvalidConfig, "units must be >= 1");
    if (epochs < 1) throw Error(ErrorKind::InvalidConfig, "epochs must be >= 1");
    if (batch_size < 1) throw Error(ErrorKind::InvalidConfig, "batch_size must be >= 1");
    if (!(l1 >= 0.0) || !(l2 >= 0.0)) throw Error(ErrorKind::InvalidConfig, "l1/l2 must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorKind::InvalidConfig, "dropout must be in [0, 1)");
    if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidConfig, "learning_rate must be > 0");
}

LstmParams LstmParams::zeros(std::size_t units, std::size_t input_size) {
    const auto u = static_cast<Eigen::Index>(units);
    const auto in = static_cast<Eigen::Index>(input_size);
    LstmParams p;
    for (std::size_t k = 0; k < kGates; ++k) {
        p.W[k] = Eigen::MatrixXd::Zero(u, in);
        p.U[k] = Eigen::MatrixXd::Zero(u, u);
        p.b[k] = Eigen::VectorXd::Zero(u);
    }
    p.w_y = Eigen::VectorXd::Zero(u);
    return p;
}

LstmParams LstmParams::initialize(std::size_t units, std::uint64_t seed, std::size_t input_size) {
    LstmParams p = zeros(units, input_size);
    Rng rng(seed);
    const double k = 1.0 / std::sqrt(static_cast<double>(units));
    p.visit([&](std::span<double> block, bool is_weight) {
        if (!is_weight) return;
        for (double& w : block) w = rng.uniform(-k, k);
    });
    p.b[Forget].setOnes();
    return p;
}

void LstmParams::visit(const std::function<void(std::span<double>, bool)>& fn) {
    auto span_of = [](auto& m) { return std::span<double>(m.data(), static_cast<std::size_t>(m.size())); };
    for (auto& m : W) fn(span_of(m), true);
    for (auto& m : U) fn(span_of(m), true);
    for (auto& v : b) fn(span_of(v), false);
    fn(span_of(w_y), true);
    fn(std::span<double>(&b_y, 1), false);
}

void LstmParams::visit(const std::function<void(std::span<const double>, bool)>& fn) const {
    auto span_of = [](const auto& m) {
        return std::span<const double>(m.data(), static_cast<std::size_t>(m.size()));
    };
    for (const auto& m : W) fn(span_of(m), true);
    for (const auto& m : U) fn(span_of(m), true);
    for (const auto& v : b) fn(span_of(v), false);
    fn(span_of(w_y), true);
    fn(std::span<const double>(&b_y, 1), false);
}

std::size_t LstmParams::parameter_count() const {
    std::size_t n = 0;
    visit([&](std::span<const double> block, bool) { n += block.size(); });
    return n;
}

std::vector<double> LstmParams::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    visit([&](std::span<const double> block, bool) { out.insert(out.end(), block.begin(), block.end()); });
    return out;
}

void LstmParams::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw Error(ErrorKind::ShapeMismatch, "flat parameter size differs");
    std::size_t k = 0;
    visit([&](std::span<double> block, bool) {
        for (double& v : block) v = flat[k++];
    });
}

LstmState LstmState::zero(std::size_t units) {
    const auto u = static_cast<Eigen::Index>(units);
    return {Eigen::VectorXd::Zero(u), Eigen::VectorXd::Zero(u)};
}

LstmState lstm_step(const LstmParams& p, std::span<const double> x, const LstmState& state) {
    if (x.size() != p.input_size() || static_cast<std::size_t>(state.h.size()) != p.units() ||
        static_cast<std::size_t>(state.c.size()) != p.units()) {
        throw Error(ErrorKind::ShapeMismatch, "lstm_step input or state has the wrong size");
    }
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    auto pre = [&](std::size_t k) -> Eigen::VectorXd { return p.W[k] * xv + p.U[k] * state.h + p.b[k]; };
    const Eigen::VectorXd f = sigmoid(pre(Forget));
    const Eigen::VectorXd i = sigmoid(pre(Input));
    const Eigen::VectorXd o = sigmoid(pre(Output));
    const Eigen::VectorXd g = tanh_of(pre(Candidate));
    LstmState next;
    next.c = f.cwiseProduct(state.c) + i.cwiseProduct(g);
    next.h = o.cwiseProduct(tanh_of(next.c));
    return next;
}

double forward(const LstmParams& p, std::span<const double> window, ForwardCache* cache,
               const Eigen::VectorXd* dropout_mask) {
    check_window(p, window);
    const std::size_t in = p.input_size();
    const std::size_t steps = window.size() / in;
    if (cache) cache->steps.resize(steps);

    Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.units()));
    Eigen::VectorXd c = h;
    for (std::size_t t = 0; t < steps; ++t) {
        const Eigen::Map<const Eigen::VectorXd> xv(window.data() + t * in, static_cast<Eigen::Index>(in));
        auto pre = [&](std::size_t k) -> Eigen::VectorXd { return p.W[k] * xv + p.U[k] * h + p.b[k]; };
        Eigen::VectorXd f = sigmoid(pre(Forget));
        Eigen::VectorXd i = sigmoid(pre(Input));
        Eigen::VectorXd o = sigmoid(pre(Output));
        Eigen::VectorXd g = tanh_of(pre(Candidate));
        Eigen::VectorXd c_next = f.cwiseProduct(c) + i.cwiseProduct(g);
        Eigen::VectorXd tc = tanh_of(c_next);
        Eigen::VectorXd h_next = o.cwiseProduct(tc);
        if (cache) {
            auto& s = cache->steps[t];
            s.x = xv;
            s.h_prev = h;
            s.c_prev = c;
            s.f = std::move(f);
            s.i = std::move(i);
            s.o = std::move(o);
            s.g = std::move(g);
            s.c = c_next;
            s.tanh_c = std::move(tc);
        }
        h = std::move(h_next);
        c = std::move(c_next);
    }
    if (dropout_mask) h = h.cwiseProduct(*dropout_mask);
    if (cache) {
        cache->h_out = h;
        if (dropout_mask) {
            cache->mask = *dropout_mask;
        } else {
            cache->mask.resize(0);
        }
    }
    return p.w_y.dot(h) + p.b_y;
}

double loss(const LstmParams& params, const WindowedDataset& batch, double l1, double l2) {
    if (batch.size() == 0) throw Error(ErrorKind::EmptyDataset, "empty batch");
    return batch_loss(params, batch.features, batch.targets, l1, l2);
}

LstmParams backward(const LstmParams& params, const WindowedDataset& batch, double l1, double l2) {
    if (batch.size() == 0) throw Error(ErrorKind::EmptyDataset, "empty batch");
    return batch_gradient(params, batch.features, batch.targets, 0, batch.size(), l1, l2, nullptr);
}

LstmModel fit_lstm(const WindowedDataset& data, const LstmConfig& config, FitTrace* trace) {
    config.validate();
    if (data.size() == 0) throw Error(ErrorKind::EmptyDataset, "cannot fit an LSTM on no samples");
    if (data.features.cols() != config.window_size) {
        throw Error(ErrorKind::ShapeMismatch, "dataset window differs from config window_size");
    }

    LstmModel model{config, LstmParams::initialize(config.units, config.seed)};
    Rng dropout_rng(mix_seed(config.seed, 1));

    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const std::size_t n_params = model.params.parameter_count();
    std::vector<double> m(n_params, 0.0), v(n_params, 0.0);
    std::size_t step = 0;

    const auto units = static_cast<Eigen::Index>(config.units);
    std::vector<Eigen::VectorXd> masks;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t begin = 0; begin < data.size(); begin += config.batch_size) {
            const std::size_t end = std::min(begin + config.batch_size, data.size());
            const std::vector<Eigen::VectorXd>* mask_ptr = nullptr;
            if (config.dropout > 0.0) {
                masks.assign(end - begin, Eigen::VectorXd(units));
                const double keep_scale = 1.0 / (1.0 - config.dropout);
                for (auto& mask : masks) {
                    for (Eigen::Index j = 0; j < units; ++j) {
                        mask(j) = dropout_rng.uniform01() >= config.dropout ? keep_scale : 0.0;
                    }
                }
                mask_ptr = &masks;
            }
            const auto grad = batch_gradient(model.params, data.features, data.targets, begin, end, config.l1,
                                             config.l2, mask_ptr)
                                  .flatten();
            auto theta = model.params.flatten();
            ++step;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t k = 0; k < n_params; ++k) {
                m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k];
                v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k];
                theta[k] -= config.learning_rate * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + eps);
            }
            model.params.assign(theta);
        }
        const double epoch_loss = batch_loss(model.params, data.features, data.targets, config.l1, config.l2);
        if (!std::isfinite(epoch_loss)) {
            throw Error(ErrorKind::DivergenceDetected, "loss became non-finite in epoch " + std::to_string(epoch + 1));
        }
        if (trace) trace->epoch_losses.push_back(epoch_loss);
    }
    return model;
}

double predict_lstm(const LstmModel& model, std::span<const double> window) {
    if (window.size() != model.config.window_size) {
        throw Error(ErrorKind::ShapeMismatch, "expected window " + std::to_string(model.config.window_size) +
                                                  ", got " + std::to_string(window.size()));
    }
    return forward(model.params, window);
}

std::vector<double> predict_lstm(const LstmModel& model, const FeatureMatrix& features) {
    std::vector<double> out(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) out[r] = predict_lstm(model, features.row(r));
    return out;
}

nlohmann::json to_json(const LstmConfig& c) {
    return {{"window_size", c.window_size}, {"units", c.units},       {"epochs", c.epochs},
            {"batch_size", c.batch_size},   {"l1", c.l1},             {"l2", c.l2},
            {"dropout", c.dropout},         {"learning_rate", c.learning_rate}, {"seed", c.seed}};
}

LstmConfig lstm_config_from_json(const nlohmann::json& j) {
    LstmConfig c;
    c.window_size = j.at("window_size").get<std::size_t>();
    c.units = j.at("units").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.l1 = j.value("l1", 0.0);
    c.l2 = j.value("l2", 0.0);
    c.dropout = j.value("dropout", 0.0);
    c.learning_rate = j.value("learning_rate", 1e-3);
    c.seed = j.value("seed", std::uint64_t{0});
    c.validate();
    return c;
}

nlohmann::json to_json(const LstmModel& model) {
    const auto& p = model.params;
    nlohmann::json gates = nlohmann::json::object();
    for (std::size_t k = 0; k < kGates; ++k) {
        gates[kGateNames[k]] = {{"W", matrix_json(p.W[k])}, {"U", matrix_json(p.U[k])}, {"b", matrix_json(p.b[k])}};
    }
    return {{"type", "lstm"},
            {"config", to_json(model.config)},
            {"units", p.units()},
            {"input_size", p.input_size()},
            {"gates", gates},
            {"w_y", matrix_json(p.w_y)},
            {"b_y", p.b_y}};
}

LstmModel lstm_model_from_json(const nlohmann::json& j) {
    try {
        LstmModel model;
        model.config = lstm_config_from_json(j.at("config"));
        const auto u = j.at("units").get<Eigen::Index>();
        const auto in = j.at("input_size").get<Eigen::Index>();
        if (u != static_cast<Eigen::Index>(model.config.units) || in != 1) {
            throw Error(ErrorKind::InvalidModel, "shape header disagrees with config");
        }
        auto& p = model.params;
        for (std::size_t k = 0; k < kGates; ++k) {
            const auto& g = j.at("gates").at(kGateNames[k]);
            p.W[k] = matrix_from_json(g.at("W"), u, in);
            p.U[k] = matrix_from_json(g.at("U"), u, u);
            p.b[k] = matrix_from_json(g.at("b"), u, 1);
        }
        p.w_y = matrix_from_json(j.at("w_y"), u, 1);
        p.b_y = j.at("b_y").get<double>();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidModel, e.what());
    }
}

}  // namespace idxcast::lstm
