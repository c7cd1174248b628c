#include "idxcast/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace idxcast::preprocess {

NormalizationParams::NormalizationParams(double mean, double min, double max)
    : mean_(mean), min_(min), max_(max) {
    if (!(max > min) || !std::isfinite(max - min)) {
        throw Error(ErrorKind::DegenerateRange, "max must exceed min");
    }
    if (mean < min || mean > max) throw Error(ErrorKind::DegenerateRange, "mean outside [min, max]");
}

NormalizationParams fit_normalizer(std::span<const double> values) {
    if (values.size() < 2) throw Error(ErrorKind::TooShort, "need at least 2 values");
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorKind::TooShort, "non-finite value");
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) throw Error(ErrorKind::DegenerateRange, "constant series");
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    // Rounding can push the mean of a near-constant series a hair outside.
    return {std::clamp(mean, *lo, *hi), *lo, *hi};
}

std::vector<double> normalize(std::span<const double> values, const NormalizationParams& params) {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(),
                   [&](double v) { return params.normalize(v); });
    return out;
}

std::vector<double> denormalize(std::span<const double> values, const NormalizationParams& params) {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(),
                   [&](double v) { return params.denormalize(v); });
    return out;
}

void FeatureMatrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw Error(ErrorKind::WidthMismatch, "row width differs");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

WindowedDataset WindowedDataset::subset(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) throw Error(ErrorKind::InvalidSplitConfig, "subset out of range");
    WindowedDataset out;
    out.window_size = window_size;
    out.features = FeatureMatrix(0, window_size);
    for (std::size_t i = begin; i < end; ++i) out.features.append_row(features.row(i));
    out.targets.assign(targets.begin() + static_cast<std::ptrdiff_t>(begin),
                       targets.begin() + static_cast<std::ptrdiff_t>(end));
    if (!target_dates.empty()) {
        out.target_dates.assign(target_dates.begin() + static_cast<std::ptrdiff_t>(begin),
                                target_dates.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

WindowedDataset make_windows(std::span<const double> values, std::span<const Date> dates,
                             std::size_t window_size) {
    if (window_size == 0) throw Error(ErrorKind::WindowTooLarge, "window size must be positive");
    if (values.size() <= window_size) {
        throw Error(ErrorKind::WindowTooLarge, "series of length " + std::to_string(values.size()) +
                                                   " cannot fill window " + std::to_string(window_size));
    }
    if (!dates.empty() && dates.size() != values.size()) {
        throw Error(ErrorKind::LengthMismatch, "dates and values differ in length");
    }
    const std::size_t n = values.size() - window_size;
    WindowedDataset out;
    out.window_size = window_size;
    out.features = FeatureMatrix(n, window_size);
    out.targets.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < window_size; ++j) out.features(i, j) = values[i + j];
        out.targets[i] = values[i + window_size];
    }
    if (!dates.empty()) out.target_dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(window_size), dates.end());
    return out;
}

std::vector<DatasetSlice> default_slices() {
    using namespace std::chrono;
    // D3 stops one test horizon (about 60 sessions) short of 2023-03-31 so
    // its test block still lies inside the data span.
    return {
        {"D1", 2020y / February / 19d, 60, std::nullopt},
        {"D2", 2021y / March / 31d, 60, std::nullopt},
        {"D3", 2022y / December / 30d, 60, std::nullopt},
    };
}

SlicePair slice_regime(const PriceSeries& series, const DatasetSlice& slice) {
    const auto& obs = series.observations;
    if (obs.empty() || slice.train_end < obs.front().date || slice.train_end > obs.back().date) {
        throw Error(ErrorKind::CutoffOutOfRange, slice.name + " cutoff " + format_date(slice.train_end));
    }
    if (slice.test_horizon == 0) throw Error(ErrorKind::InsufficientTestData, slice.name + " horizon is 0");

    auto by_date = [](const ingest::Observation& o, const Date& d) { return o.date < d; };
    const auto train_end = std::upper_bound(obs.begin(), obs.end(), slice.train_end,
                                            [](const Date& d, const ingest::Observation& o) { return d < o.date; });
    auto test_begin = train_end;
    if (slice.test_start) {
        if (*slice.test_start <= slice.train_end) {
            throw Error(ErrorKind::CutoffOutOfRange, slice.name + " test_start must follow train_end");
        }
        test_begin = std::lower_bound(obs.begin(), obs.end(), *slice.test_start, by_date);
    }
    const auto remaining = static_cast<std::size_t>(obs.end() - test_begin);
    if (remaining < slice.test_horizon) {
        throw Error(ErrorKind::InsufficientTestData,
                    slice.name + " needs " + std::to_string(slice.test_horizon) + " observations after cutoff, " +
                        std::to_string(remaining) + " available");
    }

    SlicePair pair;
    pair.name = slice.name;
    pair.train = {series.index_name, {obs.begin(), train_end}};
    pair.context = {series.index_name, {obs.begin(), test_begin}};
    pair.test = {series.index_name,
                 {test_begin, test_begin + static_cast<std::ptrdiff_t>(slice.test_horizon)}};
    return pair;
}

std::vector<SlicePair> slice_regimes(const PriceSeries& series, std::span<const DatasetSlice> slices) {
    std::vector<SlicePair> out;
    out.reserve(slices.size());
    for (const auto& slice : slices) out.push_back(slice_regime(series, slice));
    return out;
}

std::vector<CvSplit> rolling_splits(std::size_t n_samples, std::size_t initial_train, std::size_t horizon) {
    if (initial_train == 0 || horizon == 0 || initial_train + horizon > n_samples) {
        throw Error(ErrorKind::InvalidSplitConfig,
                    "n=" + std::to_string(n_samples) + " initial=" + std::to_string(initial_train) +
                        " horizon=" + std::to_string(horizon));
    }
    std::vector<CvSplit> splits;
    for (std::size_t end = initial_train; end + horizon <= n_samples; end += horizon) {
        splits.push_back({{0, end}, {end, end + horizon}});
    }
    return splits;
}

}  // namespace idxcast::preprocess
