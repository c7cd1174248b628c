#pragma once

#include "idxcast/common.hpp"
#include "idxcast/ingest.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace idxcast::preprocess {

using ingest::PriceSeries;

/// Mean/min/max of a training slice. Maps x to (x - mean) / (max - min).
class NormalizationParams {
public:
    /// Throws DegenerateRange unless min <= mean <= max and max > min.
    NormalizationParams(double mean, double min, double max);

    double mean() const { return mean_; }
    double min() const { return min_; }
    double max() const { return max_; }
    double range() const { return max_ - min_; }

    double normalize(double value) const { return (value - mean_) / range(); }
    double denormalize(double value) const { return value * range() + mean_; }

    bool operator==(const NormalizationParams&) const = default;

private:
    double mean_;
    double min_;
    double max_;
};

NormalizationParams fit_normalizer(std::span<const double> values);
std::vector<double> normalize(std::span<const double> values, const NormalizationParams& params);
std::vector<double> denormalize(std::span<const double> values, const NormalizationParams& params);

/// Dense row-major matrix of lag features.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    void append_row(std::span<const double> values);

    bool operator==(const FeatureMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct WindowedDataset {
    std::size_t window_size = 0;
    FeatureMatrix features;  ///< n_samples x window_size, normalized units
    std::vector<double> targets;
    std::vector<Date> target_dates;

    std::size_t size() const { return targets.size(); }
    /// Rows [begin, end) as a standalone dataset.
    WindowedDataset subset(std::size_t begin, std::size_t end) const;
};

/// Row i holds values[i, i + window_size); target i is values[i + window_size].
/// `dates` may be empty when calendar alignment is not needed.
WindowedDataset make_windows(std::span<const double> values, std::span<const Date> dates,
                             std::size_t window_size);

struct DatasetSlice {
    std::string name;  ///< D1, D2, D3 or a user label
    Date train_end;
    std::size_t test_horizon = 60;
    /// When set, the test block starts at the first observation on or after
    /// this date instead of immediately after train_end.
    std::optional<Date> test_start;
};

/// Nested regimes over the 2009-06-01..2023-03-31 span.
std::vector<DatasetSlice> default_slices();

struct SlicePair {
    std::string name;
    PriceSeries train;    ///< every observation dated <= train_end
    PriceSeries context;  ///< every observation before the test block (lag source)
    PriceSeries test;     ///< test_horizon observations after the cutoff
};

SlicePair slice_regime(const PriceSeries& series, const DatasetSlice& slice);
std::vector<SlicePair> slice_regimes(const PriceSeries& series, std::span<const DatasetSlice> slices);

/// Half-open index range.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool operator==(const IndexRange&) const = default;
};

struct CvSplit {
    IndexRange train;
    IndexRange test;

    bool operator==(const CvSplit&) const = default;
};

/// Expanding-window walk-forward splits: split k trains on
/// [0, initial_train + k * horizon) and tests on the next `horizon` indices.
std::vector<CvSplit> rolling_splits(std::size_t n_samples, std::size_t initial_train, std::size_t horizon);

}  // namespace idxcast::preprocess
