#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace idxcast {

enum class ErrorKind {
    MissingFile,
    MissingColumn,
    EmptyFile,
    AllRowsInvalid,
    DegenerateRange,
    TooShort,
    WindowTooLarge,
    CutoffOutOfRange,
    InsufficientTestData,
    InvalidSplitConfig,
    InsufficientData,
    EmptyDataset,
    WidthMismatch,
    ShapeMismatch,
    DivergenceDetected,
    SingularKernel,
    LengthMismatch,
    Empty,
    ConstantActual,
    InvalidConfig,
    InvalidModel,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// True for errors caused by the data itself (as opposed to configuration).
bool is_data_error(ErrorKind kind);

using Date = std::chrono::year_month_day;

/// Parses "YYYY-MM-DD" only.
std::optional<Date> parse_iso_date(std::string_view text);
std::string format_date(Date date);

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double value);

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/**
 * Seeded generator with portable draws.
 *
 * std::uniform_*_distribution output is implementation-defined, so the draws
 * are computed from the raw mt19937_64 stream to keep results identical
 * across standard libraries.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t index(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

}  // namespace idxcast
