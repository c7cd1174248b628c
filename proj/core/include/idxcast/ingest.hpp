#pragma once

#include "idxcast/common.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace idxcast::ingest {

/// One data row as read from disk. Missing or unparseable fields stay empty
/// so the cleaner can account for them.
struct RawRecord {
    std::string date_text;
    std::optional<Date> date;
    bool date_reformatted = false;  ///< parsed from a non-ISO format
    std::optional<double> close;    ///< empty for non-numeric text
    std::size_t source_line = 0;    ///< 1-based line in the source file
};

struct Observation {
    Date date;
    double close = 0.0;

    bool operator==(const Observation&) const = default;
};

/// Ordered daily closes of one index: dates strictly increasing, closes
/// finite and positive.
struct PriceSeries {
    std::string index_name;
    std::vector<Observation> observations;

    std::size_t size() const { return observations.size(); }
    bool empty() const { return observations.empty(); }
    std::vector<double> values() const;
    std::vector<Date> dates() const;

    bool operator==(const PriceSeries&) const = default;
};

/**
 * Row accounting for one cleaning pass.
 *
 * rows_dropped_nan counts every row rejected for an unusable value: a
 * non-numeric or non-finite close, a non-positive close, or a date that none
 * of the accepted formats can parse.
 */
struct CleaningReport {
    std::size_t rows_read = 0;
    std::size_t rows_dropped_nan = 0;
    std::size_t rows_dropped_duplicate_date = 0;
    std::size_t rows_date_reformatted = 0;

    bool operator==(const CleaningReport&) const = default;
};

struct CsvColumns {
    std::vector<std::string> date_names{"date"};
    std::vector<std::string> close_names{"close", "adj close", "adj_close", "price"};
};

/// Accepts ISO-8601, MM/DD/YYYY and DD-Mon-YYYY.
std::optional<Date> parse_date(std::string_view text, bool* reformatted = nullptr);

std::vector<RawRecord> parse_csv(const std::filesystem::path& path,
                                 const CsvColumns& columns = {});

struct CleanResult {
    PriceSeries series;
    CleaningReport report;
};

CleanResult clean(const std::vector<RawRecord>& records, std::string index_name = {});

/// Records equivalent to an already clean series (ISO dates, valid closes).
std::vector<RawRecord> to_records(const PriceSeries& series);

/// Two-column `date,close` CSV.
void write_series_csv(const PriceSeries& series, const std::filesystem::path& path);
PriceSeries read_series_csv(const std::filesystem::path& path, std::string index_name);

nlohmann::json to_json(const CleaningReport& report);

}  // namespace idxcast::ingest
