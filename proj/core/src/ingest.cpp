#include "idxcast/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

namespace idxcast::ingest {
namespace {

std::string trim(std::string_view text) {
    auto first = text.find_first_not_of(" \t\r\n\"");
    if (first == std::string_view::npos) return {};
    auto last = text.find_last_not_of(" \t\r\n\"");
    return std::string(text.substr(first, last - first + 1));
}

std::string lower(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            fields.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(trim(current));
    return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

std::optional<Date> make_date(int y, unsigned m, unsigned d) {
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) return std::nullopt;
    return date;
}

std::optional<double> parse_close(std::string_view text) {
    std::string cleaned;
    for (char c : text) {
        if (c != ',' && c != ' ') cleaned.push_back(c);
    }
    if (cleaned.empty()) return std::nullopt;
    double value = 0.0;
    // from_chars accepts "nan"/"inf"; those are kept and rejected by clean().
    if (!parse_number(std::string_view(cleaned), value)) return std::nullopt;
    return value;
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                       const std::vector<std::string>& names) {
    for (const auto& name : names) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (lower(header[i]) == lower(name)) return i;
        }
    }
    return std::nullopt;
}

}  // namespace

std::vector<double> PriceSeries::values() const {
    std::vector<double> out;
    out.reserve(observations.size());
    for (const auto& obs : observations) out.push_back(obs.close);
    return out;
}

std::vector<Date> PriceSeries::dates() const {
    std::vector<Date> out;
    out.reserve(observations.size());
    for (const auto& obs : observations) out.push_back(obs.date);
    return out;
}

std::optional<Date> parse_date(std::string_view text, bool* reformatted) {
    if (reformatted) *reformatted = false;
    if (auto iso = parse_iso_date(text)) return iso;

    // MM/DD/YYYY
    if (auto s1 = text.find('/'); s1 != std::string_view::npos) {
        auto s2 = text.find('/', s1 + 1);
        if (s2 == std::string_view::npos) return std::nullopt;
        unsigned m = 0, d = 0;
        int y = 0;
        if (!parse_number(text.substr(0, s1), m) || !parse_number(text.substr(s1 + 1, s2 - s1 - 1), d) ||
            text.size() - s2 - 1 != 4 || !parse_number(text.substr(s2 + 1), y)) {
            return std::nullopt;
        }
        auto date = make_date(y, m, d);
        if (date && reformatted) *reformatted = true;
        return date;
    }

    // DD-Mon-YYYY
    static constexpr std::array<std::string_view, 12> kMonths{
        "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
    auto d1 = text.find('-');
    auto d2 = d1 == std::string_view::npos ? d1 : text.find('-', d1 + 1);
    if (d2 == std::string_view::npos) return std::nullopt;
    unsigned d = 0;
    int y = 0;
    if (!parse_number(text.substr(0, d1), d) || text.size() - d2 - 1 != 4 ||
        !parse_number(text.substr(d2 + 1), y)) {
        return std::nullopt;
    }
    const std::string mon = lower(std::string(text.substr(d1 + 1, d2 - d1 - 1)));
    for (unsigned m = 0; m < kMonths.size(); ++m) {
        if (mon == kMonths[m]) {
            auto date = make_date(y, m + 1, d);
            if (date && reformatted) *reformatted = true;
            return date;
        }
    }
    return std::nullopt;
}

std::vector<RawRecord> parse_csv(const std::filesystem::path& path, const CsvColumns& columns) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) throw Error(ErrorKind::EmptyFile, path.string() + " has no header");

    auto date_col = find_column(header, columns.date_names);
    if (!date_col) throw Error(ErrorKind::MissingColumn, columns.date_names.front());
    auto close_col = find_column(header, columns.close_names);
    if (!close_col) throw Error(ErrorKind::MissingColumn, columns.close_names.front());

    std::vector<RawRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        RawRecord rec;
        rec.source_line = line_no;
        if (*date_col < fields.size()) {
            rec.date_text = fields[*date_col];
            rec.date = parse_date(rec.date_text, &rec.date_reformatted);
        }
        if (*close_col < fields.size()) rec.close = parse_close(fields[*close_col]);
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw Error(ErrorKind::EmptyFile, path.string() + " has no data rows");
    return records;
}

CleanResult clean(const std::vector<RawRecord>& records, std::string index_name) {
    CleanResult result;
    result.series.index_name = std::move(index_name);
    auto& report = result.report;
    report.rows_read = records.size();

    std::vector<const RawRecord*> valid;
    valid.reserve(records.size());
    for (const auto& rec : records) {
        if (!rec.date || !rec.close || !std::isfinite(*rec.close) || *rec.close <= 0.0) {
            ++report.rows_dropped_nan;
            continue;
        }
        if (rec.date_reformatted) ++report.rows_date_reformatted;
        valid.push_back(&rec);
    }

    // Stable sort keeps file order among equal dates, so the first
    // occurrence survives deduplication.
    std::stable_sort(valid.begin(), valid.end(),
                     [](const RawRecord* a, const RawRecord* b) { return *a->date < *b->date; });
    for (const RawRecord* rec : valid) {
        auto& obs = result.series.observations;
        if (!obs.empty() && obs.back().date == *rec->date) {
            ++report.rows_dropped_duplicate_date;
            continue;
        }
        obs.push_back({*rec->date, *rec->close});
    }

    if (result.series.size() < 2) {
        throw Error(ErrorKind::AllRowsInvalid,
                    "only " + std::to_string(result.series.size()) + " usable rows remain");
    }
    return result;
}

std::vector<RawRecord> to_records(const PriceSeries& series) {
    std::vector<RawRecord> records;
    records.reserve(series.size());
    std::size_t line = 2;
    for (const auto& obs : series.observations) {
        records.push_back({format_date(obs.date), obs.date, false, obs.close, line++});
    }
    return records;
}

void write_series_csv(const PriceSeries& series, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::MissingFile, "cannot write " + path.string());
    out << "date,close\n";
    for (const auto& obs : series.observations) {
        out << format_date(obs.date) << ',' << format_double(obs.close) << '\n';
    }
}

PriceSeries read_series_csv(const std::filesystem::path& path, std::string index_name) {
    return clean(parse_csv(path), std::move(index_name)).series;
}

nlohmann::json to_json(const CleaningReport& report) {
    return {{"rows_read", report.rows_read},
            {"rows_dropped_nan", report.rows_dropped_nan},
            {"rows_dropped_duplicate_date", report.rows_dropped_duplicate_date},
            {"rows_date_reformatted", report.rows_date_reformatted}};
}

}  // namespace idxcast::ingest
