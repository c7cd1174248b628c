#include "idxcast/ingest.hpp"

#include "oracles/synthetic.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

using namespace idxcast;
using namespace idxcast::ingest;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("idxcast_ingest_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path_ / name) << text;
        return path_ / name;
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

RawRecord rec(const std::string& date, std::optional<double> close, std::size_t line) {
    RawRecord r;
    r.date_text = date;
    r.date = parse_date(date, &r.date_reformatted);
    r.close = close;
    r.source_line = line;
    return r;
}

Date ymd(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

}  // namespace

TEST(ParseDate, AcceptedFormats) {
    bool reformatted = true;
    EXPECT_EQ(parse_date("2020-03-16", &reformatted), ymd(2020, 3, 16));
    EXPECT_FALSE(reformatted);
    EXPECT_EQ(parse_date("03/16/2020", &reformatted), ymd(2020, 3, 16));
    EXPECT_TRUE(reformatted);
    EXPECT_EQ(parse_date("16-Mar-2020"), ymd(2020, 3, 16));
    EXPECT_FALSE(parse_date("16.03.2020"));
    EXPECT_FALSE(parse_date("02/30/2020"));
}

TEST(ParseCsv, MissingFile) {
    try {
        parse_csv("/nonexistent/prices.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingFile);
        EXPECT_NE(std::string(e.what()).find("/nonexistent/prices.csv"), std::string::npos);
    }
}

TEST(ParseCsv, HeaderOnlyIsEmptyFile) {
    TempDir dir;
    try {
        parse_csv(dir.write("h.csv", "Date,Close\n"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyFile);
    }
}

TEST(ParseCsv, MissingColumn) {
    TempDir dir;
    try {
        parse_csv(dir.write("m.csv", "Date,Open\n2020-01-02,1\n"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingColumn);
    }
}

TEST(ParseCsv, ThreeRowsInFileOrder) {
    TempDir dir;
    const auto recs =
        parse_csv(dir.write("a.csv", "date,close\n2020-01-03,101\n2020-01-02,100\n2020-01-06,102.5\n"));
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0].date, ymd(2020, 1, 3));
    EXPECT_EQ(recs[1].close, 100.0);
    EXPECT_EQ(recs[2].close, 102.5);
    EXPECT_EQ(recs[0].source_line, 2u);
    EXPECT_EQ(recs[2].source_line, 4u);
}

TEST(ParseCsv, NanCloseKeepsLine) {
    TempDir dir;
    const auto recs = parse_csv(dir.write("n.csv", "Date,Adj Close\n2020-03-13,2711.02\n2020-03-16,NaN\n"));
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_FALSE(recs[1].close.has_value() && std::isfinite(*recs[1].close));
    EXPECT_EQ(recs[1].source_line, 3u);
    EXPECT_EQ(recs[1].date, ymd(2020, 3, 16));
}

TEST(ParseCsv, ConfigurableColumns) {
    TempDir dir;
    CsvColumns cols;
    cols.date_names = {"day"};
    cols.close_names = {"last"};
    const auto recs = parse_csv(dir.write("c.csv", "Day,Last\n2020-01-02,5\n"), cols);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].close, 5.0);
}

TEST(Clean, AlreadyClean) {
    const auto out = clean({rec("2020-01-02", 100, 2), rec("2020-01-03", 101, 3)}, "X");
    ASSERT_EQ(out.series.size(), 2u);
    EXPECT_EQ(out.series.observations[0].close, 100.0);
    EXPECT_EQ(out.report, (CleaningReport{2, 0, 0, 0}));
}

TEST(Clean, OneNanAmongFive) {
    const auto out = clean({rec("2020-01-02", 1, 2), rec("2020-01-03", 2, 3), rec("2020-01-06", std::nullopt, 4),
                            rec("2020-01-07", 4, 5), rec("2020-01-08", 5, 6)});
    EXPECT_EQ(out.series.size(), 4u);
    EXPECT_EQ(out.report.rows_dropped_nan, 1u);
}

TEST(Clean, DuplicateDateKeepsFirst) {
    const auto out = clean({rec("2020-01-02", 100, 2), rec("2020-01-02", 99, 3), rec("2020-01-03", 98, 4)});
    ASSERT_EQ(out.series.size(), 2u);
    EXPECT_EQ(out.series.observations[0].close, 100.0);
    EXPECT_EQ(out.report.rows_dropped_duplicate_date, 1u);
}

TEST(Clean, NonPositiveDropped) {
    const auto out = clean({rec("2020-01-02", 100, 2), rec("2020-01-03", 0, 3), rec("2020-01-06", -5, 4),
                            rec("2020-01-07", 101, 5)});
    EXPECT_EQ(out.series.size(), 2u);
    EXPECT_EQ(out.report.rows_dropped_nan, 2u);
}

TEST(Clean, ReformattedCounted) {
    const auto out = clean({rec("01/02/2020", 100, 2), rec("03-Jan-2020", 101, 3), rec("2020-01-06", 102, 4)});
    EXPECT_EQ(out.report.rows_date_reformatted, 2u);
    EXPECT_EQ(out.series.size(), 3u);
}

TEST(Clean, AllRowsInvalid) {
    try {
        clean({rec("2020-01-02", 100, 2), rec("2020-01-03", std::nullopt, 3)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AllRowsInvalid);
    }
}

TEST(CleanProperty, SortedIdempotentConserving) {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto dates = synth::weekdays(ymd(2020, 1, 1), 30);
        std::vector<RawRecord> recs;
        std::size_t line = 2;
        for (const auto& d : dates) {
            const int roll = static_cast<int>(gen() % 10);
            std::optional<double> close = 100.0 + static_cast<double>(gen() % 1000) / 10.0;
            if (roll == 0) close = std::nullopt;
            if (roll == 1) close = -1.0;
            recs.push_back(rec(format_date(d), close, line++));
            if (roll == 2) recs.push_back(rec(format_date(d), 1.0, line++));
        }
        std::shuffle(recs.begin(), recs.end(), gen);
        const auto out = clean(recs, "R");
        for (std::size_t i = 1; i < out.series.size(); ++i) {
            ASSERT_LT(out.series.observations[i - 1].date, out.series.observations[i].date);
        }
        EXPECT_EQ(out.report.rows_read,
                  out.series.size() + out.report.rows_dropped_nan + out.report.rows_dropped_duplicate_date);
        const auto again = clean(to_records(out.series), "R");
        EXPECT_EQ(again.series, out.series);
        EXPECT_EQ(again.report, (CleaningReport{out.series.size(), 0, 0, 0}));
    }
}

TEST(SeriesCsv, WriteReadRoundTrip) {
    TempDir dir;
    const auto s = synth::series({1.5, 2.25, 1.0 / 3.0}, "RT");
    write_series_csv(s, dir.path() / "s.csv");
    EXPECT_EQ(read_series_csv(dir.path() / "s.csv", "RT"), s);
}

TEST(CleaningReportJson, HasCounts) {
    const auto j = to_json(CleaningReport{6, 2, 0, 0});
    EXPECT_EQ(j.at("rows_read"), 6);
    EXPECT_EQ(j.at("rows_dropped_nan"), 2);
}
