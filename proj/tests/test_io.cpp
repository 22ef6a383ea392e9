#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "bubbles/error.hpp"
#include "bubbles/io.hpp"

namespace bubbles {
namespace {

// ==========================================================================
// Doubles
// ==========================================================================

TEST(format_double, round_trips_exactly) {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6.02214076e23, 4.9e-324, std::nextafter(1.0, 2.0)})
    EXPECT_EQ(parse_double(format_double(v)), v) << format_double(v);
}

TEST(format_double, non_finite_values) {
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_TRUE(std::isnan(parse_double("nan")));
  EXPECT_EQ(parse_double("-inf"), -std::numeric_limits<double>::infinity());
}

TEST(parse_double, rejects_garbage) {
  EXPECT_THROW(parse_double("1.5x"), Error);
  EXPECT_THROW(parse_double(""), Error);
}

// ==========================================================================
// Tables
// ==========================================================================

CsvTable sample_table() {
  CsvTable t;
  t.header = {"x", "value"};
  t.rows = {{0.1, 1.0 / 3.0}, {2.0, std::numeric_limits<double>::infinity()}, {3.5, -1e-300}};
  return t;
}

TEST(csv, round_trip) {
  const auto t = sample_table();
  const auto back = parse_csv(format_csv(t));
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("value"), 1u);
  EXPECT_THROW(back.column("missing"), Error);
}

TEST(csv, skips_comments_and_reports_bad_rows) {
  const auto t = parse_csv("# note\nx,y\n1,2\n\n3,4\n");
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_THROW(parse_csv("x,y\n1\n"), Error);
  EXPECT_THROW(parse_csv("x,y\n1,abc\n"), Error);
}

TEST(csv, file_round_trip) {
  const auto path = std::filesystem::temp_directory_path() / "bubbles_io_test.csv";
  write_csv(path, sample_table());
  EXPECT_EQ(read_csv(path).rows, sample_table().rows);
  std::filesystem::remove(path);
  EXPECT_THROW(read_csv(path), Error);
}

TEST(json_table, round_trip_with_non_finite_cells) {
  const auto t = sample_table();
  const Json j = table_to_json(t);
  EXPECT_TRUE(j["rows"][1][1].is_string());
  const auto back = table_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
}

TEST(json_file, round_trip) {
  const auto path = std::filesystem::temp_directory_path() / "bubbles_io_test.json";
  Json j;
  j["a"] = 1.5;
  j["b"] = "text";
  write_json(path, j);
  EXPECT_EQ(read_json(path), j);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace bubbles
