#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>

#include "wvstack/core/error.hpp"
#include "wvstack/core/parallel.hpp"
#include "wvstack/core/png.hpp"
#include "wvstack/core/raster.hpp"
#include "wvstack/core/time.hpp"

using namespace wvstack;

TEST(Time, ParseFormatRoundTrip) {
  const std::string s = "2023-02-16T17:45:03.123456Z";
  EXPECT_EQ(format_utc(parse_utc(s)), s);
  EXPECT_EQ(format_utc(parse_utc("2020-05-01T00:00:00Z")), "2020-05-01T00:00:00.000000Z");
  EXPECT_EQ(format_utc(parse_utc("2020-05-01T00:00:00.5Z")), "2020-05-01T00:00:00.500000Z");
}

TEST(Time, RejectsMalformed) {
  for (const char* bad : {"2023-02-16 17:45:03Z", "2023-02-30T00:00:00Z", "2023-02-16T17:45:03.1234567Z",
                          "2023-02-16T17:45:03", "garbage"}) {
    EXPECT_THROW(parse_utc(bad), Error) << bad;
  }
}

TEST(Time, DaysBetween) {
  EXPECT_DOUBLE_EQ(days_between(parse_utc("2023-01-23T00:00:00Z"), parse_utc("2023-02-04T00:00:00Z")), 12.0);
}

TEST(Error, CategoriesMapToExitCodes) {
  EXPECT_EQ(exit_code(Error(Errc::Usage, "x").category()), 2);
  EXPECT_EQ(exit_code(Error(Errc::StackTooSmall, "x").category()), 3);
  EXPECT_EQ(exit_code(Error(Errc::SingularSystem, "x").category()), 4);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw Error(Errc::Io, "boom"); }), Error);
}

TEST(Raster, FlatBinaryRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "wvstack_core_test";
  Raster<cfloat> r(3, 5);
  for (std::size_t i = 0; i < r.size(); ++i) r.values()[i] = cfloat(static_cast<float>(i), -0.5f * static_cast<float>(i));
  write_complex_raster(dir / "a.slc", r);
  EXPECT_EQ(std::filesystem::file_size(dir / "a.slc"), 3u * 5u * 8u);
  EXPECT_EQ(read_complex_raster(dir / "a.slc", 3, 5), r);
  EXPECT_THROW(read_complex_raster(dir / "a.slc", 4, 5), Error);
  std::filesystem::remove_all(dir);
}

TEST(Png, WritesSignature) {
  const auto path = std::filesystem::temp_directory_path() / "wvstack_core_test.png";
  PlotCanvas canvas(64, 48, 0, 1, -1, 1);
  canvas.marker(0.5, 0.0, {255, 0, 0});
  write_png(path, canvas.image());
  const auto bytes = detail::read_bytes(path);
  ASSERT_GT(bytes.size(), 8u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[1]), 'P');
  EXPECT_EQ(static_cast<unsigned char>(bytes[2]), 'N');
  std::filesystem::remove(path);
}
