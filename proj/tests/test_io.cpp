#include "doctest.h"
#include "ssc/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>

using namespace ssc::io;

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("csv quoting and row count") {
  const auto p = std::filesystem::temp_directory_path() / "ssc_test_io.csv";
  {
    CsvWriter w(p);
    w.header({"a", "b"});
    w.field("x,y").field("say \"hi\"").end_row();
    w.field(std::uint64_t{7}).field(true).end_row();
    w.field("").field(-3).end_row();
    CHECK(w.rows() == 3);
  }
  std::ifstream f(p);
  const std::string s{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  CHECK(s == "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n7,1\n,-3\n");
  std::filesystem::remove(p);
}

TEST_CASE("parallel_map keeps index order and rethrows") {
  for (std::size_t w : {1u, 2u, 5u}) {
    const auto r = parallel_map(100, w, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == i * i);
    CHECK_THROWS_AS(parallel_map(50, w,
                                 [](std::size_t i) -> int {
                                   if (i == 17) throw std::runtime_error("boom");
                                   return 0;
                                 }),
                    std::runtime_error);
  }
  CHECK(parallel_map(0, 4, [](std::size_t) { return 1; }).empty());
}

TEST_CASE("worker count from the environment") {
  setenv("SSC_WORKERS", "3", 1);
  CHECK(default_workers() == 3);
  setenv("SSC_WORKERS", "0", 1);
  CHECK_THROWS(default_workers());
  unsetenv("SSC_WORKERS");
  CHECK(default_workers() >= 1);
}
