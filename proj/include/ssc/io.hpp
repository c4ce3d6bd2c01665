#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <vector>

namespace ssc::io {

// Shortest round-trip decimal form.
std::string format_double(double x);

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& file);
  void header(std::initializer_list<std::string_view> names);
  CsvWriter& field(std::string_view s);
  CsvWriter& field(const char* s) { return field(std::string_view(s)); }
  CsvWriter& field(double x);
  CsvWriter& field(std::uint64_t x);
  CsvWriter& field(std::int64_t x);
  CsvWriter& field(int x) { return field(static_cast<std::int64_t>(x)); }
  CsvWriter& field(unsigned x) { return field(static_cast<std::uint64_t>(x)); }
  CsvWriter& field(bool x) { return field(std::string_view(x ? "1" : "0")); }
  void end_row();
  std::size_t rows() const { return rows_; }

 private:
  std::ofstream out_;
  bool first_ = true;
  std::size_t rows_ = 0;
};

// Worker count from SSC_WORKERS, else the hardware concurrency.
std::size_t default_workers();

// results[i] = f(i) for i < count on up to `workers` threads; the result order
// is the index order whatever the completion order.
template <class F>
auto parallel_map(std::size_t count, std::size_t workers, F f) -> std::vector<std::invoke_result_t<F, std::size_t>> {
  using R = std::invoke_result_t<F, std::size_t>;
  std::vector<R> results(count);
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = f(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          results[i] = f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace ssc::io
