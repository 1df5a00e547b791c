#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

#include "disclosure/hash.hpp"

namespace disclosure::testing {

inline std::filesystem::path fixture(std::string_view rel) {
  return std::filesystem::path(DISCLOSURE_FIXTURE_DIR) / rel;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("disclosure_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// Same stream as tests/oracles/make_stats_reference.py.
struct SplitMix {
  std::uint64_t state;
  explicit SplitMix(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() { return splitmix64(state); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

struct Series {
  std::vector<double> xs, ys;
};

inline Series paired_series(std::uint64_t seed) {
  SplitMix g(seed);
  const std::size_t n = 5 + g.next() % 196;
  const double rho = 2.0 * g.uniform() - 1.0;
  const double w = 1.0 - std::abs(rho);
  Series s;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g.uniform();
    const double u = g.uniform();
    s.xs.push_back(x);
    s.ys.push_back(rho * x + w * u);
  }
  return s;
}

struct Groups {
  std::vector<double> a, b;
};

inline Groups two_groups(std::uint64_t seed) {
  SplitMix g(seed);
  const std::size_t na = 2 + g.next() % 39;
  const std::size_t nb = 2 + g.next() % 39;
  const double scale_a = 0.1 + 4.0 * g.uniform();
  const double scale_b = 0.1 + 4.0 * g.uniform();
  const double shift = 2.0 * g.uniform() - 1.0;
  Groups out;
  for (std::size_t i = 0; i < na; ++i) out.a.push_back(scale_a * g.uniform());
  for (std::size_t i = 0; i < nb; ++i) out.b.push_back(scale_b * g.uniform() + shift);
  return out;
}

inline double sequential_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace disclosure::testing
