#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ogp {

// Validation errors exit with code 2 at the CLI, resource errors with code 3.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t splitmix64(std::uint64_t x);

// Keyed stream splitting: every sampler derives its own substream from
// (master seed, tag[, index]) so adding a draw to one stream never shifts
// another.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index);

// Deterministic RNG with fixed sampling algorithms. std::mt19937_64 is the
// base sequence (pinned by the standard); the distributions are implemented
// here because libstdc++'s are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t u64() { return gen_(); }
  // [0, 1), 53-bit resolution
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  // (0, 1]
  double unit_pos() { return 1.0 - unit(); }
  // uniform integer in [0, n), unbiased (Lemire reduction)
  std::uint64_t below(std::uint64_t n);
  double normal();
  // inversion below mean 30, transformed rejection (PTRS) above
  long poisson(double mean);

 private:
  long poisson_inversion(double mean);
  long poisson_ptrs(double mean);

  std::mt19937_64 gen_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Runs fn(0..n-1); results must be written to per-index slots so the outcome
// is independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int threads);

// --threads flag if positive, else OGP_THREADS, else hardware concurrency.
int resolve_threads(int requested);

// shortest decimal round-trip style output, 17 significant digits
std::string fmt17(double v);

// build identifier baked in at configure time, "unknown" outside git
std::string build_id();

// standard normal CDF via erfc, accurate in both tails
double normal_cdf(double t);

std::uint64_t fnv1a64(const void* data, std::size_t len);

// Byte-deterministic CSV assembly; callers format cells (fmt17 for floats).
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header)
      : header_(std::move(header)) {}
  void add_row(std::vector<std::string> cells);
  std::string to_string() const;
  void save(const std::string& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace ogp
