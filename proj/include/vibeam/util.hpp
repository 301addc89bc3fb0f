#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vibeam/types.hpp"

namespace vibeam {

// FNV-1a, 64 bit. Used for content hashes in manifests and carry-over checks.
class Hasher {
 public:
  void update(const void* data, std::size_t n);
  void update(const std::string& s) { update(s.data(), s.size()); }
  void update(double x) { update(&x, sizeof(x)); }
  void update(const Vec& v) { update(v.data(), sizeof(double) * v.size()); }
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

std::string hash_bytes_hex(const void* data, std::size_t n);
std::string hash_file_hex(const std::string& path);
std::string hash_string_hex(const std::string& s);

/// Shortest round-trip decimal form of a double ("%.17g" trimmed).
std::string format_double(double x);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

/// Runs tasks on up to `jobs` worker threads, in index order per worker pull.
/// Exceptions are captured and the first one rethrown after all tasks finish.
void run_parallel(int jobs, const std::vector<std::function<void()>>& tasks);

}  // namespace vibeam
