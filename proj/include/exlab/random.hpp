#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace exlab {

// Philox4x32-10 (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

std::uint64_t splitmix64(std::uint64_t x);

// Element of a stream path: either an index or a label.
struct PathItem {
  template <std::integral T>
  PathItem(T v) : index(static_cast<std::uint64_t>(v)) {}
  PathItem(std::string_view s) : label(s), is_label(true) {}
  PathItem(const char* s) : label(s), is_label(true) {}

  std::uint64_t index = 0;
  std::string_view label;
  bool is_label = false;
};

std::uint64_t hash_path(std::uint64_t seed, std::initializer_list<PathItem> path);

// Wichura's AS241, full double precision.
double normal_quantile(double p);

// A counter-based stream. The key and the upper counter word are fixed at
// construction; the lower 64 bits count blocks. Each block gives two
// 53-bit uniforms in the open interval (0,1).
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t key, std::uint64_t tag) : key_(key), tag_(tag) {}

  double uniform();
  double normal() { return normal_quantile(uniform()); }
  std::uint64_t next_u64();

  // Independent child stream; does not advance this one.
  RngStream substream(std::uint64_t a, std::uint64_t b = 0) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t tag() const { return tag_; }

 private:
  void refill();

  std::uint64_t key_ = 0;
  std::uint64_t tag_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int pos_ = 2;
};

RngStream split_stream(std::uint64_t seed, std::initializer_list<PathItem> path);

}  // namespace exlab
