#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pfednet/types.hpp"

namespace pfednet {

// Update vector as a sorted value table plus a per-coordinate cluster index.
struct ClusteredUpdate {
  std::vector<double> values;
  std::vector<std::uint32_t> membership;
  std::uint64_t d = 0;
  double tol = 0.0;

  bool operator==(const ClusteredUpdate&) const = default;
};

// Greedy span-bounded clustering of the sorted entries: a cluster is closed
// once the next value is more than 2*tol above its smallest member. Each
// cluster is represented by its midpoint, so every entry reconstructs within
// tol.
ClusteredUpdate cluster_quantize(const Vector& delta, double tol);

Vector reconstruct(const ClusteredUpdate& cu);

// Bits per membership entry: ceil(log2 c), 0 when c <= 1.
int membership_bits(std::uint64_t cluster_count);

// Layout (little-endian): u64 d | u64 c | f64 tol | c x f64 values |
// membership packed LSB-first at membership_bits(c) bits per coordinate.
std::vector<std::uint8_t> encode(const ClusteredUpdate& cu);
ClusteredUpdate decode(std::span<const std::uint8_t> bytes);

std::size_t encoded_size(std::uint64_t d, std::uint64_t cluster_count);

struct SizeReport {
  std::size_t bytes_baseline = 0;
  std::size_t bytes_cer = 0;
  double reduction_pct = 0.0;
};

SizeReport size_report(const Vector& delta_baseline, const Vector& delta_cer, double tol);

}  // namespace pfednet
