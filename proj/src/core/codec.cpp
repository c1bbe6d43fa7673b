#include "pfednet/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "pfednet/error.hpp"

namespace pfednet {

namespace {

constexpr std::size_t kHeaderBytes = 24;
constexpr std::uint64_t kMaxDimension = std::uint64_t{1} << 32;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= std::uint64_t{in[offset + b]} << (8 * b);
  return v;
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kParse, "malformed header: " + what);
}

}  // namespace

ClusteredUpdate cluster_quantize(const Vector& delta, double tol) {
  if (!(tol >= 0.0) || !std::isfinite(tol)) throw_invalid("quantization tol must be finite and >= 0");
  if (!delta.allFinite()) throw_invalid("cannot quantize a non-finite update");

  ClusteredUpdate cu;
  cu.d = static_cast<std::uint64_t>(delta.size());
  cu.tol = tol;
  cu.membership.assign(delta.size(), 0);
  if (delta.size() == 0) return cu;

  std::vector<std::uint32_t> order(delta.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return delta[a] < delta[b]; });

  std::size_t begin = 0;
  while (begin < order.size()) {
    const double lo = delta[order[begin]];
    double mid = lo;
    std::size_t end = begin + 1;
    for (; end < order.size(); ++end) {
      const double hi = delta[order[end]];
      if (hi - lo > 2.0 * tol) break;
      const double candidate = lo + 0.5 * (hi - lo);
      // Checked in the same arithmetic reconstruct() uses.
      if (hi - candidate > tol || candidate - lo > tol) break;
      mid = candidate;
    }
    const auto index = static_cast<std::uint32_t>(cu.values.size());
    cu.values.push_back(mid);
    for (std::size_t i = begin; i < end; ++i) cu.membership[order[i]] = index;
    begin = end;
  }
  return cu;
}

Vector reconstruct(const ClusteredUpdate& cu) {
  Vector out(static_cast<Eigen::Index>(cu.membership.size()));
  for (std::size_t i = 0; i < cu.membership.size(); ++i) out[i] = cu.values.at(cu.membership[i]);
  return out;
}

int membership_bits(std::uint64_t cluster_count) {
  if (cluster_count <= 1) return 0;
  return static_cast<int>(std::bit_width(cluster_count - 1));
}

std::size_t encoded_size(std::uint64_t d, std::uint64_t cluster_count) {
  const std::uint64_t bits = d * static_cast<std::uint64_t>(membership_bits(cluster_count));
  return kHeaderBytes + 8 * cluster_count + (bits + 7) / 8;
}

std::vector<std::uint8_t> encode(const ClusteredUpdate& cu) {
  if (cu.membership.size() != cu.d) throw_invalid("membership length does not match d");
  const std::uint64_t c = cu.values.size();
  std::vector<std::uint8_t> out;
  out.reserve(encoded_size(cu.d, c));
  put_u64(out, cu.d);
  put_u64(out, c);
  put_u64(out, std::bit_cast<std::uint64_t>(cu.tol));
  for (double v : cu.values) put_u64(out, std::bit_cast<std::uint64_t>(v));

  const int bits = membership_bits(c);
  if (bits == 0) return out;
  std::uint64_t acc = 0;
  int filled = 0;
  for (std::uint32_t m : cu.membership) {
    if (m >= c) throw_invalid("membership index out of range");
    acc |= std::uint64_t{m} << filled;
    filled += bits;
    while (filled >= 8) {
      out.push_back(static_cast<std::uint8_t>(acc & 0xFF));
      acc >>= 8;
      filled -= 8;
    }
  }
  if (filled > 0) out.push_back(static_cast<std::uint8_t>(acc & 0xFF));
  return out;
}

ClusteredUpdate decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) {
    throw Error(ErrorCode::kParse, "truncated header: need 24 bytes, got " +
                                       std::to_string(bytes.size()));
  }
  ClusteredUpdate cu;
  cu.d = get_u64(bytes, 0);
  const std::uint64_t c = get_u64(bytes, 8);
  cu.tol = std::bit_cast<double>(get_u64(bytes, 16));
  if (!(cu.tol >= 0.0) || !std::isfinite(cu.tol)) malformed("tol must be finite and >= 0");
  if (cu.d > kMaxDimension) malformed("dimension " + std::to_string(cu.d) + " too large");
  if (c > cu.d) malformed("cluster count exceeds dimension");
  if (cu.d > 0 && c == 0) malformed("non-empty update with zero clusters");

  const std::size_t expected = encoded_size(cu.d, c);
  if (bytes.size() < expected) {
    throw Error(ErrorCode::kParse, "truncated payload: expected " + std::to_string(expected) +
                                       " bytes, got " + std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw Error(ErrorCode::kParse, "trailing bytes after payload: expected " +
                                       std::to_string(expected) + ", got " +
                                       std::to_string(bytes.size()));
  }

  cu.values.resize(c);
  for (std::uint64_t i = 0; i < c; ++i) {
    cu.values[i] = std::bit_cast<double>(get_u64(bytes, kHeaderBytes + 8 * i));
    if (!std::isfinite(cu.values[i])) malformed("non-finite cluster value");
    if (i > 0 && !(cu.values[i] > cu.values[i - 1])) malformed("cluster values not ascending");
  }

  cu.membership.assign(cu.d, 0);
  const int bits = membership_bits(c);
  if (bits == 0) return cu;
  std::size_t pos = kHeaderBytes + 8 * c;
  std::uint64_t acc = 0;
  int avail = 0;
  const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
  for (std::uint64_t i = 0; i < cu.d; ++i) {
    while (avail < bits) {
      acc |= std::uint64_t{bytes[pos++]} << avail;
      avail += 8;
    }
    const std::uint64_t m = acc & mask;
    if (m >= c) malformed("membership index " + std::to_string(m) + " out of range");
    cu.membership[i] = static_cast<std::uint32_t>(m);
    acc >>= bits;
    avail -= bits;
  }
  if (acc != 0) malformed("non-zero padding bits");
  return cu;
}

SizeReport size_report(const Vector& delta_baseline, const Vector& delta_cer, double tol) {
  SizeReport report;
  report.bytes_baseline = encode(cluster_quantize(delta_baseline, tol)).size();
  report.bytes_cer = encode(cluster_quantize(delta_cer, tol)).size();
  report.reduction_pct = 100.0 * (1.0 - static_cast<double>(report.bytes_cer) /
                                            static_cast<double>(report.bytes_baseline));
  return report;
}

}  // namespace pfednet
