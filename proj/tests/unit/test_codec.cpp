#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "pfednet/client.hpp"
#include "pfednet/codec.hpp"
#include "pfednet/error.hpp"

using namespace pfednet;
namespace t = pfednet::testing;

namespace {

Vector random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

// Values drawn from a few centers with small jitter.
Vector clustered_vector(int n, int centers, double jitter, std::mt19937_64& rng) {
  const Vector c = random_vector(centers, rng, 5.0);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = c[rng() % centers] + u(rng);
  return v;
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::vector<std::uint8_t> header(std::uint64_t d, std::uint64_t c, double tol) {
  std::vector<std::uint8_t> out;
  put_u64(out, d);
  put_u64(out, c);
  put_u64(out, std::bit_cast<std::uint64_t>(tol));
  return out;
}

ErrorCode decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

}  // namespace

TEST(Quantize, ConstantVectorIsOneCluster) {
  const auto cu = cluster_quantize(Vector::Constant(50, 0.25), 1e-6);
  ASSERT_EQ(cu.values.size(), 1u);
  EXPECT_DOUBLE_EQ(cu.values[0], 0.25);
  EXPECT_EQ(membership_bits(1), 0);
  EXPECT_EQ(encode(cu).size(), 32u);
}

TEST(Quantize, ZeroTolIsLossless) {
  const Vector v = (Vector(4) << 0.3, -1.0, 2.5, 0.3).finished();
  const auto cu = cluster_quantize(v, 0.0);
  EXPECT_EQ(cu.values.size(), 3u);
  EXPECT_EQ(reconstruct(cu), v);
}

TEST(Quantize, NearbyValuesMerge) {
  const Vector v = (Vector(4) << 0.0, 0.01, 1.0, 1.02).finished();
  const auto cu = cluster_quantize(v, 0.02);
  ASSERT_EQ(cu.values.size(), 2u);
  EXPECT_NEAR(cu.values[0], 0.005, 1e-15);
  EXPECT_NEAR(cu.values[1], 1.01, 1e-15);
  EXPECT_EQ(cu.membership, (std::vector<std::uint32_t>{0, 0, 1, 1}));
}

TEST(Quantize, ReconstructionWithinTol) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const double tol = std::pow(10.0, -1.0 - static_cast<double>(rng() % 6));
    const Vector v = clustered_vector(200, 7, 3 * tol, rng);
    const auto cu = cluster_quantize(v, tol);
    EXPECT_LE((reconstruct(cu) - v).cwiseAbs().maxCoeff(), tol * (1 + 1e-12));
    for (std::size_t i = 1; i < cu.values.size(); ++i) EXPECT_GT(cu.values[i], cu.values[i - 1]);
  }
}

TEST(Quantize, SizeNonincreasingInTol) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector v = clustered_vector(300, 10, 0.05, rng);
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (double tol : {0.0, 1e-4, 1e-3, 1e-2, 0.03, 0.1, 1.0, 100.0}) {
      const std::size_t bytes = encode(cluster_quantize(v, tol)).size();
      EXPECT_LE(bytes, previous) << "tol " << tol;
      previous = bytes;
    }
  }
}

TEST(Quantize, RejectsBadInput) {
  EXPECT_THROW(cluster_quantize(Vector::Ones(3), -1.0), Error);
  EXPECT_THROW(cluster_quantize(Vector::Ones(3), std::numeric_limits<double>::infinity()), Error);
  Vector v = Vector::Ones(3);
  v[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(cluster_quantize(v, 0.1), Error);
}

TEST(Encode, HeaderOnlyForSingleCluster) {
  const auto cu = cluster_quantize(Vector::Constant(10000, -3.0), 0.0);
  EXPECT_EQ(encode(cu).size(), 24u + 8u);
  EXPECT_EQ(encoded_size(10000, 1), 32u);
}

TEST(Encode, MembershipBitsAndSize) {
  EXPECT_EQ(membership_bits(0), 0);
  EXPECT_EQ(membership_bits(2), 1);
  EXPECT_EQ(membership_bits(3), 2);
  EXPECT_EQ(membership_bits(4), 2);
  EXPECT_EQ(membership_bits(5), 3);
  EXPECT_EQ(membership_bits(1u << 20), 20);
  // c = 3, d = 8: 16 membership bits.
  EXPECT_EQ(encoded_size(8, 3), 24u + 24u + 2u);
  const Vector v = (Vector(8) << 0, 1, 2, 0, 1, 2, 0, 1).finished();
  EXPECT_EQ(encode(cluster_quantize(v, 0.0)).size(), 50u);
}

TEST(Encode, ExactLayout) {
  ClusteredUpdate cu;
  cu.d = 5;
  cu.tol = 0.5;
  cu.values = {-1.0, 2.0, 4.0};
  cu.membership = {2, 0, 1, 1, 2};
  std::vector<std::uint8_t> expected = header(5, 3, 0.5);
  for (double v : cu.values) put_u64(expected, std::bit_cast<std::uint64_t>(v));
  // 2-bit codes LSB first: 10 00 01 01 10 -> 0b01'01'00'10, 0b10
  expected.push_back(0b01010010);
  expected.push_back(0b00000010);
  EXPECT_EQ(encode(cu), expected);
  EXPECT_EQ(decode(expected), cu);
}

TEST(Encode, RandomRoundTrips) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 500);
    const double tol = trial % 3 == 0 ? 0.0 : 1e-3 * (rng() % 100);
    const Vector v = trial % 2 ? random_vector(d, rng) : clustered_vector(d, 1 + rng() % 40, 0.01, rng);
    const auto cu = cluster_quantize(v, tol);
    const auto bytes = encode(cu);
    EXPECT_EQ(bytes.size(), encoded_size(cu.d, cu.values.size()));
    const auto back = decode(bytes);
    EXPECT_EQ(back, cu);
    EXPECT_EQ(reconstruct(back), reconstruct(cu));
  }
}

TEST(Encode, EmptyUpdate) {
  const auto cu = cluster_quantize(Vector(0), 0.0);
  EXPECT_EQ(cu.values.size(), 0u);
  const auto bytes = encode(cu);
  EXPECT_EQ(bytes.size(), 24u);
  EXPECT_EQ(decode(bytes), cu);
}

TEST(Decode, RejectsMalformedInput) {
  const Vector v = (Vector(8) << 0, 1, 2, 0, 1, 2, 0, 1).finished();
  const auto good = encode(cluster_quantize(v, 0.0));

  EXPECT_EQ(decode_error({good.begin(), good.begin() + 10}), ErrorCode::kParse);
  EXPECT_EQ(decode_error({good.begin(), good.end() - 1}), ErrorCode::kParse);
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(decode_error(trailing), ErrorCode::kParse);

  // c > d
  EXPECT_EQ(decode_error(header(1, 2, 0.0)), ErrorCode::kParse);
  // negative or NaN tol
  EXPECT_EQ(decode_error(header(0, 0, -1.0)), ErrorCode::kParse);
  EXPECT_EQ(decode_error(header(0, 0, std::numeric_limits<double>::quiet_NaN())), ErrorCode::kParse);
  // d > 0 with no clusters
  EXPECT_EQ(decode_error(header(3, 0, 0.0)), ErrorCode::kParse);

  // membership code 3 with c = 3
  auto bad_member = good;
  bad_member[48] |= 0b11;
  EXPECT_EQ(decode_error(bad_member), ErrorCode::kParse);

  // values out of order
  auto unsorted = header(2, 2, 0.0);
  put_u64(unsorted, std::bit_cast<std::uint64_t>(1.0));
  put_u64(unsorted, std::bit_cast<std::uint64_t>(0.0));
  unsorted.push_back(0b10);
  EXPECT_EQ(decode_error(unsorted), ErrorCode::kParse);

  // stray padding bits
  auto padded = encode(cluster_quantize((Vector(5) << 0, 1, 2, 0, 1).finished(), 0.0));
  padded.back() |= 0x80;
  EXPECT_EQ(decode_error(padded), ErrorCode::kParse);
}

TEST(SizeReport, IdenticalUpdatesGiveNoReduction) {
  std::mt19937_64 rng(8);
  const Vector v = random_vector(64, rng);
  const auto rep = size_report(v, v, 1e-6);
  EXPECT_EQ(rep.bytes_baseline, rep.bytes_cer);
  EXPECT_EQ(rep.reduction_pct, 0.0);
}

TEST(SizeReport, ConstantUpdateCompresses) {
  Vector distinct(1000);
  for (int i = 0; i < 1000; ++i) distinct[i] = i * 0.5;
  const auto rep = size_report(distinct, Vector::Constant(1000, 2.0), 0.0);
  EXPECT_GT(rep.reduction_pct, 95.0);
  EXPECT_EQ(rep.bytes_cer, 32u);
}

TEST(SizeReport, RegularizedUpdateCompresses) {
  const auto inst = t::sparsity_instance();
  CerConfig cfg;
  cfg.eta = inst.eta;
  cfg.inner_iters = 500;
  cfg.gamma = 0.0;
  const Vector base = cer_update(inst.y_anchor, inst.g, cfg);
  cfg.gamma = 1000.0;
  const Vector reg = cer_update(inst.y_anchor, inst.g, cfg);
  const auto rep = size_report(base, reg, 1e-4);
  EXPECT_GT(rep.reduction_pct, 30.0);
  EXPECT_NEAR(rep.reduction_pct,
              100.0 * (1.0 - static_cast<double>(rep.bytes_cer) / rep.bytes_baseline), 1e-12);
}
