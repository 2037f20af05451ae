#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include <Eigen/Core>

namespace probedesign {

/// Philox4x32-10 counter-based generator.
///
/// A stream is identified by (key, stream id); the i-th block of the stream is
/// a pure function of (key, stream, i), so independent draws can be produced
/// in any order or on any thread and still be bit-reproducible.
class Philox {
 public:
  Philox(std::uint64_t key, std::uint64_t stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double gaussian();
  Eigen::VectorXd gaussian_vector(Eigen::Index n);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Sub-seed for a named purpose, e.g. derive_seed(seed, "randomize").
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

}  // namespace probedesign
