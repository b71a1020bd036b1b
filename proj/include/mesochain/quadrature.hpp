#pragma once

#include <array>

namespace mesochain {

/// 5-point Gauss-Legendre rule mapped to [0, 1].
struct GaussLegendre5
{
  static constexpr std::array<double, 5> nodes = {
    0.5 * (1.0 - 0.90617984593866399280),
    0.5 * (1.0 - 0.53846931010568309104),
    0.5,
    0.5 * (1.0 + 0.53846931010568309104),
    0.5 * (1.0 + 0.90617984593866399280),
  };
  static constexpr std::array<double, 5> weights = {
    0.5 * 0.23692688505618908751,
    0.5 * 0.47862867049936646804,
    0.5 * 0.56888888888888888889,
    0.5 * 0.47862867049936646804,
    0.5 * 0.23692688505618908751,
  };
};

} // namespace mesochain
