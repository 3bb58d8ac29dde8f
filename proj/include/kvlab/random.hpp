#pragma once
// Platform-independent random fields (std distributions are
// implementation-defined, the raw mt19937_64 stream is not).

#include <cstdint>
#include <random>

#include "kvlab/grid.hpp"

namespace kvlab {

class FieldRng {
 public:
  explicit FieldRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [-1, 1).
  double symmetric() { return double(engine_() >> 11) * 0x1.0p-52 - 1.0; }

  VelocityField velocity(const GridSpec& g) {
    VelocityField f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = symmetric();
    f.clear_boundary();
    return f;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace kvlab
