#include "bwsnn/codec.hpp"

#include <cmath>
#include <random>

#include "bwsnn/errors.hpp"

namespace bwsnn {

namespace {

// 53-bit uniform in [0,1); std::uniform_real_distribution is not
// bit-reproducible across standard libraries.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<SpikeTensor> encode(const RealTensor& image, const EncoderSpec& spec) {
  if (spec.time_steps < 0) throw Error(ErrorCode::ValueOutOfRange, "time steps must be >= 0");
  for (const float v : image.data()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw Error(ErrorCode::ValueOutOfRange, "input values must lie in [0,1]");
  }

  std::vector<SpikeTensor> frames(static_cast<std::size_t>(spec.time_steps),
                                  SpikeTensor(image.channels(), image.rows(), image.cols()));
  const auto& pixels = image.data();

  if (spec.mode == EncoderMode::DeterministicAccumulator) {
    // The accumulator after t steps holds t*v - spikes so far, so step t fires
    // exactly when floor(t*v) advances; evaluating it this way keeps the total
    // at floor(T*v) without drift from repeated float addition.
    for (std::size_t p = 0; p < pixels.size(); ++p) {
      const double v = pixels[p];
      double prev = 0.0;
      for (int t = 1; t <= spec.time_steps; ++t) {
        const double cur = std::floor(static_cast<double>(t) * v);
        frames[static_cast<std::size_t>(t - 1)].data()[p] = cur > prev ? 1 : 0;
        prev = cur;
      }
    }
  } else {
    std::mt19937_64 rng(spec.seed);
    for (auto& frame : frames) {
      for (std::size_t p = 0; p < pixels.size(); ++p) {
        frame.data()[p] = unit_uniform(rng) < static_cast<double>(pixels[p]) ? 1 : 0;
      }
    }
  }
  return frames;
}

std::size_t classify(std::span<const std::int64_t> counts) {
  if (counts.empty()) throw Error(ErrorCode::EmptyCounts, "no class counts to classify");
  std::size_t best = 0;
  for (std::size_t n = 1; n < counts.size(); ++n) {
    if (counts[n] > counts[best]) best = n;
  }
  return best;
}

}  // namespace bwsnn
