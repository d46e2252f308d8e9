#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace bwsnn {

// Dense channel-major 3D array indexed (channel, row, col).
template <typename T>
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int channels, int rows, int cols, T fill = T{})
      : channels_(channels),
        rows_(rows),
        cols_(cols),
        data_(static_cast<std::size_t>(channels) * rows * cols, fill) {}

  int channels() const { return channels_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& at(int c, int r, int col) { return data_[index(c, r, col)]; }
  const T& at(int c, int r, int col) const { return data_[index(c, r, col)]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_dims(int channels, int rows, int cols) const {
    return channels_ == channels && rows_ == rows && cols_ == cols;
  }

  bool operator==(const Tensor3&) const = default;

 private:
  std::size_t index(int c, int r, int col) const {
    return (static_cast<std::size_t>(c) * rows_ + r) * cols_ + col;
  }

  int channels_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

// One time step of binary spikes, C x H x W.
using SpikeTensor = Tensor3<std::uint8_t>;
// Weighted sums delivered to neuron blocks, K x X x Y.
using SumTensor = Tensor3<std::int32_t>;
// Pre-encoding input image with values in [0, 1].
using RealTensor = Tensor3<float>;

}  // namespace bwsnn
