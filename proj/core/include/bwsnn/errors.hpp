#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bwsnn {

enum class ErrorCode {
  ShapeUnderflow,
  ChannelMismatch,
  DimensionMismatch,
  KindMismatch,
  InvalidGraph,
  StreamOverrun,
  UnalignableStreams,
  EmptyFamily,
  ValueOutOfRange,
  EmptyCounts,
  BadMagic,
  ChecksumMismatch,
  DimMismatchWithConfig,
  ConfigError,
  FileError,
};

std::string_view to_string(ErrorCode code);

// Every library failure is reported through this type; code() is stable,
// what() carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bwsnn
