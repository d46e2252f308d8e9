#include "bwsnn/errors.hpp"

namespace bwsnn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeUnderflow: return "ShapeUnderflow";
    case ErrorCode::ChannelMismatch: return "ChannelMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::StreamOverrun: return "StreamOverrun";
    case ErrorCode::UnalignableStreams: return "UnalignableStreams";
    case ErrorCode::EmptyFamily: return "EmptyFamily";
    case ErrorCode::ValueOutOfRange: return "ValueOutOfRange";
    case ErrorCode::EmptyCounts: return "EmptyCounts";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::DimMismatchWithConfig: return "DimMismatchWithConfig";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::FileError: return "FileError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace bwsnn
