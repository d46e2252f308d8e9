#pragma once

// Binary file formats: BWSN weight files, BWIN float input tensors and IDX
// image/label files. Byte layouts are documented in docs/formats.md.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "bwsnn/netmodel.hpp"
#include "bwsnn/tensor.hpp"

namespace bwsnn {

inline constexpr std::uint16_t kWeightFileVersion = 1;
inline constexpr std::uint16_t kInputFileVersion = 1;

std::vector<std::uint8_t> encode_weights(std::span<const BinaryKernelSet> layers);
// Throws BadMagic, ChecksumMismatch, FileError (truncated or malformed).
std::vector<BinaryKernelSet> decode_weights(std::span<const std::uint8_t> bytes);

void write_weight_file(const std::filesystem::path& path, std::span<const BinaryKernelSet> layers);
std::vector<BinaryKernelSet> read_weight_file(const std::filesystem::path& path);

// Installs one kernel set per layer. Throws DimMismatchWithConfig naming the
// first layer whose kind or dimensions disagree with the network.
void attach_weights(NetworkGraph& graph, std::vector<BinaryKernelSet> layers);

std::vector<BinaryKernelSet> random_weights(const NetworkGraph& graph, std::uint64_t seed);
std::vector<BinaryKernelSet> ones_weights(const NetworkGraph& graph);

std::vector<std::uint8_t> encode_inputs(std::span<const RealTensor> images);
std::vector<RealTensor> decode_inputs(std::span<const std::uint8_t> bytes);
void write_input_file(const std::filesystem::path& path, std::span<const RealTensor> images);

// IDX unsigned-byte images (magic 0x00000803), normalized by 1/255 into
// 1 x rows x cols tensors.
std::vector<RealTensor> decode_idx_images(std::span<const std::uint8_t> bytes);
// IDX unsigned-byte labels (magic 0x00000801).
std::vector<std::uint8_t> decode_idx_labels(std::span<const std::uint8_t> bytes);

// Loads BWIN or IDX images, chosen by the file's magic bytes.
std::vector<RealTensor> read_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_labels(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> contents);

}  // namespace bwsnn
