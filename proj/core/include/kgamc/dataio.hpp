#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kgamc/dataset.hpp"

// AMCD dataset container and the stratified train/test split.
//
// AMCD layout, all integers little-endian:
//   char[4]  magic "AMCD"
//   u16      format version (1)
//   u32      class count C
//   C times: u16 byte length, UTF-8 class name
//   u32      frame length L
//   u32      record count R
//   R times: u8 class id, i16 SNR dB (32767 = noiseless), 2L float32 (row 0 then row 1)
namespace kgamc::dataio {

inline constexpr char kMagic[4] = {'A', 'M', 'C', 'D'};
inline constexpr std::uint16_t kFormatVersion = 1;

std::vector<std::uint8_t> serialize(const Dataset& ds);
Dataset deserialize(const std::vector<std::uint8_t>& bytes);

void write_dataset(const Dataset& ds, const std::filesystem::path& path);

// Throws FormatError naming the byte offset on bad magic, version, or truncation.
Dataset read_dataset(const std::filesystem::path& path);

// Size in bytes of the header for the given class table.
std::size_t header_size(const std::vector<std::string>& class_names);
std::size_t record_size(std::size_t frame_len);

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::string> warnings;  // one per empty (class, snr) cell of the grid
};

// Stratified split: every (class, snr) cell sends round(n * train_fraction)
// frames to train and the rest to test. Frames keep their relative order.
SplitResult split(const Dataset& ds, double train_fraction, std::uint64_t seed);

// One frame per CSV file with two columns (I, Q) and an optional header row.
// File names follow <CLASS>_<SNR>[_anything].csv; SNR may carry a "dB" suffix.
// frame_len 0 takes the row count of the first file; longer files are truncated.
Dataset convert_csv_directory(const std::filesystem::path& dir, std::size_t frame_len = 0);

// A single I,Q CSV frame (label 0, SNR 0). frame_len 0 keeps every row;
// otherwise the first frame_len rows, ShapeError if there are fewer.
SignalFrame read_csv_frame(const std::filesystem::path& path, std::size_t frame_len = 0);

}  // namespace kgamc::dataio
