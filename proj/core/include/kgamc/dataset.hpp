#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace kgamc {

// SNR tag reserved for frames generated without noise.
inline constexpr std::int16_t kNoiselessSnr = 32767;

// One 2 x L real I/Q frame. iq holds row 0 (in-phase) then row 1 (quadrature).
struct SignalFrame {
  std::vector<float> iq;
  std::uint8_t label = 0;  // index into the owning dataset's class table
  std::int16_t snr_db = 0;

  std::size_t length() const noexcept { return iq.size() / 2; }
  std::span<const float> in_phase() const { return {iq.data(), length()}; }
  std::span<const float> quadrature() const { return {iq.data() + length(), length()}; }

  bool operator==(const SignalFrame&) const = default;
};

struct Dataset {
  std::vector<std::string> class_names;
  std::size_t frame_len = 0;
  std::vector<int> snr_grid;  // sorted distinct SNR tags
  std::uint64_t seed = 0;
  std::map<std::string, std::string> parameters;  // creation parameters, informational
  std::vector<SignalFrame> frames;

  std::size_t num_classes() const noexcept { return class_names.size(); }

  // Throws ConfigError when a frame has the wrong length, a bad label, or a non-finite sample.
  void validate() const;

  // Dataset with the same metadata and the frames at the given positions.
  Dataset subset(std::span<const std::size_t> indices) const;
};

// Sorted distinct SNR tags present in the frames.
std::vector<int> snr_values(const std::vector<SignalFrame>& frames);

}  // namespace kgamc
