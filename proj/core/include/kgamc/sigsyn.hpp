#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "kgamc/dataset.hpp"
#include "kgamc/modulation.hpp"

// Complex-baseband synthesis of the ten modulation classes, AWGN at a target
// SNR, and framing into 2 x L real I/Q matrices.
namespace kgamc::sigsyn {

using Complex = std::complex<double>;
using ComplexSeq = std::vector<Complex>;
using Rng = std::mt19937_64;

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

struct SynthConfig {
  std::size_t frame_len = 128;
  std::size_t samples_per_symbol = 8;
  double rrc_rolloff = 0.35;
  std::size_t rrc_span = 8;  // symbols
  std::uint64_t seed = 0;
  std::vector<int> snr_grid = default_snr_grid();
  std::vector<ModulationClass> classes{kAllClasses.begin(), kAllClasses.end()};

  // GFSK / CPFSK
  double gaussian_bt = 0.35;
  double fsk_modulation_index = 0.5;
  // Analog sources
  std::size_t message_tones = 8;
  double message_min_freq = 0.002;  // cycles / sample
  double message_max_freq = 0.04;
  double fm_modulation_index = 0.8;  // peak deviation relative to message_max_freq

  // Throws ConfigError on out-of-range values.
  void validate() const;

  static std::vector<int> default_snr_grid();  // -20:18:2
};

// Gray-coded constellation normalized to unit average power. Linear classes only;
// anything else throws ConfigError.
std::vector<Complex> constellation(ModulationClass c);

// Root-raised-cosine taps, span * sps + 1 long, symmetric, unit energy.
std::vector<double> rrc_taps(double rolloff, std::size_t sps, std::size_t span);

// Full convolution of the zero-stuffed symbol stream with taps, scaled by
// sqrt(sps) so i.i.d. unit-power symbols give unit-power samples. Symbol m
// peaks at index m * sps + (taps.size() - 1) / 2.
ComplexSeq shape_symbols(std::span<const Complex> symbols, std::span<const double> taps,
                         std::size_t sps);

// Steady-state complex baseband of `num_samples` samples (frame_len when 0).
ComplexSeq modulate(ModulationClass c, const SynthConfig& cfg, Rng& rng,
                    std::size_t num_samples = 0);

// r = s + w with per-component noise variance P_s * 10^(-snr/10) / 2, where
// P_s is the mean power of s. kNoiseless returns s unchanged. Zero-power
// input throws ConfigError.
ComplexSeq add_awgn(std::span<const Complex> s, double snr_db, Rng& rng);

// Window [offset, offset + length) of s as a 2 x length frame.
SignalFrame to_iq_frame(std::span<const Complex> s, std::uint8_t label, std::int16_t snr_db,
                        std::size_t length, std::size_t offset = 0);

// Mean of |s(n)|^2.
double mean_power(std::span<const Complex> s);

// Seed of frame `index` in cell (class_index, snr). Frames are independent of
// scheduling because each derives its own generator from this.
std::uint64_t frame_seed(std::uint64_t seed, std::size_t class_index, int snr_db,
                         std::size_t index);

// One noisy frame exactly as synth_dataset produces it.
SignalFrame synth_frame(const SynthConfig& cfg, std::size_t class_index, int snr_db,
                        std::size_t index);

// Balanced dataset: frames_per_cell frames for every (class, snr), class-major
// then SNR then index. A pure function of cfg.
Dataset synth_dataset(const SynthConfig& cfg, std::size_t frames_per_cell);

}  // namespace kgamc::sigsyn
