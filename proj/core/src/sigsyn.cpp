#include "kgamc/sigsyn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kgamc/error.hpp"
#include "kgamc/parallel.hpp"

namespace kgamc::sigsyn {
namespace {

constexpr double kPi = std::numbers::pi;

unsigned gray(unsigned v) { return v ^ (v >> 1); }

// Gray-labelled PAM levels -(n-1), ..., n-1 (unnormalized).
std::vector<double> gray_pam_levels(unsigned n) {
  std::vector<double> levels(n);
  for (unsigned p = 0; p < n; ++p) levels[gray(p)] = 2.0 * p - (n - 1.0);
  return levels;
}

std::vector<Complex> square_qam(unsigned per_axis, double scale) {
  const auto levels = gray_pam_levels(per_axis);
  unsigned bits = 0;
  while ((1u << bits) < per_axis) ++bits;
  std::vector<Complex> points(per_axis * per_axis);
  for (unsigned label = 0; label < points.size(); ++label) {
    points[label] = Complex(levels[label >> bits], levels[label & (per_axis - 1)]) * scale;
  }
  return points;
}

std::vector<double> gaussian_taps(double bt, std::size_t sps, std::size_t span) {
  const std::size_t len = span * sps + 1;
  const double center = static_cast<double>(span * sps) / 2.0;
  std::vector<double> taps(len);
  double total = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double t = (static_cast<double>(i) - center) / static_cast<double>(sps);
    taps[i] = std::exp(-2.0 * kPi * kPi * bt * bt * t * t / std::log(2.0));
    total += taps[i];
  }
  for (auto& v : taps) v /= total;
  return taps;
}

// Number of symbols that cover num_samples of steady state after trimming
// span symbols of transient at each end.
std::size_t symbols_for(std::size_t num_samples, const SynthConfig& cfg) {
  const std::size_t sps = cfg.samples_per_symbol;
  return (num_samples + sps - 1) / sps + 2 * cfg.rrc_span;
}

ComplexSeq modulate_linear(ModulationClass c, const SynthConfig& cfg, Rng& rng,
                           std::size_t num_samples) {
  const auto points = constellation(c);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  std::vector<Complex> symbols(symbols_for(num_samples, cfg));
  for (auto& s : symbols) s = points[pick(rng)];
  const auto taps = rrc_taps(cfg.rrc_rolloff, cfg.samples_per_symbol, cfg.rrc_span);
  const auto shaped = shape_symbols(symbols, taps, cfg.samples_per_symbol);
  const std::size_t start = cfg.rrc_span * cfg.samples_per_symbol;
  return {shaped.begin() + static_cast<std::ptrdiff_t>(start),
          shaped.begin() + static_cast<std::ptrdiff_t>(start + num_samples)};
}

// Continuous-phase FSK; GFSK smooths the NRZ frequency pulse with a Gaussian filter.
ComplexSeq modulate_fsk(bool gaussian, const SynthConfig& cfg, Rng& rng,
                        std::size_t num_samples) {
  const std::size_t sps = cfg.samples_per_symbol;
  const std::size_t nsym = symbols_for(num_samples, cfg);
  std::bernoulli_distribution bit(0.5);
  std::vector<double> freq(nsym * sps);
  for (std::size_t m = 0; m < nsym; ++m) {
    const double a = bit(rng) ? 1.0 : -1.0;
    for (std::size_t k = 0; k < sps; ++k) freq[m * sps + k] = a;
  }
  if (gaussian) {
    const auto taps = gaussian_taps(cfg.gaussian_bt, sps, std::max<std::size_t>(cfg.rrc_span / 2, 1));
    const std::size_t half = (taps.size() - 1) / 2;
    std::vector<double> smooth(freq.size(), 0.0);
    for (std::size_t n = 0; n < freq.size(); ++n) {
      double acc = 0.0;
      for (std::size_t i = 0; i < taps.size(); ++i) {
        const auto pos = static_cast<std::ptrdiff_t>(n + i) - static_cast<std::ptrdiff_t>(half);
        if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(freq.size())) acc += taps[i] * freq[pos];
      }
      smooth[n] = acc;
    }
    freq.swap(smooth);
  }
  const double step = kPi * cfg.fsk_modulation_index / static_cast<double>(sps);
  const std::size_t start = cfg.rrc_span * sps;
  ComplexSeq out(num_samples);
  double phase = 0.0;
  for (std::size_t n = 0; n < start + num_samples; ++n) {
    phase = std::fmod(phase + step * freq[n], 2.0 * kPi);
    if (n >= start) out[n - start] = std::polar(1.0, phase);
  }
  return out;
}

// Sum of random-phase tones with random frequencies, unit RMS over the window.
std::vector<double> analog_message(const SynthConfig& cfg, Rng& rng, std::size_t num_samples) {
  std::uniform_real_distribution<double> freq_dist(cfg.message_min_freq, cfg.message_max_freq);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * kPi);
  std::vector<double> freqs(cfg.message_tones), phases(cfg.message_tones);
  for (std::size_t k = 0; k < cfg.message_tones; ++k) {
    freqs[k] = freq_dist(rng);
    phases[k] = phase_dist(rng);
  }
  std::vector<double> m(num_samples, 0.0);
  double power = 0.0;
  for (std::size_t n = 0; n < num_samples; ++n) {
    for (std::size_t k = 0; k < cfg.message_tones; ++k) {
      m[n] += std::cos(2.0 * kPi * freqs[k] * static_cast<double>(n) + phases[k]);
    }
    power += m[n] * m[n];
  }
  const double rms = std::sqrt(power / static_cast<double>(num_samples));
  if (rms > 0.0) {
    for (auto& v : m) v /= rms;
  }
  return m;
}

}  // namespace

std::vector<int> SynthConfig::default_snr_grid() {
  std::vector<int> grid;
  for (int snr = -20; snr <= 18; snr += 2) grid.push_back(snr);
  return grid;
}

void SynthConfig::validate() const {
  if (samples_per_symbol < 2) throw ConfigError("samples_per_symbol must be at least 2");
  if (frame_len < 2 * samples_per_symbol) {
    throw ConfigError("frame_len must be at least 2 * samples_per_symbol");
  }
  if (!(rrc_rolloff > 0.0 && rrc_rolloff <= 1.0)) throw ConfigError("rrc_rolloff must be in (0, 1]");
  if (rrc_span < 2) throw ConfigError("rrc_span must be at least 2");
  if (classes.empty()) throw ConfigError("no modulation classes selected");
  if (classes.size() > 256) throw ConfigError("at most 256 classes");
  if (snr_grid.empty()) throw ConfigError("empty SNR grid");
  for (int snr : snr_grid) {
    if (snr != kNoiselessSnr && (snr < -20 || snr > 18)) {
      throw ConfigError("SNR " + std::to_string(snr) + " dB outside [-20, 18]");
    }
  }
  if (message_tones == 0 || !(message_min_freq > 0.0) || message_max_freq < message_min_freq) {
    throw ConfigError("invalid analog message parameters");
  }
}

std::vector<Complex> constellation(ModulationClass c) {
  switch (c) {
    case ModulationClass::BPSK:
      return {Complex(1.0, 0.0), Complex(-1.0, 0.0)};
    case ModulationClass::QPSK:
      return square_qam(2, 1.0 / std::sqrt(2.0));
    case ModulationClass::PSK8: {
      std::vector<Complex> points(8);
      for (unsigned p = 0; p < 8; ++p) points[gray(p)] = std::polar(1.0, 2.0 * kPi * p / 8.0);
      return points;
    }
    case ModulationClass::QAM16:
      return square_qam(4, 1.0 / std::sqrt(10.0));
    case ModulationClass::QAM64:
      return square_qam(8, 1.0 / std::sqrt(42.0));
    case ModulationClass::PAM4: {
      std::vector<Complex> points;
      for (double level : gray_pam_levels(4)) points.emplace_back(level / std::sqrt(5.0), 0.0);
      return points;
    }
    default:
      throw ConfigError("unsupported constellation: " + std::string(class_name(c)) +
                        " is not a linear modulation");
  }
}

std::vector<double> rrc_taps(double rolloff, std::size_t sps, std::size_t span) {
  if (!(rolloff > 0.0 && rolloff <= 1.0)) throw ConfigError("rrc rolloff must be in (0, 1]");
  if (sps < 2 || span < 2) throw ConfigError("rrc needs sps >= 2 and span >= 2");
  const std::size_t len = span * sps + 1;
  const double center = static_cast<double>(span * sps) / 2.0;
  const double beta = rolloff;
  std::vector<double> taps(len);
  double energy = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double t = (static_cast<double>(i) - center) / static_cast<double>(sps);
    double h;
    if (std::abs(t) < 1e-12) {
      h = 1.0 - beta + 4.0 * beta / kPi;
    } else if (std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
      h = beta / std::sqrt(2.0) *
          ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * beta)) +
           (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * beta)));
    } else {
      const double x = 4.0 * beta * t;
      h = (std::sin(kPi * t * (1.0 - beta)) + x * std::cos(kPi * t * (1.0 + beta))) /
          (kPi * t * (1.0 - x * x));
    }
    taps[i] = h;
    energy += h * h;
  }
  const double norm = std::sqrt(energy);
  for (auto& v : taps) v /= norm;
  return taps;
}

ComplexSeq shape_symbols(std::span<const Complex> symbols, std::span<const double> taps,
                         std::size_t sps) {
  if (symbols.empty()) return {};
  const std::size_t len = (symbols.size() - 1) * sps + taps.size();
  ComplexSeq out(len);
  const double gain = std::sqrt(static_cast<double>(sps));
  for (std::size_t m = 0; m < symbols.size(); ++m) {
    const Complex s = symbols[m] * gain;
    for (std::size_t i = 0; i < taps.size(); ++i) out[m * sps + i] += s * taps[i];
  }
  return out;
}

ComplexSeq modulate(ModulationClass c, const SynthConfig& cfg, Rng& rng, std::size_t num_samples) {
  if (num_samples == 0) num_samples = cfg.frame_len;
  if (is_linear(c)) return modulate_linear(c, cfg, rng, num_samples);
  switch (c) {
    case ModulationClass::GFSK:
      return modulate_fsk(true, cfg, rng, num_samples);
    case ModulationClass::CPFSK:
      return modulate_fsk(false, cfg, rng, num_samples);
    case ModulationClass::AM_DSB: {
      const auto m = analog_message(cfg, rng, num_samples);
      return {m.begin(), m.end()};
    }
    case ModulationClass::WBFM: {
      const auto m = analog_message(cfg, rng, num_samples);
      const double deviation = cfg.fm_modulation_index * cfg.message_max_freq;
      ComplexSeq out(num_samples);
      double phase = 0.0;
      for (std::size_t n = 0; n < num_samples; ++n) {
        phase = std::fmod(phase + 2.0 * kPi * deviation * m[n], 2.0 * kPi);
        out[n] = std::polar(1.0, phase);
      }
      return out;
    }
    default:
      throw ConfigError("unhandled modulation class");
  }
}

double mean_power(std::span<const Complex> s) {
  if (s.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : s) acc += std::norm(v);
  return acc / static_cast<double>(s.size());
}

ComplexSeq add_awgn(std::span<const Complex> s, double snr_db, Rng& rng) {
  const double power = mean_power(s);
  if (!(power > 0.0)) throw ConfigError("undefined SNR: input signal has zero power");
  if (std::isinf(snr_db) && snr_db > 0) return {s.begin(), s.end()};
  const double noise_var = power * std::pow(10.0, -snr_db / 10.0);
  std::normal_distribution<double> noise(0.0, std::sqrt(noise_var / 2.0));
  ComplexSeq out(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) {
    const double re = noise(rng);
    const double im = noise(rng);
    out[n] = s[n] + Complex(re, im);
  }
  return out;
}

SignalFrame to_iq_frame(std::span<const Complex> s, std::uint8_t label, std::int16_t snr_db,
                        std::size_t length, std::size_t offset) {
  if (s.size() < offset + length) {
    throw ShapeError("to_iq_frame: sequence of length " + std::to_string(s.size()) +
                     " too short for window [" + std::to_string(offset) + ", " +
                     std::to_string(offset + length) + ")");
  }
  SignalFrame frame;
  frame.label = label;
  frame.snr_db = snr_db;
  frame.iq.resize(2 * length);
  for (std::size_t n = 0; n < length; ++n) {
    frame.iq[n] = static_cast<float>(s[offset + n].real());
    frame.iq[length + n] = static_cast<float>(s[offset + n].imag());
  }
  return frame;
}

std::uint64_t frame_seed(std::uint64_t seed, std::size_t class_index, int snr_db,
                         std::size_t index) {
  return derive_seed(seed, class_index, static_cast<std::uint64_t>(static_cast<std::int64_t>(snr_db)),
                     index);
}

SignalFrame synth_frame(const SynthConfig& cfg, std::size_t class_index, int snr_db,
                        std::size_t index) {
  Rng rng(frame_seed(cfg.seed, class_index, snr_db, index));
  const auto clean = modulate(cfg.classes.at(class_index), cfg, rng);
  const double snr = snr_db == kNoiselessSnr ? kNoiseless : static_cast<double>(snr_db);
  const auto noisy = add_awgn(clean, snr, rng);
  return to_iq_frame(noisy, static_cast<std::uint8_t>(class_index),
                     static_cast<std::int16_t>(snr_db), cfg.frame_len);
}

Dataset synth_dataset(const SynthConfig& cfg, std::size_t frames_per_cell) {
  cfg.validate();
  if (frames_per_cell == 0) throw ConfigError("frames_per_cell must be positive");
  Dataset ds;
  ds.class_names = class_names(cfg.classes);
  ds.frame_len = cfg.frame_len;
  ds.snr_grid = cfg.snr_grid;
  std::sort(ds.snr_grid.begin(), ds.snr_grid.end());
  ds.snr_grid.erase(std::unique(ds.snr_grid.begin(), ds.snr_grid.end()), ds.snr_grid.end());
  ds.seed = cfg.seed;
  ds.parameters = {
      {"frame_len", std::to_string(cfg.frame_len)},
      {"samples_per_symbol", std::to_string(cfg.samples_per_symbol)},
      {"rrc_rolloff", std::to_string(cfg.rrc_rolloff)},
      {"rrc_span", std::to_string(cfg.rrc_span)},
      {"frames_per_cell", std::to_string(frames_per_cell)},
  };
  const std::size_t n_snr = cfg.snr_grid.size();
  const std::size_t cells = cfg.classes.size() * n_snr;
  ds.frames.resize(cells * frames_per_cell);
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t ci = cell / n_snr;
    const int snr = cfg.snr_grid[cell % n_snr];
    for (std::size_t k = 0; k < frames_per_cell; ++k) {
      ds.frames[cell * frames_per_cell + k] = synth_frame(cfg, ci, snr, k);
    }
  });
  return ds;
}

}  // namespace kgamc::sigsyn
