#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <map>
#include <numbers>

#include "kgamc/error.hpp"
#include "kgamc/sigsyn.hpp"

using namespace kgamc;
using namespace kgamc::sigsyn;

namespace {

double power(const std::vector<Complex>& s) {
  double p = 0;
  for (const auto& v : s) p += std::norm(v);
  return p / static_cast<double>(s.size());
}

// Unnormalized root-raised-cosine impulse response at t (symbol periods).
double rrc_reference(double t, double beta) {
  const double pi = std::numbers::pi;
  if (std::abs(t) < 1e-12) return 1.0 + beta * (4.0 / pi - 1.0);
  if (std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-12) {
    return beta / std::sqrt(2.0) *
           ((1 + 2 / pi) * std::sin(pi / (4 * beta)) + (1 - 2 / pi) * std::cos(pi / (4 * beta)));
  }
  return (std::sin(pi * t * (1 - beta)) + 4 * beta * t * std::cos(pi * t * (1 + beta))) /
         (pi * t * (1 - std::pow(4 * beta * t, 2)));
}

std::size_t nearest(const std::vector<Complex>& points, Complex z) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (std::abs(points[k] - z) < std::abs(points[best] - z)) best = k;
  }
  return best;
}

}  // namespace

TEST(Constellation, BpskAntipodal) {
  const auto c = constellation(ModulationClass::BPSK);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_NEAR(std::abs(c[0] + c[1]), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(c[0]), 1.0, 1e-12);
  EXPECT_NEAR(c[0].imag(), 0.0, 1e-12);
}

TEST(Constellation, QpskCorners) {
  const auto c = constellation(ModulationClass::QPSK);
  ASSERT_EQ(c.size(), 4u);
  for (const auto& z : c) {
    EXPECT_NEAR(std::abs(z.real()), 1 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(std::abs(z.imag()), 1 / std::sqrt(2.0), 1e-12);
  }
}

TEST(Constellation, Qam16Grid) {
  const auto c = constellation(ModulationClass::QAM16);
  ASSERT_EQ(c.size(), 16u);
  const double scale = 1 / std::sqrt(10.0);
  for (const auto& z : c) {
    const double re = z.real() / scale, im = z.imag() / scale;
    EXPECT_NEAR(std::abs(re), std::round(std::abs(re)), 1e-9);
    EXPECT_TRUE(std::abs(std::abs(re) - 1) < 1e-9 || std::abs(std::abs(re) - 3) < 1e-9);
    EXPECT_TRUE(std::abs(std::abs(im) - 1) < 1e-9 || std::abs(std::abs(im) - 3) < 1e-9);
  }
}

TEST(Constellation, UnitPowerAndDistinct) {
  for (auto cls : {ModulationClass::BPSK, ModulationClass::QPSK, ModulationClass::PSK8,
                   ModulationClass::QAM16, ModulationClass::QAM64, ModulationClass::PAM4}) {
    const auto c = constellation(cls);
    EXPECT_NEAR(power(c), 1.0, 1e-12) << class_name(cls);
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = i + 1; j < c.size(); ++j) EXPECT_GT(std::abs(c[i] - c[j]), 1e-3);
    }
  }
}

TEST(Constellation, GrayNeighboursDifferInOneBit) {
  for (auto cls : {ModulationClass::QPSK, ModulationClass::PSK8, ModulationClass::QAM16,
                   ModulationClass::QAM64, ModulationClass::PAM4}) {
    const auto c = constellation(cls);
    double dmin = 1e9;
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = i + 1; j < c.size(); ++j) dmin = std::min(dmin, std::abs(c[i] - c[j]));
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        if (std::abs(std::abs(c[i] - c[j]) - dmin) < 1e-9) {
          EXPECT_EQ(std::popcount(i ^ j), 1) << class_name(cls) << " " << i << "," << j;
        }
      }
    }
  }
}

TEST(Constellation, NonLinearRejected) {
  EXPECT_THROW(constellation(ModulationClass::GFSK), ConfigError);
  EXPECT_THROW(constellation(ModulationClass::WBFM), ConfigError);
  EXPECT_THROW(constellation(ModulationClass::AM_DSB), ConfigError);
}

TEST(RrcTaps, SymmetricUnitEnergy) {
  for (double beta : {0.1, 0.25, 0.35, 0.5, 1.0}) {
    for (std::size_t sps : {2u, 4u, 8u}) {
      const auto h = rrc_taps(beta, sps, 8);
      ASSERT_EQ(h.size() % 2, 1u);
      double energy = 0;
      for (std::size_t i = 0; i < h.size(); ++i) {
        EXPECT_DOUBLE_EQ(h[i], h[h.size() - 1 - i]);
        EXPECT_TRUE(std::isfinite(h[i]));
        energy += h[i] * h[i];
      }
      EXPECT_NEAR(energy, 1.0, 1e-9);
    }
  }
}

TEST(RrcTaps, MatchesClosedForm) {
  const double beta = 0.35;
  const std::size_t sps = 8, span = 8;
  const auto h = rrc_taps(beta, sps, span);
  std::vector<double> ref;
  const long half = static_cast<long>(span * sps / 2);
  for (long n = -half; n <= half; ++n) ref.push_back(rrc_reference(double(n) / double(sps), beta));
  double energy = 0;
  for (double v : ref) energy += v * v;
  ASSERT_EQ(ref.size(), h.size());
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(h[i], ref[i] / std::sqrt(energy), 1e-12);
  // sps = 4 with beta 0.25 puts a tap exactly on the singular point t = 1 / (4 beta).
  const auto h2 = rrc_taps(0.25, 4, 8);
  for (double v : h2) EXPECT_TRUE(std::isfinite(v));
}

TEST(RrcTaps, RejectsBadArguments) {
  EXPECT_THROW(rrc_taps(0.0, 8, 8), ConfigError);
  EXPECT_THROW(rrc_taps(1.5, 8, 8), ConfigError);
  EXPECT_THROW(rrc_taps(0.35, 1, 8), ConfigError);
}

TEST(Modulate, PowerCalibration) {
  SynthConfig cfg;
  for (auto cls : kAllClasses) {
    Rng rng(11);
    const auto s = modulate(cls, cfg, rng, 100000);
    ASSERT_EQ(s.size(), 100000u);
    const double p = mean_power(s);
    EXPECT_GE(p, 0.95) << class_name(cls);
    EXPECT_LE(p, 1.05) << class_name(cls);
  }
}

TEST(Modulate, FrameLengthByDefault) {
  SynthConfig cfg;
  Rng rng(1);
  EXPECT_EQ(modulate(ModulationClass::QAM64, cfg, rng).size(), cfg.frame_len);
}

TEST(Modulate, ContinuousPhaseHasConstantEnvelope) {
  SynthConfig cfg;
  for (auto cls : {ModulationClass::CPFSK, ModulationClass::GFSK, ModulationClass::WBFM}) {
    Rng rng(3);
    for (const auto& v : modulate(cls, cfg, rng, 4096)) EXPECT_NEAR(std::abs(v), 1.0, 1e-6);
  }
}

TEST(Modulate, AmIsReal) {
  SynthConfig cfg;
  Rng rng(5);
  for (const auto& v : modulate(ModulationClass::AM_DSB, cfg, rng, 1024)) EXPECT_EQ(v.imag(), 0.0);
}

TEST(Modulate, ConstantSymbolsGivePeriodicStream) {
  const std::size_t sps = 8;
  const auto taps = rrc_taps(0.35, sps, 8);
  std::vector<Complex> ones(64, Complex(1.0, 0.0));
  const auto shaped = shape_symbols(ones, taps, sps);
  // Away from the transients the stream is real and periodic in the symbol period.
  const std::size_t lo = taps.size(), hi = shaped.size() - taps.size() - sps;
  for (std::size_t n = lo; n < hi; ++n) {
    EXPECT_NEAR(shaped[n].real(), shaped[n + sps].real(), 1e-9);
    EXPECT_NEAR(shaped[n].real(), 1.0, 0.05);
    EXPECT_EQ(shaped[n].imag(), 0.0);
  }
}

TEST(Modulate, QpskLoopbackKnownSymbols) {
  const std::size_t sps = 8, span = 8;
  const auto taps = rrc_taps(0.35, sps, span);
  const auto points = constellation(ModulationClass::QPSK);
  Rng rng(21);
  std::vector<std::size_t> sent(400);
  std::vector<Complex> symbols;
  for (auto& k : sent) {
    k = rng() % 4;
    symbols.push_back(points[k]);
  }
  const auto tx = shape_symbols(symbols, taps, sps);
  // Matched filter, then sample at the combined peak.
  std::vector<Complex> mf(tx.size() + taps.size() - 1);
  for (std::size_t n = 0; n < tx.size(); ++n) {
    for (std::size_t j = 0; j < taps.size(); ++j) mf[n + j] += tx[n] * taps[j];
  }
  const std::size_t delay = taps.size() - 1;
  const double gain = 1.0 / std::sqrt(double(sps));
  std::size_t errors = 0;
  for (std::size_t m = 0; m < symbols.size(); ++m) {
    errors += nearest(points, mf[m * sps + delay] * gain) != sent[m];
  }
  EXPECT_EQ(errors, 0u);
}

TEST(Modulate, QpskLoopbackFromModulator) {
  SynthConfig cfg;
  const auto taps = rrc_taps(cfg.rrc_rolloff, cfg.samples_per_symbol, cfg.rrc_span);
  const auto points = constellation(ModulationClass::QPSK);
  Rng rng(8);
  const auto tx = modulate(ModulationClass::QPSK, cfg, rng, 4096);
  std::vector<Complex> mf(tx.size() + taps.size() - 1);
  for (std::size_t n = 0; n < tx.size(); ++n) {
    for (std::size_t j = 0; j < taps.size(); ++j) mf[n + j] += tx[n] * taps[j];
  }
  const std::size_t sps = cfg.samples_per_symbol;
  const double gain = 1.0 / std::sqrt(double(sps));
  // Symbol instants sit on multiples of sps after the matched-filter delay
  // (the modulator trims span * sps samples of transient). Skip the edges
  // where the filter sees only part of its support.
  const std::size_t delay = taps.size() - 1;
  double worst = 0;
  std::size_t decided = 0;
  for (std::size_t n = 2 * delay; n + delay < tx.size(); n += sps) {
    const auto z = mf[n] * gain;
    worst = std::max(worst, std::abs(points[nearest(points, z)] - z));
    ++decided;
  }
  EXPECT_GT(decided, 400u);
  // Open eye: every decision lands well inside its Voronoi cell (half-distance 0.707).
  EXPECT_LT(worst, 0.1);
}

TEST(Awgn, NoiselessIsIdentity) {
  SynthConfig cfg;
  Rng rng(2);
  const auto s = modulate(ModulationClass::QAM16, cfg, rng);
  Rng rng2(9);
  EXPECT_EQ(add_awgn(s, kNoiseless, rng2), s);
}

TEST(Awgn, ZeroPowerRejected) {
  std::vector<Complex> zeros(16);
  Rng rng(1);
  EXPECT_THROW(add_awgn(zeros, 0.0, rng), ConfigError);
}

TEST(Awgn, NoisePowerMatchesTarget) {
  std::vector<Complex> ones(100000, Complex(1.0, 0.0));
  for (double snr : {0.0, -20.0}) {
    Rng rng(17);
    const auto r = add_awgn(ones, snr, rng);
    double noise = 0;
    for (std::size_t i = 0; i < r.size(); ++i) noise += std::norm(r[i] - ones[i]);
    noise /= static_cast<double>(r.size());
    const double expected = std::pow(10.0, -snr / 10.0);
    EXPECT_NEAR(noise / expected, 1.0, 0.05) << snr;
  }
}

TEST(Awgn, MeasuredSnrWithinHalfDb) {
  SynthConfig cfg;
  for (int snr = -20; snr <= 18; snr += 2) {
    Rng rng(100 + snr);
    const auto s = modulate(ModulationClass::QPSK, cfg, rng, 10000);
    const auto r = add_awgn(s, snr, rng);
    double ps = 0, pn = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      ps += std::norm(s[i]);
      pn += std::norm(r[i] - s[i]);
    }
    EXPECT_NEAR(10 * std::log10(ps / pn), snr, 0.5);
  }
}

TEST(Framing, LayoutAndRoundTrip) {
  std::vector<Complex> s{{1, 2}, {3, 4}, {5, 6}, {7, 8}};
  const auto f = to_iq_frame(s, 3, 10, 3, 1);
  EXPECT_EQ(f.label, 3);
  EXPECT_EQ(f.snr_db, 10);
  EXPECT_EQ(f.iq, (std::vector<float>{3, 5, 7, 4, 6, 8}));
  const auto g = to_iq_frame(s, 0, 0, 4);
  for (std::size_t n = 0; n < 4; ++n) {
    EXPECT_EQ(Complex(g.in_phase()[n], g.quadrature()[n]), s[n]);
  }
  std::vector<Complex> real{{1, 0}, {2, 0}};
  const auto r = to_iq_frame(real, 0, 0, 2);
  EXPECT_EQ(r.quadrature()[0], 0.0f);
  EXPECT_EQ(r.quadrature()[1], 0.0f);
  EXPECT_THROW(to_iq_frame(s, 0, 0, 4, 1), ShapeError);
}

TEST(SynthDataset, BalancedCounts) {
  SynthConfig cfg;
  cfg.snr_grid = {-10, 0, 10};
  const auto ds = synth_dataset(cfg, 5);
  EXPECT_EQ(ds.frames.size(), 150u);
  std::map<std::pair<int, int>, int> cells;
  std::map<int, int> per_class;
  for (const auto& f : ds.frames) {
    ++cells[{f.label, f.snr_db}];
    ++per_class[f.label];
    EXPECT_EQ(f.length(), 128u);
  }
  EXPECT_EQ(cells.size(), 30u);
  for (const auto& [k, n] : cells) EXPECT_EQ(n, 5);
  for (const auto& [k, n] : per_class) EXPECT_EQ(n, 15);
  EXPECT_NO_THROW(ds.validate());
}

TEST(SynthDataset, DeterministicInSeed) {
  SynthConfig cfg;
  cfg.seed = 7;
  cfg.snr_grid = {-4, 8};
  const auto a = synth_dataset(cfg, 3);
  const auto b = synth_dataset(cfg, 3);
  EXPECT_EQ(a.frames, b.frames);
  cfg.seed = 8;
  EXPECT_NE(synth_dataset(cfg, 3).frames, a.frames);
}

TEST(SynthDataset, FramesMatchSingleFrameSynthesis) {
  SynthConfig cfg;
  cfg.snr_grid = {0, 6};
  cfg.classes = {ModulationClass::BPSK, ModulationClass::WBFM};
  const auto ds = synth_dataset(cfg, 2);
  EXPECT_EQ(ds.frames[0], synth_frame(cfg, 0, 0, 0));
  EXPECT_EQ(ds.frames[7], synth_frame(cfg, 1, 6, 1));
}

TEST(SynthDataset, EmpiricalSnrPerCell) {
  SynthConfig cfg;
  cfg.seed = 4;
  const std::size_t per_cell = 20;
  for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
    for (int snr : {-20, -10, 0, 10, 18}) {
      double total_db = 0;
      for (std::size_t i = 0; i < per_cell; ++i) {
        const auto frame = synth_frame(cfg, c, snr, i);
        Rng rng(frame_seed(cfg.seed, c, snr, i));
        const auto clean = modulate(cfg.classes[c], cfg, rng);
        double ps = 0, pn = 0;
        for (std::size_t n = 0; n < cfg.frame_len; ++n) {
          const Complex r(frame.in_phase()[n], frame.quadrature()[n]);
          ps += std::norm(clean[n]);
          pn += std::norm(r - clean[n]);
        }
        total_db += 10 * std::log10(ps / pn);
      }
      EXPECT_NEAR(total_db / per_cell, snr, 1.0) << class_name(cfg.classes[c]) << " " << snr;
    }
  }
}

TEST(SynthConfig, Validation) {
  SynthConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.frame_len = 8;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.snr_grid = {20};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.rrc_rolloff = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_EQ(SynthConfig::default_snr_grid().size(), 20u);
}
