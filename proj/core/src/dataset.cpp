#include "kgamc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kgamc/error.hpp"

namespace kgamc {

void Dataset::validate() const {
  if (class_names.size() > 256) throw ConfigError("class table exceeds 256 entries");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.iq.size() != 2 * frame_len) {
      throw ConfigError("frame " + std::to_string(i) + " has length " +
                        std::to_string(f.length()) + ", expected " + std::to_string(frame_len));
    }
    if (f.label >= class_names.size()) {
      throw ConfigError("frame " + std::to_string(i) + " has label " + std::to_string(f.label) +
                        " outside the class table");
    }
    if (!std::all_of(f.iq.begin(), f.iq.end(), [](float v) { return std::isfinite(v); })) {
      throw ConfigError("frame " + std::to_string(i) + " contains a non-finite sample");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.class_names = class_names;
  out.frame_len = frame_len;
  out.snr_grid = snr_grid;
  out.seed = seed;
  out.parameters = parameters;
  out.frames.reserve(indices.size());
  for (auto i : indices) out.frames.push_back(frames.at(i));
  return out;
}

std::vector<int> snr_values(const std::vector<SignalFrame>& frames) {
  std::set<int> values;
  for (const auto& f : frames) values.insert(f.snr_db);
  return {values.begin(), values.end()};
}

}  // namespace kgamc
