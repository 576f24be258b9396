#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgamc {

// The ten classes of the benchmark family: eight digital, two analog.
enum class ModulationClass : std::uint8_t {
  BPSK,
  QPSK,
  PSK8,
  QAM16,
  QAM64,
  PAM4,
  GFSK,
  CPFSK,
  AM_DSB,
  WBFM,
};

inline constexpr std::size_t kNumClasses = 10;

inline constexpr std::array<ModulationClass, kNumClasses> kAllClasses = {
    ModulationClass::BPSK,  ModulationClass::QPSK,  ModulationClass::PSK8,
    ModulationClass::QAM16, ModulationClass::QAM64, ModulationClass::PAM4,
    ModulationClass::GFSK,  ModulationClass::CPFSK, ModulationClass::AM_DSB,
    ModulationClass::WBFM,
};

// Display name as used in class tables and the knowledge graph ("8PSK", "AM-DSB", ...).
std::string_view class_name(ModulationClass c);

// Accepts display names and enumerator spellings ("PSK8", "AM_DSB"), case-insensitive.
std::optional<ModulationClass> parse_class(std::string_view name);

// Parses a comma-separated list; "all" yields every class. Throws ConfigError.
std::vector<ModulationClass> parse_class_list(std::string_view list);

std::vector<std::string> class_names(const std::vector<ModulationClass>& classes);

bool is_digital(ModulationClass c);

// PSK, QAM and PAM: memoryless symbol mapping followed by pulse shaping.
bool is_linear(ModulationClass c);

}  // namespace kgamc
