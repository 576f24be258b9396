#include "kgamc/modulation.hpp"

#include <algorithm>
#include <cctype>

#include "kgamc/error.hpp"

namespace kgamc {
namespace {

struct ClassInfo {
  ModulationClass cls;
  std::string_view name;
  std::string_view alias;
  bool digital;
  bool linear;
};

constexpr std::array<ClassInfo, kNumClasses> kInfo = {{
    {ModulationClass::BPSK, "BPSK", "BPSK", true, true},
    {ModulationClass::QPSK, "QPSK", "QPSK", true, true},
    {ModulationClass::PSK8, "8PSK", "PSK8", true, true},
    {ModulationClass::QAM16, "QAM16", "QAM16", true, true},
    {ModulationClass::QAM64, "QAM64", "QAM64", true, true},
    {ModulationClass::PAM4, "PAM4", "PAM4", true, true},
    {ModulationClass::GFSK, "GFSK", "GFSK", true, false},
    {ModulationClass::CPFSK, "CPFSK", "CPFSK", true, false},
    {ModulationClass::AM_DSB, "AM-DSB", "AM_DSB", false, false},
    {ModulationClass::WBFM, "WBFM", "WBFM", false, false},
}};

const ClassInfo& info(ModulationClass c) { return kInfo[static_cast<std::size_t>(c)]; }

bool iequal(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) ==
                  std::toupper(static_cast<unsigned char>(y));
         });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view class_name(ModulationClass c) { return info(c).name; }

std::optional<ModulationClass> parse_class(std::string_view name) {
  name = trim(name);
  for (const auto& i : kInfo) {
    if (iequal(name, i.name) || iequal(name, i.alias)) return i.cls;
  }
  return std::nullopt;
}

std::vector<ModulationClass> parse_class_list(std::string_view list) {
  if (iequal(trim(list), "all")) return {kAllClasses.begin(), kAllClasses.end()};
  std::vector<ModulationClass> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const auto token = trim(list.substr(0, comma));
    list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
    if (token.empty()) continue;
    const auto cls = parse_class(token);
    if (!cls) throw ConfigError("unknown modulation class '" + std::string(token) + "'");
    if (std::find(out.begin(), out.end(), *cls) != out.end()) {
      throw ConfigError("modulation class '" + std::string(token) + "' listed twice");
    }
    out.push_back(*cls);
  }
  if (out.empty()) throw ConfigError("empty class list");
  return out;
}

std::vector<std::string> class_names(const std::vector<ModulationClass>& classes) {
  std::vector<std::string> out;
  out.reserve(classes.size());
  for (auto c : classes) out.emplace_back(class_name(c));
  return out;
}

bool is_digital(ModulationClass c) { return info(c).digital; }
bool is_linear(ModulationClass c) { return info(c).linear; }

}  // namespace kgamc
