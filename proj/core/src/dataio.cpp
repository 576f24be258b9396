#include "kgamc/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "bytes.hpp"
#include "kgamc/error.hpp"
#include "kgamc/modulation.hpp"
#include "kgamc/parallel.hpp"

namespace kgamc::dataio {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  std::string buf(text);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size();
}

std::vector<std::pair<double, double>> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::pair<double, double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto sep = text.find_first_of(",;\t");
    double i = 0.0, q = 0.0;
    const bool ok = sep != std::string_view::npos && parse_double(text.substr(0, sep), i) &&
                    parse_double(text.substr(sep + 1), q);
    if (!ok) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw ParseError(path.string() + ": expected two numeric columns I,Q", line_no);
    }
    rows.emplace_back(i, q);
  }
  return rows;
}

SignalFrame frame_from_rows(const std::vector<std::pair<double, double>>& rows,
                            std::size_t frame_len) {
  SignalFrame f;
  f.iq.resize(2 * frame_len);
  for (std::size_t n = 0; n < frame_len; ++n) {
    f.iq[n] = static_cast<float>(rows[n].first);
    f.iq[frame_len + n] = static_cast<float>(rows[n].second);
  }
  return f;
}

}  // namespace

std::size_t header_size(const std::vector<std::string>& class_names) {
  std::size_t n = 4 + 2 + 4 + 4 + 4;
  for (const auto& name : class_names) n += 2 + name.size();
  return n;
}

std::size_t record_size(std::size_t frame_len) { return 1 + 2 + 2 * frame_len * 4; }

std::vector<std::uint8_t> serialize(const Dataset& ds) {
  ds.validate();
  std::vector<std::uint8_t> out;
  out.reserve(header_size(ds.class_names) + ds.frames.size() * record_size(ds.frame_len));
  detail::ByteWriter w(out);
  w.bytes(kMagic, 4);
  w.u16(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(ds.class_names.size()));
  for (const auto& name : ds.class_names) {
    if (name.size() > 0xffff) throw ConfigError("class name too long: " + name.substr(0, 32));
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
  }
  w.u32(static_cast<std::uint32_t>(ds.frame_len));
  w.u32(static_cast<std::uint32_t>(ds.frames.size()));
  for (const auto& f : ds.frames) {
    w.u8(f.label);
    w.i16(f.snr_db);
    for (float v : f.iq) w.f32(v);
  }
  return out;
}

Dataset deserialize(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes, "AMCD");
  r.need(4);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad AMCD magic", 0);
  r.string(4);
  const std::size_t version_at = r.offset();
  const auto version = r.u16();
  if (version != kFormatVersion) {
    throw FormatError("unsupported AMCD version " + std::to_string(version), version_at);
  }
  Dataset ds;
  const auto n_classes = r.u32();
  if (n_classes > 256) throw FormatError("class count exceeds 256", r.offset() - 4);
  for (std::uint32_t c = 0; c < n_classes; ++c) {
    const auto len = r.u16();
    ds.class_names.push_back(r.string(len));
  }
  ds.frame_len = r.u32();
  const auto count = r.u32();
  const std::size_t per_record = record_size(ds.frame_len);
  r.need(static_cast<std::size_t>(count) * per_record);
  ds.frames.resize(count);
  for (auto& f : ds.frames) {
    const std::size_t at = r.offset();
    f.label = r.u8();
    if (f.label >= ds.class_names.size()) {
      throw FormatError("class id " + std::to_string(f.label) + " outside class table", at);
    }
    f.snr_db = r.i16();
    f.iq.resize(2 * ds.frame_len);
    for (auto& v : f.iq) v = r.f32();
  }
  if (r.offset() != bytes.size()) throw FormatError("trailing bytes after last record", r.offset());
  ds.snr_grid = snr_values(ds.frames);
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  const auto bytes = serialize(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

SplitResult split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must be in (0, 1)");
  }
  std::map<std::pair<int, int>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < ds.frames.size(); ++i) {
    cells[{ds.frames[i].label, ds.frames[i].snr_db}].push_back(i);
  }
  SplitResult result;
  for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
    for (int snr : ds.snr_grid) {
      if (!cells.contains({static_cast<int>(c), snr})) {
        result.warnings.push_back("empty cell: class " + ds.class_names[c] + ", SNR " +
                                  std::to_string(snr) + " dB");
      }
    }
  }
  std::vector<char> in_train(ds.frames.size(), 0);
  for (auto& [key, members] : cells) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(key.first),
                                    static_cast<std::uint64_t>(static_cast<std::int64_t>(key.second))));
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_train = std::min<std::size_t>(
        members.size(),
        static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * train_fraction)));
    for (std::size_t k = 0; k < n_train; ++k) in_train[members[k]] = 1;
  }
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < ds.frames.size(); ++i) {
    (in_train[i] ? train_idx : test_idx).push_back(i);
  }
  result.train = ds.subset(train_idx);
  result.test = ds.subset(test_idx);
  return result;
}

Dataset convert_csv_directory(const std::filesystem::path& dir, std::size_t frame_len) {
  if (!std::filesystem::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .csv files in " + dir.string());

  struct Pending {
    std::string cls;
    int snr;
    std::vector<std::pair<double, double>> rows;
  };
  std::vector<Pending> pending;
  std::set<std::string> names;
  for (const auto& file : files) {
    const std::string stem = file.stem().string();
    const auto first = stem.find('_');
    if (first == std::string::npos || first == 0) {
      throw ConfigError(file.filename().string() + ": expected <CLASS>_<SNR>[_tag].csv");
    }
    const auto second = stem.find('_', first + 1);
    std::string snr_text = stem.substr(first + 1, second == std::string::npos ? std::string::npos
                                                                            : second - first - 1);
    if (snr_text.size() > 2 && (snr_text.ends_with("dB") || snr_text.ends_with("db"))) {
      snr_text.resize(snr_text.size() - 2);
    }
    double snr = 0.0;
    if (!parse_double(snr_text, snr) || snr != std::floor(snr) || snr < -32768 || snr > 32767) {
      throw ConfigError(file.filename().string() + ": SNR field '" + snr_text + "' is not an integer");
    }
    std::string cls = stem.substr(0, first);
    if (auto known = parse_class(cls)) cls = std::string(class_name(*known));
    names.insert(cls);
    pending.push_back({cls, static_cast<int>(snr), read_csv_rows(file)});
  }

  Dataset ds;
  for (auto c : kAllClasses) {
    if (names.erase(std::string(class_name(c)))) ds.class_names.emplace_back(class_name(c));
  }
  ds.class_names.insert(ds.class_names.end(), names.begin(), names.end());
  if (ds.class_names.size() > 256) throw ConfigError("more than 256 classes");
  ds.frame_len = frame_len ? frame_len : pending.front().rows.size();
  if (ds.frame_len == 0) throw ConfigError(files.front().string() + " has no rows");
  ds.parameters = {{"source", dir.string()}};
  for (std::size_t k = 0; k < pending.size(); ++k) {
    const auto& p = pending[k];
    if (p.rows.size() < ds.frame_len) {
      throw ConfigError(files[k].filename().string() + " has " + std::to_string(p.rows.size()) +
                        " rows, need " + std::to_string(ds.frame_len));
    }
    auto f = frame_from_rows(p.rows, ds.frame_len);
    f.label = static_cast<std::uint8_t>(
        std::find(ds.class_names.begin(), ds.class_names.end(), p.cls) - ds.class_names.begin());
    f.snr_db = static_cast<std::int16_t>(p.snr);
    ds.frames.push_back(std::move(f));
  }
  ds.snr_grid = snr_values(ds.frames);
  ds.validate();
  return ds;
}

SignalFrame read_csv_frame(const std::filesystem::path& path, std::size_t frame_len) {
  const auto rows = read_csv_rows(path);
  if (rows.empty()) throw ConfigError(path.string() + " has no rows");
  if (frame_len == 0) frame_len = rows.size();
  if (rows.size() < frame_len) {
    throw ShapeError(path.string() + " has " + std::to_string(rows.size()) + " rows, need " +
                     std::to_string(frame_len));
  }
  return frame_from_rows(rows, frame_len);
}

}  // namespace kgamc::dataio
