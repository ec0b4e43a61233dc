#include "isac/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "isac/binary_io.hpp"
#include "isac/error.hpp"
#include "isac/rng.hpp"

namespace isac {

namespace {

constexpr std::string_view kStreamMagic = "CSI1";
constexpr std::size_t kStreamHeaderBytes = 4 + 4 + 4 + 8 + 8 + 4;

}  // namespace

std::string encode_stream(const CsiStream& s) {
  ByteWriter w;
  w.tag(kStreamMagic);
  w.u32(static_cast<std::uint32_t>(s.packets()));
  w.u32(static_cast<std::uint32_t>(s.subcarriers()));
  w.f64(s.packet_rate());
  w.u64(s.seed());
  w.u32(static_cast<std::uint32_t>(s.true_target_count()));
  for (const auto& z : s.samples()) {
    w.f64(z.real());
    w.f64(z.imag());
  }
  return w.take();
}

CsiStream decode_stream(std::string_view bytes) {
  if (bytes.size() < kStreamHeaderBytes) throw FormatError("stream: truncated header");
  ByteReader r(bytes);
  if (r.tag() != kStreamMagic) throw FormatError("stream: bad magic (expected CSI1)");
  const std::uint32_t packets = r.u32();
  const std::uint32_t subcarriers = r.u32();
  const double rate = r.f64();
  const std::uint64_t seed = r.u64();
  const std::uint32_t count = r.u32();
  const std::uint64_t expected = std::uint64_t{packets} * subcarriers * 16;
  if (r.remaining() != expected) throw FormatError("stream: payload size does not match header");
  if (!(rate > 0.0) || !std::isfinite(rate)) throw FormatError("stream: invalid packet rate");
  CsiStream s(packets, subcarriers, rate, static_cast<int>(count), seed);
  for (auto& z : s.samples()) {
    const double re = r.f64();
    const double im = r.f64();
    if (!std::isfinite(re) || !std::isfinite(im)) throw FormatError("stream: non-finite sample");
    z = {re, im};
  }
  return s;
}

void save_stream(const CsiStream& stream, const std::filesystem::path& path) {
  write_file(path, encode_stream(stream));
}

CsiStream load_stream(const std::filesystem::path& path) { return decode_stream(read_file(path)); }

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ostringstream out;
  out << "path,label,rate\n";
  for (const auto& e : entries) {
    char rate[32];
    std::snprintf(rate, sizeof rate, "%.17g", e.rate);
    out << e.path << ',' << e.label << ',' << rate << '\n';
  }
  write_file(path, out.str());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "path,label,rate")
    throw InputError("manifest: missing 'path,label,rate' header in " + path.string());
  std::vector<ManifestEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw InputError("manifest line " + std::to_string(line_no) + ": expected 3 fields");
    ManifestEntry e;
    e.path = line.substr(0, c1);
    try {
      std::size_t used = 0;
      const auto label_field = line.substr(c1 + 1, c2 - c1 - 1);
      e.label = std::stoi(label_field, &used);
      if (used != label_field.size()) throw std::invalid_argument("label");
      const auto rate_field = line.substr(c2 + 1);
      e.rate = std::stod(rate_field, &used);
      if (used != rate_field.size()) throw std::invalid_argument("rate");
    } catch (const std::logic_error&) {
      throw InputError("manifest line " + std::to_string(line_no) + ": bad label or rate");
    }
    if (e.label < 0) throw InputError("manifest line " + std::to_string(line_no) + ": negative label");
    entries.push_back(std::move(e));
  }
  return entries;
}

InMemoryStreams::InMemoryStreams(std::vector<CsiStream> streams) : streams_(std::move(streams)) {
  for (const auto& s : streams_) labels_.push_back(s.true_target_count());
}

InMemoryStreams::InMemoryStreams(std::vector<CsiStream> streams, std::vector<int> labels)
    : streams_(std::move(streams)), labels_(std::move(labels)) {
  if (streams_.size() != labels_.size()) throw InputError("stream and label counts differ");
}

ManifestStreams::ManifestStreams(const std::filesystem::path& manifest)
    : base_(manifest.parent_path()), entries_(read_manifest(manifest)) {}

CsiStream ManifestStreams::load(std::size_t i) const {
  const std::filesystem::path p(entries_.at(i).path);
  return load_stream(p.is_absolute() ? p : base_ / p);
}

SyntheticStreams::SyntheticStreams(ScenarioConfig base, int k_max, int per_class, std::uint64_t seed)
    : base_(base), k_max_(k_max), per_class_(per_class), seed_(seed) {
  if (k_max < 0) throw ConfigError("synthetic set: k_max must be >= 0");
  if (per_class < 1) throw ConfigError("synthetic set: per_class must be >= 1");
  validate(base_);
}

ScenarioConfig SyntheticStreams::scenario(std::size_t i) const {
  ScenarioConfig c = base_;
  const auto cls = static_cast<std::uint64_t>(label(i));
  c.num_targets = static_cast<int>(cls);
  c.rng_seed = derive_seed(seed_, cls, i % static_cast<std::size_t>(per_class_));
  return c;
}

CsiStream SyntheticStreams::load(std::size_t i) const {
  if (i >= size()) throw InputError("synthetic set: index out of range");
  return synthesize_stream(scenario(i));
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_train_val(const StreamSet& set, double holdout,
                                                                              std::uint64_t seed) {
  if (!(holdout >= 0.0 && holdout < 1.0)) throw ConfigError("holdout fraction must lie in [0, 1)");
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < set.size(); ++i) by_label[set.label(i)].push_back(i);
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  for (auto& [label, idx] : by_label) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label), 0x5917));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
    const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * holdout));
    val.insert(val.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    train.insert(train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {train, val};
}

}  // namespace isac
