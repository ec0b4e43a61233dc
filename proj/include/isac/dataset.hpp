#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "isac/csi.hpp"

namespace isac {

/// "CSI1" container: magic, u32 packets, u32 subcarriers, f64 rate,
/// u64 seed, u32 true count, then packets*subcarriers (re, im) f64 pairs,
/// row-major, little-endian.
std::string encode_stream(const CsiStream& stream);
CsiStream decode_stream(std::string_view bytes);
void save_stream(const CsiStream& stream, const std::filesystem::path& path);
CsiStream load_stream(const std::filesystem::path& path);

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory unless absolute
  int label = 0;
  double rate = 0.0;

  bool operator==(const ManifestEntry&) const = default;
};

/// CSV with header "path,label,rate".
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Indexed collection of labelled streams, loaded on demand so large
/// datasets never sit in memory at once.
class StreamSet {
 public:
  virtual ~StreamSet() = default;
  virtual std::size_t size() const = 0;
  virtual int label(std::size_t i) const = 0;
  virtual CsiStream load(std::size_t i) const = 0;
};

class InMemoryStreams final : public StreamSet {
 public:
  InMemoryStreams() = default;
  /// Labels default to each stream's true target count.
  explicit InMemoryStreams(std::vector<CsiStream> streams);
  InMemoryStreams(std::vector<CsiStream> streams, std::vector<int> labels);

  std::size_t size() const override { return streams_.size(); }
  int label(std::size_t i) const override { return labels_.at(i); }
  CsiStream load(std::size_t i) const override { return streams_.at(i); }

 private:
  std::vector<CsiStream> streams_;
  std::vector<int> labels_;
};

class ManifestStreams final : public StreamSet {
 public:
  explicit ManifestStreams(const std::filesystem::path& manifest);

  std::size_t size() const override { return entries_.size(); }
  int label(std::size_t i) const override { return entries_.at(i).label; }
  CsiStream load(std::size_t i) const override;
  const std::vector<ManifestEntry>& entries() const { return entries_; }

 private:
  std::filesystem::path base_;
  std::vector<ManifestEntry> entries_;
};

/// Synthetic benchmark: `per_class` scenes for each class 0..k_max,
/// ordered class-major. Stream (c, i) is seeded from (seed, c, i).
class SyntheticStreams final : public StreamSet {
 public:
  SyntheticStreams(ScenarioConfig base, int k_max, int per_class, std::uint64_t seed);

  std::size_t size() const override { return static_cast<std::size_t>((k_max_ + 1) * per_class_); }
  int label(std::size_t i) const override { return static_cast<int>(i) / per_class_; }
  CsiStream load(std::size_t i) const override;
  ScenarioConfig scenario(std::size_t i) const;

 private:
  ScenarioConfig base_;
  int k_max_;
  int per_class_;
  std::uint64_t seed_;
};

/// A view over selected indices of another set (which must outlive it).
class SubsetStreams final : public StreamSet {
 public:
  SubsetStreams(const StreamSet& parent, std::vector<std::size_t> indices)
      : parent_(parent), indices_(std::move(indices)) {}

  std::size_t size() const override { return indices_.size(); }
  int label(std::size_t i) const override { return parent_.label(indices_.at(i)); }
  CsiStream load(std::size_t i) const override { return parent_.load(indices_.at(i)); }

 private:
  const StreamSet& parent_;
  std::vector<std::size_t> indices_;
};

/// Stratified split: within each label, a seeded shuffle sends the first
/// round(count * holdout) indices to validation. Returns (train, validation),
/// each in ascending index order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_train_val(const StreamSet& set, double holdout,
                                                                              std::uint64_t seed);

}  // namespace isac
