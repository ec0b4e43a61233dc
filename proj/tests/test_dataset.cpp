#include <filesystem>
#include <fstream>
#include <cstring>
#include <map>
#include <set>

#include "doctest.h"
#include "isac/binary_io.hpp"
#include "isac/dataset.hpp"
#include "isac/error.hpp"

using namespace isac;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CsiStream sample_stream(int targets = 2, std::uint64_t seed = 5) {
  ScenarioConfig c;
  c.num_targets = targets;
  c.duration = 0.2;
  c.num_subcarriers = 4;
  c.rng_seed = seed;
  return synthesize_stream(c);
}

}  // namespace

TEST_CASE("CSI1 round-trip is lossless and canonical") {
  const auto s = sample_stream();
  const auto bytes = encode_stream(s);
  CHECK(bytes.substr(0, 4) == "CSI1");
  CHECK(bytes.size() == 32 + s.packets() * s.subcarriers() * 16);
  const auto back = decode_stream(bytes);
  CHECK(back == s);
  CHECK(encode_stream(back) == bytes);
}

TEST_CASE("CSI1 rejects malformed input") {
  auto bytes = encode_stream(sample_stream());
  CHECK_THROWS_AS(decode_stream(bytes.substr(0, 10)), FormatError);
  CHECK_THROWS_AS(decode_stream(bytes.substr(0, bytes.size() - 1)), FormatError);
  CHECK_THROWS_AS(decode_stream(bytes + "x"), FormatError);
  auto magic = bytes;
  magic[3] = '2';
  CHECK_THROWS_AS(decode_stream(magic), FormatError);
  auto rate = bytes;
  const double zero = 0.0;
  std::memcpy(rate.data() + 12, &zero, 8);
  CHECK_THROWS_AS(decode_stream(rate), FormatError);
}

TEST_CASE("stream files") {
  const auto dir = scratch("isac_dataset_files");
  const auto s = sample_stream();
  save_stream(s, dir / "a.csi");
  CHECK(load_stream(dir / "a.csi") == s);
  CHECK_THROWS_AS(load_stream(dir / "missing.csi"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("manifest round-trip and parsing errors") {
  const auto dir = scratch("isac_dataset_manifest");
  const std::vector<ManifestEntry> entries{{"streams/a.csi", 0, 1000.0}, {"b.csi", 3, 1000.0 / 3.0}};
  write_manifest(dir / "m.csv", entries);
  CHECK(read_manifest(dir / "m.csv") == entries);

  auto write = [&](const std::string& text) {
    std::ofstream(dir / "bad.csv") << text;
    return dir / "bad.csv";
  };
  CHECK_THROWS_AS(read_manifest(write("file,label,rate\n")), InputError);
  CHECK_THROWS_AS(read_manifest(write("path,label,rate\na.csi,1\n")), InputError);
  CHECK_THROWS_AS(read_manifest(write("path,label,rate\na.csi,x,100\n")), InputError);
  CHECK_THROWS_AS(read_manifest(write("path,label,rate\na.csi,-1,100\n")), InputError);
  CHECK_THROWS_AS(read_manifest(write("path,label,rate\na.csi,1,100hz\n")), InputError);
  CHECK(read_manifest(write("path,label,rate\n\na.csi,1,100\n")).size() == 1);
  CHECK_THROWS_AS(read_manifest(dir / "none.csv"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("manifest streams resolve relative paths") {
  const auto dir = scratch("isac_dataset_set");
  fs::create_directories(dir / "streams");
  const auto a = sample_stream(1, 1);
  const auto b = sample_stream(3, 2);
  save_stream(a, dir / "streams" / "a.csi");
  save_stream(b, dir / "b.csi");
  write_manifest(dir / "manifest.csv", {{"streams/a.csi", 1, 1000.0}, {(dir / "b.csi").string(), 3, 1000.0}});
  ManifestStreams set(dir / "manifest.csv");
  REQUIRE(set.size() == 2);
  CHECK(set.label(1) == 3);
  CHECK(set.load(0) == a);
  CHECK(set.load(1) == b);
  fs::remove_all(dir);
}

TEST_CASE("in-memory and subset views") {
  InMemoryStreams mem({sample_stream(1, 1), sample_stream(2, 2), sample_stream(0, 3)});
  CHECK(mem.size() == 3);
  CHECK(mem.label(1) == 2);
  SubsetStreams sub(mem, {2, 0});
  CHECK(sub.size() == 2);
  CHECK(sub.label(0) == 0);
  CHECK(sub.load(1) == mem.load(0));
  CHECK_THROWS_AS(InMemoryStreams({sample_stream()}, {1, 2}), InputError);
}

TEST_CASE("synthetic streams are class-major and seeded per (class, index)") {
  ScenarioConfig base;
  base.duration = 0.2;
  SyntheticStreams set(base, 3, 4, 99);
  CHECK(set.size() == 16);
  for (std::size_t i = 0; i < set.size(); ++i) CHECK(set.label(i) == static_cast<int>(i / 4));
  const auto s = set.load(9);
  CHECK(s.true_target_count() == 2);
  CHECK(s == set.load(9));
  CHECK_FALSE(s == set.load(10));
  CHECK(SyntheticStreams(base, 3, 4, 99).load(5) == set.load(5));
  CHECK_THROWS_AS(set.load(16), InputError);
  CHECK_THROWS_AS(SyntheticStreams(base, -1, 4, 1), ConfigError);
  CHECK_THROWS_AS(SyntheticStreams(base, 3, 0, 1), ConfigError);
}

TEST_CASE("stratified split") {
  ScenarioConfig base;
  base.duration = 0.1;
  SyntheticStreams set(base, 4, 8, 1);
  const auto [train, val] = split_train_val(set, 0.25, 7);
  CHECK(train.size() == 30);
  CHECK(val.size() == 10);
  std::set<std::size_t> all(train.begin(), train.end());
  for (auto i : val) CHECK(all.insert(i).second);
  CHECK(all.size() == set.size());
  std::map<int, int> per_label;
  for (auto i : val) ++per_label[set.label(i)];
  for (int c = 0; c <= 4; ++c) CHECK(per_label[c] == 2);
  CHECK(std::is_sorted(train.begin(), train.end()));
  CHECK(split_train_val(set, 0.25, 7) == std::make_pair(train, val));
  CHECK_FALSE(split_train_val(set, 0.25, 8).second == val);
  CHECK_THROWS_AS(split_train_val(set, 1.0, 7), ConfigError);
  CHECK_THROWS_AS(split_train_val(set, -0.1, 7), ConfigError);
}
