#include <set>

#include "isac/binary_io.hpp"
#include "isac/error.hpp"
#include "isac/framework.hpp"

namespace isac {

// Layout: "ISMB", u32 version, then four sections in fixed order, each a
// 4-byte tag + u64 payload length: REGI, MODL, TMPL, META. Maps are written
// in key order and doubles as raw IEEE-754 bits, so equal bundles always
// encode to equal bytes.

namespace {

constexpr std::string_view kMagic = "ISMB";

void put_feature(ByteWriter& w, const FeatureVector& v) {
  w.u8(static_cast<std::uint8_t>(v.kind));
  w.f64(v.source_rate);
  w.f64s(v.values);
}

FeatureKind get_feature_kind(ByteReader& r) {
  const auto k = r.u8();
  if (k > static_cast<std::uint8_t>(FeatureKind::AmplitudeStats)) throw FormatError("bundle: bad feature kind");
  return static_cast<FeatureKind>(k);
}

FeatureVector get_feature(ByteReader& r) {
  FeatureVector v;
  v.kind = get_feature_kind(r);
  v.source_rate = r.f64();
  v.values = r.f64s();
  return v;
}

void put_ints(ByteWriter& w, const std::vector<int>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (int x : v) w.i32(x);
}

std::vector<int> get_ints(ByteReader& r) {
  const auto n = r.u32();
  if (n > r.remaining() / 4) throw FormatError("truncated data");
  std::vector<int> v(n);
  for (auto& x : v) x = r.i32();
  return v;
}

void put_registry(ByteWriter& w, const Registry& registry) {
  w.u32(static_cast<std::uint32_t>(registry.size()));
  for (const auto& e : registry) {
    w.str(e.id);
    w.u8(static_cast<std::uint8_t>(e.feature_kind));
    w.u8(static_cast<std::uint8_t>(e.classifier_kind));
    w.f64(e.required_rate);
    w.i32(e.knn.k);
    w.i32(e.svm.epochs);
    w.f64(e.svm.step);
    w.u8(e.svm.decay ? 1 : 0);
    w.f64(e.svm.l2);
    w.i32(e.forest.num_trees);
    w.i32(e.forest.max_depth);
    w.u8(e.forest.bootstrap ? 1 : 0);
  }
}

void put_model(ByteWriter& w, const TrainedModel& model) {
  w.u8(static_cast<std::uint8_t>(model.index()));
  std::visit(
      [&w](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        w.u8(static_cast<std::uint8_t>(m.kind));
        w.u64(m.dim);
        w.i32(m.num_classes);
        if constexpr (std::is_same_v<T, KnnModel>) {
          w.i32(m.k);
          w.f64s(m.points);
          put_ints(w, m.labels);
        } else if constexpr (std::is_same_v<T, LinearSvmModel>) {
          w.i32(m.params.epochs);
          w.f64(m.params.step);
          w.u8(m.params.decay ? 1 : 0);
          w.f64(m.params.l2);
          w.f64s(m.mean);
          w.f64s(m.scale);
          w.f64s(m.weights);
          w.f64s(m.bias);
        } else {
          w.i32(m.params.num_trees);
          w.i32(m.params.max_depth);
          w.u8(m.params.bootstrap ? 1 : 0);
          w.u64(m.seed);
          w.u32(static_cast<std::uint32_t>(m.trees.size()));
          for (const auto& tree : m.trees) {
            w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
            for (const auto& n : tree.nodes) {
              w.i32(n.feature);
              w.f64(n.threshold);
              w.i32(n.left);
              w.i32(n.right);
              w.f64s(n.leaf_probs);
            }
          }
        }
      },
      model);
}

template <typename M>
void get_model_header(ByteReader& r, M& m) {
  m.kind = get_feature_kind(r);
  m.dim = r.u64();
  m.num_classes = r.i32();
  if (m.dim == 0 || m.num_classes < 1) throw FormatError("bundle: bad model dimensions");
}

void check_size(std::size_t actual, std::size_t expected, const char* what) {
  if (actual != expected) throw FormatError(std::string("bundle: inconsistent ") + what);
}

TrainedModel get_model(ByteReader& r) {
  const auto type = r.u8();
  const auto classes = [](const auto& m) { return static_cast<std::size_t>(m.num_classes); };
  switch (type) {
    case 0: {
      KnnModel m;
      get_model_header(r, m);
      m.k = r.i32();
      m.points = r.f64s();
      m.labels = get_ints(r);
      check_size(m.points.size(), m.labels.size() * m.dim, "knn points");
      if (m.k < 1 || static_cast<std::size_t>(m.k) > m.labels.size()) throw FormatError("bundle: bad knn k");
      for (int l : m.labels)
        if (l < 0 || l >= m.num_classes) throw FormatError("bundle: knn label out of range");
      return m;
    }
    case 1: {
      LinearSvmModel m;
      get_model_header(r, m);
      m.params.epochs = r.i32();
      m.params.step = r.f64();
      m.params.decay = r.u8() != 0;
      m.params.l2 = r.f64();
      m.mean = r.f64s();
      m.scale = r.f64s();
      m.weights = r.f64s();
      m.bias = r.f64s();
      check_size(m.mean.size(), m.dim, "svm mean");
      check_size(m.scale.size(), m.dim, "svm scale");
      check_size(m.weights.size(), m.dim * classes(m), "svm weights");
      check_size(m.bias.size(), classes(m), "svm bias");
      return m;
    }
    case 2: {
      ForestModel m;
      get_model_header(r, m);
      m.params.num_trees = r.i32();
      m.params.max_depth = r.i32();
      m.params.bootstrap = r.u8() != 0;
      m.seed = r.u64();
      const auto n_trees = r.u32();
      if (n_trees == 0) throw FormatError("bundle: forest without trees");
      for (std::uint32_t t = 0; t < n_trees; ++t) {
        DecisionTree tree;
        const auto n_nodes = r.u32();
        if (n_nodes == 0) throw FormatError("bundle: empty tree");
        for (std::uint32_t i = 0; i < n_nodes; ++i) {
          TreeNode n;
          n.feature = r.i32();
          n.threshold = r.f64();
          n.left = r.i32();
          n.right = r.i32();
          n.leaf_probs = r.f64s();
          if (n.feature >= 0) {
            if (static_cast<std::size_t>(n.feature) >= m.dim) throw FormatError("bundle: split feature out of range");
            // Children are always stored after their parent.
            if (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) ||
                n.left >= static_cast<int>(n_nodes) || n.right >= static_cast<int>(n_nodes))
              throw FormatError("bundle: bad tree links");
          } else {
            check_size(n.leaf_probs.size(), classes(m), "leaf distribution");
          }
          tree.nodes.push_back(std::move(n));
        }
        m.trees.push_back(std::move(tree));
      }
      return m;
    }
    default:
      throw FormatError("bundle: unknown model type");
  }
}

void section(ByteWriter& out, std::string_view tag, const ByteWriter& body) {
  out.tag(tag);
  out.u64(body.data().size());
  out.bytes(body.data());
}

ByteReader open_section(ByteReader& r, std::string_view tag) {
  if (r.tag() != tag) throw FormatError("bundle: expected section " + std::string(tag));
  const auto len = r.u64();
  if (len > r.remaining()) throw FormatError("truncated data");
  return ByteReader(r.take(static_cast<std::size_t>(len)));
}

void expect_end(const ByteReader& r, std::string_view tag) {
  if (!r.done()) throw FormatError("bundle: trailing bytes in section " + std::string(tag));
}

}  // namespace

std::string encode_bundle(const TrainedBundle& bundle) {
  ByteWriter out;
  out.tag(kMagic);
  out.u32(TrainedBundle::kFormatVersion);

  ByteWriter reg;
  put_registry(reg, bundle.registry);
  section(out, "REGI", reg);

  ByteWriter models;
  models.u32(static_cast<std::uint32_t>(bundle.models.size()));
  for (const auto& [id, model] : bundle.models) {
    models.str(id);
    put_model(models, model);
  }
  section(out, "MODL", models);

  ByteWriter tmpl;
  tmpl.u32(static_cast<std::uint32_t>(bundle.templates.size()));
  for (const auto& [id, entry] : bundle.templates) {
    tmpl.str(id);
    tmpl.u32(static_cast<std::uint32_t>(entry.centroids.size()));
    for (const auto& [cls, centroid] : entry.centroids) {
      tmpl.i32(cls);
      put_feature(tmpl, centroid);
    }
    tmpl.u32(static_cast<std::uint32_t>(entry.reference_scores.size()));
    for (double v : entry.reference_scores) tmpl.f64(v);
  }
  section(out, "TMPL", tmpl);

  ByteWriter meta;
  const auto& m = bundle.meta;
  meta.u64(m.seed);
  meta.u64(m.dataset_fingerprint);
  meta.i32(m.k_max);
  meta.i32(m.doppler.num_bins);
  meta.f64(m.doppler.max_freq_hz);
  meta.i32(m.select_k);
  meta.str(to_string(m.gate_scoring));
  meta.u32(static_cast<std::uint32_t>(m.validation_accuracy.size()));
  for (const auto& [id, acc] : m.validation_accuracy) {
    meta.str(id);
    meta.f64(acc);
  }
  section(out, "META", meta);
  return out.take();
}

TrainedBundle decode_bundle(std::string_view bytes) {
  ByteReader r(bytes);
  if (bytes.size() < 4 || r.tag() != kMagic) throw FormatError("bundle: bad magic (expected ISMB)");
  const auto version = r.u32();
  if (version != TrainedBundle::kFormatVersion)
    throw FormatError("bundle: format version " + std::to_string(version) + " not supported (expected " +
                      std::to_string(TrainedBundle::kFormatVersion) + ")");

  TrainedBundle b;
  {
    auto s = open_section(r, "REGI");
    const auto n = s.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      ExpertSpec e;
      e.id = s.str();
      e.feature_kind = get_feature_kind(s);
      const auto ck = s.u8();
      if (ck > static_cast<std::uint8_t>(ClassifierKind::Forest)) throw FormatError("bundle: bad classifier kind");
      e.classifier_kind = static_cast<ClassifierKind>(ck);
      e.required_rate = s.f64();
      e.knn.k = s.i32();
      e.svm.epochs = s.i32();
      e.svm.step = s.f64();
      e.svm.decay = s.u8() != 0;
      e.svm.l2 = s.f64();
      e.forest.num_trees = s.i32();
      e.forest.max_depth = s.i32();
      e.forest.bootstrap = s.u8() != 0;
      b.registry.push_back(std::move(e));
    }
    expect_end(s, "REGI");
  }
  {
    auto s = open_section(r, "MODL");
    const auto n = s.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      auto id = s.str();
      b.models.emplace(std::move(id), get_model(s));
    }
    expect_end(s, "MODL");
  }
  {
    auto s = open_section(r, "TMPL");
    const auto n = s.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      auto& entry = b.templates[s.str()];
      const auto classes = s.u32();
      for (std::uint32_t c = 0; c < classes; ++c) {
        const int cls = s.i32();
        entry.centroids[cls] = get_feature(s);
      }
      const auto refs = s.u32();
      for (std::uint32_t j = 0; j < refs; ++j) entry.reference_scores.push_back(s.f64());
      if (!std::is_sorted(entry.reference_scores.begin(), entry.reference_scores.end()))
        throw FormatError("bundle: reference scores are not sorted");
    }
    expect_end(s, "TMPL");
  }
  {
    auto s = open_section(r, "META");
    auto& m = b.meta;
    m.seed = s.u64();
    m.dataset_fingerprint = s.u64();
    m.k_max = s.i32();
    m.doppler.num_bins = s.i32();
    m.doppler.max_freq_hz = s.f64();
    m.select_k = s.i32();
    try {
      m.gate_scoring = parse_gate_scoring(s.str());
    } catch (const ConfigError& e) {
      throw FormatError(std::string("bundle: ") + e.what());
    }
    const auto n = s.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      auto id = s.str();
      m.validation_accuracy[id] = s.f64();
    }
    expect_end(s, "META");
  }
  if (!r.done()) throw FormatError("bundle: trailing bytes after META");

  try {
    validate_registry(b.registry);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("bundle: ") + e.what());
  }
  std::set<std::string> ids;
  for (const auto& e : b.registry) ids.insert(e.id);
  if (b.models.size() != ids.size() || b.templates.size() != ids.size())
    throw FormatError("bundle: registry, models and templates disagree");
  for (const auto& id : ids) {
    if (!b.models.contains(id) || !b.templates.contains(id))
      throw FormatError("bundle: expert '" + id + "' lacks a model or template entry");
    const auto& spec = b.expert(id);
    const auto& model = b.models.at(id);
    if (model_feature_kind(model) != spec.feature_kind || model_classifier_kind(model) != spec.classifier_kind)
      throw FormatError("bundle: model for '" + id + "' does not match its registry entry");
    if (std::visit([](const auto& mm) { return mm.num_classes; }, model) != b.num_classes())
      throw FormatError("bundle: model for '" + id + "' has the wrong class count");
    for (const auto& [cls, centroid] : b.templates.at(id).centroids)
      if (cls < 0 || cls > b.meta.k_max || centroid.kind != spec.feature_kind)
        throw FormatError("bundle: template for '" + id + "' does not match its expert");
  }
  if (b.meta.k_max < 0 || b.meta.doppler.num_bins < 2 || b.meta.select_k < 1)
    throw FormatError("bundle: bad metadata");
  return b;
}

void save_bundle(const TrainedBundle& bundle, const std::filesystem::path& path) {
  write_file(path, encode_bundle(bundle));
}

TrainedBundle load_bundle(const std::filesystem::path& path) { return decode_bundle(read_file(path)); }

}  // namespace isac
