#include "absatag/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace absatag {

namespace {

constexpr char kMagic[8] = {'A', 'B', 'S', 'A', 'T', 'A', 'G', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  write_u64(out, v);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& in) {
  const std::uint64_t v = read_u64(in);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

}  // namespace

struct CheckpointCodec {
  static std::vector<Parameter*> tensors(Model& m) { return m.all_parameters(); }
  static const std::optional<FeatureExtractor>& features(const Model& m) {
    return m.features_;
  }
};

void save_checkpoint(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));

  nlohmann::json header;
  header["format_version"] = 1;
  header["config"] = nlohmann::json::parse(model.config().to_json());
  header["vocab"] = model.vocab();
  if (const FeatureExtractor* fx = model.features()) {
    header["feature_table"] = nlohmann::json::parse(fx->table().to_json());
    header["feature_include_pred"] = fx->includes_pred();
  }
  const std::string hjson = header.dump();
  write_u32(out, static_cast<std::uint32_t>(hjson.size()));
  out.write(hjson.data(), static_cast<std::streamsize>(hjson.size()));

  Model& mutable_model = const_cast<Model&>(model);  // read-only traversal
  std::vector<Parameter*> params = CheckpointCodec::tensors(mutable_model);
  write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    write_u32(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_u32(out, static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t d : p->value.shape) write_u64(out, d);
    for (double v : p->value.data) write_f64(out, v);
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);

  const std::uint32_t hlen = read_u32(in);
  std::string hjson(hlen, '\0');
  in.read(hjson.data(), hlen);
  if (!in) throw std::runtime_error("checkpoint: truncated header");
  const nlohmann::json header = nlohmann::json::parse(hjson);
  if (header.at("format_version").get<int>() != 1)
    throw std::runtime_error("unsupported checkpoint format version");

  ModelConfig config = ModelConfig::from_json(header.at("config").dump());
  std::vector<std::string> vocab =
      header.at("vocab").get<std::vector<std::string>>();

  const std::uint32_t count = read_u32(in);
  std::vector<std::pair<std::string, Tensor>> tensors;
  tensors.reserve(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t nlen = read_u32(in);
    std::string name(nlen, '\0');
    in.read(name.data(), nlen);
    const std::uint32_t rank = read_u32(in);
    std::vector<std::size_t> shape(rank);
    for (std::uint32_t d = 0; d < rank; ++d)
      shape[d] = static_cast<std::size_t>(read_u64(in));
    Tensor tensor(shape);
    for (double& v : tensor.data) v = read_f64(in);
    tensors.emplace_back(std::move(name), std::move(tensor));
  }

  auto find = [&](const std::string& name) -> Tensor& {
    for (auto& [n, t] : tensors)
      if (n == name) return t;
    throw std::runtime_error("checkpoint missing tensor: " + name);
  };

  EmbeddingTable table = EmbeddingTable::from_rows(std::move(vocab),
                                                   find("embedding"));

  std::optional<FeatureExtractor> fx;
  if (header.contains("feature_table"))
    fx = FeatureExtractor(
        FeatureTable::from_json(header.at("feature_table").dump()),
        header.value("feature_include_pred", false));

  Rng rng(0);  // initial weights are overwritten below
  Model model(config, std::move(table), rng, std::move(fx));
  for (Parameter* p : CheckpointCodec::tensors(model)) {
    Tensor& stored = find(p->name);
    if (stored.shape != p->value.shape)
      throw std::runtime_error("checkpoint tensor " + p->name + " has shape " +
                               stored.shape_str() + ", expected " +
                               p->value.shape_str());
    p->value = stored;
    p->grad = Tensor::zeros(stored.shape);
  }
  return model;
}

std::string checkpoint_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a
  char buf[65536];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash));
  return hex;
}

}  // namespace absatag
