#include "ttlm/serialize.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "ttlm/errors.hpp"

namespace ttlm {

namespace {

constexpr char kWeightsMagic[4] = {'T', 'T', 'L', 'M'};
constexpr char kAdapterMagic[4] = {'T', 'T', 'L', 'A'};

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open '" + path + "' for writing");
    path_ = path;
  }

  void bytes(const void* data, std::size_t len) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void tensor(const std::string& name, const Tensor& t) {
    str(name);
    u8(static_cast<std::uint8_t>(t.rank()));
    for (std::int64_t i = 0; i < t.rank(); ++i) u64(static_cast<std::uint64_t>(t.dim(i)));
    for (std::int64_t i = 0; i < t.numel(); ++i) f32(t(i));
  }
  void finish() {
    out_.flush();
    if (!out_) throw IoError("write to '" + path_ + "' failed");
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open '" + path + "' for reading");
    path_ = path;
  }

  void bytes(void* data, std::size_t len) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(in_.gcount()) != len) {
      throw ParseError("unexpected end of file in '" + path_ + "'");
    }
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string str() {
    const std::uint32_t len = u32();
    if (len > (1u << 20)) throw ParseError("implausible string length in '" + path_ + "'");
    std::string s(len, '\0');
    if (len > 0) bytes(s.data(), len);
    return s;
  }
  std::pair<std::string, Tensor> tensor() {
    std::string name = str();
    const std::uint8_t rank = u8();
    if (rank == 0 || rank > 8) {
      throw ParseError("tensor '" + name + "' has unsupported rank " + std::to_string(rank));
    }
    std::vector<std::int64_t> shape(rank);
    std::int64_t numel = 1;
    for (std::uint8_t i = 0; i < rank; ++i) {
      const std::uint64_t e = u64();
      if (e == 0 || e > (1ull << 32)) {
        throw ParseError("tensor '" + name + "' has implausible extent " + std::to_string(e));
      }
      shape[i] = static_cast<std::int64_t>(e);
      numel *= shape[i];
    }
    std::vector<float> data(static_cast<std::size_t>(numel));
    for (float& v : data) v = f32();
    return {std::move(name), Tensor(std::move(shape), std::move(data))};
  }
  void check_magic(const char expect[4], const char* what) {
    char m[4];
    bytes(m, 4);
    if (std::memcmp(m, expect, 4) != 0) {
      throw DataError(std::string("'") + path_ + "' is not a " + what + " file (bad magic)");
    }
  }
  void check_version() {
    const std::uint32_t v = u32();
    if (v != kContainerVersion) {
      throw DataError("unsupported container version " + std::to_string(v) + " in '" + path_ +
                      "' (expected " + std::to_string(kContainerVersion) + ")");
    }
  }

 private:
  std::ifstream in_;
  std::string path_;
};

}  // namespace

void save_model(const Model& m, const std::string& path) {
  m.check_shapes();
  const auto tensors = named_tensors(m);
  Writer w(path);
  w.bytes(kWeightsMagic, 4);
  w.u32(kContainerVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) w.tensor(name, *tensor);
  const ModelConfig& c = m.config;
  w.u64(static_cast<std::uint64_t>(c.d_model));
  w.u64(static_cast<std::uint64_t>(c.n_layers));
  w.u64(static_cast<std::uint64_t>(c.n_heads));
  w.u64(static_cast<std::uint64_t>(c.n_kv_heads));
  w.u64(static_cast<std::uint64_t>(c.d_ff));
  w.u64(static_cast<std::uint64_t>(c.vocab_size));
  w.u64(static_cast<std::uint64_t>(c.window));
  w.f32(c.rope_base);
  w.f32(c.norm_eps);
  w.u8(static_cast<std::uint8_t>(c.block_style));
  w.u64(c.seed);
  w.finish();
}

Model load_model(const std::string& path) {
  Reader r(path);
  r.check_magic(kWeightsMagic, "weights");
  r.check_version();
  const std::uint32_t count = r.u32();
  std::map<std::string, Tensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto [name, tensor] = r.tensor();
    if (!tensors.emplace(std::move(name), std::move(tensor)).second) {
      throw ParseError("duplicate tensor in '" + path + "'");
    }
  }
  ModelConfig c;
  c.d_model = static_cast<std::int64_t>(r.u64());
  c.n_layers = static_cast<std::int64_t>(r.u64());
  c.n_heads = static_cast<std::int64_t>(r.u64());
  c.n_kv_heads = static_cast<std::int64_t>(r.u64());
  c.d_ff = static_cast<std::int64_t>(r.u64());
  c.vocab_size = static_cast<std::int64_t>(r.u64());
  c.window = static_cast<std::int64_t>(r.u64());
  c.rope_base = r.f32();
  c.norm_eps = r.f32();
  const std::uint8_t style = r.u8();
  if (style > 1) throw ParseError("unknown block style " + std::to_string(style));
  c.block_style = static_cast<BlockStyle>(style);
  c.seed = r.u64();
  c.validate();

  Model m;
  m.config = c;
  m.layers.resize(static_cast<std::size_t>(c.n_layers));
  for (auto& [name, slot] : named_tensors(m)) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw DataError("missing tensor '" + name + "' in '" + path + "'");
    *slot = std::move(it->second);
    tensors.erase(it);
  }
  if (!tensors.empty()) {
    throw DataError("unexpected tensor '" + tensors.begin()->first + "' in '" + path + "'");
  }
  m.check_shapes();
  return m;
}

void save_adapters(const LoraSet& set, const std::string& path) {
  set.config.validate();
  Writer w(path);
  w.bytes(kAdapterMagic, 4);
  w.u32(kContainerVersion);
  w.u32(static_cast<std::uint32_t>(set.adapters.size() * 2));
  for (const LoraAdapter& ad : set.adapters) {
    w.tensor(ad.target + ".A", ad.a);
    w.tensor(ad.target + ".B", ad.b);
  }
  w.u64(static_cast<std::uint64_t>(set.config.rank));
  w.f32(set.config.alpha);
  w.f32(set.config.dropout);
  w.u32(static_cast<std::uint32_t>(set.config.targets.size()));
  for (const std::string& kind : set.config.targets) w.str(kind);
  w.u64(set.config.seed);
  w.finish();
}

LoraSet load_adapters(const std::string& path) {
  Reader r(path);
  r.check_magic(kAdapterMagic, "adapter");
  r.check_version();
  const std::uint32_t count = r.u32();
  if (count % 2 != 0) throw ParseError("adapter tensor count must be even in '" + path + "'");

  LoraSet set;
  for (std::uint32_t i = 0; i < count; i += 2) {
    auto [a_name, a] = r.tensor();
    auto [b_name, b] = r.tensor();
    if (a_name.size() < 2 || a_name.substr(a_name.size() - 2) != ".A" || b_name.size() < 2 ||
        b_name.substr(b_name.size() - 2) != ".B" ||
        a_name.substr(0, a_name.size() - 2) != b_name.substr(0, b_name.size() - 2)) {
      throw ParseError("adapter tensors '" + a_name + "' / '" + b_name + "' are not an A/B pair");
    }
    LoraAdapter ad;
    ad.target = a_name.substr(0, a_name.size() - 2);
    ad.a = std::move(a);
    ad.b = std::move(b);
    if (ad.a.rank() != 2 || ad.b.rank() != 2 || ad.a.dim(0) != ad.b.dim(1)) {
      throw DataError("adapter pair '" + ad.target + "' has inconsistent ranks");
    }
    set.adapters.push_back(std::move(ad));
  }
  set.config.rank = static_cast<std::int64_t>(r.u64());
  set.config.alpha = r.f32();
  set.config.dropout = r.f32();
  const std::uint32_t kinds = r.u32();
  if (kinds > 16) throw ParseError("implausible adapter target count in '" + path + "'");
  for (std::uint32_t i = 0; i < kinds; ++i) set.config.targets.push_back(r.str());
  set.config.seed = r.u64();
  set.config.validate();
  for (const LoraAdapter& ad : set.adapters) {
    if (ad.a.dim(0) != set.config.rank) {
      throw DataError("adapter '" + ad.target + "' rank " + std::to_string(ad.a.dim(0)) +
                      " disagrees with config rank " + std::to_string(set.config.rank));
    }
  }
  return set;
}

}  // namespace ttlm
