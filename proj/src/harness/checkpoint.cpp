#include "vtr/harness/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

namespace vtr::harness {

namespace {

constexpr char kMagic[8] = {'V', 'T', 'R', 'C', 'K', 'P', 'T', '1'};

template <typename V>
void put(std::string& buf, V v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof v);
}

class Reader {
 public:
  Reader(const std::string& buf, std::size_t end) : buf_(buf), end_(end) {}

  template <typename V>
  V get() {
    V v;
    std::memcpy(&v, take(sizeof v), sizeof v);
    return v;
  }
  const char* take(std::size_t n) {
    if (n > end_ - pos_) throw CorruptCheckpoint("checkpoint truncated");
    const char* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == end_; }

 private:
  const std::string& buf_;
  std::size_t end_, pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& header,
                     const numerics::ParameterSet<T>& params) {
  std::string buf(kMagic, 8);
  const std::string h = header.dump();
  put<std::uint64_t>(buf, h.size());
  buf += h;
  put<std::uint64_t>(buf, params.size());
  for (const auto& [name, t] : params.entries()) {
    put<std::uint32_t>(buf, std::uint32_t(name.size()));
    buf += name;
    put<std::uint32_t>(buf, std::uint32_t(t.rank()));
    for (auto d : t.shape()) put<std::uint64_t>(buf, d);
    for (auto v : t.values()) put<float>(buf, static_cast<float>(v));
  }
  put<std::uint64_t>(buf, fnv1a64(buf.data(), buf.size()));
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 8 + 8 + 8 + 8 || std::memcmp(buf.data(), kMagic, 8) != 0)
    throw CorruptCheckpoint(path.string() + ": not a checkpoint");
  const std::size_t body = buf.size() - 8;
  std::uint64_t stored;
  std::memcpy(&stored, buf.data() + body, 8);
  if (fnv1a64(buf.data(), body) != stored) throw CorruptCheckpoint(path.string() + ": checksum mismatch");

  Reader r(buf, body);
  r.take(8);
  const auto hlen = r.get<std::uint64_t>();
  Checkpoint ck;
  try {
    ck.header = nlohmann::json::parse(std::string(r.take(hlen), hlen));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpoint(path.string() + ": bad header: " + e.what());
  }
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto nlen = r.get<std::uint32_t>();
    std::string name(r.take(nlen), nlen);
    const auto rank = r.get<std::uint32_t>();
    numerics::Shape shape(rank);
    std::size_t numel = 1;
    for (auto& d : shape) {
      d = r.get<std::uint64_t>();
      numel *= d;
    }
    std::vector<float> values(numel);
    std::memcpy(values.data(), r.take(numel * sizeof(float)), numel * sizeof(float));
    ck.params.add(name, shape, std::move(values));
  }
  if (!r.done()) throw CorruptCheckpoint(path.string() + ": trailing bytes");
  return ck;
}

template void save_checkpoint<float>(const std::filesystem::path&, const nlohmann::json&,
                                     const numerics::ParameterSet<float>&);
template void save_checkpoint<double>(const std::filesystem::path&, const nlohmann::json&,
                                      const numerics::ParameterSet<double>&);

}  // namespace vtr::harness
