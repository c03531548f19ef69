#include "mrgnn/feature_cache.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "byte_io.hpp"
#include "mrgnn/errors.hpp"

namespace mrgnn {

namespace {

constexpr char kMagic[8] = {'M', 'R', 'F', 'C', '0', '0', '0', '1'};

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

FeatureCache::FeatureCache(std::string directory, const FeaturizerConfig& config)
    : dir_(std::move(directory)), fingerprint_(config.fingerprint()) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory " + dir_ + ": " + ec.message());
}

std::string FeatureCache::entry_path(const std::string& smiles) const {
  std::uint64_t h = fnv1a64(fingerprint_ + '\n' + smiles);
  std::ostringstream name;
  name << std::hex;
  for (int i = 15; i >= 0; --i) name << ((h >> (4 * i)) & 0xf);
  return dir_ + "/" + name.str() + ".feat";
}

std::optional<Tensor> FeatureCache::lookup(const std::string& smiles) {
  std::string path = entry_path(smiles);
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    ++misses_;
    return std::nullopt;
  }
  std::ostringstream buf;
  buf << file.rdbuf();
  std::string bytes = buf.str();

  try {
    if (bytes.size() < sizeof(kMagic) ||
        bytes.compare(0, sizeof(kMagic), kMagic, sizeof(kMagic)) != 0) {
      throw DataError("bad magic");
    }
    std::string body = bytes.substr(sizeof(kMagic));
    detail::ByteCursor cur(body, "cache entry");
    std::string stored_smiles = cur.str(cur.u64("key length"), "key");
    std::string stored_fingerprint = cur.str(cur.u64("config length"), "config");
    if (stored_smiles != smiles || stored_fingerprint != fingerprint_) {
      // Address collision with a different key; not corruption, plain miss.
      ++misses_;
      return std::nullopt;
    }
    auto rows = static_cast<std::int64_t>(cur.u64("rows"));
    auto cols = static_cast<std::int64_t>(cur.u64("cols"));
    if (rows <= 0 || cols <= 0 || rows > (1 << 24) || cols > (1 << 24)) {
      throw DataError("implausible shape");
    }
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(rows * cols));
    for (std::int64_t i = 0; i < rows * cols; ++i) data.push_back(cur.f64("features"));
    if (!cur.exhausted()) throw DataError("trailing bytes");
    ++hits_;
    return Tensor(static_cast<int>(rows), static_cast<int>(cols), std::move(data));
  } catch (const DataError& e) {
    warnings_.push_back("rebuilding corrupt cache entry " + path + ": " + e.what());
    ++misses_;
    return std::nullopt;
  }
}

void FeatureCache::store(const std::string& smiles, const Tensor& features) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  detail::append_u64(out, smiles.size());
  out += smiles;
  detail::append_u64(out, fingerprint_.size());
  out += fingerprint_;
  detail::append_u64(out, static_cast<std::uint64_t>(features.rows()));
  detail::append_u64(out, static_cast<std::uint64_t>(features.cols()));
  for (double v : features.values()) detail::append_f64(out, v);

  std::string path = entry_path(smiles);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  file.flush();
  if (!file) throw IoError("write failed for " + path);
}

}  // namespace mrgnn
