#include "atorsion/cache.hpp"

#include <openssl/evp.h>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

#include "atorsion/errors.hpp"

namespace atorsion {

namespace {

constexpr char kMagic[4] = {'A', 'T', 'S', 'P'};
constexpr std::uint32_t kFormat = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error("SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

SpectrumCache::SpectrumCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error("cannot create cache directory '" + dir_.string() + "': " + ec.message());
}

std::string SpectrumCache::key(const std::string& metric_id, int L, int n_theta, int n_phi) {
  std::ostringstream canon;
  canon << "solver=" << kSolverVersion << "\nmetric=" << metric_id << "\nL=" << L << "\nn_theta=" << n_theta
        << "\nn_phi=" << n_phi << "\n";
  return sha256_hex(canon.str());
}

std::filesystem::path SpectrumCache::path_for(const std::string& key) const { return dir_ / (key + ".spec"); }

std::optional<Spectrum> SpectrumCache::load(const std::string& key) const {
  std::lock_guard lock(mutex_);
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  std::uint32_t format = 0, id_len = 0;
  std::int32_t kernel = 0, L = 0;
  std::uint64_t n = 0;
  if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4)) return std::nullopt;
  if (!get(in, format) || format != kFormat) return std::nullopt;
  if (!get(in, kernel) || !get(in, L) || !get(in, id_len) || id_len > 4096) return std::nullopt;
  std::string id(id_len, '\0');
  if (!in.read(id.data(), id_len) || !get(in, n) || n > (1u << 24)) return std::nullopt;
  Spectrum s;
  s.eigenvalues.resize(static_cast<Eigen::Index>(n));
  if (!in.read(reinterpret_cast<char*>(s.eigenvalues.data()), static_cast<std::streamsize>(n * sizeof(double))))
    return std::nullopt;
  s.kernel_dim = kernel;
  s.basis_L = L;
  s.metric_id = std::move(id);
  return s;
}

void SpectrumCache::store(const std::string& key, const Spectrum& spectrum) const {
  std::lock_guard lock(mutex_);
  const auto final_path = path_for(key);
  auto tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache file '" + tmp.string() + "'");
    out.write(kMagic, 4);
    put(out, kFormat);
    put(out, static_cast<std::int32_t>(spectrum.kernel_dim));
    put(out, static_cast<std::int32_t>(spectrum.basis_L));
    put(out, static_cast<std::uint32_t>(spectrum.metric_id.size()));
    out.write(spectrum.metric_id.data(), static_cast<std::streamsize>(spectrum.metric_id.size()));
    put(out, static_cast<std::uint64_t>(spectrum.eigenvalues.size()));
    out.write(reinterpret_cast<const char*>(spectrum.eigenvalues.data()),
              static_cast<std::streamsize>(spectrum.eigenvalues.size() * sizeof(double)));
    if (!out) throw Error("short write to cache file '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) throw Error("cannot move cache file into place: " + ec.message());
}

std::filesystem::path resolve_cache_dir(const std::string& configured, const std::string& output_dir) {
  if (const char* env = std::getenv("ATORSION_CACHE_DIR"); env && *env) return env;
  if (!configured.empty()) return configured;
  return std::filesystem::path(output_dir) / ".atorsion-cache";
}

}  // namespace atorsion
