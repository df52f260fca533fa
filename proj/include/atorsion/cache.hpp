#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "atorsion/eigensolve.hpp"

namespace atorsion {

/// Bumped whenever the discretization or solver changes the numbers it produces.
inline constexpr const char* kSolverVersion = "atorsion-eig-1";

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Content-addressed store of eigenvalue spectra, one file per key. Writes go
/// through a temporary file and a rename; all access is serialized.
class SpectrumCache {
 public:
  explicit SpectrumCache(std::filesystem::path dir);

  /// Hash of the canonical metric id, L, N_theta, N_phi and the solver version.
  static std::string key(const std::string& metric_id, int L, int n_theta, int n_phi);

  std::optional<Spectrum> load(const std::string& key) const;
  void store(const std::string& key, const Spectrum& spectrum) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
};

/// ATORSION_CACHE_DIR if set, else the configured directory, else
/// <output_dir>/.atorsion-cache.
std::filesystem::path resolve_cache_dir(const std::string& configured, const std::string& output_dir);

}  // namespace atorsion
