#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dllab::io {

enum class ModelKind : std::uint32_t { encoder = 1, dll = 2, fno = 3 };

std::string model_kind_name(ModelKind kind);

/// In-memory form of a DLLM file.
///
/// Layout on disk (little-endian):
///   "DLLM" | version u32 | kind u32 | scalar bytes u32 (4 or 8)
///   | architecture digest u64 | config digest u64 | dataset digest u64
///   | upstream digest u64 | arch count u32 | arch i64[]
///   | extra count u64 | extra f64[] | meta string
///   | parameter count u32 | per parameter: name, rows u64, cols u64,
///     raw values, EMA values (scalar-sized)
struct Checkpoint {
  struct Blob {
    std::string name;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::vector<double> raw;
    std::vector<double> ema;
  };

  ModelKind kind = ModelKind::encoder;
  std::uint32_t scalar_bytes = 8;
  /// Integer architecture fields followed by the grid sizes.
  std::vector<std::int64_t> arch;
  std::uint64_t config_digest = 0;
  std::uint64_t dataset_digest = 0;
  /// Digest of the checkpoint this one builds on (the encoder, for a DLL).
  std::uint64_t upstream_digest = 0;
  /// Non-parameter state, e.g. latent standardization for a DLL.
  std::vector<double> extra;
  std::string meta;
  std::vector<Blob> params;

  /// Hash of kind, precision, arch fields and parameter names and shapes.
  std::uint64_t architecture_digest() const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::byte> serialize(const Checkpoint& c);
Checkpoint deserialize_checkpoint(std::span<const std::byte> bytes);

void write_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);
std::uint64_t checkpoint_digest(const Checkpoint& c);

}  // namespace dllab::io
