#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dllab::io {

enum class SystemId : std::uint32_t {
  sburgers = 1,
  sdarcy = 2,
  ks = 3,
  kolmogorov = 4,
  synthetic = 5,
  ensemble = 6,
};

std::string system_name(SystemId id);
SystemId parse_system(const std::string& name);

/// pairs: outputs hold `per_input` realizations of the target for each input.
/// trajectories: outputs hold `per_input` consecutive states after each input.
enum class Layout : std::uint32_t { pairs = 1, trajectories = 2 };

/// Single-channel Gaussian normalization, computed on the training split.
struct Normalization {
  double input_mean = 0.0;
  double input_std = 1.0;
  double output_mean = 0.0;
  double output_std = 1.0;
};

/// In-memory form of a DLLD file.
///
/// Layout on disk (little-endian):
///   "DLLD" | version u32 | system u32 | dtype u32 (8 = float64) | layout u32
///   | ndim u32 | sizes u64[ndim] | lengths f64[ndim] | config digest u64
///   | count u64 | per_input u64 | channels u32 (1)
///   | input mean, input std, output mean, output std f64
///   | meta length u32 | meta bytes | inputs f64[count*P]
///   | outputs f64[count*per_input*P]
struct Dataset {
  SystemId system = SystemId::synthetic;
  Layout layout = Layout::pairs;
  std::vector<std::size_t> grid;
  std::vector<double> lengths;
  std::uint64_t config_digest = 0;
  Normalization norm;
  std::string meta;
  std::size_t count = 0;
  std::size_t per_input = 1;
  std::vector<double> inputs;
  std::vector<double> outputs;

  std::size_t points() const;
  std::vector<int> grid_int() const;
  std::span<const double> input(std::size_t i) const;
  std::span<const double> output(std::size_t i, std::size_t j) const;
  std::span<double> input(std::size_t i);
  std::span<double> output(std::size_t i, std::size_t j);

  /// Throws UsageError if array lengths disagree with the header fields.
  void validate() const;
};

inline constexpr std::uint32_t kDatasetVersion = 1;

std::vector<std::byte> serialize(const Dataset& d);
Dataset deserialize(std::span<const std::byte> bytes);

void write_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

/// Digest of the serialized bytes; identifies a dataset in downstream artifacts.
std::uint64_t dataset_digest(const Dataset& d);

/// Mean/std over the inputs and outputs of `train`. For trajectory data the
/// input and output statistics are pooled so states share one scaling.
Normalization compute_normalization(const Dataset& train);

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);

/// Little-endian byte writer/reader shared by the binary formats.
class ByteWriter {
 public:
  template <class T>
  void put(T value) {
    const auto* raw = reinterpret_cast<const std::byte*>(&value);
    bytes_.insert(bytes_.end(), raw, raw + sizeof(T));
  }
  void put_bytes(std::span<const std::byte> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
  void put_string(const std::string& s);
  void put_doubles(std::span<const double> v);
  std::vector<std::byte>& bytes() { return bytes_; }

 private:
  std::vector<std::byte> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}
  template <class T>
  T get() {
    T value;
    take(&value, sizeof(T));
    return value;
  }
  std::string get_string();
  std::vector<double> get_doubles(std::size_t n);
  void take(void* out, std::size_t n);
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace dllab::io
