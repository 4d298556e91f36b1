#include "dllab/io/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "dllab/core/digest.hpp"
#include "dllab/core/error.hpp"

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace dllab::io {

namespace {

constexpr char kMagic[4] = {'D', 'L', 'L', 'D'};
constexpr std::uint32_t kFloat64 = 8;

}  // namespace

std::string system_name(SystemId id) {
  switch (id) {
    case SystemId::sburgers: return "sburgers";
    case SystemId::sdarcy: return "sdarcy";
    case SystemId::ks: return "ks";
    case SystemId::kolmogorov: return "kolmogorov";
    case SystemId::synthetic: return "synthetic";
    case SystemId::ensemble: return "ensemble";
  }
  throw UsageError("unknown system id");
}

SystemId parse_system(const std::string& name) {
  for (auto id : {SystemId::sburgers, SystemId::sdarcy, SystemId::ks, SystemId::kolmogorov, SystemId::synthetic,
                  SystemId::ensemble}) {
    if (system_name(id) == name) return id;
  }
  throw ConfigError("unknown system '" + name + "'");
}

std::size_t Dataset::points() const {
  std::size_t p = 1;
  for (auto n : grid) p *= n;
  return p;
}

std::vector<int> Dataset::grid_int() const { return std::vector<int>(grid.begin(), grid.end()); }

std::span<const double> Dataset::input(std::size_t i) const {
  return std::span<const double>(inputs).subspan(i * points(), points());
}

std::span<const double> Dataset::output(std::size_t i, std::size_t j) const {
  return std::span<const double>(outputs).subspan((i * per_input + j) * points(), points());
}

std::span<double> Dataset::input(std::size_t i) { return std::span<double>(inputs).subspan(i * points(), points()); }

std::span<double> Dataset::output(std::size_t i, std::size_t j) {
  return std::span<double>(outputs).subspan((i * per_input + j) * points(), points());
}

void Dataset::validate() const {
  if (grid.empty() || grid.size() != lengths.size()) throw UsageError("dataset grid metadata is inconsistent");
  if (inputs.size() != count * points()) throw UsageError("dataset input array has the wrong length");
  if (outputs.size() != count * per_input * points()) throw UsageError("dataset output array has the wrong length");
}

void ByteWriter::put_string(const std::string& s) {
  put(static_cast<std::uint32_t>(s.size()));
  put_bytes(std::as_bytes(std::span(s.data(), s.size())));
}

void ByteWriter::put_doubles(std::span<const double> v) { put_bytes(std::as_bytes(v)); }

void ByteReader::take(void* out, std::size_t n) {
  if (pos_ + n > bytes_.size()) throw IoError("unexpected end of file");
  std::memcpy(out, bytes_.data() + pos_, n);
  pos_ += n;
}

std::string ByteReader::get_string() {
  const auto n = get<std::uint32_t>();
  std::string s(n, '\0');
  take(s.data(), n);
  return s;
}

std::vector<double> ByteReader::get_doubles(std::size_t n) {
  if (n > (bytes_.size() - pos_) / sizeof(double)) throw IoError("unexpected end of file");
  std::vector<double> v(n);
  take(v.data(), n * sizeof(double));
  return v;
}

std::vector<std::byte> serialize(const Dataset& d) {
  d.validate();
  ByteWriter w;
  w.put_bytes(std::as_bytes(std::span(kMagic)));
  w.put(kDatasetVersion);
  w.put(static_cast<std::uint32_t>(d.system));
  w.put(kFloat64);
  w.put(static_cast<std::uint32_t>(d.layout));
  w.put(static_cast<std::uint32_t>(d.grid.size()));
  for (auto n : d.grid) w.put(static_cast<std::uint64_t>(n));
  for (double l : d.lengths) w.put(l);
  w.put(d.config_digest);
  w.put(static_cast<std::uint64_t>(d.count));
  w.put(static_cast<std::uint64_t>(d.per_input));
  w.put(std::uint32_t{1});
  w.put(d.norm.input_mean);
  w.put(d.norm.input_std);
  w.put(d.norm.output_mean);
  w.put(d.norm.output_std);
  w.put_string(d.meta);
  w.put_doubles(d.inputs);
  w.put_doubles(d.outputs);
  return std::move(w.bytes());
}

Dataset deserialize(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  char magic[4];
  r.take(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError("not a DLLD dataset (bad magic)");
  if (r.get<std::uint32_t>() != kDatasetVersion) throw IoError("unsupported dataset version");
  Dataset d;
  d.system = static_cast<SystemId>(r.get<std::uint32_t>());
  system_name(d.system);
  if (r.get<std::uint32_t>() != kFloat64) throw IoError("unsupported dataset dtype");
  d.layout = static_cast<Layout>(r.get<std::uint32_t>());
  if (d.layout != Layout::pairs && d.layout != Layout::trajectories) throw IoError("unknown dataset layout");
  const auto ndim = r.get<std::uint32_t>();
  if (ndim == 0 || ndim > 3) throw IoError("unsupported dataset rank");
  for (std::uint32_t i = 0; i < ndim; ++i) d.grid.push_back(r.get<std::uint64_t>());
  for (std::uint32_t i = 0; i < ndim; ++i) d.lengths.push_back(r.get<double>());
  d.config_digest = r.get<std::uint64_t>();
  d.count = r.get<std::uint64_t>();
  d.per_input = r.get<std::uint64_t>();
  if (r.get<std::uint32_t>() != 1) throw IoError("only single-channel datasets are supported");
  d.norm.input_mean = r.get<double>();
  d.norm.input_std = r.get<double>();
  d.norm.output_mean = r.get<double>();
  d.norm.output_std = r.get<double>();
  d.meta = r.get_string();
  d.inputs = r.get_doubles(d.count * d.points());
  d.outputs = r.get_doubles(d.count * d.per_input * d.points());
  if (!r.done()) throw IoError("trailing bytes after dataset body");
  return d;
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw IoError("failed reading " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_dataset(const Dataset& d, const std::filesystem::path& path) { write_file(path, serialize(d)); }

Dataset read_dataset(const std::filesystem::path& path) { return deserialize(read_file(path)); }

std::uint64_t dataset_digest(const Dataset& d) {
  const auto bytes = serialize(d);
  return Digest().update(bytes).value();
}

Normalization compute_normalization(const Dataset& train) {
  auto stats = [](std::span<const double> a, std::span<const double> b) {
    double sum = 0.0, sq = 0.0;
    for (double x : a) sum += x;
    for (double x : b) sum += x;
    const double n = static_cast<double>(a.size() + b.size());
    const double mean = sum / n;
    for (double x : a) sq += (x - mean) * (x - mean);
    for (double x : b) sq += (x - mean) * (x - mean);
    const double sd = std::sqrt(sq / n);
    return std::pair{mean, sd > 1e-12 ? sd : 1.0};
  };
  Normalization n;
  if (train.layout == Layout::trajectories) {
    const auto [m, s] = stats(train.inputs, train.outputs);
    n = {m, s, m, s};
  } else {
    const auto [mi, si] = stats(train.inputs, {});
    const auto [mo, so] = stats(train.outputs, {});
    n = {mi, si, mo, so};
  }
  return n;
}

}  // namespace dllab::io
