#include "dllab/io/checkpoint.hpp"

#include <cstring>

#include "dllab/core/digest.hpp"
#include "dllab/core/error.hpp"
#include "dllab/io/dataset.hpp"

namespace dllab::io {

namespace {

constexpr char kMagic[4] = {'D', 'L', 'L', 'M'};

void put_values(ByteWriter& w, const std::vector<double>& v, std::uint32_t scalar_bytes) {
  if (scalar_bytes == 8) {
    w.put_doubles(v);
    return;
  }
  for (double x : v) w.put(static_cast<float>(x));
}

std::vector<double> get_values(ByteReader& r, std::size_t n, std::uint32_t scalar_bytes) {
  if (scalar_bytes == 8) return r.get_doubles(n);
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(r.get<float>());
  return v;
}

}  // namespace

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::encoder: return "encoder";
    case ModelKind::dll: return "dll";
    case ModelKind::fno: return "fno";
  }
  throw IoError("unknown model kind");
}

std::uint64_t Checkpoint::architecture_digest() const {
  Digest d;
  d.update_value(static_cast<std::uint32_t>(kind));
  d.update_value(scalar_bytes);
  for (auto a : arch) d.update_value(a);
  for (const auto& p : params) {
    d.update(p.name);
    d.update_value(p.rows);
    d.update_value(p.cols);
  }
  return d.value();
}

std::vector<std::byte> serialize(const Checkpoint& c) {
  if (c.scalar_bytes != 4 && c.scalar_bytes != 8) throw UsageError("checkpoint scalar size must be 4 or 8");
  ByteWriter w;
  w.put_bytes(std::as_bytes(std::span(kMagic)));
  w.put(kCheckpointVersion);
  w.put(static_cast<std::uint32_t>(c.kind));
  w.put(c.scalar_bytes);
  w.put(c.architecture_digest());
  w.put(c.config_digest);
  w.put(c.dataset_digest);
  w.put(c.upstream_digest);
  w.put(static_cast<std::uint32_t>(c.arch.size()));
  for (auto a : c.arch) w.put(a);
  w.put(static_cast<std::uint64_t>(c.extra.size()));
  w.put_doubles(c.extra);
  w.put_string(c.meta);
  w.put(static_cast<std::uint32_t>(c.params.size()));
  for (const auto& p : c.params) {
    if (p.raw.size() != p.rows * p.cols || p.ema.size() != p.raw.size()) {
      throw UsageError("parameter blob " + p.name + " has inconsistent size");
    }
    w.put_string(p.name);
    w.put(p.rows);
    w.put(p.cols);
    put_values(w, p.raw, c.scalar_bytes);
    put_values(w, p.ema, c.scalar_bytes);
  }
  return std::move(w.bytes());
}

Checkpoint deserialize_checkpoint(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  char magic[4];
  r.take(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError("not a DLLM checkpoint (bad magic)");
  if (r.get<std::uint32_t>() != kCheckpointVersion) throw IoError("unsupported checkpoint version");
  Checkpoint c;
  c.kind = static_cast<ModelKind>(r.get<std::uint32_t>());
  model_kind_name(c.kind);
  c.scalar_bytes = r.get<std::uint32_t>();
  if (c.scalar_bytes != 4 && c.scalar_bytes != 8) throw IoError("unsupported checkpoint scalar size");
  const auto arch_digest = r.get<std::uint64_t>();
  c.config_digest = r.get<std::uint64_t>();
  c.dataset_digest = r.get<std::uint64_t>();
  c.upstream_digest = r.get<std::uint64_t>();
  const auto na = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < na; ++i) c.arch.push_back(r.get<std::int64_t>());
  c.extra = r.get_doubles(r.get<std::uint64_t>());
  c.meta = r.get_string();
  const auto np = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < np; ++i) {
    Checkpoint::Blob b;
    b.name = r.get_string();
    b.rows = r.get<std::uint64_t>();
    b.cols = r.get<std::uint64_t>();
    if (b.rows * b.cols > bytes.size()) throw IoError("parameter " + b.name + " exceeds file size");
    b.raw = get_values(r, b.rows * b.cols, c.scalar_bytes);
    b.ema = get_values(r, b.rows * b.cols, c.scalar_bytes);
    c.params.push_back(std::move(b));
  }
  if (!r.done()) throw IoError("trailing bytes after checkpoint body");
  if (c.architecture_digest() != arch_digest) throw DigestError("checkpoint architecture digest does not match its contents");
  return c;
}

void write_checkpoint(const Checkpoint& c, const std::filesystem::path& path) { write_file(path, serialize(c)); }

Checkpoint read_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

std::uint64_t checkpoint_digest(const Checkpoint& c) { return Digest().update(serialize(c)).value(); }

}  // namespace dllab::io
