#include "morphlab/numerics/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "morphlab/errors.hpp"

namespace morph::nn {

namespace {

constexpr char kMagic[8] = {'M', 'O', 'R', 'P', 'H', 'C', 'K', '\0'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(const std::string& in, std::size_t at, int bytes) {
  if (at + static_cast<std::size_t>(bytes) > in.size()) throw CheckpointError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

std::uint32_t crc(const char* data, std::size_t n) {
  uLong c = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large payloads in chunks.
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    c = crc32(c, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(c);
}

}  // namespace

const Tensor& Checkpoint::at(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.tensor;
  }
  throw CheckpointError("checkpoint has no tensor named '" + name + "'");
}

std::string Checkpoint::to_bytes() const {
  std::string payload;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& t : tensors) {
    const std::size_t offset = payload.size();
    for (double v : t.tensor.data()) put_u64(payload, std::bit_cast<std::uint64_t>(v));
    entries.push_back({{"name", t.name},
                       {"dtype", "f64"},
                       {"shape", t.tensor.shape()},
                       {"offset", offset},
                       {"nbytes", payload.size() - offset}});
  }
  nlohmann::json manifest = {{"version", kVersion},
                             {"tensors", entries},
                             {"payload_bytes", payload.size()},
                             {"payload_crc32", crc(payload.data(), payload.size())},
                             {"meta", meta}};
  const std::string manifest_text = manifest.dump();

  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u64(out, manifest_text.size());
  out += manifest_text;
  out += payload;
  return out;
}

Checkpoint Checkpoint::from_bytes(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  std::size_t at = sizeof(kMagic);
  const auto version = static_cast<std::uint32_t>(get_le(bytes, at, 4));
  at += 4;
  if (version != kVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  const std::uint64_t manifest_len = get_le(bytes, at, 8);
  at += 8;
  if (at + manifest_len > bytes.size()) throw CheckpointError("checkpoint truncated");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.substr(at, manifest_len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint manifest: ") + e.what());
  }
  at += manifest_len;

  const std::size_t payload_bytes = manifest.at("payload_bytes").get<std::size_t>();
  if (bytes.size() - at != payload_bytes) throw CheckpointError("checkpoint payload has the wrong size");
  const char* payload = bytes.data() + at;
  if (crc(payload, payload_bytes) != manifest.at("payload_crc32").get<std::uint32_t>()) {
    throw CheckpointError("checkpoint checksum mismatch");
  }

  Checkpoint ckpt;
  ckpt.meta = manifest.value("meta", nlohmann::json::object());
  for (const auto& e : manifest.at("tensors")) {
    const auto shape = e.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2) throw CheckpointError("tensor rank must be 2");
    const std::string dtype = e.at("dtype").get<std::string>();
    const std::size_t offset = e.at("offset").get<std::size_t>();
    const std::size_t nbytes = e.at("nbytes").get<std::size_t>();
    Tensor t(shape[0], shape[1]);
    const std::size_t width = dtype == "f64" ? 8 : dtype == "f32" ? 4 : 0;
    if (width == 0) throw CheckpointError("unsupported dtype " + dtype);
    if (nbytes != t.size() * width || offset + nbytes > payload_bytes) {
      throw CheckpointError("tensor '" + e.at("name").get<std::string>() + "' has an inconsistent byte count");
    }
    const std::string view(payload + offset, nbytes);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (width == 8) {
        t[i] = std::bit_cast<double>(get_le(view, i * 8, 8));
      } else {
        t[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(view, i * 4, 4)));
      }
    }
    ckpt.tensors.push_back({e.at("name").get<std::string>(), std::move(t)});
  }
  return ckpt;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write " + path.string());
  const std::string bytes = to_bytes();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_bytes(buffer.str());
}

Checkpoint checkpoint_from(const ParameterSet& params, nlohmann::json meta) {
  Checkpoint ckpt;
  ckpt.meta = std::move(meta);
  for (const auto& p : params) ckpt.tensors.push_back({p.name, p.value});
  return ckpt;
}

void restore_parameters(const Checkpoint& ckpt, ParameterSet& params) {
  for (auto& p : params) {
    const Tensor& t = ckpt.at(p.name);
    if (t.rows() != p.value.rows() || t.cols() != p.value.cols()) {
      throw CheckpointError("tensor '" + p.name + "' has shape " + shape_string(t) + ", model expects " +
                            shape_string(p.value));
    }
    p.value = t;
  }
}

std::string digest(const Checkpoint& ckpt) {
  const std::string bytes = ckpt.to_bytes();
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", crc(bytes.data(), bytes.size()));
  return buf;
}

}  // namespace morph::nn
