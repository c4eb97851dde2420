#include "drama/encoder/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "drama/util/error.h"

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace drama::encoder {
namespace {

constexpr char kMagic[8] = {'D', 'R', 'A', 'M', 'A', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

void append_tensors(const ParameterSet& set, const char* group, Json& entries, std::string& payload) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Tensor& t = set.tensor(i);
    const bool f32 = t.dtype() == numerics::DType::kF32;
    entries.push_back({{"name", set.name(i)},
                       {"shape", t.shape()},
                       {"dtype", f32 ? "f32" : "f64"},
                       {"group", group},
                       {"offset", payload.size()}});
    if (f32) {
      for (double x : t.data()) {
        const float f = static_cast<float>(x);
        payload.append(reinterpret_cast<const char*>(&f), sizeof f);
      }
    } else {
      payload.append(reinterpret_cast<const char*>(t.data().data()), t.size() * sizeof(double));
    }
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  check_parameters(ckpt.config, ckpt.params);
  Json entries = Json::array();
  std::string payload;
  append_tensors(ckpt.params, "param", entries, payload);
  append_tensors(ckpt.extra, "extra", entries, payload);
  const Json header{{"config", to_json(ckpt.config)}, {"tensors", entries}, {"metadata", ckpt.metadata}};
  const std::string hs = canonical_dump(header);

  std::string bytes(kMagic, sizeof kMagic);
  const std::uint32_t version = kVersion;
  const std::uint64_t hlen = hs.size();
  bytes.append(reinterpret_cast<const char*>(&version), sizeof version);
  bytes.append(reinterpret_cast<const char*>(&hlen), sizeof hlen);
  bytes += hs;
  bytes += payload;
  write_text_file(path, bytes);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  const std::size_t fixed = sizeof kMagic + sizeof(std::uint32_t) + sizeof(std::uint64_t);
  if (bytes.size() < fixed || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw DataError(path.string() + ": not a checkpoint (bad magic)");
  }
  std::uint32_t version = 0;
  std::uint64_t hlen = 0;
  std::memcpy(&version, bytes.data() + 8, sizeof version);
  std::memcpy(&hlen, bytes.data() + 12, sizeof hlen);
  if (version != kVersion) throw DataError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  if (bytes.size() < fixed + hlen) throw DataError(path.string() + ": truncated header");
  Json header;
  try {
    header = Json::parse(bytes.substr(fixed, hlen));
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": bad header: " + e.what());
  }
  const std::size_t base = fixed + hlen;

  Checkpoint ck;
  ck.config = config_from_json(header.at("config"));
  ck.metadata = header.value("metadata", Json::object());
  for (const auto& e : header.at("tensors")) {
    numerics::Shape shape = e.at("shape").get<numerics::Shape>();
    const bool f32 = e.at("dtype").get<std::string>() == "f32";
    const std::size_t n = numerics::element_count(shape);
    const std::size_t off = base + e.at("offset").get<std::size_t>();
    const std::size_t width = f32 ? sizeof(float) : sizeof(double);
    if (off + n * width > bytes.size()) {
      throw DataError(path.string() + ": tensor '" + e.at("name").get<std::string>() + "' overruns payload");
    }
    std::vector<double> data(n);
    if (f32) {
      for (std::size_t i = 0; i < n; ++i) {
        float f;
        std::memcpy(&f, bytes.data() + off + i * sizeof f, sizeof f);
        data[i] = f;
      }
    } else {
      std::memcpy(data.data(), bytes.data() + off, n * sizeof(double));
    }
    Tensor t(std::move(shape), std::move(data));
    if (f32) t.set_dtype(numerics::DType::kF32);
    auto& dst = e.at("group").get<std::string>() == "extra" ? ck.extra : ck.params;
    dst.add(e.at("name").get<std::string>(), std::move(t));
  }
  check_parameters(ck.config, ck.params);
  return ck;
}

}  // namespace drama::encoder
