#include "mixsei/checkpoint.hpp"

#include <cstring>

#include <nlohmann/json.hpp>

#include "mixsei/detail/binio.hpp"
#include "mixsei/errors.hpp"
#include "mixsei/version.hpp"

namespace mixsei::model {

namespace {

constexpr char kMagic[4] = {'S', 'M', 'N', 'W'};
constexpr std::uint16_t kFormatVersion = 1;

using nlohmann::json;

json arch_to_json(const ArchConfig& arch) {
  json ex;
  ex["input_len"] = arch.extractor.input_len;
  ex["stem_channels"] = arch.extractor.stem_channels;
  ex["stage_channels"] = arch.extractor.stage_channels;
  ex["stem_kernel"] = arch.extractor.stem_kernel;
  ex["block_kernel"] = arch.extractor.block_kernel;
  ex["width_mult"] = arch.extractor.width_mult;
  json j;
  j["kind"] = arch_name(arch.kind);
  j["k"] = arch.k;
  j["extractor"] = std::move(ex);
  return j;
}

ArchConfig arch_from_json(const json& j) {
  ArchConfig arch;
  arch.kind = arch_from_name(j.at("kind").get<std::string>());
  arch.k = j.at("k").get<int>();
  const json& ex = j.at("extractor");
  arch.extractor.input_len = ex.at("input_len").get<int>();
  arch.extractor.stem_channels = ex.at("stem_channels").get<int>();
  arch.extractor.stage_channels = ex.at("stage_channels").get<std::vector<int>>();
  arch.extractor.stem_kernel = ex.at("stem_kernel").get<int>();
  arch.extractor.block_kernel = ex.at("block_kernel").get<int>();
  arch.extractor.width_mult = ex.at("width_mult").get<double>();
  arch.validate();
  return arch;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model,
                     const std::string& meta_json) {
  model.arch.validate();
  const std::size_t expect = param_count(model.arch);
  if (model.params.size() != expect) {
    throw ShapeError("checkpoint: model has " + std::to_string(model.params.size()) +
                     " parameters but the architecture defines " +
                     std::to_string(expect));
  }
  json meta;
  try {
    meta = meta_json.empty() ? json::object() : json::parse(meta_json);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("checkpoint: metadata is not valid JSON: ") + e.what());
  }

  json desc;
  desc["arch"] = arch_to_json(model.arch);
  desc["param_count"] = expect;
  json layers = json::array();
  for (const LayerParam& lp : param_layout(model.arch)) {
    layers.push_back({{"name", lp.name}, {"shape", lp.shape}});
  }
  desc["layers"] = std::move(layers);
  desc["version"] = version();
  desc["meta"] = std::move(meta);
  const std::string desc_text = desc.dump();

  detail::ByteWriter w;
  w.raw(kMagic, 4);
  w.u16(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(desc_text.size()));
  const std::size_t body_begin = w.bytes.size();
  w.raw(desc_text.data(), desc_text.size());
  for (double p : model.params) w.f32(static_cast<float>(p));
  const std::uint32_t crc =
      detail::crc32(w.bytes.data() + body_begin, w.bytes.size() - body_begin);
  w.u32(crc);
  detail::write_file(path, w.bytes);
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::vector<std::uint8_t> bytes = detail::read_file(path);
  detail::ByteReader r{bytes.data(), bytes.size(), 0};

  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("bad magic: not a checkpoint file: " + path);
  }
  const std::uint16_t ver = r.u16();
  if (ver != kFormatVersion) {
    throw IoError("unsupported checkpoint format version " + std::to_string(ver) +
                  ": " + path);
  }
  const std::uint32_t desc_len = r.u32();
  if (r.remaining() < desc_len) {
    throw IoError("truncated file: checkpoint descriptor cut short: " + path);
  }
  const std::size_t body_begin = r.pos;
  std::string desc_text(desc_len, '\0');
  r.raw(desc_text.data(), desc_len);

  json desc;
  try {
    desc = json::parse(desc_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("checkpoint descriptor is not valid JSON: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    ckpt.model.arch = arch_from_json(desc.at("arch"));
    const std::size_t stored_count = desc.at("param_count").get<std::size_t>();
    const std::size_t expect = param_count(ckpt.model.arch);
    if (stored_count != expect) {
      throw IoError("checkpoint parameter count " + std::to_string(stored_count) +
                    " does not match its architecture (" + std::to_string(expect) +
                    "): " + path);
    }
    ckpt.meta_json = desc.contains("meta") ? desc["meta"].dump() : "{}";
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint descriptor is malformed: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("checkpoint descriptor is malformed: ") + e.what());
  }

  const std::size_t n = param_count(ckpt.model.arch);
  if (r.remaining() < n * 4 + 4) {
    throw IoError("truncated file: checkpoint parameter blob cut short: " + path);
  }
  ckpt.model.params.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ckpt.model.params[i] = static_cast<double>(r.f32());
  }
  const std::size_t body_len = r.pos - body_begin;
  const std::uint32_t stored_crc = r.u32();
  const std::uint32_t actual_crc = detail::crc32(bytes.data() + body_begin, body_len);
  if (stored_crc != actual_crc) {
    throw IoError("checksum mismatch: checkpoint is corrupt: " + path);
  }
  return ckpt;
}

}  // namespace mixsei::model
