#include <bit>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "mixsei/dataset.hpp"
#include "mixsei/detail/binio.hpp"
#include "mixsei/errors.hpp"

// The record region is read back with bulk memcpy into float arrays; the
// format is defined little-endian.
static_assert(std::endian::native == std::endian::little,
              "dataset records require a little-endian host");

namespace mixsei::dataset {

namespace {

using json = nlohmann::json;

// JSON has no literal for infinities, so non-finite SNR entries (the
// noiseless case) are stored as the strings "inf" / "-inf".
json snr_to_json(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

double snr_from_json(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw IoError("bad manifest: unknown snr value '" + s + "'");
  }
  return j.get<double>();
}

constexpr char kMagic[4] = {'S', 'M', 'E', 'I'};
constexpr std::uint16_t kFormatVersion = 1;

json profile_to_json(const impairment::EmitterProfile& p) {
  json coeffs = json::array();
  for (const cplx& b : p.pa_coeffs) coeffs.push_back({b.real(), b.imag()});
  return {{"gain_imbalance", p.gain_imbalance},
          {"phase_bias_rad", p.phase_bias_rad},
          {"spur_amplitude", p.spur_amplitude},
          {"spur_offset_hz", p.spur_offset_hz},
          {"leakage_amplitude", p.leakage_amplitude},
          {"pa_coeffs", coeffs},
          {"if_offset_hz", p.if_offset_hz}};
}

impairment::EmitterProfile profile_from_json(const json& j) {
  impairment::EmitterProfile p;
  p.gain_imbalance = j.at("gain_imbalance").get<double>();
  p.phase_bias_rad = j.at("phase_bias_rad").get<double>();
  p.spur_amplitude = j.at("spur_amplitude").get<double>();
  p.spur_offset_hz = j.at("spur_offset_hz").get<double>();
  p.leakage_amplitude = j.at("leakage_amplitude").get<double>();
  p.pa_coeffs.clear();
  for (const json& c : j.at("pa_coeffs"))
    p.pa_coeffs.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
  p.if_offset_hz = j.at("if_offset_hz").get<double>();
  return p;
}

Overlap overlap_from_name(const std::string& s) {
  if (s == "full") return Overlap::Full;
  if (s == "half") return Overlap::Half;
  throw IoError("bad manifest: unknown overlap '" + s + "'");
}

SubsetPolicy policy_from_name(const std::string& s) {
  if (s == "uniform_subsets") return SubsetPolicy::UniformSubsets;
  if (s == "uniform_cardinality") return SubsetPolicy::UniformCardinality;
  throw IoError("bad manifest: unknown subset_policy '" + s + "'");
}

channel::ChannelKind channel_from_name(const std::string& s) {
  if (s == "awgn") return channel::ChannelKind::Awgn;
  if (s == "rician") return channel::ChannelKind::Rician;
  throw IoError("bad manifest: unknown channel kind '" + s + "'");
}

}  // namespace

std::string manifest_to_json(const DatasetManifest& m) {
  json j;
  j["k"] = m.k;
  j["t"] = m.t;
  j["sample_rate_hz"] = m.sample_rate_hz;
  j["symbol_rate_hz"] = m.symbol_rate_hz;
  j["num_symbols"] = m.num_symbols;
  j["rrc"] = {{"rolloff", m.rrc.rolloff},
              {"span_symbols", m.rrc.span_symbols},
              {"sps", m.rrc.sps}};
  j["overlap"] = overlap_name(m.overlap);
  j["subset_policy"] = policy_name(m.subset_policy);
  j["channel"] = {{"kind", channel_name(m.channel_kind)},
                  {"rician_k_db", m.rician_k_db}};
  json grid = json::array();
  for (double v : m.snr_grid_db) grid.push_back(snr_to_json(v));
  j["snr_grid_db"] = grid;
  json profiles = json::array();
  for (const auto& p : m.profiles) profiles.push_back(profile_to_json(p));
  j["profiles"] = profiles;
  j["seed"] = m.seed;
  j["count"] = m.count;
  j["version"] = m.version;
  if (m.config_json.empty()) {
    j["config"] = nullptr;
  } else {
    j["config"] = json::parse(m.config_json);
  }
  return j.dump();
}

DatasetManifest manifest_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("bad manifest: ") + e.what());
  }
  try {
    DatasetManifest m;
    m.k = j.at("k").get<int>();
    m.t = j.at("t").get<int>();
    m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    m.symbol_rate_hz = j.at("symbol_rate_hz").get<double>();
    m.num_symbols = j.at("num_symbols").get<int>();
    m.rrc.rolloff = j.at("rrc").at("rolloff").get<double>();
    m.rrc.span_symbols = j.at("rrc").at("span_symbols").get<int>();
    m.rrc.sps = j.at("rrc").at("sps").get<int>();
    m.overlap = overlap_from_name(j.at("overlap").get<std::string>());
    m.subset_policy = policy_from_name(j.at("subset_policy").get<std::string>());
    m.channel_kind = channel_from_name(j.at("channel").at("kind").get<std::string>());
    m.rician_k_db = j.at("channel").at("rician_k_db").get<double>();
    for (const json& v : j.at("snr_grid_db")) m.snr_grid_db.push_back(snr_from_json(v));
    for (const json& p : j.at("profiles")) m.profiles.push_back(profile_from_json(p));
    m.seed = j.at("seed").get<std::uint64_t>();
    m.count = j.at("count").get<std::uint64_t>();
    m.version = j.at("version").get<std::string>();
    if (!j.at("config").is_null()) m.config_json = j.at("config").dump();
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("bad manifest: ") + e.what());
  }
}

void write_dataset(const std::string& path, const std::vector<LabeledExample>& examples,
                   const DatasetManifest& manifest) {
  DatasetManifest m = manifest;
  m.count = examples.size();
  for (const LabeledExample& ex : examples) {
    if (ex.t() != m.t)
      throw ShapeError("write_dataset: example window length does not match manifest t");
    if (m.k < 32 && ex.label_mask >= (1u << m.k))
      throw ShapeError("write_dataset: label mask has bits beyond K");
  }

  const std::string mj = manifest_to_json(m);

  detail::ByteWriter w;
  w.raw(kMagic, 4);
  w.u16(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(mj.size()));
  w.raw(mj.data(), mj.size());

  const std::size_t records_begin = w.bytes.size();
  for (const LabeledExample& ex : examples) {
    w.u32(ex.label_mask);
    w.f32(ex.snr_db);
    for (float v : ex.window) w.f32(v);
  }
  const std::uint32_t crc =
      detail::crc32(w.bytes.data() + records_begin, w.bytes.size() - records_begin);
  w.u32(crc);

  detail::write_file(path, w.bytes);
}

Dataset read_dataset(const std::string& path) {
  const std::vector<std::uint8_t> bytes = detail::read_file(path);
  detail::ByteReader r{bytes.data(), bytes.size(), 0};

  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("bad magic: not a dataset file: " + path);
  const std::uint16_t ver = r.u16();
  if (ver != kFormatVersion)
    throw IoError("unsupported dataset format version " + std::to_string(ver));

  const std::uint32_t mlen = r.u32();
  if (r.remaining() < mlen) throw IoError("truncated file: manifest cut short");
  std::string mj(reinterpret_cast<const char*>(bytes.data() + r.pos), mlen);
  r.skip(mlen);

  Dataset ds;
  ds.manifest = manifest_from_json(mj);

  const std::size_t record_size = 4 + 4 + 2 * static_cast<std::size_t>(ds.manifest.t) * 4;
  const std::size_t records_bytes = record_size * ds.manifest.count;
  if (r.remaining() < records_bytes + 4)
    throw IoError("truncated file: record region cut short");

  const std::uint8_t* records_begin = bytes.data() + r.pos;
  ds.examples.resize(ds.manifest.count);
  for (LabeledExample& ex : ds.examples) {
    ex.label_mask = r.u32();
    ex.snr_db = r.f32();
    ex.window.resize(2 * static_cast<std::size_t>(ds.manifest.t));
    r.raw(ex.window.data(), ex.window.size() * 4);
  }

  const std::uint32_t stored_crc = r.u32();
  const std::uint32_t actual_crc = detail::crc32(records_begin, records_bytes);
  if (stored_crc != actual_crc)
    throw IoError("checksum mismatch: dataset records are corrupt");

  return ds;
}

ScenarioConfig scenario_from_manifest(const DatasetManifest& m) {
  ScenarioConfig cfg;
  cfg.k = m.k;
  cfg.overlap = m.overlap;
  cfg.t = m.t;
  cfg.num_symbols = m.num_symbols;
  cfg.symbol_rate_hz = m.symbol_rate_hz;
  cfg.rrc = m.rrc;
  cfg.channel.kind = m.channel_kind;
  cfg.channel.rician_k_db = m.rician_k_db;
  cfg.channel.snr_db = m.snr_grid_db.empty() ? 10.0 : m.snr_grid_db.front();
  cfg.profiles = m.profiles;
  cfg.subset_policy = m.subset_policy;
  return cfg;
}

}  // namespace mixsei::dataset
