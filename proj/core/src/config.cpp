#include "mixsei/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "mixsei/detail/binio.hpp"
#include "mixsei/errors.hpp"
#include "mixsei/rng.hpp"

namespace mixsei::config {

namespace {

using nlohmann::json;

// --------------------------------------------------------------------------
// TOML-subset parser: [section] / [a.b] headers, key = value lines, scalar
// values (string, integer, float, boolean, inf), one-line arrays, comments.

struct TomlParser {
  const std::string& text;
  const std::string& origin;
  std::size_t pos = 0;
  int line = 1;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
  }

  static bool is_bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  void skip_ws_inline(std::string_view s, std::size_t& i) const {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }

  json parse_scalar(std::string_view s, std::size_t& i) {
    skip_ws_inline(s, i);
    if (i >= s.size()) fail("expected a value");
    if (s[i] == '"') {
      ++i;
      std::string out;
      while (i < s.size() && s[i] != '"') {
        if (s[i] == '\\') {
          ++i;
          if (i >= s.size()) fail("unterminated escape in string");
          switch (s[i]) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            default: fail(std::string("unsupported escape \\") + s[i]);
          }
        } else {
          out += s[i];
        }
        ++i;
      }
      if (i >= s.size()) fail("unterminated string");
      ++i;
      return json(out);
    }
    // Bare token: number, boolean, or inf.
    std::size_t start = i;
    while (i < s.size() && s[i] != ',' && s[i] != ']' && s[i] != '#' &&
           s[i] != ' ' && s[i] != '\t') {
      ++i;
    }
    std::string tok(s.substr(start, i - start));
    if (tok == "true") return json(true);
    if (tok == "false") return json(false);
    if (tok == "inf" || tok == "+inf") return json("inf");
    if (tok == "-inf") return json("-inf");
    std::string digits;
    for (char c : tok) {
      if (c != '_') digits += c;
    }
    if (digits.empty()) fail("expected a value");
    bool integral = true;
    for (std::size_t j = 0; j < digits.size(); ++j) {
      const char c = digits[j];
      if (j == 0 && (c == '+' || c == '-')) continue;
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        integral = false;
        break;
      }
    }
    errno = 0;
    char* end = nullptr;
    if (integral) {
      const long long v = std::strtoll(digits.c_str(), &end, 10);
      if (errno != 0 || end == nullptr || *end != '\0') {
        fail("invalid integer '" + tok + "'");
      }
      return json(v);
    }
    const double v = std::strtod(digits.c_str(), &end);
    if (end == nullptr || *end != '\0') fail("invalid number '" + tok + "'");
    return json(v);
  }

  json parse_value(std::string_view s, std::size_t& i) {
    skip_ws_inline(s, i);
    if (i < s.size() && s[i] == '[') {
      ++i;
      json arr = json::array();
      skip_ws_inline(s, i);
      if (i < s.size() && s[i] == ']') {
        ++i;
        return arr;
      }
      while (true) {
        arr.push_back(parse_scalar(s, i));
        skip_ws_inline(s, i);
        if (i < s.size() && s[i] == ',') {
          ++i;
          continue;
        }
        if (i < s.size() && s[i] == ']') {
          ++i;
          return arr;
        }
        fail("expected ',' or ']' in array (arrays must be one line)");
      }
    }
    return parse_scalar(s, i);
  }

  std::vector<std::string> parse_key_path(std::string_view s, std::size_t& i) {
    std::vector<std::string> path;
    while (true) {
      skip_ws_inline(s, i);
      std::string part;
      while (i < s.size() && is_bare_char(s[i])) part += s[i++];
      if (part.empty()) fail("expected a key");
      path.push_back(part);
      skip_ws_inline(s, i);
      if (i < s.size() && s[i] == '.') {
        ++i;
        continue;
      }
      return path;
    }
  }

  json parse() {
    json root = json::object();
    std::vector<std::string> section;
    std::size_t i = 0;
    while (i < text.size()) {
      std::size_t eol = text.find('\n', i);
      if (eol == std::string::npos) eol = text.size();
      std::string_view full(text.data() + i, eol - i);
      i = eol + (eol < text.size() ? 1 : 0);

      // Strip comments (a '#' outside a string) and trailing whitespace.
      std::string_view s = full;
      bool in_str = false;
      std::size_t cut = s.size();
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] == '"' && (j == 0 || s[j - 1] != '\\')) in_str = !in_str;
        if (s[j] == '#' && !in_str) {
          cut = j;
          break;
        }
      }
      s = s.substr(0, cut);
      std::size_t b = 0, e = s.size();
      while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
      while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
      s = s.substr(b, e - b);

      if (!s.empty()) {
        if (s.front() == '[') {
          if (s.back() != ']') fail("unterminated section header");
          std::string_view inner = s.substr(1, s.size() - 2);
          std::size_t j = 0;
          section = parse_key_path(inner, j);
          skip_ws_inline(inner, j);
          if (j != inner.size()) fail("trailing characters in section header");
        } else {
          std::size_t j = 0;
          std::vector<std::string> path = parse_key_path(s, j);
          skip_ws_inline(s, j);
          if (j >= s.size() || s[j] != '=') fail("expected '=' after key");
          ++j;
          json value = parse_value(s, j);
          skip_ws_inline(s, j);
          if (j != s.size()) fail("trailing characters after value");

          json* node = &root;
          std::vector<std::string> full_path = section;
          full_path.insert(full_path.end(), path.begin(), path.end());
          for (std::size_t p = 0; p + 1 < full_path.size(); ++p) {
            node = &(*node)[full_path[p]];
            if (!node->is_object() && !node->is_null()) {
              fail("key '" + full_path[p] + "' is both a value and a table");
            }
          }
          const std::string& leaf = full_path.back();
          if (node->contains(leaf)) fail("duplicate key '" + leaf + "'");
          (*node)[leaf] = std::move(value);
        }
      }
      ++line;
    }
    return root;
  }
};

// --------------------------------------------------------------------------
// Typed getters with field-specific errors.

const json* find_path(const json& root, const std::string& dotted) {
  const json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot - start);
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

[[noreturn]] void field_error(const std::string& field, const std::string& why) {
  throw ConfigError("config field " + field + ": " + why);
}

void get_int(const json& root, const std::string& field, int& out) {
  const json* v = find_path(root, field);
  if (!v) return;
  if (!v->is_number_integer()) field_error(field, "expected an integer");
  const long long x = v->get<long long>();
  if (x < -2147483648LL || x > 2147483647LL) field_error(field, "out of range");
  out = static_cast<int>(x);
}

void get_u64(const json& root, const std::string& field, std::uint64_t& out) {
  const json* v = find_path(root, field);
  if (!v) return;
  if (v->is_number_unsigned()) {
    out = v->get<std::uint64_t>();
    return;
  }
  if (!v->is_number_integer()) field_error(field, "expected a non-negative integer");
  const long long x = v->get<long long>();
  if (x < 0) field_error(field, "must be >= 0");
  out = static_cast<std::uint64_t>(x);
}

double double_from(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  field_error(field, "expected a number");
}

void get_double(const json& root, const std::string& field, double& out) {
  const json* v = find_path(root, field);
  if (!v) return;
  out = double_from(*v, field);
}

void get_string(const json& root, const std::string& field, std::string& out) {
  const json* v = find_path(root, field);
  if (!v) return;
  if (!v->is_string()) field_error(field, "expected a string");
  out = v->get<std::string>();
}

void get_double_array(const json& root, const std::string& field,
                      std::vector<double>& out) {
  const json* v = find_path(root, field);
  if (!v) return;
  if (!v->is_array()) field_error(field, "expected an array");
  out.clear();
  for (const json& e : *v) out.push_back(double_from(e, field));
}

void get_int_array(const json& root, const std::string& field,
                   std::vector<int>& out) {
  const json* v = find_path(root, field);
  if (!v) return;
  if (!v->is_array()) field_error(field, "expected an array of integers");
  out.clear();
  for (const json& e : *v) {
    if (!e.is_number_integer()) field_error(field, "expected an array of integers");
    out.push_back(e.get<int>());
  }
}

const std::set<std::string>& known_fields() {
  static const std::set<std::string> fields = {
      "scenario.k", "scenario.overlap", "scenario.t", "scenario.num_symbols",
      "scenario.symbol_rate_hz", "scenario.subset_policy",
      "scenario.rrc.rolloff", "scenario.rrc.span_symbols", "scenario.rrc.sps",
      "scenario.channel.kind", "scenario.channel.rician_k_db",
      "scenario.channel.snr_db", "snr.grid_db", "profiles.seed", "model.arch",
      "model.stem_channels", "model.stage_channels", "model.stem_kernel",
      "model.block_kernel", "model.width_mult", "train.batch_size",
      "train.epochs", "train.lr", "train.beta1", "train.beta2", "train.eps",
      "train.lr_step_epochs", "train.lr_gamma", "train.theta",
      "train.precision", "train.seed", "synth.seed", "synth.count",
      "output.dataset", "output.checkpoint", "output.report"};
  return fields;
}

void reject_unknown(const json& node, const std::string& prefix) {
  if (!node.is_object()) {
    if (known_fields().count(prefix) == 0) {
      throw ConfigError("config: unknown field '" + prefix + "'");
    }
    return;
  }
  for (const auto& [key, child] : node.items()) {
    reject_unknown(child, prefix.empty() ? key : prefix + "." + key);
  }
}

ExperimentConfig from_json_tree(const json& root) {
  reject_unknown(root, "");
  ExperimentConfig cfg = default_config();

  get_int(root, "scenario.k", cfg.scenario.k);
  std::string overlap = "full";
  get_string(root, "scenario.overlap", overlap);
  if (overlap == "full") {
    cfg.scenario.overlap = dataset::Overlap::Full;
  } else if (overlap == "half") {
    cfg.scenario.overlap = dataset::Overlap::Half;
  } else {
    field_error("scenario.overlap", "must be \"full\" or \"half\"");
  }
  get_int(root, "scenario.t", cfg.scenario.t);
  get_int(root, "scenario.num_symbols", cfg.scenario.num_symbols);
  get_double(root, "scenario.symbol_rate_hz", cfg.scenario.symbol_rate_hz);
  std::string policy = "uniform_subsets";
  get_string(root, "scenario.subset_policy", policy);
  if (policy == "uniform_subsets") {
    cfg.scenario.subset_policy = dataset::SubsetPolicy::UniformSubsets;
  } else if (policy == "uniform_cardinality") {
    cfg.scenario.subset_policy = dataset::SubsetPolicy::UniformCardinality;
  } else {
    field_error("scenario.subset_policy",
                "must be \"uniform_subsets\" or \"uniform_cardinality\"");
  }
  get_double(root, "scenario.rrc.rolloff", cfg.scenario.rrc.rolloff);
  get_int(root, "scenario.rrc.span_symbols", cfg.scenario.rrc.span_symbols);
  get_int(root, "scenario.rrc.sps", cfg.scenario.rrc.sps);
  std::string kind = "awgn";
  get_string(root, "scenario.channel.kind", kind);
  if (kind == "awgn") {
    cfg.scenario.channel.kind = channel::ChannelKind::Awgn;
  } else if (kind == "rician") {
    cfg.scenario.channel.kind = channel::ChannelKind::Rician;
  } else {
    field_error("scenario.channel.kind", "must be \"awgn\" or \"rician\"");
  }
  get_double(root, "scenario.channel.rician_k_db", cfg.scenario.channel.rician_k_db);
  get_double(root, "scenario.channel.snr_db", cfg.scenario.channel.snr_db);

  get_double_array(root, "snr.grid_db", cfg.snr_grid_db);
  get_u64(root, "profiles.seed", cfg.profile_seed);

  get_string(root, "model.arch", cfg.arch);
  get_int(root, "model.stem_channels", cfg.extractor.stem_channels);
  get_int_array(root, "model.stage_channels", cfg.extractor.stage_channels);
  get_int(root, "model.stem_kernel", cfg.extractor.stem_kernel);
  get_int(root, "model.block_kernel", cfg.extractor.block_kernel);
  get_double(root, "model.width_mult", cfg.extractor.width_mult);

  get_int(root, "train.batch_size", cfg.train.batch_size);
  get_int(root, "train.epochs", cfg.train.epochs);
  get_double(root, "train.lr", cfg.train.lr);
  get_double(root, "train.beta1", cfg.train.beta1);
  get_double(root, "train.beta2", cfg.train.beta2);
  get_double(root, "train.eps", cfg.train.eps);
  get_int(root, "train.lr_step_epochs", cfg.train.lr_step_epochs);
  get_double(root, "train.lr_gamma", cfg.train.lr_gamma);
  get_double(root, "train.theta", cfg.train.theta);
  std::string precision = "f64";
  get_string(root, "train.precision", precision);
  if (precision == "f64") {
    cfg.train.precision = train::Precision::F64;
  } else if (precision == "f32") {
    cfg.train.precision = train::Precision::F32;
  } else {
    field_error("train.precision", "must be \"f64\" or \"f32\"");
  }
  get_u64(root, "train.seed", cfg.train.seed);

  get_u64(root, "synth.seed", cfg.synth_seed);
  get_u64(root, "synth.count", cfg.synth_count);
  get_string(root, "output.dataset", cfg.out_dataset);
  get_string(root, "output.checkpoint", cfg.out_checkpoint);
  get_string(root, "output.report", cfg.out_report);

  cfg.validate();
  return cfg;
}

json num_or_inf(double v) {
  if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
  return json(v);
}

}  // namespace

void ExperimentConfig::validate() const {
  scenario.validate();
  if (snr_grid_db.empty()) {
    throw ConfigError("config field snr.grid_db: must contain at least one value");
  }
  for (double s : snr_grid_db) {
    if (std::isnan(s)) throw ConfigError("config field snr.grid_db: NaN is not a valid SNR");
  }
  if (arch != "smei" && arch != "baseline") {
    throw ConfigError("config field model.arch: must be \"smei\" or \"baseline\"");
  }
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config field ") + e.what());
  }
  model::ArchConfig probe;
  probe.kind = model::arch_from_name(arch);
  probe.k = scenario.k;
  probe.extractor = extractor;
  probe.extractor.input_len = scenario.t;
  try {
    probe.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config field model: ") + e.what());
  }
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.extractor.input_len = cfg.scenario.t;
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json root;
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
    return from_json_tree(root);
  }
  TomlParser parser{text, origin};
  return from_json_tree(parser.parse());
}

ExperimentConfig load_config(const std::string& path) {
  const std::vector<std::uint8_t> bytes = detail::read_file(path);
  return parse_config_text(std::string(bytes.begin(), bytes.end()), path);
}

std::string resolved_json(const ExperimentConfig& cfg) {
  json j;
  j["scenario"]["k"] = cfg.scenario.k;
  j["scenario"]["overlap"] = dataset::overlap_name(cfg.scenario.overlap);
  j["scenario"]["t"] = cfg.scenario.t;
  j["scenario"]["num_symbols"] = cfg.scenario.num_symbols;
  j["scenario"]["symbol_rate_hz"] = cfg.scenario.symbol_rate_hz;
  j["scenario"]["subset_policy"] = dataset::policy_name(cfg.scenario.subset_policy);
  j["scenario"]["rrc"]["rolloff"] = cfg.scenario.rrc.rolloff;
  j["scenario"]["rrc"]["span_symbols"] = cfg.scenario.rrc.span_symbols;
  j["scenario"]["rrc"]["sps"] = cfg.scenario.rrc.sps;
  j["scenario"]["channel"]["kind"] = dataset::channel_name(cfg.scenario.channel.kind);
  j["scenario"]["channel"]["rician_k_db"] = cfg.scenario.channel.rician_k_db;
  j["scenario"]["channel"]["snr_db"] = num_or_inf(cfg.scenario.channel.snr_db);
  json grid = json::array();
  for (double s : cfg.snr_grid_db) grid.push_back(num_or_inf(s));
  j["snr"]["grid_db"] = std::move(grid);
  j["profiles"]["seed"] = cfg.profile_seed;
  j["model"]["arch"] = cfg.arch;
  j["model"]["stem_channels"] = cfg.extractor.stem_channels;
  j["model"]["stage_channels"] = cfg.extractor.stage_channels;
  j["model"]["stem_kernel"] = cfg.extractor.stem_kernel;
  j["model"]["block_kernel"] = cfg.extractor.block_kernel;
  j["model"]["width_mult"] = cfg.extractor.width_mult;
  j["train"]["batch_size"] = cfg.train.batch_size;
  j["train"]["epochs"] = cfg.train.epochs;
  j["train"]["lr"] = cfg.train.lr;
  j["train"]["beta1"] = cfg.train.beta1;
  j["train"]["beta2"] = cfg.train.beta2;
  j["train"]["eps"] = cfg.train.eps;
  j["train"]["lr_step_epochs"] = cfg.train.lr_step_epochs;
  j["train"]["lr_gamma"] = cfg.train.lr_gamma;
  j["train"]["theta"] = cfg.train.theta;
  j["train"]["precision"] =
      cfg.train.precision == train::Precision::F64 ? "f64" : "f32";
  j["train"]["seed"] = cfg.train.seed;
  j["synth"]["seed"] = cfg.synth_seed;
  j["synth"]["count"] = cfg.synth_count;
  j["output"]["dataset"] = cfg.out_dataset;
  j["output"]["checkpoint"] = cfg.out_checkpoint;
  j["output"]["report"] = cfg.out_report;
  return j.dump();
}

dataset::ScenarioConfig resolved_scenario(const ExperimentConfig& cfg) {
  dataset::ScenarioConfig sc = cfg.scenario;
  RngStream rng(cfg.profile_seed, dataset::kProfileStreamId);
  sc.profiles = dataset::draw_profiles(sc.k, sc.overlap, rng);
  sc.validate();
  return sc;
}

model::ArchConfig resolved_arch(const ExperimentConfig& cfg,
                                const std::string& arch_override) {
  model::ArchConfig arch;
  const std::string& name = arch_override.empty() ? cfg.arch : arch_override;
  arch.kind = model::arch_from_name(name);
  arch.k = cfg.scenario.k;
  arch.extractor = cfg.extractor;
  arch.extractor.input_len = cfg.scenario.t;
  arch.validate();
  return arch;
}

}  // namespace mixsei::config
