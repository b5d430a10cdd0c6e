#include "mixsei/model.hpp"

#include <cmath>
#include <stdexcept>

#include "mixsei/detail/net.hpp"
#include "mixsei/rng.hpp"

namespace mixsei::model {

namespace {

constexpr std::uint64_t kInitStreamId = 0xA11C0DE5u;

}  // namespace

nn::detail::NetPlan net_plan(const ArchConfig& arch) {
  arch.validate();
  const ExtractorConfig& ex = arch.extractor;
  nn::detail::NetPlan plan;
  plan.input_len = ex.input_len;
  plan.in_channels = 2;
  const int stem_c = scaled_channels(ex.stem_channels, ex.width_mult);
  plan.stem = {plan.in_channels, stem_c, ex.stem_kernel, ex.stem_kernel / 2};
  int cin = stem_c;
  for (int ch : ex.stage_channels) {
    const int cout = scaled_channels(ch, ex.width_mult);
    nn::detail::StagePlan sp;
    sp.conv1 = {cin, cout, ex.block_kernel, ex.block_kernel / 2};
    sp.conv2 = {cout, cout, ex.block_kernel, ex.block_kernel / 2};
    sp.has_proj = cin != cout;
    if (sp.has_proj) sp.proj = {cin, cout, 1, 0};
    plan.stages.push_back(sp);
    cin = cout;
  }
  plan.feat_dim = cin;
  plan.head_out = arch.head_out();
  return plan;
}

const char* arch_name(ArchKind kind) {
  return kind == ArchKind::Smei ? "smei" : "baseline";
}

ArchKind arch_from_name(const std::string& name) {
  if (name == "smei") return ArchKind::Smei;
  if (name == "baseline") return ArchKind::Baseline;
  throw std::invalid_argument("unknown architecture name: " + name);
}

int scaled_channels(int channels, double width_mult) {
  const int scaled = static_cast<int>(std::lround(channels * width_mult));
  return scaled < 1 ? 1 : scaled;
}

int ArchConfig::feature_dim() const {
  if (extractor.stage_channels.empty()) {
    return scaled_channels(extractor.stem_channels, extractor.width_mult);
  }
  return scaled_channels(extractor.stage_channels.back(), extractor.width_mult);
}

int ArchConfig::head_out() const {
  return kind == ArchKind::Smei ? k : (1 << k) - 1;
}

void ArchConfig::validate() const {
  if (k < 1 || k > 16) {
    throw std::invalid_argument("arch.k: emitter count must be in [1, 16]");
  }
  const ExtractorConfig& ex = extractor;
  if (ex.input_len <= 0) {
    throw std::invalid_argument("extractor.input_len: must be positive");
  }
  const int divisor = 1 << static_cast<int>(ex.stage_channels.size());
  if (ex.input_len % divisor != 0) {
    throw std::invalid_argument(
        "extractor.input_len: must be divisible by " + std::to_string(divisor) +
        " (one halving per pooling stage)");
  }
  if (ex.stem_channels < 1) {
    throw std::invalid_argument("extractor.stem_channels: must be >= 1");
  }
  for (int ch : ex.stage_channels) {
    if (ch < 1) throw std::invalid_argument("extractor.stage_channels: must be >= 1");
  }
  if (ex.stem_kernel < 1 || ex.stem_kernel % 2 == 0) {
    throw std::invalid_argument("extractor.stem_kernel: must be odd and >= 1");
  }
  if (ex.block_kernel < 1 || ex.block_kernel % 2 == 0) {
    throw std::invalid_argument("extractor.block_kernel: must be odd and >= 1");
  }
  if (!(ex.width_mult > 0.0) || ex.width_mult > 16.0) {
    throw std::invalid_argument("extractor.width_mult: must be in (0, 16]");
  }
}

std::size_t param_count(const ArchConfig& arch) {
  return nn::detail::make_layout(net_plan(arch)).total;
}

std::vector<LayerParam> param_layout(const ArchConfig& arch) {
  const nn::detail::NetPlan plan = net_plan(arch);
  const nn::detail::NetLayout lay = nn::detail::make_layout(plan);
  std::vector<LayerParam> out;
  auto conv = [&out](const std::string& name, const nn::detail::ConvShape& c,
                     const nn::detail::ParamSlice& w,
                     const nn::detail::ParamSlice& b) {
    out.push_back({name + ".w", {c.cout, c.cin, c.k}, w.offset, w.count});
    out.push_back({name + ".b", {c.cout}, b.offset, b.count});
  };
  conv("stem", plan.stem, lay.stem_w, lay.stem_b);
  for (std::size_t s = 0; s < plan.stages.size(); ++s) {
    const auto& sp = plan.stages[s];
    const auto& sl = lay.stages[s];
    const std::string base = "stage" + std::to_string(s + 1);
    conv(base + ".conv1", sp.conv1, sl.w1, sl.b1);
    conv(base + ".conv2", sp.conv2, sl.w2, sl.b2);
    if (sp.has_proj) conv(base + ".proj", sp.proj, sl.wp, sl.bp);
  }
  out.push_back({"head.w", {plan.head_out, plan.feat_dim}, lay.head_w.offset,
                 lay.head_w.count});
  out.push_back({"head.b", {plan.head_out}, lay.head_b.offset, lay.head_b.count});
  return out;
}

Model init_model(const ArchConfig& arch, std::uint64_t seed) {
  const nn::detail::NetPlan plan = net_plan(arch);
  const nn::detail::NetLayout lay = nn::detail::make_layout(plan);
  Model m;
  m.arch = arch;
  m.params.assign(lay.total, 0.0);
  RngStream rng(seed, kInitStreamId);
  auto he_fill = [&](const nn::detail::ParamSlice& w, int fan_in) {
    const double std = std::sqrt(2.0 / fan_in);
    for (std::size_t i = 0; i < w.count; ++i) {
      m.params[w.offset + i] = std * rng.normal();
    }
  };
  he_fill(lay.stem_w, plan.stem.cin * plan.stem.k);
  for (std::size_t s = 0; s < plan.stages.size(); ++s) {
    const auto& sp = plan.stages[s];
    const auto& sl = lay.stages[s];
    he_fill(sl.w1, sp.conv1.cin * sp.conv1.k);
    he_fill(sl.w2, sp.conv2.cin * sp.conv2.k);
    if (sp.has_proj) he_fill(sl.wp, sp.proj.cin);
  }
  he_fill(lay.head_w, plan.feat_dim);
  return m;
}

std::vector<double> forward_logits(const Model& model, const float* windows,
                                   int batch) {
  if (batch < 1) throw std::invalid_argument("forward: batch must be >= 1");
  nn::detail::Net<double> net(net_plan(model.arch));
  if (model.params.size() != net.param_count()) {
    throw std::invalid_argument("forward: parameter vector does not match architecture");
  }
  net.load_params(model.params);
  const double* logits = net.forward(windows, batch);
  const std::size_t n =
      static_cast<std::size_t>(batch) * model.arch.head_out();
  return std::vector<double>(logits, logits + n);
}

std::vector<double> forward_probs(const Model& model, const float* windows,
                                  int batch) {
  std::vector<double> z = forward_logits(model, windows, batch);
  const int width = model.arch.head_out();
  if (model.arch.kind == ArchKind::Smei) {
    nn::sigmoid(z.data(), z.size(), z.data());
    return z;
  }
  std::vector<double> probs(z.size());
  for (int b = 0; b < batch; ++b) {
    const double* zr = z.data() + static_cast<std::size_t>(b) * width;
    double* pr = probs.data() + static_cast<std::size_t>(b) * width;
    double m = zr[0];
    for (int j = 1; j < width; ++j) m = std::max(m, zr[j]);
    double denom = 0.0;
    for (int j = 0; j < width; ++j) {
      pr[j] = std::exp(zr[j] - m);
      denom += pr[j];
    }
    for (int j = 0; j < width; ++j) pr[j] /= denom;
  }
  return probs;
}

dataset::LabelVector decide_set(const std::vector<double>& probs, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::invalid_argument("decide_set: theta must lie strictly in (0, 1)");
  }
  dataset::LabelVector label;
  label.bits.resize(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    label.bits[i] = probs[i] > theta ? 1 : 0;
  }
  return label;
}

int subset_to_class(const dataset::LabelVector& label) {
  const std::uint32_t mask = label.mask();
  if (mask == 0) {
    throw std::invalid_argument("subset codec: empty subset has no class index");
  }
  return static_cast<int>(mask) - 1;
}

dataset::LabelVector class_to_subset(int cls, int k) {
  if (k < 1 || k > 16) throw std::invalid_argument("subset codec: k must be in [1, 16]");
  if (cls < 0 || cls >= (1 << k) - 1) {
    throw std::invalid_argument("subset codec: class index out of range");
  }
  return dataset::LabelVector::from_mask(static_cast<std::uint32_t>(cls) + 1, k);
}

}  // namespace mixsei::model
