#include "debias/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "debias/kernels.hpp"

namespace debias {

using kernels::ConvDims;

std::string Architecture::id() const {
  std::ostringstream os;
  os << "cnn-in" << input_size << "-c";
  for (size_t i = 0; i < channels.size(); ++i) {
    if (i) os << '.';
    os << channels[i];
  }
  os << "-d" << embed_dim;
  return os.str();
}

Architecture Architecture::parse(const std::string& id) {
  Architecture a;
  a.channels.clear();
  if (id.rfind("cnn-in", 0) != 0) throw std::invalid_argument("bad architecture id: " + id);
  size_t pos = 6;
  size_t dash = id.find("-c", pos);
  if (dash == std::string::npos) throw std::invalid_argument("bad architecture id: " + id);
  a.input_size = std::stoi(id.substr(pos, dash - pos));
  pos = dash + 2;
  size_t dpos = id.find("-d", pos);
  if (dpos == std::string::npos) throw std::invalid_argument("bad architecture id: " + id);
  std::string chans = id.substr(pos, dpos - pos);
  std::istringstream cs(chans);
  std::string tok;
  while (std::getline(cs, tok, '.')) a.channels.push_back(std::stoi(tok));
  a.embed_dim = std::stoi(id.substr(dpos + 2));
  a.validate();
  return a;
}

void Architecture::validate() const {
  if (input_size < 8) throw std::invalid_argument("architecture: input_size too small");
  if (channels.empty()) throw std::invalid_argument("architecture: no conv blocks");
  if (embed_dim < 1) throw std::invalid_argument("architecture: bad embed_dim");
  int s = input_size;
  for (size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] < 1) throw std::invalid_argument("architecture: bad channel count");
    s = kernels::conv_out_extent(s, 3, 2, 1);
    if (s < 1) throw std::invalid_argument("architecture: too many blocks for input size");
  }
}

std::vector<int> Architecture::spatial_sizes() const {
  std::vector<int> out;
  int s = input_size;
  for (size_t i = 0; i < channels.size(); ++i) {
    s = kernels::conv_out_extent(s, 3, 2, 1);
    out.push_back(s);
  }
  return out;
}

Model::Model(Architecture arch, Normalization norm)
    : arch_(std::move(arch)), norm_(norm) {
  arch_.validate();
  layout();
}

void Model::layout() {
  size_t off = 0;
  conv_.clear();
  int in_c = 1;
  for (int oc : arch_.channels) {
    Segment s;
    s.w_off = off;
    s.w_len = static_cast<size_t>(oc) * in_c * 9;
    off += s.w_len;
    s.b_off = off;
    s.b_len = oc;
    off += s.b_len;
    conv_.push_back(s);
    in_c = oc;
  }
  embed_fc_.w_off = off;
  embed_fc_.w_len = static_cast<size_t>(in_c) * arch_.embed_dim;
  off += embed_fc_.w_len;
  embed_fc_.b_off = off;
  embed_fc_.b_len = arch_.embed_dim;
  off += embed_fc_.b_len;
  head_fc_.w_off = off;
  head_fc_.w_len = static_cast<size_t>(arch_.embed_dim) * arch_.n_classes;
  off += head_fc_.w_len;
  head_fc_.b_off = off;
  head_fc_.b_len = arch_.n_classes;
  off += head_fc_.b_len;
  params_.assign(off, 0.0);
}

void Model::init_params(Rng& rng) {
  int in_c = 1;
  for (size_t l = 0; l < conv_.size(); ++l) {
    const double std_dev = std::sqrt(2.0 / (in_c * 9.0));
    for (size_t i = 0; i < conv_[l].w_len; ++i) {
      params_[conv_[l].w_off + i] = rng.normal(0.0, std_dev);
    }
    for (size_t i = 0; i < conv_[l].b_len; ++i) params_[conv_[l].b_off + i] = 0.0;
    in_c = arch_.channels[l];
  }
  {
    const double std_dev = std::sqrt(2.0 / in_c);
    for (size_t i = 0; i < embed_fc_.w_len; ++i) {
      params_[embed_fc_.w_off + i] = rng.normal(0.0, std_dev);
    }
    for (size_t i = 0; i < embed_fc_.b_len; ++i) params_[embed_fc_.b_off + i] = 0.0;
  }
  {
    const double std_dev = std::sqrt(1.0 / arch_.embed_dim);
    for (size_t i = 0; i < head_fc_.w_len; ++i) {
      params_[head_fc_.w_off + i] = rng.normal(0.0, std_dev);
    }
    for (size_t i = 0; i < head_fc_.b_len; ++i) params_[head_fc_.b_off + i] = 0.0;
  }
}

void Model::forward(const std::vector<double>& images01, int batch, Activations& acts,
                    bool with_logits) const {
  const int S = arch_.input_size;
  const size_t img_len = static_cast<size_t>(S) * S;
  if (images01.size() != img_len * batch) {
    throw std::invalid_argument("forward: input size does not match architecture");
  }
  acts.batch = batch;
  acts.input_std.resize(images01.size());
  const double inv_std = 1.0 / norm_.stddev;
  for (size_t i = 0; i < images01.size(); ++i) {
    acts.input_std[i] = (images01[i] - norm_.mean) * inv_std;
  }

  const auto spatial = arch_.spatial_sizes();
  acts.conv_pre.resize(conv_.size());
  acts.conv_post.resize(conv_.size());
  const double* cur = acts.input_std.data();
  int cur_c = 1, cur_s = S;
  for (size_t l = 0; l < conv_.size(); ++l) {
    ConvDims d;
    d.batch = batch;
    d.in_c = cur_c;
    d.in_h = d.in_w = cur_s;
    d.out_c = arch_.channels[l];
    d.out_h = d.out_w = spatial[l];
    d.ksize = 3;
    d.stride = 2;
    d.pad = 1;
    const size_t out_len = static_cast<size_t>(batch) * d.out_c * d.out_h * d.out_w;
    acts.conv_pre[l].resize(out_len);
    acts.conv_post[l].resize(out_len);
    kernels::conv2d_forward(cur, params_.data() + conv_[l].w_off,
                            params_.data() + conv_[l].b_off, acts.conv_pre[l].data(), d);
    kernels::relu_forward(acts.conv_pre[l].data(), acts.conv_post[l].data(), out_len);
    cur = acts.conv_post[l].data();
    cur_c = d.out_c;
    cur_s = d.out_h;
  }

  acts.gap.resize(static_cast<size_t>(batch) * cur_c);
  kernels::global_avg_pool_forward(cur, acts.gap.data(), batch, cur_c, cur_s * cur_s);

  acts.embed.resize(static_cast<size_t>(batch) * arch_.embed_dim);
  kernels::linear_forward(acts.gap.data(), params_.data() + embed_fc_.w_off,
                          params_.data() + embed_fc_.b_off, acts.embed.data(), batch,
                          cur_c, arch_.embed_dim);

  if (with_logits) {
    acts.logits.resize(static_cast<size_t>(batch) * arch_.n_classes);
    kernels::linear_forward(acts.embed.data(), params_.data() + head_fc_.w_off,
                            params_.data() + head_fc_.b_off, acts.logits.data(), batch,
                            arch_.embed_dim, arch_.n_classes);
  } else {
    acts.logits.clear();
  }
}

void Model::backward(const Activations& acts, const std::vector<double>* dlogits,
                     const std::vector<double>* dembed_extra,
                     std::vector<double>& grad) const {
  if (grad.size() != params_.size()) {
    throw std::invalid_argument("backward: gradient buffer size mismatch");
  }
  const int batch = acts.batch;
  const int last_c = arch_.channels.back();
  const auto spatial = arch_.spatial_sizes();

  std::vector<double> dembed(static_cast<size_t>(batch) * arch_.embed_dim, 0.0);
  if (dlogits) {
    std::vector<double> gw(head_fc_.w_len), gb(head_fc_.b_len);
    kernels::linear_backward_filter(dlogits->data(), acts.embed.data(), gw.data(),
                                    gb.data(), batch, arch_.embed_dim, arch_.n_classes);
    for (size_t i = 0; i < gw.size(); ++i) grad[head_fc_.w_off + i] += gw[i];
    for (size_t i = 0; i < gb.size(); ++i) grad[head_fc_.b_off + i] += gb[i];
    kernels::linear_backward_data(dlogits->data(), params_.data() + head_fc_.w_off,
                                  dembed.data(), batch, arch_.embed_dim, arch_.n_classes);
  }
  if (dembed_extra) {
    for (size_t i = 0; i < dembed.size(); ++i) dembed[i] += (*dembed_extra)[i];
  }

  std::vector<double> dgap(static_cast<size_t>(batch) * last_c);
  {
    std::vector<double> gw(embed_fc_.w_len), gb(embed_fc_.b_len);
    kernels::linear_backward_filter(dembed.data(), acts.gap.data(), gw.data(), gb.data(),
                                    batch, last_c, arch_.embed_dim);
    for (size_t i = 0; i < gw.size(); ++i) grad[embed_fc_.w_off + i] += gw[i];
    for (size_t i = 0; i < gb.size(); ++i) grad[embed_fc_.b_off + i] += gb[i];
    kernels::linear_backward_data(dembed.data(), params_.data() + embed_fc_.w_off,
                                  dgap.data(), batch, last_c, arch_.embed_dim);
  }

  const int last_s = spatial.back();
  std::vector<double> dpost(static_cast<size_t>(batch) * last_c * last_s * last_s);
  kernels::global_avg_pool_backward(dgap.data(), dpost.data(), batch, last_c,
                                    last_s * last_s);

  for (int l = static_cast<int>(conv_.size()) - 1; l >= 0; --l) {
    const int in_c = (l == 0) ? 1 : arch_.channels[l - 1];
    const int in_s = (l == 0) ? arch_.input_size : spatial[l - 1];
    ConvDims d;
    d.batch = batch;
    d.in_c = in_c;
    d.in_h = d.in_w = in_s;
    d.out_c = arch_.channels[l];
    d.out_h = d.out_w = spatial[l];
    d.ksize = 3;
    d.stride = 2;
    d.pad = 1;

    std::vector<double> dpre(dpost.size());
    kernels::relu_backward(dpost.data(), acts.conv_pre[l].data(), dpre.data(),
                           dpre.size());

    const double* input = (l == 0) ? acts.input_std.data() : acts.conv_post[l - 1].data();
    std::vector<double> gw(conv_[l].w_len), gb(conv_[l].b_len);
    kernels::conv2d_backward_filter(dpre.data(), input, gw.data(), gb.data(), d);
    for (size_t i = 0; i < gw.size(); ++i) grad[conv_[l].w_off + i] += gw[i];
    for (size_t i = 0; i < gb.size(); ++i) grad[conv_[l].b_off + i] += gb[i];

    if (l > 0) {
      // input gradient not needed at the first block; pixels are leaves
      std::vector<double> dinput(static_cast<size_t>(batch) * in_c * in_s * in_s);
      kernels::conv2d_backward_data(dpre.data(), params_.data() + conv_[l].w_off,
                                    dinput.data(), d);
      dpost = std::move(dinput);
    }
  }
}

std::vector<double> Model::embed_batch(const std::vector<double>& images01,
                                       int batch) const {
  Activations acts;
  forward(images01, batch, acts, /*with_logits=*/false);
  return std::move(acts.embed);
}

std::vector<double> Model::logits_batch(const std::vector<double>& images01,
                                        int batch) const {
  Activations acts;
  forward(images01, batch, acts, /*with_logits=*/true);
  return std::move(acts.logits);
}

std::vector<double> Model::head_logits(const std::vector<double>& embed, int batch) const {
  if (embed.size() != static_cast<size_t>(batch) * arch_.embed_dim) {
    throw std::invalid_argument("head_logits: embedding dim mismatch");
  }
  std::vector<double> logits(static_cast<size_t>(batch) * arch_.n_classes);
  kernels::linear_forward(embed.data(), params_.data() + head_fc_.w_off,
                          params_.data() + head_fc_.b_off, logits.data(), batch,
                          arch_.embed_dim, arch_.n_classes);
  return logits;
}

int Model::argmax_class(const double* logits, int n_classes) {
  int best = 0;
  for (int j = 1; j < n_classes; ++j) {
    if (logits[j] > logits[best]) best = j;  // ties keep the lowest index
  }
  return best;
}

std::vector<int> Model::predict_batch(const std::vector<double>& images01,
                                      int batch) const {
  const auto logits = logits_batch(images01, batch);
  std::vector<int> preds(batch);
  for (int i = 0; i < batch; ++i) {
    preds[i] = argmax_class(logits.data() + static_cast<size_t>(i) * arch_.n_classes,
                            arch_.n_classes);
  }
  return preds;
}

// ---- checkpoints -----------------------------------------------------------

Checkpoint make_checkpoint(const Model& model, const std::string& config_hash) {
  Checkpoint c;
  c.architecture_id = model.arch().id();
  c.embed_dim = model.arch().embed_dim;
  c.n_classes = model.arch().n_classes;
  c.norm = model.norm();
  c.config_hash = config_hash;
  c.params = model.params();
  return c;
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  Model m(Architecture::parse(ckpt.architecture_id), ckpt.norm);
  if (m.param_count() != ckpt.params.size()) {
    throw std::runtime_error("checkpoint parameter count does not match architecture");
  }
  m.params() = ckpt.params;
  return m;
}

namespace {
constexpr char kMagic[4] = {'D', 'B', 'C', 'K'};
constexpr uint32_t kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  nlohmann::ordered_json header;
  header["format_version"] = kCheckpointVersion;
  header["architecture_id"] = ckpt.architecture_id;
  header["embed_dim"] = ckpt.embed_dim;
  header["n_classes"] = ckpt.n_classes;
  header["normalization"] = {{"mean", ckpt.norm.mean}, {"std", ckpt.norm.stddev}};
  header["config_hash"] = ckpt.config_hash;
  header["param_count"] = ckpt.params.size();
  const std::string hdr = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  out.write(kMagic, 4);
  const uint32_t version = kCheckpointVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const uint32_t hdr_len = static_cast<uint32_t>(hdr.size());
  out.write(reinterpret_cast<const char*>(&hdr_len), sizeof(hdr_len));
  out.write(hdr.data(), hdr.size());
  const char* pdata = reinterpret_cast<const char*>(ckpt.params.data());
  const size_t pbytes = ckpt.params.size() * sizeof(double);
  out.write(pdata, pbytes);
  const uint64_t checksum = fnv1a(pdata, pbytes);
  out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  if (!out) throw std::runtime_error("short write: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("corrupt checkpoint (bad magic): " + path.string());
  }
  uint32_t version = 0, hdr_len = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in || version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint version mismatch: " + path.string());
  }
  in.read(reinterpret_cast<char*>(&hdr_len), sizeof(hdr_len));
  if (!in || hdr_len == 0 || hdr_len > (1u << 20)) {
    throw std::runtime_error("corrupt checkpoint (bad header): " + path.string());
  }
  std::string hdr(hdr_len, '\0');
  in.read(hdr.data(), hdr_len);
  if (!in) throw std::runtime_error("corrupt checkpoint (truncated header): " + path.string());

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hdr);
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error("corrupt checkpoint (header parse): " + path.string());
  }

  Checkpoint c;
  c.format_version = header.at("format_version").get<int>();
  c.architecture_id = header.at("architecture_id").get<std::string>();
  c.embed_dim = header.at("embed_dim").get<int>();
  c.n_classes = header.at("n_classes").get<int>();
  c.norm.mean = header.at("normalization").at("mean").get<double>();
  c.norm.stddev = header.at("normalization").at("std").get<double>();
  c.config_hash = header.at("config_hash").get<std::string>();
  const size_t count = header.at("param_count").get<size_t>();

  c.params.resize(count);
  in.read(reinterpret_cast<char*>(c.params.data()), count * sizeof(double));
  if (!in) throw std::runtime_error("corrupt checkpoint (truncated params): " + path.string());
  uint64_t stored = 0;
  in.read(reinterpret_cast<char*>(&stored), sizeof(stored));
  if (!in) throw std::runtime_error("corrupt checkpoint (missing checksum): " + path.string());
  const uint64_t computed =
      fnv1a(reinterpret_cast<const char*>(c.params.data()), count * sizeof(double));
  if (stored != computed) {
    throw std::runtime_error("corrupt checkpoint (checksum mismatch): " + path.string());
  }
  return c;
}

}  // namespace debias
