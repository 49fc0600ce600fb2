#include "debias/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "debias/sampler.hpp"

namespace debias {

std::string to_string(TrainMode mode) {
  return mode == TrainMode::baseline ? "baseline" : "unlearn";
}

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "baseline") return TrainMode::baseline;
  if (s == "unlearn") return TrainMode::unlearn;
  throw std::invalid_argument("unknown train mode: " + s);
}

void TrainConfig::validate() const {
  hp.validate();
  arch.validate();
}

std::string TrainConfig::canonical_json() const {
  nlohmann::ordered_json j;
  j["mode"] = to_string(mode);
  j["margin"] = hp.margin;
  j["lambda"] = hp.lambda;
  j["lr"] = hp.lr;
  j["epochs"] = hp.epochs;
  j["batch_size"] = hp.batch_size;
  j["seed"] = hp.seed;
  j["architecture"] = arch.id();
  j["augment"] = augment;
  return j.dump();
}

std::string TrainConfig::config_hash() const {
  const std::string s = canonical_json();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(s.data(), s.size())));
  return buf;
}

Adam::Adam(size_t n, double lr, double beta1, double beta2, double eps)
    : m_(n, 0.0), v_(n, 0.0), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

namespace {

// Converts samples to a flat [0,1] batch, optionally augmented.
// Parameter sampling is serial in index order; the transforms themselves
// run in parallel.
std::vector<double> assemble_batch(const Dataset& ds, const std::vector<int>& indices,
                                   Rng* aug_rng) {
  const int size = ds.spec.image_size;
  const size_t img_len = static_cast<size_t>(size) * size;
  std::vector<double> batch(img_len * indices.size());
  std::vector<AugmentParams> params;
  if (aug_rng) {
    params.reserve(indices.size());
    for (size_t i = 0; i < indices.size(); ++i) params.push_back(sample_augment_params(*aug_rng));
  }
  const long n = static_cast<long>(indices.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    Image img = to_image(ds.samples[indices[i]].pixels);
    if (aug_rng) img = apply_augment(img, params[i]);
    std::copy(img.pixels.begin(), img.pixels.end(), batch.begin() + i * img_len);
  }
  return batch;
}

double validation_accuracy(const Model& model, const Dataset& ds,
                           const std::vector<int>& val_indices, int batch_size) {
  if (val_indices.empty()) return 0.0;
  size_t correct = 0;
  for (size_t start = 0; start < val_indices.size(); start += batch_size) {
    const size_t end = std::min(start + batch_size, val_indices.size());
    std::vector<int> chunk(val_indices.begin() + start, val_indices.begin() + end);
    const auto batch = assemble_batch(ds, chunk, nullptr);
    const auto preds = model.predict_batch(batch, static_cast<int>(chunk.size()));
    for (size_t i = 0; i < chunk.size(); ++i) {
      if (preds[i] == ds.samples[chunk[i]].label) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(val_indices.size());
}

}  // namespace

TrainRun train(const Dataset& ds, const TrainConfig& cfg, const Checkpoint* init) {
  cfg.validate();
  if (ds.spec.image_size != cfg.arch.input_size) {
    throw std::invalid_argument("dataset image size does not match architecture input");
  }
  const auto train_indices = ds.split_indices("train");
  const auto val_indices = ds.split_indices("val");
  if (train_indices.empty()) throw std::invalid_argument("train split is empty");

  Model model(cfg.arch, ds.norm);
  if (init) {
    if (init->architecture_id != cfg.arch.id()) {
      throw std::runtime_error("architecture mismatch: checkpoint is " +
                               init->architecture_id + ", config wants " + cfg.arch.id());
    }
    if (init->norm.mean != ds.norm.mean || init->norm.stddev != ds.norm.stddev) {
      throw std::runtime_error("normalization stats mismatch between checkpoint and dataset");
    }
    model = model_from_checkpoint(*init);
  } else {
    Rng init_rng(mix_seed(cfg.hp.seed, "init"));
    model.init_params(init_rng);
  }

  Rng shuffle_rng(mix_seed(cfg.hp.seed, "shuffle"));
  Rng aug_ce_rng(mix_seed(cfg.hp.seed, "augment-ce"));
  Rng triplet_rng(mix_seed(cfg.hp.seed, "triplet"));
  Rng aug_tr_rng(mix_seed(cfg.hp.seed, "augment-triplet"));

  const bool unlearn = cfg.mode == TrainMode::unlearn;
  TripletSampler sampler(ds.samples, train_indices);
  if (unlearn && sampler.seafloor_indices().empty()) {
    throw NoNegativeAvailable("unlearn mode requires seafloor samples in the train split");
  }
  std::vector<TripletBatch> triplet_queue;
  size_t triplet_pos = 0;

  Adam adam(model.param_count(), cfg.hp.lr);
  std::vector<double> grad(model.param_count());
  const int B = cfg.hp.batch_size;
  const int d = cfg.arch.embed_dim;

  TrainRun run;
  run.config = cfg;
  run.steps_per_epoch = steps_per_epoch_for(static_cast<int>(train_indices.size()), B);
  double best_val = -1.0;

  for (int epoch = 0; epoch < cfg.hp.epochs; ++epoch) {
    std::vector<int> order = train_indices;
    shuffle_rng.shuffle(order);

    double sum_ce = 0.0, sum_tr = 0.0, sum_total = 0.0;
    int steps = 0;
    for (size_t start = 0; start < order.size(); start += B) {
      const size_t end = std::min(start + static_cast<size_t>(B), order.size());
      std::vector<int> ce_indices(order.begin() + start, order.begin() + end);
      const int nb = static_cast<int>(ce_indices.size());

      const auto images = assemble_batch(ds, ce_indices, cfg.augment ? &aug_ce_rng : nullptr);
      Model::Activations acts;
      model.forward(images, nb, acts, /*with_logits=*/true);

      std::vector<int> labels(nb);
      for (int i = 0; i < nb; ++i) labels[i] = ds.samples[ce_indices[i]].label;
      const double ce = cross_entropy(acts.logits, labels, cfg.arch.n_classes);
      const auto dlogits = cross_entropy_backward(acts.logits, labels, cfg.arch.n_classes);

      std::fill(grad.begin(), grad.end(), 0.0);
      model.backward(acts, &dlogits, nullptr, grad);

      double trip = 0.0;
      if (unlearn) {
        if (triplet_pos >= triplet_queue.size()) {
          triplet_queue = sampler.epoch(B, triplet_rng);
          triplet_pos = 0;
        }
        const TripletBatch& tb = triplet_queue[triplet_pos++];
        const int nt = static_cast<int>(tb.triplets.size());
        std::vector<int> tri_indices;
        tri_indices.reserve(3 * nt);
        for (const auto& t : tb.triplets) tri_indices.push_back(t.anchor);
        for (const auto& t : tb.triplets) tri_indices.push_back(t.positive);
        for (const auto& t : tb.triplets) tri_indices.push_back(t.negative);

        const auto tri_images =
            assemble_batch(ds, tri_indices, cfg.augment ? &aug_tr_rng : nullptr);
        Model::Activations tri_acts;
        model.forward(tri_images, 3 * nt, tri_acts, /*with_logits=*/false);

        const size_t row = static_cast<size_t>(nt) * d;
        std::vector<double> za(tri_acts.embed.begin(), tri_acts.embed.begin() + row);
        std::vector<double> zp(tri_acts.embed.begin() + row, tri_acts.embed.begin() + 2 * row);
        std::vector<double> zn(tri_acts.embed.begin() + 2 * row, tri_acts.embed.end());

        trip = triplet_loss(za, zp, zn, nt, d, cfg.hp.margin);
        std::vector<double> ga, gp, gn;
        triplet_loss_backward(za, zp, zn, nt, d, cfg.hp.margin, ga, gp, gn);

        std::vector<double> dembed(3 * row);
        for (size_t i = 0; i < row; ++i) {
          dembed[i] = cfg.hp.lambda * ga[i];
          dembed[row + i] = cfg.hp.lambda * gp[i];
          dembed[2 * row + i] = cfg.hp.lambda * gn[i];
        }
        model.backward(tri_acts, nullptr, &dembed, grad);
      }

      const LossValue lv = total_loss(ce, trip, cfg.hp.lambda);
      if (!std::isfinite(lv.total)) {
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1));
      }
      adam.step(model.params(), grad);

      sum_ce += ce;
      sum_tr += trip;
      sum_total += lv.total;
      ++steps;
    }

    EpochStats es;
    es.ce = sum_ce / steps;
    es.triplet = sum_tr / steps;
    es.total = sum_total / steps;
    es.val_accuracy = validation_accuracy(model, ds, val_indices, B);
    run.history.push_back(es);

    if (es.val_accuracy > best_val) {
      best_val = es.val_accuracy;
      run.best_epoch = epoch;
      run.best_checkpoint = make_checkpoint(model, cfg.config_hash());
    }
  }

  run.final_checkpoint = make_checkpoint(model, cfg.config_hash());
  return run;
}

SanityReport sanity_checks(const Dataset& ds, const Model& model) {
  SanityReport report;
  auto add = [&](const std::string& name, bool passed, const std::string& note) {
    report.checks.push_back({name, passed, note});
    if (!passed) report.ok = false;
  };

  const bool size_ok = ds.spec.image_size == model.arch().input_size;
  add("image_size", size_ok,
      "dataset " + std::to_string(ds.spec.image_size) + " vs model " +
          std::to_string(model.arch().input_size));

  bool labels_ok = true;
  for (const auto& s : ds.samples) {
    if (s.label < 0 || s.label >= kNumClasses) {
      labels_ok = false;
      break;
    }
  }
  add("label_range", labels_ok, labels_ok ? "all labels valid" : "label out of range");

  bool triplet_ok = true;
  std::string triplet_note = "anchor/positive class match, negatives seafloor";
  try {
    const auto train_indices = ds.split_indices("train");
    TripletSampler sampler(ds.samples, train_indices);
    Rng rng(123);
    int checked = 0;
    for (int a : sampler.object_indices()) {
      if (checked++ >= 8) break;
      const Triplet t = sampler.sample_triplet(a, rng);
      if (ds.samples[t.positive].label != ds.samples[t.anchor].label ||
          ds.samples[t.negative].label != kSeafloorClass ||
          (t.positive == t.anchor && sampler.object_indices().size() > 1)) {
        triplet_ok = false;
        triplet_note = "triplet constraint violated";
        break;
      }
    }
  } catch (const std::exception& e) {
    triplet_ok = false;
    triplet_note = e.what();
  }
  add("triplet_constraints", triplet_ok, triplet_note);

  bool pass_ok = size_ok;
  std::string pass_note = size_ok ? "" : "skipped: image size mismatch";
  if (size_ok) {
    try {
      const auto train_indices = ds.split_indices("train");
      const int nb = std::min<int>(4, static_cast<int>(train_indices.size()));
      std::vector<int> chunk(train_indices.begin(), train_indices.begin() + nb);
      std::vector<double> batch;
      {
        const size_t img_len =
            static_cast<size_t>(ds.spec.image_size) * ds.spec.image_size;
        batch.resize(img_len * nb);
        for (int i = 0; i < nb; ++i) {
          const Image img = to_image(ds.samples[chunk[i]].pixels);
          std::copy(img.pixels.begin(), img.pixels.end(), batch.begin() + i * img_len);
        }
      }
      Model::Activations acts;
      model.forward(batch, nb, acts, true);
      std::vector<int> labels(nb);
      for (int i = 0; i < nb; ++i) labels[i] = ds.samples[chunk[i]].label;
      const double ce = cross_entropy(acts.logits, labels, model.arch().n_classes);
      const auto dlogits = cross_entropy_backward(acts.logits, labels, model.arch().n_classes);
      std::vector<double> grad(model.param_count(), 0.0);
      model.backward(acts, &dlogits, nullptr, grad);
      bool finite = std::isfinite(ce);
      for (double g : grad) {
        if (!std::isfinite(g)) {
          finite = false;
          break;
        }
      }
      pass_ok = finite;
      pass_note = finite ? "forward/backward finite" : "non-finite value in pass";
    } catch (const std::exception& e) {
      pass_ok = false;
      pass_note = e.what();
    }
  }
  add("forward_backward", pass_ok, pass_note);
  return report;
}

std::string history_json(const TrainRun& run) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["mode"] = to_string(run.config.mode);
  j["config"] = nlohmann::ordered_json::parse(run.config.canonical_json());
  j["config_hash"] = run.config.config_hash();
  nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
  for (size_t i = 0; i < run.history.size(); ++i) {
    const auto& e = run.history[i];
    epochs.push_back({{"epoch", i + 1},
                      {"ce", e.ce},
                      {"triplet", e.triplet},
                      {"total", e.total},
                      {"val_accuracy", e.val_accuracy}});
  }
  j["epochs"] = std::move(epochs);
  j["best_epoch"] = run.best_epoch + 1;
  j["best_val_accuracy"] = run.history.empty() ? 0.0 : run.history[run.best_epoch].val_accuracy;
  return j.dump(2) + "\n";
}

}  // namespace debias
