#include "debias/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace debias {

int64_t ConfusionMatrix::total() const {
  int64_t t = 0;
  for (const auto& row : counts)
    for (int64_t v : row) t += v;
  return t;
}

int64_t ConfusionMatrix::trace() const {
  int64_t t = 0;
  for (int i = 0; i < kNumClasses; ++i) t += counts[i][i];
  return t;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& labels,
                                 const std::vector<int>& predictions) {
  if (labels.size() != predictions.size()) {
    throw std::invalid_argument("confusion_matrix: length mismatch");
  }
  ConfusionMatrix cm;
  for (size_t i = 0; i < labels.size(); ++i) {
    const int t = labels[i], p = predictions[i];
    if (t < 0 || t >= kNumClasses || p < 0 || p >= kNumClasses) {
      throw std::invalid_argument("confusion_matrix: class id out of range");
    }
    ++cm.counts[t][p];
  }
  return cm;
}

ClassReport classification_report(const ConfusionMatrix& cm) {
  ClassReport rep;
  const int64_t total = cm.total();
  if (total == 0) throw std::invalid_argument("classification_report: empty matrix");
  rep.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);

  double sp = 0.0, sr = 0.0, sf = 0.0;
  for (int j = 0; j < kNumClasses; ++j) {
    int64_t col = 0, row = 0;
    for (int i = 0; i < kNumClasses; ++i) {
      col += cm.counts[i][j];
      row += cm.counts[j][i];
    }
    ClassMetrics& m = rep.per_class[j];
    m.support = row;
    if (col == 0) {
      m.zero_precision_denominator = true;
      m.precision = 0.0;
    } else {
      m.precision = static_cast<double>(cm.counts[j][j]) / static_cast<double>(col);
    }
    if (row == 0) {
      m.zero_recall_denominator = true;
      m.recall = 0.0;
    } else {
      m.recall = static_cast<double>(cm.counts[j][j]) / static_cast<double>(row);
    }
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    sp += m.precision;
    sr += m.recall;
    sf += m.f1;
  }
  rep.macro_precision = sp / kNumClasses;
  rep.macro_recall = sr / kNumClasses;
  rep.macro_f1 = sf / kNumClasses;
  return rep;
}

std::string report_json(const ClassReport& report) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["accuracy"] = report.accuracy;
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& m = report.per_class[c];
    nlohmann::ordered_json e;
    e["class"] = kClassNames[c];
    e["precision"] = m.precision;
    e["recall"] = m.recall;
    e["f1"] = m.f1;
    e["support"] = m.support;
    nlohmann::ordered_json flags = nlohmann::ordered_json::array();
    if (m.zero_precision_denominator) flags.push_back("zero_predicted_instances");
    if (m.zero_recall_denominator) flags.push_back("zero_true_instances");
    e["flags"] = std::move(flags);
    classes.push_back(std::move(e));
  }
  j["classes"] = std::move(classes);
  j["macro"] = {{"precision", report.macro_precision},
                {"recall", report.macro_recall},
                {"f1", report.macro_f1}};
  return j.dump(2) + "\n";
}

std::string confusion_json(const ConfusionMatrix& cm) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["classes"] = kClassNames;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int i = 0; i < kNumClasses; ++i) {
    rows.push_back(cm.counts[i]);
  }
  j["counts"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::vector<int> predict_indices(const Model& model, const Dataset& ds,
                                 const std::vector<int>& indices, int batch_size) {
  const int S = model.arch().input_size;
  const size_t img_len = static_cast<size_t>(S) * S;
  std::vector<int> preds;
  preds.reserve(indices.size());
  for (size_t start = 0; start < indices.size(); start += batch_size) {
    const size_t end = std::min(start + batch_size, indices.size());
    const int nb = static_cast<int>(end - start);
    std::vector<double> batch(img_len * nb);
    for (int i = 0; i < nb; ++i) {
      const Image img = to_image(ds.samples[indices[start + i]].pixels);
      if (img.height != S || img.width != S) {
        throw std::invalid_argument("predict_indices: image size mismatch");
      }
      std::copy(img.pixels.begin(), img.pixels.end(), batch.begin() + i * img_len);
    }
    const auto p = model.predict_batch(batch, nb);
    preds.insert(preds.end(), p.begin(), p.end());
  }
  return preds;
}

SwapEvalResult background_swap_eval(const BatchPredictor& predict, const Dataset& ds,
                                    const std::vector<int>& indices) {
  if (indices.empty()) throw std::invalid_argument("background_swap_eval: no samples");
  const int S = ds.spec.image_size;

  size_t correct_orig = 0, correct_swap = 0;
  constexpr int kBatch = 16;
  for (size_t start = 0; start < indices.size(); start += kBatch) {
    const size_t end = std::min(start + static_cast<size_t>(kBatch), indices.size());
    std::vector<int> chunk(indices.begin() + start, indices.begin() + end);
    const int nb = static_cast<int>(chunk.size());

    std::vector<Image> orig, swapped;
    std::vector<int> tex_orig(nb), tex_swap(nb);
    orig.reserve(nb);
    swapped.reserve(nb);
    for (int i = 0; i < nb; ++i) {
      const ImageSample& s = ds.samples[chunk[i]];
      if (s.render_seed == 0) {
        throw std::invalid_argument(
            "background_swap_eval: sample lacks a render seed (non-synthetic data)");
      }
      orig.push_back(to_image(s.pixels));
      tex_orig[i] = s.texture_id;

      Rng swap_rng(mix_seed(mix_seed(ds.spec.seed, "texture-swap"), s.sample_id));
      int new_tex = static_cast<int>(swap_rng.uniform_int(kNumTextures - 1));
      if (new_tex >= s.texture_id) ++new_tex;
      tex_swap[i] = new_tex;
      swapped.push_back(
          to_image(render_scene(s.label, new_tex, s.render_seed, S, ds.spec.noise_level)));
    }
    const auto p_orig = predict(chunk, orig, tex_orig);
    const auto p_swap = predict(chunk, swapped, tex_swap);
    for (int i = 0; i < nb; ++i) {
      const int label = ds.samples[chunk[i]].label;
      if (p_orig[i] == label) ++correct_orig;
      if (p_swap[i] == label) ++correct_swap;
    }
  }
  SwapEvalResult r;
  const double n = static_cast<double>(indices.size());
  r.in_dist_accuracy = correct_orig / n;
  r.swapped_accuracy = correct_swap / n;
  return r;
}

SwapEvalResult background_swap_eval(const Model& model, const Dataset& ds,
                                    const std::vector<int>& indices) {
  const int S = model.arch().input_size;
  if (ds.spec.image_size != S) {
    throw std::invalid_argument("background_swap_eval: image size mismatch");
  }
  const size_t img_len = static_cast<size_t>(S) * S;
  BatchPredictor predict = [&](const std::vector<int>&, const std::vector<Image>& images,
                               const std::vector<int>&) {
    std::vector<double> batch(img_len * images.size());
    for (size_t i = 0; i < images.size(); ++i) {
      std::copy(images[i].pixels.begin(), images[i].pixels.end(),
                batch.begin() + i * img_len);
    }
    return model.predict_batch(batch, static_cast<int>(images.size()));
  };
  return background_swap_eval(predict, ds, indices);
}

std::vector<EmbeddingRow> export_embeddings(const Model& model, const Dataset& ds,
                                            const std::vector<int>& indices,
                                            int batch_size) {
  const int S = model.arch().input_size;
  const int d = model.arch().embed_dim;
  const size_t img_len = static_cast<size_t>(S) * S;
  std::vector<EmbeddingRow> rows;
  rows.reserve(indices.size());
  for (size_t start = 0; start < indices.size(); start += batch_size) {
    const size_t end = std::min(start + static_cast<size_t>(batch_size), indices.size());
    const int nb = static_cast<int>(end - start);
    std::vector<double> batch(img_len * nb);
    for (int i = 0; i < nb; ++i) {
      const Image img = to_image(ds.samples[indices[start + i]].pixels);
      std::copy(img.pixels.begin(), img.pixels.end(), batch.begin() + i * img_len);
    }
    const auto embed = model.embed_batch(batch, nb);
    for (int i = 0; i < nb; ++i) {
      EmbeddingRow row;
      row.sample_id = ds.samples[indices[start + i]].sample_id;
      row.label = ds.samples[indices[start + i]].label;
      row.values.assign(embed.begin() + static_cast<size_t>(i) * d,
                        embed.begin() + static_cast<size_t>(i + 1) * d);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string embeddings_csv(const std::vector<EmbeddingRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "sample_id,label";
  if (!rows.empty()) {
    for (size_t k = 0; k < rows[0].values.size(); ++k) os << ",e_" << (k + 1);
  }
  os << "\n";
  for (const auto& r : rows) {
    os << r.sample_id << "," << kClassNames[r.label];
    for (double v : r.values) os << "," << v;
    os << "\n";
  }
  return os.str();
}

namespace {

// Cyclic Jacobi eigendecomposition for a symmetric matrix.
void jacobi_eigen(std::vector<double>& a, int n, std::vector<double>& eigvals,
                  std::vector<double>& eigvecs) {
  eigvecs.assign(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) eigvecs[static_cast<size_t>(i) * n + i] = 1.0;

  auto at = [&](std::vector<double>& m, int r, int c) -> double& {
    return m[static_cast<size_t>(r) * n + c];
  };

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += at(a, p, q) * at(a, p, q);
    if (off < 1e-22) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(a, p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double app = at(a, p, p);
        const double aqq = at(a, q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(a, k, p);
          const double akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(a, p, k);
          const double aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = at(eigvecs, k, p);
          const double vkq = at(eigvecs, k, q);
          at(eigvecs, k, p) = c * vkp - s * vkq;
          at(eigvecs, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  eigvals.resize(n);
  for (int i = 0; i < n; ++i) eigvals[i] = at(a, i, i);
}

}  // namespace

PcaResult pca_project(const std::vector<std::vector<double>>& rows, int dims) {
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw std::invalid_argument("pca_project: no rows");
  const int d = static_cast<int>(rows[0].size());
  if (dims < 1 || dims > d) throw std::invalid_argument("pca_project: bad dims");
  if (n < dims) throw std::invalid_argument("pca_project: fewer samples than dims");

  PcaResult res;
  res.mean.assign(d, 0.0);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != d) {
      throw std::invalid_argument("pca_project: ragged rows");
    }
    for (int k = 0; k < d; ++k) res.mean[k] += r[k];
  }
  for (int k = 0; k < d; ++k) res.mean[k] /= n;

  std::vector<double> cov(static_cast<size_t>(d) * d, 0.0);
  for (const auto& r : rows) {
    for (int i = 0; i < d; ++i) {
      const double xi = r[i] - res.mean[i];
      for (int j = i; j < d; ++j) {
        cov[static_cast<size_t>(i) * d + j] += xi * (r[j] - res.mean[j]);
      }
    }
  }
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double v = cov[static_cast<size_t>(i) * d + j] / n;
      cov[static_cast<size_t>(i) * d + j] = v;
      cov[static_cast<size_t>(j) * d + i] = v;
    }
  }

  std::vector<double> eigvals, eigvecs;
  jacobi_eigen(cov, d, eigvals, eigvecs);

  std::vector<int> order(d);
  for (int i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (eigvals[a] != eigvals[b]) return eigvals[a] > eigvals[b];
    return a < b;
  });

  res.components.resize(dims);
  res.eigenvalues.resize(dims);
  for (int c = 0; c < dims; ++c) {
    const int col = order[c];
    res.eigenvalues[c] = eigvals[col];
    res.components[c].resize(d);
    for (int k = 0; k < d; ++k) {
      res.components[c][k] = eigvecs[static_cast<size_t>(k) * d + col];
    }
    // deterministic sign: largest-magnitude coordinate positive
    int arg = 0;
    for (int k = 1; k < d; ++k) {
      if (std::abs(res.components[c][k]) > std::abs(res.components[c][arg])) arg = k;
    }
    if (res.components[c][arg] < 0.0) {
      for (double& v : res.components[c]) v = -v;
    }
  }

  res.coords.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < std::min(dims, 2); ++c) {
      double acc = 0.0;
      for (int k = 0; k < d; ++k) acc += (rows[i][k] - res.mean[k]) * res.components[c][k];
      res.coords[i][c] = acc;
    }
    if (dims < 2) res.coords[i][1] = 0.0;
  }
  return res;
}

std::string pca_csv(const std::vector<EmbeddingRow>& rows, const PcaResult& pca) {
  std::ostringstream os;
  os.precision(17);
  os << "sample_id,label,pc1,pc2\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    os << rows[i].sample_id << "," << kClassNames[rows[i].label] << ","
       << pca.coords[i][0] << "," << pca.coords[i][1] << "\n";
  }
  return os.str();
}

}  // namespace debias
