#include "debias/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace debias {

SegMode seg_mode_from_string(const std::string& s) {
  if (s == "grid") return SegMode::grid;
  if (s == "slic") return SegMode::slic;
  throw std::invalid_argument("unknown segmentation mode: " + s);
}

std::string to_string(SegMode m) { return m == SegMode::grid ? "grid" : "slic"; }

namespace {

SegmentMap segment_grid(const Image& img, int g) {
  if (g < 1) throw std::invalid_argument("grid_size must be >= 1");
  SegmentMap seg;
  seg.height = img.height;
  seg.width = img.width;
  seg.labels.resize(img.size());
  const int tile_h = std::max(1, img.height / g);
  const int tile_w = std::max(1, img.width / g);
  const int gy = std::min(g, img.height);
  const int gx = std::min(g, img.width);
  for (int y = 0; y < img.height; ++y) {
    const int ty = std::min(y / tile_h, gy - 1);  // last row absorbs remainder
    for (int x = 0; x < img.width; ++x) {
      const int tx = std::min(x / tile_w, gx - 1);
      seg.labels[static_cast<size_t>(y) * img.width + x] = ty * gx + tx;
    }
  }
  seg.n_segments = gy * gx;
  return seg;
}

// Relabels to first-occurrence order and enforces 4-connectivity: within
// each raw label, the largest component keeps it and every smaller
// component is absorbed by a bordering neighbor.
SegmentMap finalize_segments(int height, int width, std::vector<int> raw) {
  const size_t n = static_cast<size_t>(height) * width;

  // connected components over equal raw labels, row-major discovery
  std::vector<int> comp(n, -1);
  std::vector<std::vector<size_t>> comp_pixels;
  for (size_t start = 0; start < n; ++start) {
    if (comp[start] != -1) continue;
    const int id = static_cast<int>(comp_pixels.size());
    comp_pixels.emplace_back();
    std::queue<size_t> q;
    q.push(start);
    comp[start] = id;
    while (!q.empty()) {
      const size_t p = q.front();
      q.pop();
      comp_pixels[id].push_back(p);
      const int y = static_cast<int>(p) / width;
      const int x = static_cast<int>(p) % width;
      const int dy[4] = {-1, 1, 0, 0};
      const int dx[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int ny = y + dy[k], nx = x + dx[k];
        if (ny < 0 || ny >= height || nx < 0 || nx >= width) continue;
        const size_t np = static_cast<size_t>(ny) * width + nx;
        if (comp[np] == -1 && raw[np] == raw[p]) {
          comp[np] = id;
          q.push(np);
        }
      }
    }
  }

  // largest component per raw label survives
  std::vector<int> keep;  // component ids that keep their label
  {
    std::vector<int> best_for_label;
    for (int c = 0; c < static_cast<int>(comp_pixels.size()); ++c) {
      const int label = raw[comp_pixels[c][0]];
      if (label >= static_cast<int>(best_for_label.size())) {
        best_for_label.resize(label + 1, -1);
      }
      if (best_for_label[label] == -1 ||
          comp_pixels[c].size() > comp_pixels[best_for_label[label]].size()) {
        best_for_label[label] = c;
      }
    }
    keep.assign(comp_pixels.size(), 0);
    for (int c : best_for_label) {
      if (c >= 0) keep[c] = 1;
    }
  }

  // absorb orphan components into a 4-neighbor, in discovery order
  for (int c = 0; c < static_cast<int>(comp_pixels.size()); ++c) {
    if (keep[c]) continue;
    int target = -1;
    for (size_t p : comp_pixels[c]) {
      const int y = static_cast<int>(p) / width;
      const int x = static_cast<int>(p) % width;
      const int dy[4] = {-1, 0, 0, 1};
      const int dx[4] = {0, -1, 1, 0};
      for (int k = 0; k < 4 && target == -1; ++k) {
        const int ny = y + dy[k], nx = x + dx[k];
        if (ny < 0 || ny >= height || nx < 0 || nx >= width) continue;
        const size_t np = static_cast<size_t>(ny) * width + nx;
        if (comp[np] != c) target = comp[np];
      }
      if (target != -1) break;
    }
    // merge: adopt the target component's membership
    for (size_t p : comp_pixels[c]) comp[p] = target;
    auto& tp = comp_pixels[target];
    tp.insert(tp.end(), comp_pixels[c].begin(), comp_pixels[c].end());
    comp_pixels[c].clear();
  }

  // compact to first-occurrence order
  SegmentMap seg;
  seg.height = height;
  seg.width = width;
  seg.labels.assign(n, -1);
  std::vector<int> remap(comp_pixels.size(), -1);
  int next = 0;
  for (size_t p = 0; p < n; ++p) {
    const int c = comp[p];
    if (remap[c] == -1) remap[c] = next++;
    seg.labels[p] = remap[c];
  }
  seg.n_segments = next;
  return seg;
}

SegmentMap segment_slic(const Image& img, const SegParams& params, uint64_t seed) {
  const int k = params.slic_k;
  if (k < 1) throw std::invalid_argument("slic_k must be >= 1");
  const int h = img.height, w = img.width;
  const double iw = params.slic_intensity_weight;

  struct Center {
    double x, y, f;  // f = intensity * weight
  };
  std::vector<Center> centers;
  centers.reserve(k);
  Rng rng(mix_seed(seed, "slic-init"));
  const double step = std::sqrt(static_cast<double>(h) * w / k);
  int rows = std::max(1, static_cast<int>(std::round(h / step)));
  int cols = (k + rows - 1) / rows;
  for (int r = 0; r < rows && static_cast<int>(centers.size()) < k; ++r) {
    for (int c = 0; c < cols && static_cast<int>(centers.size()) < k; ++c) {
      double cy = (r + 0.5) * h / rows + rng.uniform(-0.25, 0.25) * step;
      double cx = (c + 0.5) * w / cols + rng.uniform(-0.25, 0.25) * step;
      cy = std::clamp(cy, 0.0, h - 1.0);
      cx = std::clamp(cx, 0.0, w - 1.0);
      const double f =
          img.at(static_cast<int>(cy), static_cast<int>(cx)) * iw;
      centers.push_back({cx, cy, f});
    }
  }

  std::vector<int> assign(static_cast<size_t>(h) * w, 0);
  for (int iter = 0; iter < params.slic_iters; ++iter) {
    const long total = static_cast<long>(h) * w;
#pragma omp parallel for schedule(static)
    for (long p = 0; p < total; ++p) {
      const int y = static_cast<int>(p) / w;
      const int x = static_cast<int>(p) % w;
      const double f = img.pixels[p] * iw;
      int best = 0;
      double best_d = 1e300;
      for (size_t c = 0; c < centers.size(); ++c) {
        const double dx = x - centers[c].x;
        const double dy = y - centers[c].y;
        const double df = f - centers[c].f;
        const double dist = dx * dx + dy * dy + df * df;
        if (dist < best_d) {
          best_d = dist;
          best = static_cast<int>(c);
        }
      }
      assign[p] = best;
    }
    // recompute centers (serial, fixed order)
    std::vector<double> sx(centers.size(), 0), sy(centers.size(), 0), sf(centers.size(), 0);
    std::vector<long> cnt(centers.size(), 0);
    for (long p = 0; p < total; ++p) {
      const int c = assign[p];
      sx[c] += p % w;
      sy[c] += p / w;
      sf[c] += img.pixels[p] * iw;
      ++cnt[c];
    }
    for (size_t c = 0; c < centers.size(); ++c) {
      if (cnt[c] == 0) continue;
      centers[c] = {sx[c] / cnt[c], sy[c] / cnt[c], sf[c] / cnt[c]};
    }
  }
  return finalize_segments(h, w, std::move(assign));
}

}  // namespace

SegmentMap segment(const Image& img, const SegParams& params, uint64_t seed) {
  if (img.height <= 0 || img.width <= 0) {
    throw std::invalid_argument("segment: empty image");
  }
  if (params.mode == SegMode::grid) return segment_grid(img, params.grid_size);
  return segment_slic(img, params, seed);
}

PerturbSet draw_perturbations(int n_samples, int n_segments, Rng& rng) {
  if (n_samples < n_segments + 2) {
    throw std::invalid_argument("n_samples must be >= n_segments + 2");
  }
  PerturbSet ps;
  ps.n = n_samples;
  ps.n_segments = n_segments;
  ps.rows.assign(static_cast<size_t>(n_samples) * n_segments, 0);
  for (int s = 0; s < n_segments; ++s) ps.rows[s] = 1;  // row 0: original image
  for (int i = 1; i < n_samples; ++i) {
    uint8_t* row = ps.rows.data() + static_cast<size_t>(i) * n_segments;
    for (int s = 0; s < n_segments; ++s) row[s] = rng.bernoulli(0.5) ? 1 : 0;
  }
  return ps;
}

Image apply_perturbation(const Image& img, const SegmentMap& seg, const uint8_t* row,
                         double fill) {
  Image out = img;
  for (size_t p = 0; p < out.pixels.size(); ++p) {
    if (!row[seg.labels[p]]) out.pixels[p] = fill;
  }
  return out;
}

SurrogateFit fit_surrogate(const PerturbSet& perturb, const std::vector<double>& probs,
                           double kernel_width) {
  if (kernel_width <= 0.0) throw std::invalid_argument("kernel_width must be > 0");
  const int n = perturb.n;
  const int S = perturb.n_segments;
  if (static_cast<int>(probs.size()) != n) {
    throw std::invalid_argument("fit_surrogate: probs size mismatch");
  }
  for (double p : probs) {
    if (!std::isfinite(p)) throw std::invalid_argument("fit_surrogate: non-finite prob");
  }

  // sample weights from cosine distance to the all-ones row
  std::vector<double> sw(n);
  for (int i = 0; i < n; ++i) {
    const uint8_t* row = perturb.rows.data() + static_cast<size_t>(i) * S;
    int on = 0;
    for (int s = 0; s < S; ++s) on += row[s];
    const double cos_sim = on == 0 ? 0.0 : std::sqrt(static_cast<double>(on) / S);
    const double dist = 1.0 - cos_sim;
    sw[i] = std::exp(-dist * dist / (kernel_width * kernel_width));
  }

  // normal equations over X = [1 | z], dim m = S + 1
  const int m = S + 1;
  constexpr double kRidge = 1e-6;
  std::vector<double> A(static_cast<size_t>(m) * m, 0.0);
  std::vector<double> b(m, 0.0);
  std::vector<double> xi(m);
  for (int i = 0; i < n; ++i) {
    const uint8_t* row = perturb.rows.data() + static_cast<size_t>(i) * S;
    xi[0] = 1.0;
    for (int s = 0; s < S; ++s) xi[s + 1] = row[s];
    const double wi = sw[i];
    for (int r = 0; r < m; ++r) {
      if (xi[r] == 0.0) continue;
      const double wr = wi * xi[r];
      double* arow = A.data() + static_cast<size_t>(r) * m;
      for (int c = r; c < m; ++c) arow[c] += wr * xi[c];
      b[r] += wr * probs[i];
    }
  }
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < r; ++c) {
      A[static_cast<size_t>(r) * m + c] = A[static_cast<size_t>(c) * m + r];
    }
    A[static_cast<size_t>(r) * m + r] += kRidge;
  }

  // Cholesky solve; A is SPD thanks to the ridge term
  std::vector<double> L(static_cast<size_t>(m) * m, 0.0);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c <= r; ++c) {
      double sum = A[static_cast<size_t>(r) * m + c];
      for (int k = 0; k < c; ++k) {
        sum -= L[static_cast<size_t>(r) * m + k] * L[static_cast<size_t>(c) * m + k];
      }
      if (r == c) {
        if (sum <= 0.0) throw std::runtime_error("fit_surrogate: system not SPD");
        L[static_cast<size_t>(r) * m + r] = std::sqrt(sum);
      } else {
        L[static_cast<size_t>(r) * m + c] = sum / L[static_cast<size_t>(c) * m + c];
      }
    }
  }
  std::vector<double> y(m), beta(m);
  for (int r = 0; r < m; ++r) {
    double sum = b[r];
    for (int k = 0; k < r; ++k) sum -= L[static_cast<size_t>(r) * m + k] * y[k];
    y[r] = sum / L[static_cast<size_t>(r) * m + r];
  }
  for (int r = m - 1; r >= 0; --r) {
    double sum = y[r];
    for (int k = r + 1; k < m; ++k) sum -= L[static_cast<size_t>(k) * m + r] * beta[k];
    beta[r] = sum / L[static_cast<size_t>(r) * m + r];
  }

  SurrogateFit fit;
  fit.intercept = beta[0];
  fit.weights.assign(beta.begin() + 1, beta.end());

  // weighted R^2
  double sw_total = 0.0, y_mean = 0.0;
  for (int i = 0; i < n; ++i) {
    sw_total += sw[i];
    y_mean += sw[i] * probs[i];
  }
  y_mean /= sw_total;
  double ss_res = 0.0, ss_tot = 0.0;
  for (int i = 0; i < n; ++i) {
    const uint8_t* row = perturb.rows.data() + static_cast<size_t>(i) * S;
    double pred = fit.intercept;
    for (int s = 0; s < S; ++s) {
      if (row[s]) pred += fit.weights[s];
    }
    ss_res += sw[i] * (probs[i] - pred) * (probs[i] - pred);
    ss_tot += sw[i] * (probs[i] - y_mean) * (probs[i] - y_mean);
  }
  fit.fidelity = ss_tot <= 1e-18 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

std::vector<std::vector<double>> Classifier::predict_probs_batch(
    const std::vector<Image>& images) const {
  std::vector<std::vector<double>> out(images.size());
  const long n = static_cast<long>(images.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = predict_probs(images[i]);
  return out;
}

namespace {

Explanation explain_impl(const Classifier& model, const Image& img,
                         const ExplainConfig& cfg, SegmentMap seg,
                         const PerturbSet& perturb) {
  const double fill = mean_intensity(img);

  const auto orig_probs = model.predict_probs(img);
  int explained = 0;
  for (size_t j = 1; j < orig_probs.size(); ++j) {
    if (orig_probs[j] > orig_probs[explained]) explained = static_cast<int>(j);
  }

  std::vector<double> probs(perturb.n);
  constexpr int kChunk = 64;
  for (int start = 0; start < perturb.n; start += kChunk) {
    const int end = std::min(start + kChunk, perturb.n);
    std::vector<Image> chunk;
    chunk.reserve(end - start);
    for (int i = start; i < end; ++i) {
      chunk.push_back(apply_perturbation(
          img, seg, perturb.rows.data() + static_cast<size_t>(i) * perturb.n_segments,
          fill));
    }
    const auto chunk_probs = model.predict_probs_batch(chunk);
    for (int i = start; i < end; ++i) probs[i] = chunk_probs[i - start][explained];
  }

  const SurrogateFit fit = fit_surrogate(perturb, probs, cfg.kernel_width);

  Explanation ex;
  ex.segments = std::move(seg);
  ex.weights = fit.weights;
  ex.intercept = fit.intercept;
  ex.explained_class = explained;
  ex.fidelity = fit.fidelity;
  ex.cfg = cfg;
  return ex;
}

}  // namespace

Explanation explain(const Classifier& model, const Image& img, const ExplainConfig& cfg) {
  SegmentMap seg = segment(img, cfg.seg, cfg.seed);
  Rng rng(mix_seed(cfg.seed, "perturb"));
  const PerturbSet perturb = draw_perturbations(cfg.n_samples, seg.n_segments, rng);
  return explain_impl(model, img, cfg, std::move(seg), perturb);
}

Explanation explain_with_segments(const Classifier& model, const Image& img,
                                  const ExplainConfig& cfg, const SegmentMap& seg,
                                  const PerturbSet& perturb) {
  if (perturb.n_segments != seg.n_segments) {
    throw std::invalid_argument("explain_with_segments: perturbation/segment mismatch");
  }
  return explain_impl(model, img, cfg, seg, perturb);
}

size_t AttributionMask::count() const {
  return static_cast<size_t>(std::count(on.begin(), on.end(), uint8_t{1}));
}

AttributionMask to_mask(const Explanation& ex, int top_k) {
  if (top_k < 1) throw std::invalid_argument("to_mask: top_k must be >= 1");
  const int S = ex.segments.n_segments;
  std::vector<int> order(S);
  for (int s = 0; s < S; ++s) order[s] = s;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (ex.weights[a] != ex.weights[b]) return ex.weights[a] > ex.weights[b];
    return a < b;
  });

  std::vector<uint8_t> selected(S, 0);
  int taken = 0;
  for (int s : order) {
    if (taken >= top_k || ex.weights[s] <= 0.0) break;
    selected[s] = 1;
    ++taken;
  }

  AttributionMask mask;
  mask.height = ex.segments.height;
  mask.width = ex.segments.width;
  mask.top_k = top_k;
  mask.on.resize(ex.segments.labels.size());
  for (size_t p = 0; p < mask.on.size(); ++p) {
    mask.on[p] = selected[ex.segments.labels[p]];
  }
  return mask;
}

}  // namespace debias
