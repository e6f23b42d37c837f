#include "goalfv/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace goalfv {

namespace {

// portable deterministic RNG (splitmix64) so models are reproducible per seed
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t& state) {
  return (splitmix64(state) >> 11) * 0x1.0p-53;
}

double normal_draw(std::uint64_t& state) {
  // Box-Muller, one value per call
  double u1 = uniform01(state);
  if (u1 < 1e-300) u1 = 1e-300;
  const double u2 = uniform01(state);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_prime(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

}  // namespace

double surrogate_loss(const std::array<double, 4>& pred,
                      const std::array<double, 4>& target, double eps) {
  double s = 0.0;
  for (int k = 0; k < 4; ++k)
    s += std::abs(pred[k] - target[k]) / (std::abs(target[k]) + eps);
  return s;
}

SurrogateModel SurrogateModel::create(const std::vector<int>& hidden_widths,
                                      std::uint64_t seed) {
  if (hidden_widths.size() < 2 || hidden_widths.size() % 2 != 0)
    throw SurrogateError("hidden layer count must be even and >= 2 (pairs form skip blocks)");
  for (int w : hidden_widths)
    if (w != hidden_widths.front() || w < 1)
      throw SurrogateError("hidden widths must be equal and positive");

  SurrogateModel m;
  m.width_ = hidden_widths.front();
  m.n_blocks_ = static_cast<int>(hidden_widths.size()) / 2;
  m.mean_.fill(0.0);
  m.std_.fill(1.0);
  m.const_flag_.fill(0);
  const int w = m.width_;
  m.params_.assign(static_cast<std::size_t>(m.off_head_bias()) + 4, 0.0);

  // He-normal with the leaky-ReLU gain used at initialization (a = 0.01)
  const double a = 0.01;
  std::uint64_t state = seed * 0x9e3779b97f4a7c15ull + 0x42ull;
  const auto fill = [&](int offset, int count, int fan_in) {
    const double sigma = std::sqrt(2.0 / ((1.0 + a * a) * fan_in));
    for (int i = 0; i < count; ++i) m.params_[offset + i] = sigma * normal_draw(state);
  };
  fill(m.off_w_in(), w * kFeatureCount, kFeatureCount);
  for (int b = 0; b < m.n_blocks_; ++b) {
    const int base = m.off_block(b);
    fill(base, w * w, w);                    // W1
    fill(base + w * w + w, w * w, w);        // W2 (b1 stays zero in between)
  }
  fill(m.off_heads(), 4 * w, w);
  return m;
}

void SurrogateModel::set_normalization(const std::array<double, kFeatureCount>& mean,
                                       const std::array<double, kFeatureCount>& std_dev) {
  mean_ = mean;
  for (int j = 0; j < kFeatureCount; ++j) {
    if (std_dev[j] > 1e-12 * (1.0 + std::abs(mean[j]))) {
      std_[j] = std_dev[j];
      const_flag_[j] = 0;
    } else {
      std_[j] = 1.0;  // zero-variance feature: flagged, passed through
      const_flag_[j] = 1;
    }
  }
}

namespace {

// forward pass with caches for reverse mode; dropout masks hold the applied
// multiplier (0 or 1/(1-p))
struct ForwardCache {
  std::array<double, kFeatureCount> x{};
  std::vector<double> pre_in, h0, mask0;
  std::vector<std::vector<double>> pre1, act1, mask1, h_in;  // per block
  std::vector<double> h_final;
  std::array<double, 4> y{};
};

void forward_cached(const SurrogateModel& m, const FeatureRow& f, double dropout,
                    std::uint64_t* rng, ForwardCache& c) {
  const int w = m.width();
  const auto& p = m.parameters();
  for (int j = 0; j < kFeatureCount; ++j)
    c.x[j] = (f[j] - m.feature_mean()[j]) / m.feature_std()[j];

  const auto apply_dropout = [&](std::vector<double>& v, std::vector<double>& mask) {
    mask.assign(v.size(), 1.0);
    if (dropout <= 0.0 || rng == nullptr) return;
    const double keep = 1.0 - dropout;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (uniform01(*rng) < dropout) {
        mask[i] = 0.0;
        v[i] = 0.0;
      } else {
        mask[i] = 1.0 / keep;
        v[i] *= mask[i];
      }
    }
  };

  c.pre_in.assign(w, 0.0);
  for (int i = 0; i < w; ++i) {
    double s = p[m.off_b_in() + i];
    const int row = m.off_w_in() + i * kFeatureCount;
    for (int j = 0; j < kFeatureCount; ++j) s += p[row + j] * c.x[j];
    c.pre_in[i] = s;
  }
  c.h0.resize(w);
  for (int i = 0; i < w; ++i) c.h0[i] = elu(c.pre_in[i]);
  apply_dropout(c.h0, c.mask0);

  c.pre1.assign(m.blocks(), {});
  c.act1.assign(m.blocks(), {});
  c.mask1.assign(m.blocks(), {});
  c.h_in.assign(m.blocks(), {});
  std::vector<double> h = c.h0;
  for (int b = 0; b < m.blocks(); ++b) {
    c.h_in[b] = h;
    const int base = m.off_block(b);
    const int w1 = base, b1 = base + w * w, w2 = b1 + w, b2 = w2 + w * w;
    auto& pre = c.pre1[b];
    pre.assign(w, 0.0);
    for (int i = 0; i < w; ++i) {
      double s = p[b1 + i];
      const int row = w1 + i * w;
      for (int j = 0; j < w; ++j) s += p[row + j] * h[j];
      pre[i] = s;
    }
    auto& act = c.act1[b];
    act.resize(w);
    for (int i = 0; i < w; ++i) act[i] = elu(pre[i]);
    apply_dropout(act, c.mask1[b]);
    for (int i = 0; i < w; ++i) {
      double s = p[b2 + i];
      const int row = w2 + i * w;
      for (int j = 0; j < w; ++j) s += p[row + j] * act[j];
      h[i] += s;  // identity skip
    }
  }
  c.h_final = h;
  for (int k = 0; k < 4; ++k) {
    double s = p[m.off_head_bias() + k];
    const int row = m.off_heads() + k * w;
    for (int j = 0; j < w; ++j) s += p[row + j] * h[j];
    c.y[k] = s;
    if (!std::isfinite(s))
      throw SurrogateError("non-finite activation at output head " + std::to_string(k));
  }
}

void backward_cached(const SurrogateModel& m, const ForwardCache& c,
                     const std::array<double, 4>& dy, std::vector<double>& grad) {
  const int w = m.width();
  const auto& p = m.parameters();

  std::vector<double> dh(w, 0.0);
  for (int k = 0; k < 4; ++k) {
    grad[m.off_head_bias() + k] += dy[k];
    const int row = m.off_heads() + k * w;
    for (int j = 0; j < w; ++j) {
      grad[row + j] += dy[k] * c.h_final[j];
      dh[j] += dy[k] * p[row + j];
    }
  }

  std::vector<double> da(w), dpre(w), dh_in(w);
  for (int b = m.blocks() - 1; b >= 0; --b) {
    const int base = m.off_block(b);
    const int w1 = base, b1 = base + w * w, w2 = b1 + w, b2 = w2 + w * w;
    // h_out = h_in + W2 * act + b2
    std::fill(da.begin(), da.end(), 0.0);
    for (int i = 0; i < w; ++i) {
      grad[b2 + i] += dh[i];
      const int row = w2 + i * w;
      for (int j = 0; j < w; ++j) {
        grad[row + j] += dh[i] * c.act1[b][j];
        da[j] += dh[i] * p[row + j];
      }
    }
    for (int j = 0; j < w; ++j) da[j] *= c.mask1[b][j];
    for (int j = 0; j < w; ++j) dpre[j] = da[j] * elu_prime(c.pre1[b][j]);
    dh_in = dh;  // identity skip path
    for (int i = 0; i < w; ++i) {
      grad[b1 + i] += dpre[i];
      const int row = w1 + i * w;
      for (int j = 0; j < w; ++j) {
        grad[row + j] += dpre[i] * c.h_in[b][j];
        dh_in[j] += dpre[i] * p[row + j];
      }
    }
    dh = dh_in;
  }

  for (int i = 0; i < w; ++i) dh[i] *= c.mask0[i];
  for (int i = 0; i < w; ++i) {
    const double d = dh[i] * elu_prime(c.pre_in[i]);
    grad[m.off_b_in() + i] += d;
    const int row = m.off_w_in() + i * kFeatureCount;
    for (int j = 0; j < kFeatureCount; ++j) grad[row + j] += d * c.x[j];
  }
}

}  // namespace

std::array<double, 4> SurrogateModel::forward(const FeatureRow& features) const {
  ForwardCache c;
  forward_cached(*this, features, 0.0, nullptr, c);
  return c.y;
}

double loss_and_gradient(const SurrogateModel& model,
                         const std::vector<FeatureRow>& features,
                         const std::vector<std::array<double, 4>>& targets,
                         const std::vector<int>& batch_indices, double loss_epsilon,
                         double dropout, std::uint64_t& rng_state,
                         std::vector<double>& grad_out) {
  grad_out.assign(model.parameter_count(), 0.0);
  double loss = 0.0;
  ForwardCache c;
  const double inv_n = 1.0 / static_cast<double>(batch_indices.size());
  for (int idx : batch_indices) {
    forward_cached(model, features[idx], dropout, dropout > 0.0 ? &rng_state : nullptr, c);
    loss += surrogate_loss(c.y, targets[idx], loss_epsilon) * inv_n;
    std::array<double, 4> dy{};
    for (int k = 0; k < 4; ++k) {
      const double diff = c.y[k] - targets[idx][k];
      const double denom = std::abs(targets[idx][k]) + loss_epsilon;
      dy[k] = (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0)) / denom * inv_n;
    }
    backward_cached(model, c, dy, grad_out);
  }
  return loss;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  if (ds.features.size() != ds.targets.size())
    throw SurrogateError("dataset: feature/target row counts differ");
  std::ofstream out(path);
  if (!out) throw SurrogateError("cannot open '" + path + "' for writing");
  out << "# provenance: " << (ds.provenance.empty() ? "unspecified" : ds.provenance)
      << "\n";
  out << "x,y,mach,alpha,area,u0,u1,u2,u3,r0,r1,r2,r3,z0,z1,z2,z3\n";
  char buf[64];
  for (std::size_t r = 0; r < ds.features.size(); ++r) {
    for (int j = 0; j < kFeatureCount; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g,", ds.features[r][j]);
      out << buf;
    }
    for (int k = 0; k < 4; ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g%c", ds.targets[r][k], k == 3 ? '\n' : ',');
      out << buf;
    }
  }
  if (!out) throw SurrogateError("write failure on '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SurrogateError("cannot open dataset '" + path + "'");
  Dataset ds;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# provenance: ";
      if (line.rfind(tag, 0) == 0) ds.provenance = line.substr(tag.size());
      continue;
    }
    if (!header_seen) {
      if (line != "x,y,mach,alpha,area,u0,u1,u2,u3,r0,r1,r2,r3,z0,z1,z2,z3")
        throw SurrogateError("dataset header mismatch at line " + std::to_string(line_no));
      header_seen = true;
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    std::array<double, 17> vals{};
    for (int j = 0; j < 17; ++j) {
      if (!std::getline(ls, cell, ','))
        throw SurrogateError("dataset row with fewer than 17 columns at line " +
                             std::to_string(line_no));
      vals[j] = std::stod(cell);
    }
    if (std::getline(ls, cell, ','))
      throw SurrogateError("dataset row with more than 17 columns at line " +
                           std::to_string(line_no));
    FeatureRow f;
    std::copy_n(vals.begin(), kFeatureCount, f.begin());
    ds.features.push_back(f);
    ds.targets.push_back({vals[13], vals[14], vals[15], vals[16]});
  }
  if (!header_seen) throw SurrogateError("dataset has no header: " + path);
  return ds;
}

void append_run_to_dataset(Dataset& ds, const MeshHierarchy& mesh,
                           const std::vector<State4>& u, const std::vector<State4>& r,
                           const std::vector<State4>& z, const FlowConfig& cfg) {
  if (static_cast<int>(z.size()) != mesh.active_count())
    throw SurrogateError("append_run_to_dataset: dual field length mismatch");
  const std::vector<FeatureRow> rows = extract_features(mesh, u, r, cfg);
  for (int i = 0; i < mesh.active_count(); ++i) {
    ds.features.push_back(rows[i]);
    ds.targets.push_back({z[i][0], z[i][1], z[i][2], z[i][3]});
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s mach=%g alpha=%g n=%d", ds.provenance.c_str(),
                cfg.mach, cfg.alpha_deg, mesh.active_count());
  ds.provenance = buf;
}

namespace {

struct Adam {
  std::vector<double> m, v;
  long t = 0;

  explicit Adam(int n) : m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double>& p, const std::vector<double>& g, const TrainConfig& cfg,
            double lr) {
    ++t;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
      v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_eps);
    }
  }
};

void normalize_from(SurrogateModel& model, const std::vector<FeatureRow>& rows,
                    const std::vector<int>& idx) {
  std::array<double, kFeatureCount> mean{}, var{};
  for (int i : idx)
    for (int j = 0; j < kFeatureCount; ++j) mean[j] += rows[i][j];
  for (int j = 0; j < kFeatureCount; ++j) mean[j] /= idx.size();
  for (int i : idx)
    for (int j = 0; j < kFeatureCount; ++j) {
      const double d = rows[i][j] - mean[j];
      var[j] += d * d;
    }
  std::array<double, kFeatureCount> sd{};
  for (int j = 0; j < kFeatureCount; ++j) sd[j] = std::sqrt(var[j] / idx.size());
  model.set_normalization(mean, sd);
}

double validation_loss(const SurrogateModel& model, const Dataset& ds,
                       const std::vector<int>& idx, double eps) {
  double s = 0.0;
  for (int i : idx) s += surrogate_loss(model.forward(ds.features[i]), ds.targets[i], eps);
  return idx.empty() ? 0.0 : s / idx.size();
}

// trains one model on train_idx; fills per-epoch stats when report != nullptr
bool fit(SurrogateModel& model, const Dataset& ds, const std::vector<int>& train_idx,
         const std::vector<int>& val_idx, const TrainConfig& cfg, std::uint64_t seed,
         FoldReport* report) {
  normalize_from(model, ds.features, train_idx);
  Adam adam(model.parameter_count());
  std::uint64_t rng = seed;
  std::vector<int> order = train_idx;
  std::vector<double> grad;
  std::vector<int> batch;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr =
        cfg.cosine_lr_decay
            ? cfg.learning_rate * 0.5 * (1.0 + std::cos(M_PI * epoch / cfg.epochs))
            : cfg.learning_rate;
    // Fisher-Yates with the portable generator
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = splitmix64(rng) % i;
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    int seen = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.assign(order.begin() + start, order.begin() + end);
      const double l = loss_and_gradient(model, ds.features, ds.targets, batch,
                                         cfg.loss_epsilon, cfg.dropout, rng, grad);
      if (!std::isfinite(l)) {
        if (report) report->diverged = true;
        return false;
      }
      adam.step(model.parameters(), grad, cfg, lr);
      epoch_loss += l * static_cast<double>(batch.size());
      seen += static_cast<int>(batch.size());
    }
    if (report) {
      EpochStats st;
      st.epoch = epoch;
      st.train_loss = epoch_loss / std::max(seen, 1);
      st.val_loss = validation_loss(model, ds, val_idx, cfg.loss_epsilon);
      report->epochs.push_back(st);
    }
  }
  if (report && !report->epochs.empty())
    report->final_val_loss = report->epochs.back().val_loss;
  return true;
}

}  // namespace

TrainResult train_surrogate(const Dataset& ds, const std::vector<int>& hidden_widths,
                            const TrainConfig& cfg) {
  const int n = static_cast<int>(ds.features.size());
  if (cfg.k_folds < 2) throw SurrogateError("k_folds must be >= 2");
  if (n < cfg.k_folds * cfg.batch_size)
    throw SurrogateError("dataset too small: need at least k_folds*batch_size = " +
                         std::to_string(cfg.k_folds * cfg.batch_size) + " rows, have " +
                         std::to_string(n));

  std::uint64_t rng = cfg.seed * 0x2545f4914f6cdd1dull + 1;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = splitmix64(rng) % i;
    std::swap(order[i - 1], order[j]);
  }

  TrainResult result;
  result.model = SurrogateModel::create(hidden_widths, cfg.seed * 1000);

  for (int f = 0; cfg.cross_validate && f < cfg.k_folds; ++f) {
    std::vector<int> train_idx, val_idx;
    for (int i = 0; i < n; ++i) {
      if (i % cfg.k_folds == f)
        val_idx.push_back(order[i]);
      else
        train_idx.push_back(order[i]);
    }
    FoldReport rep;
    rep.fold = f;
    SurrogateModel model = SurrogateModel::create(hidden_widths, cfg.seed * 1000 + f + 1);
    fit(model, ds, train_idx, val_idx, cfg, cfg.seed * 77 + f, &rep);
    result.folds.push_back(std::move(rep));
  }

  // final fit on everything with the same budget
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  FoldReport final_rep;
  final_rep.fold = -1;
  if (!fit(result.model, ds, all, {}, cfg, cfg.seed * 77 + cfg.k_folds, &final_rep))
    throw SurrogateError("final training diverged (non-finite loss)");
  result.folds.push_back(std::move(final_rep));
  return result;
}

void write_fold_report_csv(const std::vector<FoldReport>& folds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SurrogateError("cannot open '" + path + "' for writing");
  out << "fold,epoch,train_loss,val_loss\n";
  char buf[96];
  for (const auto& f : folds)
    for (const auto& e : f.epochs) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.10g,%.10g\n", f.fold, e.epoch,
                    e.train_loss, e.val_loss);
      out << buf;
    }
}

void SurrogateModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw SurrogateError("cannot open '" + path + "' for writing");
  out << "DWRSURROGATE v1\n";
  out << "features " << kFeatureCount << "\n";
  out << "outputs 4\n";
  out << "width " << width_ << "\n";
  out << "blocks " << n_blocks_ << "\n";
  char buf[40];
  out << "mean";
  for (double v : mean_) {
    std::snprintf(buf, sizeof(buf), " %.17g", v);
    out << buf;
  }
  out << "\nstd";
  for (double v : std_) {
    std::snprintf(buf, sizeof(buf), " %.17g", v);
    out << buf;
  }
  out << "\nconstflags";
  for (int v : const_flag_) out << " " << v;
  out << "\nparams " << params_.size() << "\n";
  for (std::size_t i = 0; i < params_.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g%c", params_[i],
                  (i + 1) % 4 == 0 ? '\n' : ' ');
    out << buf;
  }
  out << "\n";
  if (!out) throw SurrogateError("write failure on '" + path + "'");
}

SurrogateModel SurrogateModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SurrogateError("cannot open model '" + path + "'");
  std::string magic, version;
  in >> magic >> version;
  if (magic != "DWRSURROGATE" || version != "v1")
    throw SurrogateError("not a DWRSURROGATE v1 model file: " + path);
  std::string key;
  int features = 0, outputs = 0, width = 0, blocks = 0;
  in >> key >> features;
  if (key != "features" || features != kFeatureCount)
    throw SurrogateError("model feature count mismatch: expected " +
                         std::to_string(kFeatureCount) + ", found " +
                         std::to_string(features));
  in >> key >> outputs;
  if (key != "outputs" || outputs != 4)
    throw SurrogateError("model output count mismatch");
  in >> key >> width;
  if (key != "width" || width < 1) throw SurrogateError("bad model width");
  in >> key >> blocks;
  if (key != "blocks" || blocks < 1) throw SurrogateError("bad model block count");

  SurrogateModel m;
  m.width_ = width;
  m.n_blocks_ = blocks;
  in >> key;
  if (key != "mean") throw SurrogateError("model file: expected mean");
  for (auto& v : m.mean_) in >> v;
  in >> key;
  if (key != "std") throw SurrogateError("model file: expected std");
  for (auto& v : m.std_) in >> v;
  in >> key;
  if (key != "constflags") throw SurrogateError("model file: expected constflags");
  for (auto& v : m.const_flag_) {
    int x;
    in >> x;
    v = static_cast<std::uint8_t>(x);
  }
  std::size_t count = 0;
  in >> key >> count;
  if (key != "params") throw SurrogateError("model file: expected params");
  const std::size_t expected = static_cast<std::size_t>(m.off_head_bias()) + 4;
  if (count != expected)
    throw SurrogateError("model parameter count mismatch: header says " +
                         std::to_string(count) + ", architecture needs " +
                         std::to_string(expected));
  m.params_.resize(count);
  for (auto& v : m.params_) {
    if (!(in >> v)) throw SurrogateError("truncated model file: " + path);
  }
  return m;
}

std::vector<State4> predict_rows(const SurrogateModel& model,
                                 const std::vector<FeatureRow>& rows) {
  std::vector<State4> out(rows.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    const auto y = model.forward(rows[i]);
    out[i] = {y[0], y[1], y[2], y[3]};
  }
  return out;
}

std::vector<State4> predict_field(const SurrogateModel& model, const MeshHierarchy& mesh,
                                  const std::vector<State4>& u,
                                  const std::vector<State4>& r, const FlowConfig& cfg) {
  return predict_rows(model, extract_features(mesh, u, r, cfg));
}

namespace serial {

std::vector<State4> predict_rows(const SurrogateModel& model,
                                 const std::vector<FeatureRow>& rows) {
  std::vector<State4> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto y = model.forward(rows[i]);
    out[i] = {y[0], y[1], y[2], y[3]};
  }
  return out;
}

}  // namespace serial

}  // namespace goalfv
