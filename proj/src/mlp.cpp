// Copyright 2026 The Kinoplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kinoplan/mlp.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace kinoplan {

namespace {

constexpr int kVecBlock = 16;    // output lanes processed per register block
constexpr int kMaxPad = 1040;    // hard cap on padded layer width
constexpr int kRowBlock = 4;

int padded(int n) { return ((n + kVecBlock - 1) / kVecBlock) * kVecBlock; }

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require_little_endian() {
  if constexpr (std::endian::native != std::endian::little)
    throw ContractViolation("mlp payload requires a little-endian host");
}

}  // namespace

Mlp::Mlp(int state_dim, int condition_dim, int hidden_width, int hidden_layers,
         Rng& rng)
    : state_dim_(state_dim), condition_dim_(condition_dim) {
  if (state_dim < 1 || condition_dim < 0 || hidden_width < 1 ||
      hidden_layers < 1)
    throw ContractViolation("mlp: bad architecture");
  if (hidden_width > 1024 || input_dim() > 1024)
    throw ContractViolation("mlp: width above the 1024 cap");

  std::vector<int> sizes = layer_sizes_impl(input_dim(), hidden_width,
                                            hidden_layers);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    Batch w(out, in);
    const double limit = std::sqrt(6.0 / in);
    // He-uniform, drawn in Eigen storage order (column by column).
    for (int i = 0; i < in; ++i)
      for (int j = 0; j < out; ++j) w(j, i) = rng.uniform(-limit, limit);
    w_.push_back(std::move(w));
    b_.push_back(Eigen::VectorXd::Zero(out));
  }
  repack();
}

std::vector<int> Mlp::layer_sizes() const {
  std::vector<int> sizes{input_dim()};
  for (const auto& w : w_) sizes.push_back(static_cast<int>(w.rows()));
  return sizes;
}

std::vector<int> Mlp::layer_sizes_impl(int input, int width, int hidden) {
  std::vector<int> sizes{input};
  for (int l = 0; l < hidden; ++l) sizes.push_back(width);
  sizes.push_back(1);
  return sizes;
}

void Mlp::set_cost_scale(double s) {
  if (s <= 0) throw ContractViolation("mlp: cost scale must be positive");
  cost_scale_ = s;
}

void Mlp::repack() {
  packed_.clear();
  packed_.reserve(w_.size());
  for (std::size_t l = 0; l < w_.size(); ++l) {
    PackedLayer p;
    p.in = static_cast<int>(w_[l].cols());
    p.out = static_cast<int>(w_[l].rows());
    p.pout = padded(p.out);
    if (p.pout > kMaxPad || p.in > kMaxPad)
      throw ContractViolation("mlp: layer exceeds width cap");
    p.w.assign(static_cast<std::size_t>(p.in) * p.pout, 0.0);
    p.b.assign(p.pout, 0.0);
    for (int i = 0; i < p.in; ++i)
      for (int j = 0; j < p.out; ++j) p.w[i * p.pout + j] = w_[l](j, i);
    for (int j = 0; j < p.out; ++j) p.b[j] = b_[l](j);
    packed_.push_back(std::move(p));
  }
}

// Per-row arithmetic order is fixed (inputs folded in index order within
// kVecBlock output lanes) and rows are independent, so any batch split
// produces bitwise identical z values.
template <int R>
void Mlp::forward_rows(const double* const* rows, double* z) const {
  double buf_a[kRowBlock * kMaxPad];
  double buf_b[kRowBlock * kMaxPad];

  const double* cur[R];
  for (int r = 0; r < R; ++r) cur[r] = rows[r];

  double* write = buf_a;
  double* other = buf_b;
  for (std::size_t l = 0; l < packed_.size(); ++l) {
    const PackedLayer& L = packed_[l];
    const bool last = (l + 1 == packed_.size());
    for (int j0 = 0; j0 < L.pout; j0 += kVecBlock) {
      double acc[R][kVecBlock];
      for (int r = 0; r < R; ++r)
        for (int jj = 0; jj < kVecBlock; ++jj) acc[r][jj] = L.b[j0 + jj];
      for (int i = 0; i < L.in; ++i) {
        const double* wc = &L.w[static_cast<std::size_t>(i) * L.pout + j0];
        double x[R];
        for (int r = 0; r < R; ++r) x[r] = cur[r][i];
        for (int jj = 0; jj < kVecBlock; ++jj) {
          const double wv = wc[jj];
          for (int r = 0; r < R; ++r) acc[r][jj] += x[r] * wv;
        }
      }
      for (int r = 0; r < R; ++r) {
        double* dst = write + r * L.pout + j0;
        if (last) {
          for (int jj = 0; jj < kVecBlock; ++jj) dst[jj] = acc[r][jj];
        } else {
          for (int jj = 0; jj < kVecBlock; ++jj)
            dst[jj] = acc[r][jj] > 0.0 ? acc[r][jj] : 0.0;
        }
      }
    }
    for (int r = 0; r < R; ++r) cur[r] = write + r * L.pout;
    std::swap(write, other);
  }
  for (int r = 0; r < R; ++r) z[r] = cur[r][0];
}

void Mlp::forward(const double* const* rows, int count, double* z) const {
  if (packed_.empty()) throw ContractViolation("mlp: empty model");
  int done = 0;
  while (count - done >= 4) {
    forward_rows<4>(rows + done, z + done);
    done += 4;
  }
  switch (count - done) {
    case 3: forward_rows<3>(rows + done, z + done); break;
    case 2: forward_rows<2>(rows + done, z + done); break;
    case 1: forward_rows<1>(rows + done, z + done); break;
    default: break;
  }
}

namespace {
// Copies a (possibly strided) matrix row into a contiguous buffer.
inline void copy_row(const Eigen::Ref<const Batch>& m, int row, double* dst) {
  for (int i = 0; i < m.cols(); ++i) dst[i] = m(row, i);
}
}  // namespace

void Mlp::predict_batch(const Eigen::Ref<const Batch>& inputs,
                        Eigen::Ref<Eigen::VectorXd> out) const {
  if (inputs.cols() != input_dim())
    throw ContractViolation("mlp: input width mismatch");
  if (out.size() != inputs.rows())
    throw ContractViolation("mlp: output size mismatch");
  const int n = static_cast<int>(inputs.rows());
  double tmp[kRowBlock][1024];
  const double* rows[kRowBlock];
  for (int r = 0; r < kRowBlock; ++r) rows[r] = tmp[r];
  double z[kRowBlock];
  for (int at = 0; at < n; at += kRowBlock) {
    const int cnt = std::min(kRowBlock, n - at);
    for (int r = 0; r < cnt; ++r) copy_row(inputs, at + r, tmp[r]);
    forward(rows, cnt, z);
    for (int r = 0; r < cnt; ++r) out(at + r) = cost_scale_ * sigmoid(z[r]);
  }
}

Eigen::VectorXd Mlp::predict_batch(const Eigen::Ref<const Batch>& inputs) const {
  Eigen::VectorXd out(inputs.rows());
  predict_batch(inputs, out);
  return out;
}

double Mlp::predict_pair(const State& start, const State& goal,
                         const Eigen::VectorXd& condition) const {
  Batch row(1, input_dim());
  if (start.size() != state_dim_ || goal.size() != state_dim_ ||
      condition.size() != condition_dim_)
    throw ContractViolation("mlp: pair dimension mismatch");
  row.block(0, 0, 1, state_dim_) = start.transpose();
  row.block(0, state_dim_, 1, state_dim_) = goal.transpose();
  if (condition_dim_ > 0)
    row.block(0, 2 * state_dim_, 1, condition_dim_) = condition.transpose();
  Eigen::VectorXd out(1);
  predict_batch(row, out);
  return out(0);
}

void Mlp::scores_to_goal_impl(const Eigen::Ref<const Batch>& starts,
                              const State& goal,
                              const Eigen::VectorXd& condition, bool apply_out,
                              Eigen::Ref<Eigen::VectorXd> out) const {
  if (starts.cols() != state_dim_ || goal.size() != state_dim_ ||
      condition.size() != condition_dim_)
    throw ContractViolation("mlp: split input dimension mismatch");
  if (out.size() != starts.rows())
    throw ContractViolation("mlp: output size mismatch");
  const int n = static_cast<int>(starts.rows());
  const int d = state_dim_;
  double tmp[kRowBlock][1024];
  const double* rows[kRowBlock];
  for (int r = 0; r < kRowBlock; ++r) rows[r] = tmp[r];
  double z[kRowBlock];
  for (int at = 0; at < n; at += kRowBlock) {
    const int cnt = std::min(kRowBlock, n - at);
    for (int r = 0; r < cnt; ++r) {
      for (int i = 0; i < d; ++i) tmp[r][i] = starts(at + r, i);
      for (int i = 0; i < d; ++i) tmp[r][d + i] = goal(i);
      for (int i = 0; i < condition_dim_; ++i) tmp[r][2 * d + i] = condition(i);
    }
    forward(rows, cnt, z);
    if (apply_out)
      for (int r = 0; r < cnt; ++r) out(at + r) = cost_scale_ * sigmoid(z[r]);
    else
      for (int r = 0; r < cnt; ++r) out(at + r) = z[r];
  }
}

void Mlp::predict_to_goal(const Eigen::Ref<const Batch>& starts,
                          const State& goal, const Eigen::VectorXd& condition,
                          Eigen::Ref<Eigen::VectorXd> out) const {
  scores_to_goal_impl(starts, goal, condition, true, out);
}

void Mlp::score_to_goal(const Eigen::Ref<const Batch>& starts,
                        const State& goal, const Eigen::VectorXd& condition,
                        Eigen::Ref<Eigen::VectorXd> out) const {
  scores_to_goal_impl(starts, goal, condition, false, out);
}

namespace {

double logit(double t) { return std::log(t / (1.0 - t)); }

struct ForwardPass {
  std::vector<Batch> z;  // pre-activations per layer
  std::vector<Batch> a;  // activations, a[0] is the input batch
};

// Training-side forward with Eigen products. This path is only required to
// be deterministic for a fixed build, not to match the packed kernel bit
// for bit.
ForwardPass training_forward(const Mlp& m, const Eigen::Ref<const Batch>& x) {
  ForwardPass fp;
  fp.a.push_back(x);
  const auto& w = m.weights();
  const auto& b = m.biases();
  for (std::size_t l = 0; l < w.size(); ++l) {
    Batch z = fp.a.back() * w[l].transpose();
    z.rowwise() += b[l].transpose();
    fp.z.push_back(z);
    if (l + 1 < w.size())
      fp.a.push_back(z.cwiseMax(0.0));
    else
      fp.a.push_back(std::move(z));
  }
  return fp;
}

struct BatchLoss {
  double logit_mse = 0;
  double cost_mse = 0;
};

BatchLoss backward(const Mlp& m, const ForwardPass& fp,
                   const Eigen::Ref<const Eigen::VectorXd>& costs,
                   double clamp, std::vector<Batch>* gw,
                   std::vector<Eigen::VectorXd>* gb) {
  const auto& w = m.weights();
  const int n = static_cast<int>(costs.size());
  const Eigen::VectorXd z = fp.a.back().col(0);

  Eigen::VectorXd zt(n), pred(n);
  for (int i = 0; i < n; ++i) {
    const double t = std::min(1.0 - clamp,
                              std::max(clamp, costs(i) / m.cost_scale()));
    zt(i) = logit(t);
    pred(i) = m.cost_scale() * sigmoid(z(i));
  }
  BatchLoss loss;
  loss.logit_mse = (z - zt).squaredNorm() / n;
  loss.cost_mse = (pred - costs).squaredNorm() / n;
  if (!gw) return loss;

  gw->resize(w.size());
  gb->resize(w.size());
  Batch delta = (2.0 / n) * (z - zt);
  for (int l = static_cast<int>(w.size()) - 1; l >= 0; --l) {
    (*gw)[l] = delta.transpose() * fp.a[l];
    (*gb)[l] = delta.colwise().sum();
    if (l > 0)
      delta = (delta * w[l]).cwiseProduct(
          (fp.z[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return loss;
}

}  // namespace

double mlp_loss_and_gradients(const Mlp& model,
                              const Eigen::Ref<const Batch>& inputs,
                              const Eigen::Ref<const Eigen::VectorXd>& costs,
                              double target_clamp, std::vector<Batch>& grad_w,
                              std::vector<Eigen::VectorXd>& grad_b) {
  if (inputs.rows() != costs.size())
    throw ContractViolation("mlp loss: row count mismatch");
  const ForwardPass fp = training_forward(model, inputs);
  return backward(model, fp, costs, target_clamp, &grad_w, &grad_b).logit_mse;
}

double mlp_loss(const Mlp& model, const Eigen::Ref<const Batch>& inputs,
                const Eigen::Ref<const Eigen::VectorXd>& costs,
                double target_clamp) {
  const ForwardPass fp = training_forward(model, inputs);
  return backward(model, fp, costs, target_clamp, nullptr, nullptr).logit_mse;
}

TrainResult train_mlp(Mlp& model, const Eigen::Ref<const Batch>& inputs,
                      const Eigen::Ref<const Eigen::VectorXd>& costs,
                      const TrainConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };

  const int n = static_cast<int>(inputs.rows());
  if (n < 2) throw ContractViolation("train_mlp: need at least two samples");
  if (costs.size() != n) throw ContractViolation("train_mlp: size mismatch");
  if (cfg.batch_size < 1 || cfg.val_fraction < 0 || cfg.val_fraction >= 1)
    throw ContractViolation("train_mlp: bad config");

  Rng rng(cfg.seed);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.uniform_int(i + 1)]);

  int val_n = static_cast<int>(std::lround(cfg.val_fraction * n));
  if (cfg.val_fraction > 0 && val_n == 0) val_n = 1;
  if (val_n >= n) val_n = n - 1;
  const int train_n = n - val_n;

  Batch val_x(val_n, inputs.cols());
  Eigen::VectorXd val_c(val_n);
  for (int i = 0; i < val_n; ++i) {
    val_x.row(i) = inputs.row(perm[train_n + i]);
    val_c(i) = costs(perm[train_n + i]);
  }
  std::vector<int> train_idx(perm.begin(), perm.begin() + train_n);

  const auto eval_cost_mse = [&](const Batch& x, const Eigen::VectorXd& c) {
    if (c.size() == 0) return 0.0;
    const ForwardPass fp = training_forward(model, x);
    return backward(model, fp, c, cfg.target_clamp, nullptr, nullptr).cost_mse;
  };

  TrainResult result;
  {
    Batch tx(train_n, inputs.cols());
    Eigen::VectorXd tc(train_n);
    for (int i = 0; i < train_n; ++i) {
      tx.row(i) = inputs.row(train_idx[i]);
      tc(i) = costs(train_idx[i]);
    }
    EpochStats s;
    s.epoch = 0;
    s.train_mse = eval_cost_mse(tx, tc);
    s.val_mse = eval_cost_mse(val_x, val_c);
    s.wall_seconds = elapsed();
    result.history.push_back(s);
  }

  std::vector<Batch> vel_w, gw;
  std::vector<Eigen::VectorXd> vel_b, gb;
  for (std::size_t l = 0; l < model.weights().size(); ++l) {
    vel_w.push_back(Batch::Zero(model.weights()[l].rows(),
                                model.weights()[l].cols()));
    vel_b.push_back(Eigen::VectorXd::Zero(model.biases()[l].size()));
  }

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (int i = train_n - 1; i > 0; --i)
      std::swap(train_idx[i], train_idx[rng.uniform_int(i + 1)]);

    double mse_sum = 0;
    long mse_count = 0;
    for (int at = 0; at < train_n; at += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, train_n - at);
      Batch bx(bs, inputs.cols());
      Eigen::VectorXd bc(bs);
      for (int i = 0; i < bs; ++i) {
        bx.row(i) = inputs.row(train_idx[at + i]);
        bc(i) = costs(train_idx[at + i]);
      }
      const ForwardPass fp = training_forward(model, bx);
      const BatchLoss loss = backward(model, fp, bc, cfg.target_clamp, &gw, &gb);
      mse_sum += loss.cost_mse * bs;
      mse_count += bs;
      for (std::size_t l = 0; l < gw.size(); ++l) {
        vel_w[l] = cfg.momentum * vel_w[l] - cfg.learning_rate * gw[l];
        vel_b[l] = cfg.momentum * vel_b[l] - cfg.learning_rate * gb[l];
        model.mutable_weights()[l] += vel_w[l];
        model.mutable_biases()[l] += vel_b[l];
      }
    }

    EpochStats s;
    s.epoch = epoch;
    s.train_mse = mse_count ? mse_sum / mse_count : 0.0;
    s.val_mse = eval_cost_mse(val_x, val_c);
    s.wall_seconds = elapsed();
    result.history.push_back(s);

    if (cfg.time_budget_seconds > 0 && s.wall_seconds > cfg.time_budget_seconds)
      break;
  }

  result.train_seconds = elapsed();
  model.set_train_seconds(result.train_seconds);
  model.repack();
  return result;
}

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::string base64_encode(const unsigned char* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= len; i += 3) {
    const unsigned v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back(kB64Alphabet[v & 63]);
  }
  const std::size_t rem = len - i;
  if (rem == 1) {
    const unsigned v = data[i] << 16;
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back('=');
    out.push_back('=');
  } else if (rem == 2) {
    const unsigned v = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  unsigned acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    const int v = b64_value(c);
    if (v < 0) throw ContractViolation("base64: invalid character");
    acc = (acc << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

void save_mlp(const Mlp& model, const std::string& path) {
  require_little_endian();
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out.precision(17);
  out << "mlp v1\n";
  out << "state_dim = " << model.state_dim() << "\n";
  out << "condition_dim = " << model.condition_dim() << "\n";
  out << "layer_sizes =";
  for (int s : model.layer_sizes()) out << " " << s;
  out << "\n";
  out << "cost_scale = " << model.cost_scale() << "\n";
  if (model.train_seconds() >= 0)
    out << "train_seconds = " << model.train_seconds() << "\n";

  std::vector<double> payload;
  for (std::size_t l = 0; l < model.weights().size(); ++l) {
    const Batch& w = model.weights()[l];
    payload.insert(payload.end(), w.data(), w.data() + w.size());
    const Eigen::VectorXd& b = model.biases()[l];
    payload.insert(payload.end(), b.data(), b.data() + b.size());
  }
  out << "payload = "
      << base64_encode(reinterpret_cast<const unsigned char*>(payload.data()),
                       payload.size() * sizeof(double))
      << "\n";
}

Mlp load_mlp(const std::string& path) {
  require_little_endian();
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::string line;
  if (!std::getline(in, line) || line != "mlp v1")
    throw ParseError(path, 1, "expected `mlp v1` header");

  int state_dim = -1, condition_dim = -1;
  double cost_scale = -1, train_seconds = -1;
  std::vector<int> sizes;
  std::string payload;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path, lineno, "expected key = value");
    std::istringstream key_s(line.substr(0, eq));
    std::string key;
    key_s >> key;
    std::istringstream val(line.substr(eq + 1));
    if (key == "state_dim") val >> state_dim;
    else if (key == "condition_dim") val >> condition_dim;
    else if (key == "cost_scale") val >> cost_scale;
    else if (key == "train_seconds") val >> train_seconds;
    else if (key == "layer_sizes") {
      int s;
      while (val >> s) sizes.push_back(s);
    } else if (key == "payload") {
      val >> payload;
    } else {
      throw ParseError(path, lineno, "unknown key: " + key);
    }
  }
  if (state_dim < 1 || condition_dim < 0 || cost_scale <= 0 || sizes.size() < 2)
    throw ParseError(path, 0, "missing or invalid header fields");
  if (sizes.front() != 2 * state_dim + condition_dim || sizes.back() != 1)
    throw ParseError(path, 0, "layer sizes inconsistent with dims");

  const std::vector<unsigned char> bytes = base64_decode(payload);
  std::size_t expect = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    expect += static_cast<std::size_t>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
  if (bytes.size() != expect * sizeof(double))
    throw ParseError(path, 0, "payload size mismatch");

  Mlp model;
  model.state_dim_ = state_dim;
  model.condition_dim_ = condition_dim;
  model.cost_scale_ = cost_scale;
  model.train_seconds_ = train_seconds;
  const double* p = reinterpret_cast<const double*>(bytes.data());
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out_dim = sizes[l + 1];
    Batch w(out_dim, in);
    std::memcpy(w.data(), p, sizeof(double) * w.size());
    p += w.size();
    Eigen::VectorXd b(out_dim);
    std::memcpy(b.data(), p, sizeof(double) * b.size());
    p += b.size();
    model.w_.push_back(std::move(w));
    model.b_.push_back(std::move(b));
  }
  model.repack();
  return model;
}

}  // namespace kinoplan
