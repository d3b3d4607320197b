#include "pml/mlp.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "pml/rng.hpp"

namespace pml {

namespace {

constexpr char kMagic[4] = {'P', 'M', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;

Matrix glorot(std::size_t fan_in, std::size_t fan_out, Rng rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_in, fan_out);
  for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
  return w;
}

void add_row_bias(Matrix& z, const Matrix& bias) {
  for (std::size_t r = 0; r < z.rows(); ++r) {
    for (std::size_t c = 0; c < z.cols(); ++c) z(r, c) += bias(0, c);
  }
}

// dZ = dA masked by the ReLU gate (z > 0).
Matrix relu_backward(const Matrix& dA, const Matrix& z) {
  Matrix out = dA;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (z.data()[i] <= 0.0) out.data()[i] = 0.0;
  }
  return out;
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void write_doubles(std::ofstream& out, const Matrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(m.data()[i]);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 8);
  }
}

void read_doubles(std::ifstream& in, Matrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    m.data()[i] = std::bit_cast<double>(bits);
  }
}

}  // namespace

MlpModel init_model(const std::array<std::size_t, 4>& dims, std::uint64_t seed) {
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("init_model: all dims must be positive");
  }
  Rng root(seed);
  MlpModel m;
  m.dims = dims;
  m.w1 = glorot(dims[0], dims[1], root.substream(0));
  m.w2 = glorot(dims[1], dims[2], root.substream(1));
  m.w3 = glorot(dims[2], dims[3], root.substream(2));
  m.b1 = Matrix(1, dims[1], 0.0);
  m.b2 = Matrix(1, dims[2], 0.0);
  m.b3 = Matrix(1, dims[3], 0.0);
  return m;
}

ForwardCache forward(const MlpModel& model, const Matrix& x) {
  if (x.cols() != model.dims[0]) {
    throw std::invalid_argument("forward: input width does not match model");
  }
  ForwardCache cache;
  cache.x = x;
  cache.z1 = matmul(x, model.w1);
  add_row_bias(cache.z1, model.b1);
  cache.a1 = relu(cache.z1);
  cache.z2 = matmul(cache.a1, model.w2);
  add_row_bias(cache.z2, model.b2);
  cache.a2 = relu(cache.z2);
  cache.logits = matmul(cache.a2, model.w3);
  add_row_bias(cache.logits, model.b3);
  return cache;
}

Matrix predict_logits(const MlpModel& model, const Matrix& x) {
  return forward(model, x).logits;
}

Matrix predict_proba(const MlpModel& model, const Matrix& x, double epsilon) {
  Matrix p = sigmoid(predict_logits(model, x));
  for (std::size_t i = 0; i < p.size(); ++i) {
    double v = p.data()[i];
    if (v < epsilon) v = epsilon;
    if (v > 1.0 - epsilon) v = 1.0 - epsilon;
    p.data()[i] = v;
  }
  return p;
}

MlpGradients backward(const MlpModel& model, const ForwardCache& cache,
                      const Matrix& grad_logits) {
  MlpGradients g;
  g.w3 = matmul(transpose(cache.a2), grad_logits);
  g.b3 = reduce_sum(grad_logits, Axis::cols);
  const Matrix dA2 = matmul(grad_logits, transpose(model.w3));
  const Matrix dZ2 = relu_backward(dA2, cache.z2);
  g.w2 = matmul(transpose(cache.a1), dZ2);
  g.b2 = reduce_sum(dZ2, Axis::cols);
  const Matrix dA1 = matmul(dZ2, transpose(model.w2));
  const Matrix dZ1 = relu_backward(dA1, cache.z1);
  g.w1 = matmul(transpose(cache.x), dZ1);
  g.b1 = reduce_sum(dZ1, Axis::cols);
  return g;
}

AdamState make_adam_state(const MlpModel& model) {
  AdamState s;
  auto zero_like = [](const Matrix& m) { return Matrix(m.rows(), m.cols(), 0.0); };
  for (const Matrix* p : {&model.w1, &model.b1, &model.w2, &model.b2, &model.w3, &model.b3}) {
    s.m.push_back(zero_like(*p));
    s.v.push_back(zero_like(*p));
  }
  return s;
}

void adam_step(MlpModel& model, const MlpGradients& grads, AdamState& state,
               const TrainConfig& config) {
  Matrix* params[6] = {&model.w1, &model.b1, &model.w2, &model.b2, &model.w3, &model.b3};
  const Matrix* gs[6] = {&grads.w1, &grads.b1, &grads.w2, &grads.b2, &grads.w3, &grads.b3};

  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));

  for (int k = 0; k < 6; ++k) {
    Matrix& p = *params[k];
    const Matrix& g = *gs[k];
    if (!p.same_shape(g)) throw std::invalid_argument("adam_step: gradient shape mismatch");
    Matrix& m = state.m[static_cast<std::size_t>(k)];
    Matrix& v = state.v[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g.data()[i];
      m.data()[i] = config.beta1 * m.data()[i] + (1.0 - config.beta1) * gi;
      v.data()[i] = config.beta2 * v.data()[i] + (1.0 - config.beta2) * gi * gi;
      const double mhat = m.data()[i] / bc1;
      const double vhat = v.data()[i] / bc2;
      p.data()[i] -= config.lr * mhat / (std::sqrt(vhat) + config.adam_eps);
    }
    if (!p.all_finite()) throw std::runtime_error("adam_step: non-finite parameter");
  }
}

TrainTrace train(MlpModel& model, const Dataset& ds,
                 const std::vector<std::vector<int>>& candidates,
                 const std::vector<std::size_t>& indices, const TrainConfig& config) {
  if (indices.empty()) throw std::invalid_argument("train: empty training set");
  if (candidates.size() != ds.num_instances()) {
    throw std::invalid_argument("train: candidate rows do not match dataset");
  }
  if (config.batch == 0) throw std::invalid_argument("train: batch size must be positive");

  Rng root(config.seed);
  AdamState adam = make_adam_state(model);
  TrainTrace trace;
  trace.epoch_loss.reserve(static_cast<std::size_t>(config.epochs));

  std::vector<std::size_t> order(indices);
  const std::size_t n = order.size();
  const std::size_t d = ds.dim();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng erng = root.substream(static_cast<std::uint64_t>(epoch));
    erng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch) {
      const std::size_t stop = std::min(n, start + config.batch);
      const std::size_t bs = stop - start;

      Matrix x(bs, d);
      std::vector<std::vector<int>> cand(bs);
      for (std::size_t r = 0; r < bs; ++r) {
        const std::size_t i = order[start + r];
        for (std::size_t j = 0; j < d; ++j) x(r, j) = ds.features(i, j);
        cand[r] = candidates[i];
      }

      const ForwardCache cache = forward(model, x);
      const LossResult loss = evaluate_loss(cache.logits, cand, config.loss);
      const MlpGradients grads = backward(model, cache, loss.grad_logits);
      adam_step(model, grads, adam, config);
      loss_sum += loss.value * static_cast<double>(bs);
    }
    trace.epoch_loss.push_back(loss_sum / static_cast<double>(n));
  }
  return trace;
}

void save_model(const MlpModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path);
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  for (std::size_t dim : model.dims) write_u32(out, static_cast<std::uint32_t>(dim));
  for (const Matrix* p : {&model.w1, &model.b1, &model.w2, &model.b2, &model.w3, &model.b3}) {
    write_doubles(out, *p);
  }
  if (!out) throw DataError("write failed for " + path);
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw DataError(path + ": not a model checkpoint (bad magic)");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  std::array<std::size_t, 4> dims;
  for (auto& d : dims) d = read_u32(in);
  for (std::size_t d : dims) {
    if (d == 0) throw DataError(path + ": corrupt checkpoint (zero dimension)");
  }

  MlpModel m;
  m.dims = dims;
  m.w1 = Matrix(dims[0], dims[1]);
  m.b1 = Matrix(1, dims[1]);
  m.w2 = Matrix(dims[1], dims[2]);
  m.b2 = Matrix(1, dims[2]);
  m.w3 = Matrix(dims[2], dims[3]);
  m.b3 = Matrix(1, dims[3]);
  for (Matrix* p : {&m.w1, &m.b1, &m.w2, &m.b2, &m.w3, &m.b3}) read_doubles(in, *p);
  if (!in) throw DataError(path + ": truncated checkpoint");
  char extra;
  if (in.read(&extra, 1)) throw DataError(path + ": trailing bytes after checkpoint");
  for (const Matrix* p : {&m.w1, &m.b1, &m.w2, &m.b2, &m.w3, &m.b3}) {
    if (!p->all_finite()) throw DataError(path + ": non-finite parameter in checkpoint");
  }
  return m;
}

}  // namespace pml
