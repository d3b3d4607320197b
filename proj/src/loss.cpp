#include "pml/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pml {

std::string to_string(LossKind kind) {
  return kind == LossKind::propml ? "propml" : "bce";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "propml") return LossKind::propml;
  if (s == "bce") return LossKind::bce;
  throw std::invalid_argument("unknown loss kind '" + s + "'");
}

namespace {

double clamp_prob(double p, double eps) {
  return std::min(std::max(p, eps), 1.0 - eps);
}

void validate(const Matrix& logits, const std::vector<std::vector<int>>& candidates,
              const LossConfig& config) {
  if (logits.rows() != candidates.size()) {
    throw std::invalid_argument("loss: logits rows != number of candidate sets");
  }
  if (config.epsilon <= 0.0 || config.epsilon >= 0.5) {
    throw std::invalid_argument("loss: epsilon must lie in (0, 0.5)");
  }
  const int C = static_cast<int>(logits.cols());
  for (const auto& row : candidates) {
    if (row.empty()) throw std::invalid_argument("loss: empty candidate set");
    for (int c : row) {
      if (c < 0 || c >= C) throw std::invalid_argument("loss: candidate index out of range");
    }
  }
}

}  // namespace

LossResult evaluate_loss(const Matrix& logits, const std::vector<std::vector<int>>& candidates,
                         const LossConfig& config) {
  validate(logits, candidates, config);
  const std::size_t n = logits.rows();
  const std::size_t C = logits.cols();
  const double eps = config.epsilon;
  const double inv_n = n ? 1.0 / static_cast<double>(n) : 0.0;

  LossResult out;
  out.grad_logits = Matrix(n, C, 0.0);
  double total = 0.0;

  std::vector<char> in_set(C);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(in_set.begin(), in_set.end(), 0);
    for (int c : candidates[i]) in_set[static_cast<std::size_t>(c)] = 1;

    double row_loss = 0.0;
    if (config.kind == LossKind::propml) {
      double sum_s = 0.0;
      for (int c : candidates[i]) {
        sum_s += clamp_prob(stable_sigmoid(logits(i, static_cast<std::size_t>(c))), eps);
      }
      double penalty = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        if (in_set[c]) continue;
        const double p = clamp_prob(stable_sigmoid(logits(i, c)), eps);
        penalty -= std::log(1.0 - p);
        out.grad_logits(i, c) = config.lambda * p * inv_n;
      }
      for (int ci : candidates[i]) {
        const std::size_t c = static_cast<std::size_t>(ci);
        const double p = clamp_prob(stable_sigmoid(logits(i, c)), eps);
        out.grad_logits(i, c) = -p * (1.0 - p) / sum_s * inv_n;
      }
      row_loss = -std::log(sum_s) + config.lambda * penalty;
    } else {
      for (std::size_t c = 0; c < C; ++c) {
        const double p = clamp_prob(stable_sigmoid(logits(i, c)), eps);
        if (in_set[c]) {
          row_loss -= std::log(p);
          out.grad_logits(i, c) = (p - 1.0) * inv_n;
        } else {
          row_loss -= std::log(1.0 - p);
          out.grad_logits(i, c) = p * inv_n;
        }
      }
    }
    total += row_loss;
  }

  out.value = total * inv_n;
  if (!std::isfinite(out.value) || !out.grad_logits.all_finite()) {
    throw std::runtime_error("loss: non-finite value or gradient");
  }
  return out;
}

double check_gradients(const Matrix& logits, const std::vector<std::vector<int>>& candidates,
                       const LossConfig& config) {
  const double h = 1e-5;
  const LossResult base = evaluate_loss(logits, candidates, config);
  double worst = 0.0;
  Matrix probe = logits;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      const double saved = probe(i, c);
      probe(i, c) = saved + h;
      const double up = evaluate_loss(probe, candidates, config).value;
      probe(i, c) = saved - h;
      const double down = evaluate_loss(probe, candidates, config).value;
      probe(i, c) = saved;

      const double numeric = (up - down) / (2.0 * h);
      const double analytic = base.grad_logits(i, c);
      const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
      worst = std::max(worst, std::fabs(analytic - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace pml
