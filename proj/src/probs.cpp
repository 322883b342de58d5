#include "labelerr/probs.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <thread>

#include "labelerr/error.hpp"
#include "labelerr/rng.hpp"

namespace labelerr {

void FeatureDataset::validate() const {
  if (dim < 1) throw Error(ErrorKind::DimensionMismatch, "feature dimension must be >= 1");
  if (features.size() != ids.size() * dim) {
    throw Error(ErrorKind::DimensionMismatch, "feature matrix does not match example count");
  }
  if (labels.size() != ids.size()) {
    throw Error(ErrorKind::DimensionMismatch, "label count does not match example count");
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "non-finite feature value");
  }
}

ClassifierWeights ClassifierWeights::zeros(std::size_t dim, std::size_t num_classes) {
  return ClassifierWeights{dim, num_classes, std::vector<double>(dim * num_classes, 0.0),
                           std::vector<double>(num_classes, 0.0)};
}

void ClassifierWeights::predict_proba(std::span<const double> x, std::span<double> out) const {
  for (std::size_t c = 0; c < num_classes; ++c) out[c] = bias[c];
  for (std::size_t d = 0; d < dim; ++d) {
    const double xd = x[d];
    const double* w = weights.data() + d * num_classes;
    for (std::size_t c = 0; c < num_classes; ++c) out[c] += xd * w[c];
  }
  const double top = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (auto& v : out) {
    v = std::exp(v - top);
    sum += v;
  }
  for (auto& v : out) v /= sum;
}

double logit_loss(const FeatureDataset& data, const ClassifierWeights& params, double l2,
                  std::vector<double>* gradient) {
  const std::size_t n = data.size();
  const std::size_t m = params.num_classes;
  const std::size_t dim = params.dim;
  std::vector<double> p(m);
  if (gradient) gradient->assign(dim * m + m, 0.0);

  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = data.row(i);
    params.predict_proba(x, p);
    const auto y = static_cast<std::size_t>(data.labels[i]);
    loss -= std::log(p[y]);
    if (!gradient) continue;
    p[y] -= 1.0;
    auto& g = *gradient;
    for (std::size_t d = 0; d < dim; ++d) {
      double* gw = g.data() + d * m;
      for (std::size_t c = 0; c < m; ++c) gw[c] += x[d] * p[c];
    }
    double* gb = g.data() + dim * m;
    for (std::size_t c = 0; c < m; ++c) gb[c] += p[c];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double penalty = 0.0;
  for (double w : params.weights) penalty += w * w;
  loss = loss * inv_n + 0.5 * l2 * penalty;

  if (gradient) {
    auto& g = *gradient;
    for (auto& v : g) v *= inv_n;
    for (std::size_t k = 0; k < params.weights.size(); ++k) g[k] += l2 * params.weights[k];
  }
  return loss;
}

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

ClassifierWeights step(const ClassifierWeights& from, const std::vector<double>& grad, double lr) {
  ClassifierWeights out = from;
  const std::size_t nw = out.weights.size();
  for (std::size_t k = 0; k < nw; ++k) out.weights[k] -= lr * grad[k];
  for (std::size_t c = 0; c < out.bias.size(); ++c) out.bias[c] -= lr * grad[nw + c];
  return out;
}

}  // namespace

ClassifierWeights train_multinomial_logit(const FeatureDataset& train, const CvConfig& cfg,
                                          TrainingTrace* trace) {
  train.validate();
  if (train.size() == 0) throw Error(ErrorKind::EmptySubset, "no training examples");
  for (std::size_t c = 0; c < train.labels.num_classes(); ++c) {
    if (train.labels.class_counts()[c] == 0) {
      throw Error(ErrorKind::EmptyClass, "class " + std::to_string(c) + " absent from training data");
    }
  }
  if (!(cfg.learning_rate > 0.0) || !(cfg.l2 >= 0.0) || cfg.max_iters == 0 || !(cfg.grad_tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "invalid optimizer settings");
  }

  auto params = ClassifierWeights::zeros(train.dim, train.labels.num_classes());
  std::vector<double> grad;
  double loss = logit_loss(train, params, cfg.l2, &grad);
  if (!std::isfinite(loss)) throw Error(ErrorKind::NonFinite, "initial loss is not finite");

  TrainingTrace local;
  local.losses.push_back(loss);
  double lr = cfg.learning_rate;
  double gnorm = norm2(grad);
  std::size_t iter = 0;
  while (iter < cfg.max_iters && gnorm >= cfg.grad_tol) {
    // Plain gradient step; the step is halved whenever it would raise the loss.
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      auto candidate = step(params, grad, lr);
      std::vector<double> cand_grad;
      const double cand_loss = logit_loss(train, candidate, cfg.l2, &cand_grad);
      if (std::isfinite(cand_loss) && cand_loss <= loss) {
        params = std::move(candidate);
        grad = std::move(cand_grad);
        loss = cand_loss;
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted) {
      if (!std::isfinite(loss)) throw Error(ErrorKind::NonFinite, "loss diverged");
      break;
    }
    ++iter;
    local.losses.push_back(loss);
    gnorm = norm2(grad);
  }
  for (double w : params.weights) {
    if (!std::isfinite(w)) throw Error(ErrorKind::NonFinite, "weights diverged");
  }
  local.iterations = iter;
  local.final_grad_norm = gnorm;
  if (trace) *trace = std::move(local);
  return params;
}

std::vector<std::size_t> stratified_folds(const FeatureDataset& data, std::size_t k,
                                          std::uint64_t seed) {
  const std::size_t n = data.size();
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 folds");
  if (k > n) {
    throw Error(ErrorKind::FoldTooSmall,
                std::to_string(k) + " folds requested for " + std::to_string(n) + " examples");
  }
  const std::size_t m = data.labels.num_classes();
  std::vector<std::vector<std::size_t>> by_class(m);
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);

  Rng rng(seed);
  std::vector<std::size_t> fold(n, 0);
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < m; ++c) {
    auto& members = by_class[c];
    if (members.size() < 2) {
      throw Error(ErrorKind::FoldTooSmall,
                  "class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                      " example(s); every training split needs it");
    }
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return data.ids[a] < data.ids[b]; });
    rng.shuffle(members.begin(), members.end());
    for (std::size_t idx : members) fold[idx] = cursor++ % k;
  }
  return fold;
}

namespace {

FeatureDataset subset(const FeatureDataset& data, const std::vector<std::size_t>& rows) {
  FeatureDataset out;
  out.dim = data.dim;
  out.ids.reserve(rows.size());
  out.features.reserve(rows.size() * data.dim);
  std::vector<ClassId> labels;
  labels.reserve(rows.size());
  for (std::size_t i : rows) {
    out.ids.push_back(data.ids[i]);
    const auto r = data.row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    labels.push_back(data.labels[i]);
  }
  out.labels = NoisyLabels(std::move(labels), data.labels.num_classes());
  return out;
}

}  // namespace

ProbabilityMatrix out_of_sample_probs(const FeatureDataset& data, const CvConfig& cfg) {
  data.validate();
  const std::size_t n = data.size();
  const std::size_t m = data.labels.num_classes();
  if (m < 2) throw Error(ErrorKind::DimensionMismatch, "need at least 2 classes");

  // Work in id order so results do not depend on input order.
  std::vector<std::size_t> canonical(n);
  std::iota(canonical.begin(), canonical.end(), std::size_t{0});
  std::sort(canonical.begin(), canonical.end(),
            [&](std::size_t a, std::size_t b) { return data.ids[a] < data.ids[b]; });
  for (std::size_t k = 1; k < n; ++k) {
    if (data.ids[canonical[k]] == data.ids[canonical[k - 1]]) {
      throw Error(ErrorKind::InvalidArgument, "duplicate example id '" + data.ids[canonical[k]] + "'");
    }
  }

  const auto fold = stratified_folds(data, cfg.folds, cfg.seed);

  auto run_fold = [&](std::size_t f) {
    std::vector<std::size_t> train_rows;
    for (std::size_t i : canonical) {
      if (fold[i] != f) train_rows.push_back(i);
    }
    return train_multinomial_logit(subset(data, train_rows), cfg);
  };
  std::vector<double> values(n * m);
  const std::size_t batch = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < cfg.folds; start += batch) {
    const std::size_t stop = std::min(cfg.folds, start + batch);
    std::vector<std::future<ClassifierWeights>> jobs;
    for (std::size_t f = start; f < stop; ++f) {
      jobs.push_back(std::async(std::launch::async, run_fold, f));
    }
    for (std::size_t f = start; f < stop; ++f) {
      const auto model = jobs[f - start].get();
      for (std::size_t i = 0; i < n; ++i) {
        if (fold[i] == f) model.predict_proba(data.row(i), {values.data() + i * m, m});
      }
    }
  }
  return ProbabilityMatrix(n, m, std::move(values));
}

}  // namespace labelerr
