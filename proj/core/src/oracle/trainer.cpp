#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "p2l/error.hpp"
#include "p2l/oracle.hpp"

namespace p2l::oracle {

namespace {

// Forward pass for one row: hidden activations and softmax probabilities.
void forward(const Model& m, std::span<const double> x, std::vector<double>& h, std::vector<double>& p) {
  h.assign(m.hidden, 0.0);
  for (std::size_t u = 0; u < m.hidden; ++u) {
    double a = m.b1[u];
    const double* w = m.w1.data() + u * m.in;
    for (std::size_t j = 0; j < m.in; ++j) a += w[j] * x[j];
    h[u] = a;
  }
  p.assign(m.classes, 0.0);
  double max_logit = -INFINITY;
  for (std::size_t c = 0; c < m.classes; ++c) {
    double z = m.b2[c];
    const double* w = m.w2.data() + c * m.hidden;
    for (std::size_t u = 0; u < m.hidden; ++u) z += w[u] * h[u];
    p[c] = z;
    max_logit = std::max(max_logit, z);
  }
  double denom = 0.0;
  for (auto& z : p) {
    z = std::exp(z - max_logit);
    denom += z;
  }
  for (auto& z : p) z /= denom;
}

void check_labels(const Model& m, const Dataset& data) {
  if (data.dim != m.in) throw Error(ErrorCode::DimensionMismatch, "dataset dim != model input dim");
  if (data.classes > m.classes) throw Error(ErrorCode::DimensionMismatch, "dataset has more classes than the head");
}

}  // namespace

void OracleConfig::validate() const {
  if (!(target_fraction > 0.0 && target_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "target_fraction must be in (0, 1]");
  }
  if (!(finetune_multiplier >= 0.0 && finetune_multiplier <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "finetune_multiplier must be in [0, 1]");
  }
  if (!(learn_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learn_rate must be > 0");
  if (batch == 0 || hidden_dim == 0) throw Error(ErrorCode::InvalidArgument, "batch and hidden_dim must be >= 1");
}

Model Model::zeros(std::size_t in, std::size_t hidden, std::size_t classes) {
  Model m;
  m.in = in;
  m.hidden = hidden;
  m.classes = classes;
  m.w1.assign(hidden * in, 0.0);
  m.b1.assign(hidden, 0.0);
  m.w2.assign(classes * hidden, 0.0);
  m.b2.assign(classes, 0.0);
  return m;
}

double softmax_loss(const Model& m, const Dataset& data, std::span<const std::size_t> rows) {
  check_labels(m, data);
  std::vector<double> h;
  std::vector<double> p;
  double loss = 0.0;
  for (auto i : rows) {
    forward(m, data.row(i), h, p);
    loss -= std::log(std::max(p[data.y[i]], 1e-300));
  }
  return loss / static_cast<double>(rows.size());
}

Model softmax_gradient(const Model& m, const Dataset& data, std::span<const std::size_t> rows) {
  check_labels(m, data);
  Model g = Model::zeros(m.in, m.hidden, m.classes);
  std::vector<double> h;
  std::vector<double> p;
  std::vector<double> dh(m.hidden);
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (auto i : rows) {
    const auto x = data.row(i);
    forward(m, x, h, p);
    p[data.y[i]] -= 1.0;  // dL/dz
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t c = 0; c < m.classes; ++c) {
      const double dz = p[c] * inv_n;
      g.b2[c] += dz;
      double* gw = g.w2.data() + c * m.hidden;
      const double* w = m.w2.data() + c * m.hidden;
      for (std::size_t u = 0; u < m.hidden; ++u) {
        gw[u] += dz * h[u];
        dh[u] += dz * w[u];
      }
    }
    for (std::size_t u = 0; u < m.hidden; ++u) {
      g.b1[u] += dh[u];
      double* gw = g.w1.data() + u * m.in;
      for (std::size_t j = 0; j < m.in; ++j) gw[j] += dh[u] * x[j];
    }
  }
  return g;
}

double accuracy(const Model& m, const Dataset& data) {
  check_labels(m, data);
  if (data.size() == 0) throw Error(ErrorCode::InvalidArgument, "accuracy on an empty split");
  std::vector<double> h;
  std::vector<double> p;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward(m, data.row(i), h, p);
    const auto pred = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    if (pred == data.y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

Model init_model(std::size_t in, std::size_t hidden, std::size_t classes, std::uint64_t stream) {
  Model m = Model::zeros(in, hidden, classes);
  std::mt19937_64 rng(stream);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto& w : m.w1) w = s1 * gauss(rng);
  for (auto& w : m.w2) w = s2 * gauss(rng);
  return m;
}

void sgd_train(Model& m, const Dataset& data, std::size_t epochs, std::size_t batch, double rep_rate,
               double head_rate, std::uint64_t stream) {
  check_labels(m, data);
  if (data.size() == 0 || epochs == 0) return;
  std::mt19937_64 rng(stream);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const Model g = softmax_gradient(m, data, rows);
      for (std::size_t i = 0; i < m.w1.size(); ++i) m.w1[i] -= rep_rate * g.w1[i];
      for (std::size_t i = 0; i < m.b1.size(); ++i) m.b1[i] -= rep_rate * g.b1[i];
      for (std::size_t i = 0; i < m.w2.size(); ++i) m.w2[i] -= head_rate * g.w2[i];
      for (std::size_t i = 0; i < m.b2.size(); ++i) m.b2[i] -= head_rate * g.b2[i];
    }
  }
}

Model pretrain(const OracleWorld& world, const std::string& source, const OracleConfig& cfg) {
  cfg.validate();
  const auto& d = world.domain(source);
  if (d.spec.role != DomainRole::Source) throw Error(ErrorCode::UnknownName, "'" + source + "' is not a source");
  Model m = init_model(world.feature_dim, cfg.hidden_dim, d.spec.classes, stream_seed(world.seed, {"init", source}));
  sgd_train(m, d.source_train, cfg.source_epochs, cfg.batch, cfg.learn_rate, cfg.learn_rate,
            stream_seed(world.seed, {"pretrain", source}));
  return m;
}

Dataset target_train(const OracleWorld& world, const std::string& target, const OracleConfig& cfg) {
  cfg.validate();
  const auto& d = world.domain(target);
  const auto n = static_cast<std::size_t>(std::floor(cfg.target_fraction * static_cast<double>(d.target_pool.size())));
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "target split of '" + target + "' is empty");
  return d.target_pool.head(n);
}

double finetune(const OracleWorld& world, const Model* pretrained, const std::string& source_tag,
                const std::string& target, const OracleConfig& cfg, double rate_scale) {
  const Dataset train = target_train(world, target, cfg);
  const auto& d = world.domain(target);
  const double alpha = cfg.learn_rate * rate_scale;
  const std::string scale_tag = std::to_string(rate_scale);

  Model m;
  double rep_rate = alpha;
  if (pretrained != nullptr) {
    if (pretrained->in != world.feature_dim) throw Error(ErrorCode::DimensionMismatch, "pretrained input dim");
    // Keep the representation, replace the head for the target's classes.
    m = Model::zeros(pretrained->in, pretrained->hidden, d.spec.classes);
    m.w1 = pretrained->w1;
    m.b1 = pretrained->b1;
    std::mt19937_64 rng(stream_seed(world.seed, {"head", target, source_tag}));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double s2 = 1.0 / std::sqrt(static_cast<double>(m.hidden));
    for (auto& w : m.w2) w = s2 * gauss(rng);
    rep_rate = cfg.finetune_multiplier * alpha;
  } else {
    m = init_model(world.feature_dim, cfg.hidden_dim, d.spec.classes, stream_seed(world.seed, {"scratch", target}));
  }
  sgd_train(m, train, cfg.target_epochs, cfg.batch, rep_rate, alpha,
            stream_seed(world.seed, {"finetune", target, source_tag, scale_tag}));
  return accuracy(m, d.target_val);
}

double train_transfer(const OracleWorld& world, const std::optional<std::string>& source,
                      const std::string& target, const OracleConfig& cfg) {
  cfg.validate();
  if (!source) return finetune(world, nullptr, "", target, cfg);
  const Model m = pretrain(world, *source, cfg);
  return finetune(world, &m, *source, target, cfg);
}

}  // namespace p2l::oracle
