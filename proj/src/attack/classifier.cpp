#include "mia/attack/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mia/core/errors.hpp"
#include "mia/core/random.hpp"
#include "mia/nn/adam.hpp"
#include "mia/nn/archive.hpp"

namespace mia {

using nn::Mat;
using json = nlohmann::json;

nn::Mat<double> to_network_input(const PairedSample& sample) { return sample.matrix.cast<double>(); }

nn::Mat<double> to_network_input(const CollectiveSample& sample) {
  if (sample.pairs.empty()) throw DomainError("collective sample holds no pairs");
  const auto C = sample.pairs.front().rows();
  const auto L = sample.pairs.front().cols();
  const auto m = static_cast<Eigen::Index>(sample.pairs.size());
  Mat<double> x(C, L * m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& pair = sample.pairs[static_cast<std::size_t>(j)];
    for (Eigen::Index l = 0; l < L; ++l) x.col(l * m + j) = pair.col(l).cast<double>();
  }
  return x;
}

namespace {

double clamp_probability(double p) { return std::clamp(p, 1e-15, 1.0 - 1e-15); }

// Uniform forward/backward interface over the two architectures.
struct TcnOps {
  TcnNet<double>* net;
  using Cache = TcnNet<double>::Cache;
  double forward(const Mat<double>& x, Cache* cache, Rng* rng) const { return net->forward(x, cache, rng); }
  void backward(double dlogit, const Cache& cache) const { net->backward(dlogit, cache); }
  nn::ParamList<double> params() const { return net->params(); }
};

struct ResNetOps {
  ResNetNet<double>* net;
  nn::Extent extent;
  using Cache = ResNetNet<double>::Cache;
  double forward(const Mat<double>& x, Cache* cache, Rng*) const { return net->forward(x, extent, cache); }
  void backward(double dlogit, const Cache& cache) const { net->backward(dlogit, cache); }
  nn::ParamList<double> params() const { return net->params(); }
};

std::vector<Mat<double>> network_inputs(const AttackDataset& ds) {
  std::vector<Mat<double>> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    out.push_back(ds.mode == AttackMode::individual ? to_network_input(ds.pairs[i])
                                                    : to_network_input(ds.stacks[i]));
  return out;
}

template <typename Ops>
double mean_loss(const Ops& ops, const std::vector<Mat<double>>& inputs, const AttackDataset& ds,
                 const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  double total = 0.0;
  for (auto i : idx) total += nn::bce_with_logit(ops.forward(inputs[i], nullptr, nullptr), ds.label(i));
  return total / static_cast<double>(idx.size());
}

// Accumulates d(mean BCE)/d(theta) over idx, dropout off.
template <typename Ops>
void accumulate_gradient(const Ops& ops, const std::vector<Mat<double>>& inputs, const AttackDataset& ds,
                         const std::vector<std::size_t>& idx) {
  typename Ops::Cache cache;
  for (auto i : idx) {
    const double z = ops.forward(inputs[i], &cache, nullptr);
    ops.backward((nn::sigmoid(z) - ds.label(i)) / static_cast<double>(idx.size()), cache);
  }
}

template <typename Ops>
TrainingMetadata run_training(const Ops& ops, const AttackDataset& ds, const TrainSpec& spec,
                              double weight_decay, std::uint64_t seed) {
  const auto inputs = network_inputs(ds);
  std::vector<std::size_t> train = ds.indices(Split::train);
  const std::vector<std::size_t> val = ds.indices(Split::validation);
  const auto params = ops.params();
  nn::Adam<double> adam(params, nn::AdamConfig{spec.learning_rate, 0.9, 0.999, 1e-8, weight_decay});
  Rng rng = make_rng(seed, 31);

  TrainingMetadata meta;
  meta.seed = seed;
  meta.initial_train_loss = mean_loss(ops, inputs, ds, train);
  const bool use_val = !val.empty();
  double best = use_val ? mean_loss(ops, inputs, ds, val) : meta.initial_train_loss;
  auto best_params = nn::snapshot(params);
  std::size_t since_best = 0;

  typename Ops::Cache cache;
  for (std::size_t epoch = 1; epoch <= spec.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    for (std::size_t start = 0; start < train.size(); start += spec.batch_size) {
      const std::size_t end = std::min(train.size(), start + spec.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      adam.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const auto i = train[k];
        const double z = ops.forward(inputs[i], &cache, &rng);
        if (!std::isfinite(z)) throw DivergenceError("attack training: non-finite logit");
        ops.backward((nn::sigmoid(z) - ds.label(i)) * scale, cache);
      }
      adam.step();
    }
    const double train_loss = mean_loss(ops, inputs, ds, train);
    const double val_loss = use_val ? mean_loss(ops, inputs, ds, val) : train_loss;
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
      throw DivergenceError("attack training: loss became non-finite at epoch " + std::to_string(epoch));
    meta.train_losses.push_back(train_loss);
    meta.validation_losses.push_back(val_loss);
    meta.epochs_run = epoch;
    if (val_loss < best) {
      best = val_loss;
      best_params = nn::snapshot(params);
      meta.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= spec.patience) {
      break;
    }
  }
  nn::restore(params, best_params);
  meta.best_validation_loss = best;
  return meta;
}

void check_mode(const AttackDataset& ds, const ArchitectureConfig& config) {
  const bool tcn = std::holds_alternative<TcnConfig>(config);
  if (tcn && ds.mode != AttackMode::individual)
    throw DomainError("train_attack: the TCN architecture expects an individual-mode dataset");
  if (!tcn && ds.mode != AttackMode::collective)
    throw DomainError("train_attack: the ResNet architecture expects a collective-mode dataset");
  if (const auto* t = std::get_if<TcnConfig>(&config)) {
    if (t->levels <= 0 || t->channels <= 0 || t->kernel <= 0 || t->dropout < 0.0 || t->dropout >= 1.0)
      throw DomainError("TcnConfig: invalid sizes or dropout");
    if (t->receptive_field() < ds.clip_length)
      throw DomainError("TcnConfig: receptive field " + std::to_string(t->receptive_field()) +
                        " does not cover clipping length " + std::to_string(ds.clip_length));
  } else {
    const auto& r = std::get<ResNetConfig>(config);
    if (r.stages <= 0 || r.blocks_per_stage <= 0 || r.base_channels <= 0 || r.weight_decay < 0.0)
      throw DomainError("ResNetConfig: invalid sizes or weight decay");
  }
}

json config_to_json(const ArchitectureConfig& config) {
  if (const auto* t = std::get_if<TcnConfig>(&config))
    return {{"architecture", "tcn"},
            {"levels", t->levels},
            {"channels", t->channels},
            {"kernel", t->kernel},
            {"dropout", t->dropout}};
  const auto& r = std::get<ResNetConfig>(config);
  return {{"architecture", "resnet"},
          {"stages", r.stages},
          {"blocks_per_stage", r.blocks_per_stage},
          {"base_channels", r.base_channels},
          {"weight_decay", r.weight_decay}};
}

ArchitectureConfig config_from_json(const json& j) {
  if (j.at("architecture") == "tcn")
    return TcnConfig{j.at("levels").get<int>(), j.at("channels").get<int>(), j.at("kernel").get<int>(),
                     j.at("dropout").get<double>()};
  return ResNetConfig{j.at("stages").get<int>(), j.at("blocks_per_stage").get<int>(),
                      j.at("base_channels").get<int>(), j.at("weight_decay").get<double>()};
}

}  // namespace

AttackClassifier AttackClassifier::create(const AttackDataset& ds, const ArchitectureConfig& config,
                                          std::uint64_t seed) {
  check_mode(ds, config);
  AttackClassifier c;
  c.mode_ = ds.mode;
  c.action_dim_ = ds.action_dim;
  c.clip_length_ = ds.clip_length;
  c.m_ = ds.m;
  c.config_ = config;
  c.metadata_.seed = seed;
  Rng rng = make_rng(seed, 29);
  const int channels = static_cast<int>(2 * ds.action_dim);
  if (const auto* t = std::get_if<TcnConfig>(&config))
    c.tcn_ = std::make_shared<TcnNet<double>>(channels, *t, rng);
  else
    c.resnet_ = std::make_shared<ResNetNet<double>>(channels, std::get<ResNetConfig>(config), rng);
  return c;
}

AttackClassifier train_attack(const AttackDataset& ds, const ArchitectureConfig& config, const TrainSpec& spec,
                              std::uint64_t seed) {
  check_mode(ds, config);
  if (!(spec.learning_rate > 0.0)) throw DomainError("TrainSpec: learning rate must be positive");
  if (spec.batch_size == 0) throw DomainError("TrainSpec: batch size must be positive");
  if (ds.count(Split::train, 0) == 0 || ds.count(Split::train, 1) == 0)
    throw DomainError("train_attack: the train split needs both labels");
  AttackClassifier c = AttackClassifier::create(ds, config, seed);
  if (c.tcn_) {
    c.metadata_ = run_training(TcnOps{c.tcn_.get()}, ds, spec, 0.0, seed);
  } else {
    const nn::Extent e{static_cast<int>(ds.clip_length), static_cast<int>(ds.m)};
    c.metadata_ = run_training(ResNetOps{c.resnet_.get(), e}, ds, spec,
                               std::get<ResNetConfig>(config).weight_decay, seed);
  }
  return c;
}

double AttackClassifier::logit(const PairedSample& sample) const {
  if (mode_ != AttackMode::individual) throw DomainError("classifier expects collective samples");
  if (sample.matrix.rows() != static_cast<Eigen::Index>(2 * action_dim_) ||
      sample.matrix.cols() != static_cast<Eigen::Index>(clip_length_))
    throw DomainError("sample shape does not match the classifier (expected 2d^A x L = " +
                      std::to_string(2 * action_dim_) + " x " + std::to_string(clip_length_) + ")");
  return tcn_->forward(to_network_input(sample));
}

double AttackClassifier::logit(const CollectiveSample& sample) const {
  if (mode_ != AttackMode::collective) throw DomainError("classifier expects individual samples");
  if (sample.m() != m_) throw DomainError("collective sample has the wrong m");
  for (const auto& p : sample.pairs)
    if (p.rows() != static_cast<Eigen::Index>(2 * action_dim_) ||
        p.cols() != static_cast<Eigen::Index>(clip_length_))
      throw DomainError("collective sample slice does not match the classifier shape");
  return resnet_->forward(to_network_input(sample),
                          nn::Extent{static_cast<int>(clip_length_), static_cast<int>(m_)});
}

double AttackClassifier::loss(const AttackDataset& ds, const std::vector<std::size_t>& indices) const {
  if (indices.empty()) return 0.0;
  double total = 0.0;
  for (auto i : indices) {
    const double z = ds.mode == AttackMode::individual ? logit(ds.pairs[i]) : logit(ds.stacks[i]);
    total += nn::bce_with_logit(z, ds.label(i));
  }
  return total / static_cast<double>(indices.size());
}

std::vector<double> AttackClassifier::predict(const AttackDataset& ds, std::vector<std::size_t> indices) const {
  if (indices.empty()) {
    indices.resize(ds.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
  }
  std::vector<double> out;
  out.reserve(indices.size());
  for (auto i : indices)
    out.push_back(ds.mode == AttackMode::individual ? predict_membership(*this, ds.pairs[i])
                                                    : predict_membership(*this, ds.stacks[i]));
  return out;
}

double predict_membership(const AttackClassifier& classifier, const PairedSample& sample) {
  return clamp_probability(nn::sigmoid(classifier.logit(sample)));
}

double predict_membership(const AttackClassifier& classifier, const CollectiveSample& sample) {
  return clamp_probability(nn::sigmoid(classifier.logit(sample)));
}

void AttackClassifier::save(const std::filesystem::path& path, const std::string& dataset_hash) const {
  json config = config_to_json(config_);
  config["mode"] = std::string(to_string(mode_));
  config["action_dim"] = action_dim_;
  config["clip_length"] = clip_length_;
  config["m"] = m_;
  const json meta = {{"seed", metadata_.seed},
                     {"epochs_run", metadata_.epochs_run},
                     {"best_epoch", metadata_.best_epoch},
                     {"initial_train_loss", metadata_.initial_train_loss},
                     {"best_validation_loss", metadata_.best_validation_loss},
                     {"train_losses", metadata_.train_losses},
                     {"validation_losses", metadata_.validation_losses},
                     {"dataset_hash", dataset_hash}};
  const auto tensors = tcn_ ? nn::tensors_to_json(tcn_->params()) : nn::tensors_to_json(resnet_->params());
  nn::save_archive(path, nn::make_archive("attack-classifier", nullptr, config, meta, tensors));
}

AttackClassifier AttackClassifier::load(const std::filesystem::path& path) {
  const json a = nn::load_archive(path, "attack-classifier");
  try {
    const json& cfg = a.at("config");
    AttackDataset shape;
    shape.mode = parse_attack_mode(cfg.at("mode").get<std::string>());
    shape.action_dim = cfg.at("action_dim").get<std::size_t>();
    shape.clip_length = cfg.at("clip_length").get<std::size_t>();
    shape.m = cfg.at("m").get<std::size_t>();
    AttackClassifier c = create(shape, config_from_json(cfg), 0);
    if (c.tcn_)
      nn::tensors_from_json(c.tcn_->params(), a.at("tensors"));
    else
      nn::tensors_from_json(c.resnet_->params(), a.at("tensors"));
    const json& meta = a.at("meta");
    c.metadata_.seed = meta.at("seed").get<std::uint64_t>();
    c.metadata_.epochs_run = meta.at("epochs_run").get<std::size_t>();
    c.metadata_.best_epoch = meta.at("best_epoch").get<std::size_t>();
    c.metadata_.initial_train_loss = meta.at("initial_train_loss").get<double>();
    c.metadata_.best_validation_loss = meta.at("best_validation_loss").get<double>();
    c.metadata_.train_losses = meta.at("train_losses").get<std::vector<double>>();
    c.metadata_.validation_losses = meta.at("validation_losses").get<std::vector<double>>();
    return c;
  } catch (const json::exception& e) {
    throw FormatError("classifier archive " + path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw FormatError("classifier archive " + path.string() + ": " + e.what());
  }
}

namespace {

template <typename Ops>
GradientCheckResult check_gradients(const Ops& ops, const AttackDataset& ds, std::uint64_t seed,
                                    std::size_t samples, double step) {
  const auto inputs = network_inputs(ds);
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto params = ops.params();
  nn::zero_grads(params);
  accumulate_gradient(ops, inputs, ds, all);

  std::vector<std::pair<std::size_t, Eigen::Index>> entries;
  for (std::size_t p = 0; p < params.size(); ++p)
    for (Eigen::Index k = 0; k < params[p]->size(); ++k) entries.emplace_back(p, k);
  Rng rng = make_rng(seed, 37);
  std::shuffle(entries.begin(), entries.end(), rng);
  if (entries.size() > samples) entries.resize(samples);

  GradientCheckResult result;
  result.parameters = nn::count_params(params);
  for (const auto& [p, k] : entries) {
    double& v = params[p]->value.data()[k];
    const double saved = v;
    v = saved + step;
    const double up = mean_loss(ops, inputs, ds, all);
    v = saved - step;
    const double down = mean_loss(ops, inputs, ds, all);
    v = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double analytic = params[p]->grad.data()[k];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    result.max_relative_error = std::max(result.max_relative_error, std::abs(analytic - numeric) / denom);
    ++result.checked;
  }
  return result;
}

}  // namespace

GradientCheckResult gradient_check(const ArchitectureConfig& config, const AttackDataset& probe,
                                   std::uint64_t seed, std::size_t samples, double step) {
  if (probe.size() == 0) throw DomainError("gradient_check: empty probe dataset");
  check_mode(probe, config);
  Rng rng = make_rng(seed, 29);
  const int channels = static_cast<int>(2 * probe.action_dim);
  if (const auto* t = std::get_if<TcnConfig>(&config)) {
    TcnNet<double> net(channels, *t, rng);
    return check_gradients(TcnOps{&net}, probe, seed, samples, step);
  }
  ResNetNet<double> net(channels, std::get<ResNetConfig>(config), rng);
  const nn::Extent extent{static_cast<int>(probe.clip_length), static_cast<int>(probe.m)};
  return check_gradients(ResNetOps{&net, extent}, probe, seed, samples, step);
}

}  // namespace mia
