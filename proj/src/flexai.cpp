#include "hmai/flexai.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

namespace hmai {

std::string_view to_string(TimeReference r) {
  return r == TimeReference::Absolute ? "absolute" : "elapsed";
}

TimeReference parse_time_reference(std::string_view s) {
  if (s == "absolute") return TimeReference::Absolute;
  if (s == "elapsed") return TimeReference::Elapsed;
  throw ConfigError("unknown time reference '" + std::string(s) + "'");
}

std::string_view to_string(LossMode m) {
  return m == LossMode::StandardSa ? "standard_sa" : "current_state_max";
}

LossMode parse_loss_mode(std::string_view s) {
  if (s == "standard_sa") return LossMode::StandardSa;
  if (s == "current_state_max") return LossMode::CurrentStateMax;
  throw ConfigError("unknown loss mode '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// State encoding

void encode_state(const TaskRecord& task, const Platform& platform,
                  double now, const StateNormalization& norm,
                  std::span<double> out) {
  if (out.size() != state_size(platform.size())) {
    throw DomainError("state buffer has wrong size");
  }
  out[0] = task.amount / norm.amount_scale;
  out[1] = static_cast<double>(task.layer_num) / norm.layer_scale;
  out[2] = task.safety_time / norm.safety_time_scale;
  const double t_offset =
      norm.time_reference == TimeReference::Elapsed ? now : 0.0;
  std::size_t k = 3;
  for (const auto& a : platform.accelerators()) {
    out[k++] = a.info.energy / norm.energy_scale;
    out[k++] = (a.info.time - t_offset) / norm.time_scale;
    out[k++] = a.info.r_balance;
    out[k++] = a.info.ms / norm.ms_scale;
  }
}

std::vector<double> encode_state(const TaskRecord& task,
                                 const Platform& platform, double now,
                                 const StateNormalization& norm) {
  std::vector<double> s(state_size(platform.size()));
  encode_state(task, platform, now, norm, s);
  return s;
}

// ---------------------------------------------------------------------------
// Network

QNetwork::QNetwork(std::vector<std::size_t> layer_sizes)
    : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ConfigError("network needs >= 2 layer sizes");
  for (std::size_t s : sizes_) {
    if (s == 0) throw ConfigError("layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
    const auto in = static_cast<Eigen::Index>(sizes_[l]);
    weights_.push_back(Eigen::MatrixXd::Zero(out, in));
    biases_.push_back(Eigen::VectorXd::Zero(out));
  }
}

QNetwork QNetwork::initialized(std::vector<std::size_t> layer_sizes,
                               Rng& rng) {
  QNetwork net(std::move(layer_sizes));
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double bound =
        1.0 / std::sqrt(static_cast<double>(net.weights_[l].cols()));
    auto draw = [&] { return (2.0 * uniform01(rng) - 1.0) * bound; };
    for (Eigen::Index r = 0; r < net.weights_[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < net.weights_[l].cols(); ++c) {
        net.weights_[l](r, c) = draw();
      }
    }
    for (Eigen::Index r = 0; r < net.biases_[l].size(); ++r) {
      net.biases_[l](r) = draw();
    }
  }
  return net;
}

Eigen::VectorXd QNetwork::forward(std::span<const double> input) const {
  if (input.size() != input_size()) {
    throw DomainError("network input has " + std::to_string(input.size()) +
                      " entries, expected " + std::to_string(input_size()));
  }
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
      input.data(), static_cast<Eigen::Index>(input.size()));
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * a + biases_[l];
    a = l + 1 < weights_.size() ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

Eigen::MatrixXd QNetwork::forward_batch(const Eigen::MatrixXd& inputs) const {
  if (static_cast<std::size_t>(inputs.rows()) != input_size()) {
    throw DomainError("network batch has wrong input dimension");
  }
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * a;
    z.colwise() += biases_[l];
    a = l + 1 < weights_.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

std::size_t QNetwork::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

std::vector<double> QNetwork::flatten() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) {
        p.push_back(weights_[l](r, c));
      }
    }
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) {
      p.push_back(biases_[l](r));
    }
  }
  return p;
}

void QNetwork::unflatten(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw DomainError("parameter vector has wrong length");
  }
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) {
        weights_[l](r, c) = params[k++];
      }
    }
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) {
      biases_[l](r) = params[k++];
    }
  }
}

bool QNetwork::operator==(const QNetwork& o) const {
  if (sizes_ != o.sizes_) return false;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l] != o.weights_[l] || biases_[l] != o.biases_[l]) {
      return false;
    }
  }
  return true;
}

std::size_t argmax(std::span<const double> q) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return best;
}

std::size_t select_action(std::span<const double> q, double epsilon,
                          Rng& rng) {
  if (q.empty()) throw DomainError("empty Q-vector");
  if (epsilon > 0.0 && uniform01(rng) < epsilon) {
    return uniform_index(rng, q.size());
  }
  return argmax(q);
}

// ---------------------------------------------------------------------------
// Replay memory

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("memory_size must be positive");
}

void ReplayMemory::push(Transition t) {
  if (buffer_.size() == capacity_) buffer_.pop_front();
  buffer_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayMemory::sample(std::size_t n,
                                                    Rng& rng) const {
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(&buffer_[uniform_index(rng, buffer_.size())]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Learning

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0,1)");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size == 0) throw ConfigError("batch_size must be > 0");
  if (memory_size < batch_size) {
    throw ConfigError("memory_size must be >= batch_size");
  }
  if (target_sync_interval == 0 || train_interval == 0) {
    throw ConfigError("sync and train intervals must be > 0");
  }
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 &&
        epsilon_end <= 1.0)) {
    throw ConfigError("epsilon bounds must be in [0,1]");
  }
  if (!(epsilon_fraction > 0.0 && epsilon_fraction <= 1.0)) {
    throw ConfigError("epsilon_fraction must be in (0,1]");
  }
}

double td_loss(const QNetwork& eval, const QNetwork& target,
               std::span<const Transition* const> batch, double gamma,
               LossMode mode, Gradients* grad) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  const auto in = static_cast<Eigen::Index>(eval.input_size());
  Eigen::MatrixXd x(in, b);
  Eigen::MatrixXd x_next(in, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const Transition& t = *batch[static_cast<std::size_t>(j)];
    if (static_cast<Eigen::Index>(t.state.size()) != in ||
        static_cast<Eigen::Index>(t.next_state.size()) != in) {
      throw DomainError("transition state has wrong dimension");
    }
    x.col(j) = Eigen::Map<const Eigen::VectorXd>(t.state.data(), in);
    x_next.col(j) = Eigen::Map<const Eigen::VectorXd>(t.next_state.data(), in);
  }

  const Eigen::MatrixXd q_next = target.forward_batch(x_next);

  // Forward pass keeping activations for backprop.
  const std::size_t layers = eval.num_layers();
  std::vector<Eigen::MatrixXd> acts{x};
  std::vector<Eigen::MatrixXd> pre;
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = eval.weight(l) * acts.back();
    z.colwise() += eval.bias(l);
    pre.push_back(z);
    acts.push_back(l + 1 < layers ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z);
  }
  const Eigen::MatrixXd& q = acts.back();

  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(q.rows(), b);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < b; ++j) {
    const Transition& t = *batch[static_cast<std::size_t>(j)];
    const double y =
        t.terminal ? t.reward : t.reward + gamma * q_next.col(j).maxCoeff();
    Eigen::Index idx = static_cast<Eigen::Index>(t.action);
    if (mode == LossMode::CurrentStateMax) {
      q.col(j).maxCoeff(&idx);
    }
    const double diff = q(idx, j) - y;
    loss += diff * diff;
    d_out(idx, j) = 2.0 * diff / static_cast<double>(b);
  }
  loss /= static_cast<double>(b);

  if (grad) {
    grad->weights.assign(layers, {});
    grad->biases.assign(layers, {});
    Eigen::MatrixXd delta = d_out;
    for (std::size_t l = layers; l-- > 0;) {
      grad->weights[l] = delta * acts[l].transpose();
      grad->biases[l] = delta.rowwise().sum();
      if (l > 0) {
        Eigen::MatrixXd back = eval.weight(l).transpose() * delta;
        delta = back.cwiseProduct(
            (pre[l - 1].array() > 0.0).cast<double>().matrix());
      }
    }
  }
  return loss;
}

DqnAgent::DqnAgent(std::size_t state_dim, std::size_t num_actions,
                   AgentConfig cfg)
    : cfg_(std::move(cfg)), rng_(cfg_.seed), memory_(cfg_.memory_size) {
  cfg_.validate();
  std::vector<std::size_t> sizes{state_dim};
  sizes.insert(sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  sizes.push_back(num_actions);
  eval_ = QNetwork::initialized(sizes, rng_);
  target_ = QNetwork::initialized(sizes, rng_);
}

std::size_t DqnAgent::act(std::span<const double> state, double epsilon) {
  if (epsilon > 0.0 && uniform01(rng_) < epsilon) {
    return uniform_index(rng_, eval_.output_size());
  }
  const Eigen::VectorXd q = eval_.forward(state);
  return argmax(std::span<const double>(q.data(), q.size()));
}

double DqnAgent::train_on_batch(std::span<const Transition* const> batch) {
  Gradients g;
  const double loss =
      td_loss(eval_, target_, batch, cfg_.gamma, cfg_.loss_mode, &g);
  for (std::size_t l = 0; l < eval_.num_layers(); ++l) {
    eval_.weight(l) -= cfg_.learning_rate * g.weights[l];
    eval_.bias(l) -= cfg_.learning_rate * g.biases[l];
  }
  ++learn_steps_;
  if (learn_steps_ % cfg_.target_sync_interval == 0) sync_target();
  return loss;
}

std::optional<double> DqnAgent::train_step() {
  if (memory_.size() <= cfg_.batch_size) return std::nullopt;
  const auto batch = memory_.sample(cfg_.batch_size, rng_);
  return train_on_batch(batch);
}

void DqnAgent::sync_target() {
  target_ = eval_;
  ++sync_count_;
}

TrainResult train_agent(const EpisodeFactory& env, const AgentConfig& cfg,
                        std::size_t episodes, const TrainOptions& opts) {
  cfg.validate();
  TrainResult result;
  if (episodes == 0) {
    // Initial weights are those of an agent sized for the first episode.
    const TrainingEpisode ep = env(0);
    const auto n = static_cast<std::size_t>(ep.platform.total());
    DqnAgent agent(state_size(n), n, cfg);
    result.weights = agent.eval_net();
    return result;
  }

  std::optional<DqnAgent> agent;
  std::size_t num_actions = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    TrainingEpisode ep = env(e);
    const auto n = static_cast<std::size_t>(ep.platform.total());
    if (!agent) {
      agent.emplace(state_size(n), n, cfg);
      num_actions = n;
    } else if (n != num_actions) {
      throw DomainError("episode platforms must keep the same size");
    }
    const NormalizationScales norm =
        calibrate_norm(ep.queue, ep.platform, opts.rbalance_mode);
    Engine engine(ep.queue, Platform(ep.platform, {norm, opts.rbalance_mode}),
                  ep.sched_overhead);
    const double len = std::max<double>(1.0, static_cast<double>(ep.queue.size()));

    std::vector<double> state;
    if (!engine.done()) {
      state = encode_state(engine.next_task(), engine.platform(),
                           engine.next_release_time(), cfg.normalization);
    }
    double episode_reward = 0.0;
    double loss_sum = 0.0;
    std::size_t loss_n = 0;
    std::size_t step = 0;
    while (!engine.done()) {
      const double progress =
          (static_cast<double>(e) + static_cast<double>(step) / len) /
          static_cast<double>(episodes);
      const double anneal = std::min(1.0, progress / cfg.epsilon_fraction);
      const double epsilon =
          cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * anneal;

      const Released r = engine.take();
      const std::size_t action = agent->act(state, epsilon);
      const TaskOutcome& o = engine.dispatch(r, action, r.release_time);
      episode_reward += o.reward;

      Transition t;
      t.state = std::move(state);
      t.action = action;
      t.reward = o.reward;
      t.terminal = engine.done();
      if (t.terminal) {
        t.next_state.assign(t.state.size(), 0.0);
      } else {
        t.next_state = encode_state(engine.next_task(), engine.platform(),
                                    engine.next_release_time(),
                                    cfg.normalization);
        state = t.next_state;
      }
      agent->remember(std::move(t));

      if ((step + 1) % cfg.train_interval == 0) {
        if (auto loss = agent->train_step()) {
          result.loss_trace.push_back({e, step, *loss});
          loss_sum += *loss;
          ++loss_n;
        }
      }
      ++step;
    }
    engine.check_complete();
    result.episode_reward.push_back(episode_reward);
    if (opts.on_episode) {
      opts.on_episode(e, episode_reward,
                      loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0);
    }
  }
  result.weights = agent->eval_net();
  result.sync_count = agent->sync_count();
  return result;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

nlohmann::json normalization_json(const StateNormalization& n) {
  return {{"amount_scale", n.amount_scale},
          {"layer_scale", n.layer_scale},
          {"safety_time_scale", n.safety_time_scale},
          {"energy_scale", n.energy_scale},
          {"time_scale", n.time_scale},
          {"ms_scale", n.ms_scale},
          {"time_reference", std::string(to_string(n.time_reference))}};
}

StateNormalization normalization_from(const nlohmann::json& j) {
  StateNormalization n;
  n.amount_scale = j.at("amount_scale").get<double>();
  n.layer_scale = j.at("layer_scale").get<double>();
  n.safety_time_scale = j.at("safety_time_scale").get<double>();
  n.energy_scale = j.at("energy_scale").get<double>();
  n.time_scale = j.at("time_scale").get<double>();
  n.ms_scale = j.at("ms_scale").get<double>();
  n.time_reference =
      parse_time_reference(j.at("time_reference").get<std::string>());
  return n;
}

nlohmann::json config_json(const AgentConfig& c) {
  return {{"gamma", c.gamma},
          {"learning_rate", c.learning_rate},
          {"memory_size", c.memory_size},
          {"batch_size", c.batch_size},
          {"target_sync_interval", c.target_sync_interval},
          {"train_interval", c.train_interval},
          {"epsilon_start", c.epsilon_start},
          {"epsilon_end", c.epsilon_end},
          {"epsilon_fraction", c.epsilon_fraction},
          {"loss_mode", std::string(to_string(c.loss_mode))},
          {"hidden", c.hidden}};
}

AgentConfig config_from(const nlohmann::json& j) {
  AgentConfig c;
  c.gamma = j.at("gamma").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.memory_size = j.at("memory_size").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.target_sync_interval = j.at("target_sync_interval").get<std::size_t>();
  c.train_interval = j.at("train_interval").get<std::size_t>();
  c.epsilon_start = j.at("epsilon_start").get<double>();
  c.epsilon_end = j.at("epsilon_end").get<double>();
  c.epsilon_fraction = j.at("epsilon_fraction").get<double>();
  c.loss_mode = parse_loss_mode(j.at("loss_mode").get<std::string>());
  c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  return c;
}

}  // namespace

void save_weights(const AgentWeights& w, const std::string& path) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < w.net.num_layers(); ++l) {
    const auto& W = w.net.weight(l);
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(W.size()));
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) flat.push_back(W(r, c));
    }
    const auto& b = w.net.bias(l);
    layers.push_back({{"rows", W.rows()},
                      {"cols", W.cols()},
                      {"weights", flat},
                      {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  nlohmann::json j = {{"format", "hmai-qnetwork-v1"},
                      {"area", std::string(to_string(w.area))},
                      {"layer_sizes", w.net.layer_sizes()},
                      {"normalization", normalization_json(w.normalization)},
                      {"layers", layers},
                      {"config", config_json(w.config)},
                      {"seed", w.config.seed}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write weights file " + path);
  out << j.dump() << '\n';
  if (!out) throw IoError("failed writing weights file " + path);
}

AgentWeights load_weights(const std::string& path,
                          std::optional<std::size_t> expected_actions) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read weights file " + path);
  AgentWeights w;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != "hmai-qnetwork-v1") {
      throw IoError("unsupported weights format in " + path);
    }
    w.area = parse_area(j.at("area").get<std::string>());
    w.normalization = normalization_from(j.at("normalization"));
    w.config = config_from(j.at("config"));
    w.config.seed = j.at("seed").get<std::uint64_t>();
    w.config.normalization = w.normalization;
    const auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    w.net = QNetwork(sizes);
    const auto& layers = j.at("layers");
    if (layers.size() != w.net.num_layers()) {
      throw IoError("weights file layer count does not match layer_sizes");
    }
    for (std::size_t l = 0; l < w.net.num_layers(); ++l) {
      const auto flat = layers[l].at("weights").get<std::vector<double>>();
      const auto bias = layers[l].at("bias").get<std::vector<double>>();
      auto& W = w.net.weight(l);
      if (flat.size() != static_cast<std::size_t>(W.size()) ||
          bias.size() != static_cast<std::size_t>(w.net.bias(l).size())) {
        throw IoError("weights file layer " + std::to_string(l) +
                      " has the wrong number of parameters");
      }
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < W.rows(); ++r) {
        for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = flat[k++];
      }
      for (std::size_t r = 0; r < bias.size(); ++r) {
        w.net.bias(l)(static_cast<Eigen::Index>(r)) = bias[r];
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed weights file " + path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw IoError("malformed weights file " + path + ": " + e.what());
  }
  if (expected_actions && w.net.output_size() != *expected_actions) {
    throw DomainError("shape mismatch: weights have " +
                      std::to_string(w.net.output_size()) +
                      " outputs but the platform has " +
                      std::to_string(*expected_actions) + " accelerators");
  }
  return w;
}

FlexAiScheduler::FlexAiScheduler(QNetwork net, StateNormalization norm)
    : net_(std::move(net)), norm_(norm) {}

std::size_t FlexAiScheduler::decide(const TaskRecord& t,
                                    const PlatformView& v) {
  const Platform& p = v.p();
  if (net_.output_size() != p.size() ||
      net_.input_size() != state_size(p.size())) {
    throw DomainError("shape mismatch: network expects " +
                      std::to_string(net_.output_size()) +
                      " accelerators, platform has " +
                      std::to_string(p.size()));
  }
  state_.resize(state_size(p.size()));
  encode_state(t, p, v.now, norm_, state_);
  const Eigen::VectorXd q = net_.forward(state_);
  return argmax(std::span<const double>(q.data(), q.size()));
}

}  // namespace hmai
