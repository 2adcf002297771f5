#pragma once

// Rainbow-style training machinery: epsilon-greedy selection over expected
// distributional Q-values, proportional prioritized replay, n-step Double-DQN
// targets, TD loss, global-norm clipping, Adam and periodic target sync.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "hrap.hpp"
#include "network.hpp"
#include "random.hpp"

namespace vqr::agent {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Transition {
    VectorXd s;
    int a = 0;
    double r = 0.0;
    VectorXd s_next;
    bool done = false;
};

enum class LossMode { scalar_td, categorical_ce };

inline std::string to_string(LossMode m) { return m == LossMode::scalar_td ? "scalar_td" : "categorical_ce"; }
inline LossMode loss_mode_from_string(const std::string& s) {
    if (s == "scalar_td") return LossMode::scalar_td;
    if (s == "categorical_ce") return LossMode::categorical_ce;
    throw ConfigError("unknown loss mode '" + s + "'");
}

struct AgentConfig {
    double gamma = 0.99;
    int n_step = 3;
    double learning_rate = 1e-4;
    int batch_size = 64;
    long target_sync_every = 1000;
    double eps_start = 1.0;
    double eps_decay = 0.9995;
    double eps_min = 0.05;
    double clip_norm = 10.0;
    int buffer_capacity = 100000;
    double alpha = 0.6;
    double eps_priority = 1e-6;
    int train_every = 1;
    int warmup = 1000;
    bool prioritized = true;
    LossMode loss = LossMode::scalar_td;
    bool importance_sampling = false;
    double is_beta_start = 0.4;
    long is_beta_steps = 100000;

    void validate() const {
        if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("agent: gamma must be in (0, 1]");
        if (n_step < 1) throw ConfigError("agent: n_step must be >= 1");
        if (eps_min > eps_start) throw ConfigError("agent: eps_min must be <= eps_start");
        if (batch_size < 1 || buffer_capacity < 1) throw ConfigError("agent: batch and capacity must be >= 1");
        if (train_every < 1) throw ConfigError("agent: train_every must be >= 1");
        if (target_sync_every < 1) throw ConfigError("agent: target_sync_every must be >= 1");
        if (!(eps_priority > 0.0)) throw ConfigError("agent: eps_priority must be > 0");
    }

    friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

/// Binary sum tree over leaf priorities.
class SumTree {
public:
    explicit SumTree(std::size_t capacity = 1) : leaves_(std::bit_ceil(std::max<std::size_t>(capacity, 1))),
                                                 nodes_(2 * leaves_, 0.0) {}

    void set(std::size_t i, double value) {
        std::size_t k = i + leaves_;
        nodes_[k] = value;
        for (k /= 2; k >= 1; k /= 2) nodes_[k] = nodes_[2 * k] + nodes_[2 * k + 1];
    }
    double get(std::size_t i) const { return nodes_[i + leaves_]; }
    double total() const { return nodes_[1]; }

    /// Leaf whose cumulative range contains `mass`, with mass in [0, total).
    std::size_t find(double mass) const {
        std::size_t k = 1;
        while (k < leaves_) {
            const double left = nodes_[2 * k];
            if (mass < left || nodes_[2 * k + 1] <= 0.0) {
                k = 2 * k;
            } else {
                mass -= left;
                k = 2 * k + 1;
            }
        }
        return k - leaves_;
    }

private:
    std::size_t leaves_;
    std::vector<double> nodes_;
};

/// Proportional prioritized replay over a FIFO ring of single-step
/// transitions. Consecutive ring entries keep their insertion sequence so
/// n-step windows can be read back from any sampled index.
class PERBuffer {
public:
    PERBuffer(int capacity, double alpha, double eps_priority, bool prioritized = true)
        : capacity_(static_cast<std::size_t>(capacity)), alpha_(alpha), eps_(eps_priority),
          prioritized_(prioritized), tree_(capacity_), data_(capacity_), seq_(capacity_, 0) {
        require(capacity >= 1, "PERBuffer: capacity must be >= 1");
    }

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    double alpha() const { return alpha_; }
    double eps_priority() const { return eps_; }
    double max_priority() const { return max_priority_; }
    double priority(std::size_t i) const { return tree_.get(i); }
    double total_priority() const { return tree_.total(); }
    const Transition& at(std::size_t i) const { return data_[i]; }
    std::uint64_t sequence(std::size_t i) const { return seq_[i]; }

    /// Inserts at the current max priority, evicting the oldest entry when full.
    void store(Transition t) {
        const std::size_t i = next_;
        data_[i] = std::move(t);
        seq_[i] = inserted_++;
        tree_.set(i, prioritized_ ? max_priority_ : 1.0);
        next_ = (next_ + 1) % capacity_;
        size_ = std::min(size_ + 1, capacity_);
    }

    /// Priority from a TD error: |delta|^alpha + eps.
    double priority_from_td(double delta) const { return std::pow(std::abs(delta), alpha_) + eps_; }

    void update_priority(std::size_t i, double delta) {
        if (!prioritized_) return;
        const double p = priority_from_td(delta);
        tree_.set(i, p);
        max_priority_ = std::max(max_priority_, p);
    }

    /// Sampling probabilities as printed: (|d_i|^a + e) / (sum_j |d_j|^a + e),
    /// i.e. stored priorities over the sum of raw |d|^a plus a single e.
    std::vector<double> printed_probabilities() const {
        std::vector<double> p(size_);
        double raw_sum = 0.0;
        for (std::size_t i = 0; i < size_; ++i) raw_sum += tree_.get(i) - eps_;
        for (std::size_t i = 0; i < size_; ++i) p[i] = tree_.get(i) / (raw_sum + eps_);
        return p;
    }

    /// Normalized sampling probability of slot i.
    double probability(std::size_t i) const { return tree_.get(i) / tree_.total(); }

    /// Draws `batch` indices with replacement, proportional to priority.
    /// Returns nullopt while the buffer holds fewer than `batch` entries.
    std::optional<std::vector<std::size_t>> sample(int batch, Rng& rng) const {
        if (batch < 1 || size_ < static_cast<std::size_t>(batch)) return std::nullopt;
        std::vector<std::size_t> out(static_cast<std::size_t>(batch));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double total = tree_.total();
        for (auto& idx : out) {
            idx = std::min(tree_.find(u(rng) * total), size_ - 1);
        }
        return out;
    }

    /// Up to n consecutive transitions starting at slot i, stopping after a terminal.
    std::vector<const Transition*> window(std::size_t i, int n) const {
        std::vector<const Transition*> w;
        for (int k = 0; k < n; ++k) {
            const std::size_t j = (i + static_cast<std::size_t>(k)) % capacity_;
            if (k > 0 && (j == next_ || seq_[j] != seq_[i] + static_cast<std::uint64_t>(k))) break;
            if (k > 0 && size_ < capacity_ && j >= size_) break;
            w.push_back(&data_[j]);
            if (data_[j].done) break;
        }
        return w;
    }

private:
    std::size_t capacity_;
    double alpha_;
    double eps_;
    bool prioritized_;
    SumTree tree_;
    std::vector<Transition> data_;
    std::vector<std::uint64_t> seq_;
    std::size_t next_ = 0;
    std::size_t size_ = 0;
    std::uint64_t inserted_ = 0;
    double max_priority_ = 1.0;
};

/// Reward part and bootstrap of an n-step window.
struct NStepParts {
    double reward = 0.0;     // sum_k gamma^k r_k over the first m steps
    double discount = 0.0;   // gamma^m, or 0 when the window hits a terminal
    const VectorXd* bootstrap = nullptr;
    int steps = 0;
};

inline NStepParts n_step_parts(std::span<const Transition* const> window, double gamma) {
    require(!window.empty(), "n_step: empty window");
    NStepParts parts;
    double g = 1.0;
    for (const Transition* t : window) {
        parts.reward += g * t->r;
        g *= gamma;
        ++parts.steps;
        parts.bootstrap = &t->s_next;
        if (t->done) return parts; // no bootstrap past a terminal
    }
    parts.discount = g;
    return parts;
}

inline int argmax_lowest(const VectorXd& q) {
    int best = 0;
    for (int a = 1; a < q.size(); ++a)
        if (q[a] > q[best]) best = a;
    return best;
}

/// G = sum_k gamma^k r_k + gamma^m Q_target(s', argmax_a Q_main(s', a)).
/// `main_q` and `target_q` map an observation to a vector of Q-values.
template <class MainQ, class TargetQ>
double n_step_return(std::span<const Transition* const> window, double gamma, MainQ&& main_q, TargetQ&& target_q) {
    const auto parts = n_step_parts(window, gamma);
    if (parts.discount == 0.0) return parts.reward;
    const VectorXd q_main = main_q(*parts.bootstrap);
    const VectorXd q_target = target_q(*parts.bootstrap);
    return parts.reward + parts.discount * q_target[argmax_lowest(q_main)];
}

/// Epsilon-greedy over expected Q-values; ties go to the lowest index.
inline int select_action(const net::QNetwork& qnet, const VectorXd& obs, double epsilon, Rng& rng,
                         net::Mode mode = net::Mode::train) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < epsilon) {
        std::uniform_int_distribution<int> pick(0, qnet.config().num_actions - 1);
        return pick(rng);
    }
    const auto cache = qnet.forward(obs, mode);
    return argmax_lowest(qnet.q_values(cache).col(0));
}

/// C51 projection of r + discount * z onto the support.
inline VectorXd project_distribution(const VectorXd& next_probs, double reward, double discount,
                                     const VectorXd& support) {
    const int N = static_cast<int>(support.size());
    const double v_min = support[0], v_max = support[N - 1];
    const double dz = (v_max - v_min) / (N - 1);
    VectorXd m = VectorXd::Zero(N);
    for (int j = 0; j < N; ++j) {
        const double tz = std::clamp(reward + discount * support[j], v_min, v_max);
        const double b = (tz - v_min) / dz;
        const auto lo = static_cast<int>(std::floor(b));
        const auto hi = static_cast<int>(std::ceil(b));
        if (lo == hi) {
            m[lo] += next_probs[j];
        } else {
            m[lo] += next_probs[j] * (hi - b);
            m[hi] += next_probs[j] * (b - lo);
        }
    }
    return m;
}

struct Batch {
    std::vector<std::size_t> indices;
    MatrixXd s;         // obs x B
    MatrixXd bootstrap; // obs x B (unused columns when discount == 0)
    std::vector<int> actions;
    VectorXd reward_part;
    VectorXd discount;
    VectorXd is_weight; // ones unless importance sampling is on
};

struct LossResult {
    double loss = 0.0;
    VectorXd td;        // G - Q_main(s, a)
    VectorXd target;    // G
    net::ParamVector grad;
};

struct TrainStats {
    double loss = 0.0;
    double grad_norm = 0.0;    // before clipping
    double clipped_norm = 0.0; // after clipping
    double mean_abs_td = 0.0;
    bool synced = false;
};

class Agent {
public:
    Agent(const AgentConfig& config, const net::NetworkConfig& net_config, std::uint64_t seed)
        : config_(config), main_(net_config, seed), target_(main_),
          buffer_(config.buffer_capacity, config.alpha, config.eps_priority, config.prioritized),
          action_rng_(make_rng(seed, "agent-action")), sample_rng_(make_rng(seed, "agent-sample")),
          epsilon_(config.eps_start) {
        config_.validate();
        adam_.lr = config_.learning_rate;
    }

    const AgentConfig& config() const { return config_; }
    net::QNetwork& main() { return main_; }
    const net::QNetwork& main() const { return main_; }
    net::QNetwork& target() { return target_; }
    const net::QNetwork& target() const { return target_; }
    PERBuffer& buffer() { return buffer_; }
    const PERBuffer& buffer() const { return buffer_; }
    Rng& action_rng() { return action_rng_; }
    Rng& sample_rng() { return sample_rng_; }
    double epsilon() const { return epsilon_; }
    void set_epsilon(double e) { epsilon_ = e; }
    long train_steps() const { return train_steps_; }
    long env_steps() const { return env_steps_; }
    const net::Adam& optimizer() const { return adam_; }

    int act(const VectorXd& obs) { return select_action(main_, obs, epsilon_, action_rng_, net::Mode::train); }

    void store(Transition t) {
        buffer_.store(std::move(t));
        ++env_steps_;
    }

    bool ready() const {
        return buffer_.size() >= static_cast<std::size_t>(std::max(config_.warmup, config_.batch_size));
    }
    bool should_train() const { return ready() && env_steps_ % config_.train_every == 0; }

    /// epsilon <- max(epsilon * decay, eps_min)
    void decay_epsilon() { epsilon_ = std::max(epsilon_ * config_.eps_decay, config_.eps_min); }

    void sync_target() { target_.params() = main_.params(); }

    double is_beta() const {
        const double frac = std::min(1.0, static_cast<double>(train_steps_) / static_cast<double>(config_.is_beta_steps));
        return config_.is_beta_start + frac * (1.0 - config_.is_beta_start);
    }

    Batch make_batch(const std::vector<std::size_t>& indices) const {
        const int B = static_cast<int>(indices.size());
        const auto dim = main_.config().input_dim;
        Batch batch;
        batch.indices = indices;
        batch.s.resize(dim, B);
        batch.bootstrap = MatrixXd::Zero(dim, B);
        batch.actions.resize(indices.size());
        batch.reward_part.resize(B);
        batch.discount.resize(B);
        batch.is_weight = VectorXd::Ones(B);
        for (int b = 0; b < B; ++b) {
            const auto w = buffer_.window(indices[static_cast<std::size_t>(b)], config_.n_step);
            const auto parts = n_step_parts(w, config_.gamma);
            batch.s.col(b) = w.front()->s;
            batch.actions[static_cast<std::size_t>(b)] = w.front()->a;
            batch.reward_part[b] = parts.reward;
            batch.discount[b] = parts.discount;
            if (parts.discount != 0.0) batch.bootstrap.col(b) = *parts.bootstrap;
        }
        if (config_.importance_sampling && config_.prioritized) {
            const double beta = is_beta();
            const double n = static_cast<double>(buffer_.size());
            double max_w = 0.0;
            for (int b = 0; b < B; ++b) {
                batch.is_weight[b] = std::pow(n * buffer_.probability(indices[static_cast<std::size_t>(b)]), -beta);
                max_w = std::max(max_w, batch.is_weight[b]);
            }
            batch.is_weight /= max_w;
        }
        return batch;
    }

    /// Targets, TD errors, loss and parameter gradient for one batch, using
    /// the main network's current noise.
    LossResult compute_loss(const Batch& batch) const {
        const int B = static_cast<int>(batch.indices.size());
        const auto& ncfg = main_.config();
        const auto cache = main_.forward(batch.s, net::Mode::train);
        const MatrixXd q = main_.q_values(cache);

        // Double DQN: action from the main network, value from the target.
        const auto boot_main = main_.forward(batch.bootstrap, net::Mode::train);
        const auto boot_target = target_.forward(batch.bootstrap, net::Mode::eval);
        const MatrixXd q_boot_main = main_.q_values(boot_main);
        const MatrixXd q_boot_target = target_.q_values(boot_target);

        LossResult res;
        res.td.resize(B);
        res.target.resize(B);
        std::vector<int> a_star(static_cast<std::size_t>(B));
        for (int b = 0; b < B; ++b) {
            a_star[static_cast<std::size_t>(b)] = argmax_lowest(q_boot_main.col(b));
            double g = batch.reward_part[b];
            if (batch.discount[b] != 0.0) g += batch.discount[b] * q_boot_target(a_star[static_cast<std::size_t>(b)], b);
            res.target[b] = g;
            res.td[b] = g - q(batch.actions[static_cast<std::size_t>(b)], b);
        }

        MatrixXd d_out = MatrixXd::Zero(cache.output.rows(), B);
        if (config_.loss == LossMode::scalar_td || ncfg.head == net::HeadKind::scalar) {
            MatrixXd d_q = MatrixXd::Zero(ncfg.num_actions, B);
            double loss = 0.0;
            for (int b = 0; b < B; ++b) {
                loss += batch.is_weight[b] * res.td[b] * res.td[b];
                d_q(batch.actions[static_cast<std::size_t>(b)], b) = -2.0 * batch.is_weight[b] * res.td[b] / B;
            }
            res.loss = loss / B;
            d_out = main_.output_grad_from_q(d_q);
        } else {
            const int N = ncfg.atoms;
            const VectorXd z = ncfg.support();
            double loss = 0.0;
            for (int b = 0; b < B; ++b) {
                VectorXd next = VectorXd::Zero(N);
                if (batch.discount[b] != 0.0)
                    next = boot_target.output.block(a_star[static_cast<std::size_t>(b)] * N, b, N, 1);
                else
                    next[0] = 1.0; // point mass; discount 0 makes its location irrelevant
                const VectorXd m = project_distribution(next, batch.reward_part[b], batch.discount[b], z);
                const int a = batch.actions[static_cast<std::size_t>(b)];
                const auto p = cache.output.block(a * N, b, N, 1);
                for (int i = 0; i < N; ++i) {
                    const double pi = std::max(p(i, 0), 1e-12);
                    loss -= batch.is_weight[b] * m[i] * std::log(pi);
                    d_out(a * N + i, b) = -batch.is_weight[b] * m[i] / (pi * B);
                }
            }
            res.loss = loss / B;
        }
        res.grad = main_.backward(cache, d_out);
        return res;
    }

    /// One optimization step. Returns nullopt while the buffer is not warm.
    std::optional<TrainStats> train_step() {
        if (!ready()) return std::nullopt;
        main_.resample_noise();
        auto indices = buffer_.sample(config_.batch_size, sample_rng_);
        if (!indices) return std::nullopt;
        const Batch batch = make_batch(*indices);
        LossResult res = compute_loss(batch);

        TrainStats stats;
        stats.loss = res.loss;
        if (!std::isfinite(res.loss))
            throw NonFiniteError("train_step: non-finite loss " + std::to_string(res.loss) + " at step " +
                                 std::to_string(train_steps_));
        stats.grad_norm = net::clip_global_norm(res.grad, config_.clip_norm);
        if (!std::isfinite(stats.grad_norm))
            throw NonFiniteError("train_step: non-finite gradient norm at step " + std::to_string(train_steps_));
        stats.clipped_norm = net::global_norm(res.grad);
        adam_.apply(main_.params(), res.grad);

        for (std::size_t b = 0; b < batch.indices.size(); ++b) {
            buffer_.update_priority(batch.indices[b], res.td[static_cast<Eigen::Index>(b)]);
            stats.mean_abs_td += std::abs(res.td[static_cast<Eigen::Index>(b)]);
        }
        stats.mean_abs_td /= static_cast<double>(batch.indices.size());
        ++train_steps_;
        if (train_steps_ % config_.target_sync_every == 0) {
            sync_target();
            stats.synced = true;
        }
        return stats;
    }

private:
    AgentConfig config_;
    net::QNetwork main_;
    net::QNetwork target_;
    net::Adam adam_;
    PERBuffer buffer_;
    Rng action_rng_;
    Rng sample_rng_;
    double epsilon_;
    long train_steps_ = 0;
    long env_steps_ = 0;
};

/// Greedy eval-mode rollout on one instance; returns the final-step reward.
inline double greedy_episode(const net::QNetwork& qnet, const hrap::HrapConfig& config, std::uint64_t episode_seed,
                             hrap::ObservationMode mode) {
    auto [state, obs] = hrap::reset(config, episode_seed, mode);
    double last = 0.0;
    Rng unused(0);
    while (!state.done) {
        const VectorXd x = Eigen::Map<const VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
        const int a = select_action(qnet, x, 0.0, unused, net::Mode::eval);
        auto out = hrap::step(state, a, mode);
        last = out.reward;
        obs = std::move(out.observation);
    }
    return last;
}

inline std::uint64_t eval_episode_seed(std::uint64_t seed, int k) {
    return derive_seed(seed, "eval-episode", static_cast<std::uint64_t>(k));
}
inline std::uint64_t train_episode_seed(std::uint64_t seed, long episode) {
    return derive_seed(seed, "train-episode", static_cast<std::uint64_t>(episode));
}

/// Per-episode final rewards of the greedy eval-mode policy on the held-out stream.
inline std::vector<double> evaluate_episodes(const net::QNetwork& qnet, const hrap::HrapConfig& config, int episodes,
                                             std::uint64_t seed, hrap::ObservationMode mode) {
    std::vector<double> rewards;
    rewards.reserve(static_cast<std::size_t>(episodes));
    for (int k = 0; k < episodes; ++k) rewards.push_back(greedy_episode(qnet, config, eval_episode_seed(seed, k), mode));
    return rewards;
}

inline double evaluate(const net::QNetwork& qnet, const hrap::HrapConfig& config, int episodes, std::uint64_t seed,
                       hrap::ObservationMode mode) {
    const auto r = evaluate_episodes(qnet, config, episodes, seed, mode);
    double s = 0.0;
    for (double x : r) s += x;
    return s / static_cast<double>(r.size());
}

/// Uniform-random policy on the same held-out stream as evaluate().
inline std::vector<double> random_policy_episodes(const hrap::HrapConfig& config, int episodes, std::uint64_t seed) {
    Rng rng = make_rng(seed, "eval-random-policy");
    std::uniform_int_distribution<int> pick(0, config.officers - 1);
    std::vector<double> rewards;
    for (int k = 0; k < episodes; ++k) {
        auto [state, obs] = hrap::reset(config, eval_episode_seed(seed, k), hrap::ObservationMode::literal);
        double last = 0.0;
        while (!state.done) last = hrap::step(state, pick(rng), hrap::ObservationMode::literal).reward;
        rewards.push_back(last);
    }
    return rewards;
}

} // namespace vqr::agent
