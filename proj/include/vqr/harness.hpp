#pragma once

// Experiment configuration, seeded training/evaluation runs, topology
// ablation and circuit-metric reports. Every run writes a config snapshot
// that is sufficient to reproduce it on the same build.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agent.hpp"
#include "error.hpp"
#include "hrap.hpp"
#include "metrics.hpp"
#include "network.hpp"

namespace vqr::harness {

namespace fs = std::filesystem;
using nlohmann::json;

enum class Variant { random, ddqn, rainbow, vqr };

inline std::string to_string(Variant v) {
    switch (v) {
    case Variant::random: return "random";
    case Variant::ddqn: return "ddqn";
    case Variant::rainbow: return "rainbow";
    case Variant::vqr: return "vqr";
    }
    return "?";
}

inline Variant variant_from_string(const std::string& s) {
    if (s == "random") return Variant::random;
    if (s == "ddqn") return Variant::ddqn;
    if (s == "rainbow") return Variant::rainbow;
    if (s == "vqr") return Variant::vqr;
    throw ConfigError("unknown agent variant '" + s + "'");
}

inline constexpr const char* kCurveFile = "curve.csv";
inline constexpr const char* kEvalFile = "eval.json";
inline constexpr const char* kCheckpointFile = "checkpoint.json";
inline constexpr const char* kSnapshotFile = "config.snapshot";

struct ExperimentConfig {
    hrap::HrapConfig hrap;
    Variant variant = Variant::vqr;
    agent::AgentConfig agent;
    net::NetworkConfig network;
    hrap::ObservationMode observation = hrap::ObservationMode::augmented;
    int episodes = 5000;
    int eval_episodes = 200;
    int checkpoint_window = 100;
    std::uint64_t master_seed = 0;
    std::string output_dir = "runs/default";

    /// Forces the fields each variant fixes and fills derived network sizes.
    ExperimentConfig resolved() const {
        ExperimentConfig c = *this;
        c.network.input_dim = static_cast<int>(hrap::observation_size(c.hrap, c.observation));
        c.network.num_actions = c.hrap.officers;
        switch (c.variant) {
        case Variant::vqr:
            c.network.features = net::FeatureKind::quantum;
            c.network.head = net::HeadKind::distributional;
            c.network.noisy = true;
            c.agent.prioritized = true;
            break;
        case Variant::rainbow:
            c.network.features = net::FeatureKind::dense_tanh;
            c.network.head = net::HeadKind::distributional;
            c.network.noisy = true;
            c.agent.prioritized = true;
            break;
        case Variant::ddqn:
            c.network.features = net::FeatureKind::none;
            c.network.head = net::HeadKind::scalar;
            c.network.noisy = false;
            c.agent.prioritized = false;
            c.agent.n_step = 1;
            c.agent.loss = agent::LossMode::scalar_td;
            c.agent.importance_sampling = false;
            break;
        case Variant::random:
            break;
        }
        return c;
    }

    void validate() const {
        hrap.validate();
        if (episodes < 1) throw ConfigError("experiment: episodes must be >= 1");
        if (eval_episodes < 1) throw ConfigError("experiment: eval_episodes must be >= 1");
        if (checkpoint_window < 1) throw ConfigError("experiment: checkpoint_window must be >= 1");
        if (variant != Variant::random) {
            agent.validate();
            resolved().network.validate();
        }
    }
};

// ---- key = value config text ------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    std::istringstream is(v);
    T out{};
    is >> out;
    if (is.fail() || !is.eof()) throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    return out;
}

} // namespace detail

/// Ordered key/value pairs describing every field of an ExperimentConfig.
inline std::vector<std::pair<std::string, std::string>> to_key_values(const ExperimentConfig& c) {
    using detail::fmt_double;
    const auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    return {
        {"officers", std::to_string(c.hrap.officers)},
        {"events", std::to_string(c.hrap.events)},
        {"tasks", std::to_string(c.hrap.tasks)},
        {"value_lo", std::to_string(c.hrap.value_lo)},
        {"value_hi", std::to_string(c.hrap.value_hi)},
        {"variant", to_string(c.variant)},
        {"observation", c.observation == hrap::ObservationMode::augmented ? "augmented" : "literal"},
        {"episodes", std::to_string(c.episodes)},
        {"eval_episodes", std::to_string(c.eval_episodes)},
        {"checkpoint_window", std::to_string(c.checkpoint_window)},
        {"seed", std::to_string(c.master_seed)},
        {"output_dir", c.output_dir},
        {"gamma", fmt_double(c.agent.gamma)},
        {"n_step", std::to_string(c.agent.n_step)},
        {"learning_rate", fmt_double(c.agent.learning_rate)},
        {"batch_size", std::to_string(c.agent.batch_size)},
        {"target_sync_every", std::to_string(c.agent.target_sync_every)},
        {"eps_start", fmt_double(c.agent.eps_start)},
        {"eps_decay", fmt_double(c.agent.eps_decay)},
        {"eps_min", fmt_double(c.agent.eps_min)},
        {"clip_norm", fmt_double(c.agent.clip_norm)},
        {"buffer_capacity", std::to_string(c.agent.buffer_capacity)},
        {"alpha", fmt_double(c.agent.alpha)},
        {"eps_priority", fmt_double(c.agent.eps_priority)},
        {"train_every", std::to_string(c.agent.train_every)},
        {"warmup", std::to_string(c.agent.warmup)},
        {"prioritized", b(c.agent.prioritized)},
        {"loss", agent::to_string(c.agent.loss)},
        {"importance_sampling", b(c.agent.importance_sampling)},
        {"is_beta_start", fmt_double(c.agent.is_beta_start)},
        {"is_beta_steps", std::to_string(c.agent.is_beta_steps)},
        {"hidden", std::to_string(c.network.hidden)},
        {"n_q", std::to_string(c.network.circuit.n_qubits)},
        {"n_l", std::to_string(c.network.circuit.n_layers)},
        {"topology", std::string(qc::to_string(c.network.circuit.topology))},
        {"hadamard_every_layer", b(c.network.circuit.hadamard_every_layer)},
        {"atoms", std::to_string(c.network.atoms)},
        {"v_min", fmt_double(c.network.v_min)},
        {"v_max", fmt_double(c.network.v_max)},
        {"angle_scale", fmt_double(c.network.angle_scale)},
        {"dueling", net::to_string(c.network.dueling)},
        {"sigma_init", fmt_double(c.network.sigma_init)},
    };
}

inline void set_key(ExperimentConfig& c, const std::string& key, const std::string& v) {
    using detail::parse_bool;
    using detail::parse_number;
    if (key == "officers") c.hrap.officers = parse_number<int>(key, v);
    else if (key == "events") c.hrap.events = parse_number<int>(key, v);
    else if (key == "tasks") c.hrap.tasks = parse_number<int>(key, v);
    else if (key == "value_lo") c.hrap.value_lo = parse_number<int>(key, v);
    else if (key == "value_hi") c.hrap.value_hi = parse_number<int>(key, v);
    else if (key == "variant") c.variant = variant_from_string(v);
    else if (key == "observation") {
        if (v == "augmented") c.observation = hrap::ObservationMode::augmented;
        else if (v == "literal") c.observation = hrap::ObservationMode::literal;
        else throw ConfigError("config: observation must be 'augmented' or 'literal'");
    }
    else if (key == "episodes") c.episodes = parse_number<int>(key, v);
    else if (key == "eval_episodes") c.eval_episodes = parse_number<int>(key, v);
    else if (key == "checkpoint_window") c.checkpoint_window = parse_number<int>(key, v);
    else if (key == "seed") c.master_seed = parse_number<std::uint64_t>(key, v);
    else if (key == "output_dir") c.output_dir = v;
    else if (key == "gamma") c.agent.gamma = parse_number<double>(key, v);
    else if (key == "n_step") c.agent.n_step = parse_number<int>(key, v);
    else if (key == "learning_rate") c.agent.learning_rate = parse_number<double>(key, v);
    else if (key == "batch_size") c.agent.batch_size = parse_number<int>(key, v);
    else if (key == "target_sync_every") c.agent.target_sync_every = parse_number<long>(key, v);
    else if (key == "eps_start") c.agent.eps_start = parse_number<double>(key, v);
    else if (key == "eps_decay") c.agent.eps_decay = parse_number<double>(key, v);
    else if (key == "eps_min") c.agent.eps_min = parse_number<double>(key, v);
    else if (key == "clip_norm") c.agent.clip_norm = parse_number<double>(key, v);
    else if (key == "buffer_capacity") c.agent.buffer_capacity = parse_number<int>(key, v);
    else if (key == "alpha") c.agent.alpha = parse_number<double>(key, v);
    else if (key == "eps_priority") c.agent.eps_priority = parse_number<double>(key, v);
    else if (key == "train_every") c.agent.train_every = parse_number<int>(key, v);
    else if (key == "warmup") c.agent.warmup = parse_number<int>(key, v);
    else if (key == "prioritized") c.agent.prioritized = parse_bool(key, v);
    else if (key == "loss") c.agent.loss = agent::loss_mode_from_string(v);
    else if (key == "importance_sampling") c.agent.importance_sampling = parse_bool(key, v);
    else if (key == "is_beta_start") c.agent.is_beta_start = parse_number<double>(key, v);
    else if (key == "is_beta_steps") c.agent.is_beta_steps = parse_number<long>(key, v);
    else if (key == "hidden") c.network.hidden = parse_number<int>(key, v);
    else if (key == "n_q") c.network.circuit.n_qubits = parse_number<int>(key, v);
    else if (key == "n_l") c.network.circuit.n_layers = parse_number<int>(key, v);
    else if (key == "topology") c.network.circuit.topology = qc::topology_from_string(v);
    else if (key == "hadamard_every_layer") c.network.circuit.hadamard_every_layer = parse_bool(key, v);
    else if (key == "atoms") c.network.atoms = parse_number<int>(key, v);
    else if (key == "v_min") c.network.v_min = parse_number<double>(key, v);
    else if (key == "v_max") c.network.v_max = parse_number<double>(key, v);
    else if (key == "angle_scale") c.network.angle_scale = parse_number<double>(key, v);
    else if (key == "dueling") c.network.dueling = net::dueling_mode_from_string(v);
    else if (key == "sigma_init") c.network.sigma_init = parse_number<double>(key, v);
    else throw ConfigError("config: unknown key '" + key + "'");
}

/// Applies `key = value` lines on top of `base`. '#' starts a comment.
inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        set_key(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return base;
}

inline ExperimentConfig load_config(const fs::path& path, ExperimentConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    return parse_config(in, std::move(base));
}

inline std::string config_text(const ExperimentConfig& c) {
    std::string out;
    for (const auto& [k, v] : to_key_values(c)) out += k + " = " + v + "\n";
    return out;
}

/// FNV-1a over the snapshot text, excluding output_dir.
inline std::string config_hash(const ExperimentConfig& c) {
    ExperimentConfig copy = c;
    copy.output_dir.clear();
    const auto h = hash_tag(config_text(copy));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline json config_json(const ExperimentConfig& c) {
    json j = json::object();
    for (const auto& [k, v] : to_key_values(c)) j[k] = v;
    return j;
}

// ---- runs -------------------------------------------------------------------

struct CurveRow {
    int episode = 0;
    double train_reward = 0.0;
    double epsilon = 0.0;
    double loss_mean = 0.0;
    long steps = 0;
};

inline std::string format_curve_row(const CurveRow& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%.10f,%.10f,%.10e,%ld", r.episode, r.train_reward, r.epsilon, r.loss_mean,
                  r.steps);
    return buf;
}

struct EvalReport {
    std::string config_hash;
    std::uint64_t seed = 0;
    int episodes = 0;
    double mean_reward = 0.0;
    std::vector<double> per_episode_rewards;
    double baseline_mean_reward = 0.0;
    std::vector<double> baseline_per_episode_rewards;
    double reduction_percent = 0.0;
};

struct RunRecord {
    ExperimentConfig config;
    fs::path curve_path;
    fs::path checkpoint_path; // empty for the random variant
    fs::path eval_path;
    fs::path snapshot_path;
    EvalReport eval;
    double best_moving_average = 0.0;
    int best_episode = -1;
    double wall_seconds = 0.0;
};

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Positive when the agent's (negative) reward is closer to zero than the baseline's.
inline double reduction_percent(double baseline_mean, double agent_mean) {
    if (baseline_mean == 0.0) return 0.0;
    return (agent_mean - baseline_mean) / std::abs(baseline_mean) * 100.0;
}

inline json to_json(const EvalReport& r, const ExperimentConfig& c) {
    return {{"config", config_json(c)},
            {"config_hash", r.config_hash},
            {"seed", r.seed},
            {"episodes", r.episodes},
            {"mean_reward", r.mean_reward},
            {"per_episode_rewards", r.per_episode_rewards},
            {"baseline_mean_reward", r.baseline_mean_reward},
            {"baseline_per_episode_rewards", r.baseline_per_episode_rewards},
            {"reduction_percent", r.reduction_percent}};
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline json checkpoint_json(const ExperimentConfig& c, const net::QNetwork& qnet, int episode, double moving_average) {
    return {{"config_hash", config_hash(c)},
            {"experiment", config_json(c)},
            {"episode", episode},
            {"moving_average", moving_average},
            {"network", qnet.to_json()}};
}

inline net::QNetwork load_checkpoint(const fs::path& path, const ExperimentConfig& expected) {
    std::ifstream in(path);
    if (!in) throw SchemaError("checkpoint: cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("checkpoint: ") + e.what());
    }
    if (!j.contains("network")) throw SchemaError("checkpoint: missing 'network'");
    auto qnet = net::QNetwork::from_json(j.at("network"));
    const auto want = expected.resolved().network;
    if (!(qnet.config() == want)) throw SchemaError("checkpoint: network config does not match experiment config");
    return qnet;
}

/// Agent policy and random policy on the identical held-out instance stream.
inline EvalReport evaluate_policy(const net::QNetwork* qnet, const ExperimentConfig& cfg) {
    EvalReport r;
    r.config_hash = config_hash(cfg);
    r.seed = cfg.master_seed;
    r.episodes = cfg.eval_episodes;
    r.baseline_per_episode_rewards = agent::random_policy_episodes(cfg.hrap, cfg.eval_episodes, cfg.master_seed);
    r.per_episode_rewards = qnet ? agent::evaluate_episodes(*qnet, cfg.hrap, cfg.eval_episodes, cfg.master_seed,
                                                            cfg.observation)
                                 : r.baseline_per_episode_rewards;
    r.mean_reward = mean(r.per_episode_rewards);
    r.baseline_mean_reward = mean(r.baseline_per_episode_rewards);
    r.reduction_percent = reduction_percent(r.baseline_mean_reward, r.mean_reward);
    return r;
}

struct TrainOptions {
    /// Called after every episode with the row just written.
    std::function<void(const CurveRow&)> on_episode;
};

/// Trains for cfg.episodes episodes, keeping the parameters with the best
/// moving average of final-step training reward, then evaluates them.
inline RunRecord run_train(const ExperimentConfig& input, const TrainOptions& options = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    input.validate();
    const ExperimentConfig cfg = input.resolved();
    RunRecord rec;
    rec.config = cfg;
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    rec.snapshot_path = dir / kSnapshotFile;
    rec.curve_path = dir / kCurveFile;
    rec.eval_path = dir / kEvalFile;
    write_text(rec.snapshot_path, config_text(cfg));

    std::ofstream curve(rec.curve_path, std::ios::binary);
    if (!curve) throw std::runtime_error("cannot write '" + rec.curve_path.string() + "'");
    curve << "episode,train_reward,epsilon,loss_mean,steps\n";

    std::optional<agent::Agent> ag;
    if (cfg.variant != Variant::random) ag.emplace(cfg.agent, cfg.network, cfg.master_seed);
    Rng random_policy = make_rng(cfg.master_seed, "train-random-policy");
    std::uniform_int_distribution<int> pick(0, cfg.hrap.officers - 1);

    std::deque<double> window;
    double window_sum = 0.0;
    double best_ma = -std::numeric_limits<double>::infinity();
    net::ParamVector best_params;
    const int min_fill = std::min(cfg.checkpoint_window, cfg.episodes);
    long total_steps = 0;

    try {
        for (int ep = 0; ep < cfg.episodes; ++ep) {
            auto [state, obs_vec] = hrap::reset(cfg.hrap, agent::train_episode_seed(cfg.master_seed, ep), cfg.observation);
            Eigen::VectorXd obs = Eigen::Map<const Eigen::VectorXd>(obs_vec.data(), static_cast<Eigen::Index>(obs_vec.size()));
            double last = 0.0, loss_sum = 0.0;
            int loss_count = 0;
            const double eps_used = ag ? ag->epsilon() : 1.0;
            while (!state.done) {
                const int a = ag ? ag->act(obs) : pick(random_policy);
                auto out = hrap::step(state, a, cfg.observation);
                Eigen::VectorXd next = Eigen::Map<const Eigen::VectorXd>(out.observation.data(),
                                                                         static_cast<Eigen::Index>(out.observation.size()));
                last = out.reward;
                ++total_steps;
                if (ag) {
                    ag->store({obs, a, out.reward, next, out.done});
                    if (ag->should_train()) {
                        if (auto st = ag->train_step()) {
                            loss_sum += st->loss;
                            ++loss_count;
                        }
                    }
                }
                obs = std::move(next);
            }
            if (ag) ag->decay_epsilon();

            CurveRow row{ep, last, eps_used, loss_count ? loss_sum / loss_count : 0.0, total_steps};
            curve << format_curve_row(row) << '\n';
            curve.flush();
            if (!curve) throw std::runtime_error("write failed for '" + rec.curve_path.string() + "'");
            if (options.on_episode) options.on_episode(row);

            window.push_back(last);
            window_sum += last;
            if (static_cast<int>(window.size()) > cfg.checkpoint_window) {
                window_sum -= window.front();
                window.pop_front();
            }
            if (static_cast<int>(window.size()) >= min_fill) {
                const double ma = window_sum / static_cast<double>(window.size());
                if (ma > best_ma) {
                    best_ma = ma;
                    rec.best_episode = ep;
                    if (ag) best_params = ag->main().params();
                }
            }
        }
    } catch (...) {
        write_text(dir / "INCOMPLETE", "run aborted; curve.csv holds the completed episodes\n");
        throw;
    }
    rec.best_moving_average = best_ma;

    std::optional<net::QNetwork> best;
    if (ag) {
        best.emplace(ag->main());
        best->params() = best_params;
        rec.checkpoint_path = dir / kCheckpointFile;
        write_text(rec.checkpoint_path, checkpoint_json(cfg, *best, rec.best_episode, best_ma).dump() + "\n");
    }
    rec.eval = evaluate_policy(best ? &*best : nullptr, cfg);
    write_text(rec.eval_path, to_json(rec.eval, cfg).dump(2) + "\n");
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

/// Evaluates a saved checkpoint against the random policy on the held-out stream.
inline EvalReport run_eval(const fs::path& checkpoint, const ExperimentConfig& input) {
    input.validate();
    const ExperimentConfig cfg = input.resolved();
    if (cfg.variant == Variant::random) return evaluate_policy(nullptr, cfg);
    const auto qnet = load_checkpoint(checkpoint, cfg);
    return evaluate_policy(&qnet, cfg);
}

struct AblationRow {
    qc::Topology topology;
    std::vector<std::uint64_t> seeds;
    std::vector<double> mean_rewards;     // per seed
    std::vector<double> baseline_rewards; // per seed
    double mean_reward = 0.0;
    double baseline_mean = 0.0;
    double reduction_percent = 0.0;
    std::string config_hash;
};

/// One VQR agent per (topology, seed); all arms share the seed list and hence
/// the training and evaluation instance streams.
inline std::vector<AblationRow> run_ablation(const std::vector<qc::Topology>& topologies,
                                             const std::vector<std::uint64_t>& seeds, const ExperimentConfig& base,
                                             const TrainOptions& options = {}) {
    std::vector<AblationRow> rows;
    for (auto topo : topologies) {
        AblationRow row;
        row.topology = topo;
        row.seeds = seeds;
        for (auto seed : seeds) {
            ExperimentConfig c = base;
            c.variant = Variant::vqr;
            c.network.circuit.topology = topo;
            c.master_seed = seed;
            c.output_dir = (fs::path(base.output_dir) / (std::string(qc::to_string(topo)) + "_seed" + std::to_string(seed))).string();
            const auto rec = run_train(c, options);
            row.mean_rewards.push_back(rec.eval.mean_reward);
            row.baseline_rewards.push_back(rec.eval.baseline_mean_reward);
            if (row.config_hash.empty()) {
                ExperimentConfig h = rec.config;
                h.master_seed = 0;
                row.config_hash = config_hash(h);
            }
        }
        row.mean_reward = mean(row.mean_rewards);
        row.baseline_mean = mean(row.baseline_rewards);
        row.reduction_percent = reduction_percent(row.baseline_mean, row.mean_reward);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows) {
    os << "topology,mean_reward,baseline_mean,reduction_percent,seeds,config_hash\n";
    for (const auto& r : rows) {
        std::string seeds;
        for (std::size_t i = 0; i < r.seeds.size(); ++i) seeds += (i ? ";" : "") + std::to_string(r.seeds[i]);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.2f", r.mean_reward, r.baseline_mean, r.reduction_percent);
        os << qc::to_string(r.topology) << ',' << buf << ',' << seeds << ',' << r.config_hash << '\n';
    }
}

inline fs::path run_metrics(int n_qubits, int n_layers, int n_samples, std::uint64_t seed, const fs::path& out_dir,
                            int mw_samples = 0) {
    fs::create_directories(out_dir);
    const auto rows = metrics::topology_report(n_qubits, n_layers, n_samples, seed, mw_samples);
    const fs::path path = out_dir / "metrics.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    metrics::write_report_csv(out, rows);
    return path;
}

} // namespace vqr::harness
