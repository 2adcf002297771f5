// Command-line front end: train, eval, ablate, metrics, baseline, oracle.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vqr/vqr.hpp"

namespace fs = std::filesystem;
using namespace vqr;

namespace {

struct CommonOptions {
    std::string config_file;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
    int episodes = 0;
    std::string variant;
    std::string topology;
    int officers = 0, events = 0, tasks = 0;
};

void add_common(CLI::App* app, CommonOptions& o) {
    app->add_option("--config", o.config_file, "key = value config file");
    app->add_option("--set", o.overrides, "override a config key (key=value), repeatable");
    app->add_option_function<std::uint64_t>("--seed", [&o](const std::uint64_t& s) { o.seed = s; o.seed_set = true; },
                                            "master seed");
    app->add_option("--out", o.out, "output directory");
    app->add_option("--episodes", o.episodes, "training episodes");
    app->add_option("--variant", o.variant, "random | ddqn | rainbow | vqr");
    app->add_option("--topology", o.topology, "linear | ring | star | all_to_all");
    app->add_option("--officers", o.officers, "number of officers");
    app->add_option("--events", o.events, "number of events");
    app->add_option("--tasks", o.tasks, "tasks per event");
}

harness::ExperimentConfig build_config(const CommonOptions& o) {
    harness::ExperimentConfig c;
    if (!o.config_file.empty()) c = harness::load_config(o.config_file, c);
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        harness::set_key(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.seed_set) c.master_seed = o.seed;
    if (!o.out.empty()) c.output_dir = o.out;
    if (o.episodes > 0) c.episodes = o.episodes;
    if (!o.variant.empty()) c.variant = harness::variant_from_string(o.variant);
    if (!o.topology.empty()) c.network.circuit.topology = qc::topology_from_string(o.topology);
    if (o.officers > 0) c.hrap.officers = o.officers;
    if (o.events > 0) c.hrap.events = o.events;
    if (o.tasks > 0) c.hrap.tasks = o.tasks;
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variational-quantum Rainbow DQN for human-resource allocation"};
    app.require_subcommand(1);

    CommonOptions train_o, eval_o, ablate_o, baseline_o, oracle_o;

    auto* train = app.add_subcommand("train", "train an agent; writes curve.csv, checkpoint.json, eval.json");
    add_common(train, train_o);
    bool quiet = false;
    train->add_flag("--quiet", quiet, "no per-episode progress");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the held-out instance stream");
    add_common(eval, eval_o);
    std::string checkpoint;
    eval->add_option("--checkpoint", checkpoint, "checkpoint.json (default: <out>/checkpoint.json)");

    auto* ablate = app.add_subcommand("ablate", "train one VQR agent per topology and seed");
    add_common(ablate, ablate_o);
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::vector<std::string> topologies{"linear", "star", "ring", "all_to_all"};
    ablate->add_option("--seeds", seeds, "seed list")->delimiter(',');
    ablate->add_option("--topologies", topologies, "topology list")->delimiter(',');

    auto* metrics_cmd = app.add_subcommand("metrics", "expressibility and Meyer-Wallach per topology");
    int n_q = 4, n_l = 2, samples = 5000, mw_samples = 2000;
    std::uint64_t metrics_seed = 0;
    std::string metrics_out = "runs/metrics";
    metrics_cmd->add_option("--qubits", n_q);
    metrics_cmd->add_option("--layers", n_l);
    metrics_cmd->add_option("--samples", samples, "fidelity pairs");
    metrics_cmd->add_option("--mw-samples", mw_samples, "Meyer-Wallach samples (0 = same as --samples)");
    metrics_cmd->add_option("--seed", metrics_seed);
    metrics_cmd->add_option("--out", metrics_out);

    auto* baseline = app.add_subcommand("baseline", "mean final reward of uniformly random assignment");
    add_common(baseline, baseline_o);

    auto* oracle = app.add_subcommand("oracle", "exhaustive optimum for one instance");
    add_common(oracle, oracle_o);
    std::string instance_file;
    oracle->add_option("--instance", instance_file, "instance JSON (default: sample from --seed)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            auto cfg = build_config(train_o);
            harness::TrainOptions opts;
            if (!quiet)
                opts.on_episode = [every = std::max(1, cfg.episodes / 50)](const harness::CurveRow& r) {
                    if ((r.episode + 1) % every == 0)
                        std::cerr << "episode " << r.episode + 1 << " reward " << r.train_reward << " eps "
                                  << r.epsilon << " loss " << r.loss_mean << '\n';
                };
            const auto rec = harness::run_train(cfg, opts);
            std::cout << "curve: " << rec.curve_path.string() << '\n';
            if (!rec.checkpoint_path.empty()) std::cout << "checkpoint: " << rec.checkpoint_path.string() << '\n';
            std::cout << "eval: " << rec.eval_path.string() << '\n'
                      << "mean_reward " << rec.eval.mean_reward << " baseline " << rec.eval.baseline_mean_reward
                      << " reduction " << rec.eval.reduction_percent << "% (" << rec.wall_seconds << " s)\n";
        } else if (*eval) {
            const auto cfg = build_config(eval_o);
            const fs::path ckpt = checkpoint.empty() ? fs::path(cfg.output_dir) / harness::kCheckpointFile : fs::path(checkpoint);
            const auto report = harness::run_eval(ckpt, cfg);
            fs::create_directories(cfg.output_dir);
            const auto path = fs::path(cfg.output_dir) / harness::kEvalFile;
            harness::write_text(path, harness::to_json(report, cfg.resolved()).dump(2) + "\n");
            std::cout << "mean_reward " << report.mean_reward << " baseline " << report.baseline_mean_reward
                      << " reduction " << report.reduction_percent << "%\n";
        } else if (*ablate) {
            auto cfg = build_config(ablate_o);
            std::vector<qc::Topology> topos;
            for (const auto& t : topologies) topos.push_back(qc::topology_from_string(t));
            const auto rows = harness::run_ablation(topos, seeds, cfg);
            fs::create_directories(cfg.output_dir);
            std::ofstream out(fs::path(cfg.output_dir) / "ablation.csv", std::ios::binary);
            harness::write_ablation_csv(out, rows);
            harness::write_ablation_csv(std::cout, rows);
        } else if (*metrics_cmd) {
            const auto path = harness::run_metrics(n_q, n_l, samples, metrics_seed, metrics_out, mw_samples);
            std::ifstream in(path);
            std::cout << in.rdbuf();
        } else if (*baseline) {
            auto cfg = build_config(baseline_o);
            cfg.variant = harness::Variant::random;
            const auto report = harness::evaluate_policy(nullptr, cfg);
            std::cout << "baseline mean_reward " << report.mean_reward << " over " << report.episodes
                      << " held-out episodes\n";
            if (!baseline_o.out.empty()) {
                fs::create_directories(cfg.output_dir);
                harness::write_text(fs::path(cfg.output_dir) / "baseline.json", harness::to_json(report, cfg).dump(2) + "\n");
            }
        } else if (*oracle) {
            const auto cfg = build_config(oracle_o);
            hrap::HrapInstance inst;
            if (!instance_file.empty()) {
                std::ifstream in(instance_file);
                if (!in) throw ConfigError("cannot open '" + instance_file + "'");
                inst = hrap::instance_from_json(nlohmann::json::parse(in));
            } else {
                auto h = cfg.hrap;
                h.seed = cfg.master_seed;
                inst = hrap::generate_instance(h);
            }
            const auto best = hrap::brute_force_best(inst);
            nlohmann::json j = {{"instance", hrap::instance_to_json(inst)},
                                {"assignment", best.assignment},
                                {"makespan", best.makespan},
                                {"psi", hrap::psi(inst)},
                                {"reward", hrap::normalized_reward(inst, best.makespan)}};
            std::cout << j.dump(2) << '\n';
            if (!oracle_o.out.empty()) {
                fs::create_directories(cfg.output_dir);
                harness::write_text(fs::path(cfg.output_dir) / "oracle.json", j.dump(2) + "\n");
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
