#pragma once

// Hybrid value network:
//   NoisyDense(512, ReLU) -> NoisyDense(512, ReLU)
//   -> feature block (quantum circuit on tanh-encoded angles | dense tanh | none)
//   -> head (dueling C51 distribution | scalar Q).
//
// All trainable tensors live in one flat parameter vector so that Adam,
// gradient clipping, target sync and checkpoints act on a single buffer.
// Batches are column-major: one observation per column.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "circuit.hpp"
#include "error.hpp"
#include "random.hpp"

namespace vqr::net {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatMap = Eigen::Map<MatrixXd>;
using ConstMatMap = Eigen::Map<const MatrixXd>;

/// Parameter-sized buffer. The fixed alignment keeps Eigen's vectorized
/// kernels on the same peeling path for every allocation, which makes
/// training bitwise reproducible within a process as well as across runs.
using ParamVector = std::vector<double, Eigen::aligned_allocator<double>>;

enum class FeatureKind { quantum, dense_tanh, none };
enum class HeadKind { distributional, scalar };
enum class DuelingMode { logit_space, paper_literal };
enum class Mode { train, eval };

struct NetworkConfig {
    int input_dim = 0;
    int hidden = 512;
    bool noisy = true;
    FeatureKind features = FeatureKind::quantum;
    qc::CircuitSpec circuit{4, 2, qc::Topology::Ring};
    int num_actions = 3;
    HeadKind head = HeadKind::distributional;
    int atoms = 51;
    double v_min = -1.0;
    double v_max = 0.0;
    double angle_scale = std::numbers::pi;
    DuelingMode dueling = DuelingMode::logit_space;
    double sigma_init = 0.017;

    void validate() const {
        if (input_dim < 1) throw ConfigError("network: input_dim must be >= 1");
        if (hidden < 1) throw ConfigError("network: hidden width must be >= 1");
        if (num_actions < 1) throw ConfigError("network: num_actions must be >= 1");
        if (head == HeadKind::distributional) {
            if (atoms < 2) throw ConfigError("network: atoms must be >= 2");
            if (!(v_min < v_max)) throw ConfigError("network: v_min must be < v_max");
        }
        if (features == FeatureKind::quantum) circuit.validate();
    }

    int feature_dim() const { return features == FeatureKind::none ? hidden : circuit.n_qubits; }
    int output_rows() const { return head == HeadKind::distributional ? num_actions * atoms : num_actions; }

    /// z_i = v_min + i (v_max - v_min) / (atoms - 1)
    VectorXd support() const {
        VectorXd z(atoms);
        for (int i = 0; i < atoms; ++i) z[i] = v_min + i * (v_max - v_min) / (atoms - 1);
        return z;
    }

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Location of one tensor inside the flat parameter vector.
struct TensorSlot {
    std::string name;
    std::size_t offset = 0;
    int rows = 0;
    int cols = 0;
    std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

struct DenseSlots {
    TensorSlot w_mu, b_mu, w_sigma, b_sigma; // sigma slots unused when not noisy
    bool noisy = false;
    int in = 0, out = 0;
};

/// Last-sampled noise for one noisy layer.
struct LayerNoise {
    MatrixXd w;
    VectorXd b;
};

/// Intermediates of a batched forward pass, consumed by backward().
struct ForwardCache {
    Mode mode = Mode::eval;
    MatrixXd input;      // in x B
    MatrixXd h1, h2;     // hidden x B, post-ReLU
    MatrixXd encoded;    // tanh outputs of the encoder (angles / scale, or dense features)
    MatrixXd features;   // feature_dim x B
    MatrixXd head_a;     // advantage logits (A*atoms x B) or scalar Q (A x B)
    MatrixXd head_v;     // value logits (atoms x B)
    MatrixXd output;     // distribution (A*atoms x B, action-major) or Q (A x B)
    MatrixXd raw;        // paper_literal: pre-clip combination
    int batch() const { return static_cast<int>(input.cols()); }
};

/// Row-stochastic |A| x atoms matrix for a single observation.
using DistOutput = MatrixXd;

class QNetwork {
public:
    QNetwork() = default;

    QNetwork(const NetworkConfig& config, std::uint64_t seed) : config_(config) {
        config_.validate();
        layout();
        params_.assign(total_, 0.0);
        Rng init = make_rng(seed, "net-init");
        initialize(init);
        noise_rng_ = make_rng(seed, "net-noise");
        for (int l = 0; l < 2; ++l) {
            noise_[l].w = MatrixXd::Zero(trunk_[l].out, trunk_[l].in);
            noise_[l].b = VectorXd::Zero(trunk_[l].out);
        }
    }

    const NetworkConfig& config() const { return config_; }
    std::size_t num_params() const { return total_; }
    ParamVector& params() { return params_; }
    const ParamVector& params() const { return params_; }
    const std::vector<TensorSlot>& slots() const { return slots_; }
    const DenseSlots& trunk(int l) const { return trunk_[l]; }
    const LayerNoise& noise(int l) const { return noise_[l]; }
    LayerNoise& noise(int l) { return noise_[l]; }
    Rng& noise_rng() { return noise_rng_; }
    const Rng& noise_rng() const { return noise_rng_; }

    ConstMatMap tensor(const TensorSlot& s) const { return {params_.data() + s.offset, s.rows, s.cols}; }
    MatMap tensor(const TensorSlot& s) { return {params_.data() + s.offset, s.rows, s.cols}; }

    /// Draws fresh standard-normal noise for every noisy weight and bias.
    void resample_noise() {
        if (!config_.noisy) return;
        for (auto& ln : noise_) {
            fill_standard_normal(ln.w.data(), ln.w.size());
            fill_standard_normal(ln.b.data(), ln.b.size());
        }
    }

    /// Single noisy (or plain) dense layer: train mode uses mu + sigma * eps.
    MatrixXd dense_forward(int l, const MatrixXd& x, Mode mode) const {
        const auto& d = trunk_[l];
        require(x.rows() == d.in, "dense_forward: input width mismatch");
        MatrixXd y;
        if (d.noisy && mode == Mode::train) {
            const MatrixXd w = tensor(d.w_mu) + tensor(d.w_sigma).cwiseProduct(noise_[l].w);
            const VectorXd b = tensor(d.b_mu) + tensor(d.b_sigma).cwiseProduct(noise_[l].b);
            y.noalias() = w * x;
            y.colwise() += b;
        } else {
            y.noalias() = tensor(d.w_mu) * x;
            y.colwise() += VectorXd(tensor(d.b_mu));
        }
        return y;
    }

    ForwardCache forward(const MatrixXd& batch, Mode mode) const {
        require(batch.rows() == config_.input_dim, "forward: observation length does not match input_dim");
        ForwardCache c;
        c.mode = mode;
        c.input = batch;
        c.h1 = dense_forward(0, batch, mode).cwiseMax(0.0);
        c.h2 = dense_forward(1, c.h1, mode).cwiseMax(0.0);
        const int B = c.batch();

        switch (config_.features) {
        case FeatureKind::none:
            c.features = c.h2;
            break;
        case FeatureKind::dense_tanh:
        case FeatureKind::quantum: {
            MatrixXd pre = tensor(enc_w_) * c.h2;
            pre.colwise() += VectorXd(tensor(enc_b_));
            c.encoded = pre.array().tanh().matrix();
            if (config_.features == FeatureKind::dense_tanh) {
                c.features = c.encoded;
            } else {
                c.features.resize(config_.circuit.n_qubits, B);
                std::vector<double> angles(static_cast<std::size_t>(config_.circuit.num_params()));
                for (int b = 0; b < B; ++b) {
                    for (std::size_t k = 0; k < angles.size(); ++k)
                        angles[k] = config_.angle_scale * c.encoded(static_cast<Eigen::Index>(k), b);
                    const auto z = qc::features<double>(config_.circuit, angles);
                    for (int q = 0; q < config_.circuit.n_qubits; ++q) c.features(q, b) = z[static_cast<std::size_t>(q)];
                }
            }
            break;
        }
        }

        if (config_.head == HeadKind::scalar) {
            c.head_a = tensor(q_w_) * c.features;
            c.head_a.colwise() += VectorXd(tensor(q_b_));
            c.output = c.head_a;
            return c;
        }
        c.head_v = tensor(v_w_) * c.features;
        c.head_v.colwise() += VectorXd(tensor(v_b_));
        c.head_a = tensor(a_w_) * c.features;
        c.head_a.colwise() += VectorXd(tensor(a_b_));
        combine(c);
        return c;
    }

    ForwardCache forward(const VectorXd& obs, Mode mode) const { return forward(MatrixXd(obs), mode); }

    /// |A| x atoms distribution for column b of a distributional forward pass.
    DistOutput distribution(const ForwardCache& c, int b = 0) const {
        require(config_.head == HeadKind::distributional, "distribution: scalar head has no distribution");
        const int A = config_.num_actions, N = config_.atoms;
        DistOutput p(A, N);
        for (int a = 0; a < A; ++a)
            for (int i = 0; i < N; ++i) p(a, i) = c.output(a * N + i, b);
        return p;
    }

    /// Expected Q per action, A x B.
    MatrixXd q_values(const ForwardCache& c) const {
        if (config_.head == HeadKind::scalar) return c.output;
        const int A = config_.num_actions, N = config_.atoms;
        const VectorXd z = config_.support();
        MatrixXd q(A, c.batch());
        for (int b = 0; b < c.batch(); ++b)
            for (int a = 0; a < A; ++a) q(a, b) = c.output.block(a * N, b, N, 1).col(0).dot(z);
        return q;
    }

    /// Gradient of the loss with respect to every parameter, in params() layout.
    /// `d_output` has the shape of cache.output. Noise is the one used in forward.
    ParamVector backward(const ForwardCache& c, const MatrixXd& d_output) const {
        require(d_output.rows() == c.output.rows() && d_output.cols() == c.output.cols(),
                "backward: loss gradient shape does not match network output");
        ParamVector grad(total_, 0.0);
        auto g = [&](const TensorSlot& s) { return MatMap(grad.data() + s.offset, s.rows, s.cols); };
        const int B = c.batch();

        MatrixXd d_features;
        if (config_.head == HeadKind::scalar) {
            g(q_w_).noalias() = d_output * c.features.transpose();
            g(q_b_) = d_output.rowwise().sum();
            d_features.noalias() = tensor(q_w_).transpose() * d_output;
        } else {
            MatrixXd d_v, d_a;
            uncombine(c, d_output, d_v, d_a);
            g(v_w_).noalias() = d_v * c.features.transpose();
            g(v_b_) = d_v.rowwise().sum();
            g(a_w_).noalias() = d_a * c.features.transpose();
            g(a_b_) = d_a.rowwise().sum();
            d_features.noalias() = tensor(v_w_).transpose() * d_v;
            d_features.noalias() += tensor(a_w_).transpose() * d_a;
        }

        MatrixXd d_h2;
        if (config_.features == FeatureKind::none) {
            d_h2 = std::move(d_features);
        } else {
            MatrixXd d_encoded; // gradient w.r.t. tanh output
            if (config_.features == FeatureKind::dense_tanh) {
                d_encoded = d_features;
            } else {
                const int K = config_.circuit.num_params();
                d_encoded.resize(K, B);
                std::vector<double> angles(static_cast<std::size_t>(K));
                std::vector<double> up(static_cast<std::size_t>(config_.circuit.n_qubits));
                for (int b = 0; b < B; ++b) {
                    for (int k = 0; k < K; ++k) angles[static_cast<std::size_t>(k)] = config_.angle_scale * c.encoded(k, b);
                    for (std::size_t q = 0; q < up.size(); ++q) up[q] = d_features(static_cast<Eigen::Index>(q), b);
                    const auto ga = qc::adjoint_gradient<double>(config_.circuit, angles, up);
                    for (int k = 0; k < K; ++k) d_encoded(k, b) = config_.angle_scale * ga[static_cast<std::size_t>(k)];
                }
            }
            const MatrixXd d_pre = d_encoded.cwiseProduct((1.0 - c.encoded.array().square()).matrix());
            g(enc_w_).noalias() = d_pre * c.h2.transpose();
            g(enc_b_) = d_pre.rowwise().sum();
            d_h2.noalias() = tensor(enc_w_).transpose() * d_pre;
        }

        const MatrixXd d_pre2 = d_h2.cwiseProduct((c.h2.array() > 0.0).cast<double>().matrix());
        MatrixXd d_h1 = dense_backward(1, c.h1, d_pre2, c.mode, grad, true);
        const MatrixXd d_pre1 = d_h1.cwiseProduct((c.h1.array() > 0.0).cast<double>().matrix());
        dense_backward(0, c.input, d_pre1, c.mode, grad, false);
        return grad;
    }

    /// Convert dL/dQ (A x B) into dL/d(output) for either head.
    MatrixXd output_grad_from_q(const MatrixXd& d_q) const {
        if (config_.head == HeadKind::scalar) return d_q;
        const int A = config_.num_actions, N = config_.atoms;
        const VectorXd z = config_.support();
        MatrixXd d(A * N, d_q.cols());
        for (Eigen::Index b = 0; b < d_q.cols(); ++b)
            for (int a = 0; a < A; ++a) d.block(a * N, b, N, 1) = d_q(a, b) * z;
        return d;
    }

    nlohmann::json to_json() const;
    static QNetwork from_json(const nlohmann::json& j);

private:
    // Box-Muller in single precision: each 64-bit draw of the noise stream
    // yields two 32-bit uniforms and hence two normals.
    void fill_standard_normal(double* out, Eigen::Index n) {
        const Eigen::Index half = (n + 1) / 2;
        Eigen::ArrayXf u1(half), u2(half);
        constexpr float kScale = 0x1.0p-32f;
        for (Eigen::Index i = 0; i < half; ++i) {
            const std::uint64_t bits = noise_rng_();
            u1[i] = (static_cast<float>(bits >> 32) + 1.0f) * kScale; // (0, 1]
            u2[i] = static_cast<float>(bits & 0xffffffffULL) * kScale;
        }
        const Eigen::ArrayXf r = (-2.0f * u1.log()).sqrt();
        const Eigen::ArrayXf phase = 2.0f * std::numbers::pi_v<float> * u2;
        const Eigen::ArrayXf z0 = r * phase.cos();
        const Eigen::ArrayXf z1 = r * phase.sin();
        for (Eigen::Index i = 0; i < half; ++i) {
            out[2 * i] = z0[i];
            if (2 * i + 1 < n) out[2 * i + 1] = z1[i];
        }
    }

    TensorSlot add(const std::string& name, int rows, int cols) {
        TensorSlot s{name, total_, rows, cols};
        total_ += s.size();
        slots_.push_back(s);
        return s;
    }

    DenseSlots add_dense(const std::string& name, int in, int out, bool noisy) {
        DenseSlots d;
        d.in = in;
        d.out = out;
        d.noisy = noisy;
        d.w_mu = add(name + ".w_mu", out, in);
        d.b_mu = add(name + ".b_mu", out, 1);
        if (noisy) {
            d.w_sigma = add(name + ".w_sigma", out, in);
            d.b_sigma = add(name + ".b_sigma", out, 1);
        }
        return d;
    }

    void layout() {
        total_ = 0;
        slots_.clear();
        trunk_[0] = add_dense("trunk0", config_.input_dim, config_.hidden, config_.noisy);
        trunk_[1] = add_dense("trunk1", config_.hidden, config_.hidden, config_.noisy);
        if (config_.features != FeatureKind::none) {
            const int width = config_.features == FeatureKind::quantum ? config_.circuit.num_params()
                                                                        : config_.circuit.n_qubits;
            enc_w_ = add("encoder.w", width, config_.hidden);
            enc_b_ = add("encoder.b", width, 1);
        }
        const int F = config_.feature_dim();
        if (config_.head == HeadKind::scalar) {
            q_w_ = add("q.w", config_.num_actions, F);
            q_b_ = add("q.b", config_.num_actions, 1);
        } else {
            v_w_ = add("value.w", config_.atoms, F);
            v_b_ = add("value.b", config_.atoms, 1);
            a_w_ = add("advantage.w", config_.num_actions * config_.atoms, F);
            a_b_ = add("advantage.b", config_.num_actions * config_.atoms, 1);
        }
    }

    void initialize(Rng& rng) {
        auto uniform = [&](const TensorSlot& s, int fan_in) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
            std::uniform_real_distribution<double> u(-bound, bound);
            for (std::size_t i = 0; i < s.size(); ++i) params_[s.offset + i] = u(rng);
        };
        for (const auto& d : trunk_) {
            uniform(d.w_mu, d.in);
            uniform(d.b_mu, d.in);
            if (d.noisy) {
                tensor(d.w_sigma).setConstant(config_.sigma_init);
                tensor(d.b_sigma).setConstant(config_.sigma_init);
            }
        }
        if (config_.features != FeatureKind::none) {
            uniform(enc_w_, config_.hidden);
            uniform(enc_b_, config_.hidden);
        }
        const int F = config_.feature_dim();
        if (config_.head == HeadKind::scalar) {
            uniform(q_w_, F);
            uniform(q_b_, F);
        } else {
            uniform(v_w_, F);
            uniform(v_b_, F);
            uniform(a_w_, F);
            uniform(a_b_, F);
        }
    }

    MatrixXd dense_backward(int l, const MatrixXd& x, const MatrixXd& d_pre, Mode mode, ParamVector& grad,
                            bool want_input_grad) const {
        const auto& d = trunk_[l];
        MatMap gw(grad.data() + d.w_mu.offset, d.out, d.in);
        MatMap gb(grad.data() + d.b_mu.offset, d.out, 1);
        gw.noalias() = d_pre * x.transpose();
        gb = d_pre.rowwise().sum();
        const bool with_noise = d.noisy && mode == Mode::train;
        if (with_noise) {
            MatMap(grad.data() + d.w_sigma.offset, d.out, d.in) = gw.cwiseProduct(noise_[l].w);
            MatMap(grad.data() + d.b_sigma.offset, d.out, 1) = gb.cwiseProduct(noise_[l].b);
        }
        if (!want_input_grad) return {};
        if (with_noise) {
            const MatrixXd w = tensor(d.w_mu) + tensor(d.w_sigma).cwiseProduct(noise_[l].w);
            return w.transpose() * d_pre;
        }
        return tensor(d.w_mu).transpose() * d_pre;
    }

    static void softmax_inplace(Eigen::Ref<VectorXd> v) {
        const double m = v.maxCoeff();
        v = (v.array() - m).exp().matrix();
        v /= v.sum();
    }

    void combine(ForwardCache& c) const {
        const int A = config_.num_actions, N = config_.atoms, B = c.batch();
        c.output.resize(A * N, B);
        if (config_.dueling == DuelingMode::logit_space) {
            for (int b = 0; b < B; ++b) {
                VectorXd mean_a = VectorXd::Zero(N);
                for (int a = 0; a < A; ++a) mean_a += c.head_a.block(a * N, b, N, 1);
                mean_a /= A;
                for (int a = 0; a < A; ++a) {
                    VectorXd logits = c.head_v.col(b) + c.head_a.block(a * N, b, N, 1) - mean_a;
                    softmax_inplace(logits);
                    c.output.block(a * N, b, N, 1) = logits;
                }
            }
            return;
        }
        // V + (A - mean A) on probabilities, clipped at 0 and renormalized.
        c.raw.resize(A * N, B);
        for (int b = 0; b < B; ++b) {
            VectorXd v = c.head_v.col(b);
            softmax_inplace(v);
            MatrixXd adv(N, A);
            for (int a = 0; a < A; ++a) {
                VectorXd pa = c.head_a.block(a * N, b, N, 1);
                softmax_inplace(pa);
                adv.col(a) = pa;
            }
            const VectorXd mean_a = adv.rowwise().mean();
            for (int a = 0; a < A; ++a) {
                const VectorXd raw = v + adv.col(a) - mean_a;
                c.raw.block(a * N, b, N, 1) = raw;
                VectorXd clipped = raw.cwiseMax(0.0);
                const double s = clipped.sum();
                if (s > 0.0) clipped /= s;
                else clipped.setConstant(1.0 / N);
                c.output.block(a * N, b, N, 1) = clipped;
            }
        }
    }

    void uncombine(const ForwardCache& c, const MatrixXd& d_out, MatrixXd& d_v, MatrixXd& d_a) const {
        const int A = config_.num_actions, N = config_.atoms, B = c.batch();
        d_v = MatrixXd::Zero(N, B);
        d_a = MatrixXd::Zero(A * N, B);
        if (config_.dueling == DuelingMode::logit_space) {
            for (int b = 0; b < B; ++b) {
                VectorXd sum_dl = VectorXd::Zero(N);
                for (int a = 0; a < A; ++a) {
                    const auto p = c.output.block(a * N, b, N, 1);
                    const auto gp = d_out.block(a * N, b, N, 1);
                    const double dot = p.col(0).dot(gp.col(0));
                    const VectorXd dl = p.cwiseProduct((gp.array() - dot).matrix());
                    d_a.block(a * N, b, N, 1) = dl;
                    sum_dl += dl;
                }
                d_v.col(b) = sum_dl;
                for (int a = 0; a < A; ++a) d_a.block(a * N, b, N, 1) -= sum_dl / A;
            }
            return;
        }
        for (int b = 0; b < B; ++b) {
            VectorXd v = c.head_v.col(b);
            softmax_inplace(v);
            VectorXd d_vprob = VectorXd::Zero(N);
            MatrixXd d_raw(N, A);
            for (int a = 0; a < A; ++a) {
                const VectorXd raw = c.raw.block(a * N, b, N, 1);
                const VectorXd clipped = raw.cwiseMax(0.0);
                const double s = clipped.sum();
                VectorXd dr = VectorXd::Zero(N);
                if (s > 0.0) {
                    const auto p = c.output.block(a * N, b, N, 1);
                    const auto gp = d_out.block(a * N, b, N, 1);
                    const double dot = p.col(0).dot(gp.col(0));
                    for (int i = 0; i < N; ++i)
                        if (raw[i] > 0.0) dr[i] = (gp(i, 0) - dot) / s;
                }
                d_raw.col(a) = dr;
                d_vprob += dr;
            }
            const VectorXd mean_draw = d_raw.rowwise().mean();
            d_v.col(b) = v.cwiseProduct((d_vprob.array() - v.dot(d_vprob)).matrix());
            for (int a = 0; a < A; ++a) {
                VectorXd pa = c.head_a.block(a * N, b, N, 1);
                softmax_inplace(pa);
                const VectorXd d_prob = d_raw.col(a) - mean_draw;
                d_a.block(a * N, b, N, 1) = pa.cwiseProduct((d_prob.array() - pa.dot(d_prob)).matrix());
            }
        }
    }

    NetworkConfig config_;
    ParamVector params_;
    std::size_t total_ = 0;
    std::vector<TensorSlot> slots_;
    DenseSlots trunk_[2];
    TensorSlot enc_w_, enc_b_, q_w_, q_b_, v_w_, v_b_, a_w_, a_b_;
    LayerNoise noise_[2];
    Rng noise_rng_;
};

/// Q(s, a) = sum_i z_i p_i(s, a) for every action row.
inline VectorXd q_values(const DistOutput& dist, const VectorXd& support) {
    require(dist.cols() == support.size(), "q_values: atom count mismatch");
    return dist * support;
}

/// Adam with bias correction.
struct Adam {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    ParamVector m, v;

    void apply(ParamVector& params, const ParamVector& grad) {
        require(params.size() == grad.size(), "adam: gradient size mismatch");
        if (m.size() != params.size()) {
            m.assign(params.size(), 0.0);
            v.assign(params.size(), 0.0);
        }
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        const auto n = static_cast<Eigen::Index>(params.size());
        Eigen::Map<Eigen::ArrayXd> p(params.data(), n), mm(m.data(), n), vv(v.data(), n);
        Eigen::Map<const Eigen::ArrayXd> g(grad.data(), n);
        mm = beta1 * mm + (1.0 - beta1) * g;
        vv = beta2 * vv + (1.0 - beta2) * g.square();
        p -= lr * (mm / c1) / ((vv / c2).sqrt() + eps);
    }
};

inline double global_norm(const ParamVector& g) {
    double s = 0.0;
    for (double x : g) s += x * x;
    return std::sqrt(s);
}

/// Scales g so its L2 norm is at most max_norm; returns the pre-clip norm.
inline double clip_global_norm(ParamVector& g, double max_norm) {
    const double n = global_norm(g);
    if (n > max_norm && n > 0.0) {
        const double s = max_norm / n;
        for (double& x : g) x *= s;
    }
    return n;
}

// Serialization

inline std::string to_string(FeatureKind k) {
    switch (k) {
    case FeatureKind::quantum: return "quantum";
    case FeatureKind::dense_tanh: return "dense_tanh";
    case FeatureKind::none: return "none";
    }
    return "?";
}
inline FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "quantum") return FeatureKind::quantum;
    if (s == "dense_tanh") return FeatureKind::dense_tanh;
    if (s == "none") return FeatureKind::none;
    throw ConfigError("unknown feature kind '" + s + "'");
}
inline std::string to_string(HeadKind k) { return k == HeadKind::scalar ? "scalar" : "distributional"; }
inline HeadKind head_kind_from_string(const std::string& s) {
    if (s == "scalar") return HeadKind::scalar;
    if (s == "distributional") return HeadKind::distributional;
    throw ConfigError("unknown head kind '" + s + "'");
}
inline std::string to_string(DuelingMode m) { return m == DuelingMode::logit_space ? "logit_space" : "paper_literal"; }
inline DuelingMode dueling_mode_from_string(const std::string& s) {
    if (s == "logit_space") return DuelingMode::logit_space;
    if (s == "paper_literal") return DuelingMode::paper_literal;
    throw ConfigError("unknown dueling mode '" + s + "'");
}

inline void to_json(nlohmann::json& j, const NetworkConfig& c) {
    j = {{"input_dim", c.input_dim},
         {"hidden", c.hidden},
         {"noisy", c.noisy},
         {"features", to_string(c.features)},
         {"n_q", c.circuit.n_qubits},
         {"n_l", c.circuit.n_layers},
         {"topology", std::string(qc::to_string(c.circuit.topology))},
         {"hadamard_every_layer", c.circuit.hadamard_every_layer},
         {"num_actions", c.num_actions},
         {"head", to_string(c.head)},
         {"atoms", c.atoms},
         {"v_min", c.v_min},
         {"v_max", c.v_max},
         {"angle_scale", c.angle_scale},
         {"dueling", to_string(c.dueling)},
         {"sigma_init", c.sigma_init}};
}

inline void from_json(const nlohmann::json& j, NetworkConfig& c) {
    j.at("input_dim").get_to(c.input_dim);
    j.at("hidden").get_to(c.hidden);
    j.at("noisy").get_to(c.noisy);
    c.features = feature_kind_from_string(j.at("features").get<std::string>());
    j.at("n_q").get_to(c.circuit.n_qubits);
    j.at("n_l").get_to(c.circuit.n_layers);
    c.circuit.topology = qc::topology_from_string(j.at("topology").get<std::string>());
    j.at("hadamard_every_layer").get_to(c.circuit.hadamard_every_layer);
    j.at("num_actions").get_to(c.num_actions);
    c.head = head_kind_from_string(j.at("head").get<std::string>());
    j.at("atoms").get_to(c.atoms);
    j.at("v_min").get_to(c.v_min);
    j.at("v_max").get_to(c.v_max);
    j.at("angle_scale").get_to(c.angle_scale);
    c.dueling = dueling_mode_from_string(j.at("dueling").get<std::string>());
    j.at("sigma_init").get_to(c.sigma_init);
}

inline nlohmann::json QNetwork::to_json() const {
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& s : slots_) tensors.push_back({{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}});
    return {{"config", config_}, {"tensors", tensors}, {"params", params_}, {"noise_rng", rng_state(noise_rng_)}};
}

inline QNetwork QNetwork::from_json(const nlohmann::json& j) {
    try {
        QNetwork net(j.at("config").get<NetworkConfig>(), 0);
        const auto flat = j.at("params").get<std::vector<double>>();
        ParamVector params(flat.begin(), flat.end());
        if (params.size() != net.num_params()) throw SchemaError("checkpoint: parameter count does not match config");
        const auto& tensors = j.at("tensors");
        if (tensors.size() != net.slots_.size()) throw SchemaError("checkpoint: tensor list does not match config");
        for (std::size_t i = 0; i < tensors.size(); ++i)
            if (tensors[i].at("name").get<std::string>() != net.slots_[i].name ||
                tensors[i].at("rows").get<int>() != net.slots_[i].rows ||
                tensors[i].at("cols").get<int>() != net.slots_[i].cols)
                throw SchemaError("checkpoint: tensor '" + net.slots_[i].name + "' does not match");
        net.params_ = std::move(params);
        set_rng_state(net.noise_rng_, j.at("noise_rng").get<std::string>());
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("checkpoint json: ") + e.what());
    }
}

} // namespace vqr::net
