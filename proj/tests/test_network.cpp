#include "catch_amalgamated.hpp"

#include <vqr/network.hpp>

#include "oracles.hpp"

using namespace vqr;
using namespace vqr::net;

namespace {

NetworkConfig tiny_config(qc::Topology topo = qc::Topology::Ring) {
    NetworkConfig c;
    c.input_dim = 6;
    c.hidden = 8;
    c.circuit = {2, 1, topo};
    c.num_actions = 2;
    c.atoms = 3;
    return c;
}

MatrixXd random_batch(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MatrixXd x(rows, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
    return x;
}

const TensorSlot& slot(const QNetwork& n, const std::string& name) {
    for (const auto& s : n.slots())
        if (s.name == name) return s;
    throw std::runtime_error("no slot " + name);
}

// Compares backward() against central differences of L = <W, output>.
void check_gradient(QNetwork net, Mode mode, std::uint64_t seed) {
    const MatrixXd x = random_batch(net.config().input_dim, 3, seed);
    net.resample_noise();
    const auto cache = net.forward(x, mode);
    const MatrixXd w = random_batch(static_cast<int>(cache.output.rows()), 3, seed + 1);
    const auto g = net.backward(cache, w);
    auto loss = [&](const net::ParamVector& p) {
        QNetwork probe = net;
        probe.params() = p;
        return probe.forward(x, mode).output.cwiseProduct(w).sum();
    };
    const auto fd = oracle::finite_difference(loss, net.params(), 1e-6);
    double max_rel = 0.0;
    for (std::size_t k = 0; k < fd.size(); ++k)
        max_rel = std::max(max_rel, std::abs(g[k] - fd[k]) / std::max(1.0, std::abs(fd[k])));
    CHECK(max_rel < 1e-4);
}

} // namespace

TEST_CASE("config validation") {
    auto c = tiny_config();
    c.input_dim = 0;
    CHECK_THROWS_AS(QNetwork(c, 1), ConfigError);
    c = tiny_config();
    c.atoms = 1;
    CHECK_THROWS_AS(QNetwork(c, 1), ConfigError);
    c = tiny_config();
    c.v_min = 0.0;
    CHECK_THROWS_AS(QNetwork(c, 1), ConfigError);
    c = tiny_config();
    c.circuit.n_qubits = 9;
    CHECK_THROWS_AS(QNetwork(c, 1), ConfigError);
}

TEST_CASE("support spans [v_min, v_max]") {
    const auto z = NetworkConfig{}.support();
    REQUIRE(z.size() == 51);
    CHECK(z[0] == -1.0);
    CHECK(z[50] == 0.0);
    CHECK(z[25] == Catch::Approx(-0.5));
}

TEST_CASE("parameter layout") {
    QNetwork n(tiny_config(), 1);
    // trunk 2 * (w_mu, b_mu, w_sigma, b_sigma) + encoder + dueling head
    const std::size_t expected = 2 * (6 * 8 + 8) + 2 * (8 * 8 + 8) + (4 * 8 + 4) + (3 * 2 + 3) + (6 * 2 + 6);
    CHECK(n.num_params() == expected);
    CHECK(slot(n, "trunk0.w_sigma").size() == 48);
    for (std::size_t i = 0; i < 48; ++i) CHECK(n.params()[slot(n, "trunk0.w_sigma").offset + i] == 0.017);
    QNetwork m(tiny_config(), 1);
    CHECK(n.params() == m.params());
    CHECK(n.params() != QNetwork(tiny_config(), 2).params());
}

TEST_CASE("distribution rows are stochastic") {
    for (auto mode : {DuelingMode::logit_space, DuelingMode::paper_literal}) {
        NetworkConfig c;
        c.input_dim = 10;
        c.hidden = 32;
        c.dueling = mode;
        QNetwork n(c, 3);
        const auto cache = n.forward(random_batch(10, 50, 4), Mode::eval);
        for (int b = 0; b < 50; ++b) {
            const auto p = n.distribution(cache, b);
            for (int a = 0; a < 3; ++a) {
                CHECK(std::abs(p.row(a).sum() - 1.0) < 1e-6);
                CHECK(p.row(a).minCoeff() >= 0.0);
            }
            const auto q = q_values(p, c.support());
            for (int a = 0; a < 3; ++a) {
                CHECK(q[a] == Catch::Approx(n.q_values(cache)(a, b)));
                CHECK((q[a] >= -1.0 - 1e-12 && q[a] <= 1e-12));
            }
        }
    }
}

TEST_CASE("shifting every advantage by the same offset leaves the output unchanged") {
    QNetwork n(tiny_config(), 5);
    const MatrixXd x = random_batch(6, 4, 6);
    const MatrixXd before = n.forward(x, Mode::eval).output;
    auto ab = n.tensor(slot(n, "advantage.b"));
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 3; ++i) ab(a * 3 + i, 0) += 0.4 * (i + 1);
    const MatrixXd after = n.forward(x, Mode::eval).output;
    CHECK((after - before).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("eval mode ignores noise and train mode uses it") {
    auto c = tiny_config();
    c.hidden = 64;
    QNetwork n(c, 7);
    const MatrixXd x = random_batch(6, 8, 8);
    const MatrixXd e0 = n.forward(x, Mode::eval).output;
    n.resample_noise();
    const MatrixXd t1 = n.forward(x, Mode::train).output;
    CHECK(n.forward(x, Mode::eval).output == e0);
    CHECK((t1 - e0).cwiseAbs().maxCoeff() > 0.0);
    n.resample_noise();
    CHECK((n.forward(x, Mode::train).output - t1).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("noise samples are standard normal") {
    NetworkConfig c = tiny_config();
    c.hidden = 256;
    QNetwork n(c, 9);
    n.resample_noise();
    const auto& w = n.noise(1).w;
    const double mean = w.mean();
    const double var = (w.array() - mean).square().sum() / (w.size() - 1);
    // 65536 samples: standard errors are 0.004 for the mean and 0.0055 for the variance
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("backward matches finite differences") {
    for (auto topo : qc::kAllTopologies) {
        INFO(qc::to_string(topo));
        QNetwork n(tiny_config(topo), 11);
        check_gradient(n, Mode::train, 21);
        check_gradient(n, Mode::eval, 22);
    }
    SECTION("scalar head and dense features") {
        auto c = tiny_config();
        c.head = HeadKind::scalar;
        c.features = FeatureKind::none;
        c.noisy = false;
        check_gradient(QNetwork(c, 12), Mode::train, 23);
        c = tiny_config();
        c.features = FeatureKind::dense_tanh;
        check_gradient(QNetwork(c, 13), Mode::train, 24);
    }
    SECTION("clipped dueling combination") {
        auto c = tiny_config();
        c.dueling = DuelingMode::paper_literal;
        check_gradient(QNetwork(c, 14), Mode::train, 25);
    }
}

TEST_CASE("sigma gradient is the mu gradient scaled by the noise") {
    QNetwork n(tiny_config(), 15);
    n.resample_noise();
    const auto cache = n.forward(random_batch(6, 3, 16), Mode::train);
    const auto g = n.backward(cache, random_batch(static_cast<int>(cache.output.rows()), 3, 17));
    const auto& d = n.trunk(0);
    const ConstMatMap gmu(g.data() + d.w_mu.offset, d.out, d.in);
    const ConstMatMap gsig(g.data() + d.w_sigma.offset, d.out, d.in);
    CHECK((gsig - gmu.cwiseProduct(n.noise(0).w)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Adam and clipping") {
    ParamVector p{1.0, -2.0};
    Adam opt{0.1};
    opt.apply(p, {0.5, -3.0});
    // first bias-corrected step moves each coordinate by lr * sign(g)
    CHECK(p[0] == Catch::Approx(0.9));
    CHECK(p[1] == Catch::Approx(-1.9));
    ParamVector g{3.0, 4.0};
    CHECK(clip_global_norm(g, 1.0) == Catch::Approx(5.0));
    CHECK(global_norm(g) == Catch::Approx(1.0));
    ParamVector small{0.1, 0.1};
    clip_global_norm(small, 1.0);
    CHECK(small[0] == 0.1);
}

TEST_CASE("json round trip preserves behaviour") {
    QNetwork n(tiny_config(qc::Topology::Star), 18);
    const auto j = n.to_json();
    auto m = QNetwork::from_json(nlohmann::json::parse(j.dump()));
    CHECK(m.params() == n.params());
    CHECK(m.config() == n.config());
    const MatrixXd x = random_batch(6, 3, 19);
    CHECK(m.forward(x, Mode::eval).output == n.forward(x, Mode::eval).output);
    auto bad = j;
    bad["params"].erase(0);
    CHECK_THROWS_AS(QNetwork::from_json(bad), SchemaError);
    bad = j;
    bad["tensors"][0]["name"] = "other";
    CHECK_THROWS_AS(QNetwork::from_json(bad), SchemaError);
}

TEST_CASE("enum names round trip") {
    for (auto k : {FeatureKind::quantum, FeatureKind::dense_tanh, FeatureKind::none})
        CHECK(feature_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(head_kind_from_string("x"), ConfigError);
    CHECK_THROWS_AS(dueling_mode_from_string("x"), ConfigError);
}
