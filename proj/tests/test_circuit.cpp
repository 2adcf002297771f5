#include "catch_amalgamated.hpp"

#include <numbers>
#include <random>

#include <vqr/circuit.hpp>

#include "oracles.hpp"

using namespace vqr;
using qc::CircuitSpec;
using qc::Topology;

namespace {

std::vector<double> random_theta(const CircuitSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    std::vector<double> t(static_cast<std::size_t>(spec.num_params()));
    for (auto& x : t) x = u(rng);
    return t;
}

// Dense-matrix evolution of the ansatz, built gate by gate from Kronecker products.
Eigen::VectorXcd dense_prepare(const CircuitSpec& spec, const std::vector<double>& th) {
    const int n = spec.n_qubits;
    Eigen::VectorXcd psi = oracle::zero_state(n);
    for (int q = 0; q < n; ++q) psi = oracle::embed(oracle::h(), q, n) * psi;
    for (int l = 0; l < spec.n_layers; ++l) {
        if (spec.hadamard_every_layer && l > 0)
            for (int q = 0; q < n; ++q) psi = oracle::embed(oracle::h(), q, n) * psi;
        for (int q = 0; q < n; ++q) {
            psi = oracle::embed(oracle::rx(th[spec.rx_index(l, q)]), q, n) * psi;
            psi = oracle::embed(oracle::rz(th[spec.rz_index(l, q)]), q, n) * psi;
        }
        for (auto [c, t] : qc::entangler_pairs(spec.topology, n)) psi = oracle::cnot(c, t, n) * psi;
    }
    return psi;
}

} // namespace

TEST_CASE("entangler pair lists per topology") {
    using P = std::vector<qc::Pair>;
    CHECK(qc::entangler_pairs(Topology::Linear, 4) == P{{0, 1}, {1, 2}, {2, 3}});
    CHECK(qc::entangler_pairs(Topology::Ring, 4) == P{{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    CHECK(qc::entangler_pairs(Topology::Star, 4) == P{{0, 1}, {0, 2}, {0, 3}});
    CHECK(qc::entangler_pairs(Topology::AllToAll, 3) == P{{0, 1}, {0, 2}, {1, 2}});
    CHECK(qc::entangler_pairs(Topology::Ring, 1).empty());
    CHECK(qc::entangler_pairs(Topology::AllToAll, 4).size() == 6);
    for (auto t : qc::kAllTopologies) CHECK(qc::topology_from_string(qc::to_string(t)) == t);
    CHECK_THROWS_AS(qc::topology_from_string("mesh"), ConfigError);
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS((CircuitSpec{0, 1}.validate()), ConfigError);
    CHECK_THROWS_AS((CircuitSpec{9, 1}.validate()), ConfigError);
    CHECK_THROWS_AS((CircuitSpec{2, -1}.validate()), ConfigError);
    CHECK_NOTHROW((CircuitSpec{8, 0}.validate()));
    CHECK(CircuitSpec{4, 2}.num_params() == 16);
    std::vector<double> bad(3);
    CHECK_THROWS_AS(qc::prepare(CircuitSpec{2, 1}, bad), ContractError);
}

TEST_CASE("statevector matches dense-matrix evolution") {
    for (auto topo : qc::kAllTopologies)
        for (int n = 1; n <= 4; ++n)
            for (int layers : {0, 1, 3})
                for (bool every : {false, true}) {
                    CircuitSpec spec{n, layers, topo, every};
                    const auto th = random_theta(spec, 17u * n + layers);
                    const auto psi = qc::prepare(spec, th);
                    const auto ref = dense_prepare(spec, th);
                    for (std::size_t i = 0; i < psi.size(); ++i)
                        CHECK(std::abs(psi[i] - ref[static_cast<Eigen::Index>(i)]) < 1e-12);
                    const auto z = qc::expect_z(psi);
                    for (int q = 0; q < n; ++q) CHECK(z[q] == Catch::Approx(oracle::expect_z(ref, q, n)).margin(1e-12));
                }
}

TEST_CASE("qubit 0 is the most significant bit") {
    qc::StateVector<double> psi(3);
    psi.apply_rx(0, std::numbers::pi); // |100> up to phase
    CHECK(std::norm(psi[4]) == Catch::Approx(1.0));
    const auto z = qc::expect_z(psi);
    CHECK(z[0] == Catch::Approx(-1.0));
    CHECK(z[1] == Catch::Approx(1.0));
}

TEST_CASE("norm preserved and features bounded") {
    for (auto topo : qc::kAllTopologies) {
        CircuitSpec spec{5, 3, topo};
        for (int k = 0; k < 50; ++k) {
            const auto psi = qc::prepare(spec, random_theta(spec, 1000 + k));
            CHECK(std::abs(psi.norm_squared() - 1.0) < 1e-12);
            for (double z : qc::expect_z(psi)) CHECK(std::abs(z) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("plus state has zero Z expectation") {
    const std::vector<double> none;
    const auto z = qc::features<double>(CircuitSpec{3, 0}, none);
    for (double v : z) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("angles are 2pi periodic up to global phase") {
    CircuitSpec spec{3, 2, Topology::Ring};
    auto th = random_theta(spec, 5);
    const auto f0 = qc::features<double>(spec, th);
    for (auto& t : th) t += 2 * std::numbers::pi;
    const auto f1 = qc::features<double>(spec, th);
    for (std::size_t q = 0; q < f0.size(); ++q) CHECK(f0[q] == Catch::Approx(f1[q]).margin(1e-12));
}

TEST_CASE("parameter-shift gradient agrees with finite differences") {
    for (auto topo : qc::kAllTopologies) {
        CircuitSpec spec{4, 2, topo};
        const auto th = random_theta(spec, 99);
        const std::vector<double> up{0.3, -1.1, 0.7, 0.25};
        auto f = [&](const std::vector<double>& x) {
            const auto z = qc::features<double>(spec, x);
            double s = 0;
            for (std::size_t q = 0; q < z.size(); ++q) s += up[q] * z[q];
            return s;
        };
        const auto fd = oracle::finite_difference(f, th, 1e-5);
        const auto ps = qc::gradient<double>(spec, th, up);
        const auto adj = qc::adjoint_gradient<double>(spec, th, up);
        for (std::size_t k = 0; k < th.size(); ++k) {
            CHECK(std::abs(ps[k] - fd[k]) < 1e-5);
            CHECK(std::abs(adj[k] - ps[k]) < 1e-10);
        }
    }
}

TEST_CASE("zero upstream gives zero gradient") {
    CircuitSpec spec{2, 1};
    const auto th = random_theta(spec, 3);
    const std::vector<double> up{0.0, 0.0};
    for (double g : qc::gradient<double>(spec, th, up)) CHECK(g == 0.0);
}

TEST_CASE("single-precision simulator tracks double") {
    CircuitSpec spec{4, 2, Topology::Star};
    const auto th = random_theta(spec, 8);
    std::vector<float> thf(th.begin(), th.end());
    const auto zd = qc::features<double>(spec, th);
    const auto zf = qc::features<float>(spec, thf);
    for (std::size_t q = 0; q < zd.size(); ++q) CHECK(std::abs(zd[q] - zf[q]) < 1e-5);
}

TEST_CASE("diagram is stable and names every qubit") {
    const auto a = qc::dump(CircuitSpec{3, 2, Topology::Star});
    CHECK(a == qc::dump(CircuitSpec{3, 2, Topology::Star}));
    CHECK(a.find("q2:") != std::string::npos);
    CHECK(a != qc::dump(CircuitSpec{3, 2, Topology::Ring}));
}
