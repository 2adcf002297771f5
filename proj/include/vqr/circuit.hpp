#pragma once

// Statevector simulation of the hardware-efficient ansatz
//   H^n  ->  [ RX(theta_x) RZ(theta_z) on every qubit ; CNOT entangler ] x layers
// with Pauli-Z readout and parameter-shift gradients.
//
// Basis index convention: qubit 0 is the most significant bit, so qubit q
// occupies bit (n_qubits - 1 - q) of the amplitude index.

#include <cmath>
#include <complex>
#include <concepts>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"

namespace vqr::qc {

enum class Topology { Linear, Ring, Star, AllToAll };

inline constexpr Topology kAllTopologies[] = {Topology::Linear, Topology::Star, Topology::Ring, Topology::AllToAll};

inline std::string_view to_string(Topology t) {
    switch (t) {
    case Topology::Linear: return "linear";
    case Topology::Ring: return "ring";
    case Topology::Star: return "star";
    case Topology::AllToAll: return "all_to_all";
    }
    return "?";
}

inline Topology topology_from_string(std::string_view s) {
    if (s == "linear") return Topology::Linear;
    if (s == "ring") return Topology::Ring;
    if (s == "star") return Topology::Star;
    if (s == "all_to_all" || s == "alltoall" || s == "all-to-all") return Topology::AllToAll;
    throw ConfigError("unknown topology '" + std::string(s) + "'");
}

using Pair = std::pair<int, int>; // (control, target)

/// CNOT list of one entangling layer, in application order.
inline std::vector<Pair> entangler_pairs(Topology topology, int n_qubits) {
    require(n_qubits >= 1, "entangler_pairs: n_qubits must be >= 1");
    std::vector<Pair> pairs;
    switch (topology) {
    case Topology::Linear:
        for (int i = 0; i + 1 < n_qubits; ++i) pairs.emplace_back(i, i + 1);
        break;
    case Topology::Ring:
        if (n_qubits >= 2)
            for (int i = 0; i < n_qubits; ++i) pairs.emplace_back(i, (i + 1) % n_qubits);
        break;
    case Topology::Star:
        for (int j = 1; j < n_qubits; ++j) pairs.emplace_back(0, j);
        break;
    case Topology::AllToAll:
        for (int i = 0; i < n_qubits; ++i)
            for (int j = i + 1; j < n_qubits; ++j) pairs.emplace_back(i, j);
        break;
    }
    return pairs;
}

inline constexpr int kMaxQubits = 8;

struct CircuitSpec {
    int n_qubits = 4;
    int n_layers = 2;
    Topology topology = Topology::Ring;
    /// Re-apply the Hadamard layer at the start of every layer instead of once.
    bool hadamard_every_layer = false;

    int num_params() const { return 2 * n_qubits * n_layers; }
    std::size_t dim() const { return std::size_t{1} << n_qubits; }

    void validate() const {
        if (n_qubits < 1 || n_qubits > kMaxQubits) throw ConfigError("circuit: n_qubits must be in [1, 8]");
        if (n_layers < 0) throw ConfigError("circuit: n_layers must be >= 0");
    }

    /// Offsets into the layer-major angle vector: all RX of a layer, then all RZ.
    int rx_index(int layer, int qubit) const { return layer * 2 * n_qubits + qubit; }
    int rz_index(int layer, int qubit) const { return layer * 2 * n_qubits + n_qubits + qubit; }

    friend bool operator==(const CircuitSpec&, const CircuitSpec&) = default;
};

template <std::floating_point Real = double>
class StateVector {
public:
    using complex_type = std::complex<Real>;

    explicit StateVector(int n_qubits) : n_qubits_(n_qubits), amps_(std::size_t{1} << n_qubits) {
        amps_[0] = 1;
    }
    StateVector(int n_qubits, std::vector<complex_type> amps) : n_qubits_(n_qubits), amps_(std::move(amps)) {
        require(amps_.size() == (std::size_t{1} << n_qubits), "StateVector: amplitude count must be 2^n");
    }

    int num_qubits() const { return n_qubits_; }
    std::size_t size() const { return amps_.size(); }
    std::span<const complex_type> amplitudes() const { return amps_; }
    const complex_type& operator[](std::size_t i) const { return amps_[i]; }

    Real norm_squared() const {
        Real s = 0;
        for (const auto& a : amps_) s += std::norm(a);
        return s;
    }

    std::size_t mask(int qubit) const { return std::size_t{1} << (n_qubits_ - 1 - qubit); }

    /// Generic single-qubit gate [[m00, m01], [m10, m11]].
    void apply_1q(int qubit, complex_type m00, complex_type m01, complex_type m10, complex_type m11) {
        const std::size_t bit = mask(qubit);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & bit) continue;
            const complex_type a0 = amps_[i];
            const complex_type a1 = amps_[i | bit];
            amps_[i] = m00 * a0 + m01 * a1;
            amps_[i | bit] = m10 * a0 + m11 * a1;
        }
    }

    void apply_h(int qubit) {
        const Real r = Real(1) / std::sqrt(Real(2));
        apply_1q(qubit, r, r, r, -r);
    }

    void apply_rx(int qubit, Real theta) {
        const Real c = std::cos(theta / 2);
        const Real s = std::sin(theta / 2);
        apply_1q(qubit, c, complex_type(0, -s), complex_type(0, -s), c);
    }

    void apply_rz(int qubit, Real phi) {
        const std::size_t bit = mask(qubit);
        const complex_type p0 = std::polar(Real(1), -phi / 2);
        const complex_type p1 = std::polar(Real(1), phi / 2);
        for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] *= (i & bit) ? p1 : p0;
    }

    void apply_cnot(int control, int target) {
        const std::size_t c = mask(control);
        const std::size_t t = mask(target);
        for (std::size_t i = 0; i < amps_.size(); ++i)
            if ((i & c) && !(i & t)) std::swap(amps_[i], amps_[i | t]);
    }

private:
    int n_qubits_;
    std::vector<complex_type> amps_;
};

/// One gate of the compiled ansatz.
struct Op {
    enum Kind { H, RX, RZ, CNOT } kind;
    int qubit = 0;  // target for 1q gates, control for CNOT
    int target = 0; // CNOT target
    int param = -1; // angle index for RX/RZ
};

/// Gate sequence of the ansatz, in application order.
inline std::vector<Op> compile(const CircuitSpec& spec) {
    spec.validate();
    std::vector<Op> ops;
    for (int q = 0; q < spec.n_qubits; ++q) ops.push_back({Op::H, q});
    const auto pairs = entangler_pairs(spec.topology, spec.n_qubits);
    for (int l = 0; l < spec.n_layers; ++l) {
        if (spec.hadamard_every_layer && l > 0)
            for (int q = 0; q < spec.n_qubits; ++q) ops.push_back({Op::H, q});
        for (int q = 0; q < spec.n_qubits; ++q) {
            ops.push_back({Op::RX, q, 0, spec.rx_index(l, q)});
            ops.push_back({Op::RZ, q, 0, spec.rz_index(l, q)});
        }
        for (auto [c, t] : pairs) ops.push_back({Op::CNOT, c, t});
    }
    return ops;
}

template <std::floating_point Real>
void apply(StateVector<Real>& psi, const Op& op, std::span<const Real> angles, bool inverse = false) {
    const Real sign = inverse ? Real(-1) : Real(1);
    switch (op.kind) {
    case Op::H: psi.apply_h(op.qubit); break;
    case Op::RX: psi.apply_rx(op.qubit, sign * angles[static_cast<std::size_t>(op.param)]); break;
    case Op::RZ: psi.apply_rz(op.qubit, sign * angles[static_cast<std::size_t>(op.param)]); break;
    case Op::CNOT: psi.apply_cnot(op.qubit, op.target); break;
    }
}

/// Runs the ansatz on |0...0> and returns the output state.
template <std::floating_point Real = double>
StateVector<Real> prepare(const CircuitSpec& spec, std::span<const Real> angles) {
    spec.validate();
    if (static_cast<int>(angles.size()) != spec.num_params())
        throw ContractError("prepare: angle vector length does not match circuit spec");
    StateVector<Real> psi(spec.n_qubits);
    for (const Op& op : compile(spec)) apply(psi, op, angles);
    return psi;
}

template <std::floating_point Real>
StateVector<Real> prepare(const CircuitSpec& spec, const std::vector<Real>& angles) {
    return prepare<Real>(spec, std::span<const Real>(angles));
}

/// <Z_q> for every qubit.
template <std::floating_point Real>
std::vector<Real> expect_z(const StateVector<Real>& psi) {
    std::vector<Real> z(static_cast<std::size_t>(psi.num_qubits()), Real(0));
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const Real p = std::norm(psi[i]);
        for (int q = 0; q < psi.num_qubits(); ++q) z[static_cast<std::size_t>(q)] += (i & psi.mask(q)) ? -p : p;
    }
    return z;
}

template <std::floating_point Real = double>
std::vector<Real> features(const CircuitSpec& spec, std::span<const Real> angles) {
    return expect_z(prepare<Real>(spec, angles));
}

/// d(upstream . <Z>)/d(theta) by the parameter-shift rule. Both RX and RZ
/// have Pauli/2 generators, so the +-pi/2 shift is exact.
template <std::floating_point Real = double>
std::vector<Real> gradient(const CircuitSpec& spec, std::span<const Real> angles, std::span<const Real> upstream) {
    require(static_cast<int>(upstream.size()) == spec.n_qubits, "gradient: upstream must have n_qubits entries");
    std::vector<Real> grad(angles.size(), Real(0));
    bool any = false;
    for (Real u : upstream) any = any || u != Real(0);
    if (!any) return grad;
    std::vector<Real> shifted(angles.begin(), angles.end());
    const Real shift = std::numbers::pi_v<Real> / 2;
    for (std::size_t k = 0; k < angles.size(); ++k) {
        shifted[k] = angles[k] + shift;
        const auto plus = features<Real>(spec, shifted);
        shifted[k] = angles[k] - shift;
        const auto minus = features<Real>(spec, shifted);
        shifted[k] = angles[k];
        Real g = 0;
        for (std::size_t q = 0; q < upstream.size(); ++q) g += upstream[q] * (plus[q] - minus[q]) / 2;
        grad[k] = g;
    }
    return grad;
}

/// Same quantity as gradient(), by adjoint differentiation: one forward
/// pass, then a reverse sweep carrying |psi> and |lambda> = O|psi> with
/// O = sum_q upstream_q Z_q. Cost is linear in the gate count.
template <std::floating_point Real = double>
std::vector<Real> adjoint_gradient(const CircuitSpec& spec, std::span<const Real> angles, std::span<const Real> upstream) {
    require(static_cast<int>(upstream.size()) == spec.n_qubits, "adjoint_gradient: upstream must have n_qubits entries");
    if (static_cast<int>(angles.size()) != spec.num_params())
        throw ContractError("adjoint_gradient: angle vector length does not match circuit spec");
    using C = std::complex<Real>;
    const auto ops = compile(spec);
    StateVector<Real> psi(spec.n_qubits);
    for (const Op& op : ops) apply(psi, op, angles);

    std::vector<C> lam_amps(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        Real w = 0;
        for (int q = 0; q < spec.n_qubits; ++q) w += (i & psi.mask(q)) ? -upstream[static_cast<std::size_t>(q)] : upstream[static_cast<std::size_t>(q)];
        lam_amps[i] = w * psi[i];
    }
    StateVector<Real> lam(spec.n_qubits, std::move(lam_amps));

    std::vector<Real> grad(angles.size(), Real(0));
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
        const Op& op = *it;
        if (op.kind == Op::RX || op.kind == Op::RZ) {
            // d<O>/dtheta = Im <lambda| G |psi>, G the Pauli generator
            const std::size_t bit = psi.mask(op.qubit);
            C acc = 0;
            for (std::size_t i = 0; i < psi.size(); ++i) {
                if (op.kind == Op::RX) acc += std::conj(lam[i]) * psi[i ^ bit];
                else acc += std::conj(lam[i]) * ((i & bit) ? -psi[i] : psi[i]);
            }
            grad[static_cast<std::size_t>(op.param)] += acc.imag();
        }
        apply(psi, op, angles, true);
        apply(lam, op, angles, true);
    }
    return grad;
}

/// Text diagram, one line per qubit; stable for identical specs.
inline std::string dump(const CircuitSpec& spec) {
    std::vector<std::ostringstream> rows(static_cast<std::size_t>(spec.n_qubits));
    auto cell = [&](int q) -> std::ostringstream& { return rows[static_cast<std::size_t>(q)]; };
    for (int q = 0; q < spec.n_qubits; ++q) cell(q) << "q" << q << ": H";
    const auto pairs = entangler_pairs(spec.topology, spec.n_qubits);
    for (int l = 0; l < spec.n_layers; ++l) {
        for (int q = 0; q < spec.n_qubits; ++q) {
            if (spec.hadamard_every_layer && l > 0) cell(q) << " H";
            cell(q) << " RX(t" << spec.rx_index(l, q) << ") RZ(t" << spec.rz_index(l, q) << ")";
        }
        for (auto [c, t] : pairs)
            for (int q = 0; q < spec.n_qubits; ++q)
                cell(q) << (q == c ? " @" : q == t ? " X" : " -");
    }
    std::string out;
    out += "topology=" + std::string(to_string(spec.topology)) + " qubits=" + std::to_string(spec.n_qubits) +
           " layers=" + std::to_string(spec.n_layers) + "\n";
    for (auto& r : rows) out += r.str() + "\n";
    return out;
}

} // namespace vqr::qc
