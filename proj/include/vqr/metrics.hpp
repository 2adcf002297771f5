#pragma once

// Ansatz descriptors: expressibility as KL divergence of the sampled
// state-fidelity histogram from the Haar-random fidelity distribution, and
// the Meyer-Wallach global entanglement measure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"
#include "random.hpp"

namespace vqr::metrics {

inline std::vector<double> random_angles(const qc::CircuitSpec& spec, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    std::vector<double> theta(static_cast<std::size_t>(spec.num_params()));
    for (auto& t : theta) t = u(rng);
    return theta;
}

/// |<a|b>|^2
inline double fidelity(const qc::StateVector<double>& a, const qc::StateVector<double>& b) {
    require(a.size() == b.size(), "fidelity: state dimensions differ");
    std::complex<double> ip = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ip += std::conj(a[i]) * b[i];
    return std::norm(ip);
}

/// Fidelities of n_pairs independent random parameterizations. Pair i uses
/// its own counter-derived seed, so results do not depend on evaluation order.
inline std::vector<double> fidelity_samples(const qc::CircuitSpec& spec, int n_pairs, std::uint64_t seed) {
    if (n_pairs < 1) throw ConfigError("fidelity_samples: n_pairs must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(n_pairs));
    for (int i = 0; i < n_pairs; ++i) {
        Rng rng = make_rng(seed, "fidelity-pair", static_cast<std::uint64_t>(i));
        const auto theta = random_angles(spec, rng);
        const auto phi = random_angles(spec, rng);
        const double f = fidelity(qc::prepare(spec, theta), qc::prepare(spec, phi));
        out[static_cast<std::size_t>(i)] = std::clamp(f, 0.0, 1.0);
    }
    return out;
}

struct FidelityHistogram {
    int bin_count = 75;
    std::vector<long> counts;
    long n_samples = 0;

    explicit FidelityHistogram(int bins = 75) : bin_count(bins), counts(static_cast<std::size_t>(bins), 0) {
        if (bins < 1) throw ConfigError("histogram: bin_count must be >= 1");
    }

    void add(double f) {
        auto b = static_cast<int>(f * bin_count);
        b = std::clamp(b, 0, bin_count - 1);
        ++counts[static_cast<std::size_t>(b)];
        ++n_samples;
    }

    static FidelityHistogram from_samples(const std::vector<double>& fs, int bins = 75) {
        FidelityHistogram h(bins);
        for (double f : fs) h.add(f);
        return h;
    }
};

/// Haar-random fidelity mass in [lo, hi] for Hilbert dimension N, from the
/// density (N - 1)(1 - F)^(N - 2).
inline double haar_bin_mass(double lo, double hi, double dim) {
    return std::pow(1.0 - lo, dim - 1.0) - std::pow(1.0 - hi, dim - 1.0);
}

inline std::vector<double> haar_bin_masses(int bins, int n_qubits) {
    const double dim = std::ldexp(1.0, n_qubits);
    std::vector<double> q(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b)
        q[static_cast<std::size_t>(b)] = haar_bin_mass(static_cast<double>(b) / bins, static_cast<double>(b + 1) / bins, dim);
    return q;
}

/// KL(P_circuit || P_Haar) over histogram bins. Empty circuit bins contribute 0.
inline double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    require(p.size() == q.size(), "kl_divergence: size mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(kl, 0.0);
}

inline double expressibility_kl(const FidelityHistogram& hist, int n_qubits) {
    if (hist.n_samples <= 0) throw ContractError("expressibility_kl: histogram is empty");
    std::vector<double> p(hist.counts.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = static_cast<double>(hist.counts[i]) / static_cast<double>(hist.n_samples);
    return kl_divergence(p, haar_bin_masses(hist.bin_count, n_qubits));
}

struct ExpressibilityReport {
    qc::CircuitSpec spec;
    double kl = 0.0;
    int n_samples = 0;
    std::uint64_t seed = 0;
};

inline ExpressibilityReport expressibility(const qc::CircuitSpec& spec, int n_pairs, std::uint64_t seed, int bins = 75) {
    const auto hist = FidelityHistogram::from_samples(fidelity_samples(spec, n_pairs, seed), bins);
    return {spec, expressibility_kl(hist, spec.n_qubits), n_pairs, seed};
}

/// Purity Tr(rho_k^2) of the single-qubit reduced state of `qubit`.
inline double reduced_purity(const qc::StateVector<double>& psi, int qubit) {
    const std::size_t bit = psi.mask(qubit);
    double r00 = 0.0, r11 = 0.0;
    std::complex<double> r01 = 0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        if (i & bit) continue;
        const auto a0 = psi[i];
        const auto a1 = psi[i | bit];
        r00 += std::norm(a0);
        r11 += std::norm(a1);
        r01 += a0 * std::conj(a1);
    }
    return r00 * r00 + r11 * r11 + 2.0 * std::norm(r01);
}

/// Q = 2 (1 - mean_k Tr(rho_k^2)).
inline double meyer_wallach(const qc::StateVector<double>& psi) {
    double purity = 0.0;
    for (int k = 0; k < psi.num_qubits(); ++k) purity += reduced_purity(psi, k);
    const double q = 2.0 * (1.0 - purity / psi.num_qubits());
    return std::clamp(q, 0.0, 1.0);
}

struct EntanglementReport {
    qc::CircuitSpec spec;
    double mean_mw = 0.0;
    double std_mw = 0.0;
    int n_samples = 0;
    std::uint64_t seed = 0;
};

inline EntanglementReport average_mw(const qc::CircuitSpec& spec, int n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw ConfigError("average_mw: n_samples must be >= 1");
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        Rng rng = make_rng(seed, "mw-sample", static_cast<std::uint64_t>(i));
        const double q = meyer_wallach(qc::prepare(spec, random_angles(spec, rng)));
        sum += q;
        sum_sq += q * q;
    }
    const double mean = sum / n_samples;
    const double var = n_samples > 1 ? std::max(0.0, (sum_sq - n_samples * mean * mean) / (n_samples - 1)) : 0.0;
    return {spec, mean, std::sqrt(var), n_samples, seed};
}

struct TopologyRow {
    qc::Topology topology;
    int n_qubits = 0;
    int n_layers = 0;
    double kl = 0.0;
    double mean_mw = 0.0;
    double std_mw = 0.0;
    int n_samples = 0;
    std::uint64_t seed = 0;
};

/// Both metrics for every topology under a shared seed, sorted by KL
/// ascending (most expressive first). `mw_samples` <= 0 reuses n_samples.
inline std::vector<TopologyRow> topology_report(int n_qubits, int n_layers, int n_samples, std::uint64_t seed,
                                                int mw_samples = 0) {
    std::vector<TopologyRow> rows;
    for (auto topo : qc::kAllTopologies) {
        const qc::CircuitSpec spec{n_qubits, n_layers, topo};
        const auto ex = expressibility(spec, n_samples, seed);
        const auto mw = average_mw(spec, mw_samples > 0 ? mw_samples : n_samples, seed);
        rows.push_back({topo, n_qubits, n_layers, ex.kl, mw.mean_mw, mw.std_mw, n_samples, seed});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.kl < b.kl; });
    return rows;
}

inline void write_report_csv(std::ostream& os, const std::vector<TopologyRow>& rows) {
    os << "topology,n_q,n_l,kl,mean_mw,std_mw,n_samples,seed\n";
    os.precision(10);
    for (const auto& r : rows)
        os << qc::to_string(r.topology) << ',' << r.n_qubits << ',' << r.n_layers << ',' << r.kl << ',' << r.mean_mw
           << ',' << r.std_mw << ',' << r.n_samples << ',' << r.seed << '\n';
}

} // namespace vqr::metrics
