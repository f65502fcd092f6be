#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "umcp/network.hpp"
#include "umcp/rates.hpp"

namespace umcp {

/// Joint-decoding (quantize-and-forward) achievable region: one sum-rate
/// bound per nonempty user subset S, stored raw with no redundancy
/// removal. bound[mask] is the constraint on sum_{i in S} R_i where bit i
/// of mask marks membership of user i.
struct NncRegion {
    int L = 0;
    std::vector<double> bound;  // size 1 << L; index 0 unused
    QuantizationProfile q;
};

/// Each subset bound minimizes, over description subsets T, a log-det flow
/// term through the base-stations outside T plus the backhaul spent on T
/// minus the description overhead 1/2 log2(1 + N0/q_i), the latter kept
/// unclipped even when negative.
inline NncRegion nnc_region(const NetworkInstance& net, const QuantizationProfile& prof) {
    net.validate();
    if (net.L > 16) throw std::invalid_argument("nnc_region: subset enumeration capped at L = 16");
    if (prof.q.size() != net.L) throw std::invalid_argument("nnc_region: q must have length L");
    for (int i = 0; i < net.L; ++i)
        if (!(prof.q[i] > 0.0)) throw std::invalid_argument("nnc_region: q entries must be positive");

    const int L = net.L;
    const int full = 1 << L;
    NncRegion region{L, std::vector<double>(full, 0.0), prof};

    // backhaul-minus-overhead term per description subset T
    std::vector<double> link_term(full, 0.0);
    for (int t = 1; t < full; ++t) {
        double acc = 0.0;
        for (int i = 0; i < L; ++i)
            if (t & (1 << i)) acc += net.backhaul[i] - 0.5 * std::log1p(net.noise / prof.q[i]) / kLn2;
        link_term[t] = acc;
    }

    for (int s = 1; s < full; ++s) {
        std::vector<int> users;
        for (int i = 0; i < L; ++i)
            if (s & (1 << i)) users.push_back(i);
        double best = kInfinity;
        for (int t = 0; t < full; ++t) {
            std::vector<int> open;  // base-stations whose signals flow directly
            for (int j = 0; j < L; ++j)
                if (!(t & (1 << j))) open.push_back(j);
            double flow = 0.0;
            if (!open.empty() && !users.empty()) {
                Eigen::MatrixXd a(open.size(), users.size());
                for (std::size_t r = 0; r < open.size(); ++r)
                    for (std::size_t c = 0; c < users.size(); ++c)
                        a(r, c) = net.gains(users[c], open[r]) * std::sqrt(net.powers[users[c]]) /
                                  std::sqrt(net.noise + prof.q[open[r]]);
                Eigen::MatrixXd b = Eigen::MatrixXd::Identity(open.size(), open.size()) +
                                    a * a.transpose();
                Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(b).matrixL();
                for (int d = 0; d < chol.rows(); ++d) flow += std::log2(chol(d, d));
            }
            best = std::min(best, flow + link_term[t]);
        }
        region.bound[s] = best;
    }
    return region;
}

/// The bound on the full user set.
inline double nnc_sum_rate(const NncRegion& region) {
    if (region.L < 1 || region.bound.size() != (std::size_t{1} << region.L))
        throw std::invalid_argument("nnc_sum_rate: malformed region");
    return region.bound[(std::size_t{1} << region.L) - 1];
}

/// Cut-set upper bound for the soft-handoff chain, evaluated in its
/// separable form: each index contributes the smaller of its backhaul
/// capacity and the access-link term 1/2 log2(1 + SNR_i + INR_{i+1,i}).
inline double cutset_upper_bound_wyner(const WynerInstance& wyner) {
    wyner.validate();
    const DerivedRatios r = derive_ratios(wyner.net);
    double acc = 0.0;
    for (int i = 0; i < wyner.net.L; ++i) {
        const double cross = (i + 1 < wyner.net.L) ? r.inr(i + 1, i) : 0.0;
        acc += std::min(wyner.net.backhaul[i], 0.5 * std::log1p(r.snr[i] + cross) / kLn2);
    }
    return acc;
}

/// Achievable sum rate on the chain with side-information quantizers and
/// decoding from the interference-free end; the last hop decodes and
/// forwards, capping its term at C_L.
inline double wyner_sum_rate_wz(const WynerInstance& wyner) {
    wyner.validate();
    const DerivedRatios r = derive_ratios(wyner.net);
    const int L = wyner.net.L;
    double acc = 0.0;
    for (int i = 0; i + 1 < L; ++i) acc += backhaul_limited_rate(r.snr[i], wyner.net.backhaul[i]);
    acc += std::min(0.5 * std::log1p(r.snr[L - 1]) / kLn2, wyner.net.backhaul[L - 1]);
    return acc;
}

/// Same chain with plain vector quantizers: the cancelled neighbour leaves
/// a 2^-2Ci residual in both numerator and denominator.
inline double wyner_sum_rate_nowz(const WynerInstance& wyner) {
    wyner.validate();
    const DerivedRatios r = derive_ratios(wyner.net);
    const int L = wyner.net.L;
    double acc = 0.0;
    for (int i = 0; i + 1 < L; ++i) {
        const double f = std::exp2(-2.0 * wyner.net.backhaul[i]);
        const double residual = f * r.inr(i + 1, i);
        acc += 0.5 * std::log2((1.0 + residual + r.snr[i]) / (1.0 + residual + f * r.snr[i]));
    }
    acc += std::min(0.5 * std::log1p(r.snr[L - 1]) / kLn2, wyner.net.backhaul[L - 1]);
    return acc;
}

/// Certified distance of a chain scheme from the cut-set bound. The limit
/// is L - 1/2 with side-information quantizers and (1 + log2 3) L / 2 - 1/2
/// without; the claim only applies in the weak-interference regime.
struct GapCertificate {
    Scheme scheme = Scheme::PerBsWz;
    int L = 0;
    double achievable_sum = 0.0;
    double upper_bound = 0.0;
    double gap = 0.0;
    double bound_limit = 0.0;
    bool weak_interference = false;
    bool ok = false;
};

inline double wz_gap_limit(int L) { return L - 0.5; }
inline double nowz_gap_limit(int L) { return 0.5 * (1.0 + std::log2(3.0)) * L - 0.5; }

inline GapCertificate gap_certificate(const WynerInstance& wyner, Scheme scheme) {
    if (scheme != Scheme::PerBsWz && scheme != Scheme::PerBsNoWz)
        throw std::invalid_argument("gap_certificate: scheme must be wz or nowz");
    GapCertificate cert;
    cert.scheme = scheme;
    cert.L = wyner.net.L;
    cert.weak_interference = wyner.weak_interference;
    cert.achievable_sum =
        scheme == Scheme::PerBsWz ? wyner_sum_rate_wz(wyner) : wyner_sum_rate_nowz(wyner);
    cert.upper_bound = cutset_upper_bound_wyner(wyner);
    cert.gap = cert.upper_bound - cert.achievable_sum;
    cert.bound_limit = scheme == Scheme::PerBsWz ? wz_gap_limit(cert.L) : nowz_gap_limit(cert.L);
    cert.ok = cert.weak_interference && cert.gap <= cert.bound_limit + 1e-9;
    return cert;
}

inline std::string gap_certificate_text(const GapCertificate& cert) {
    std::ostringstream os;
    os << "scheme=" << scheme_name(cert.scheme) << ", L=" << cert.L
       << ", achievable=" << csv_num(cert.achievable_sum) << ", upper=" << csv_num(cert.upper_bound)
       << ", gap=" << csv_num(cert.gap) << ", limit=" << csv_num(cert.bound_limit)
       << ", ok=" << (cert.ok ? "true" : "false");
    return os.str();
}

}  // namespace umcp
