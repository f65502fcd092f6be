#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "umcp/rng.hpp"

namespace umcp {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// An uplink network of L user/base-station pairs connected to a central
/// processor through digital links of capacity C_i (bits per real channel
/// use, +infinity allowed). gains(i, j) is the real amplitude gain from
/// user i to base-station j; powers and noise share the same linear unit.
struct NetworkInstance {
    int L = 0;
    Eigen::MatrixXd gains;     // L x L, (i, j): user i -> base-station j
    Eigen::VectorXd powers;    // length L, P_i >= 0
    double noise = 1.0;        // N0 > 0
    Eigen::VectorXd backhaul;  // length L, C_i >= 0, may be +infinity

    void validate() const {
        if (L < 1) throw std::invalid_argument("network: L must be >= 1");
        if (gains.rows() != L || gains.cols() != L)
            throw std::invalid_argument("network: gain matrix must be L x L");
        if (powers.size() != L || backhaul.size() != L)
            throw std::invalid_argument("network: power/backhaul vectors must have length L");
        if (!(noise > 0.0)) throw std::invalid_argument("network: N0 must be positive");
        for (int i = 0; i < L; ++i) {
            if (!(powers[i] >= 0.0)) throw std::invalid_argument("network: P_i must be >= 0");
            if (std::isnan(backhaul[i]) || backhaul[i] < 0.0)
                throw std::invalid_argument("network: C_i must be >= 0");
            for (int j = 0; j < L; ++j)
                if (!std::isfinite(gains(i, j)))
                    throw std::invalid_argument("network: gains must be finite");
        }
    }
};

/// SNR_i = h_ii^2 P_i / N0 and INR_{i,j} = h_ij^2 P_i / N0; the diagonal of
/// inr is set to zero by convention.
struct DerivedRatios {
    Eigen::VectorXd snr;
    Eigen::MatrixXd inr;
};

inline DerivedRatios derive_ratios(const NetworkInstance& net) {
    net.validate();
    DerivedRatios out;
    out.snr.resize(net.L);
    out.inr = Eigen::MatrixXd::Zero(net.L, net.L);
    for (int i = 0; i < net.L; ++i) {
        for (int j = 0; j < net.L; ++j) {
            double v = net.gains(i, j) * net.gains(i, j) * net.powers[i] / net.noise;
            if (i == j)
                out.snr[i] = v;
            else
                out.inr(i, j) = v;
        }
    }
    return out;
}

/// Soft-handoff chain: base-station i hears its own user and user i+1 only.
struct WynerInstance {
    NetworkInstance net;
    bool weak_interference = false;  // INR_{i+1,i} <= SNR_i for every i < L-1

    /// Checks the bidiagonal sparsity pattern.
    void validate() const {
        net.validate();
        for (int i = 0; i < net.L; ++i)
            for (int j = 0; j < net.L; ++j)
                if (i != j && i != j + 1 && net.gains(i, j) != 0.0)
                    throw std::invalid_argument("wyner: gain pattern must be bidiagonal");
    }
};

inline NetworkInstance make_symmetric_two_user(double snr, double inr, double c) {
    if (snr < 0.0 || inr < 0.0 || c < 0.0)
        throw std::invalid_argument("make_symmetric_two_user: negative input");
    NetworkInstance net;
    net.L = 2;
    net.gains.resize(2, 2);
    net.gains << std::sqrt(snr), std::sqrt(inr), std::sqrt(inr), std::sqrt(snr);
    net.powers = Eigen::VectorXd::Ones(2);
    net.noise = 1.0;
    net.backhaul = Eigen::VectorXd::Constant(2, c);
    net.validate();
    return net;
}

inline WynerInstance make_wyner(const std::vector<double>& snr, const std::vector<double>& inr,
                                const std::vector<double>& backhaul) {
    const int L = static_cast<int>(snr.size());
    if (static_cast<int>(inr.size()) != L - 1 || static_cast<int>(backhaul.size()) != L)
        throw std::invalid_argument("make_wyner: length mismatch");
    WynerInstance w;
    w.net.L = L;
    w.net.gains = Eigen::MatrixXd::Zero(L, L);
    w.net.powers = Eigen::VectorXd::Ones(L);
    w.net.noise = 1.0;
    w.net.backhaul.resize(L);
    w.weak_interference = true;
    for (int i = 0; i < L; ++i) {
        if (snr[i] < 0.0) throw std::invalid_argument("make_wyner: negative SNR");
        w.net.gains(i, i) = std::sqrt(snr[i]);
        w.net.backhaul[i] = backhaul[i];
        if (i < L - 1) {
            if (inr[i] < 0.0) throw std::invalid_argument("make_wyner: negative INR");
            w.net.gains(i + 1, i) = std::sqrt(inr[i]);
            if (inr[i] > snr[i]) w.weak_interference = false;
        }
    }
    w.validate();
    return w;
}

/// Seeded test-instance generator. With wyner=true the cross gain into
/// base-station i is drawn uniformly in [0, SNR_i] so the instance always
/// lands in the weak-interference regime; inr_db is ignored in that case.
inline NetworkInstance random_instance(std::uint64_t seed, int L, double snr_db_lo, double snr_db_hi,
                                       double inr_db_lo, double inr_db_hi, double backhaul_lo,
                                       double backhaul_hi, bool wyner) {
    if (L < 1) throw std::invalid_argument("random_instance: L must be >= 1");
    if (snr_db_hi < snr_db_lo || inr_db_hi < inr_db_lo || backhaul_hi < backhaul_lo || backhaul_lo < 0.0)
        throw std::invalid_argument("random_instance: bad range");
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(L), wyner ? 1u : 0u}));
    NetworkInstance net;
    net.L = L;
    net.gains = Eigen::MatrixXd::Zero(L, L);
    net.powers = Eigen::VectorXd::Ones(L);
    net.noise = 1.0;
    net.backhaul.resize(L);
    std::vector<double> snr(L);
    for (int i = 0; i < L; ++i) {
        snr[i] = std::pow(10.0, rng.uniform(snr_db_lo, snr_db_hi) / 10.0);
        net.gains(i, i) = std::sqrt(snr[i]);
        net.backhaul[i] = rng.uniform(backhaul_lo, backhaul_hi);
    }
    for (int j = 0; j < L; ++j) {
        for (int i = 0; i < L; ++i) {
            if (i == j) continue;
            if (wyner) {
                if (i == j + 1) net.gains(i, j) = std::sqrt(rng.uniform() * snr[j]);
            } else {
                net.gains(i, j) = std::sqrt(std::pow(10.0, rng.uniform(inr_db_lo, inr_db_hi) / 10.0));
            }
        }
    }
    net.validate();
    return net;
}

inline WynerInstance as_wyner(const NetworkInstance& net) {
    WynerInstance w;
    w.net = net;
    w.validate();
    const DerivedRatios r = derive_ratios(net);
    w.weak_interference = true;
    for (int i = 0; i + 1 < net.L; ++i)
        if (r.inr(i + 1, i) > r.snr[i]) w.weak_interference = false;
    return w;
}

namespace detail {

inline std::string format_double(double v) {
    if (v == kInfinity) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& tok) {
    if (tok == "inf" || tok == "+inf" || tok == "infinity") return kInfinity;
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("instance file: bad number '" + tok + "'");
    return v;
}

}  // namespace detail

/// Flat text form: `L=<n>`, `N0=<v>`, then one entry per line as
/// `h <i> <j> <value>`, `P <i> <value>`, `C <i> <value|inf>`; indices are
/// 1-based and `#` starts a comment. Gains not listed are zero.
inline std::string to_text(const NetworkInstance& net) {
    net.validate();
    std::ostringstream os;
    os << "L=" << net.L << "\n";
    os << "N0=" << detail::format_double(net.noise) << "\n";
    for (int i = 0; i < net.L; ++i)
        os << "P " << (i + 1) << " " << detail::format_double(net.powers[i]) << "\n";
    for (int i = 0; i < net.L; ++i)
        os << "C " << (i + 1) << " " << detail::format_double(net.backhaul[i]) << "\n";
    for (int i = 0; i < net.L; ++i)
        for (int j = 0; j < net.L; ++j)
            if (net.gains(i, j) != 0.0)
                os << "h " << (i + 1) << " " << (j + 1) << " " << detail::format_double(net.gains(i, j))
                   << "\n";
    return os.str();
}

inline NetworkInstance from_text(const std::string& text) {
    NetworkInstance net;
    net.L = 0;
    std::istringstream is(text);
    std::string line;
    bool have_l = false, have_n0 = false;
    auto strip = [](std::string s) {
        auto hash = s.find('#');
        if (hash != std::string::npos) s.erase(hash);
        auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return std::string();
        auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        line = strip(line);
        if (line.empty()) continue;
        if (line.rfind("L=", 0) == 0) {
            net.L = std::stoi(line.substr(2));
            if (net.L < 1) throw std::invalid_argument("instance file: L must be >= 1");
            net.gains = Eigen::MatrixXd::Zero(net.L, net.L);
            net.powers = Eigen::VectorXd::Ones(net.L);
            net.backhaul = Eigen::VectorXd::Zero(net.L);
            have_l = true;
            continue;
        }
        if (line.rfind("N0=", 0) == 0) {
            net.noise = detail::parse_double(line.substr(3));
            have_n0 = true;
            continue;
        }
        if (!have_l) throw std::invalid_argument("instance file: entries before L=");
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind == "h") {
            int i, j;
            std::string v;
            if (!(ls >> i >> j >> v)) throw std::invalid_argument("instance file: bad h line");
            if (i < 1 || i > net.L || j < 1 || j > net.L)
                throw std::invalid_argument("instance file: h index out of range");
            net.gains(i - 1, j - 1) = detail::parse_double(v);
        } else if (kind == "P" || kind == "C") {
            int i;
            std::string v;
            if (!(ls >> i >> v)) throw std::invalid_argument("instance file: bad " + kind + " line");
            if (i < 1 || i > net.L) throw std::invalid_argument("instance file: index out of range");
            if (kind == "P")
                net.powers[i - 1] = detail::parse_double(v);
            else
                net.backhaul[i - 1] = detail::parse_double(v);
        } else {
            throw std::invalid_argument("instance file: unknown entry '" + kind + "'");
        }
    }
    if (!have_l || !have_n0) throw std::invalid_argument("instance file: missing L= or N0=");
    net.validate();
    return net;
}

}  // namespace umcp
