#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "umcp/gaussian.hpp"
#include "umcp/network.hpp"

namespace umcp {

constexpr double kLn2 = 0.69314718055994530942;

enum class Scheme { PerBsWz, PerBsNoWz, JointBs, Baseline, ImprovedPerBs };

inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::PerBsWz: return "wz";
        case Scheme::PerBsNoWz: return "nowz";
        case Scheme::JointBs: return "joint";
        case Scheme::Baseline: return "baseline";
        case Scheme::ImprovedPerBs: return "improved";
    }
    return "?";
}

inline Scheme parse_scheme(const std::string& name) {
    if (name == "wz") return Scheme::PerBsWz;
    if (name == "nowz") return Scheme::PerBsNoWz;
    if (name == "joint") return Scheme::JointBs;
    if (name == "baseline") return Scheme::Baseline;
    if (name == "improved") return Scheme::ImprovedPerBs;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

/// perm[k] is the user decoded at stage k (0-based).
struct DecodingOrder {
    std::vector<int> perm;

    void validate(int L) const {
        if (static_cast<int>(perm.size()) != L)
            throw std::invalid_argument("decoding order: wrong length");
        std::vector<bool> seen(L, false);
        for (int u : perm) {
            if (u < 0 || u >= L || seen[u])
                throw std::invalid_argument("decoding order: not a permutation");
            seen[u] = true;
        }
    }

    std::vector<int> stage_of(int L) const {
        std::vector<int> s(L);
        for (int k = 0; k < L; ++k) s[perm[k]] = k;
        return s;
    }
};

inline DecodingOrder natural_order(int L) {
    DecodingOrder o;
    o.perm.resize(L);
    std::iota(o.perm.begin(), o.perm.end(), 0);
    return o;
}

/// Gaussian quantization noise levels q_k, +infinity meaning "no useful
/// description" (the C_k = 0 convention).
struct QuantizationProfile {
    Eigen::VectorXd q;
};

/// Per-user achievable rates in bits per real channel use, indexed by user
/// (not by decoding stage); the order used is carried alongside.
struct RateVector {
    Eigen::VectorXd r;
    DecodingOrder order;
    Scheme scheme = Scheme::PerBsWz;

    double sum() const { return r.sum(); }
};

/// R(sinr, c) = 1/2 log2((1 + sinr) / (1 + 2^-2c sinr)); the rate of a
/// quantize-and-forward link whose description spends c bits per real
/// channel use. Monotone in both arguments, saturates at the c = inf limit.
inline double backhaul_limited_rate(double sinr, double c_bits) {
    if (sinr <= 0.0) return 0.0;
    const double f = std::exp2(-2.0 * c_bits);  // 0 when c = inf
    return 0.5 * (std::log1p(sinr) - std::log1p(f * sinr)) / kLn2;
}

/// Effective SINR of each user under successive decoding: only users not
/// yet decoded count as interference. Indexed by user.
inline Eigen::VectorXd effective_sinr_by_user(const NetworkInstance& net, const DecodingOrder& order) {
    order.validate(net.L);
    const DerivedRatios ratios = derive_ratios(net);
    Eigen::VectorXd out(net.L);
    for (int k = 0; k < net.L; ++k) {
        const int u = order.perm[k];
        double interference = 0.0;
        for (int t = k + 1; t < net.L; ++t) interference += ratios.inr(order.perm[t], u);
        out[u] = ratios.snr[u] / (1.0 + interference);
    }
    return out;
}

inline double effective_sinr_wz(const NetworkInstance& net, const DecodingOrder& order, int stage) {
    order.validate(net.L);
    if (stage < 0 || stage >= net.L) throw std::invalid_argument("effective_sinr_wz: bad stage");
    return effective_sinr_by_user(net, order)[order.perm[stage]];
}

/// Quantization noise that makes each description rate exactly equal the
/// backhaul capacity, with the already-decoded users' signals as decoder
/// side information: q_k = (N0 + sum of not-yet-decoded receive power at
/// base-station k, own user included) / (2^2Ck - 1).
inline QuantizationProfile wz_quantization(const NetworkInstance& net, const DecodingOrder& order) {
    order.validate(net.L);
    net.validate();
    QuantizationProfile prof;
    prof.q.resize(net.L);
    const std::vector<int> stage = order.stage_of(net.L);
    for (int u = 0; u < net.L; ++u) {
        double cover = net.noise;
        for (int j = 0; j < net.L; ++j)
            if (stage[j] >= stage[u]) cover += net.gains(j, u) * net.gains(j, u) * net.powers[j];
        const double den = std::exp2(2.0 * net.backhaul[u]) - 1.0;
        prof.q[u] = den > 0.0 ? cover / den : kInfinity;
    }
    return prof;
}

/// Per-base-station SIC with decoder side information used in the
/// quantizer (Wyner-Ziv compress-and-forward).
inline RateVector rates_per_bs_sic_wz(const NetworkInstance& net, const DecodingOrder& order) {
    const Eigen::VectorXd sinr = effective_sinr_by_user(net, order);
    RateVector out{Eigen::VectorXd(net.L), order, Scheme::PerBsWz};
    for (int u = 0; u < net.L; ++u) out.r[u] = backhaul_limited_rate(sinr[u], net.backhaul[u]);
    return out;
}

/// Infinite-backhaul limit of the SIC rates: 1/2 log2(1 + SINR).
inline RateVector sic_limit(const NetworkInstance& net, const DecodingOrder& order) {
    const Eigen::VectorXd sinr = effective_sinr_by_user(net, order);
    RateVector out{Eigen::VectorXd(net.L), order, Scheme::PerBsWz};
    for (int u = 0; u < net.L; ++u) out.r[u] = 0.5 * std::log1p(sinr[u]) / kLn2;
    return out;
}

/// Backhaul capacity matching the SIC limit, and the rate shortfall there.
/// The gap is 1/2 log2(1 + sinr/(1+sinr)), which lies in [0, 1/2].
struct HalfBitPoint {
    double c;
    double gap;
};

inline HalfBitPoint half_bit_point(double sinr_bar) {
    if (sinr_bar < 0.0) throw std::invalid_argument("half_bit_point: negative SINR");
    HalfBitPoint p;
    p.c = 0.5 * std::log1p(sinr_bar) / kLn2;
    p.gap = std::isinf(sinr_bar) ? 0.5 : 0.5 * std::log1p(sinr_bar / (1.0 + sinr_bar)) / kLn2;
    return p;
}

/// Per-base-station SIC with a plain vector quantizer (no decoder side
/// information): previously decoded users leave a residual 2^-2Ck share of
/// their interference in the effective SINR.
inline RateVector rates_per_bs_sic_nowz(const NetworkInstance& net, const DecodingOrder& order) {
    order.validate(net.L);
    const DerivedRatios ratios = derive_ratios(net);
    const std::vector<int> stage = order.stage_of(net.L);
    RateVector out{Eigen::VectorXd(net.L), order, Scheme::PerBsNoWz};
    for (int u = 0; u < net.L; ++u) {
        double later = 0.0, earlier = 0.0;
        for (int j = 0; j < net.L; ++j) {
            if (j == u) continue;
            (stage[j] > stage[u] ? later : earlier) += ratios.inr(j, u);
        }
        const double f = std::exp2(-2.0 * net.backhaul[u]);
        const double sinr = ratios.snr[u] / (1.0 + later + f * earlier);
        out.r[u] = backhaul_limited_rate(sinr, net.backhaul[u]);
    }
    return out;
}

/// SIC in which stage k also reuses the already-recovered descriptions of
/// earlier base-stations. Each q_k is solved stage by stage so that the
/// description rate, conditioned on everything already known, exactly
/// fills C_k. Descriptions with C_k = 0 carry nothing and are skipped.
inline RateVector rates_improved_per_bs_sic(const NetworkInstance& net, const DecodingOrder& order) {
    order.validate(net.L);
    net.validate();
    const int L = net.L;
    std::vector<double> q(L, kInfinity);
    RateVector out{Eigen::VectorXd::Zero(L), order, Scheme::ImprovedPerBs};
    for (int s = 0; s < L; ++s) {
        const int u = order.perm[s];
        std::vector<int> decoded(order.perm.begin(), order.perm.begin() + s);
        std::vector<int> useful;
        for (int t = 0; t < s; ++t)
            if (std::isfinite(q[order.perm[t]])) useful.push_back(order.perm[t]);

        // residual variance of Y_u given decoded inputs and kept descriptions
        Eigen::VectorXd qv = Eigen::VectorXd::Zero(L);
        for (int p : useful) qv[p] = q[p];
        qv[u] = 0.0;  // Y_u itself
        Eigen::MatrixXd cov = joint_input_output_covariance(net, qv);
        std::vector<int> cond = decoded;
        for (int p : useful) cond.push_back(L + p);
        const double v = conditional_covariance(cov, {L + u}, cond)(0, 0);

        const double den = std::exp2(2.0 * net.backhaul[u]) - 1.0;
        q[u] = den > 0.0 ? v / den : kInfinity;

        std::vector<int> obs;
        for (int t = 0; t <= s; ++t)
            if (std::isfinite(q[order.perm[t]])) obs.push_back(L + order.perm[t]);
        if (obs.empty()) continue;
        Eigen::VectorXd qv2 = Eigen::VectorXd::Zero(L);
        for (int t = 0; t <= s; ++t)
            if (std::isfinite(q[order.perm[t]])) qv2[order.perm[t]] = q[order.perm[t]];
        Eigen::MatrixXd cov2 = joint_input_output_covariance(net, qv2);
        out.r[u] = std::max(0.0, gaussian_conditional_mi(cov2, {u}, obs, decoded));
    }
    return out;
}

struct JointBsResult {
    RateVector rates;
    std::vector<bool> feasible;  // per user: description rate fits in C_k
};

/// Two-phase successive decoding: all descriptions first, then all users,
/// each decoded from the full set of descriptions. Reports per-link
/// feasibility of the given quantization profile instead of clipping.
inline JointBsResult rates_joint_bs_sic(const NetworkInstance& net, const DecodingOrder& order,
                                        const QuantizationProfile& prof) {
    order.validate(net.L);
    net.validate();
    const int L = net.L;
    if (prof.q.size() != L) throw std::invalid_argument("rates_joint_bs_sic: q must have length L");
    for (int u = 0; u < L; ++u)
        if (!(prof.q[u] > 0.0) || !std::isfinite(prof.q[u]))
            throw std::invalid_argument("rates_joint_bs_sic: q must be finite and positive");

    // covariance over [X (0..L-1), Y (L..2L-1), Yhat (2L..3L-1)]
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(3 * L, 3 * L);
    for (int i = 0; i < L; ++i) k(i, i) = net.powers[i];
    for (int i = 0; i < L; ++i)
        for (int u = 0; u < L; ++u) {
            const double c = net.gains(i, u) * net.powers[i];
            k(i, L + u) = k(L + u, i) = c;
            k(i, 2 * L + u) = k(2 * L + u, i) = c;
        }
    for (int u = 0; u < L; ++u)
        for (int v = 0; v < L; ++v) {
            double acc = 0.0;
            for (int i = 0; i < L; ++i) acc += net.gains(i, u) * net.gains(i, v) * net.powers[i];
            const double noise = (u == v) ? net.noise : 0.0;
            k(L + u, L + v) = acc + noise;
            k(L + u, 2 * L + v) = k(2 * L + v, L + u) = acc + noise;
            k(2 * L + u, 2 * L + v) = acc + noise + (u == v ? prof.q[u] : 0.0);
        }

    std::vector<int> all_desc(L);
    std::iota(all_desc.begin(), all_desc.end(), 2 * L);
    JointBsResult res{RateVector{Eigen::VectorXd::Zero(L), order, Scheme::JointBs},
                      std::vector<bool>(L, false)};
    std::vector<int> desc_prev;
    for (int s = 0; s < L; ++s) {
        const int u = order.perm[s];
        std::vector<int> decoded(order.perm.begin(), order.perm.begin() + s);
        res.rates.r[u] = std::max(0.0, gaussian_conditional_mi(k, {u}, all_desc, decoded));
        const double need = gaussian_conditional_mi(k, {L + u}, {2 * L + u}, desc_prev);
        res.feasible[u] = need <= net.backhaul[u] + 1e-9;
        desc_prev.push_back(2 * L + u);
    }
    return res;
}

/// Symmetric two-user quantization noise level that makes the two-phase
/// description rates use exactly 2c bits in total:
/// q = (a + sqrt(4b + 2^4c (a^2 - 4b))) / (2^4c - 1), a = 1 + snr + inr,
/// b = snr * inr.
inline double two_user_symmetric_joint_q(double snr, double inr, double c) {
    if (snr < 0.0 || inr < 0.0) throw std::invalid_argument("two_user_symmetric_joint_q: negative ratio");
    if (!(c > 0.0)) throw std::invalid_argument("two_user_symmetric_joint_q: c must be > 0");
    const double a = 1.0 + snr + inr;
    const double b = snr * inr;
    const double e = std::exp2(4.0 * c);
    if (std::isinf(e)) return 0.0;
    return (a + std::sqrt(4.0 * b + e * (a * a - 4.0 * b))) / (e - 1.0);
}

/// Single-user decoding: every other user is noise, and the rate is capped
/// by the backhaul link.
inline RateVector rates_baseline(const NetworkInstance& net) {
    const DerivedRatios ratios = derive_ratios(net);
    RateVector out{Eigen::VectorXd(net.L), natural_order(net.L), Scheme::Baseline};
    for (int u = 0; u < net.L; ++u) {
        double interference = 0.0;
        for (int j = 0; j < net.L; ++j)
            if (j != u) interference += ratios.inr(j, u);
        const double r = 0.5 * std::log1p(ratios.snr[u] / (1.0 + interference)) / kLn2;
        out.r[u] = std::min(r, net.backhaul[u]);
    }
    return out;
}

inline RateVector scheme_rates(const NetworkInstance& net, const DecodingOrder& order, Scheme scheme) {
    switch (scheme) {
        case Scheme::PerBsWz: return rates_per_bs_sic_wz(net, order);
        case Scheme::PerBsNoWz: return rates_per_bs_sic_nowz(net, order);
        case Scheme::ImprovedPerBs: return rates_improved_per_bs_sic(net, order);
        case Scheme::Baseline: return rates_baseline(net);
        case Scheme::JointBs:
            throw std::invalid_argument("scheme_rates: joint-BS needs a quantization profile");
    }
    throw std::invalid_argument("scheme_rates: unknown scheme");
}

/// Corner points for the two decoding orders plus the time-sharing hull
/// (a pentagon in general, the baseline square for single-user decoding).
struct TwoUserRegion {
    Scheme scheme = Scheme::PerBsWz;
    Eigen::Vector2d corner_12{0, 0};  // user 1 decoded first
    Eigen::Vector2d corner_21{0, 0};  // user 2 decoded first
    std::vector<Eigen::Vector2d> hull;  // counter-clockwise, starts at the origin
};

namespace detail {

inline std::vector<Eigen::Vector2d> convex_hull_ccw(std::vector<Eigen::Vector2d> pts) {
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const auto& a, const auto& b) {
                              return std::abs(a.x() - b.x()) <= 1e-12 * (1.0 + std::abs(a.x())) &&
                                     std::abs(a.y() - b.y()) <= 1e-12 * (1.0 + std::abs(a.y()));
                          }),
              pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Eigen::Vector2d> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {  // lower chain
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {  // upper chain
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    // rotate so the origin (lowest-leftmost, always on the hull here) is first
    std::size_t start = 0;
    for (std::size_t i = 1; i < hull.size(); ++i)
        if (hull[i].norm() < hull[start].norm()) start = i;
    std::rotate(hull.begin(), hull.begin() + start, hull.end());
    return hull;
}

}  // namespace detail

inline TwoUserRegion two_user_region(Scheme scheme, double snr, double inr, double c) {
    const NetworkInstance net = make_symmetric_two_user(snr, inr, c);
    TwoUserRegion region;
    region.scheme = scheme;
    DecodingOrder o12{{0, 1}}, o21{{1, 0}};
    switch (scheme) {
        case Scheme::Baseline: {
            const RateVector rv = rates_baseline(net);
            region.corner_12 = region.corner_21 = {rv.r[0], rv.r[1]};
            break;
        }
        case Scheme::PerBsWz:
        case Scheme::PerBsNoWz: {
            const RateVector a = scheme_rates(net, o12, scheme);
            const RateVector b = scheme_rates(net, o21, scheme);
            region.corner_12 = {a.r[0], a.r[1]};
            region.corner_21 = {b.r[0], b.r[1]};
            break;
        }
        case Scheme::JointBs: {
            if (c == 0.0) break;  // no descriptions at all; region collapses to the origin
            QuantizationProfile prof;
            prof.q = Eigen::VectorXd::Constant(2, two_user_symmetric_joint_q(snr, inr, c));
            const JointBsResult a = rates_joint_bs_sic(net, o12, prof);
            const JointBsResult b = rates_joint_bs_sic(net, o21, prof);
            region.corner_12 = {a.rates.r[0], a.rates.r[1]};
            region.corner_21 = {b.rates.r[0], b.rates.r[1]};
            break;
        }
        default:
            throw std::invalid_argument("two_user_region: unknown scheme tag");
    }
    const double mx = std::max(region.corner_12.x(), region.corner_21.x());
    const double my = std::max(region.corner_12.y(), region.corner_21.y());
    region.hull = detail::convex_hull_ccw(
        {{0, 0}, {mx, 0}, {0, my}, region.corner_12, region.corner_21});
    return region;
}

struct OrderSearchResult {
    DecodingOrder order;
    RateVector rates;
};

/// Sum-rate-maximizing decoding order: exhaustive when L! fits under the
/// given limit (lexicographically first order wins ties), otherwise the
/// decode-strongest-first heuristic on pre-SIC SINRs.
inline OrderSearchResult best_decoding_order(const NetworkInstance& net, Scheme scheme,
                                             std::uint64_t exhaustive_limit) {
    if (exhaustive_limit < 1) throw std::invalid_argument("best_decoding_order: limit must be >= 1");
    if (scheme == Scheme::JointBs)
        throw std::invalid_argument("best_decoding_order: joint-BS needs a quantization profile");
    net.validate();
    std::uint64_t fact = 1;
    bool exhaustive = true;
    for (int i = 2; i <= net.L; ++i) {
        fact *= static_cast<std::uint64_t>(i);
        if (fact > exhaustive_limit) {
            exhaustive = false;
            break;
        }
    }
    if (scheme == Scheme::Baseline) exhaustive = false;  // order-independent

    if (exhaustive) {
        DecodingOrder order = natural_order(net.L);
        OrderSearchResult best{order, scheme_rates(net, order, scheme)};
        std::vector<int> perm = order.perm;
        while (std::next_permutation(perm.begin(), perm.end())) {
            DecodingOrder cand{perm};
            RateVector rv = scheme_rates(net, cand, scheme);
            if (rv.sum() > best.rates.sum()) best = {cand, rv};
        }
        return best;
    }

    // heuristic: decreasing pre-SIC SINR, ties by user index
    const DerivedRatios ratios = derive_ratios(net);
    std::vector<std::pair<double, int>> keyed(net.L);
    for (int u = 0; u < net.L; ++u) {
        double interference = 0.0;
        for (int j = 0; j < net.L; ++j)
            if (j != u) interference += ratios.inr(j, u);
        keyed[u] = {ratios.snr[u] / (1.0 + interference), u};
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    DecodingOrder order;
    order.perm.resize(net.L);
    for (int k = 0; k < net.L; ++k) order.perm[k] = keyed[k].second;
    return {order, scheme_rates(net, order, scheme)};
}

inline std::string csv_num(double v) {
    if (v == kInfinity) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string rate_vector_csv(const RateVector& rv) {
    std::ostringstream os;
    os << "user,rate_bits\n";
    for (int u = 0; u < rv.r.size(); ++u) os << (u + 1) << "," << csv_num(rv.r[u]) << "\n";
    return os.str();
}

inline std::string two_user_region_csv(const TwoUserRegion& region) {
    std::ostringstream os;
    const std::string name = scheme_name(region.scheme);
    os << csv_num(region.corner_12.x()) << "," << csv_num(region.corner_12.y()) << "," << name
       << "_corner\n";
    os << csv_num(region.corner_21.x()) << "," << csv_num(region.corner_21.y()) << "," << name
       << "_corner\n";
    for (const auto& p : region.hull)
        os << csv_num(p.x()) << "," << csv_num(p.y()) << "," << name << "_hull\n";
    return os.str();
}

}  // namespace umcp
