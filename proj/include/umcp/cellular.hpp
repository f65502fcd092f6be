#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "umcp/allocation.hpp"
#include "umcp/network.hpp"
#include "umcp/rates.hpp"
#include "umcp/rng.hpp"

namespace umcp {

enum class AllocMode { Uniform, Optimized };

inline const char* alloc_mode_name(AllocMode m) { return m == AllocMode::Uniform ? "uniform" : "optimized"; }

inline AllocMode parse_alloc_mode(const std::string& s) {
    if (s == "uniform") return AllocMode::Uniform;
    if (s == "optimized") return AllocMode::Optimized;
    throw std::invalid_argument("unknown allocation mode '" + s + "'");
}

/// Parabolic sector pattern: peak gain minus min(12 (theta/theta3dB)^2,
/// front-to-back), in dBi.
struct SectorAntenna {
    double peak_dbi = 15.0;
    double beamwidth_deg = 70.0;
    double front_back_db = 20.0;

    double gain_dbi(double offset_rad) const {
        const double deg = std::abs(offset_rad) * 180.0 / M_PI;
        return peak_dbi - std::min(12.0 * (deg / beamwidth_deg) * (deg / beamwidth_deg), front_back_db);
    }
};

struct SimConfig {
    int cells = 19;
    int sectors_per_cell = 3;
    int users_per_sector = 10;
    int tones = 64;
    int drops = 10;
    double bandwidth_hz = 1e7;
    double bs_distance_m = 600.0;
    double tx_psd_dbm_hz = -27.0;
    double noise_psd_dbm_hz = -169.0;
    double noise_figure_db = 7.0;
    double min_user_bs_distance_m = 35.0;
    SectorAntenna antenna;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::PerBsWz;
    double backhaul_per_bs_mbps = 180.0;
    AllocMode alloc = AllocMode::Uniform;

    int sectors() const { return cells * sectors_per_cell; }
    int users() const { return sectors() * users_per_sector; }
    double tone_bandwidth_hz() const { return bandwidth_hz / tones; }

    /// 128.1 + 37.6 log10(d) dB with d in kilometres.
    double pathloss_db(double distance_m) const {
        const double d_km = std::max(distance_m, min_user_bs_distance_m) / 1000.0;
        return 128.1 + 37.6 * std::log10(d_km);
    }

    double tone_noise_mw() const {
        return std::pow(10.0, (noise_psd_dbm_hz + noise_figure_db) / 10.0) * tone_bandwidth_hz();
    }

    double tone_tx_power_mw() const { return std::pow(10.0, tx_psd_dbm_hz / 10.0) * tone_bandwidth_hz(); }

    void validate() const {
        if (cells != 19) throw std::invalid_argument("sim: only the 19-cell wrap-around layout is supported");
        if (sectors_per_cell != 3) throw std::invalid_argument("sim: 3 sectors per cell required");
        if (users_per_sector < 1 || tones < 1 || drops < 1)
            throw std::invalid_argument("sim: counts must be positive");
        if (!(bandwidth_hz > 0.0) || !(bs_distance_m > 0.0))
            throw std::invalid_argument("sim: bandwidth and site distance must be positive");
        if (scheme != Scheme::Baseline && scheme != Scheme::PerBsWz && scheme != Scheme::PerBsNoWz)
            throw std::invalid_argument("sim: scheme must be baseline, wz or nowz");
        if (!(backhaul_per_bs_mbps >= 0.0)) throw std::invalid_argument("sim: negative backhaul");
    }
};

/// 19 hexagonal sites plus the 6 translations that tile the plane with the
/// cluster; distances are always taken over the 7 wrap-around images.
struct Topology {
    std::vector<Eigen::Vector2d> sites;          // 19 positions
    std::vector<Eigen::Vector2d> displacements;  // 7 wrap images incl. zero
    double site_distance = 0.0;

    /// Shortest displacement from site s to point p over the wrap images.
    Eigen::Vector2d min_image(int site, const Eigen::Vector2d& p) const {
        Eigen::Vector2d best = p - sites[site];
        double best2 = best.squaredNorm();
        for (const auto& w : displacements) {
            Eigen::Vector2d d = p - (sites[site] + w);
            if (d.squaredNorm() < best2) {
                best2 = d.squaredNorm();
                best = d;
            }
        }
        return best;
    }
};

inline Topology generate_topology(const SimConfig& cfg) {
    cfg.validate();
    Topology topo;
    topo.site_distance = cfg.bs_distance_m;
    const Eigen::Vector2d u(cfg.bs_distance_m, 0.0);
    const Eigen::Vector2d v(cfg.bs_distance_m / 2.0, cfg.bs_distance_m * std::sqrt(3.0) / 2.0);
    for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b)
            if (std::max({std::abs(a), std::abs(b), std::abs(a + b)}) <= 2)
                topo.sites.push_back(a * u + b * v);
    // cluster translations for a 19-site hexagon: |t| = sqrt(19) * site distance
    const Eigen::Vector2d t1 = 3 * u + 2 * v;
    const Eigen::Vector2d t2 = -2 * u + 5 * v;
    topo.displacements = {Eigen::Vector2d::Zero(), t1, -t1, t2, -t2, t1 - t2, t2 - t1};
    return topo;
}

/// User positions and their serving sector (site * 3 + sector index).
struct UserDrop {
    std::vector<Eigen::Vector2d> position;
    std::vector<int> sector;
};

namespace detail {

inline bool inside_hexagon(const Eigen::Vector2d& p, double site_distance) {
    for (int k = 0; k < 3; ++k) {
        const double ang = k * M_PI / 3.0;
        if (std::abs(p.x() * std::cos(ang) + p.y() * std::sin(ang)) > site_distance / 2.0 + 1e-9)
            return false;
    }
    return true;
}

}  // namespace detail

/// Uniform placement inside each sector's 120-degree wedge of the site's
/// hexagonal cell, at least the configured minimum distance from the site.
inline UserDrop drop_users(const SimConfig& cfg, const Topology& topo, std::uint64_t seed) {
    cfg.validate();
    UserDrop drop;
    drop.position.reserve(cfg.users());
    drop.sector.reserve(cfg.users());
    const double circumradius = cfg.bs_distance_m / std::sqrt(3.0);
    for (int site = 0; site < cfg.cells; ++site) {
        for (int sec = 0; sec < cfg.sectors_per_cell; ++sec) {
            const double boresight = sec * 2.0 * M_PI / 3.0;
            Rng rng(derive_seed(seed, {0x11, static_cast<std::uint64_t>(site * 3 + sec)}));
            for (int n = 0; n < cfg.users_per_sector; ++n) {
                Eigen::Vector2d local;
                for (;;) {
                    const double phi = boresight + rng.uniform(-M_PI / 3.0, M_PI / 3.0);
                    const double r = circumradius * std::sqrt(rng.uniform());
                    local = {r * std::cos(phi), r * std::sin(phi)};
                    if (r >= cfg.min_user_bs_distance_m && detail::inside_hexagon(local, cfg.bs_distance_m))
                        break;
                }
                drop.position.push_back(topo.sites[site] + local);
                drop.sector.push_back(site * 3 + sec);
            }
        }
    }
    return drop;
}

/// Per-tone amplitude gains |g| for every user-sector link. Tone responses
/// come from a four-tap delay line (tap delays 0/110/190/410 ns, powers
/// 0/-9.7/-19.2/-22.8 dB, ITU pedestrian profile) with independent Rayleigh
/// taps, scaled by distance pathloss and the sector antenna pattern.
struct ChannelRealization {
    int users = 0, sectors = 0, tones = 0;
    std::vector<double> amplitude;  // [(user * sectors + sector) * tones + tone]

    double gain(int user, int sector, int tone) const {
        return amplitude[(static_cast<std::size_t>(user) * sectors + sector) * tones + tone];
    }
};

namespace detail {

struct TapProfile {
    std::vector<int> sample;    // tap position in sampling periods
    std::vector<double> power;  // normalized to sum 1
};

inline TapProfile pedestrian_taps(double bandwidth_hz) {
    const double delays_ns[] = {0.0, 110.0, 190.0, 410.0};
    const double powers_db[] = {0.0, -9.7, -19.2, -22.8};
    TapProfile prof;
    double total = 0.0;
    for (double p : powers_db) total += std::pow(10.0, p / 10.0);
    for (int l = 0; l < 4; ++l) {
        prof.sample.push_back(static_cast<int>(std::lround(delays_ns[l] * 1e-9 * bandwidth_hz)));
        prof.power.push_back(std::pow(10.0, powers_db[l] / 10.0) / total);
    }
    return prof;
}

}  // namespace detail

/// Tone responses of a tapped delay line: g_t = sum_l c_l e^{-2 pi i t n_l / T}.
inline std::vector<std::complex<double>> tone_gains_from_taps(const std::vector<std::complex<double>>& taps,
                                                              const std::vector<int>& samples, int tones) {
    if (taps.size() != samples.size()) throw std::invalid_argument("tone_gains_from_taps: size mismatch");
    std::vector<std::complex<double>> g(tones);
    for (int t = 0; t < tones; ++t) {
        std::complex<double> acc = 0.0;
        for (std::size_t l = 0; l < taps.size(); ++l) {
            const double phase = -2.0 * M_PI * t * samples[l] / tones;
            acc += taps[l] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        g[t] = acc;
    }
    return g;
}

inline ChannelRealization draw_channels(const SimConfig& cfg, const Topology& topo, const UserDrop& drop,
                                        std::uint64_t seed) {
    cfg.validate();
    const int nu = cfg.users(), ns = cfg.sectors(), nt = cfg.tones;
    if (static_cast<int>(drop.position.size()) != nu) throw std::invalid_argument("draw_channels: bad drop");
    ChannelRealization ch;
    ch.users = nu;
    ch.sectors = ns;
    ch.tones = nt;
    ch.amplitude.resize(static_cast<std::size_t>(nu) * ns * nt);
    const detail::TapProfile prof = detail::pedestrian_taps(cfg.bandwidth_hz);
    for (int u = 0; u < nu; ++u) {
        for (int s = 0; s < ns; ++s) {
            const int site = s / 3;
            const double boresight = (s % 3) * 2.0 * M_PI / 3.0;
            const Eigen::Vector2d d = topo.min_image(site, drop.position[u]);
            const double dist = d.norm();
            double offset = std::atan2(d.y(), d.x()) - boresight;
            offset = std::remainder(offset, 2.0 * M_PI);
            const double gain_db = cfg.antenna.gain_dbi(offset) - cfg.pathloss_db(dist);
            const double link_gain = std::pow(10.0, gain_db / 10.0);
            Rng rng(derive_seed(seed, {0x22, static_cast<std::uint64_t>(u), static_cast<std::uint64_t>(s)}));
            std::vector<std::complex<double>> taps(prof.sample.size());
            for (std::size_t l = 0; l < taps.size(); ++l) {
                const double sigma = std::sqrt(link_gain * prof.power[l] / 2.0);
                taps[l] = {sigma * rng.normal(), sigma * rng.normal()};
            }
            const auto tones = tone_gains_from_taps(taps, prof.sample, nt);
            for (int t = 0; t < nt; ++t)
                ch.amplitude[(static_cast<std::size_t>(u) * ns + s) * nt + t] = std::abs(tones[t]);
        }
    }
    return ch;
}

/// Round-robin user pick per sector: tone t serves the sector's user
/// (t mod users_per_sector).
inline std::vector<int> round_robin_schedule(const SimConfig& cfg, const UserDrop& drop, int tone) {
    std::vector<std::vector<int>> by_sector(cfg.sectors());
    for (int u = 0; u < static_cast<int>(drop.sector.size()); ++u) by_sector[drop.sector[u]].push_back(u);
    std::vector<int> pick(cfg.sectors());
    for (int s = 0; s < cfg.sectors(); ++s) {
        if (static_cast<int>(by_sector[s].size()) != cfg.users_per_sector)
            throw std::invalid_argument("schedule: sector population mismatch");
        pick[s] = by_sector[s][tone % cfg.users_per_sector];
    }
    return pick;
}

/// One tone as a 57-user network: entry i is the user scheduled in sector
/// i, gains are tone amplitudes, powers and noise follow the per-tone PSD
/// budget, and the backhaul is the uniform per-tone share of the sector's
/// link in bits per real channel use (a tone is one complex symbol, i.e.
/// two real channel uses, per signalling interval).
inline NetworkInstance per_tone_network(const SimConfig& cfg, const ChannelRealization& ch, int tone,
                                        const std::vector<int>& schedule) {
    cfg.validate();
    const int ns = cfg.sectors();
    if (static_cast<int>(schedule.size()) != ns) throw std::invalid_argument("per_tone_network: bad schedule");
    std::vector<bool> seen(cfg.users(), false);
    std::vector<int> sector_of(cfg.users(), -1);
    NetworkInstance net;
    net.L = ns;
    net.gains.resize(ns, ns);
    net.powers = Eigen::VectorXd::Constant(ns, cfg.tone_tx_power_mw());
    net.noise = cfg.tone_noise_mw();
    const double sector_mbps = cfg.backhaul_per_bs_mbps / cfg.sectors_per_cell;
    const double bits_per_complex = (sector_mbps / cfg.tones) * 1e6 / cfg.tone_bandwidth_hz();
    net.backhaul = Eigen::VectorXd::Constant(ns, bits_per_complex / 2.0);
    for (int i = 0; i < ns; ++i) {
        const int u = schedule[i];
        if (u < 0 || u >= cfg.users() || seen[u])
            throw std::invalid_argument("per_tone_network: schedule must pick one distinct user per sector");
        seen[u] = true;
        for (int j = 0; j < ns; ++j) net.gains(i, j) = ch.gain(u, j, tone);
    }
    net.validate();
    return net;
}

/// Decode-strongest-first order on pre-SIC SINRs, ties by user slot.
inline DecodingOrder sinr_descending_order(const NetworkInstance& net) {
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
    return order;
}

struct SimResult {
    Scheme scheme = Scheme::PerBsWz;
    AllocMode alloc = AllocMode::Uniform;
    double backhaul_per_bs_mbps = 0.0;
    std::vector<double> user_rate_mbps;              // drops * users samples, drop-major
    std::vector<std::pair<double, double>> cdf;      // (rate, fraction <= rate)
    double percell_mean_mbps = 0.0;

    bool operator==(const SimResult& other) const = default;
};

/// Monte-Carlo campaign over independent user drops; every random stream
/// is derived from the master seed and the drop index, so schemes and
/// backhaul settings evaluated with the same seed share their randomness.
inline SimResult run_campaign(const SimConfig& cfg) {
    cfg.validate();
    const Topology topo = generate_topology(cfg);
    SimResult result;
    result.scheme = cfg.scheme;
    result.alloc = cfg.alloc;
    result.backhaul_per_bs_mbps = cfg.backhaul_per_bs_mbps;
    result.user_rate_mbps.reserve(static_cast<std::size_t>(cfg.drops) * cfg.users());
    const double mbps_per_real_bit = 2.0 * cfg.tone_bandwidth_hz() / 1e6;
    double percell_acc = 0.0;

    for (int drop_idx = 0; drop_idx < cfg.drops; ++drop_idx) {
        const std::uint64_t drop_seed = derive_seed(cfg.seed, {0xD807, static_cast<std::uint64_t>(drop_idx)});
        const UserDrop drop = drop_users(cfg, topo, derive_seed(drop_seed, {1}));
        const ChannelRealization ch = draw_channels(cfg, topo, drop, derive_seed(drop_seed, {2}));

        std::vector<NetworkInstance> nets(cfg.tones);
        std::vector<DecodingOrder> orders(cfg.tones);
        std::vector<std::vector<int>> schedules(cfg.tones);
        for (int t = 0; t < cfg.tones; ++t) {
            schedules[t] = round_robin_schedule(cfg, drop, t);
            nets[t] = per_tone_network(cfg, ch, t, schedules[t]);
            orders[t] = sinr_descending_order(nets[t]);
        }

        if (cfg.alloc == AllocMode::Optimized) {
            // water-fill each sector's total backhaul across its tones
            std::vector<Eigen::VectorXd> sinr(cfg.tones);
            for (int t = 0; t < cfg.tones; ++t) sinr[t] = effective_sinr_by_user(nets[t], orders[t]);
            const double sector_real_bits =
                (cfg.backhaul_per_bs_mbps / cfg.sectors_per_cell) * 1e6 / cfg.tone_bandwidth_hz() / 2.0;
            for (int s = 0; s < cfg.sectors(); ++s) {
                Eigen::VectorXd levels(cfg.tones);
                for (int t = 0; t < cfg.tones; ++t) levels[t] = sinr[t][s];
                const Allocation alloc = waterfill(levels, sector_real_bits);
                for (int t = 0; t < cfg.tones; ++t) nets[t].backhaul[s] = alloc.c[t];
            }
        }

        std::vector<double> user_mbps(cfg.users(), 0.0);
        for (int t = 0; t < cfg.tones; ++t) {
            const RateVector rv = scheme_rates(nets[t], orders[t], cfg.scheme);
            for (int s = 0; s < cfg.sectors(); ++s)
                user_mbps[schedules[t][s]] += rv.r[s] * mbps_per_real_bit;
        }
        double total = 0.0;
        for (double r : user_mbps) total += r;
        percell_acc += total / cfg.cells;
        result.user_rate_mbps.insert(result.user_rate_mbps.end(), user_mbps.begin(), user_mbps.end());
    }

    result.percell_mean_mbps = percell_acc / cfg.drops;
    std::vector<double> sorted = result.user_rate_mbps;
    std::sort(sorted.begin(), sorted.end());
    result.cdf.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        result.cdf.emplace_back(sorted[i], static_cast<double>(i + 1) / sorted.size());
    return result;
}

/// Uniform and water-filled campaigns at each backhaul point, all points
/// sharing the master seed (common random numbers).
inline std::vector<SimResult> sweep_backhaul(const SimConfig& cfg, const std::vector<double>& backhaul_mbps) {
    std::vector<SimResult> out;
    for (double b : backhaul_mbps) {
        for (AllocMode mode : {AllocMode::Uniform, AllocMode::Optimized}) {
            SimConfig point = cfg;
            point.backhaul_per_bs_mbps = b;
            point.alloc = mode;
            out.push_back(run_campaign(point));
        }
    }
    return out;
}

// ---- configuration file (flat key=value lines, # comments) ----

inline SimConfig parse_sim_config(const std::string& text) {
    SimConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r\n");
        line = line.substr(b, e - b + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config: expected key=value, got '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "drops") cfg.drops = std::stoi(val);
        else if (key == "tones") cfg.tones = std::stoi(val);
        else if (key == "users_per_sector") cfg.users_per_sector = std::stoi(val);
        else if (key == "bandwidth_hz") cfg.bandwidth_hz = std::stod(val);
        else if (key == "bs_distance_m") cfg.bs_distance_m = std::stod(val);
        else if (key == "tx_psd_dbm_hz") cfg.tx_psd_dbm_hz = std::stod(val);
        else if (key == "noise_psd_dbm_hz") cfg.noise_psd_dbm_hz = std::stod(val);
        else if (key == "noise_figure_db") cfg.noise_figure_db = std::stod(val);
        else if (key == "min_user_bs_distance_m") cfg.min_user_bs_distance_m = std::stod(val);
        else if (key == "antenna_gain_dbi") cfg.antenna.peak_dbi = std::stod(val);
        else if (key == "antenna_beamwidth_deg") cfg.antenna.beamwidth_deg = std::stod(val);
        else if (key == "antenna_front_back_db") cfg.antenna.front_back_db = std::stod(val);
        else if (key == "scheme") cfg.scheme = parse_scheme(val);
        else if (key == "alloc") cfg.alloc = parse_alloc_mode(val);
        else if (key == "backhaul_mbps") cfg.backhaul_per_bs_mbps = std::stod(val);
        else if (key == "cells") cfg.cells = std::stoi(val);
        else if (key == "sectors_per_cell") cfg.sectors_per_cell = std::stoi(val);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

/// Comma-separated backhaul list for sweeps; kept separate from SimConfig
/// so a single config file can drive both simulate and sweep runs.
inline std::vector<double> parse_backhaul_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    if (out.empty()) throw std::invalid_argument("backhaul list: empty");
    return out;
}

inline std::string cdf_csv(const std::vector<SimResult>& results) {
    std::ostringstream os;
    os << "rate_mbps,cdf,scheme,backhaul\n";
    for (const auto& r : results)
        for (const auto& [rate, frac] : r.cdf)
            os << csv_num(rate) << "," << csv_num(frac) << "," << scheme_name(r.scheme) << ","
               << csv_num(r.backhaul_per_bs_mbps) << "\n";
    return os.str();
}

inline std::string summary_csv(const std::vector<SimResult>& results, double baseline_percell_mbps) {
    std::ostringstream os;
    os << "scheme,backhaul,allocation,mean_percell_mbps,improvement_pct_vs_baseline\n";
    for (const auto& r : results) {
        os << scheme_name(r.scheme) << "," << csv_num(r.backhaul_per_bs_mbps) << ","
           << alloc_mode_name(r.alloc) << "," << csv_num(r.percell_mean_mbps) << ",";
        if (baseline_percell_mbps > 0.0)
            os << csv_num(100.0 * (r.percell_mean_mbps / baseline_percell_mbps - 1.0));
        else
            os << "nan";
        os << "\n";
    }
    return os.str();
}

}  // namespace umcp
