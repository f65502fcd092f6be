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

/// Water-filling split of a total backhaul budget: c_k = max(l_k - alpha, 0)
/// with levels l_k = 1/2 log2(SINR_k) and alpha set so the budget is spent
/// exactly. alpha may be negative when the budget exceeds the nominal sum.
struct Allocation {
    Eigen::VectorXd c;
    double alpha = 0.0;
    double total = 0.0;
};

/// Core solver on raw effective-SINR values. Users with zero SINR never
/// receive backhaul; bisection on alpha (the residual budget function is
/// monotone), then an exact solve on the identified active set.
inline Allocation waterfill(const Eigen::VectorXd& sinr_bar, double c_total) {
    const int L = static_cast<int>(sinr_bar.size());
    if (L < 1) throw std::invalid_argument("waterfill: empty SINR vector");
    if (!(c_total >= 0.0)) throw std::invalid_argument("waterfill: budget must be >= 0");
    Eigen::VectorXd level(L);
    double level_max = -kInfinity, level_min = kInfinity;
    int finite_count = 0;
    for (int k = 0; k < L; ++k) {
        if (!(sinr_bar[k] >= 0.0)) throw std::invalid_argument("waterfill: SINR must be >= 0");
        level[k] = sinr_bar[k] > 0.0 ? 0.5 * std::log2(sinr_bar[k]) : -kInfinity;
        if (std::isfinite(level[k])) {
            ++finite_count;
            level_max = std::max(level_max, level[k]);
            level_min = std::min(level_min, level[k]);
        }
    }

    Allocation alloc;
    alloc.c = Eigen::VectorXd::Zero(L);
    if (c_total == 0.0) {
        alloc.alpha = level_max;  // -inf when every SINR is zero
        alloc.total = 0.0;
        return alloc;
    }
    if (finite_count == 0)
        throw std::invalid_argument("waterfill: positive budget but every SINR is zero");

    auto spent = [&](double alpha) {
        double acc = 0.0;
        for (int k = 0; k < L; ++k)
            if (std::isfinite(level[k])) acc += std::max(level[k] - alpha, 0.0);
        return acc;
    };

    double lo = level_min - c_total;  // spends at least c_total
    double hi = level_max;            // spends nothing
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi) + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (spent(mid) > c_total ? lo : hi) = mid;
    }

    // exact budget on the active set found by the bisection
    double alpha = 0.5 * (lo + hi);
    for (int pass = 0; pass < 2; ++pass) {
        double sum_active = 0.0;
        int n_active = 0;
        for (int k = 0; k < L; ++k)
            if (std::isfinite(level[k]) && level[k] > alpha) {
                sum_active += level[k];
                ++n_active;
            }
        if (n_active == 0) break;
        alpha = (sum_active - c_total) / n_active;
    }

    alloc.alpha = alpha;
    for (int k = 0; k < L; ++k)
        if (std::isfinite(level[k])) alloc.c[k] = std::max(level[k] - alpha, 0.0);
    alloc.total = alloc.c.sum();
    return alloc;
}

inline Allocation optimal_allocation(const NetworkInstance& net, const DecodingOrder& order,
                                     double c_total) {
    return waterfill(effective_sinr_by_user(net, order), c_total);
}

/// Exhaustive simplex-grid search maximizing the sum of backhaul-limited
/// rates at fixed effective SINRs; the independent check for the
/// water-filling solution. Guarded to L <= 4.
inline Allocation allocation_oracle_grid_sinr(const Eigen::VectorXd& sinr_bar, double c_total,
                                              double step) {
    const int L = static_cast<int>(sinr_bar.size());
    if (L < 1 || L > 4) throw std::invalid_argument("allocation_oracle_grid: L must be in 1..4");
    if (!(step > 0.0)) throw std::invalid_argument("allocation_oracle_grid: step must be > 0");
    const long n_total = std::lround(c_total / step);
    Allocation best;
    best.c = Eigen::VectorXd::Zero(L);
    double best_sum = -1.0;
    std::vector<long> counts(L, 0);
    // enumerate compositions of n_total into L parts
    auto evaluate = [&]() {
        double sum = 0.0;
        for (int k = 0; k < L; ++k) sum += backhaul_limited_rate(sinr_bar[k], counts[k] * step);
        if (sum > best_sum) {
            best_sum = sum;
            for (int k = 0; k < L; ++k) best.c[k] = counts[k] * step;
        }
    };
    auto recurse = [&](auto&& self, int k, long remaining) -> void {
        if (k == L - 1) {
            counts[k] = remaining;
            evaluate();
            return;
        }
        for (long n = 0; n <= remaining; ++n) {
            counts[k] = n;
            self(self, k + 1, remaining - n);
        }
    };
    recurse(recurse, 0, n_total);
    best.total = best.c.sum();
    best.alpha = std::numeric_limits<double>::quiet_NaN();  // grid points carry no water level
    return best;
}

inline Allocation allocation_oracle_grid(const NetworkInstance& net, const DecodingOrder& order,
                                         double c_total, double step) {
    return allocation_oracle_grid_sinr(effective_sinr_by_user(net, order), c_total, step);
}

/// Stationarity check of the allocation: with g_k = 2^-2ck S_k/(1+2^-2ck S_k)
/// every funded user must share one multiplier value and every unfunded
/// user must sit at or below it. Returns the largest violation.
inline double kkt_residual_sinr(const Eigen::VectorXd& sinr_bar, const Allocation& alloc) {
    const int L = static_cast<int>(sinr_bar.size());
    if (alloc.c.size() != L) throw std::invalid_argument("kkt_residual: size mismatch");
    auto g = [&](int k) {
        const double x = std::exp2(-2.0 * alloc.c[k]) * sinr_bar[k];
        return x / (1.0 + x);
    };
    double lambda = 0.0;
    bool have_interior = false;
    for (int k = 0; k < L; ++k)
        if (alloc.c[k] > 0.0) {
            lambda = g(k);
            have_interior = true;
            break;
        }
    if (!have_interior) return 0.0;
    double residual = 0.0;
    for (int k = 0; k < L; ++k) {
        if (alloc.c[k] > 0.0)
            residual = std::max(residual, std::abs(g(k) - lambda));
        else
            residual = std::max(residual, std::max(0.0, g(k) - lambda));
    }
    return residual;
}

inline double kkt_residual(const NetworkInstance& net, const DecodingOrder& order,
                           const Allocation& alloc) {
    return kkt_residual_sinr(effective_sinr_by_user(net, order), alloc);
}

/// CSV: one `user,C_bits` row per user plus a trailing `alpha,<value>` record.
inline std::string allocation_csv(const Allocation& alloc) {
    std::ostringstream os;
    os << "user,C_bits\n";
    for (int k = 0; k < alloc.c.size(); ++k) os << (k + 1) << "," << csv_num(alloc.c[k]) << "\n";
    os << "alpha," << csv_num(alloc.alpha) << "\n";
    return os.str();
}

}  // namespace umcp
