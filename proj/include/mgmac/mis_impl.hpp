#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <vector>

namespace mgmac {

namespace detail {

inline int mis_rec(std::uint64_t cand, const std::vector<std::uint64_t>& nbr, int best_so_far,
                   int depth_count) {
    if (cand == 0) return 0;
    if (depth_count + std::popcount(cand) <= best_so_far) return 0;   // cannot improve
    // Vertices of degree ≤ 1 within cand are always safe to take.
    int pick = -1;
    int pick_deg = -1;
    for (std::uint64_t m = cand; m != 0; m &= m - 1) {
        const int v = std::countr_zero(m);
        const int deg = std::popcount(nbr[v] & cand);
        if (deg <= 1) {
            return 1 + mis_rec(cand & ~((std::uint64_t{1} << v) | nbr[v]), nbr, best_so_far,
                               depth_count + 1);
        }
        if (deg > pick_deg) {
            pick = v;
            pick_deg = deg;
        }
    }
    const std::uint64_t bit = std::uint64_t{1} << pick;
    const int with = 1 + mis_rec(cand & ~(bit | nbr[pick]), nbr, best_so_far, depth_count + 1);
    const int floor = std::max(best_so_far, depth_count + with);
    const int without = mis_rec(cand & ~bit, nbr, floor, depth_count);
    return std::max(with, without);
}

}  // namespace detail

template <typename Adj>
int max_independent_set(const std::vector<int>& verts, Adj&& adjacent) {
    const int n = static_cast<int>(verts.size());
    if (n == 0) return 0;
    std::vector<std::uint64_t> nbr(n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (adjacent(verts[i], verts[j])) {
                nbr[i] |= std::uint64_t{1} << j;
                nbr[j] |= std::uint64_t{1} << i;
            }
    const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
    return detail::mis_rec(all, nbr, 0, 0);
}

template <typename Adj>
int mis_matching_bound(const std::vector<int>& verts, Adj&& adjacent) {
    const int n = static_cast<int>(verts.size());
    std::vector<bool> matched(n, false);
    int pairs = 0;
    for (int i = 0; i < n; ++i) {
        if (matched[i]) continue;
        for (int j = i + 1; j < n; ++j) {
            if (!matched[j] && adjacent(verts[i], verts[j])) {
                matched[i] = matched[j] = true;
                ++pairs;
                break;
            }
        }
    }
    return n - pairs;
}

}  // namespace mgmac
