// Random closed loops with prescribed homology class, used by the property
// checks and the verification suite.
#pragma once

#include <algorithm>
#include <cstdlib>
#include <random>

#include "lattice.hpp"

namespace mflux {

inline LoopPath reversed(const StripLattice& lat, const LoopPath& loop) {
    std::vector<SiteIndex> sites;
    sites.reserve(loop.size());
    for (const auto& step : loop.steps) sites.push_back(step.site);
    std::reverse(sites.begin(), sites.end());
    return loop_from_sites(lat, sites);
}

namespace detail {

inline void walk_rows(const StripLattice& lat, std::vector<SiteIndex>& sites, int target_row) {
    SiteIndex s = sites.back();
    while (s.j != target_row) {
        s = *lat.neighbor(s, s.j < target_row ? Direction::plus_y : Direction::minus_y);
        sites.push_back(s);
    }
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace detail

/**
 * Random closed loop whose seam-crossing count is `winding`.
 *
 * Nonzero windings wander to a random row before every +x step and
 * occasionally detour around a face. Winding zero gives the boundary of a
 * random rectangle that stays clear of the seam.
 */
inline LoopPath random_loop(const StripLattice& lat, int winding, std::mt19937_64& rng) {
    using detail::uniform_int;
    std::vector<SiteIndex> sites;
    if (winding == 0) {
        const int width = uniform_int(rng, 1, lat.nx() - 1);
        const int i0 = uniform_int(rng, 0, lat.nx() - 1 - width);
        if (lat.ny() < 2) throw LatticeError("contractible loops need ny >= 2");
        const int height = uniform_int(rng, 1, lat.ny() - 1);
        const int j0 = uniform_int(rng, 0, lat.ny() - 1 - height);
        SiteIndex s{i0, j0};
        sites.push_back(s);
        const auto move = [&](Direction d, int count) {
            for (int k = 0; k < count; ++k) {
                s = *lat.neighbor(s, d);
                sites.push_back(s);
            }
        };
        move(Direction::plus_x, width);
        move(Direction::plus_y, height);
        move(Direction::minus_x, width);
        move(Direction::minus_y, height);
        sites.pop_back();
        return loop_from_sites(lat, sites);
    }

    const int turns = std::abs(winding);
    const SiteIndex start{0, uniform_int(rng, 0, lat.ny() - 1)};
    sites.push_back(start);
    std::bernoulli_distribution detour(0.25);
    for (int step = 0; step < turns * lat.nx(); ++step) {
        detail::walk_rows(lat, sites, uniform_int(rng, 0, lat.ny() - 1));
        const SiteIndex here = sites.back();
        const SiteIndex ahead = *lat.neighbor(here, Direction::plus_x);
        const auto up = lat.neighbor(here, Direction::plus_y);
        if (up && detour(rng)) {
            // around the face above the link: up, across, back down
            sites.push_back(*up);
            sites.push_back(*lat.neighbor(*up, Direction::plus_x));
        }
        sites.push_back(ahead);
    }
    detail::walk_rows(lat, sites, start.j);
    sites.pop_back();
    LoopPath loop = loop_from_sites(lat, sites);
    return winding > 0 ? loop : reversed(lat, loop);
}

/// Random loop on a Moebius band that never touches the center row. The
/// loop winds `cut_winding` times around the cut-open annulus, so its class
/// on the band is 2 * cut_winding.
inline LoopPath random_loop_avoiding_center(const CutLattice& cut, int cut_winding,
                                            std::mt19937_64& rng) {
    return cut.project(random_loop(cut.annulus, cut_winding, rng));
}

}  // namespace mflux
