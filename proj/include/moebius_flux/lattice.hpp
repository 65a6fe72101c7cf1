/**
 * Discretized strip [0, l) x [-w, w] with annulus or Moebius gluing.
 *
 * Sites are (i, j) with i in [0, nx) running around the ring and j in
 * [0, ny) running across it. Crossing the seam from column nx-1 to column 0
 * keeps the row on an annulus and maps j -> ny-1-j on a Moebius band. Rows
 * j = 0 and j = ny-1 are Dirichlet walls: there is no site beyond them.
 */
#pragma once

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mflux {

enum class StripTopology { annulus, moebius };

enum class Direction { plus_x, minus_x, plus_y, minus_y };

inline constexpr Direction all_directions[] = {Direction::plus_x, Direction::minus_x,
                                               Direction::plus_y, Direction::minus_y};

inline Direction reverse(Direction d) {
    switch (d) {
        case Direction::plus_x: return Direction::minus_x;
        case Direction::minus_x: return Direction::plus_x;
        case Direction::plus_y: return Direction::minus_y;
        case Direction::minus_y: return Direction::plus_y;
    }
    return d;
}

inline std::string to_string(StripTopology t) {
    return t == StripTopology::annulus ? "annulus" : "moebius";
}

inline StripTopology parse_topology(const std::string& s) {
    if (s == "annulus") return StripTopology::annulus;
    if (s == "moebius" || s == "mobius") return StripTopology::moebius;
    throw std::invalid_argument("unknown topology '" + s + "' (expected annulus or moebius)");
}

/// Raised for malformed lattice dimensions and loops.
class LatticeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct SiteIndex {
    int i = 0;
    int j = 0;
    auto operator<=>(const SiteIndex&) const = default;
};

struct LinkStep {
    SiteIndex site;
    Direction dir = Direction::plus_x;
    bool operator==(const LinkStep&) const = default;
};

/// Closed directed walk on a lattice. Validity is checked by validate_loop.
struct LoopPath {
    std::vector<LinkStep> steps;
    std::size_t size() const { return steps.size(); }
};

class StripLattice {
  public:
    StripLattice(int nx, int ny, StripTopology topology) : nx_(nx), ny_(ny), topology_(topology) {
        if (nx < 3 || ny < 1) {
            throw LatticeError("lattice dimensions too small: need nx >= 3 and ny >= 1, got nx=" +
                               std::to_string(nx) + ", ny=" + std::to_string(ny));
        }
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    StripTopology topology() const { return topology_; }
    int size() const { return nx_ * ny_; }

    bool has_center_row() const { return ny_ % 2 == 1; }

    int center_row() const {
        if (!has_center_row()) {
            throw LatticeError("lattice with even ny=" + std::to_string(ny_) + " has no center row");
        }
        return (ny_ - 1) / 2;
    }

    bool contains(SiteIndex s) const { return s.i >= 0 && s.i < nx_ && s.j >= 0 && s.j < ny_; }

    int index(SiteIndex s) const { return s.j * nx_ + s.i; }
    SiteIndex site(int idx) const { return {idx % nx_, idx / nx_}; }

    /// Row reached after crossing the seam from row j.
    int seam_row(int j) const { return flips_at_seam() ? ny_ - 1 - j : j; }

    std::optional<SiteIndex> neighbor(SiteIndex s, Direction d) const {
        switch (d) {
            case Direction::plus_x:
                if (s.i < nx_ - 1) return SiteIndex{s.i + 1, s.j};
                return SiteIndex{0, seam_row(s.j)};
            case Direction::minus_x:
                if (s.i > 0) return SiteIndex{s.i - 1, s.j};
                return SiteIndex{nx_ - 1, seam_row(s.j)};
            case Direction::plus_y:
                if (s.j < ny_ - 1) return SiteIndex{s.i, s.j + 1};
                return std::nullopt;
            case Direction::minus_y:
                if (s.j > 0) return SiteIndex{s.i, s.j - 1};
                return std::nullopt;
        }
        return std::nullopt;
    }

    /// Copy of this lattice whose Moebius seam does not flip rows.
    /// Mutation hook for exercising the verification suite; never used by
    /// the experiments.
    StripLattice with_broken_seam() const {
        StripLattice copy = *this;
        copy.seam_flip_ = false;
        return copy;
    }

    bool seam_intact() const { return seam_flip_; }

    bool operator==(const StripLattice&) const = default;

  private:
    bool flips_at_seam() const { return topology_ == StripTopology::moebius && seam_flip_; }

    int nx_;
    int ny_;
    StripTopology topology_;
    bool seam_flip_ = true;
};

inline StripLattice build_lattice(int nx, int ny, StripTopology topology) {
    return StripLattice(nx, ny, topology);
}

inline std::optional<SiteIndex> step_target(const StripLattice& lat, const LinkStep& step) {
    if (!lat.contains(step.site)) return std::nullopt;
    return lat.neighbor(step.site, step.dir);
}

/// Throws LatticeError unless the loop is a non-empty chain of existing
/// links that returns to its starting site.
inline void validate_loop(const StripLattice& lat, const LoopPath& loop) {
    if (loop.steps.empty()) throw LatticeError("loop is empty");
    for (std::size_t k = 0; k < loop.steps.size(); ++k) {
        const auto target = step_target(lat, loop.steps[k]);
        if (!target) {
            throw LatticeError("loop step " + std::to_string(k) + " leaves the lattice");
        }
        const SiteIndex next = loop.steps[(k + 1) % loop.steps.size()].site;
        if (*target != next) {
            throw LatticeError(k + 1 == loop.steps.size()
                                   ? "loop is not closed"
                                   : "loop step " + std::to_string(k) + " does not chain to step " +
                                         std::to_string(k + 1));
        }
    }
}

/// Walks +x from start `count` times.
inline LoopPath straight_x_walk(const StripLattice& lat, SiteIndex start, int count) {
    LoopPath loop;
    loop.steps.reserve(static_cast<std::size_t>(count));
    SiteIndex s = start;
    for (int k = 0; k < count; ++k) {
        loop.steps.push_back({s, Direction::plus_x});
        s = *lat.neighbor(s, Direction::plus_x);
    }
    return loop;
}

/// The curve C: nx steps of +x along the center row.
inline LoopPath center_loop(const StripLattice& lat) {
    const int c = lat.center_row();
    return straight_x_walk(lat, {0, c}, lat.nx());
}

/// The curve C' through row j. On a Moebius band it needs 2*nx steps and
/// visits row ny-1-j on the way; on an annulus it is an nx-step loop.
inline LoopPath offset_loop(const StripLattice& lat, int j) {
    if (j < 0 || j >= lat.ny()) throw LatticeError("row " + std::to_string(j) + " out of range");
    if (lat.topology() == StripTopology::annulus) return straight_x_walk(lat, {0, j}, lat.nx());
    if (lat.has_center_row() && j == lat.center_row()) {
        throw LatticeError("row " + std::to_string(j) + " is the center row; use center_loop");
    }
    LoopPath loop = straight_x_walk(lat, {0, j}, 2 * lat.nx());
    validate_loop(lat, loop);
    const SiteIndex halfway = loop.steps[static_cast<std::size_t>(lat.nx())].site;
    if (halfway != SiteIndex{0, lat.ny() - 1 - j}) {
        throw LatticeError("offset loop does not reach the mirrored row after one turn");
    }
    return loop;
}

/// Class in H1 = Z, [C] = 1: signed count of seam crossings.
inline int homology_class(const StripLattice& lat, const LoopPath& loop) {
    validate_loop(lat, loop);
    int crossings = 0;
    for (const auto& step : loop.steps) {
        if (step.dir == Direction::plus_x && step.site.i == lat.nx() - 1) ++crossings;
        if (step.dir == Direction::minus_x && step.site.i == 0) --crossings;
    }
    return crossings;
}

/// Direction d with neighbor(from, d) == to, if the two sites are adjacent.
inline std::optional<Direction> direction_between(const StripLattice& lat, SiteIndex from,
                                                  SiteIndex to) {
    for (Direction d : all_directions) {
        if (lat.neighbor(from, d) == to) return d;
    }
    return std::nullopt;
}

/// Rebuilds a loop from its vertex sequence (closing edge implied).
inline LoopPath loop_from_sites(const StripLattice& lat, const std::vector<SiteIndex>& sites) {
    LoopPath loop;
    loop.steps.reserve(sites.size());
    for (std::size_t k = 0; k < sites.size(); ++k) {
        const SiteIndex next = sites[(k + 1) % sites.size()];
        const auto d = direction_between(lat, sites[k], next);
        if (!d) throw LatticeError("consecutive loop vertices are not adjacent");
        loop.steps.push_back({sites[k], *d});
    }
    return loop;
}

/**
 * The Moebius band with its center row removed, presented as an annulus of
 * 2*nx columns and (ny-1)/2 rows.
 *
 * Annulus site (i, r) with i < nx is Moebius site (i, c+1+r), i.e. the rows
 * above the center; with i >= nx it is Moebius site (i-nx, c-1-r), the rows
 * below the center in flipped order. Row r = 0 of the annulus borders the
 * removed curve.
 */
struct CutLattice {
    StripLattice band;
    StripLattice annulus;
    std::vector<int> to_band;    // annulus index -> band index
    std::vector<int> from_band;  // band index -> annulus index, -1 on the center row

    SiteIndex band_site(SiteIndex annulus_site) const {
        return band.site(to_band[static_cast<std::size_t>(annulus.index(annulus_site))]);
    }

    std::optional<SiteIndex> annulus_site(SiteIndex band_site) const {
        const int a = from_band[static_cast<std::size_t>(band.index(band_site))];
        if (a < 0) return std::nullopt;
        return annulus.site(a);
    }

    /// Image of a band loop that avoids the center row.
    LoopPath lift(const LoopPath& loop) const {
        validate_loop(band, loop);
        std::vector<SiteIndex> sites;
        sites.reserve(loop.size());
        for (const auto& step : loop.steps) {
            const auto a = annulus_site(step.site);
            if (!a) throw LatticeError("loop touches the center row, which is cut away");
            sites.push_back(*a);
        }
        return loop_from_sites(annulus, sites);
    }

    /// Inverse of lift.
    LoopPath project(const LoopPath& loop) const {
        validate_loop(annulus, loop);
        std::vector<SiteIndex> sites;
        sites.reserve(loop.size());
        for (const auto& step : loop.steps) sites.push_back(band_site(step.site));
        return loop_from_sites(band, sites);
    }
};

inline CutLattice cut_complement_of_center(const StripLattice& lat) {
    if (lat.topology() != StripTopology::moebius) {
        throw LatticeError("cutting along the center curve requires a Moebius lattice");
    }
    if (!lat.has_center_row() || lat.ny() < 3) {
        throw LatticeError("cutting along the center curve requires odd ny >= 3");
    }
    const int nx = lat.nx();
    const int c = lat.center_row();
    CutLattice cut{lat, StripLattice(2 * nx, c, StripTopology::annulus), {}, {}};
    cut.to_band.resize(static_cast<std::size_t>(cut.annulus.size()));
    cut.from_band.assign(static_cast<std::size_t>(lat.size()), -1);
    for (int r = 0; r < c; ++r) {
        for (int i = 0; i < 2 * nx; ++i) {
            const SiteIndex image = i < nx ? SiteIndex{i, c + 1 + r} : SiteIndex{i - nx, c - 1 - r};
            const int a = cut.annulus.index({i, r});
            cut.to_band[static_cast<std::size_t>(a)] = lat.index(image);
            cut.from_band[static_cast<std::size_t>(lat.index(image))] = a;
        }
    }
    return cut;
}

}  // namespace mflux
