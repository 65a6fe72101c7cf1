/**
 * Vector potential as angles on directed links.
 *
 * A GaugeField stores one angle per +x link and one per +y link; traversing
 * a link backwards contributes the negated angle. The flux parameter f is
 * the flux through the ring in units of the superconducting flux quantum,
 * and the holonomy around the center curve is exp(+i 2 pi f).
 */
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "lattice.hpp"

namespace mflux {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduces an angle into (-pi, pi].
inline double reduce_angle(double a) {
    double r = std::remainder(a, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;
    return r;
}

/// |a - b| measured on the circle.
inline double angle_distance(double a, double b) { return std::abs(reduce_angle(a - b)); }

/**
 * Correctly rounded floating-point sum (Shewchuk's partials algorithm, as in
 * Python's math.fsum). Holonomies are sums of many link angles; exact
 * rounding makes a loop traversed twice sum to exactly twice the single
 * traversal.
 */
inline double exact_sum(std::span<const double> values) {
    std::vector<double> partials;
    for (double x : values) {
        std::size_t used = 0;
        for (double y : partials) {
            if (std::abs(x) < std::abs(y)) std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) partials[used++] = lo;
            x = hi;
        }
        partials.resize(used);
        partials.push_back(x);
    }
    if (partials.empty()) return 0.0;
    std::size_t n = partials.size() - 1;
    double hi = partials[n];
    double lo = 0.0;
    while (n > 0) {
        const double x = hi;
        const double y = partials[--n];
        hi = x + y;
        const double yr = hi - x;
        lo = y - yr;
        if (lo != 0.0) break;
    }
    // round-half-even correction when the remaining partials share lo's sign
    if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        if (y == x - hi) hi = x;
    }
    return hi;
}

class GaugeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Face whose lower-left corner is `corner`: bounded by the +x link at the
/// corner, the +x link one row up, and the two y links joining them.
struct FaceRef {
    SiteIndex corner;
};

inline bool is_face(const StripLattice& lat, FaceRef face) {
    return lat.contains(face.corner) && face.corner.j < lat.ny() - 1;
}

inline std::vector<FaceRef> all_faces(const StripLattice& lat) {
    std::vector<FaceRef> faces;
    for (int j = 0; j + 1 < lat.ny(); ++j)
        for (int i = 0; i < lat.nx(); ++i) faces.push_back({{i, j}});
    return faces;
}

/**
 * Counterclockwise boundary of a face in its own chart: +x along the bottom,
 * up the right side, -x along the top, down the left side. For faces in the
 * last column the right side lives across the seam, where the Moebius flip
 * turns "up" into -y.
 */
inline LoopPath face_boundary(const StripLattice& lat, FaceRef face) {
    if (!is_face(lat, face)) throw GaugeError("invalid face corner");
    const SiteIndex a = face.corner;
    const SiteIndex b = *lat.neighbor(a, Direction::plus_x);
    const SiteIndex d = *lat.neighbor(a, Direction::plus_y);
    const SiteIndex c = *lat.neighbor(d, Direction::plus_x);
    return loop_from_sites(lat, {a, b, c, d});
}

struct GaugeTransform {
    std::vector<double> chi;  // one angle per site, lattice index order
};

class GaugeField {
  public:
    GaugeField(StripLattice lat, std::vector<double> theta_x, std::vector<double> theta_y)
        : lat_(std::move(lat)), theta_x_(std::move(theta_x)), theta_y_(std::move(theta_y)) {
        if (theta_x_.size() != static_cast<std::size_t>(lat_.size()) ||
            theta_y_.size() != static_cast<std::size_t>(lat_.nx() * (lat_.ny() - 1))) {
            throw GaugeError("gauge field arrays do not match the lattice");
        }
        for (double a : theta_x_)
            if (!std::isfinite(a)) throw GaugeError("non-finite link angle");
        for (double a : theta_y_)
            if (!std::isfinite(a)) throw GaugeError("non-finite link angle");
    }

    static GaugeField zero(const StripLattice& lat) {
        return GaugeField(lat, std::vector<double>(static_cast<std::size_t>(lat.size()), 0.0),
                          std::vector<double>(static_cast<std::size_t>(lat.nx() * (lat.ny() - 1)), 0.0));
    }

    const StripLattice& lattice() const { return lat_; }

    /// Angle on the +x link leaving s.
    double x_angle(SiteIndex s) const { return theta_x_[static_cast<std::size_t>(lat_.index(s))]; }
    /// Angle on the +y link leaving s (requires s.j < ny-1).
    double y_angle(SiteIndex s) const { return theta_y_[static_cast<std::size_t>(lat_.index(s))]; }

    const std::vector<double>& theta_x() const { return theta_x_; }
    const std::vector<double>& theta_y() const { return theta_y_; }

    /// Angle picked up stepping from s in direction d.
    double link_angle(SiteIndex s, Direction d) const {
        const auto t = lat_.neighbor(s, d);
        if (!lat_.contains(s) || !t) throw GaugeError("no link in that direction");
        switch (d) {
            case Direction::plus_x: return x_angle(s);
            case Direction::minus_x: return -x_angle(*t);
            case Direction::plus_y: return y_angle(s);
            case Direction::minus_y: return -y_angle(*t);
        }
        return 0.0;
    }

  private:
    StripLattice lat_;
    std::vector<double> theta_x_;
    std::vector<double> theta_y_;
};

/// Flat field with holonomy exp(i 2 pi f) around the center curve, spread
/// evenly over every x link.
inline GaugeField uniform_flux_field(const StripLattice& lat, double f) {
    GaugeField zero = GaugeField::zero(lat);
    std::vector<double> tx(zero.theta_x().size(), two_pi * f / lat.nx());
    return GaugeField(lat, std::move(tx), zero.theta_y());
}

struct Holonomy {
    double angle = 0.0;             // raw sum of link angles, not reduced
    std::complex<double> value;     // exp(i angle)
};

inline Holonomy wilson_loop(const GaugeField& field, const LoopPath& loop) {
    validate_loop(field.lattice(), loop);
    std::vector<double> angles;
    angles.reserve(loop.size());
    for (const auto& step : loop.steps) angles.push_back(field.link_angle(step.site, step.dir));
    const double angle = exact_sum(angles);
    return {angle, std::polar(1.0, angle)};
}

/// Curvature of one face in its own chart, reduced into (-pi, pi].
inline double face_curvature(const GaugeField& field, FaceRef face) {
    return reduce_angle(wilson_loop(field, face_boundary(field.lattice(), face)).angle);
}

/**
 * Adds flux beta through a single face.
 *
 * The flux enters along the x links of the face's column from the wall row
 * j = 0 up to the face's bottom edge, so each face below it gains and loses
 * beta once and only the target face changes. A face on the wall row takes
 * the whole change on its bottom link.
 */
inline GaugeField add_face_flux(const GaugeField& field, FaceRef face, double beta) {
    const StripLattice& lat = field.lattice();
    if (!is_face(lat, face)) throw GaugeError("invalid face corner");
    std::vector<double> tx = field.theta_x();
    for (int j = 0; j <= face.corner.j; ++j) tx[static_cast<std::size_t>(lat.index({face.corner.i, j}))] += beta;
    return GaugeField(lat, std::move(tx), field.theta_y());
}

/// Link u -> v picks up chi(v) - chi(u).
inline GaugeField apply_gauge_transform(const GaugeField& field, const GaugeTransform& g) {
    const StripLattice& lat = field.lattice();
    if (g.chi.size() != static_cast<std::size_t>(lat.size())) {
        throw GaugeError("gauge transform size does not match the lattice");
    }
    std::vector<double> tx = field.theta_x();
    std::vector<double> ty = field.theta_y();
    for (int idx = 0; idx < lat.size(); ++idx) {
        const SiteIndex s = lat.site(idx);
        const double here = g.chi[static_cast<std::size_t>(idx)];
        tx[static_cast<std::size_t>(idx)] +=
            g.chi[static_cast<std::size_t>(lat.index(*lat.neighbor(s, Direction::plus_x)))] - here;
        if (const auto up = lat.neighbor(s, Direction::plus_y)) {
            ty[static_cast<std::size_t>(idx)] += g.chi[static_cast<std::size_t>(lat.index(*up))] - here;
        }
    }
    return GaugeField(lat, std::move(tx), std::move(ty));
}

inline GaugeTransform random_gauge_transform(const StripLattice& lat, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    GaugeTransform g;
    g.chi.resize(static_cast<std::size_t>(lat.size()));
    for (double& c : g.chi) c = angle(rng);
    return g;
}

/// chi(i, j) = 2 pi i / nx; shifts a uniform field from f to f + 1 away from
/// the seam column.
inline GaugeTransform winding_gauge_transform(const StripLattice& lat) {
    GaugeTransform g;
    g.chi.resize(static_cast<std::size_t>(lat.size()));
    for (int idx = 0; idx < lat.size(); ++idx) {
        g.chi[static_cast<std::size_t>(idx)] = two_pi * lat.site(idx).i / lat.nx();
    }
    return g;
}

/// Field on the cut-open annulus obtained by reading off the band's link
/// angles through the site bijection.
inline GaugeField pull_back(const GaugeField& field, const CutLattice& cut) {
    const StripLattice& ann = cut.annulus;
    GaugeField out = GaugeField::zero(ann);
    std::vector<double> tx = out.theta_x();
    std::vector<double> ty = out.theta_y();
    const auto band_angle = [&](SiteIndex from, SiteIndex to) {
        const SiteIndex u = cut.band_site(from);
        const SiteIndex v = cut.band_site(to);
        const auto d = direction_between(field.lattice(), u, v);
        if (!d) throw GaugeError("cut-open lattice is not adjacency preserving");
        return field.link_angle(u, *d);
    };
    for (int idx = 0; idx < ann.size(); ++idx) {
        const SiteIndex s = ann.site(idx);
        tx[static_cast<std::size_t>(idx)] = band_angle(s, *ann.neighbor(s, Direction::plus_x));
        if (const auto up = ann.neighbor(s, Direction::plus_y)) {
            ty[static_cast<std::size_t>(idx)] = band_angle(s, *up);
        }
    }
    return GaugeField(ann, std::move(tx), std::move(ty));
}

/**
 * Integer 2-chain on an annulus lattice whose boundary is loop1 - loop2,
 * one coefficient per face (all_faces order). Throws if the difference is
 * not a boundary.
 */
inline std::vector<int> bounding_chain(const StripLattice& ann, const LoopPath& loop1,
                                       const LoopPath& loop2) {
    const int nx = ann.nx();
    const int ny = ann.ny();
    std::vector<int> flow_x(static_cast<std::size_t>(ann.size()), 0);
    std::vector<int> flow_y(static_cast<std::size_t>(ann.size()), 0);
    const auto accumulate = [&](const LoopPath& loop, int sign) {
        for (const auto& step : loop.steps) {
            const SiteIndex t = *ann.neighbor(step.site, step.dir);
            switch (step.dir) {
                case Direction::plus_x: flow_x[static_cast<std::size_t>(ann.index(step.site))] += sign; break;
                case Direction::minus_x: flow_x[static_cast<std::size_t>(ann.index(t))] -= sign; break;
                case Direction::plus_y: flow_y[static_cast<std::size_t>(ann.index(step.site))] += sign; break;
                case Direction::minus_y: flow_y[static_cast<std::size_t>(ann.index(t))] -= sign; break;
            }
        }
    };
    accumulate(loop1, +1);
    accumulate(loop2, -1);

    // The bottom link of face (i, j) carries +coef(i, j) - coef(i, j-1).
    std::vector<int> coef(static_cast<std::size_t>(nx * (ny - 1)), 0);
    const auto at = [&](int i, int j) -> int& { return coef[static_cast<std::size_t>(j * nx + i)]; };
    for (int i = 0; i < nx; ++i) {
        int running = 0;
        for (int j = 0; j + 1 < ny; ++j) {
            running += flow_x[static_cast<std::size_t>(ann.index({i, j}))];
            at(i, j) = running;
        }
        if (flow_x[static_cast<std::size_t>(ann.index({i, ny - 1}))] != -running) {
            throw GaugeError("loops are not homologous on the cut-open lattice");
        }
    }
    // The y link at column i is the right side of face i-1 and the left side of face i.
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int left = at((i + nx - 1) % nx, j);
            if (flow_y[static_cast<std::size_t>(ann.index({i, j}))] != left - at(i, j)) {
                throw GaugeError("loops are not homologous on the cut-open lattice");
            }
        }
    }
    return coef;
}

/**
 * W(loop1) - W(loop2) - (curvature enclosed between them), reduced into
 * (-pi, pi]. The computation happens on the orientable cut-open lattice
 * (the lattice itself for an annulus), where the region between two
 * homologous loops is an honest 2-chain. Zero for every field.
 */
inline double stokes_defect(const GaugeField& field, const LoopPath& loop1, const LoopPath& loop2,
                            const StripLattice& lat) {
    if (!(field.lattice() == lat)) throw GaugeError("field lives on a different lattice");
    if (homology_class(lat, loop1) != homology_class(lat, loop2)) {
        throw GaugeError("loops are not homologous");
    }
    const auto defect_on = [](const GaugeField& f, const LoopPath& l1, const LoopPath& l2) {
        const StripLattice& ann = f.lattice();
        const std::vector<int> chain = bounding_chain(ann, l1, l2);
        const std::vector<FaceRef> faces = all_faces(ann);
        std::vector<double> terms{wilson_loop(f, l1).angle, -wilson_loop(f, l2).angle};
        for (std::size_t k = 0; k < faces.size(); ++k) {
            if (chain[k] != 0) terms.push_back(-chain[k] * face_curvature(f, faces[k]));
        }
        return reduce_angle(exact_sum(terms));
    };
    if (lat.topology() == StripTopology::annulus) return defect_on(field, loop1, loop2);
    const CutLattice cut = cut_complement_of_center(lat);
    return defect_on(pull_back(field, cut), cut.lift(loop1), cut.lift(loop2));
}

}  // namespace mflux
