/**
 * One-shot invariant suite behind `moebius_flux verify`.
 *
 * Every check runs on small fixed lattices with a fixed seed and reports
 * PASS or FAIL with the worst deviation it saw. Exceptions raised inside a
 * check count as a failure of that check.
 */
#pragma once

#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "gauge.hpp"
#include "loops.hpp"

namespace mflux {

struct VerifyOptions {
    std::uint64_t seed = 20130517;
    /// Mutation hook: run every Moebius check on a lattice whose seam does
    /// not flip rows. A sound suite must then fail.
    bool break_seam = false;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace verify_detail {

inline std::string sci(double x) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << x;
    return os.str();
}

inline CheckResult run_check(const std::string& name, const std::function<CheckResult()>& body) {
    try {
        CheckResult r = body();
        r.name = name;
        return r;
    } catch (const std::exception& e) {
        return {name, false, std::string("exception: ") + e.what()};
    }
}

inline CheckResult bound(double worst, double tol, const std::string& what) {
    return {"", worst <= tol, what + " max deviation " + sci(worst) + " (tol " + sci(tol) + ")"};
}

}  // namespace verify_detail

inline std::vector<CheckResult> run_verification(const VerifyOptions& opts = {}) {
    using verify_detail::bound;
    using verify_detail::run_check;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> flux(-2.0, 2.0);
    const auto band = [&](int nx, int ny) {
        StripLattice lat = build_lattice(nx, ny, StripTopology::moebius);
        return opts.break_seam ? lat.with_broken_seam() : lat;
    };
    const StripLattice mob = band(6, 5);
    const StripLattice ann = build_lattice(6, 5, StripTopology::annulus);
    const HoppingParams hop;
    std::vector<CheckResult> out;

    out.push_back(run_check("flatness", [&] {
        double worst = 0.0;
        for (const StripLattice& lat : {mob, ann}) {
            for (int t = 0; t < 10; ++t) {
                const GaugeField field =
                    apply_gauge_transform(uniform_flux_field(lat, flux(rng)), random_gauge_transform(lat, rng));
                for (FaceRef face : all_faces(lat)) worst = std::max(worst, std::abs(face_curvature(field, face)));
            }
        }
        return bound(worst, 1e-12, "face curvature");
    }));

    out.push_back(run_check("gauge invariance", [&] {
        double holonomy = 0.0;
        double spectrum = 0.0;
        for (int t = 0; t < 10; ++t) {
            const GaugeField field = uniform_flux_field(mob, flux(rng));
            const GaugeField moved = apply_gauge_transform(field, random_gauge_transform(mob, rng));
            const LoopPath loop = random_loop(mob, t % 3, rng);
            holonomy = std::max(holonomy, angle_distance(wilson_loop(field, loop).angle, wilson_loop(moved, loop).angle));
            const auto pot = PotentialField::zero(mob);
            spectrum = std::max(spectrum, max_deviation(dense_eigenvalues(assemble(mob, field, hop, pot)),
                                                        dense_eigenvalues(assemble(mob, moved, hop, pot))));
        }
        return CheckResult{"", holonomy <= 1e-12 && spectrum <= 1e-10,
                           "holonomy " + verify_detail::sci(holonomy) + " (tol 1e-12), spectrum " +
                               verify_detail::sci(spectrum) + " (tol 1e-10)"};
    }));

    out.push_back(run_check("homology invariance", [&] {
        // pi_1 doubling: one turn lands on the mirrored row
        for (int j = 0; j < mob.ny(); ++j) {
            SiteIndex s{0, j};
            for (int k = 0; k < mob.nx(); ++k) s = *mob.neighbor(s, Direction::plus_x);
            if (s != SiteIndex{0, mob.ny() - 1 - j}) return CheckResult{"", false, "one turn does not mirror row " + std::to_string(j)};
        }
        const int c_class = homology_class(mob, center_loop(mob));
        const int o_class = homology_class(mob, offset_loop(mob, 0));
        const int f_class = homology_class(mob, face_boundary(mob, FaceRef{{2, 1}}));
        if (c_class != 1 || o_class != 2 || f_class != 0) {
            return CheckResult{"", false, "classes C=" + std::to_string(c_class) + " C'=" + std::to_string(o_class) +
                                              " face=" + std::to_string(f_class)};
        }
        const CutLattice cut = cut_complement_of_center(mob);
        double worst = 0.0;
        for (int t = 0; t < 10; ++t) {
            const GaugeField field =
                apply_gauge_transform(uniform_flux_field(mob, flux(rng)), random_gauge_transform(mob, rng));
            const int w = t % 3;
            const LoopPath a = random_loop(mob, w, rng);
            const LoopPath b = random_loop(mob, w, rng);
            const LoopPath p = random_loop_avoiding_center(cut, 1, rng);
            const LoopPath q = random_loop_avoiding_center(cut, 1, rng);
            worst = std::max(worst, angle_distance(wilson_loop(field, a).angle, wilson_loop(field, b).angle));
            worst = std::max(worst, angle_distance(wilson_loop(field, p).angle, wilson_loop(field, q).angle));
            worst = std::max(worst, angle_distance(wilson_loop(field, p).angle,
                                                   2.0 * wilson_loop(field, center_loop(mob)).angle));
        }
        return bound(worst, 1e-12, "homologous holonomy");
    }));

    out.push_back(run_check("periodicity", [&] {
        double worst = 0.0;
        for (const StripLattice& lat : {mob, ann}) {
            for (double f : {0.0, 0.17, 0.5, 0.83}) {
                const auto base = full_spectrum(lat, f, hop);
                worst = std::max(worst, max_deviation(base, full_spectrum(lat, f + 1.0, hop)));
                worst = std::max(worst, max_deviation(base, full_spectrum(lat, -f, hop)));
            }
        }
        return bound(worst, 1e-10, "E(f) vs E(f+1), E(-f)");
    }));

    out.push_back(run_check("sector completeness", [&] {
        double worst = 0.0;
        for (double f : {0.0, 0.3, 0.5}) {
            auto merged = sector_spectrum(mob, f, hop, Parity::even);
            const auto odd = sector_spectrum(mob, f, hop, Parity::odd);
            merged.insert(merged.end(), odd.begin(), odd.end());
            std::sort(merged.begin(), merged.end());
            worst = std::max(worst, max_deviation(merged, full_spectrum(mob, f, hop)));
        }
        return bound(worst, 1e-10, "even+odd vs full");
    }));

    out.push_back(run_check("annulus equivalence", [&] {
        return bound(annulus_equivalence_check(mob, flux_grid(0.0, 1.0, 11)), 1e-10, "odd sector vs annulus(f+1/2)");
    }));

    out.push_back(run_check("ladder periodicity", [&] {
        const LadderReport rep = ladder_periodicity_test(band(12, 2), flux_grid(0.0, 1.0, 11));
        return CheckResult{"", rep.decoupled_half_shift <= 1e-10 && rep.coupled_half_shift > 1e-2,
                           "ty=0 half-shift deviation " + verify_detail::sci(rep.decoupled_half_shift) +
                               ", ty=1 half-shift deviation " + verify_detail::sci(rep.coupled_half_shift)};
    }));

    out.push_back(run_check("stokes defect", [&] {
        const CutLattice cut = cut_complement_of_center(mob);
        double worst = 0.0;
        for (int t = 0; t < 10; ++t) {
            GaugeField field = uniform_flux_field(mob, flux(rng));
            if (t % 2 == 1) field = add_face_flux(field, FaceRef{{t % mob.nx(), 3}}, 0.3);
            const int w = t % 4 == 3 ? 0 : 1;
            const LoopPath a = random_loop_avoiding_center(cut, w, rng);
            const LoopPath b = random_loop_avoiding_center(cut, w, rng);
            worst = std::max(worst, std::abs(stokes_defect(field, a, b, mob)));
            const LoopPath c = random_loop(ann, w, rng);
            const LoopPath d = random_loop(ann, w, rng);
            GaugeField af = uniform_flux_field(ann, flux(rng));
            if (t % 2 == 1) af = add_face_flux(af, FaceRef{{t % ann.nx(), 1}}, 0.3);
            worst = std::max(worst, std::abs(stokes_defect(af, c, d, ann)));
        }
        return bound(worst, 1e-12, "Stokes defect");
    }));

    out.push_back(run_check("solver cross-validation", [&] {
        const StripLattice big = band(48, 9);
        const SparseHermitian h = assemble(big, uniform_flux_field(big, 0.25), hop, PotentialField::zero(big));
        SolverConfig cfg;
        cfg.k = 6;
        cfg.seed = opts.seed;
        const auto lz = lanczos_lowest(h, cfg);
        auto dense = dense_eigenvalues(h);
        dense.resize(6);
        const double solver_dev = max_deviation(lz.values, dense);
        double ring_dev = 0.0;
        for (int nx : {3, 4, 8, 16}) {
            const StripLattice ring = build_lattice(nx, 1, StripTopology::annulus);
            for (double f : {0.0, 0.25, 0.5}) {
                ring_dev = std::max(ring_dev, max_deviation(full_spectrum(ring, f, {1.0, 0.0}), ring_spectrum_oracle(nx, f)));
            }
        }
        return CheckResult{"", solver_dev <= 1e-8 && ring_dev <= 1e-10,
                           "lanczos vs dense " + verify_detail::sci(solver_dev) + ", ring oracle " +
                               verify_detail::sci(ring_dev)};
    }));

    return out;
}

}  // namespace mflux
