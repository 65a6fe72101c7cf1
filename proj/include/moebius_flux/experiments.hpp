/**
 * Flux sweeps and the derived checks built on them.
 *
 * A sweep evaluates the ground energies of the full operator and of the two
 * reflection-parity sectors on an even grid of flux values f = Phi / Phi_0.
 * The even sector carries states that are nonzero on the center curve and
 * sees integer quantization; the odd sector carries the nodal states, which
 * vanish on the center curve and see half-integer quantization.
 */
#pragma once

#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "eigensolver.hpp"
#include "gauge.hpp"
#include "hamiltonian.hpp"
#include "lattice.hpp"

namespace mflux {

class ExperimentError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct SectorSet {
    bool full = true;
    bool even = true;
    bool odd = true;

    bool any_parity() const { return even || odd; }
};

struct SweepConfig {
    int nx = 48;
    int ny = 9;
    StripTopology topology = StripTopology::moebius;
    HoppingParams hop;
    double f_min = -0.25;
    double f_max = 1.25;
    int f_steps = 151;
    int k = 6;
    SolverConfig solver;
    SectorSet sectors;
    /// Applied to the uniform field at every grid point before assembly.
    std::optional<GaugeTransform> gauge;
    int threads = 1;

    StripLattice lattice() const { return build_lattice(nx, ny, topology); }

    void validate() const {
        const StripLattice lat = lattice();
        hop.validate();
        if (!(f_min < f_max)) throw ExperimentError("sweep needs f_min < f_max");
        if (f_steps < 2) throw ExperimentError("sweep needs at least 2 flux steps");
        if (k < 1) throw ExperimentError("k must be positive");
        if (!sectors.full && !sectors.any_parity()) throw ExperimentError("no sector requested");
        if (sectors.any_parity() && !lat.has_center_row()) {
            throw ExperimentError("parity sectors need odd ny");
        }
        if (gauge && gauge->chi.size() != static_cast<std::size_t>(lat.size())) {
            throw ExperimentError("gauge transform size does not match the lattice");
        }
    }
};

struct SweepRecord {
    double f = 0.0;
    std::optional<double> e0_full;
    std::optional<double> e0_even;
    std::optional<double> e0_odd;
    std::optional<double> gap;
    std::optional<double> node_amp;
    std::optional<double> current;
    bool ok = true;
    std::string error;
};

enum class EnergyColumn { full, even, odd };
enum class QuantizationMode { integer, half_integer };

struct QuantizationReport {
    std::vector<double> minima_f;
    std::vector<double> nearest_allowed;
    std::vector<double> distance;
};

/// Grid point i of n evenly spaced values in [lo, hi]; endpoints and
/// midpoints land on exact binary values where the arithmetic allows.
inline double grid_point(double lo, double hi, int i, int n) {
    return ((n - 1 - i) * lo + i * hi) / (n - 1);
}

inline std::vector<double> flux_grid(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(grid_point(lo, hi, i, n));
    return out;
}

/// max |psi| over the center row.
inline double nodal_amplitude(const Eigen::VectorXcd& state, const StripLattice& lat) {
    const int c = lat.center_row();
    if (state.size() != lat.size()) throw ExperimentError("state dimension does not match the lattice");
    double amp = 0.0;
    for (int i = 0; i < lat.nx(); ++i) amp = std::max(amp, std::abs(state[lat.index({i, c})]));
    return amp;
}

/// Sorted spectrum of the uniform-flux operator (dense).
inline std::vector<double> full_spectrum(const StripLattice& lat, double f, const HoppingParams& hop) {
    return dense_eigenvalues(assemble(lat, uniform_flux_field(lat, f), hop, PotentialField::zero(lat)));
}

inline std::vector<double> sector_spectrum(const StripLattice& lat, double f, const HoppingParams& hop,
                                           Parity parity) {
    const SparseHermitian h = assemble(lat, uniform_flux_field(lat, f), hop, PotentialField::zero(lat));
    return dense_eigenvalues(restrict(h, sector_isometry(lat, parity)));
}

/// max_i |a_i - b_i| for equal-length sorted spectra; infinity on length mismatch.
inline double max_deviation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

namespace detail {

inline std::vector<double> lowest_values(const SparseHermitian& h, const SolverConfig& solver, int count) {
    count = std::min(count, h.dim());
    const bool dense = solver.method == SolverMethod::dense ||
                       (solver.method == SolverMethod::automatic && h.dim() <= dense_auto_limit);
    if (dense) {
        std::vector<double> all = dense_eigenvalues(h);
        all.resize(static_cast<std::size_t>(count));
        return all;
    }
    SolverConfig cfg = solver;
    cfg.k = count;
    return lanczos_lowest(h, cfg).values;
}

inline SweepRecord sweep_point(const SweepConfig& cfg, const StripLattice& lat, double f) {
    SweepRecord rec;
    rec.f = f;
    try {
        GaugeField field = uniform_flux_field(lat, f);
        if (cfg.gauge) field = apply_gauge_transform(field, *cfg.gauge);
        const SparseHermitian h = assemble(lat, field, cfg.hop, PotentialField::zero(lat));
        if (cfg.sectors.full) {
            SolverConfig solver = cfg.solver;
            solver.k = std::min(std::max(cfg.k, 2), h.dim());
            const EigenResult res = solve_lowest(h, solver);
            rec.e0_full = res.values[0];
            if (res.size() > 1) rec.gap = res.values[1] - res.values[0];
            if (lat.has_center_row()) rec.node_amp = nodal_amplitude(res.vectors.col(0), lat);
        }
        if (cfg.sectors.even) {
            rec.e0_even = lowest_values(restrict(h, sector_isometry(lat, Parity::even)), cfg.solver, 1)[0];
        }
        if (cfg.sectors.odd) {
            const SectorIsometry iso = sector_isometry(lat, Parity::odd);
            if (iso.dim() > 0) rec.e0_odd = lowest_values(restrict(h, iso), cfg.solver, 1)[0];
        }
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    return rec;
}

}  // namespace detail

/// -dE0/df by central differences on e0_full; absent at the grid ends.
inline std::vector<std::optional<double>> persistent_current(const std::vector<SweepRecord>& records) {
    if (records.size() < 3) throw ExperimentError("persistent current needs at least 3 records");
    const double step = records[1].f - records[0].f;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const double d = records[i].f - records[i - 1].f;
        if (std::abs(d - step) > 1e-9 * std::max(1.0, std::abs(step))) {
            throw ExperimentError("persistent current needs a uniform flux grid");
        }
    }
    std::vector<std::optional<double>> current(records.size());
    for (std::size_t i = 1; i + 1 < records.size(); ++i) {
        const auto& lo = records[i - 1].e0_full;
        const auto& hi = records[i + 1].e0_full;
        if (lo && hi) current[i] = -(*hi - *lo) / (records[i + 1].f - records[i - 1].f);
    }
    return current;
}

/**
 * Runs the sweep. Grid points are independent and may be spread over
 * cfg.threads workers; records come back in grid order. A point whose
 * solve fails is returned with ok = false and the sweep carries on.
 */
inline std::vector<SweepRecord> flux_sweep(const SweepConfig& cfg) {
    cfg.validate();
    const StripLattice lat = cfg.lattice();
    std::vector<SweepRecord> records(static_cast<std::size_t>(cfg.f_steps));
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int i = next++; i < cfg.f_steps; i = next++) {
            records[static_cast<std::size_t>(i)] =
                detail::sweep_point(cfg, lat, grid_point(cfg.f_min, cfg.f_max, i, cfg.f_steps));
        }
    };
    const int threads = std::max(1, std::min(cfg.threads, cfg.f_steps));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (records.size() >= 3) {
        const auto current = persistent_current(records);
        for (std::size_t i = 0; i < records.size(); ++i) records[i].current = current[i];
    }
    return records;
}

inline std::optional<double> column_value(const SweepRecord& r, EnergyColumn column) {
    switch (column) {
        case EnergyColumn::full: return r.e0_full;
        case EnergyColumn::even: return r.e0_even;
        case EnergyColumn::odd: return r.e0_odd;
    }
    return std::nullopt;
}

/// Values closer than this count as one plateau when locating minima.
inline constexpr double plateau_tolerance = 1e-12;

/**
 * Strict interior local minima of one energy column.
 *
 * A single-point minimum is refined by the vertex of the parabola through
 * it and its two neighbors; a flat plateau (values within
 * plateau_tolerance) bounded by strictly larger values counts once, at its
 * midpoint.
 */
inline QuantizationReport detect_minima(const std::vector<SweepRecord>& records, EnergyColumn column,
                                        QuantizationMode mode) {
    if (records.size() < 3) throw ExperimentError("minimum detection needs at least 3 records");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> f;
    std::vector<double> e;
    for (const auto& r : records) {
        f.push_back(r.f);
        e.push_back(column_value(r, column).value_or(nan));
    }
    QuantizationReport report;
    const double unit = mode == QuantizationMode::integer ? 1.0 : 0.5;
    std::size_t i = 1;
    while (i + 1 < e.size()) {
        if (std::isnan(e[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < e.size() && !std::isnan(e[j + 1]) && std::abs(e[j + 1] - e[i]) <= plateau_tolerance) ++j;
        const bool bounded = j + 1 < e.size() && !std::isnan(e[i - 1]) && !std::isnan(e[j + 1]);
        if (bounded && e[i - 1] - e[i] > plateau_tolerance && e[j + 1] - e[j] > plateau_tolerance) {
            double fmin = 0.5 * (f[i] + f[j]);
            if (i == j) {
                const double x0 = f[i - 1], x1 = f[i], x2 = f[i + 1];
                const double y0 = e[i - 1], y1 = e[i], y2 = e[i + 1];
                const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
                const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
                if (den != 0.0) fmin = x1 - 0.5 * num / den;
            }
            const double nearest = std::round(fmin / unit) * unit;
            report.minima_f.push_back(fmin);
            report.nearest_allowed.push_back(nearest);
            report.distance.push_back(std::abs(fmin - nearest));
        }
        i = j + 1;
    }
    return report;
}

struct LadderReport {
    double decoupled_half_shift = 0.0;  // max |E(f) - E(f + 1/2)| with ty = 0
    double decoupled_unit_shift = 0.0;  // max |E(f) - E(f + 1)| with ty = 0
    double coupled_half_shift = 0.0;    // same with ty = 1
    double coupled_unit_shift = 0.0;
    double decoupled_period = std::numeric_limits<double>::quiet_NaN();
    double coupled_period = std::numeric_limits<double>::quiet_NaN();
};

/// Tolerance for calling two spectra equal in the periodicity experiments.
inline constexpr double spectrum_match_tolerance = 1e-10;

/**
 * Moebius ladder (ny = 2). Without rung hopping the two chains join into a
 * single ring that runs twice around the band, so the spectrum repeats
 * with period 1/2 in f; with rung hopping the period is 1.
 */
inline LadderReport ladder_periodicity_test(const StripLattice& lat, const std::vector<double>& f_grid) {
    if (lat.ny() != 2) throw ExperimentError("the ladder experiment needs ny = 2");
    LadderReport rep;
    const auto period = [](double half, double unit) {
        if (half <= spectrum_match_tolerance) return 0.5;
        if (unit <= spectrum_match_tolerance) return 1.0;
        return std::numeric_limits<double>::quiet_NaN();
    };
    for (double ty : {0.0, 1.0}) {
        const HoppingParams hop{1.0, ty};
        double half = 0.0;
        double unit = 0.0;
        for (double f : f_grid) {
            const auto base = full_spectrum(lat, f, hop);
            half = std::max(half, max_deviation(base, full_spectrum(lat, f + 0.5, hop)));
            unit = std::max(unit, max_deviation(base, full_spectrum(lat, f + 1.0, hop)));
        }
        if (ty == 0.0) {
            rep.decoupled_half_shift = half;
            rep.decoupled_unit_shift = unit;
            rep.decoupled_period = period(half, unit);
        } else {
            rep.coupled_half_shift = half;
            rep.coupled_unit_shift = unit;
            rep.coupled_period = period(half, unit);
        }
    }
    return rep;
}

inline LadderReport ladder_periodicity_test(int nx, const std::vector<double>& f_grid) {
    return ladder_periodicity_test(build_lattice(nx, 2, StripTopology::moebius), f_grid);
}

/// Same check on a caller-supplied band lattice (used with mutated seams).
inline double annulus_equivalence_check(const StripLattice& band, const std::vector<double>& f_grid,
                                        const HoppingParams& hop = {}) {
    const StripLattice half = build_lattice(band.nx(), (band.ny() - 1) / 2, StripTopology::annulus);
    double worst = 0.0;
    for (double f : f_grid) {
        worst = std::max(worst, max_deviation(sector_spectrum(band, f, hop, Parity::odd),
                                              full_spectrum(half, f + 0.5, hop)));
    }
    return worst;
}

/**
 * Largest deviation, over the grid, between the odd-sector spectrum of the
 * Moebius band (nx, ny) at flux f and the full spectrum of the annulus
 * (nx, (ny-1)/2) at flux f + 1/2.
 */
inline double annulus_equivalence_check(int nx, int ny, const std::vector<double>& f_grid,
                                        const HoppingParams& hop = {}) {
    if (ny < 3 || ny % 2 == 0) throw ExperimentError("annulus equivalence needs odd ny >= 3");
    return annulus_equivalence_check(build_lattice(nx, ny, StripTopology::moebius), f_grid, hop);
}

}  // namespace mflux
