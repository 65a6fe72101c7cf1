#include "catch.hpp"

#include "moebius_flux/experiments.hpp"

using namespace mflux;
using Catch::Matchers::WithinAbs;

namespace {

SweepConfig small_sweep(StripTopology topo, int nx, int ny, double lo, double hi, int steps) {
    SweepConfig cfg;
    cfg.nx = nx;
    cfg.ny = ny;
    cfg.topology = topo;
    cfg.f_min = lo;
    cfg.f_max = hi;
    cfg.f_steps = steps;
    cfg.sectors = {true, ny % 2 == 1, ny % 2 == 1};
    return cfg;
}

std::vector<SweepRecord> column_records(const std::vector<double>& f, const std::vector<double>& e) {
    std::vector<SweepRecord> out;
    for (std::size_t i = 0; i < f.size(); ++i) {
        SweepRecord r;
        r.f = f[i];
        r.e0_full = e[i];
        out.push_back(r);
    }
    return out;
}

}  // namespace

TEST_CASE("flux grid hits the quantized values exactly", "[experiments]") {
    const auto g = flux_grid(-0.25, 1.25, 151);
    CHECK(g.size() == 151);
    CHECK(g.front() == -0.25);
    CHECK(g.back() == 1.25);
    CHECK(g[25] == 0.0);
    CHECK(g[75] == 0.5);
    CHECK(g[125] == 1.0);
}

TEST_CASE("annulus sweep has integer-spaced minima", "[experiments]") {
    auto cfg = small_sweep(StripTopology::annulus, 24, 5, -0.25, 1.25, 51);
    cfg.sectors = {true, false, false};
    const auto records = flux_sweep(cfg);
    REQUIRE(records.size() == 51);
    for (const auto& r : records) {
        CHECK(r.ok);
        CHECK(r.e0_full);
        CHECK_FALSE(r.e0_even);
        CHECK_FALSE(r.e0_odd);
    }
    const auto rep = detect_minima(records, EnergyColumn::full, QuantizationMode::integer);
    REQUIRE(rep.minima_f.size() == 2);
    CHECK(rep.nearest_allowed == std::vector<double>{0.0, 1.0});
    for (double d : rep.distance) CHECK(d <= 0.005);
    // maximum of the band-bottom parabola sits at half a flux quantum
    const auto top = std::max_element(records.begin(), records.end(),
                                      [](const auto& a, const auto& b) { return *a.e0_full < *b.e0_full; });
    CHECK_THAT(top->f, WithinAbs(0.5, 0.015));
}

TEST_CASE("Moebius sectors quantize in whole and half units", "[experiments]") {
    const auto records = flux_sweep(small_sweep(StripTopology::moebius, 24, 5, -0.25, 1.25, 61));
    const auto even = detect_minima(records, EnergyColumn::even, QuantizationMode::integer);
    REQUIRE(even.minima_f.size() == 2);
    CHECK(even.nearest_allowed == std::vector<double>{0.0, 1.0});
    for (double d : even.distance) CHECK(d <= 0.005);
    const auto odd = detect_minima(records, EnergyColumn::odd, QuantizationMode::half_integer);
    REQUIRE(odd.minima_f.size() == 1);
    CHECK(odd.nearest_allowed[0] == 0.5);
    CHECK(odd.distance[0] <= 0.005);
    for (const auto& r : records) CHECK_THAT(*r.e0_full, WithinAbs(std::min(*r.e0_even, *r.e0_odd), 1e-10));
}

TEST_CASE("detect_minima on synthetic columns", "[experiments]") {
    const auto f = flux_grid(-1.0, 1.0, 21);
    std::vector<double> parabola;
    for (double x : f) parabola.push_back((x - 0.33) * (x - 0.33));
    const auto rep = detect_minima(column_records(f, parabola), EnergyColumn::full, QuantizationMode::integer);
    REQUIRE(rep.minima_f.size() == 1);
    CHECK_THAT(rep.minima_f[0], WithinAbs(0.33, 1e-12));
    CHECK(rep.nearest_allowed[0] == 0.0);
    CHECK_THAT(rep.distance[0], WithinAbs(0.33, 1e-12));

    const auto flat = detect_minima(column_records(f, std::vector<double>(21, 1.5)), EnergyColumn::full,
                                    QuantizationMode::integer);
    CHECK(flat.minima_f.empty());

    std::vector<double> plateau(21, 2.0);
    for (int i = 8; i <= 12; ++i) plateau[i] = 1.0;
    const auto pl = detect_minima(column_records(f, plateau), EnergyColumn::full, QuantizationMode::half_integer);
    REQUIRE(pl.minima_f.size() == 1);
    CHECK_THAT(pl.minima_f[0], WithinAbs(0.0, 1e-15));

    std::vector<double> edge;
    for (double x : f) edge.push_back(x);
    CHECK(detect_minima(column_records(f, edge), EnergyColumn::full, QuantizationMode::integer).minima_f.empty());

    CHECK(detect_minima(column_records(f, parabola), EnergyColumn::odd, QuantizationMode::integer).minima_f.empty());
    CHECK_THROWS_AS(detect_minima(column_records({0.0, 1.0}, {1.0, 2.0}), EnergyColumn::full,
                                  QuantizationMode::integer),
                    ExperimentError);
}

TEST_CASE("nodal amplitude of the full ground state", "[experiments]") {
    SECTION("odd ground state at half flux vanishes on the center row") {
        auto cfg = small_sweep(StripTopology::moebius, 12, 3, 0.0, 1.0, 5);
        cfg.hop = {1.0, 0.01};
        const auto records = flux_sweep(cfg);
        const auto& half = records[2];
        REQUIRE(half.f == 0.5);
        CHECK(*half.e0_odd < *half.e0_even);
        CHECK(*half.node_amp <= 1e-8);
        // at integer flux the even state wins and lives on the center row
        CHECK(*records[0].e0_even < *records[0].e0_odd);
        CHECK(*records[0].node_amp > 0.1);
    }
    SECTION("strongly coupled band keeps an even ground state at half flux") {
        const auto records = flux_sweep(small_sweep(StripTopology::moebius, 48, 9, 0.5, 1.0, 2));
        CHECK(*records[0].e0_even < *records[0].e0_odd);
        CHECK(*records[0].node_amp > 1e-2);
    }
    const auto lat = build_lattice(6, 5, StripTopology::moebius);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(lat.size());
    psi[lat.index({3, 2})] = cplx(0.0, -0.25);
    psi[lat.index({3, 1})] = 0.9;
    CHECK(nodal_amplitude(psi, lat) == 0.25);
    CHECK_THROWS_AS(nodal_amplitude(Eigen::VectorXcd::Zero(3), lat), ExperimentError);
}

TEST_CASE("nodal amplitude follows whichever sector owns the ground state", "[experiments][property]") {
    for (double ty : {0.01, 0.2, 1.0}) {
        auto cfg = small_sweep(StripTopology::moebius, 12, 3, -0.25, 1.25, 31);
        cfg.hop = {1.0, ty};
        int odd_wins = 0;
        for (const auto& r : flux_sweep(cfg)) {
            if (*r.e0_odd < *r.e0_even) {
                ++odd_wins;
                CHECK(*r.node_amp <= 1e-8);
            } else if (*r.e0_even < *r.e0_odd - 1e-6) {
                CHECK(*r.node_amp >= 1e-3);
            }
        }
        if (ty == 0.01) CHECK(odd_wins > 0);
    }
}

TEST_CASE("persistent current is odd in f and changes sign at quantized flux", "[experiments]") {
    const auto records = flux_sweep(small_sweep(StripTopology::annulus, 12, 3, -0.5, 0.5, 21));
    CHECK_FALSE(records.front().current);
    CHECK_FALSE(records.back().current);
    for (std::size_t i = 1; i + 1 < records.size(); ++i) {
        CHECK_THAT(*records[i].current, WithinAbs(-*records[records.size() - 1 - i].current, 1e-9));
    }
    CHECK_THAT(*records[10].current, WithinAbs(0.0, 1e-9));
    CHECK(*records[5].current > 0.0);
    CHECK(*records[15].current < 0.0);

    auto bumpy = records;
    bumpy[3].f += 0.01;
    CHECK_THROWS_AS(persistent_current(bumpy), ExperimentError);
}

TEST_CASE("gauge-transformed sweep reproduces the full ground energies", "[experiments]") {
    auto cfg = small_sweep(StripTopology::moebius, 10, 5, -0.25, 1.25, 13);
    cfg.sectors = {true, false, false};
    const auto plain = flux_sweep(cfg);
    std::mt19937_64 rng(3);
    cfg.gauge = random_gauge_transform(cfg.lattice(), rng);
    const auto moved = flux_sweep(cfg);
    for (std::size_t i = 0; i < plain.size(); ++i) {
        CHECK(moved[i].ok);
        CHECK_THAT(*moved[i].e0_full, WithinAbs(*plain[i].e0_full, 1e-10));
    }
}

TEST_CASE("a failing grid point is flagged and the sweep continues", "[experiments]") {
    auto cfg = small_sweep(StripTopology::moebius, 10, 5, 0.0, 1.0, 5);
    std::mt19937_64 rng(4);
    cfg.gauge = random_gauge_transform(cfg.lattice(), rng);
    const auto records = flux_sweep(cfg);
    REQUIRE(records.size() == 5);
    for (const auto& r : records) {
        CHECK_FALSE(r.ok);
        CHECK_THAT(r.error, Catch::Matchers::ContainsSubstring("couples even and odd"));
    }
}

TEST_CASE("threaded sweeps are bit-identical to serial ones", "[experiments]") {
    auto cfg = small_sweep(StripTopology::moebius, 16, 5, -0.25, 1.25, 31);
    const auto serial = flux_sweep(cfg);
    cfg.threads = 4;
    const auto threaded = flux_sweep(cfg);
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].f == threaded[i].f);
        CHECK(serial[i].e0_full == threaded[i].e0_full);
        CHECK(serial[i].e0_odd == threaded[i].e0_odd);
        CHECK(serial[i].current == threaded[i].current);
    }
}

TEST_CASE("sweep configuration is validated", "[experiments]") {
    auto cfg = small_sweep(StripTopology::moebius, 10, 5, 0.0, 1.0, 5);
    cfg.f_max = 0.0;
    CHECK_THROWS_AS(flux_sweep(cfg), ExperimentError);
    cfg = small_sweep(StripTopology::moebius, 10, 4, 0.0, 1.0, 5);
    cfg.sectors = {true, true, false};
    CHECK_THROWS_AS(flux_sweep(cfg), ExperimentError);
    cfg = small_sweep(StripTopology::moebius, 10, 5, 0.0, 1.0, 1);
    CHECK_THROWS_AS(flux_sweep(cfg), ExperimentError);
    cfg = small_sweep(StripTopology::moebius, 10, 5, 0.0, 1.0, 5);
    cfg.sectors = {false, false, false};
    CHECK_THROWS_AS(flux_sweep(cfg), ExperimentError);
    cfg.sectors = {true, true, true};
    cfg.gauge = GaugeTransform{{0.0}};
    CHECK_THROWS_AS(flux_sweep(cfg), ExperimentError);
}

TEST_CASE("Moebius ladder periodicity", "[experiments]") {
    const auto rep = ladder_periodicity_test(12, flux_grid(0.0, 1.0, 11));
    CHECK(rep.decoupled_half_shift <= 1e-10);
    CHECK(rep.decoupled_period == 0.5);
    CHECK(rep.coupled_half_shift > 0.01);
    CHECK(rep.coupled_unit_shift <= 1e-10);
    CHECK(rep.coupled_period == 1.0);
    CHECK_THROWS_AS(ladder_periodicity_test(build_lattice(12, 3, StripTopology::moebius), {0.0}), ExperimentError);

    // the annulus ladder never halves its period
    const auto ann = ladder_periodicity_test(build_lattice(12, 2, StripTopology::annulus), flux_grid(0.0, 1.0, 11));
    CHECK(ann.decoupled_half_shift > 0.01);
}

TEST_CASE("annulus equivalence of the odd sector", "[experiments]") {
    CHECK(annulus_equivalence_check(6, 5, flux_grid(0.0, 1.0, 11)) <= 1e-10);
    CHECK(annulus_equivalence_check(9, 7, flux_grid(0.0, 1.0, 5), {1.0, 0.3}) <= 1e-10);
    CHECK(annulus_equivalence_check(10, 3, flux_grid(0.0, 1.0, 11)) <= 1e-10);
    CHECK_THROWS_AS(annulus_equivalence_check(6, 4, {0.0}), ExperimentError);
    // without the seam flip the odd sector is an ordinary annulus at f, not f + 1/2
    const auto broken = build_lattice(6, 5, StripTopology::moebius).with_broken_seam();
    CHECK(annulus_equivalence_check(broken, flux_grid(0.0, 1.0, 11)) > 0.1);
}
