#include "catch.hpp"

#include "moebius_flux/eigensolver.hpp"
#include "moebius_flux/experiments.hpp"

using namespace mflux;

namespace {

SparseHermitian uniform(const StripLattice& lat, double f, HoppingParams hop = {}) {
    return assemble(lat, uniform_flux_field(lat, f), hop, PotentialField::zero(lat));
}

SparseHermitian from_dense(const Eigen::MatrixXcd& a) {
    SparseHermitian::Matrix m(a.rows(), a.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            if (a(r, c) != cplx(0.0, 0.0)) m.insert(r, c) = a(r, c);
    return SparseHermitian(std::move(m));
}

SparseHermitian random_hermitian(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd a(n, n);
    for (int r = 0; r < n; ++r) {
        a(r, r) = cplx(g(rng), 0.0);
        for (int c = r + 1; c < n; ++c) {
            a(r, c) = cplx(g(rng), g(rng));
            a(c, r) = std::conj(a(r, c));
        }
    }
    return from_dense(a);
}

double gram_defect(const Eigen::MatrixXcd& v) {
    const Eigen::MatrixXcd gram = v.adjoint() * v;
    return (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("dense_eigh on a 1x1 operator", "[eigensolver]") {
    Eigen::MatrixXcd a(1, 1);
    a(0, 0) = cplx(2.5, 0.0);
    const auto res = dense_eigh(from_dense(a));
    REQUIRE(res.size() == 1);
    CHECK(res.values[0] == 2.5);
    CHECK(std::abs(std::abs(res.vectors(0, 0)) - 1.0) <= 1e-15);
}

TEST_CASE("dense_eigh reproduces the ring and certifies its output", "[eigensolver]") {
    const auto h = uniform(build_lattice(4, 1, StripTopology::annulus), 0.0, {1.0, 0.0});
    const auto res = dense_eigh(h);
    CHECK(max_deviation(res.values, {0.0, 2.0, 2.0, 4.0}) <= 1e-12);
    CHECK(gram_defect(res.vectors) <= 1e-10);

    const auto big = uniform(build_lattice(48, 9, StripTopology::moebius), 0.37);
    const auto all = dense_eigh(big);
    CHECK(all.size() == 432);
    CHECK(std::is_sorted(all.values.begin(), all.values.end()));
    CHECK(gram_defect(all.vectors) <= 1e-10);
    for (double r : all.residuals) CHECK(r <= 1e-10 * residual_scale(big));
    CHECK(max_deviation(all.values, dense_eigenvalues(big)) <= 1e-12);

    const auto low = dense_lowest(big, 6);
    std::vector<double> first6(all.values.begin(), all.values.begin() + 6);
    CHECK(max_deviation(low.values, first6) <= 1e-12);
    CHECK(gram_defect(low.vectors) <= 1e-10);
}

TEST_CASE("dense_eigh on a random Hermitian matrix", "[eigensolver]") {
    const auto h = random_hermitian(50, 99);
    const auto res = dense_eigh(h);
    for (double r : residual_report(h, res)) CHECK(r <= 1e-10 * residual_scale(h));
    CHECK(gram_defect(res.vectors) <= 1e-10);
}

TEST_CASE("dense guard rails", "[eigensolver]") {
    const auto h = uniform(build_lattice(100, 41, StripTopology::annulus), 0.0);
    CHECK(h.dim() == 4100);
    CHECK_THROWS_AS(dense_eigh(h), SolverError);
    CHECK_THROWS_AS(dense_lowest(uniform(build_lattice(4, 1, StripTopology::annulus), 0.0), 5), SolverError);
}

TEST_CASE("lanczos with k = n matches the dense spectrum", "[eigensolver]") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto h = random_hermitian(30, seed);
        SolverConfig cfg;
        cfg.k = 30;
        cfg.seed = seed;
        const auto res = lanczos_lowest(h, cfg);
        CHECK(max_deviation(res.values, dense_eigenvalues(h)) <= 1e-8);
        CHECK(gram_defect(res.vectors) <= 1e-8);
    }
    const auto ring = uniform(build_lattice(8, 1, StripTopology::annulus), 0.0, {1.0, 0.0});
    SolverConfig cfg;
    cfg.k = 8;
    CHECK(max_deviation(lanczos_lowest(ring, cfg).values, ring_spectrum_oracle(8, 0.0)) <= 1e-8);
}

TEST_CASE("lanczos on the default Moebius band", "[eigensolver]") {
    const auto h = uniform(build_lattice(48, 9, StripTopology::moebius), 0.25);
    SolverConfig cfg;
    cfg.k = 6;
    const auto res = lanczos_lowest(h, cfg);
    auto dense = dense_eigenvalues(h);
    dense.resize(6);
    CHECK(max_deviation(res.values, dense) <= 1e-8);
    CHECK(gram_defect(res.vectors) <= 1e-8);
    for (double r : res.residuals) CHECK(r <= cfg.tol * residual_scale(h));
    const auto recomputed = residual_report(h, res);
    for (std::size_t i = 0; i < recomputed.size(); ++i) CHECK(recomputed[i] <= cfg.tol * residual_scale(h));

    SECTION("fixed seed gives bit-identical values") {
        const auto again = lanczos_lowest(h, cfg);
        CHECK(again.values == res.values);
    }
}

TEST_CASE("lanczos resolves degenerate pairs", "[eigensolver]") {
    const auto h = uniform(build_lattice(40, 1, StripTopology::annulus), 0.0, {1.0, 0.0});
    SolverConfig cfg;
    cfg.k = 7;
    auto oracle = ring_spectrum_oracle(40, 0.0);
    oracle.resize(7);
    CHECK(max_deviation(lanczos_lowest(h, cfg).values, oracle) <= 1e-8);
}

TEST_CASE("lanczos errors", "[eigensolver]") {
    const auto h = random_hermitian(20, 5);
    SolverConfig cfg;
    cfg.k = 21;
    CHECK_THROWS_AS(lanczos_lowest(h, cfg), SolverError);
    cfg.k = 3;
    cfg.tol = 0.0;
    CHECK_THROWS_AS(lanczos_lowest(h, cfg), SolverError);

    const auto big = uniform(build_lattice(48, 9, StripTopology::moebius), 0.25);
    cfg.tol = 1e-14;
    cfg.k = 6;
    cfg.max_iter = 5;
    try {
        lanczos_lowest(big, cfg);
        FAIL("expected NoConvergenceError");
    } catch (const NoConvergenceError& e) {
        CHECK(e.best_so_far().values.size() == e.best_so_far().residuals.size());
        CHECK(e.best_so_far().vectors.cols() == static_cast<Eigen::Index>(e.best_so_far().size()));
    }
}

TEST_CASE("solve_lowest dispatches on the method", "[eigensolver]") {
    const auto h = uniform(build_lattice(12, 5, StripTopology::moebius), 0.1);
    SolverConfig cfg;
    cfg.k = 4;
    cfg.method = SolverMethod::dense;
    const auto d = solve_lowest(h, cfg);
    cfg.method = SolverMethod::lanczos;
    const auto l = solve_lowest(h, cfg);
    cfg.method = SolverMethod::automatic;
    const auto a = solve_lowest(h, cfg);
    CHECK(max_deviation(d.values, l.values) <= 1e-8);
    CHECK(a.values == d.values);
    CHECK(parse_solver_method("auto") == SolverMethod::automatic);
    CHECK_THROWS_AS(parse_solver_method("qr"), std::invalid_argument);
}

TEST_CASE("residual_report measures eigenpair quality", "[eigensolver]") {
    const auto h = uniform(build_lattice(6, 5, StripTopology::moebius), 0.3);
    auto res = dense_eigh(h);
    for (double r : residual_report(h, res)) CHECK(r <= 1e-12);

    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    Eigen::VectorXcd w(h.dim());
    for (auto& x : w) x = cplx(g(rng), g(rng));
    w.normalize();
    const Eigen::VectorXcd v = res.vectors.col(0);
    const Eigen::VectorXcd v_pert = v + 1e-3 * w;
    const double r = (h.apply(v_pert) - res.values[0] * v_pert).norm();
    EigenResult pert;
    pert.values = {res.values[0]};
    pert.vectors = v_pert;
    CHECK(residual_report(h, pert)[0] == r);
    // first order: between a small fraction of and at most 1e-3 * ||H - lambda||
    CHECK(r <= 1e-3 * (h.norm_bound() + std::abs(res.values[0])));
    CHECK(r >= 1e-5);

    pert.vectors = Eigen::MatrixXcd::Zero(h.dim() + 1, 1);
    CHECK_THROWS_AS(residual_report(h, pert), SolverError);
}

TEST_CASE("Dirichlet nesting never lowers the ground energy", "[eigensolver][property]") {
    const auto lat = build_lattice(12, 5, StripTopology::moebius);
    for (double f : {0.0, 0.2, 0.5, 0.8}) {
        const auto h = uniform(lat, f);
        const double e_full = dense_eigenvalues(h).front();
        // psi = 0 on one row: principal submatrix without that row's sites
        for (int row = 0; row < lat.ny(); ++row) {
            std::vector<int> keep;
            for (int idx = 0; idx < lat.size(); ++idx)
                if (lat.site(idx).j != row) keep.push_back(idx);
            const Eigen::MatrixXcd dense = h.to_dense();
            Eigen::MatrixXcd sub(keep.size(), keep.size());
            for (std::size_t a = 0; a < keep.size(); ++a)
                for (std::size_t b = 0; b < keep.size(); ++b) sub(a, b) = dense(keep[a], keep[b]);
            CHECK(dense_eigenvalues(from_dense(sub)).front() >= e_full - 1e-12);
        }
        // the odd sector vanishes on the center row
        CHECK(sector_spectrum(lat, f, {}, Parity::odd).front() >= e_full - 1e-12);
    }
}
