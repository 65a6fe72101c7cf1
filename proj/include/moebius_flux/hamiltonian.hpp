/**
 * Discrete magnetic Schroedinger operator on a strip lattice.
 *
 * Units: hbar = 1, lattice spacing 1, and hopping energies tx, ty stand for
 * hbar^2 / (2 m a^2). The vector potential enters as Peierls phases,
 *
 *   H(s, s)  = 2 tx + 2 ty + V(s)
 *   H(s, s') = -t_dir exp(i theta(s -> s'))
 *
 * with a missing neighbor (Dirichlet wall) simply contributing no hop.
 */
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "gauge.hpp"
#include "lattice.hpp"

namespace mflux {

using cplx = std::complex<double>;

class HamiltonianError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a sector restriction is requested for an operator that does
/// not commute with the reflection y -> -y.
class SymmetryError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct HoppingParams {
    double tx = 1.0;
    double ty = 1.0;

    void validate() const {
        if (!(tx > 0.0) || !(ty >= 0.0) || !std::isfinite(tx) || !std::isfinite(ty)) {
            throw HamiltonianError("hopping requires tx > 0 and ty >= 0");
        }
    }
};

struct PotentialField {
    std::vector<double> v;

    static PotentialField zero(const StripLattice& lat) {
        return {std::vector<double>(static_cast<std::size_t>(lat.size()), 0.0)};
    }
};

/// Hermitian operator in compressed sparse row form.
class SparseHermitian {
  public:
    using Matrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

    SparseHermitian() = default;

    /// Takes ownership of `m`; rejects anything that is not exactly
    /// Hermitian with a real diagonal.
    explicit SparseHermitian(Matrix m) : m_(std::move(m)) {
        m_.makeCompressed();
        if (m_.rows() != m_.cols()) throw HamiltonianError("operator must be square");
        if (hermiticity_defect() != 0.0) throw HamiltonianError("operator is not Hermitian");
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const { return m_ * x; }

    Eigen::MatrixXcd to_dense() const { return Eigen::MatrixXcd(m_); }

    cplx coeff(int r, int c) const { return m_.coeff(r, c); }

    /// max |H - H^dagger| entrywise, including imaginary parts on the diagonal.
    double hermiticity_defect() const {
        const Matrix adj = Matrix(m_.adjoint());
        double worst = 0.0;
        for (int r = 0; r < m_.outerSize(); ++r) {
            for (Matrix::InnerIterator it(m_, r); it; ++it) {
                worst = std::max(worst, std::abs(it.value() - adj.coeff(it.row(), it.col())));
            }
            for (Matrix::InnerIterator it(adj, r); it; ++it) {
                worst = std::max(worst, std::abs(it.value() - m_.coeff(it.row(), it.col())));
            }
        }
        return worst;
    }

    /// Upper bound on the spectral radius (max absolute row sum).
    double norm_bound() const {
        double worst = 0.0;
        for (int r = 0; r < m_.outerSize(); ++r) {
            double row = 0.0;
            for (Matrix::InnerIterator it(m_, r); it; ++it) row += std::abs(it.value());
            worst = std::max(worst, row);
        }
        return worst;
    }

  private:
    Matrix m_;
};

inline SparseHermitian assemble(const StripLattice& lat, const GaugeField& field,
                                const HoppingParams& hop, const PotentialField& pot) {
    hop.validate();
    if (!(field.lattice() == lat)) throw HamiltonianError("gauge field lives on a different lattice");
    if (pot.v.size() != static_cast<std::size_t>(lat.size())) {
        throw HamiltonianError("potential size does not match the lattice");
    }
    std::vector<Eigen::Triplet<cplx>> entries;
    entries.reserve(static_cast<std::size_t>(5 * lat.size()));
    for (int idx = 0; idx < lat.size(); ++idx) {
        const SiteIndex s = lat.site(idx);
        const double v = pot.v[static_cast<std::size_t>(idx)];
        if (!std::isfinite(v)) throw HamiltonianError("non-finite potential");
        entries.emplace_back(idx, idx, cplx(2.0 * hop.tx + 2.0 * hop.ty + v, 0.0));
        for (Direction d : {Direction::plus_x, Direction::plus_y}) {
            const auto t = lat.neighbor(s, d);
            if (!t) continue;
            const double hopping = d == Direction::plus_x ? hop.tx : hop.ty;
            const cplx z = -hopping * std::polar(1.0, field.link_angle(s, d));
            const int tidx = lat.index(*t);
            entries.emplace_back(idx, tidx, z);
            entries.emplace_back(tidx, idx, std::conj(z));
        }
    }
    SparseHermitian::Matrix m(lat.size(), lat.size());
    m.setFromTriplets(entries.begin(), entries.end());
    return SparseHermitian(std::move(m));
}

/// Spectrum of the single-row ring with tx = 1 and no transverse hopping:
/// 2 - 2 cos(2 pi (k + f) / nx), sorted.
inline std::vector<double> ring_spectrum_oracle(int nx, double f) {
    std::vector<double> e;
    e.reserve(static_cast<std::size_t>(nx));
    for (int k = 0; k < nx; ++k) e.push_back(2.0 - 2.0 * std::cos(two_pi * (k + f) / nx));
    std::sort(e.begin(), e.end());
    return e;
}

/// R(i, j) = (i, ny-1-j) as a map on lattice indices.
inline std::vector<int> reflection_permutation(const StripLattice& lat) {
    lat.center_row();  // odd ny required
    std::vector<int> perm(static_cast<std::size_t>(lat.size()));
    for (int idx = 0; idx < lat.size(); ++idx) {
        const SiteIndex s = lat.site(idx);
        perm[static_cast<std::size_t>(idx)] = lat.index({s.i, lat.ny() - 1 - s.j});
    }
    return perm;
}

enum class Parity { even, odd };

inline std::string to_string(Parity p) { return p == Parity::even ? "even" : "odd"; }

/**
 * Orthonormal basis of a reflection-parity subspace, as an n x m real
 * matrix whose columns are supported on at most two mirror sites. The odd
 * sector vanishes identically on the center row.
 */
struct SectorIsometry {
    Parity parity = Parity::even;
    StripLattice lattice;
    Eigen::SparseMatrix<double> basis;

    int dim() const { return static_cast<int>(basis.cols()); }

    Eigen::VectorXcd lift(const Eigen::VectorXcd& x) const { return basis.cast<cplx>() * x; }
};

inline SectorIsometry sector_isometry(const StripLattice& lat, Parity parity) {
    const int c = lat.center_row();
    const int nx = lat.nx();
    const double h = std::numbers::sqrt2 / 2.0;
    const double mirror = parity == Parity::even ? h : -h;
    std::vector<Eigen::Triplet<double>> entries;
    int col = 0;
    for (int j = 0; j < c; ++j) {
        for (int i = 0; i < nx; ++i, ++col) {
            entries.emplace_back(lat.index({i, j}), col, h);
            entries.emplace_back(lat.index({i, lat.ny() - 1 - j}), col, mirror);
        }
    }
    if (parity == Parity::even) {
        for (int i = 0; i < nx; ++i, ++col) entries.emplace_back(lat.index({i, c}), col, 1.0);
    }
    Eigen::SparseMatrix<double> b(lat.size(), col);
    b.setFromTriplets(entries.begin(), entries.end());
    return {parity, lat, std::move(b)};
}

/// Cross-block tolerance for restrict().
inline constexpr double symmetry_tolerance = 1e-12;

/// B^dagger H B on the sector, after checking that H does not couple the
/// two parity sectors.
inline SparseHermitian restrict(const SparseHermitian& h, const SectorIsometry& iso) {
    if (h.dim() != iso.lattice.size()) throw HamiltonianError("sector and operator sizes differ");
    using CMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
    const Parity other_parity = iso.parity == Parity::even ? Parity::odd : Parity::even;
    const CMat b = iso.basis.cast<cplx>();
    const CMat other = sector_isometry(iso.lattice, other_parity).basis.cast<cplx>();
    const CMat hb = h.matrix() * b;
    const CMat cross = CMat(other.adjoint()) * hb;
    double leak = 0.0;
    for (int r = 0; r < cross.outerSize(); ++r)
        for (CMat::InnerIterator it(cross, r); it; ++it) leak = std::max(leak, std::abs(it.value()));
    if (leak > symmetry_tolerance) {
        throw SymmetryError("operator couples even and odd sectors (cross block " + std::to_string(leak) +
                            ")");
    }
    CMat block = CMat(b.adjoint()) * hb;
    // Symmetrize away the rounding of the 1/sqrt(2) products.
    CMat sym = (block + CMat(block.adjoint())) * cplx(0.5, 0.0);
    for (int r = 0; r < sym.outerSize(); ++r) {
        for (CMat::InnerIterator it(sym, r); it; ++it) {
            if (it.row() == it.col()) it.valueRef() = cplx(it.value().real(), 0.0);
        }
    }
    return SparseHermitian(std::move(sym));
}

}  // namespace mflux
