#pragma once

#include <Eigen/Dense>
#include <functional>

#include "geomflux/errors.hpp"
#include "geomflux/util.hpp"

namespace geomflux {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

// Square complex matrix accepted as Hermitian. Construction validates
// max|M[i][j] - conj(M[j][i])| <= 1e-12 * max|M| and stores the exactly
// Hermitian part (M + M^dagger)/2, so downstream code never sees an
// asymmetric matrix.
class HermitianMatrix {
public:
    explicit HermitianMatrix(const Matrix& m);

    const Matrix& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

    static constexpr double kHermiticityTolerance = 1e-12;

private:
    Matrix m_;
};

// Eigenvalues ascending; eigenvector column k belongs to eigenvalues[k].
struct EigenDecomposition {
    RealVector eigenvalues;
    Matrix eigenvectors;

    // Spectral norm of the decomposed matrix (largest |eigenvalue|),
    // floored away from zero so tolerance products stay meaningful.
    double spectral_scale() const {
        double m = 0.0;
        for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
            m = std::max(m, std::abs(eigenvalues[i]));
        return std::max(m, 1e-300);
    }

    // Smallest adjacent eigenvalue gap; +inf for dim 1.
    double min_gap() const;
    // Smallest gap touching level n.
    double min_gap_at(Eigen::Index n) const;
};

// Deterministic: identical input bits give identical output bits.
EigenDecomposition hermitian_eigendecomposition(const HermitianMatrix& m);

// sum_k f(lambda_k) |v_k><v_k|
Matrix spectral_function(const HermitianMatrix& m, const std::function<Complex(double)>& f);

} // namespace geomflux
