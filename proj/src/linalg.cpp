#include "geomflux/linalg.hpp"

#include <limits>
#include <sstream>

namespace geomflux {

HermitianMatrix::HermitianMatrix(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw DimensionMismatch("HermitianMatrix: matrix must be square and nonempty");
    double max_abs = 0.0;
    double max_defect = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            max_abs = std::max(max_abs, std::abs(m(i, j)));
            max_defect = std::max(max_defect, std::abs(m(i, j) - std::conj(m(j, i))));
        }
    }
    if (!std::isfinite(max_abs))
        throw NonHermitianInput("HermitianMatrix: matrix has non-finite entries");
    if (max_defect > kHermiticityTolerance * std::max(max_abs, 1e-300) && max_abs > 0.0) {
        std::ostringstream os;
        os << "HermitianMatrix: Hermiticity defect " << max_defect
           << " exceeds " << kHermiticityTolerance << " * max|M| = "
           << kHermiticityTolerance * max_abs;
        throw NonHermitianInput(os.str());
    }
    m_ = 0.5 * (m + m.adjoint().eval());
}

double EigenDecomposition::min_gap() const {
    if (eigenvalues.size() < 2) return std::numeric_limits<double>::infinity();
    double g = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i + 1 < eigenvalues.size(); ++i)
        g = std::min(g, eigenvalues[i + 1] - eigenvalues[i]);
    return g;
}

double EigenDecomposition::min_gap_at(Eigen::Index n) const {
    double g = std::numeric_limits<double>::infinity();
    if (n > 0) g = std::min(g, eigenvalues[n] - eigenvalues[n - 1]);
    if (n + 1 < eigenvalues.size()) g = std::min(g, eigenvalues[n + 1] - eigenvalues[n]);
    return g;
}

EigenDecomposition hermitian_eigendecomposition(const HermitianMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix());
    if (solver.info() != Eigen::Success)
        throw Error("hermitian_eigendecomposition: solver failed to converge");
    EigenDecomposition d;
    d.eigenvalues = solver.eigenvalues();
    d.eigenvectors = solver.eigenvectors();
    return d;
}

Matrix spectral_function(const HermitianMatrix& m, const std::function<Complex(double)>& f) {
    const EigenDecomposition d = hermitian_eigendecomposition(m);
    const Eigen::Index n = m.dim();
    Matrix out = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Vector v = d.eigenvectors.col(k);
        out += f(d.eigenvalues[k]) * (v * v.adjoint());
    }
    return out;
}

} // namespace geomflux
