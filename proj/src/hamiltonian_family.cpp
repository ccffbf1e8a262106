#include "geomflux/hamiltonian_family.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace geomflux {

namespace {

const Complex kI(0.0, 1.0);

// Angular momentum matrices for spin j in the |j, m> basis with m descending
// (row 0 is m = j). Dimensionless: eigenvalues of Jz are j .. -j.
std::vector<Matrix> spin_matrices(double j) {
    const int n = static_cast<int>(std::lround(2.0 * j)) + 1;
    Matrix jz = Matrix::Zero(n, n);
    Matrix jp = Matrix::Zero(n, n); // raising operator J+
    for (int k = 0; k < n; ++k) {
        const double m = j - k;
        jz(k, k) = m;
        if (k > 0) {
            // <j, m+1 | J+ | j, m> with m = j - k
            jp(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
        }
    }
    const Matrix jm = jp.adjoint();
    std::vector<Matrix> out(3);
    out[0] = 0.5 * (jp + jm);        // Jx
    out[1] = -0.5 * kI * (jp - jm);  // Jy
    out[2] = jz;
    return out;
}

Matrix pauli(int k) {
    Matrix m = Matrix::Zero(2, 2);
    switch (k) {
        case 0: m(0, 1) = 1.0; m(1, 0) = 1.0; break;                 // sigma_x
        case 1: m(0, 1) = -kI; m(1, 0) = kI; break;                  // sigma_y
        default: m(0, 0) = 1.0; m(1, 1) = -1.0; break;               // sigma_z
    }
    return m;
}

Matrix random_hermitian(int dim, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i) {
        m(i, i) = Complex(scale * gauss(rng), 0.0);
        for (int j = i + 1; j < dim; ++j) {
            // Off-diagonal entries get variance matching the diagonal.
            const double re = scale * gauss(rng) / std::sqrt(2.0);
            const double im = scale * gauss(rng) / std::sqrt(2.0);
            m(i, j) = Complex(re, im);
            m(j, i) = Complex(re, -im);
        }
    }
    return m;
}

} // namespace

ParameterPoint::ParameterPoint(RealVector c) : coords_(std::move(c)) {
    if (coords_.size() < 1)
        throw DimensionMismatch("ParameterPoint: dimension must be >= 1");
    for (Eigen::Index i = 0; i < coords_.size(); ++i)
        if (!std::isfinite(coords_[i]))
            throw DimensionMismatch("ParameterPoint: coordinates must be finite");
}

ParameterPoint::ParameterPoint(std::initializer_list<double> c)
    : ParameterPoint(RealVector(Eigen::Map<const RealVector>(c.begin(),
                                static_cast<Eigen::Index>(c.size())))) {}

void HamiltonianFamily::check_point(const ParameterPoint& R) const {
    if (R.dim() != param_dim_) {
        std::ostringstream os;
        os << "HamiltonianFamily: expected " << param_dim_
           << " parameters, got " << R.dim();
        throw DimensionMismatch(os.str());
    }
}

HamiltonianFamily HamiltonianFamily::spin(double j, double hbar) {
    const double twoj = 2.0 * j;
    if (j <= 0.0 || std::abs(twoj - std::lround(twoj)) > 1e-12)
        throw DimensionMismatch("spin family: j must be a positive half-integer");
    HamiltonianFamily f;
    f.kind_ = Kind::BuiltinSpin;
    f.dim_ = static_cast<int>(std::lround(twoj)) + 1;
    f.param_dim_ = 3;
    f.hbar_ = hbar;
    auto js = spin_matrices(j);
    f.eval_ = [js](const RealVector& r) -> Matrix {
        return r[0] * js[0] + r[1] * js[1] + r[2] * js[2];
    };
    f.grad_ = [js](const RealVector&) { return js; };
    return f;
}

HamiltonianFamily HamiltonianFamily::avoided_crossing(double delta, double hbar) {
    HamiltonianFamily f;
    f.kind_ = Kind::BuiltinAvoidedCrossing;
    f.dim_ = 2;
    f.param_dim_ = 2;
    f.hbar_ = hbar;
    const Matrix sx = pauli(0), sy = pauli(1), sz = pauli(2);
    f.eval_ = [sx, sy, sz, delta](const RealVector& r) -> Matrix {
        return r[0] * sx + r[1] * sz + delta * sy;
    };
    f.grad_ = [sx, sz](const RealVector&) { return std::vector<Matrix>{sx, sz}; };
    return f;
}

HamiltonianFamily HamiltonianFamily::matrix_polynomial(
    const Matrix& constant,
    const std::vector<Matrix>& linear,
    const std::map<std::pair<int, int>, Matrix>& quadratic,
    double hbar) {
    const int dim = static_cast<int>(constant.rows());
    const int d = static_cast<int>(linear.size());
    if (d < 1)
        throw DimensionMismatch("matrix_polynomial: need at least one linear coefficient");
    auto check = [&](const Matrix& m, const char* what) {
        if (m.rows() != dim || m.cols() != dim) {
            std::ostringstream os;
            os << "matrix_polynomial: " << what << " coefficient has shape "
               << m.rows() << "x" << m.cols() << ", expected " << dim << "x" << dim;
            throw DimensionMismatch(os.str());
        }
        HermitianMatrix probe(m); // validates Hermiticity
        (void)probe;
    };
    check(constant, "constant");
    for (const auto& m : linear) check(m, "linear");
    for (const auto& [ij, m] : quadratic) {
        if (ij.first < 0 || ij.second < 0 || ij.first > ij.second ||
            ij.second >= d)
            throw DimensionMismatch("matrix_polynomial: quadratic index pair out of range (need 0 <= i <= j < param_dim)");
        check(m, "quadratic");
    }
    HamiltonianFamily f;
    f.kind_ = Kind::MatrixPolynomial;
    f.dim_ = dim;
    f.param_dim_ = d;
    f.hbar_ = hbar;
    // Copy into plain containers captured by value.
    Matrix c0 = constant;
    std::vector<Matrix> lin = linear;
    std::vector<std::pair<std::pair<int, int>, Matrix>> quad(quadratic.begin(), quadratic.end());
    f.eval_ = [c0, lin, quad](const RealVector& r) -> Matrix {
        Matrix h = c0;
        for (std::size_t i = 0; i < lin.size(); ++i) h += r[static_cast<Eigen::Index>(i)] * lin[i];
        for (const auto& [ij, m] : quad) h += r[ij.first] * r[ij.second] * m;
        return h;
    };
    f.grad_ = [lin, quad, d](const RealVector& r) {
        std::vector<Matrix> g;
        g.reserve(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            Matrix gk = lin[static_cast<std::size_t>(k)];
            for (const auto& [ij, m] : quad) {
                const auto [i, j] = ij;
                if (i == k && j == k) gk += 2.0 * r[k] * m;
                else if (i == k) gk += r[j] * m;
                else if (j == k) gk += r[i] * m;
            }
            g.push_back(std::move(gk));
        }
        return g;
    };
    return f;
}

HamiltonianFamily HamiltonianFamily::seeded_random_polynomial(
    int dim, int param_dim, std::uint64_t seed, int degree, double scale, double hbar) {
    if (dim < 1 || param_dim < 1)
        throw DimensionMismatch("seeded_random_polynomial: dim and param_dim must be >= 1");
    if (degree < 0 || degree > 2)
        throw DimensionMismatch("seeded_random_polynomial: degree must be 0, 1 or 2");
    std::mt19937_64 rng(splitmix64(seed));
    Matrix c0 = random_hermitian(dim, rng, scale);
    std::vector<Matrix> lin;
    std::map<std::pair<int, int>, Matrix> quad;
    if (degree >= 1)
        for (int i = 0; i < param_dim; ++i) lin.push_back(random_hermitian(dim, rng, scale));
    if (degree >= 2)
        for (int i = 0; i < param_dim; ++i)
            for (int j = i; j < param_dim; ++j)
                quad[{i, j}] = random_hermitian(dim, rng, 0.5 * scale);
    if (lin.empty())
        // Degree 0 still needs a parameter slot; use zero linear terms.
        lin.assign(static_cast<std::size_t>(param_dim), Matrix::Zero(dim, dim));
    HamiltonianFamily f = matrix_polynomial(c0, lin, quad, hbar);
    f.kind_ = Kind::SeededRandomPolynomial;
    return f;
}

HamiltonianFamily HamiltonianFamily::custom(
    int dim, int param_dim, EvalFn eval, GradFn grad, double hbar) {
    if (dim < 1 || param_dim < 1)
        throw DimensionMismatch("custom family: dim and param_dim must be >= 1");
    if (!eval)
        throw DimensionMismatch("custom family: evaluation callback required");
    HamiltonianFamily f;
    f.kind_ = Kind::Custom;
    f.dim_ = dim;
    f.param_dim_ = param_dim;
    f.hbar_ = hbar;
    f.eval_ = std::move(eval);
    f.grad_ = std::move(grad);
    return f;
}

HermitianMatrix HamiltonianFamily::evaluate(const ParameterPoint& R) const {
    check_point(R);
    Matrix h = eval_(R.coords());
    if (h.rows() != dim_ || h.cols() != dim_)
        throw DimensionMismatch("HamiltonianFamily: evaluation returned wrong shape");
    return HermitianMatrix(h);
}

GradientSet HamiltonianFamily::gradient(const ParameterPoint& R) const {
    check_point(R);
    if (grad_) {
        std::vector<Matrix> g = grad_(R.coords());
        if (static_cast<int>(g.size()) != param_dim_)
            throw DimensionMismatch("HamiltonianFamily: gradient returned wrong arity");
        GradientSet out;
        out.components.reserve(g.size());
        for (auto& m : g) out.components.push_back(HermitianMatrix(m).matrix());
        return out;
    }
    return finite_difference_gradient(R);
}

GradientSet HamiltonianFamily::finite_difference_gradient(const ParameterPoint& R) const {
    check_point(R);
    GradientSet out;
    out.components.reserve(static_cast<std::size_t>(param_dim_));
    const RealVector& r = R.coords();
    for (int i = 0; i < param_dim_; ++i) {
        const double eps = std::max(1e-5, 1e-5 * std::abs(r[i]));
        auto central = [&](double h) -> Matrix {
            RealVector rp = r, rm = r;
            rp[i] += h;
            rm[i] -= h;
            return (eval_(rp) - eval_(rm)) / (2.0 * h);
        };
        // One Richardson level: error drops from O(eps^2) to O(eps^4).
        const Matrix d1 = central(eps);
        const Matrix d2 = central(0.5 * eps);
        Matrix d = (4.0 * d2 - d1) / 3.0;
        out.components.push_back(HermitianMatrix(d).matrix());
    }
    return out;
}

} // namespace geomflux
