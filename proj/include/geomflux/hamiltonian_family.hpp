#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "geomflux/linalg.hpp"

namespace geomflux {

// Point in the d-dimensional real parameter space.
struct ParameterPoint {
    explicit ParameterPoint(RealVector c);
    ParameterPoint(std::initializer_list<double> c);

    const RealVector& coords() const { return coords_; }
    Eigen::Index dim() const { return coords_.size(); }
    double operator[](Eigen::Index i) const { return coords_[i]; }

private:
    RealVector coords_;
};

// Gradient of the matrix family: one Hermitian matrix per parameter direction.
struct GradientSet {
    std::vector<Matrix> components;
};

// Smooth family R -> h(R) of N x N Hermitian matrices, carrying hbar.
class HamiltonianFamily {
public:
    enum class Kind {
        BuiltinSpin,
        BuiltinAvoidedCrossing,
        MatrixPolynomial,
        SeededRandomPolynomial,
        Custom,
    };

    using EvalFn = std::function<Matrix(const RealVector&)>;
    using GradFn = std::function<std::vector<Matrix>(const RealVector&)>;

    // h = R . J for spin j (dimension 2j+1); j = 1/2 gives h = (1/2) R.sigma.
    static HamiltonianFamily spin(double j = 0.5, double hbar = 1.0);

    // h = R1 sigma_x + R2 sigma_z + delta sigma_y (two parameters).
    static HamiltonianFamily avoided_crossing(double delta = 0.1, double hbar = 1.0);

    // h(R) = C0 + sum_i R_i C_i + sum_{i<=j} R_i R_j C_ij, all coefficients Hermitian.
    static HamiltonianFamily matrix_polynomial(
        const Matrix& constant,
        const std::vector<Matrix>& linear,
        const std::map<std::pair<int, int>, Matrix>& quadratic = {},
        double hbar = 1.0);

    // Degree <= 2 polynomial with Hermitian coefficients drawn from a seeded
    // generator; identical (dim, param_dim, seed, degree, scale) give the
    // identical family on every run.
    static HamiltonianFamily seeded_random_polynomial(
        int dim, int param_dim, std::uint64_t seed,
        int degree = 2, double scale = 1.0, double hbar = 1.0);

    // Arbitrary callable family; gradient falls back to finite differences
    // unless an analytic gradient callback is supplied.
    static HamiltonianFamily custom(
        int dim, int param_dim, EvalFn eval, GradFn grad = nullptr, double hbar = 1.0);

    HermitianMatrix evaluate(const ParameterPoint& R) const;

    // Analytic for the builtin and polynomial kinds, finite-difference
    // fallback otherwise. Every component is Hermitian.
    GradientSet gradient(const ParameterPoint& R) const;

    // Central differences with step max(1e-5, 1e-5 |R_i|) plus one Richardson
    // level; public so tests can pit it against the analytic gradient.
    GradientSet finite_difference_gradient(const ParameterPoint& R) const;

    int dim() const { return dim_; }
    int param_dim() const { return param_dim_; }
    double hbar() const { return hbar_; }
    Kind kind() const { return kind_; }

private:
    HamiltonianFamily() = default;
    void check_point(const ParameterPoint& R) const;

    Kind kind_ = Kind::Custom;
    int dim_ = 0;
    int param_dim_ = 0;
    double hbar_ = 1.0;
    EvalFn eval_;
    GradFn grad_;
};

} // namespace geomflux
