#pragma once

#include "npsa/quadrature.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace npsa {

/// Sobolev space H^q([a, b]) with norm sum_{j<=q} ||u^(j)||_{L^2}^2.
/// For the 2-D tensor family the interval is used on both axes.
struct HilbertSpec {
    double lo = -1.0;
    double hi = 1.0;
    int order = 0;

    void validate() const;
    bool operator==(const HilbertSpec&) const = default;
};

enum class BasisFamily { polynomial, cosine, tensor_polynomial_2d };

struct BasisSpec {
    BasisFamily family = BasisFamily::polynomial;
    int dimension = 1;  // per axis for the tensor family

    bool operator==(const BasisSpec&) const = default;
};

std::string to_string(BasisFamily family);
BasisFamily basis_family_from_string(const std::string& name);

/// A location in the domain; `y` is ignored by 1-D bases.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Orthonormal basis {v_1, ..., v_N} of a polynomial or cosine subspace of H^q.
///
/// One-dimensional families are stored as a lower-triangular map from a raw family
/// (Legendre polynomials on [a, b], or cos(nx) on [0, pi]) to the orthonormal one:
/// v_n = sum_{m <= n} T(n, m) raw_m. The 2-D family is the tensor product of a 1-D
/// polynomial basis with itself, flattened with the x-index fastest.
///
/// Instances are immutable and shared through std::shared_ptr.
class OrthoBasis {
public:
    static std::shared_ptr<const OrthoBasis> build(const HilbertSpec& space, const BasisSpec& spec);

    const HilbertSpec& space() const { return space_; }
    const BasisSpec& spec() const { return spec_; }

    /// Total number of basis functions N (n^2 for the tensor family).
    int size() const { return size_; }
    /// Spatial dimension of the domain (1 or 2).
    int dims() const { return spec_.family == BasisFamily::tensor_polynomial_2d ? 2 : 1; }
    /// Functions per axis; equals size() for 1-D families.
    int per_axis() const { return spec_.dimension; }

    const Eigen::MatrixXd& transform() const { return transform_; }
    /// Estimated 2-norm condition number of the raw-family Gram matrix.
    double condition_estimate() const { return condition_; }

    bool contains(const Point& p) const;

    /// (v_1^(s)(p), ..., v_N^(s)(p)).
    Eigen::VectorXd eval(const Point& p, int deriv_order = 0) const;

    /// 1-D axis family evaluated at x, written into `out` (length per_axis()).
    void eval_axis(double x, int deriv_order, Eigen::Ref<Eigen::VectorXd> out) const;
    /// Rows are points, columns are 1-D axis functions.
    Eigen::MatrixXd eval_axis_grid(std::span<const double> xs, int deriv_order) const;

    /// Gram matrix of the orthonormal family under the H^q inner product, by exact
    /// Gauss quadrature (polynomials) or by composite quadrature (cosines).
    Eigen::MatrixXd gram_by_quadrature() const;

    /// The 1-D basis the tensor family is built from (self for 1-D families).
    const OrthoBasis& axis() const { return axis_ ? *axis_ : *this; }

    bool operator==(const OrthoBasis& other) const { return space_ == other.space_ && spec_ == other.spec_; }

private:
    OrthoBasis(const HilbertSpec& space, const BasisSpec& spec);
    void build_polynomial();
    void build_cosine();
    void raw_values(double x, int deriv_order, Eigen::Ref<Eigen::VectorXd> out) const;

    HilbertSpec space_;
    BasisSpec spec_;
    int size_ = 0;
    Eigen::MatrixXd transform_;
    bool diagonal_ = false;
    double condition_ = 1.0;
    std::shared_ptr<const OrthoBasis> axis_;
};

using BasisPtr = std::shared_ptr<const OrthoBasis>;

BasisPtr build_orthonormal_basis(const HilbertSpec& space, const BasisSpec& spec);

/// Coordinates of an element of V in the orthonormal basis.
struct CoefVec {
    BasisPtr basis;
    Eigen::VectorXd values;

    CoefVec() = default;
    CoefVec(BasisPtr b, Eigen::VectorXd v);

    Eigen::Index size() const { return values.size(); }
    double norm() const { return values.norm(); }
};

Eigen::VectorXd eval_basis(const OrthoBasis& basis, const Point& p, int deriv_order);

/// sum_n c_n v_n^(s)(p)
double synthesize(const CoefVec& coeffs, const Point& p, int deriv_order = 0);

/// <f, g>_H, which in orthonormal coordinates is the Euclidean dot product.
double inner_product(const CoefVec& f, const CoefVec& g);

/// <f, g>_H evaluated by quadrature on the synthesized functions (1-D bases only).
double inner_product_by_quadrature(const CoefVec& f, const CoefVec& g);

/// A function to be approximated. `value(p, j)` returns the j-th derivative for
/// j <= max_deriv (the x-derivative for 1-D targets).
struct Target {
    std::string name;
    int dims = 1;
    std::function<double(const Point&, int)> value;
    int max_deriv = 0;
    /// Points in (a, b) where the target or its derivatives are non-smooth.
    std::vector<double> breakpoints;
    /// Exact Galerkin moments <u, v_n>_H, for targets where generic quadrature is unsuitable.
    std::function<Eigen::VectorXd(const OrthoBasis&)> moments;
    /// Exact ||u||_H^2 when known.
    std::optional<double> norm_squared;
};

/// Galerkin interpolation: p_n = <u, v_n>_H.
CoefVec unconstrained_solve(const Target& target, BasisPtr basis, const CompositeOptions& opts = {});

/// ||v - u||_H computed by quadrature against the target.
double distance_to_target(const CoefVec& v, const Target& target, const CompositeOptions& opts = {});

}  // namespace npsa
