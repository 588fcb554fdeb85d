#include "npsa/hilbert_basis.hpp"

#include "npsa/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <sstream>

namespace npsa {

namespace {

constexpr double kMaxGramCondition = 1e24;

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace

void HilbertSpec::validate() const {
    if (!(lo < hi)) throw DomainError("HilbertSpec: interval requires lo < hi");
    if (order < 0 || order > 2) throw DomainError("HilbertSpec: sobolev order must be 0, 1 or 2");
}

std::string to_string(BasisFamily family) {
    switch (family) {
        case BasisFamily::polynomial: return "polynomial";
        case BasisFamily::cosine: return "cosine";
        case BasisFamily::tensor_polynomial_2d: return "tensor_polynomial_2d";
    }
    return "unknown";
}

BasisFamily basis_family_from_string(const std::string& name) {
    if (name == "polynomial") return BasisFamily::polynomial;
    if (name == "cosine") return BasisFamily::cosine;
    if (name == "tensor_polynomial_2d") return BasisFamily::tensor_polynomial_2d;
    throw DomainError("unknown basis family '" + name + "'");
}

OrthoBasis::OrthoBasis(const HilbertSpec& space, const BasisSpec& spec) : space_(space), spec_(spec) {}

BasisPtr OrthoBasis::build(const HilbertSpec& space, const BasisSpec& spec) {
    space.validate();
    if (spec.dimension < 1) throw DomainError("BasisSpec: dimension must be >= 1");

    std::shared_ptr<OrthoBasis> basis(new OrthoBasis(space, spec));
    switch (spec.family) {
        case BasisFamily::polynomial:
            basis->size_ = spec.dimension;
            basis->build_polynomial();
            break;
        case BasisFamily::cosine:
            if (!near(space.lo, 0.0) || !near(space.hi, std::numbers::pi))
                throw BasisError("cosine family requires the interval [0, pi]");
            basis->size_ = spec.dimension;
            basis->build_cosine();
            break;
        case BasisFamily::tensor_polynomial_2d:
            if (space.order != 0)
                throw BasisError("tensor_polynomial_2d supports only the H^0 inner product");
            basis->axis_ = build(space, BasisSpec{BasisFamily::polynomial, spec.dimension});
            basis->size_ = spec.dimension * spec.dimension;
            basis->transform_ = basis->axis_->transform();
            basis->diagonal_ = basis->axis_->diagonal_;
            basis->condition_ = basis->axis_->condition_ * basis->axis_->condition_;
            break;
    }
    return basis;
}

BasisPtr build_orthonormal_basis(const HilbertSpec& space, const BasisSpec& spec) {
    return OrthoBasis::build(space, spec);
}

void OrthoBasis::raw_values(double x, int s, Eigen::Ref<Eigen::VectorXd> out) const {
    const int n = spec_.dimension;
    if (spec_.family == BasisFamily::cosine) {
        for (int k = 0; k < n; ++k) {
            const double c = std::cos(k * x);
            switch (s) {
                case 0: out[k] = c; break;
                case 1: out[k] = -k * std::sin(k * x); break;
                default: out[k] = -double(k) * k * c; break;
            }
        }
        return;
    }
    // Legendre polynomials in t = (2x - a - b) / (b - a) and their t-derivatives.
    const double scale = 2.0 / (space_.hi - space_.lo);
    const double t = std::clamp(scale * x - (space_.lo + space_.hi) / (space_.hi - space_.lo), -1.0, 1.0);
    double p0 = 1.0, p1 = t;     // P_{k-1}, P_k
    double d0 = 0.0, d1 = 1.0;   // P'_{k-1}, P'_k
    double e0 = 0.0, e1 = 0.0;   // P''_{k-1}, P''_k
    auto emit = [&](int k, double p, double d, double e) {
        out[k] = s == 0 ? p : (s == 1 ? d * scale : e * scale * scale);
    };
    emit(0, 1.0, 0.0, 0.0);
    if (n > 1) emit(1, t, 1.0, 0.0);
    for (int k = 1; k + 1 < n; ++k) {
        const double p2 = ((2.0 * k + 1.0) * t * p1 - k * p0) / (k + 1.0);
        const double d2 = d0 + (2.0 * k + 1.0) * p1;
        const double e2 = e0 + (2.0 * k + 1.0) * d1;
        p0 = p1, p1 = p2;
        d0 = d1, d1 = d2;
        e0 = e1, e1 = e2;
        emit(k + 1, p2, d2, e2);
    }
}

void OrthoBasis::build_polynomial() {
    const int n = spec_.dimension;
    const double width = space_.hi - space_.lo;
    if (space_.order == 0) {
        // Normalized Legendre polynomials: ||P_k||^2 = width / (2k + 1).
        transform_ = Eigen::MatrixXd::Zero(n, n);
        for (int k = 0; k < n; ++k) transform_(k, k) = std::sqrt((2.0 * k + 1.0) / width);
        diagonal_ = true;
        condition_ = 2.0 * n - 1.0;
        return;
    }

    // Stack sqrt(w_i) * raw^(j)(x_i) for j = 0..q; B^T B is the exact raw Gram matrix.
    const QuadratureRule rule = gauss_legendre(n + 2, space_.lo, space_.hi);
    const int rows_per_order = static_cast<int>(rule.size());
    Eigen::MatrixXd stacked((space_.order + 1) * rows_per_order, n);
    Eigen::VectorXd raw(n);
    for (int j = 0; j <= space_.order; ++j) {
        for (int i = 0; i < rows_per_order; ++i) {
            raw_values(rule.nodes[i], j, raw);
            stacked.row(j * rows_per_order + i) = std::sqrt(rule.weights[i]) * raw.transpose();
        }
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
    Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    for (int k = 0; k < n; ++k)
        if (r(k, k) < 0.0) r.row(k) *= -1.0;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
    const auto& sv = svd.singularValues();
    condition_ = std::pow(sv(0) / sv(n - 1), 2);
    if (!(condition_ < kMaxGramCondition)) {
        std::ostringstream msg;
        msg << "polynomial basis of dimension " << n << " in H^" << space_.order
            << " is too ill-conditioned to orthonormalize (Gram condition ~" << condition_ << ")";
        throw BasisError(msg.str(), condition_);
    }

    // v = R^{-T} raw, then one reorthogonalization pass against the exact Gram matrix.
    transform_ = r.transpose().triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd cols = stacked * transform_.transpose();
    const Eigen::LLT<Eigen::MatrixXd> llt(cols.transpose() * cols);
    transform_ = llt.matrixL().solve(transform_);
    transform_ = transform_.triangularView<Eigen::Lower>();
}

void OrthoBasis::build_cosine() {
    // cos(kx), its derivatives -k sin(kx), -k^2 cos(kx) are mutually orthogonal on [0, pi].
    const int n = spec_.dimension;
    transform_ = Eigen::MatrixXd::Zero(n, n);
    double lo_norm = std::numbers::pi, hi_norm = std::numbers::pi;
    for (int k = 0; k < n; ++k) {
        double norm2 = std::numbers::pi;
        if (k > 0) {
            double sum = 0.0, power = 1.0;
            for (int j = 0; j <= space_.order; ++j, power *= double(k) * k) sum += power;
            norm2 = 0.5 * std::numbers::pi * sum;
        }
        lo_norm = std::min(lo_norm, norm2);
        hi_norm = std::max(hi_norm, norm2);
        transform_(k, k) = 1.0 / std::sqrt(norm2);
    }
    diagonal_ = true;
    condition_ = hi_norm / lo_norm;
}

bool OrthoBasis::contains(const Point& p) const {
    const double slack = 1e-12 * (space_.hi - space_.lo);
    auto inside = [&](double v) { return v >= space_.lo - slack && v <= space_.hi + slack; };
    return inside(p.x) && (dims() == 1 || inside(p.y));
}

void OrthoBasis::eval_axis(double x, int s, Eigen::Ref<Eigen::VectorXd> out) const {
    if (axis_) {
        axis_->eval_axis(x, s, out);
        return;
    }
    raw_values(x, s, out);
    if (diagonal_)
        out = transform_.diagonal().cwiseProduct(out);
    else
        out = transform_.triangularView<Eigen::Lower>() * out;
}

Eigen::MatrixXd OrthoBasis::eval_axis_grid(std::span<const double> xs, int s) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()), per_axis());
    Eigen::VectorXd row(per_axis());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        eval_axis(xs[i], s, row);
        out.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return out;
}

Eigen::VectorXd OrthoBasis::eval(const Point& p, int s) const {
    if (s < 0 || s > 2) throw DomainError("eval_basis: derivative order must be 0, 1 or 2");
    if (!contains(p)) throw DomainError("eval_basis: point outside the domain");
    if (dims() == 1) {
        Eigen::VectorXd out(size_);
        eval_axis(p.x, s, out);
        return out;
    }
    if (s != 0) throw DomainError("eval_basis: tensor basis supports only point values");
    const int n = per_axis();
    Eigen::VectorXd fx(n), fy(n);
    eval_axis(p.x, 0, fx);
    eval_axis(p.y, 0, fy);
    Eigen::VectorXd out(size_);
    for (int j = 0; j < n; ++j) out.segment(j * n, n) = fy[j] * fx;
    return out;
}

Eigen::MatrixXd OrthoBasis::gram_by_quadrature() const {
    if (axis_) {
        const Eigen::MatrixXd g = axis_->gram_by_quadrature();
        const int n = per_axis();
        Eigen::MatrixXd out(size_, size_);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) out.block(j * n, i * n, n, n) = g(j, i) * g;
        return out;
    }
    const int n = size_;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd v(n);
    auto accumulate = [&](const QuadratureRule& rule) {
        for (int j = 0; j <= space_.order; ++j)
            for (std::size_t i = 0; i < rule.size(); ++i) {
                eval_axis(rule.nodes[i], j, v);
                gram.selfadjointView<Eigen::Lower>().rankUpdate(v, rule.weights[i]);
            }
    };
    if (spec_.family == BasisFamily::polynomial) {
        accumulate(gauss_legendre(n + 2, space_.lo, space_.hi));
    } else {
        const int panels = 8;
        const double h = (space_.hi - space_.lo) / panels;
        for (int p = 0; p < panels; ++p)
            accumulate(gauss_legendre(std::max(24, n), space_.lo + p * h, space_.lo + (p + 1) * h));
    }
    return gram.selfadjointView<Eigen::Lower>();
}

CoefVec::CoefVec(BasisPtr b, Eigen::VectorXd v) : basis(std::move(b)), values(std::move(v)) {
    if (!basis) throw DomainError("CoefVec: null basis");
    if (values.size() != basis->size()) throw DomainError("CoefVec: length does not match basis dimension");
}

Eigen::VectorXd eval_basis(const OrthoBasis& basis, const Point& p, int deriv_order) {
    return basis.eval(p, deriv_order);
}

double synthesize(const CoefVec& coeffs, const Point& p, int deriv_order) {
    if (!coeffs.basis || coeffs.values.size() != coeffs.basis->size())
        throw DomainError("synthesize: coefficients do not match basis");
    return coeffs.basis->eval(p, deriv_order).dot(coeffs.values);
}

namespace {

void require_same_basis(const CoefVec& f, const CoefVec& g) {
    if (!f.basis || !g.basis || !(*f.basis == *g.basis)) throw DomainError("basis mismatch");
}

}  // namespace

double inner_product(const CoefVec& f, const CoefVec& g) {
    require_same_basis(f, g);
    return f.values.dot(g.values);
}

double inner_product_by_quadrature(const CoefVec& f, const CoefVec& g) {
    require_same_basis(f, g);
    const OrthoBasis& basis = *f.basis;
    if (basis.dims() != 1) throw DomainError("inner_product_by_quadrature: 1-D bases only");
    Eigen::VectorXd v(basis.size());
    auto integrand = [&](double x) {
        double sum = 0.0;
        for (int j = 0; j <= basis.space().order; ++j) {
            basis.eval_axis(x, j, v);
            sum += v.dot(f.values) * v.dot(g.values);
        }
        return sum;
    };
    return integrate_composite(integrand, basis.space().lo, basis.space().hi);
}

namespace {

void require_target_fits(const Target& target, const OrthoBasis& basis) {
    if (target.dims != basis.dims()) throw DomainError("target '" + target.name + "' has the wrong dimension");
    if (!target.moments && target.max_deriv < basis.space().order)
        throw DomainError("target '" + target.name + "' lacks the derivatives needed for H^" +
                          std::to_string(basis.space().order));
}

// Composite tensor Gauss rule with panel doubling for 2-D integrands.
Eigen::VectorXd integrate_2d(const std::function<void(double, double, Eigen::Ref<Eigen::VectorXd>)>& f,
                             Eigen::Index dim, double lo, double hi, const CompositeOptions& opts) {
    const QuadratureRule& ref = gauss_legendre(10);
    auto pass = [&](int panels) {
        Eigen::VectorXd total = Eigen::VectorXd::Zero(dim), value(dim);
        const double h = (hi - lo) / panels;
        std::vector<double> xs, ws;
        for (int p = 0; p < panels; ++p)
            for (std::size_t q = 0; q < ref.size(); ++q) {
                xs.push_back(lo + (p + 0.5) * h + 0.5 * h * ref.nodes[q]);
                ws.push_back(0.5 * h * ref.weights[q]);
            }
        for (std::size_t j = 0; j < xs.size(); ++j)
            for (std::size_t i = 0; i < xs.size(); ++i) {
                value.setZero();
                f(xs[i], xs[j], value);
                total.noalias() += ws[i] * ws[j] * value;
            }
        return total;
    };
    int panels = 8;
    Eigen::VectorXd previous = pass(panels);
    double diff = 0.0;
    for (int level = 0; level < 5; ++level) {
        panels *= 2;
        Eigen::VectorXd current = pass(panels);
        diff = (current - previous).lpNorm<Eigen::Infinity>();
        if (diff <= opts.tolerance * std::max(1.0, current.lpNorm<Eigen::Infinity>())) return current;
        previous = std::move(current);
    }
    throw QuadratureError("2-D quadrature did not converge", diff);
}

}  // namespace

CoefVec unconstrained_solve(const Target& target, BasisPtr basis, const CompositeOptions& opts) {
    if (!basis) throw DomainError("unconstrained_solve: null basis");
    require_target_fits(target, *basis);
    if (target.moments) return CoefVec(basis, target.moments(*basis));

    const HilbertSpec& space = basis->space();
    const int n = basis->size();
    if (basis->dims() == 2) {
        auto f = [&](double x, double y, Eigen::Ref<Eigen::VectorXd> out) {
            out = target.value(Point{x, y}, 0) * basis->eval(Point{x, y}, 0);
        };
        return CoefVec(basis, integrate_2d(f, n, space.lo, space.hi, opts));
    }

    Eigen::VectorXd v(n);
    VectorIntegrand integrand = [&](double x, Eigen::Ref<Eigen::VectorXd> out) {
        for (int j = 0; j <= space.order; ++j) {
            basis->eval_axis(x, j, v);
            out.noalias() += target.value(Point{x, 0.0}, j) * v;
        }
    };
    auto result = integrate_composite(integrand, n, space.lo, space.hi, target.breakpoints, opts);
    return CoefVec(basis, std::move(result.value));
}

double distance_to_target(const CoefVec& v, const Target& target, const CompositeOptions& opts) {
    if (!v.basis) throw DomainError("distance_to_target: null basis");
    const OrthoBasis& basis = *v.basis;
    if (target.dims != basis.dims()) throw DomainError("distance_to_target: dimension mismatch");

    if (target.moments && target.norm_squared) {
        const double sq = v.values.squaredNorm() - 2.0 * v.values.dot(target.moments(basis)) + *target.norm_squared;
        return std::sqrt(std::max(0.0, sq));
    }
    require_target_fits(target, basis);
    const HilbertSpec& space = basis.space();
    if (basis.dims() == 2) {
        auto f = [&](double x, double y, Eigen::Ref<Eigen::VectorXd> out) {
            const double diff = basis.eval(Point{x, y}, 0).dot(v.values) - target.value(Point{x, y}, 0);
            out[0] = diff * diff;
        };
        return std::sqrt(integrate_2d(f, 1, space.lo, space.hi, opts)[0]);
    }
    Eigen::VectorXd phi(basis.size());
    auto integrand = [&](double x) {
        double sum = 0.0;
        for (int j = 0; j <= space.order; ++j) {
            basis.eval_axis(x, j, phi);
            const double diff = phi.dot(v.values) - target.value(Point{x, 0.0}, j);
            sum += diff * diff;
        }
        return sum;
    };
    return std::sqrt(integrate_composite(integrand, space.lo, space.hi, target.breakpoints, opts));
}

}  // namespace npsa
