#include "npsa/constraints.hpp"

#include "npsa/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace npsa {

bool Domain::contains(const Point& p) const {
    const double sx = 1e-12 * (x_hi - x_lo);
    if (p.x < x_lo - sx || p.x > x_hi + sx) return false;
    if (dims == 1) return true;
    const double sy = 1e-12 * (y_hi - y_lo);
    return p.y >= y_lo - sy && p.y <= y_hi + sy;
}

void Domain::validate() const {
    if (dims != 1 && dims != 2) throw DomainError("Domain: dims must be 1 or 2");
    if (!(x_lo < x_hi) || (dims == 2 && !(y_lo < y_hi))) throw DomainError("Domain: empty interval");
}

void ConstraintFamily::validate() const {
    if (deriv_order < 0 || deriv_order > 2) throw DomainError("ConstraintFamily: derivative order must be 0, 1 or 2");
    domain.validate();
}

RieszVector riesz_vector(const ConstraintFamily& fam, const OrthoBasis& basis, const Point& y, int family_index) {
    if (!fam.domain.contains(y)) throw DomainError("riesz_vector: parameter outside the family domain");
    const Eigen::VectorXd b = basis.eval(y, fam.deriv_order);
    const double norm = b.norm();
    if (!(norm > 0.0))
        throw DomainError("riesz_vector: every basis function (or derivative) vanishes at the parameter");
    const double sign = fam.sense == BoundSense::lower ? -1.0 : 1.0;
    RieszVector rv;
    rv.lambda = 1.0 / norm;
    rv.ell = (sign * rv.lambda) * b;
    rv.offset = sign * rv.lambda * fam.bound;
    rv.param = y;
    rv.family = family_index;
    return rv;
}

double sdist(const Eigen::VectorXd& p_hat, const RieszVector& rv) {
    if (p_hat.size() != rv.ell.size()) throw DomainError("sdist: dimension mismatch");
    return rv.offset - rv.ell.dot(p_hat);
}

double sdist(const CoefVec& p_hat, const RieszVector& rv) { return sdist(p_hat.values, rv); }

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = i + 1 == n ? hi : lo + (hi - lo) * i / (n - 1);
    return xs;
}

// Scales each row of `values` by the inverse of its norm and returns those normalizers.
Eigen::VectorXd normalize_rows(Eigen::MatrixXd& values) {
    Eigen::VectorXd lam(values.rows());
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        const double norm = values.row(i).norm();
        if (!(norm > 0.0))
            throw DomainError("constraint search grid hits a common zero of the basis (or its derivatives)");
        lam[i] = 1.0 / norm;
        values.row(i) *= lam[i];
    }
    return lam;
}

constexpr double kGolden = 0.6180339887498949;

}  // namespace

ConstraintSet::ConstraintSet(BasisPtr basis, std::vector<ConstraintFamily> families, SearchConfig cfg)
    : basis_(std::move(basis)), families_(std::move(families)), cfg_(cfg) {
    if (!basis_) throw DomainError("ConstraintSet: null basis");
    if (cfg_.grid_1d < 3 || cfg_.grid_2d < 3 || cfg_.check_factor < 1)
        throw DomainError("SearchConfig: grids need at least 3 points");
    for (const auto& fam : families_) {
        fam.validate();
        if (fam.domain.dims != basis_->dims()) throw DomainError("ConstraintSet: family dimension mismatch");
        if (basis_->dims() == 2 && fam.deriv_order != 0)
            throw DomainError("ConstraintSet: 2-D families constrain point values only");
        const Point lo{fam.domain.x_lo, fam.domain.y_lo}, hi{fam.domain.x_hi, fam.domain.y_hi};
        if (!basis_->contains(lo) || !basis_->contains(hi))
            throw DomainError("ConstraintSet: family domain leaves the basis domain");
        tables_.push_back(make_table(fam, basis_->dims() == 1 ? cfg_.grid_1d : cfg_.grid_2d));
    }
}

ConstraintSet::Table ConstraintSet::make_table(const ConstraintFamily& fam, int points) const {
    Table t;
    t.sign = fam.sense == BoundSense::lower ? -1.0 : 1.0;
    t.bound = fam.bound;
    t.xs = linspace(fam.domain.x_lo, fam.domain.x_hi, points);
    t.ux = basis_->eval_axis_grid(t.xs, fam.deriv_order);
    t.lam_x = normalize_rows(t.ux);
    if (basis_->dims() == 2) {
        t.ys = linspace(fam.domain.y_lo, fam.domain.y_hi, points);
        t.uy = basis_->eval_axis_grid(t.ys, 0);
        t.lam_y = normalize_rows(t.uy);
    }
    return t;
}

Eigen::VectorXd ConstraintSet::grid_sdist_1d(const Table& t, const Eigen::VectorXd& p) const {
    return t.sign * (t.bound * t.lam_x - t.ux * p);
}

Eigen::MatrixXd ConstraintSet::grid_sdist_2d(const Table& t, const Eigen::VectorXd& p) const {
    const int n = basis_->per_axis();
    const Eigen::Map<const Eigen::MatrixXd> coef(p.data(), n, n);  // coef(a, b) = p[a + n b]
    Eigen::MatrixXd values = t.ux * coef * t.uy.transpose();
    if (t.bound != 0.0) values -= t.bound * t.lam_x * t.lam_y.transpose();
    return -t.sign * values;
}

RieszVector ConstraintSet::riesz(int k, const Point& y) const {
    return riesz_vector(families_.at(k), *basis_, y, k);
}

double ConstraintSet::sdist_at(const Eigen::VectorXd& p, int k, const Point& y) const {
    return sdist(p, riesz(k, y));
}

ViolationRecord ConstraintSet::refine_1d(const Eigen::VectorXd& p, int k, const Table& t, Eigen::Index best) const {
    const auto last = static_cast<Eigen::Index>(t.xs.size()) - 1;
    double a = t.xs[std::max<Eigen::Index>(best - 1, 0)];
    double b = t.xs[std::min(best + 1, last)];
    auto f = [&](double y) { return sdist_at(p, k, Point{y, 0.0}); };

    ViolationRecord rec{k, Point{t.xs[best], 0.0}, f(t.xs[best])};
    double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > cfg_.refine_tol) {
        if (fc < fd) {
            b = d, d = c, fd = fc;
            c = b - kGolden * (b - a);
            fc = f(c);
        } else {
            a = c, c = d, fc = fd;
            d = a + kGolden * (b - a);
            fd = f(d);
        }
    }
    const double y = fc < fd ? c : d;
    const double fy = std::min(fc, fd);
    if (fy < rec.signed_distance) rec = ViolationRecord{k, Point{y, 0.0}, fy};
    return rec;
}

namespace {

// Nelder-Mead on a box; points are clamped into the box before evaluation.
template <typename F>
std::pair<Point, double> nelder_mead_box(F&& f, Point start, double step, const Domain& box, double tol) {
    auto clamp = [&](Point q) {
        return Point{std::clamp(q.x, box.x_lo, box.x_hi), std::clamp(q.y, box.y_lo, box.y_hi)};
    };
    std::array<Point, 3> s{clamp(start), clamp(Point{start.x + step, start.y}), clamp(Point{start.x, start.y + step})};
    if (s[1].x == s[0].x) s[1] = clamp(Point{start.x - step, start.y});
    if (s[2].y == s[0].y) s[2] = clamp(Point{start.x, start.y - step});
    std::array<double, 3> fs{f(s[0]), f(s[1]), f(s[2])};
    for (int it = 0; it < 400; ++it) {
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int i, int j) { return fs[i] < fs[j]; });
        const Point best = s[idx[0]], mid = s[idx[1]], worst = s[idx[2]];
        const double fb = fs[idx[0]], fm = fs[idx[1]], fw = fs[idx[2]];
        const double size = std::max(std::hypot(mid.x - best.x, mid.y - best.y),
                                     std::hypot(worst.x - best.x, worst.y - best.y));
        if (size < tol) break;
        const Point centroid{0.5 * (best.x + mid.x), 0.5 * (best.y + mid.y)};
        auto along = [&](double t) {
            return clamp(Point{centroid.x + t * (worst.x - centroid.x), centroid.y + t * (worst.y - centroid.y)});
        };
        const Point refl = along(-1.0);
        const double fr = f(refl);
        Point next = worst;
        double fn = fw;
        if (fr < fb) {
            const Point exp = along(-2.0);
            const double fe = f(exp);
            next = fe < fr ? exp : refl;
            fn = std::min(fe, fr);
        } else if (fr < fm) {
            next = refl, fn = fr;
        } else {
            const Point con = fr < fw ? along(-0.5) : along(0.5);
            const double fc = f(con);
            if (fc < std::min(fr, fw)) {
                next = con, fn = fc;
            } else {
                // Shrink toward the best vertex.
                for (int i : {idx[1], idx[2]}) {
                    s[i] = clamp(Point{best.x + 0.5 * (s[i].x - best.x), best.y + 0.5 * (s[i].y - best.y)});
                    fs[i] = f(s[i]);
                }
                continue;
            }
        }
        s[idx[2]] = next;
        fs[idx[2]] = fn;
    }
    const auto i = std::min_element(fs.begin(), fs.end()) - fs.begin();
    return {s[i], fs[i]};
}

}  // namespace

ViolationRecord ConstraintSet::refine_2d(const Eigen::VectorXd& p, int k, const Table& t,
                                         const Eigen::MatrixXd& grid, int cell_starts, int random_starts) const {
    const Eigen::Index nx = grid.rows(), ny = grid.cols();
    struct Cell {
        double value;
        Eigen::Index i, j;
    };
    std::vector<Cell> minima;
    for (Eigen::Index j = 0; j < ny; ++j)
        for (Eigen::Index i = 0; i < nx; ++i) {
            bool local = true;
            for (Eigen::Index dj = -1; dj <= 1 && local; ++dj)
                for (Eigen::Index di = -1; di <= 1; ++di) {
                    const Eigen::Index a = i + di, b = j + dj;
                    if ((di || dj) && a >= 0 && a < nx && b >= 0 && b < ny && grid(a, b) < grid(i, j)) {
                        local = false;
                        break;
                    }
                }
            if (local) minima.push_back({grid(i, j), i, j});
        }
    std::stable_sort(minima.begin(), minima.end(), [](const Cell& a, const Cell& b) { return a.value < b.value; });

    const ConstraintFamily& fam = families_[k];
    const double step = (fam.domain.x_hi - fam.domain.x_lo) / (nx - 1);
    std::vector<Point> starts;
    for (std::size_t m = 0; m < minima.size() && static_cast<int>(m) < cell_starts; ++m)
        starts.push_back(Point{t.xs[minima[m].i], t.ys[minima[m].j]});
    std::mt19937_64 rng(cfg_.seed);
    std::uniform_real_distribution<double> ux(fam.domain.x_lo, fam.domain.x_hi), uy(fam.domain.y_lo, fam.domain.y_hi);
    for (int m = 0; m < random_starts; ++m) starts.push_back(Point{ux(rng), uy(rng)});

    ViolationRecord rec{k, Point{t.xs[minima.front().i], t.ys[minima.front().j]}, minima.front().value};
    auto f = [&](const Point& q) { return sdist_at(p, k, q); };
    for (const Point& s : starts) {
        const auto [q, fq] = nelder_mead_box(f, s, step, fam.domain, cfg_.refine_tol);
        if (fq < rec.signed_distance) rec = ViolationRecord{k, q, fq};
    }
    return rec;
}

ViolationRecord ConstraintSet::family_worst(const Eigen::VectorXd& p, int k) const {
    const Table& t = tables_[k];
    if (basis_->dims() == 1) {
        const Eigen::VectorXd s = grid_sdist_1d(t, p);
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < s.size(); ++i)
            if (s[i] < s[best]) best = i;
        return refine_1d(p, k, t, best);
    }
    return refine_2d(p, k, t, grid_sdist_2d(t, p), cfg_.multistarts, cfg_.multistarts);
}

ViolationRecord ConstraintSet::worst(const Eigen::VectorXd& p) const {
    if (p.size() != basis_->size()) throw DomainError("ConstraintSet: coefficient length mismatch");
    if (families_.empty()) return ViolationRecord{-1, Point{}, std::numeric_limits<double>::infinity()};
    ViolationRecord best = family_worst(p, 0);
    for (int k = 1; k < static_cast<int>(families_.size()); ++k) {
        const ViolationRecord rec = family_worst(p, k);
        if (rec.signed_distance < best.signed_distance) best = rec;
    }
    return best;
}

std::optional<ViolationRecord> ConstraintSet::most_violated(const Eigen::VectorXd& p, double delta) const {
    ViolationRecord rec = worst(p);
    if (rec.family < 0 || rec.signed_distance >= -delta) return std::nullopt;
    return rec;
}

std::vector<Interval> ConstraintSet::violated_regions(const Eigen::VectorXd& p, int k, std::optional<double> hint) const {
    if (basis_->dims() != 1) throw DomainError("violated_regions: 1-D families only");
    const Table& t = tables_.at(k);
    const Eigen::VectorXd s = grid_sdist_1d(t, p);
    auto f = [&](double y) { return sdist_at(p, k, Point{y, 0.0}); };
    // Sign change between a feasible point `in` and a violated point `out`.
    auto crossing = [&](double in, double out) {
        for (int it = 0; it < 200 && std::abs(out - in) > 1e-13 * std::max(1.0, std::abs(in)); ++it) {
            const double mid = 0.5 * (in + out);
            (f(mid) < 0.0 ? out : in) = mid;
        }
        return 0.5 * (in + out);
    };

    std::vector<Interval> regions;
    const Eigen::Index n = s.size();
    for (Eigen::Index i = 0; i < n;) {
        if (!(s[i] < 0.0)) {
            ++i;
            continue;
        }
        Eigen::Index j = i;
        while (j + 1 < n && s[j + 1] < 0.0) ++j;
        const double lo = i == 0 ? t.xs.front() : crossing(t.xs[i - 1], t.xs[i]);
        const double hi = j == n - 1 ? t.xs.back() : crossing(t.xs[j + 1], t.xs[j]);
        regions.push_back({lo, hi});
        i = j + 1;
    }

    // A violated pocket narrower than the grid spacing shows up only after refinement.
    auto add_pocket = [&](double y) {
        if (!(f(y) < 0.0)) return;
        if (std::any_of(regions.begin(), regions.end(), [&](const Interval& r) { return y >= r.lo && y <= r.hi; }))
            return;
        const auto right = std::upper_bound(t.xs.begin(), t.xs.end(), y) - t.xs.begin();
        const double lo = right == 0 ? t.xs.front() : (f(t.xs[right - 1]) < 0.0 ? t.xs[right - 1] : crossing(t.xs[right - 1], y));
        const double hi = right >= n ? t.xs.back() : (f(t.xs[right]) < 0.0 ? t.xs[right] : crossing(t.xs[right], y));
        regions.push_back({lo, hi});
        std::sort(regions.begin(), regions.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    };
    add_pocket(family_worst(p, k).param.x);
    if (hint) add_pocket(*hint);
    return regions;
}

std::vector<WeightedNode> ConstraintSet::violated_cells(const Eigen::VectorXd& p, int k) const {
    if (basis_->dims() != 2) throw DomainError("violated_cells: 2-D families only");
    const Table& t = tables_.at(k);
    const Eigen::MatrixXd s = grid_sdist_2d(t, p);
    const double hx = t.xs[1] - t.xs[0], hy = t.ys[1] - t.ys[0];
    std::vector<WeightedNode> nodes;
    for (Eigen::Index j = 0; j < s.cols(); ++j)
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
            if (!(s(i, j) < 0.0)) continue;
            const double wx = (i == 0 || i + 1 == s.rows()) ? 0.5 : 1.0;
            const double wy = (j == 0 || j + 1 == s.cols()) ? 0.5 : 1.0;
            nodes.push_back({Point{t.xs[i], t.ys[j]}, wx * wy * hx * hy});
        }
    return nodes;
}

const std::vector<ConstraintSet::Table>& ConstraintSet::dense_tables() const {
    std::call_once(dense_once_, [this] {
        const int coarse = basis_->dims() == 1 ? cfg_.grid_1d : cfg_.grid_2d;
        const int fine = (coarse - 1) * cfg_.check_factor + 1;
        for (const auto& fam : families_) dense_.push_back(make_table(fam, fine));
    });
    return dense_;
}

ViolationRecord ConstraintSet::dense_worst(const Eigen::VectorXd& p) const {
    if (p.size() != basis_->size()) throw DomainError("ConstraintSet: coefficient length mismatch");
    ViolationRecord best{-1, Point{}, std::numeric_limits<double>::infinity()};
    const auto& tables = dense_tables();
    const int starts = 4 * cfg_.multistarts;
    for (int k = 0; k < static_cast<int>(tables.size()); ++k) {
        const Table& t = tables[k];
        ViolationRecord rec;
        if (basis_->dims() == 1) {
            const Eigen::VectorXd s = grid_sdist_1d(t, p);
            std::vector<Eigen::Index> minima;
            for (Eigen::Index i = 0; i < s.size(); ++i)
                if ((i == 0 || s[i] <= s[i - 1]) && (i + 1 == s.size() || s[i] <= s[i + 1])) minima.push_back(i);
            std::stable_sort(minima.begin(), minima.end(), [&](auto a, auto b) { return s[a] < s[b]; });
            if (minima.size() > static_cast<std::size_t>(starts)) minima.resize(starts);
            rec = refine_1d(p, k, t, minima.front());
            for (std::size_t m = 1; m < minima.size(); ++m) {
                const ViolationRecord r = refine_1d(p, k, t, minima[m]);
                if (r.signed_distance < rec.signed_distance) rec = r;
            }
        } else {
            rec = refine_2d(p, k, t, grid_sdist_2d(t, p), starts, 0);
        }
        if (rec.signed_distance < best.signed_distance) best = rec;
    }
    return best;
}

double ConstraintSet::dense_min_sdist(const Eigen::VectorXd& p) const {
    if (p.size() != basis_->size()) throw DomainError("ConstraintSet: coefficient length mismatch");
    double best = std::numeric_limits<double>::infinity();
    for (const Table& t : dense_tables())
        best = std::min(best, basis_->dims() == 1 ? grid_sdist_1d(t, p).minCoeff() : grid_sdist_2d(t, p).minCoeff());
    return best;
}


bool ConstraintSet::is_feasible(const Eigen::VectorXd& p, double delta) const {
    return dense_min_sdist(p) >= -delta;
}

double ConstraintSet::min_value(const CoefVec& v, int deriv_order, int points) {
    const OrthoBasis& basis = *v.basis;
    const auto xs = linspace(basis.space().lo, basis.space().hi, points);
    if (basis.dims() == 1) return (basis.eval_axis_grid(xs, deriv_order) * v.values).minCoeff();
    if (deriv_order != 0) throw DomainError("min_value: tensor basis supports only point values");
    const Eigen::MatrixXd phi = basis.eval_axis_grid(xs, 0);
    const int n = basis.per_axis();
    const Eigen::Map<const Eigen::MatrixXd> coef(v.values.data(), n, n);
    return (phi * coef * phi.transpose()).minCoeff();
}

std::optional<ViolationRecord> most_violated(const CoefVec& p_hat, const std::vector<ConstraintFamily>& fams,
                                             const SearchConfig& cfg, double delta) {
    return ConstraintSet(p_hat.basis, fams, cfg).most_violated(p_hat.values, delta);
}

std::vector<Interval> violated_regions(const CoefVec& p_hat, const ConstraintFamily& fam, const SearchConfig& cfg) {
    return ConstraintSet(p_hat.basis, {fam}, cfg).violated_regions(p_hat.values, 0);
}

bool is_feasible(const CoefVec& p_hat, const std::vector<ConstraintFamily>& fams, double delta,
                 const SearchConfig& cfg) {
    return ConstraintSet(p_hat.basis, fams, cfg).is_feasible(p_hat.values, delta);
}

RankReport determining_check(const std::vector<ConstraintFamily>& fams, const OrthoBasis& basis, int sample_count) {
    if (sample_count < 1) throw DomainError("determining_check: need at least one sample");
    std::vector<Eigen::VectorXd> rows;
    for (std::size_t k = 0; k < fams.size(); ++k) {
        const Domain& d = fams[k].domain;
        auto mid = [&](double lo, double hi, int i) { return lo + (hi - lo) * (i + 0.5) / sample_count; };
        if (d.dims == 1) {
            for (int i = 0; i < sample_count; ++i)
                rows.push_back(riesz_vector(fams[k], basis, Point{mid(d.x_lo, d.x_hi, i), 0.0}).ell);
        } else {
            for (int j = 0; j < sample_count; ++j)
                for (int i = 0; i < sample_count; ++i)
                    rows.push_back(
                        riesz_vector(fams[k], basis, Point{mid(d.x_lo, d.x_hi, i), mid(d.y_lo, d.y_hi, j)}).ell);
        }
    }
    RankReport report;
    report.dimension = basis.size();
    if (rows.empty()) return report;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), basis.size());
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    report.singular_values.assign(sv.data(), sv.data() + sv.size());
    const double cutoff = 1e-10 * (sv.size() ? sv[0] : 0.0);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > cutoff) ++report.rank;
    return report;
}

}  // namespace npsa
