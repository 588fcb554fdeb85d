#pragma once

#include "npsa/hilbert_basis.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace npsa {

/// Closed interval (dims == 1) or closed rectangle (dims == 2).
struct Domain {
    int dims = 1;
    double x_lo = -1.0, x_hi = 1.0;
    double y_lo = 0.0, y_hi = 0.0;

    static Domain interval(double lo, double hi) { return {1, lo, hi, 0.0, 0.0}; }
    static Domain rectangle(double xlo, double xhi, double ylo, double yhi) { return {2, xlo, xhi, ylo, yhi}; }

    bool contains(const Point& p) const;
    void validate() const;
};

enum class BoundSense { lower, upper };

/// One family (L_k, omega_k) of half-space constraints:
///   lower:  v^(s)(y) >= bound   for all y in domain
///   upper:  v^(s)(y) <= bound   for all y in domain
/// bound == 0 gives a homogeneous cone; a nonzero bound gives an affine one.
struct ConstraintFamily {
    int deriv_order = 0;
    BoundSense sense = BoundSense::lower;
    double bound = 0.0;
    Domain domain;
    std::string label;

    bool homogeneous() const { return bound == 0.0; }
    void validate() const;

    static ConstraintFamily positivity(const Domain& d) { return {0, BoundSense::lower, 0.0, d, "positivity"}; }
    static ConstraintFamily monotonicity(const Domain& d) { return {1, BoundSense::lower, 0.0, d, "monotonicity"}; }
    static ConstraintFamily convexity(const Domain& d) { return {2, BoundSense::lower, 0.0, d, "convexity"}; }
    static ConstraintFamily upper_bound(const Domain& d, double b) { return {0, BoundSense::upper, b, d, "bounded"}; }
};

/// Unit-norm coordinate vector of the constraint functional at parameter y. The
/// feasible half-space is { x : <ell, x> <= offset }; offset is zero for
/// homogeneous families and +-lambda * bound otherwise.
struct RieszVector {
    Eigen::VectorXd ell;
    double lambda = 0.0;
    double offset = 0.0;
    Point param;
    int family = 0;

    bool affine() const { return offset != 0.0; }
    /// Projection of the origin onto the bounding plane.
    Eigen::VectorXd vertex() const { return offset * ell; }
};

struct ViolationRecord {
    int family = 0;
    Point param;
    double signed_distance = 0.0;
};

struct SearchConfig {
    int grid_1d = 2049;
    int grid_2d = 129;
    int check_factor = 10;   // dense check grid is this many times finer
    double refine_tol = 1e-12;
    int multistarts = 8;
    std::uint64_t seed = 42;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// A quadrature node inside a violated set, used by the averaging solver.
struct WeightedNode {
    Point param;
    double weight = 0.0;
};

RieszVector riesz_vector(const ConstraintFamily& fam, const OrthoBasis& basis, const Point& y, int family_index = 0);

/// Signed Euclidean distance from p to the half-space of rv; negative iff violated.
double sdist(const Eigen::VectorXd& p_hat, const RieszVector& rv);
double sdist(const CoefVec& p_hat, const RieszVector& rv);

/// A list of constraint families bound to a basis, with the search grids
/// precomputed. Immutable after construction (the dense check tables are built
/// lazily under a once_flag), so it can be shared across threads.
class ConstraintSet {
public:
    ConstraintSet(BasisPtr basis, std::vector<ConstraintFamily> families, SearchConfig cfg = {});

    const OrthoBasis& basis() const { return *basis_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    const std::vector<ConstraintFamily>& families() const { return families_; }
    const SearchConfig& config() const { return cfg_; }
    bool empty() const { return families_.empty(); }

    RieszVector riesz(int k, const Point& y) const;
    double sdist_at(const Eigen::VectorXd& p, int k, const Point& y) const;

    /// Refined global minimizer of sdist over all families (always returns a record).
    ViolationRecord worst(const Eigen::VectorXd& p) const;
    /// worst(p) if its signed distance is below -delta, otherwise nothing.
    std::optional<ViolationRecord> most_violated(const Eigen::VectorXd& p, double delta) const;

    /// Maximal subintervals of a 1-D family's domain where sdist < 0. `hint` is a
    /// known violated location that the search grid may have stepped over.
    std::vector<Interval> violated_regions(const Eigen::VectorXd& p, int k,
                                           std::optional<double> hint = std::nullopt) const;
    /// Search-grid nodes of a 2-D family where sdist < 0, with trapezoid-rule weights.
    std::vector<WeightedNode> violated_cells(const Eigen::VectorXd& p, int k) const;

    /// True iff sdist >= -delta on the dense check grid of every family.
    bool is_feasible(const Eigen::VectorXd& p, double delta) const;
    /// Minimum of sdist on the dense check grid points, over all families.
    double dense_min_sdist(const Eigen::VectorXd& p) const;
    /// Refined minimum of sdist, started from the lowest local minima of the dense check grid.
    ViolationRecord dense_worst(const Eigen::VectorXd& p) const;
    /// Minimum of v^(s) (not normalized) over an n-point uniform grid of the basis domain.
    static double min_value(const CoefVec& v, int deriv_order, int points);

private:
    // Search grid of one family. Axis values are pre-scaled by the per-axis
    // normalizer so that sdist = sign * (bound * lambda - scaled values . p).
    struct Table {
        std::vector<double> xs, ys;  // ys empty for 1-D
        Eigen::MatrixXd ux, uy;      // rows: grid points, cols: axis functions
        Eigen::VectorXd lam_x, lam_y;
        double sign = -1.0;          // -1 lower, +1 upper
        double bound = 0.0;
    };

    Table make_table(const ConstraintFamily& fam, int points) const;
    Eigen::VectorXd grid_sdist_1d(const Table& t, const Eigen::VectorXd& p) const;
    Eigen::MatrixXd grid_sdist_2d(const Table& t, const Eigen::VectorXd& p) const;
    ViolationRecord refine_1d(const Eigen::VectorXd& p, int k, const Table& t, Eigen::Index best) const;
    ViolationRecord refine_2d(const Eigen::VectorXd& p, int k, const Table& t, const Eigen::MatrixXd& grid,
                              int cell_starts, int random_starts) const;
    ViolationRecord family_worst(const Eigen::VectorXd& p, int k) const;
    const std::vector<Table>& dense_tables() const;

    BasisPtr basis_;
    std::vector<ConstraintFamily> families_;
    SearchConfig cfg_;
    std::vector<Table> tables_;
    mutable std::once_flag dense_once_;
    mutable std::vector<Table> dense_;
};

// Free-function surface over a temporary ConstraintSet.
std::optional<ViolationRecord> most_violated(const CoefVec& p_hat, const std::vector<ConstraintFamily>& fams,
                                             const SearchConfig& cfg, double delta = 0.0);
std::vector<Interval> violated_regions(const CoefVec& p_hat, const ConstraintFamily& fam, const SearchConfig& cfg);
bool is_feasible(const CoefVec& p_hat, const std::vector<ConstraintFamily>& fams, double delta,
                 const SearchConfig& cfg = {});

struct RankReport {
    int rank = 0;
    int dimension = 0;
    std::vector<double> singular_values;

    bool determining() const { return rank == dimension; }
};

/// Numerical rank of the stacked representors {ell_k(y_i)} over `sample_count`
/// stratified samples per family; rank N certifies the V-determining property.
RankReport determining_check(const std::vector<ConstraintFamily>& fams, const OrthoBasis& basis, int sample_count);

}  // namespace npsa
