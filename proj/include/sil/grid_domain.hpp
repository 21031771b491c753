#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sil {

inline constexpr int kMaxDim = 2;

/// A point in R^dim; coordinates beyond dim are ignored and kept at zero.
using Point = std::array<double, kMaxDim>;
using CellIndex = std::array<std::int64_t, kMaxDim>;
using Matrix = std::array<std::array<double, kMaxDim>, kMaxDim>;

class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Upper bound on the number of cells a single rasterization may touch.
/// Reads SIL_CELL_BUDGET once; defaults to 1e6.
std::size_t default_cell_budget();

/**
 * A bounded open set rasterized on a uniform lattice.
 *
 * Cell k covers origin + h * index + [0, h)^dim; its node is the cell center.
 * Active cells are stored in lexicographic index order, and that order is the
 * node order used by every Field defined on the domain.
 */
class GridDomain {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    GridDomain(int dim, double h, Point origin, std::vector<CellIndex> cells);

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] double h() const { return h_; }
    [[nodiscard]] const Point& origin() const { return origin_; }
    [[nodiscard]] std::size_t size() const { return cells_.size(); }
    [[nodiscard]] std::span<const CellIndex> cells() const { return cells_; }
    [[nodiscard]] double cell_volume() const;
    [[nodiscard]] double measure() const { return static_cast<double>(size()) * cell_volume(); }

    [[nodiscard]] Point center(std::size_t k) const { return center_of(cells_[k]); }
    [[nodiscard]] Point center_of(const CellIndex& c) const;
    [[nodiscard]] CellIndex cell_of(const Point& x) const;

    /// Node index of an active cell, or npos.
    [[nodiscard]] std::size_t find(const CellIndex& c) const;
    /// x lies in an active cell.
    [[nodiscard]] bool contains(const Point& x) const { return find(cell_of(x)) != npos; }
    /// x lies in an active cell or in a face/corner neighbour of one (one-cell halo).
    [[nodiscard]] bool near(const Point& x) const;

    /// Face neighbour of node k along axis in direction dir (+1/-1), or npos.
    [[nodiscard]] std::size_t neighbor(std::size_t k, int axis, int dir) const;
    /// Node k misses at least one face neighbour.
    [[nodiscard]] bool is_boundary_node(std::size_t k) const;

    /// Inclusive lower / exclusive upper corner of the index bounding box.
    [[nodiscard]] const CellIndex& index_lo() const { return lo_; }
    [[nodiscard]] const CellIndex& index_hi() const { return hi_; }
    /// Closed physical bounding box of the union of active cells.
    [[nodiscard]] std::pair<Point, Point> bounding_box() const;

    /// Same dim, h, origin and active set.
    bool operator==(const GridDomain& other) const;

private:
    [[nodiscard]] std::size_t slot(const CellIndex& c) const;

    int dim_;
    double h_;
    Point origin_;
    std::vector<CellIndex> cells_;
    CellIndex lo_{};
    CellIndex hi_{};
    std::vector<std::int32_t> lookup_;
    std::vector<std::array<std::size_t, 2 * kMaxDim>> neighbors_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

inline DomainPtr share(GridDomain d) { return std::make_shared<const GridDomain>(std::move(d)); }

/// Orthogonal Q, translation b, and the sign carried by the weight g.
struct RigidMotion {
    int dim = 2;
    Matrix Q{{{1.0, 0.0}, {0.0, 1.0}}};
    Point b{0.0, 0.0};
    int sign = 1;

    static RigidMotion identity(int dim);
    static RigidMotion translation(int dim, Point b);
    /// Rotation by angle about the origin followed by translation b (dim 2).
    static RigidMotion rotation(double angle, Point b);
    /// Rotation by angle about center (dim 2).
    static RigidMotion rotation_about(double angle, Point center);

    /// Throws DomainError unless Q is orthogonal and |sign| == 1.
    void validate() const;
    [[nodiscard]] double orthogonality_defect() const;
    [[nodiscard]] double determinant() const;
    [[nodiscard]] Point apply(const Point& y) const;
    [[nodiscard]] Point apply_inverse(const Point& x) const;
};

/// Rasterize an analytic set: a cell of the lattice (origin, h) within the
/// index box [lo, hi) is active iff its center satisfies inside().
GridDomain rasterize(int dim, double h, Point origin, CellIndex lo, CellIndex hi,
                     const std::function<bool(const Point&)>& inside,
                     std::size_t budget = default_cell_budget());

/// The open box (lo, hi) on the lattice anchored at the coordinate origin.
GridDomain make_box(std::span<const double> lo, std::span<const double> hi, double h,
                    std::size_t budget = default_cell_budget());
GridDomain make_interval(double a, double b, double h, std::size_t budget = default_cell_budget());
GridDomain make_rectangle(Point lo, Point hi, double h, std::size_t budget = default_cell_budget());

inline double measure(const GridDomain& omega) { return omega.measure(); }

/// Face-adjacency component label per node, labels numbered in node order.
std::vector<std::size_t> component_labels(const GridDomain& omega, std::size_t* count = nullptr);
std::vector<GridDomain> connected_components(const GridDomain& omega);

/// Cells of the lattice (omega.origin, h_out) whose center lies in m(omega).
GridDomain apply_rigid_motion(const GridDomain& omega, const RigidMotion& m, double h_out);
/// As above, on the lattice (origin, h_out).
GridDomain apply_rigid_motion(const GridDomain& omega, const RigidMotion& m, double h_out, const Point& origin);

/// Measure of A xor B on the common refinement lattice (min h, A's origin).
double symmetric_difference_measure(const GridDomain& a, const GridDomain& b);

struct CongruenceResult {
    bool congruent = false;
    double defect = 0.0;
};

/// Compares m(omega2) against omega1.
CongruenceResult congruence_check(const GridDomain& omega1, const GridDomain& omega2,
                                  const RigidMotion& m, double tol);

/// Union of domains that share dim, h and origin.
GridDomain union_of(std::span<const GridDomain> parts);

/// Topological-regularity proxy: no inactive cell inside the bounding box has
/// all of its face neighbours active.
bool is_topologically_regular(const GridDomain& omega);

/// Open intervals removed from [0,1] by a finite-depth fat Cantor construction.
/// Stage n removes 2^(n-1) centred intervals; stages stop once an interval would
/// be shorter than min_length, and the lengths are scaled so that the removed
/// intervals sum to exactly removed_mass.
std::vector<std::pair<double, double>> fat_cantor_intervals(double removed_mass, double min_length);

/// Union of the removed intervals, an open dense-at-grid-scale subset of (0,1).
GridDomain make_fat_cantor_complement(double removed_mass, double h,
                                      std::size_t budget = default_cell_budget());

}  // namespace sil
