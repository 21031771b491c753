#include "sil/grid_domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <sstream>

namespace sil {

namespace {

constexpr std::size_t kMaxLookupSlots = std::size_t{1} << 27;

bool lex_less(const CellIndex& a, const CellIndex& b, int dim)
{
    for (int d = 0; d < dim; ++d) {
        if (a[d] != b[d]) {
            return a[d] < b[d];
        }
    }
    return false;
}

std::size_t checked_box_count(int dim, const CellIndex& lo, const CellIndex& hi)
{
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) {
        if (hi[d] <= lo[d]) {
            return 0;
        }
        const auto extent = static_cast<std::size_t>(hi[d] - lo[d]);
        if (extent > kMaxLookupSlots || total > kMaxLookupSlots / extent) {
            return kMaxLookupSlots + 1;
        }
        total *= extent;
    }
    return total;
}

GridDomain rigid_image(const GridDomain& omega, const RigidMotion& m, double h_out, const Point& origin)
{
    m.validate();
    if (m.dim != omega.dim()) {
        throw DomainError("rigid motion dimension does not match domain");
    }
    if (!(h_out > 0.0)) {
        throw DomainError("output cell width must be positive");
    }
    const int dim = omega.dim();
    const auto [blo, bhi] = omega.bounding_box();
    Point lo{0.0, 0.0};
    Point hi{0.0, 0.0};
    for (int d = 0; d < dim; ++d) {
        lo[d] = std::numeric_limits<double>::infinity();
        hi[d] = -std::numeric_limits<double>::infinity();
    }
    const int corners = 1 << dim;
    for (int c = 0; c < corners; ++c) {
        Point y{0.0, 0.0};
        for (int d = 0; d < dim; ++d) {
            y[d] = ((c >> d) & 1) != 0 ? bhi[d] : blo[d];
        }
        const Point x = m.apply(y);
        for (int d = 0; d < dim; ++d) {
            lo[d] = std::min(lo[d], x[d]);
            hi[d] = std::max(hi[d], x[d]);
        }
    }
    CellIndex ilo{0, 0};
    CellIndex ihi{1, 1};
    for (int d = 0; d < dim; ++d) {
        ilo[d] = static_cast<std::int64_t>(std::floor((lo[d] - origin[d]) / h_out)) - 1;
        ihi[d] = static_cast<std::int64_t>(std::ceil((hi[d] - origin[d]) / h_out)) + 1;
    }
    return rasterize(dim, h_out, origin, ilo, ihi,
                     [&](const Point& x) { return omega.contains(m.apply_inverse(x)); });
}

}  // namespace

std::size_t default_cell_budget()
{
    if (const char* env = std::getenv("SIL_CELL_BUDGET")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end != env && v >= 1.0) {
            return static_cast<std::size_t>(v);
        }
    }
    return 1000000;
}

GridDomain::GridDomain(int dim, double h, Point origin, std::vector<CellIndex> cells)
    : dim_(dim), h_(h), origin_(origin), cells_(std::move(cells))
{
    if (dim_ < 1 || dim_ > kMaxDim) {
        throw DomainError("domain dimension must be 1 or 2");
    }
    if (!(h_ > 0.0) || !std::isfinite(h_)) {
        throw DomainError("cell width must be positive");
    }
    if (cells_.empty()) {
        throw DomainError("domain has no active cells");
    }
    for (int d = dim_; d < kMaxDim; ++d) {
        origin_[d] = 0.0;
        for (auto& c : cells_) {
            c[d] = 0;
        }
    }
    std::sort(cells_.begin(), cells_.end(),
              [this](const CellIndex& a, const CellIndex& b) { return lex_less(a, b, dim_); });
    cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());

    lo_ = cells_.front();
    hi_ = cells_.front();
    for (const auto& c : cells_) {
        for (int d = 0; d < dim_; ++d) {
            lo_[d] = std::min(lo_[d], c[d]);
            hi_[d] = std::max(hi_[d], c[d]);
        }
    }
    for (int d = 0; d < kMaxDim; ++d) {
        hi_[d] += 1;
    }
    const std::size_t slots = checked_box_count(dim_, lo_, hi_);
    if (slots > kMaxLookupSlots) {
        throw DomainError("domain bounding box is too large");
    }
    lookup_.assign(slots, -1);
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        lookup_[slot(cells_[k])] = static_cast<std::int32_t>(k);
    }

    neighbors_.resize(cells_.size());
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        auto& nb = neighbors_[k];
        nb.fill(npos);
        for (int d = 0; d < dim_; ++d) {
            CellIndex c = cells_[k];
            c[d] -= 1;
            nb[2 * d] = find(c);
            c[d] += 2;
            nb[2 * d + 1] = find(c);
        }
    }
}

double GridDomain::cell_volume() const
{
    return dim_ == 1 ? h_ : h_ * h_;
}

Point GridDomain::center_of(const CellIndex& c) const
{
    Point x{0.0, 0.0};
    for (int d = 0; d < dim_; ++d) {
        x[d] = origin_[d] + h_ * (static_cast<double>(c[d]) + 0.5);
    }
    return x;
}

CellIndex GridDomain::cell_of(const Point& x) const
{
    CellIndex c{0, 0};
    for (int d = 0; d < dim_; ++d) {
        c[d] = static_cast<std::int64_t>(std::floor((x[d] - origin_[d]) / h_));
    }
    return c;
}

std::size_t GridDomain::slot(const CellIndex& c) const
{
    std::size_t s = 0;
    for (int d = 0; d < dim_; ++d) {
        s = s * static_cast<std::size_t>(hi_[d] - lo_[d]) + static_cast<std::size_t>(c[d] - lo_[d]);
    }
    return s;
}

std::size_t GridDomain::find(const CellIndex& c) const
{
    for (int d = 0; d < dim_; ++d) {
        if (c[d] < lo_[d] || c[d] >= hi_[d]) {
            return npos;
        }
    }
    const std::int32_t k = lookup_[slot(c)];
    return k < 0 ? npos : static_cast<std::size_t>(k);
}

bool GridDomain::near(const Point& x) const
{
    const CellIndex c = cell_of(x);
    if (find(c) != npos) {
        return true;
    }
    const int span1 = dim_ == 2 ? 1 : 0;
    for (int a = -1; a <= 1; ++a) {
        for (int b = -span1; b <= span1; ++b) {
            const CellIndex n{c[0] + a, c[1] + b};
            if (find(n) != npos) {
                return true;
            }
        }
    }
    return false;
}

std::size_t GridDomain::neighbor(std::size_t k, int axis, int dir) const
{
    return neighbors_[k][2 * static_cast<std::size_t>(axis) + (dir > 0 ? 1 : 0)];
}

bool GridDomain::is_boundary_node(std::size_t k) const
{
    for (int d = 0; d < 2 * dim_; ++d) {
        if (neighbors_[k][static_cast<std::size_t>(d)] == npos) {
            return true;
        }
    }
    return false;
}

std::pair<Point, Point> GridDomain::bounding_box() const
{
    Point lo{0.0, 0.0};
    Point hi{0.0, 0.0};
    for (int d = 0; d < dim_; ++d) {
        lo[d] = origin_[d] + h_ * static_cast<double>(lo_[d]);
        hi[d] = origin_[d] + h_ * static_cast<double>(hi_[d]);
    }
    return {lo, hi};
}

bool GridDomain::operator==(const GridDomain& other) const
{
    return dim_ == other.dim_ && h_ == other.h_ && origin_ == other.origin_ && cells_ == other.cells_;
}

RigidMotion RigidMotion::identity(int dim)
{
    RigidMotion m;
    m.dim = dim;
    if (dim == 1) {
        m.Q = {{{1.0, 0.0}, {0.0, 0.0}}};
    }
    return m;
}

RigidMotion RigidMotion::translation(int dim, Point b)
{
    RigidMotion m = identity(dim);
    m.b = b;
    if (dim == 1) {
        m.b[1] = 0.0;
    }
    return m;
}

RigidMotion RigidMotion::rotation(double angle, Point b)
{
    RigidMotion m;
    m.dim = 2;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    m.Q = {{{c, -s}, {s, c}}};
    m.b = b;
    return m;
}

RigidMotion RigidMotion::rotation_about(double angle, Point center)
{
    RigidMotion m = rotation(angle, {0.0, 0.0});
    const Point rc = m.apply(center);
    m.b = {center[0] - rc[0], center[1] - rc[1]};
    return m;
}

double RigidMotion::orthogonality_defect() const
{
    double worst = 0.0;
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            double s = 0.0;
            for (int k = 0; k < dim; ++k) {
                s += Q[k][i] * Q[k][j];
            }
            worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

double RigidMotion::determinant() const
{
    return dim == 1 ? Q[0][0] : Q[0][0] * Q[1][1] - Q[0][1] * Q[1][0];
}

void RigidMotion::validate() const
{
    if (dim < 1 || dim > kMaxDim) {
        throw DomainError("rigid motion dimension must be 1 or 2");
    }
    if (sign != 1 && sign != -1) {
        throw DomainError("rigid motion sign must be +1 or -1");
    }
    if (!(orthogonality_defect() <= 1e-12) || !(std::abs(std::abs(determinant()) - 1.0) <= 1e-12)) {
        throw DomainError("rigid motion matrix is not orthogonal");
    }
}

Point RigidMotion::apply(const Point& y) const
{
    Point x{0.0, 0.0};
    for (int i = 0; i < dim; ++i) {
        x[i] = b[i];
        for (int j = 0; j < dim; ++j) {
            x[i] += Q[i][j] * y[j];
        }
    }
    return x;
}

Point RigidMotion::apply_inverse(const Point& x) const
{
    Point y{0.0, 0.0};
    for (int j = 0; j < dim; ++j) {
        for (int i = 0; i < dim; ++i) {
            y[j] += Q[i][j] * (x[i] - b[i]);
        }
    }
    return y;
}

GridDomain rasterize(int dim, double h, Point origin, CellIndex lo, CellIndex hi,
                     const std::function<bool(const Point&)>& inside, std::size_t budget)
{
    if (dim < 1 || dim > kMaxDim) {
        throw DomainError("domain dimension must be 1 or 2");
    }
    if (!(h > 0.0)) {
        throw DomainError("cell width must be positive");
    }
    if (dim == 1) {
        lo[1] = 0;
        hi[1] = 1;
    }
    const std::size_t count = checked_box_count(dim, lo, hi);
    if (count > budget) {
        std::ostringstream msg;
        msg << "cell budget exceeded: " << count << " cells requested, budget " << budget;
        throw DomainError(msg.str());
    }
    std::vector<CellIndex> cells;
    for (std::int64_t i = lo[0]; i < hi[0]; ++i) {
        for (std::int64_t j = lo[1]; j < hi[1]; ++j) {
            Point x{origin[0] + h * (static_cast<double>(i) + 0.5), 0.0};
            if (dim == 2) {
                x[1] = origin[1] + h * (static_cast<double>(j) + 0.5);
            }
            if (inside(x)) {
                cells.push_back({i, dim == 2 ? j : 0});
            }
        }
    }
    if (cells.empty()) {
        throw DomainError("rasterization produced no active cells");
    }
    return GridDomain(dim, h, origin, std::move(cells));
}

GridDomain make_box(std::span<const double> lo, std::span<const double> hi, double h, std::size_t budget)
{
    const auto dim = static_cast<int>(lo.size());
    if (lo.size() != hi.size() || dim < 1 || dim > kMaxDim) {
        throw DomainError("box corners must have matching dimension 1 or 2");
    }
    if (!(h > 0.0)) {
        throw DomainError("cell width must be positive");
    }
    CellIndex ilo{0, 0};
    CellIndex ihi{1, 1};
    double cells = 1.0;
    for (int d = 0; d < dim; ++d) {
        if (!(lo[d] < hi[d])) {
            throw DomainError("box has non-positive extent");
        }
        cells *= (hi[d] - lo[d]) / h + 2.0;
        ilo[d] = static_cast<std::int64_t>(std::floor(lo[d] / h));
        ihi[d] = static_cast<std::int64_t>(std::ceil(hi[d] / h));
    }
    if (cells > static_cast<double>(budget)) {
        throw DomainError("cell budget exceeded for box");
    }
    const std::vector<double> l(lo.begin(), lo.end());
    const std::vector<double> u(hi.begin(), hi.end());
    return rasterize(dim, h, {0.0, 0.0}, ilo, ihi,
                     [&](const Point& x) {
                         for (int d = 0; d < dim; ++d) {
                             if (!(x[d] > l[d] && x[d] < u[d])) {
                                 return false;
                             }
                         }
                         return true;
                     },
                     budget);
}

GridDomain make_interval(double a, double b, double h, std::size_t budget)
{
    const std::array<double, 1> lo{a};
    const std::array<double, 1> hi{b};
    return make_box(lo, hi, h, budget);
}

GridDomain make_rectangle(Point lo, Point hi, double h, std::size_t budget)
{
    return make_box(lo, hi, h, budget);
}

std::vector<std::size_t> component_labels(const GridDomain& omega, std::size_t* count)
{
    constexpr auto unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> label(omega.size(), unset);
    std::size_t next = 0;
    std::deque<std::size_t> queue;
    for (std::size_t seed = 0; seed < omega.size(); ++seed) {
        if (label[seed] != unset) {
            continue;
        }
        label[seed] = next;
        queue.push_back(seed);
        while (!queue.empty()) {
            const std::size_t k = queue.front();
            queue.pop_front();
            for (int d = 0; d < omega.dim(); ++d) {
                for (int dir : {-1, 1}) {
                    const std::size_t n = omega.neighbor(k, d, dir);
                    if (n != GridDomain::npos && label[n] == unset) {
                        label[n] = next;
                        queue.push_back(n);
                    }
                }
            }
        }
        ++next;
    }
    if (count != nullptr) {
        *count = next;
    }
    return label;
}

std::vector<GridDomain> connected_components(const GridDomain& omega)
{
    std::size_t count = 0;
    const auto label = component_labels(omega, &count);
    std::vector<std::vector<CellIndex>> parts(count);
    for (std::size_t k = 0; k < omega.size(); ++k) {
        parts[label[k]].push_back(omega.cells()[k]);
    }
    std::vector<GridDomain> out;
    out.reserve(count);
    for (auto& cells : parts) {
        out.emplace_back(omega.dim(), omega.h(), omega.origin(), std::move(cells));
    }
    return out;
}

GridDomain apply_rigid_motion(const GridDomain& omega, const RigidMotion& m, double h_out)
{
    return rigid_image(omega, m, h_out, omega.origin());
}

GridDomain apply_rigid_motion(const GridDomain& omega, const RigidMotion& m, double h_out, const Point& origin)
{
    return rigid_image(omega, m, h_out, origin);
}

double symmetric_difference_measure(const GridDomain& a, const GridDomain& b)
{
    if (a.dim() != b.dim()) {
        throw DomainError("symmetric difference of domains with different dimensions");
    }
    const int dim = a.dim();
    const double h = std::min(a.h(), b.h());
    const Point origin = a.origin();
    const auto [alo, ahi] = a.bounding_box();
    const auto [blo, bhi] = b.bounding_box();
    CellIndex lo{0, 0};
    CellIndex hi{1, 1};
    for (int d = 0; d < dim; ++d) {
        lo[d] = static_cast<std::int64_t>(std::floor((std::min(alo[d], blo[d]) - origin[d]) / h)) - 1;
        hi[d] = static_cast<std::int64_t>(std::ceil((std::max(ahi[d], bhi[d]) - origin[d]) / h)) + 1;
    }
    std::size_t differing = 0;
    for (std::int64_t i = lo[0]; i < hi[0]; ++i) {
        for (std::int64_t j = lo[1]; j < hi[1]; ++j) {
            Point x{origin[0] + h * (static_cast<double>(i) + 0.5), 0.0};
            if (dim == 2) {
                x[1] = origin[1] + h * (static_cast<double>(j) + 0.5);
            }
            if (a.contains(x) != b.contains(x)) {
                ++differing;
            }
        }
    }
    return static_cast<double>(differing) * (dim == 1 ? h : h * h);
}

CongruenceResult congruence_check(const GridDomain& omega1, const GridDomain& omega2, const RigidMotion& m,
                                  double tol)
{
    if (omega1.dim() != omega2.dim()) {
        throw DomainError("congruence check between domains of different dimensions");
    }
    const double h = std::min(omega1.h(), omega2.h());
    const GridDomain image = rigid_image(omega2, m, h, omega1.origin());
    CongruenceResult out;
    out.defect = symmetric_difference_measure(omega1, image);
    out.congruent = out.defect <= tol;
    return out;
}

GridDomain union_of(std::span<const GridDomain> parts)
{
    if (parts.empty()) {
        throw DomainError("union of no domains");
    }
    std::vector<CellIndex> cells;
    for (const auto& part : parts) {
        if (part.dim() != parts[0].dim() || part.h() != parts[0].h() || part.origin() != parts[0].origin()) {
            throw DomainError("union requires domains on a common lattice");
        }
        cells.insert(cells.end(), part.cells().begin(), part.cells().end());
    }
    return GridDomain(parts[0].dim(), parts[0].h(), parts[0].origin(), std::move(cells));
}

bool is_topologically_regular(const GridDomain& omega)
{
    const CellIndex& lo = omega.index_lo();
    const CellIndex& hi = omega.index_hi();
    const int dim = omega.dim();
    for (std::int64_t i = lo[0]; i < hi[0]; ++i) {
        for (std::int64_t j = lo[1]; j < hi[1]; ++j) {
            const CellIndex c{i, j};
            if (omega.find(c) != GridDomain::npos) {
                continue;
            }
            bool enclosed = true;
            for (int d = 0; d < dim && enclosed; ++d) {
                for (int dir : {-1, 1}) {
                    CellIndex n = c;
                    n[d] += dir;
                    if (omega.find(n) == GridDomain::npos) {
                        enclosed = false;
                        break;
                    }
                }
            }
            if (enclosed) {
                return false;
            }
        }
    }
    return true;
}

std::vector<std::pair<double, double>> fat_cantor_intervals(double removed_mass, double min_length)
{
    if (!(removed_mass > 0.0 && removed_mass < 1.0)) {
        throw DomainError("fat Cantor removed mass must lie in (0, 1)");
    }
    if (!(min_length > 0.0)) {
        throw DomainError("fat Cantor minimum interval length must be positive");
    }
    // Stage n removes mass m 2^-n / (1 - 2^-K), split over 2^(n-1) intervals.
    const auto stage_length = [&](int n, int depth) {
        const double scale = 1.0 / (1.0 - std::ldexp(1.0, -depth));
        return removed_mass * std::ldexp(1.0, -n) * scale / std::ldexp(1.0, n - 1);
    };
    int depth = 1;
    if (stage_length(1, 1) < min_length) {
        throw DomainError("grid too coarse to resolve any fat Cantor interval");
    }
    while (depth < 30 && stage_length(depth + 1, depth + 1) >= min_length) {
        ++depth;
    }

    std::vector<std::pair<double, double>> remaining{{0.0, 1.0}};
    std::vector<std::pair<double, double>> removed;
    for (int n = 1; n <= depth; ++n) {
        const double len = stage_length(n, depth);
        std::vector<std::pair<double, double>> next;
        next.reserve(2 * remaining.size());
        for (const auto& [a, b] : remaining) {
            const double mid = 0.5 * (a + b);
            const double l = mid - 0.5 * len;
            const double r = mid + 0.5 * len;
            removed.emplace_back(l, r);
            next.emplace_back(a, l);
            next.emplace_back(r, b);
        }
        remaining = std::move(next);
    }
    std::sort(removed.begin(), removed.end());
    return removed;
}

GridDomain make_fat_cantor_complement(double removed_mass, double h, std::size_t budget)
{
    const auto intervals = fat_cantor_intervals(removed_mass, 4.0 * h);
    const auto n = static_cast<std::int64_t>(std::ceil(1.0 / h));
    return rasterize(1, h, {0.0, 0.0}, {0, 0}, {n, 1},
                     [&](const Point& x) {
                         auto it = std::upper_bound(intervals.begin(), intervals.end(),
                                                    std::make_pair(x[0], std::numeric_limits<double>::infinity()));
                         if (it == intervals.begin()) {
                             return false;
                         }
                         --it;
                         return x[0] > it->first && x[0] < it->second;
                     },
                     budget);
}

}  // namespace sil
