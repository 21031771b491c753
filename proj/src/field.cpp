#include "sil/field.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace sil {

namespace {

void require_finite(std::span<const double> values)
{
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw FieldError("field value is not finite");
        }
    }
}

void require_exponent(double p)
{
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw FieldError("norm exponent must lie in [1, inf)");
    }
}

double norm2(const Point& x, int dim)
{
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
        s += x[d] * x[d];
    }
    return std::sqrt(s);
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    return out;
}

template <class Row>
void read_rows(std::istream& in, const GridDomain& omega, std::size_t value_columns, Row&& on_row)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw FieldError("field CSV is empty");
    }
    const auto dim = static_cast<std::size_t>(omega.dim());
    const std::size_t width = 2 * dim + value_columns;
    std::vector<bool> seen(omega.size(), false);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != width) {
            throw FieldError("field CSV row has " + std::to_string(cells.size()) + " columns, expected " +
                             std::to_string(width));
        }
        CellIndex c{0, 0};
        for (std::size_t d = 0; d < dim; ++d) {
            c[d] = std::stoll(cells[d]);
        }
        const std::size_t k = omega.find(c);
        if (k == GridDomain::npos) {
            throw FieldError("field CSV references a cell outside the domain");
        }
        if (seen[k]) {
            throw FieldError("field CSV lists a cell twice");
        }
        seen[k] = true;
        std::vector<double> vals(value_columns);
        for (std::size_t v = 0; v < value_columns; ++v) {
            vals[v] = std::stod(cells[2 * dim + v]);
        }
        on_row(k, vals);
        ++rows;
    }
    if (rows != omega.size()) {
        throw FieldError("field CSV does not cover every active cell");
    }
}

void write_prefix(std::ostream& out, const GridDomain& omega, std::size_t k)
{
    const auto& c = omega.cells()[k];
    const Point x = omega.center(k);
    for (int d = 0; d < omega.dim(); ++d) {
        out << c[d] << ',';
    }
    for (int d = 0; d < omega.dim(); ++d) {
        out << x[d] << ',';
    }
}

void write_header(std::ostream& out, int dim)
{
    out << (dim == 1 ? "i,x," : "i,j,x,y,");
}

}  // namespace

bool same_domain(const GridDomain& a, const GridDomain& b)
{
    return &a == &b || a == b;
}

Field::Field(DomainPtr domain, std::vector<double> values) : domain_(std::move(domain)), values_(std::move(values))
{
    if (!domain_) {
        throw FieldError("field requires a domain");
    }
    if (values_.size() != domain_->size()) {
        throw FieldError("field value count does not match the number of active cells");
    }
    require_finite(values_);
}

Field Field::constant(DomainPtr domain, double value)
{
    const std::size_t n = domain->size();
    return Field(std::move(domain), std::vector<double>(n, value));
}

Field Field::sample(DomainPtr domain, const ScalarFunction& f)
{
    std::vector<double> values(domain->size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        values[k] = f(domain->center(k));
    }
    return Field(std::move(domain), std::move(values));
}

void Field::require_same_domain(const Field& other) const
{
    if (!same_domain(*domain_, *other.domain_)) {
        throw FieldError("fields live on different domains");
    }
}

namespace {

template <class Op>
Field zip(const Field& a, const Field& b, Op op)
{
    a.require_same_domain(b);
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = op(a[k], b[k]);
    }
    return Field(a.domain_ptr(), std::move(out));
}

template <class Op>
Field map(const Field& a, Op op)
{
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = op(a[k]);
    }
    return Field(a.domain_ptr(), std::move(out));
}

}  // namespace

Field operator+(const Field& a, const Field& b)
{
    return zip(a, b, [](double x, double y) { return x + y; });
}

Field operator-(const Field& a, const Field& b)
{
    return zip(a, b, [](double x, double y) { return x - y; });
}

Field operator*(double c, const Field& a)
{
    return map(a, [c](double x) { return c * x; });
}

Field operator*(const Field& a, const Field& b)
{
    return zip(a, b, [](double x, double y) { return x * y; });
}

Field abs(const Field& u)
{
    return map(u, [](double x) { return std::abs(x); });
}

Field min(const Field& u, const Field& v)
{
    return zip(u, v, [](double x, double y) { return std::min(x, y); });
}

Field max(const Field& u, const Field& v)
{
    return zip(u, v, [](double x, double y) { return std::max(x, y); });
}

Field axpy(const Field& u, double s, const Field& v)
{
    return zip(u, v, [s](double x, double y) { return x + s * y; });
}

bool disjoint(const Field& u, const Field& v)
{
    u.require_same_domain(v);
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (std::min(std::abs(u[k]), std::abs(v[k])) != 0.0) {
            return false;
        }
    }
    return true;
}

VectorField::VectorField(DomainPtr domain, std::vector<Point> values)
    : domain_(std::move(domain)), values_(std::move(values))
{
    if (!domain_) {
        throw FieldError("vector field requires a domain");
    }
    if (values_.size() != domain_->size()) {
        throw FieldError("vector field value count does not match the number of active cells");
    }
    for (auto& v : values_) {
        for (int d = 0; d < kMaxDim; ++d) {
            if (d >= domain_->dim()) {
                v[d] = 0.0;
            } else if (!std::isfinite(v[d])) {
                throw FieldError("vector field entry is not finite");
            }
        }
    }
}

Field VectorField::magnitude() const
{
    std::vector<double> out(size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = norm2(values_[k], domain_->dim());
    }
    return Field(domain_, std::move(out));
}

Field VectorField::component(int i) const
{
    std::vector<double> out(size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = values_[k][i];
    }
    return Field(domain_, std::move(out));
}

VectorField operator+(const VectorField& a, const VectorField& b)
{
    if (!same_domain(a.domain(), b.domain())) {
        throw FieldError("vector fields live on different domains");
    }
    std::vector<Point> out(a.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = {a[k][0] + b[k][0], a[k][1] + b[k][1]};
    }
    return VectorField(a.domain_ptr(), std::move(out));
}

VectorField operator-(const VectorField& a, const VectorField& b)
{
    if (!same_domain(a.domain(), b.domain())) {
        throw FieldError("vector fields live on different domains");
    }
    std::vector<Point> out(a.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = {a[k][0] - b[k][0], a[k][1] - b[k][1]};
    }
    return VectorField(a.domain_ptr(), std::move(out));
}

VectorField gradient(const Field& u)
{
    const GridDomain& omega = u.domain();
    const double h = omega.h();
    std::vector<Point> out(u.size(), Point{0.0, 0.0});
    for (std::size_t k = 0; k < u.size(); ++k) {
        for (int d = 0; d < omega.dim(); ++d) {
            const std::size_t l = omega.neighbor(k, d, -1);
            const std::size_t r = omega.neighbor(k, d, +1);
            const bool has_l = l != GridDomain::npos;
            const bool has_r = r != GridDomain::npos;
            if (has_l && has_r) {
                out[k][d] = (u[r] - u[l]) / (2.0 * h);
            } else if (has_r) {
                out[k][d] = (u[r] - u[k]) / h;
            } else if (has_l) {
                out[k][d] = (u[k] - u[l]) / h;
            }
        }
    }
    return VectorField(u.domain_ptr(), std::move(out));
}

double lp_norm(const Field& u, double p)
{
    require_exponent(p);
    double s = 0.0;
    for (double v : u.values()) {
        s += std::pow(std::abs(v), p);
    }
    return std::pow(s * u.domain().cell_volume(), 1.0 / p);
}

double lp_norm(const VectorField& f, double p)
{
    return lp_norm(f.magnitude(), p);
}

double w1p_norm(const Field& u, double p)
{
    const double a = lp_norm(u, p);
    const double b = lp_norm(gradient(u), p);
    return std::pow(std::pow(a, p) + std::pow(b, p), 1.0 / p);
}

bool interpolate(const Field& u, const Point& x, double& value)
{
    const GridDomain& omega = u.domain();
    const int dim = omega.dim();
    const double h = omega.h();
    CellIndex base{0, 0};
    Point frac{0.0, 0.0};
    for (int d = 0; d < dim; ++d) {
        const double t = (x[d] - omega.origin()[d]) / h - 0.5;
        const double f = std::floor(t);
        base[d] = static_cast<std::int64_t>(f);
        frac[d] = t - f;
    }
    double acc = 0.0;
    double weight = 0.0;
    const int corners = 1 << dim;
    for (int c = 0; c < corners; ++c) {
        CellIndex n = base;
        double w = 1.0;
        for (int d = 0; d < dim; ++d) {
            const bool up = ((c >> d) & 1) != 0;
            n[d] += up ? 1 : 0;
            w *= up ? frac[d] : 1.0 - frac[d];
        }
        const std::size_t k = omega.find(n);
        if (k != GridDomain::npos) {
            acc += w * u[k];
            weight += w;
        }
    }
    if (weight > 1e-12) {
        value = acc / weight;
        return true;
    }
    // Nearest active node within the one-cell halo of x's cell.
    const CellIndex home = omega.cell_of(x);
    const int span1 = dim == 2 ? 1 : 0;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = GridDomain::npos;
    for (int a = -1; a <= 1; ++a) {
        for (int b = -span1; b <= span1; ++b) {
            const std::size_t k = omega.find({home[0] + a, home[1] + b});
            if (k == GridDomain::npos) {
                continue;
            }
            const Point c = omega.center(k);
            double dist = 0.0;
            for (int d = 0; d < dim; ++d) {
                dist += (c[d] - x[d]) * (c[d] - x[d]);
            }
            if (dist < best) {
                best = dist;
                best_k = k;
            }
        }
    }
    if (best_k == GridDomain::npos) {
        value = 0.0;
        return false;
    }
    value = u[best_k];
    return true;
}

double probe_rate(double p)
{
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw FieldError("exponential probes require p in (1, inf)");
    }
    return std::pow(p - 1.0, -1.0 / p);
}

ScalarFunction exponential_probe_function(int axis, int sign, double p, int dim)
{
    if (axis < 0 || axis >= dim) {
        throw FieldError("probe axis out of range");
    }
    if (sign != 1 && sign != -1) {
        throw FieldError("probe sign must be +1 or -1");
    }
    const double rate = static_cast<double>(sign) * probe_rate(p);
    return [rate, axis](const Point& x) { return std::exp(rate * x[axis]); };
}

Field exponential_probe(const DomainPtr& omega, int axis, int sign, double p)
{
    return Field::sample(omega, exponential_probe_function(axis, sign, p, omega->dim()));
}

ScalarFunction bump_function(Point center, double radius, int dim)
{
    if (!(radius > 0.0)) {
        throw FieldError("bump radius must be positive");
    }
    return [center, radius, dim](const Point& x) {
        double r2 = 0.0;
        for (int d = 0; d < dim; ++d) {
            r2 += (x[d] - center[d]) * (x[d] - center[d]);
        }
        const double t = 1.0 - r2 / (radius * radius);
        return t > 0.0 ? t * t : 0.0;
    };
}

Field bump(const DomainPtr& omega, Point center, double radius)
{
    const int dim = omega->dim();
    const double h = omega->h();
    const double reach = radius + 2.0 * h;
    const CellIndex lo = omega->cell_of({center[0] - reach, center[1] - reach});
    const CellIndex hi = omega->cell_of({center[0] + reach, center[1] + reach});
    for (std::int64_t i = lo[0]; i <= hi[0]; ++i) {
        for (std::int64_t j = (dim == 2 ? lo[1] : 0); j <= (dim == 2 ? hi[1] : 0); ++j) {
            const CellIndex c{i, j};
            const Point x = omega->center_of(c);
            double r2 = 0.0;
            for (int d = 0; d < dim; ++d) {
                r2 += (x[d] - center[d]) * (x[d] - center[d]);
            }
            if (r2 <= reach * reach && omega->find(c) == GridDomain::npos) {
                throw FieldError("bump support is not contained in the domain");
            }
        }
    }
    return Field::sample(omega, bump_function(center, radius, dim));
}

bool vanishes_near_boundary(const Field& u, int layers)
{
    const GridDomain& omega = u.domain();
    constexpr auto unset = std::numeric_limits<int>::max();
    std::vector<int> depth(omega.size(), unset);
    std::deque<std::size_t> queue;
    for (std::size_t k = 0; k < omega.size(); ++k) {
        if (omega.is_boundary_node(k)) {
            depth[k] = 1;
            queue.push_back(k);
        }
    }
    while (!queue.empty()) {
        const std::size_t k = queue.front();
        queue.pop_front();
        if (depth[k] >= layers) {
            continue;
        }
        for (int d = 0; d < omega.dim(); ++d) {
            for (int dir : {-1, 1}) {
                const std::size_t n = omega.neighbor(k, d, dir);
                if (n != GridDomain::npos && depth[n] == unset) {
                    depth[n] = depth[k] + 1;
                    queue.push_back(n);
                }
            }
        }
    }
    for (std::size_t k = 0; k < omega.size(); ++k) {
        if (depth[k] <= layers && u[k] != 0.0) {
            return false;
        }
    }
    return true;
}

void write_csv(std::ostream& out, const Field& u)
{
    const GridDomain& omega = u.domain();
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    write_header(out, omega.dim());
    out << "value\n";
    for (std::size_t k = 0; k < u.size(); ++k) {
        write_prefix(out, omega, k);
        out << u[k] << '\n';
    }
    out.precision(old);
}

void write_csv(std::ostream& out, const VectorField& f)
{
    const GridDomain& omega = f.domain();
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    write_header(out, omega.dim());
    out << (omega.dim() == 1 ? "value0\n" : "value0,value1\n");
    for (std::size_t k = 0; k < f.size(); ++k) {
        write_prefix(out, omega, k);
        out << f[k][0];
        if (omega.dim() == 2) {
            out << ',' << f[k][1];
        }
        out << '\n';
    }
    out.precision(old);
}

Field read_field_csv(std::istream& in, const DomainPtr& omega)
{
    std::vector<double> values(omega->size(), 0.0);
    read_rows(in, *omega, 1, [&](std::size_t k, const std::vector<double>& v) { values[k] = v[0]; });
    return Field(omega, std::move(values));
}

VectorField read_vector_field_csv(std::istream& in, const DomainPtr& omega)
{
    const auto dim = static_cast<std::size_t>(omega->dim());
    std::vector<Point> values(omega->size(), Point{0.0, 0.0});
    read_rows(in, *omega, dim, [&](std::size_t k, const std::vector<double>& v) {
        for (std::size_t d = 0; d < dim; ++d) {
            values[k][d] = v[d];
        }
    });
    return VectorField(omega, std::move(values));
}

}  // namespace sil
