#pragma once

#include "sil/grid_domain.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace sil {

class FieldError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using ScalarFunction = std::function<double(const Point&)>;
using MapFunction = std::function<Point(const Point&)>;

/// Nodal samples (one per active cell center) of a real function on a GridDomain.
class Field {
public:
    Field(DomainPtr domain, std::vector<double> values);

    static Field constant(DomainPtr domain, double value);
    static Field sample(DomainPtr domain, const ScalarFunction& f);

    [[nodiscard]] const GridDomain& domain() const { return *domain_; }
    [[nodiscard]] const DomainPtr& domain_ptr() const { return domain_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t k) const { return values_[k]; }

    /// Node values on a shared domain; throws FieldError on mismatch.
    void require_same_domain(const Field& other) const;

    friend Field operator+(const Field& a, const Field& b);
    friend Field operator-(const Field& a, const Field& b);
    friend Field operator*(double c, const Field& a);
    friend Field operator*(const Field& a, const Field& b);

private:
    DomainPtr domain_;
    std::vector<double> values_;
};

Field abs(const Field& u);
Field min(const Field& u, const Field& v);
Field max(const Field& u, const Field& v);

/// u + s v without allocating intermediates twice.
Field axpy(const Field& u, double s, const Field& v);

/// True iff |u| ∧ |v| vanishes at every node.
bool disjoint(const Field& u, const Field& v);

/// One dim-vector per active node.
class VectorField {
public:
    VectorField(DomainPtr domain, std::vector<Point> values);

    [[nodiscard]] const GridDomain& domain() const { return *domain_; }
    [[nodiscard]] const DomainPtr& domain_ptr() const { return domain_; }
    [[nodiscard]] std::span<const Point> values() const { return values_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] const Point& operator[](std::size_t k) const { return values_[k]; }

    /// Pointwise euclidean norm.
    [[nodiscard]] Field magnitude() const;
    /// The i-th coordinate as a scalar field.
    [[nodiscard]] Field component(int i) const;

    friend VectorField operator+(const VectorField& a, const VectorField& b);
    friend VectorField operator-(const VectorField& a, const VectorField& b);

private:
    DomainPtr domain_;
    std::vector<Point> values_;
};

bool same_domain(const GridDomain& a, const GridDomain& b);

/// Central differences where both face neighbours are active, one-sided
/// differences otherwise, zero along axes with no active neighbour.
VectorField gradient(const Field& u);

double lp_norm(const Field& u, double p);
/// L^p norm of the pointwise euclidean magnitude.
double lp_norm(const VectorField& f, double p);
double w1p_norm(const Field& u, double p);

/// Multilinear interpolation of nodal values at x.
///
/// Inactive stencil nodes are dropped and the remaining weights renormalised;
/// a point whose whole stencil is inactive takes the value of the nearest active
/// node within one cell. Returns false (and leaves value at 0) if x is farther
/// than one cell from every active cell.
bool interpolate(const Field& u, const Point& x, double& value);

/// α = (p-1)^(-1/p), the rate of the exponential solutions of Δ_p w = |w|^{p-2} w.
double probe_rate(double p);
/// x ↦ exp(sign · α · x_axis).
ScalarFunction exponential_probe_function(int axis, int sign, double p, int dim);
Field exponential_probe(const DomainPtr& omega, int axis, int sign, double p);

/// Quartic bump (1 - (r/R)^2)^2 on the ball of radius R, zero elsewhere.
ScalarFunction bump_function(Point center, double radius, int dim);
/// Throws FieldError unless every cell meeting the closed ball is an active,
/// non-boundary cell.
Field bump(const DomainPtr& omega, Point center, double radius);

/// u vanishes at every node within `layers` face steps of the complement.
bool vanishes_near_boundary(const Field& u, int layers = 2);

/// CSV with columns (index..., x..., value).
void write_csv(std::ostream& out, const Field& u);
/// CSV with columns (index..., x..., value0, ...).
void write_csv(std::ostream& out, const VectorField& f);
/// Reads the CSV layout written above; rows are matched to nodes by index.
Field read_field_csv(std::istream& in, const DomainPtr& omega);
VectorField read_vector_field_csv(std::istream& in, const DomainPtr& omega);

}  // namespace sil
