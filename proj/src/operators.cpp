#include "sil/operators.hpp"

#include "sil/forms.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace sil {

namespace {

constexpr std::size_t npos = GridDomain::npos;

double distance(const Point& a, const Point& b, int dim)
{
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
        s += (a[d] - b[d]) * (a[d] - b[d]);
    }
    return std::sqrt(s);
}

}  // namespace

Field Operator::apply(const ScalarFunction& u) const
{
    return apply(Field::sample(source(), u));
}

CompositionOperator::CompositionOperator(std::string name, DomainPtr source, DomainPtr target,
                                         std::vector<double> weight, std::vector<Point> map)
    : name_(std::move(name)),
      source_(std::move(source)),
      target_(std::move(target)),
      weight_(std::move(weight)),
      map_(std::move(map))
{
    if (!source_ || !target_) {
        throw OperatorError("composition operator requires source and target domains");
    }
    if (source_->dim() != target_->dim()) {
        throw OperatorError("source and target dimensions differ");
    }
    if (weight_.size() != target_->size() || map_.size() != target_->size()) {
        throw OperatorError("weight and map must have one entry per target node");
    }
    outside_.resize(target_->size());
    for (std::size_t k = 0; k < map_.size(); ++k) {
        if (!std::isfinite(weight_[k])) {
            throw OperatorError("composition weight is not finite");
        }
        bool finite = true;
        for (int d = 0; d < target_->dim(); ++d) {
            finite = finite && std::isfinite(map_[k][d]);
        }
        outside_[k] = !finite || !source_->near(map_[k]);
    }
}

CompositionOperator CompositionOperator::from_functions(std::string name, DomainPtr source, DomainPtr target,
                                                        const ScalarFunction& weight, const MapFunction& map)
{
    std::vector<double> g(target->size());
    std::vector<Point> xi(target->size());
    for (std::size_t k = 0; k < target->size(); ++k) {
        const Point y = target->center(k);
        g[k] = weight(y);
        xi[k] = map(y);
    }
    return CompositionOperator(std::move(name), std::move(source), std::move(target), std::move(g),
                               std::move(xi));
}

std::size_t CompositionOperator::outside_count() const
{
    return static_cast<std::size_t>(std::count(outside_.begin(), outside_.end(), true));
}

Field CompositionOperator::apply(const Field& u) const
{
    if (!same_domain(u.domain(), *source_)) {
        throw OperatorError("operator applied to a field on the wrong domain");
    }
    std::vector<double> out(target_->size(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (outside_[k]) {
            continue;
        }
        double value = 0.0;
        if (interpolate(u, map_[k], value)) {
            out[k] = weight_[k] * value;
        }
    }
    return Field(target_, std::move(out));
}

Field CompositionOperator::apply(const ScalarFunction& u) const
{
    std::vector<double> out(target_->size(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (!outside_[k]) {
            out[k] = weight_[k] * u(map_[k]);
        }
    }
    return Field(target_, std::move(out));
}

FunctionOperator::FunctionOperator(std::string name, DomainPtr source, DomainPtr target, Fn fn)
    : name_(std::move(name)), source_(std::move(source)), target_(std::move(target)), fn_(std::move(fn))
{
    if (!source_ || !target_ || !fn_) {
        throw OperatorError("function operator requires domains and a callable");
    }
}

Field FunctionOperator::apply(const Field& u) const
{
    if (!same_domain(u.domain(), *source_)) {
        throw OperatorError("operator applied to a field on the wrong domain");
    }
    Field out = fn_(u);
    if (!same_domain(out.domain(), *target_)) {
        throw OperatorError("operator produced a field on the wrong domain");
    }
    return out;
}

double sinh_weight(double y)
{
    return std::sqrt(std::sinh(2.0 * y));
}

double sinh_weight_derivative(double y)
{
    return std::cosh(2.0 * y) / std::sqrt(std::sinh(2.0 * y));
}

double artanh_map(double y)
{
    return -std::atanh(std::exp(-2.0 * y));
}

double artanh_map_derivative(double y)
{
    return 1.0 / std::sinh(2.0 * y);
}

GridDomain example_4_8_omega2(double h)
{
    return make_interval(1.0, 2.0, h);
}

GridDomain example_4_8_omega1(double h)
{
    return make_interval(artanh_map(1.0), artanh_map(2.0), h);
}

GridDomain example_5_4_omega1(double h)
{
    return make_rectangle({0.0, -1.0}, {1.0, 1.0}, h);
}

GridDomain example_5_4_omega2(double h)
{
    const GridDomain lower = make_rectangle({0.0, -2.0}, {1.0, -1.0}, h);
    const GridDomain upper = make_rectangle({0.0, 1.0}, {1.0, 2.0}, h);
    const std::array parts{lower, upper};
    return union_of(parts);
}

CompositionOperator identity_operator(const DomainPtr& omega)
{
    return inclusion_operator(omega, omega);
}

CompositionOperator inclusion_operator(const DomainPtr& source, const DomainPtr& target)
{
    return CompositionOperator::from_functions(
        source == target ? "identity" : "inclusion", source, target, [](const Point&) { return 1.0; },
        [](const Point& y) { return y; });
}

CompositionOperator scaled_identity(const DomainPtr& omega, double factor)
{
    return CompositionOperator::from_functions(
        "scaled_identity", omega, omega, [factor](const Point&) { return factor; },
        [](const Point& y) { return y; });
}

CompositionOperator example_4_8_operator(double h)
{
    auto source = share(example_4_8_omega1(h));
    auto target = share(example_4_8_omega2(h));
    return CompositionOperator::from_functions(
        "example_4_8", std::move(source), std::move(target), [](const Point& y) { return sinh_weight(y[0]); },
        [](const Point& y) { return Point{artanh_map(y[0]), 0.0}; });
}

CompositionOperator example_5_4_operator(double h)
{
    auto source = share(example_5_4_omega1(h));
    auto target = share(example_5_4_omega2(h));
    return CompositionOperator::from_functions(
        "example_5_4", std::move(source), std::move(target), [](const Point&) { return 1.0; },
        [](const Point& y) {
            const double s = y[1] > 0.0 ? 1.0 : (y[1] < 0.0 ? -1.0 : 0.0);
            return Point{y[0], y[1] - s};
        });
}

CompositionOperator rigid_operator(const DomainPtr& source, const DomainPtr& target,
                                   std::span<const RigidPiece> pieces)
{
    std::size_t count = 0;
    const auto label = component_labels(*target, &count);
    std::vector<const RigidPiece*> by_component(count, nullptr);
    for (const auto& piece : pieces) {
        piece.motion.validate();
        if (piece.motion.dim != target->dim()) {
            throw OperatorError("rigid piece dimension does not match target");
        }
        if (piece.component >= count) {
            throw OperatorError("rigid piece references a missing component");
        }
        if (by_component[piece.component] != nullptr) {
            throw OperatorError("two rigid pieces for one component");
        }
        by_component[piece.component] = &piece;
    }
    std::vector<double> g(target->size());
    std::vector<Point> xi(target->size());
    for (std::size_t k = 0; k < target->size(); ++k) {
        const RigidPiece* piece = by_component[label[k]];
        if (piece == nullptr) {
            throw OperatorError("target component has no rigid piece");
        }
        g[k] = static_cast<double>(piece->motion.sign);
        xi[k] = piece->motion.apply(target->center(k));
    }
    return CompositionOperator("rigid", source, target, std::move(g), std::move(xi));
}

CompositionOperator tabulated_operator(const DomainPtr& source, const Field& weight, const VectorField& map)
{
    if (!same_domain(weight.domain(), map.domain())) {
        throw OperatorError("tabulated weight and map live on different domains");
    }
    std::vector<double> g(weight.values().begin(), weight.values().end());
    std::vector<Point> xi(map.values().begin(), map.values().end());
    return CompositionOperator("tabulated", source, weight.domain_ptr(), std::move(g), std::move(xi));
}

FunctionOperator averaging_operator(const DomainPtr& omega, int axis)
{
    if (axis < 0 || axis >= omega->dim()) {
        throw OperatorError("averaging axis out of range");
    }
    std::vector<std::size_t> mirror(omega->size());
    const std::int64_t span = omega->index_lo()[axis] + omega->index_hi()[axis] - 1;
    for (std::size_t k = 0; k < omega->size(); ++k) {
        CellIndex c = omega->cells()[k];
        c[axis] = span - c[axis];
        mirror[k] = omega->find(c);
        if (mirror[k] == npos) {
            throw OperatorError("averaging operator needs a domain symmetric about its box center");
        }
    }
    return FunctionOperator("averaging", omega, omega, [mirror = std::move(mirror)](const Field& u) {
        std::vector<double> out(u.size());
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k] = 0.5 * (u[k] + u[mirror[k]]);
        }
        return Field(u.domain_ptr(), std::move(out));
    });
}

std::unique_ptr<Operator> make_operator(const OperatorSpec& spec, double h)
{
    auto need = [](const DomainPtr& d, const char* what) -> const DomainPtr& {
        if (!d) {
            throw OperatorError(std::string("operator spec is missing its ") + what + " domain");
        }
        return d;
    };
    std::unique_ptr<CompositionOperator> op;
    if (const auto* b = std::get_if<OperatorSpec::Builtin>(&spec.variant)) {
        if (b->name == "example_4_8") {
            op = std::make_unique<CompositionOperator>(example_4_8_operator(h));
        } else if (b->name == "example_5_4") {
            op = std::make_unique<CompositionOperator>(example_5_4_operator(h));
        } else if (b->name == "identity") {
            const DomainPtr& d = spec.source ? spec.source : need(spec.target, "target");
            op = std::make_unique<CompositionOperator>(identity_operator(d));
        } else if (b->name == "inclusion") {
            op = std::make_unique<CompositionOperator>(
                inclusion_operator(need(spec.source, "source"), need(spec.target, "target")));
        } else if (b->name == "scaled_identity") {
            const DomainPtr& d = spec.source ? spec.source : need(spec.target, "target");
            op = std::make_unique<CompositionOperator>(scaled_identity(d, 2.0));
        } else {
            throw OperatorError("unknown builtin operator: " + b->name);
        }
    } else if (const auto* r = std::get_if<OperatorSpec::Rigid>(&spec.variant)) {
        op = std::make_unique<CompositionOperator>(
            rigid_operator(need(spec.source, "source"), need(spec.target, "target"), r->pieces));
    } else {
        const auto& t = std::get<OperatorSpec::Tabulated>(spec.variant);
        op = std::make_unique<CompositionOperator>(tabulated_operator(need(spec.source, "source"), t.weight, t.map));
    }
    validate(*op);
    return op;
}

void validate(const CompositionOperator& op)
{
    const GridDomain& src = *op.source();
    auto [lo, hi] = src.bounding_box();
    const double tol = src.h();
    for (std::size_t k = 0; k < op.map().size(); ++k) {
        for (int d = 0; d < src.dim(); ++d) {
            const double x = op.map()[k][d];
            if (!(x >= lo[d] - tol && x <= hi[d] + tol)) {
                throw OperatorError("ξ maps a target node outside the source bounding box");
            }
        }
    }
}

double isometry_defect(const Operator& op, std::span<const Field> samples, double p)
{
    if (samples.empty()) {
        throw OperatorError("isometry defect needs at least one sample");
    }
    double worst = 0.0;
    for (const Field& u : samples) {
        worst = std::max(worst, std::abs(w1p_norm(op.apply(u), p) - w1p_norm(u, p)));
    }
    return worst;
}

DisjointnessResult disjointness_defect(const Operator& op, std::span<const std::pair<Field, Field>> pairs, double p,
                                       double band)
{
    if (!(p >= 1.0)) {
        throw OperatorError("disjointness exponent must lie in [1, inf)");
    }
    const GridDomain& target = *op.target();
    const int dim = target.dim();
    const double h = target.h();
    if (!(band > 0.0)) {
        band = 2.0 * h;
    }
    const auto reach = static_cast<std::int64_t>(std::ceil(band / h - 1e-9));
    DisjointnessResult out;
    for (const auto& [u, v] : pairs) {
        if (!disjoint(u, v)) {
            throw OperatorError("supplied pair is not disjoint");
        }
        const Field tu = op.apply(u);
        const Field tv = op.apply(v);
        const auto in_both = [&](std::size_t k) { return tu[k] != 0.0 && tv[k] != 0.0; };
        double raw = 0.0;
        double deep = 0.0;
        for (std::size_t k = 0; k < target.size(); ++k) {
            const double overlap = std::min(std::abs(tu[k]), std::abs(tv[k]));
            if (overlap == 0.0) {
                continue;
            }
            const double term = std::pow(overlap, p);
            raw += term;
            const CellIndex c = target.cells()[k];
            const Point y = target.center(k);
            bool interior = true;
            for (std::int64_t a = -reach; a <= reach && interior; ++a) {
                for (std::int64_t b = (dim == 2 ? -reach : 0); b <= (dim == 2 ? reach : 0); ++b) {
                    const CellIndex n{c[0] + a, c[1] + b};
                    if (distance(target.center_of(n), y, dim) > band + 1e-12 * h) {
                        continue;
                    }
                    const std::size_t m = target.find(n);
                    if (m == npos || !in_both(m)) {
                        interior = false;
                        break;
                    }
                }
            }
            if (interior) {
                deep += term;
            }
        }
        const double vol = target.cell_volume();
        out.raw = std::max(out.raw, std::pow(raw * vol, 1.0 / p));
        out.defect = std::max(out.defect, std::pow(deep * vol, 1.0 / p));
    }
    return out;
}

double intertwining_defect(const Operator& op, std::span<const std::pair<Field, Field>> trials, double p)
{
    if (trials.empty()) {
        throw OperatorError("intertwining defect needs at least one trial");
    }
    double worst = 0.0;
    for (const auto& [u, v] : trials) {
        if (!vanishes_near_boundary(v, 2)) {
            throw OperatorError("trial v does not vanish near the source boundary");
        }
        const Field tv = op.apply(v);
        if (!vanishes_near_boundary(tv, 2)) {
            throw OperatorError("image T v does not vanish near the target boundary");
        }
        const Field tu = op.apply(u);
        worst = std::max(worst, std::abs(form_a(tu, tv, p) - form_a(u, v, p)));
    }
    return worst;
}

ReconstructionResult reconstruct(const Operator& op, double p)
{
    const double alpha = probe_rate(p);
    const DomainPtr& target = op.target();
    const int dim = target->dim();
    const std::size_t n = target->size();

    std::vector<double> g(n, 0.0);
    std::vector<Point> xi(n, Point{0.0, 0.0});
    std::vector<bool> zero(n, false);
    double spread = 0.0;
    std::vector<double> g0(n, 0.0);
    for (int j = 0; j < dim; ++j) {
        const Field plus = op.apply(exponential_probe_function(j, +1, p, op.source()->dim()));
        const Field minus = op.apply(exponential_probe_function(j, -1, p, op.source()->dim()));
        bool any = false;
        for (std::size_t k = 0; k < n; ++k) {
            any = any || plus[k] != 0.0 || minus[k] != 0.0;
        }
        if (!any) {
            throw OperatorError("probe images vanish identically; operator is not of composition type");
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double prod = plus[k] * minus[k];
            if (!(prod > 0.0)) {
                zero[k] = true;
                continue;
            }
            const double gj = std::copysign(std::sqrt(prod), plus[k]);
            xi[k][j] = std::log(plus[k] / minus[k]) / (2.0 * alpha);
            if (j == 0) {
                g0[k] = gj;
            } else {
                spread = std::max(spread, std::abs(gj - g0[k]));
            }
        }
    }
    std::size_t zero_cells = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (zero[k]) {
            ++zero_cells;
            xi[k] = Point{0.0, 0.0};
        } else {
            g[k] = g0[k];
        }
    }
    return ReconstructionResult{Field(target, std::move(g)), VectorField(target, std::move(xi)), std::move(zero),
                                zero_cells, spread};
}

bool RigidFitReport::rigid(double tol) const
{
    return orthogonality_defect <= tol && grad_g_defect <= tol && weight_defect <= tol;
}

namespace {

// Nodes whose finite-difference stencil avoids the zero set.
std::vector<bool> valid_nodes(const ReconstructionResult& rec)
{
    const GridDomain& omega = rec.g_hat.domain();
    std::vector<bool> valid(omega.size(), true);
    for (std::size_t k = 0; k < omega.size(); ++k) {
        if (rec.zero_set[k]) {
            valid[k] = false;
            continue;
        }
        for (int d = 0; d < omega.dim(); ++d) {
            for (int dir : {-1, 1}) {
                const std::size_t m = omega.neighbor(k, d, dir);
                if (m != npos && rec.zero_set[m]) {
                    valid[k] = false;
                }
            }
        }
    }
    return valid;
}

using Jacobian = std::array<Point, kMaxDim>;

std::vector<Jacobian> map_jacobian(const ReconstructionResult& rec)
{
    const int dim = rec.xi_hat.domain().dim();
    std::vector<Jacobian> jac(rec.xi_hat.size());
    for (int i = 0; i < dim; ++i) {
        const VectorField grad = gradient(rec.xi_hat.component(i));
        for (std::size_t k = 0; k < jac.size(); ++k) {
            jac[k][i] = grad[k];
        }
    }
    return jac;
}

}  // namespace

RigidFitReport rigid_motion_fit(const ReconstructionResult& rec)
{
    const GridDomain& omega = rec.g_hat.domain();
    const int dim = omega.dim();
    const auto valid = valid_nodes(rec);
    const auto jac = map_jacobian(rec);
    const VectorField grad_g = gradient(rec.g_hat);

    double orth = 0.0;
    double grad_defect = 0.0;
    double weight_defect = 0.0;
    std::vector<double> c(omega.size(), 0.0);
    for (std::size_t k = 0; k < omega.size(); ++k) {
        double c2 = 0.0;
        for (int d = 0; d < dim; ++d) {
            c2 += jac[k][0][d] * jac[k][0][d];
        }
        c[k] = std::sqrt(c2);
        if (!valid[k]) {
            continue;
        }
        for (int a = 0; a < dim; ++a) {
            for (int b = 0; b < dim; ++b) {
                double s = 0.0;
                for (int i = 0; i < dim; ++i) {
                    s += jac[k][i][a] * jac[k][i][b];
                }
                orth = std::max(orth, std::abs(s - (a == b ? 1.0 : 0.0)));
            }
        }
        double gg = 0.0;
        for (int d = 0; d < dim; ++d) {
            gg += grad_g[k][d] * grad_g[k][d];
        }
        grad_defect = std::max(grad_defect, std::sqrt(gg));
        weight_defect = std::max(weight_defect, std::abs(std::abs(rec.g_hat[k]) - 1.0));
    }

    std::size_t count = 0;
    const auto label = component_labels(omega, &count);
    std::vector<ComponentFit> fits;
    for (std::size_t comp = 0; comp < count; ++comp) {
        std::vector<std::size_t> nodes;
        for (std::size_t k = 0; k < omega.size(); ++k) {
            if (label[k] == comp && !rec.zero_set[k]) {
                nodes.push_back(k);
            }
        }
        if (nodes.size() < static_cast<std::size_t>(dim + 1)) {
            throw OperatorError("component has fewer than dim + 1 usable nodes for a rigid fit");
        }
        Eigen::MatrixXd design(static_cast<Eigen::Index>(nodes.size()), dim + 1);
        Eigen::MatrixXd rhs(static_cast<Eigen::Index>(nodes.size()), dim);
        Eigen::VectorXd centroid_y = Eigen::VectorXd::Zero(dim);
        Eigen::VectorXd centroid_x = Eigen::VectorXd::Zero(dim);
        double sign_sum = 0.0;
        for (std::size_t r = 0; r < nodes.size(); ++r) {
            const Point y = omega.center(nodes[r]);
            const Point& x = rec.xi_hat[nodes[r]];
            const auto row = static_cast<Eigen::Index>(r);
            for (int d = 0; d < dim; ++d) {
                design(row, d) = y[d];
                rhs(row, d) = x[d];
                centroid_y(d) += y[d];
                centroid_x(d) += x[d];
            }
            design(row, dim) = 1.0;
            sign_sum += rec.g_hat[nodes[r]];
        }
        centroid_y /= static_cast<double>(nodes.size());
        centroid_x /= static_cast<double>(nodes.size());
        // Least-squares affine fit x ≈ A y + t, solved in centred coordinates.
        Eigen::MatrixXd centred = design.leftCols(dim).rowwise() - centroid_y.transpose();
        Eigen::MatrixXd target_c = rhs.rowwise() - centroid_x.transpose();
        const Eigen::MatrixXd a_t = centred.colPivHouseholderQr().solve(target_c);
        const Eigen::MatrixXd affine = a_t.transpose();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(affine, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Eigen::MatrixXd q = svd.matrixU() * svd.matrixV().transpose();
        const Eigen::VectorXd b = centroid_x - q * centroid_y;

        ComponentFit fit;
        fit.component = comp;
        fit.nodes = nodes.size();
        fit.motion.dim = dim;
        fit.motion.Q = Matrix{};
        fit.motion.b = Point{0.0, 0.0};
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) {
                fit.motion.Q[i][j] = q(i, j);
            }
            fit.motion.b[i] = b(i);
        }
        fit.motion.sign = sign_sum < 0.0 ? -1 : 1;
        for (std::size_t k : nodes) {
            const Point model = fit.motion.apply(omega.center(k));
            fit.fit_residual = std::max(fit.fit_residual, distance(model, rec.xi_hat[k], dim));
        }
        fits.push_back(fit);
    }
    return RigidFitReport{std::move(fits), orth, grad_defect, weight_defect, Field(rec.g_hat.domain_ptr(), c)};
}

DefectSets defect_sets(const ReconstructionResult& rec, const GridDomain& omega1)
{
    const GridDomain& omega2 = rec.xi_hat.domain();
    if (omega1.dim() != omega2.dim()) {
        throw OperatorError("defect sets between domains of different dimensions");
    }
    const int dim = omega2.dim();
    const auto valid = valid_nodes(rec);
    const auto jac = map_jacobian(rec);

    DefectSets out;
    std::vector<CellIndex> u2_cells;
    std::set<CellIndex> u1_cells;
    for (std::size_t k = 0; k < omega2.size(); ++k) {
        const Point& x = rec.xi_hat[k];
        if (rec.zero_set[k] || !omega1.near(x)) {
            out.n2_nodes.push_back(k);
            continue;
        }
        u2_cells.push_back(omega2.cells()[k]);

        // Splat the image of the cell, subsampled finely enough for the local
        // stretch of ξ that no covered source cell is skipped.
        Jacobian j{};
        double frob = 0.0;
        if (valid[k]) {
            j = jac[k];
            for (int a = 0; a < dim; ++a) {
                for (int b = 0; b < dim; ++b) {
                    frob += j[a][b] * j[a][b];
                }
            }
        }
        const int sub = std::clamp(static_cast<int>(std::ceil(2.0 * std::sqrt(frob) * omega2.h() / omega1.h())), 1, 16);
        const int sub1 = dim == 2 ? sub : 1;
        for (int a = 0; a < sub; ++a) {
            for (int b = 0; b < sub1; ++b) {
                Point delta{omega2.h() * ((a + 0.5) / sub - 0.5), 0.0};
                if (dim == 2) {
                    delta[1] = omega2.h() * ((b + 0.5) / sub - 0.5);
                }
                Point img = x;
                for (int r = 0; r < dim; ++r) {
                    for (int s = 0; s < dim; ++s) {
                        img[r] += j[r][s] * delta[s];
                    }
                }
                const CellIndex cell = omega1.cell_of(img);
                if (omega1.find(cell) != npos) {
                    u1_cells.insert(cell);
                }
            }
        }
    }
    if (!u2_cells.empty()) {
        out.u2.emplace(dim, omega2.h(), omega2.origin(), std::move(u2_cells));
    }
    double covered = 0.0;
    if (!u1_cells.empty()) {
        out.u1.emplace(dim, omega1.h(), omega1.origin(), std::vector<CellIndex>(u1_cells.begin(), u1_cells.end()));
        covered = out.u1->measure();
    }
    out.n1_measure = std::max(0.0, omega1.measure() - covered);
    return out;
}

DefectReport CongruenceReport::defect_report() const
{
    DefectReport r;
    r.orthogonality = fit.orthogonality_defect;
    r.grad_g = fit.grad_g_defect;
    r.weight = fit.weight_defect;
    r.n1_measure = defects.n1_measure;
    r.n2_cells = defects.n2_cells();
    return r;
}

namespace {

// Builds w on the source with T w ≈ φ by pulling φ / g back through the
// fitted inverse motions; returns false if some support node of φ has no
// preimage in the source.
bool h3_preimage(const Operator& op, const RigidFitReport& fit, const Field& phi, double& defect)
{
    const GridDomain& source = *op.source();
    const GridDomain& target = *op.target();
    std::size_t count = 0;
    const auto label = component_labels(target, &count);
    std::vector<double> w(source.size(), 0.0);
    for (std::size_t k = 0; k < source.size(); ++k) {
        const Point x = source.center(k);
        for (const auto& cf : fit.components) {
            const Point y = cf.motion.apply_inverse(x);
            const std::size_t m = target.find(target.cell_of(y));
            if (m == npos || label[m] != cf.component) {
                continue;
            }
            double value = 0.0;
            if (interpolate(phi, y, value)) {
                w[k] = value / static_cast<double>(cf.motion.sign);
            }
            break;
        }
    }
    const Field tw = op.apply(Field(op.source(), std::move(w)));
    defect = 0.0;
    bool inverted = true;
    for (std::size_t k = 0; k < target.size(); ++k) {
        defect = std::max(defect, std::abs(tw[k] - phi[k]));
        if (phi[k] != 0.0 && tw[k] == 0.0) {
            inverted = false;
        }
    }
    return inverted;
}

}  // namespace

CongruenceReport congruence_pipeline(const Operator& op, double p, double tol)
{
    if (!(tol > 0.0)) {
        throw OperatorError("congruence tolerance must be positive");
    }
    const GridDomain& omega1 = *op.source();
    const GridDomain& omega2 = *op.target();

    ReconstructionResult rec = reconstruct(op, p);
    RigidFitReport fit = rigid_motion_fit(rec);
    DefectSets defects = defect_sets(rec, omega1);

    const auto components = connected_components(omega2);
    std::vector<ComponentPairing> pairing;
    std::vector<GridDomain> images;
    double image_total = 0.0;
    std::vector<double> phi_values(omega2.size(), 0.0);
    for (const auto& cf : fit.components) {
        const GridDomain& part = components[cf.component];
        RigidMotion motion = cf.motion;
        motion.validate();
        GridDomain image = apply_rigid_motion(part, motion, omega1.h(), omega1.origin());
        ComponentPairing pair;
        pair.component = cf.component;
        pair.measure = part.measure();
        pair.motion = motion;
        pair.source_box = part.bounding_box();
        pair.image_box = image.bounding_box();
        std::size_t outside = 0;
        for (std::size_t k = 0; k < image.size(); ++k) {
            if (!omega1.contains(image.center(k))) {
                ++outside;
            }
        }
        pair.outside_measure = static_cast<double>(outside) * image.cell_volume();
        image_total += image.measure();
        images.push_back(std::move(image));
        pairing.push_back(pair);

        // Probe function for the surjectivity surrogate: a bump centred in the component.
        const auto [lo, hi] = pair.source_box;
        Point centre{0.0, 0.0};
        double extent = std::numeric_limits<double>::infinity();
        for (int d = 0; d < omega2.dim(); ++d) {
            centre[d] = 0.5 * (lo[d] + hi[d]);
            extent = std::min(extent, hi[d] - lo[d]);
        }
        const ScalarFunction bumpf = bump_function(centre, 0.25 * extent, omega2.dim());
        for (std::size_t k = 0; k < omega2.size(); ++k) {
            if (part.contains(omega2.center(k))) {
                phi_values[k] += bumpf(omega2.center(k));
            }
        }
    }
    double overlap = 0.0;
    double tiling = omega1.measure();
    if (!images.empty()) {
        const GridDomain uni = union_of(images);
        overlap = image_total - uni.measure();
        tiling = symmetric_difference_measure(omega1, uni);
    }

    double h3 = 0.0;
    const bool inverted = h3_preimage(op, fit, Field(op.target(), std::move(phi_values)), h3);

    CongruenceReport report{false,        {},       std::move(rec), std::move(fit), std::move(defects),
                            std::move(pairing), overlap, tiling,         h3,             inverted};

    if (report.fit.orthogonality_defect > tol) {
        report.reasons.emplace_back("non-rigid ξ");
    }
    if (report.fit.grad_g_defect > tol) {
        report.reasons.emplace_back("weight not locally constant");
    }
    if (report.fit.weight_defect > tol) {
        report.reasons.emplace_back("|g| differs from 1");
    }
    const double n2_measure = static_cast<double>(report.defects.n2_cells()) * omega2.cell_volume();
    if (n2_measure > tol) {
        report.reasons.emplace_back("ξ maps part of the target outside the source (N2)");
    }
    if (report.defects.n1_measure > tol) {
        report.reasons.emplace_back("ξ misses part of the source (N1)");
    }
    if (report.overlap_measure > tol) {
        report.reasons.emplace_back("component images overlap");
    }
    if (report.tiling_defect > tol) {
        report.reasons.emplace_back("component images do not tile the source");
    }
    report.congruent = report.reasons.empty();
    return report;
}

}  // namespace sil
