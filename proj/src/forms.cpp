#include "sil/forms.hpp"

#include <cmath>

namespace sil {

namespace {

void require_form_exponent(double p)
{
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw FormError("form exponent must lie in (1, inf)");
    }
}

void require_same(const Field& a, const Field& b)
{
    if (!same_domain(a.domain(), b.domain())) {
        throw FormError("form arguments live on different domains");
    }
}

double dot(const Point& a, const Point& b, int dim)
{
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
        s += a[d] * b[d];
    }
    return s;
}

// sign(t) |t|^{p-1}; continuous at 0 for p > 1.
double signed_power(double t, double p)
{
    if (t == 0.0) {
        return 0.0;
    }
    return std::copysign(std::pow(std::abs(t), p - 1.0), t);
}

double power_or_zero(double magnitude, double exponent)
{
    return magnitude == 0.0 ? 0.0 : std::pow(magnitude, exponent);
}

}  // namespace

double form_a(const Field& u, const Field& v, double p)
{
    require_form_exponent(p);
    require_same(u, v);
    const int dim = u.domain().dim();
    const VectorField du = gradient(u);
    const VectorField dv = gradient(v);
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        s += signed_power(u[k], p) * v[k];
        const double g = std::sqrt(dot(du[k], du[k], dim));
        s += power_or_zero(g, p - 2.0) * dot(du[k], dv[k], dim);
    }
    return s * u.domain().cell_volume();
}

double form_b(const Field& u, const Field& v, const Field& w, double p)
{
    if (!(p > 2.0) || !std::isfinite(p)) {
        throw FormError("b_p is only defined for p > 2");
    }
    require_same(u, v);
    require_same(u, w);
    const int dim = u.domain().dim();
    const VectorField du = gradient(u);
    const VectorField dv = gradient(v);
    const VectorField dw = gradient(w);
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        s += (p - 1.0) * power_or_zero(std::abs(u[k]), p - 2.0) * v[k] * w[k];
        const double g = std::sqrt(dot(du[k], du[k], dim));
        if (g != 0.0) {
            s += (p - 2.0) * std::pow(g, p - 4.0) * dot(du[k], dv[k], dim) * dot(du[k], dw[k], dim);
            s += std::pow(g, p - 2.0) * dot(dv[k], dw[k], dim);
        }
    }
    return s * u.domain().cell_volume();
}

std::vector<double> default_s_ladder()
{
    return {1e-2, 1e-3, 1e-4};
}

double loglog_slope(std::span<const double> s, std::span<const double> errors)
{
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < s.size() && k < errors.size(); ++k) {
        if (!(errors[k] > 0.0) || !(s[k] > 0.0)) {
            continue;
        }
        const double x = std::log(s[k]);
        const double y = std::log(errors[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) {
        return 0.0;
    }
    const double denom = n * sxx - sx * sx;
    return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

namespace {

std::vector<double> resolve_ladder(std::span<const double> s_values)
{
    std::vector<double> s = s_values.empty() ? default_s_ladder()
                                             : std::vector<double>(s_values.begin(), s_values.end());
    if (s.empty()) {
        throw FormError("empty step-size ladder");
    }
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!(s[k] > 0.0) || (k > 0 && !(s[k] < s[k - 1]))) {
            throw FormError("step sizes must be positive and strictly decreasing");
        }
    }
    return s;
}

}  // namespace

GateauxReport gateaux_check_norm(const Field& u, const Field& v, double p, std::span<const double> s_values)
{
    require_form_exponent(p);
    require_same(u, v);
    GateauxReport report;
    report.s_values = resolve_ladder(s_values);
    report.predicted = p * form_a(u, v, p);
    const double base = std::pow(w1p_norm(u, p), p);
    for (double s : report.s_values) {
        const double moved = std::pow(w1p_norm(axpy(u, s, v), p), p);
        report.errors.push_back(std::abs((moved - base) / s - report.predicted));
    }
    report.slope = loglog_slope(report.s_values, report.errors);
    return report;
}

GateauxReport gateaux_check_form(const Field& u, const Field& v, const Field& w, double p,
                                 std::span<const double> s_values)
{
    if (!(p > 2.0)) {
        throw FormError("form derivative check requires p > 2");
    }
    require_same(u, v);
    require_same(u, w);
    GateauxReport report;
    report.s_values = resolve_ladder(s_values);
    report.predicted = form_b(u, v, w, p);
    const double base = form_a(u, w, p);
    for (double s : report.s_values) {
        const double moved = form_a(axpy(u, s, v), w, p);
        report.errors.push_back(std::abs((moved - base) / s - report.predicted));
    }
    report.slope = loglog_slope(report.s_values, report.errors);
    return report;
}

double plap_residual(const Field& u, double p, std::span<const Field> tests)
{
    require_form_exponent(p);
    if (tests.empty()) {
        throw FormError("residual needs at least one test function");
    }
    double worst = 0.0;
    for (const Field& phi : tests) {
        require_same(u, phi);
        if (!vanishes_near_boundary(phi, 2)) {
            throw FormError("test function is not compactly supported");
        }
        const double scale = w1p_norm(phi, p);
        if (!(scale > 0.0)) {
            throw FormError("test function is identically zero");
        }
        worst = std::max(worst, std::abs(form_a(u, phi, p)) / scale);
    }
    return worst;
}

double clarkson_slack(const VectorField& f, const VectorField& g, double p)
{
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw FormError("Clarkson exponent must lie in [1, inf)");
    }
    if (!same_domain(f.domain(), g.domain())) {
        throw FormError("Clarkson arguments live on different domains");
    }
    const int dim = f.domain().dim();
    const auto mag = [dim](const Point& x) { return std::sqrt(dot(x, x, dim)); };
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const Point a = f[k];
        const Point b = g[k];
        const Point plus{a[0] + b[0], a[1] + b[1]};
        const Point minus{a[0] - b[0], a[1] - b[1]};
        double term = 0.0;
        if (p == 2.0) {
            term = dot(plus, plus, dim) + dot(minus, minus, dim) - 2.0 * dot(a, a, dim) - 2.0 * dot(b, b, dim);
        } else {
            term = std::pow(mag(plus), p) + std::pow(mag(minus), p) - 2.0 * std::pow(mag(a), p) -
                   2.0 * std::pow(mag(b), p);
        }
        s += term;
    }
    return s * f.domain().cell_volume();
}

bool clarkson_contract_holds(double slack, double p, double tol)
{
    if (p > 2.0) {
        return slack >= -tol;
    }
    if (p < 2.0) {
        return slack <= tol;
    }
    return std::abs(slack) <= tol;
}

}  // namespace sil
