#pragma once

#include "sil/field.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace sil {

class FormError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// a_p(u, v) = ∫|u|^{p-2} u v + ∫|∇u|^{p-2} ∇u·∇v (midpoint rule, p in (1, inf)).
///
/// |u|^{p-2} u is evaluated as sign(u)|u|^{p-1}, and the gradient weight is
/// taken as zero wherever ∇u = 0, so products with a vanishing factor vanish.
double form_a(const Field& u, const Field& v, double p);

/// b_p(u, v, w), the derivative of a_p(·, w) at u in direction v. Defined for p > 2.
double form_b(const Field& u, const Field& v, const Field& w, double p);

struct GateauxReport {
    std::vector<double> s_values;
    std::vector<double> errors;
    /// Least-squares slope of log(error) against log(s) over nonzero errors;
    /// zero when fewer than two errors are nonzero.
    double slope = 0.0;
    /// The predicted derivative the quotients were compared against.
    double predicted = 0.0;
};

std::vector<double> default_s_ladder();

double loglog_slope(std::span<const double> s, std::span<const double> errors);

/// Forward quotients of ||u + s v||^p against p a_p(u, v).
GateauxReport gateaux_check_norm(const Field& u, const Field& v, double p,
                                 std::span<const double> s_values = {});

/// Forward quotients of a_p(u + s v, w) against b_p(u, v, w).
GateauxReport gateaux_check_form(const Field& u, const Field& v, const Field& w, double p,
                                 std::span<const double> s_values = {});

/// max over φ of |a_p(u, φ)| / ||φ||_{W^{1,p}}; each φ must vanish in a
/// two-node boundary layer.
double plap_residual(const Field& u, double p, std::span<const Field> tests);

/// ||f+g||_p^p + ||f-g||_p^p - 2||f||_p^p - 2||g||_p^p, accumulated pointwise.
double clarkson_slack(const VectorField& f, const VectorField& g, double p);

/// Sign contract of the vector Clarkson inequality at tolerance tol.
bool clarkson_contract_holds(double slack, double p, double tol = 1e-12);

}  // namespace sil
