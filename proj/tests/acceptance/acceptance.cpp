#include "sil/field.hpp"
#include "sil/forms.hpp"
#include "sil/grid_domain.hpp"
#include "sil/operators.hpp"
#include "sil/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <string>
#include <vector>

using namespace sil;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args)
{
    char buffer[512];
    std::snprintf(buffer, sizeof(buffer), format, args...);
    return buffer;
}

DomainPtr unit_interval(double h)
{
    return share(make_interval(0.0, 1.0, h));
}

DomainPtr unit_square(double h)
{
    return share(make_rectangle({0.0, 0.0}, {1.0, 1.0}, h));
}

// ∫_1^2 g^2 + g'^2 with g = sinh(2y)^{1/2}, from the antiderivative
// cosh(2y) + log(tanh y) / 2.
double sinh_norm_sq_oracle()
{
    const auto f = [](double y) { return std::cosh(2.0 * y) + 0.5 * std::log(std::tanh(y)); };
    return f(2.0) - f(1.0);
}

Outcome criterion_1()
{
    const double h = 1e-4;
    const auto start = Clock::now();
    const CompositionOperator op = example_4_8_operator(h);
    const Field t1 = op.apply(Field::constant(op.source(), 1.0));
    const double norm = w1p_norm(t1, 2.0);
    const double norm_sq = norm * norm;
    const double omega1 = op.source()->measure();
    const double elapsed = seconds_since(start);
    const double oracle = sinh_norm_sq_oracle();
    const double oracle_omega1 = artanh_map(2.0) - artanh_map(1.0);
    const bool pass = std::abs(norm_sq - 23.66) <= 0.05 && std::abs(omega1 - 0.118) <= 0.001 && elapsed < 1.0 &&
                      std::abs(norm_sq - oracle) <= 0.05 && std::abs(omega1 - oracle_omega1) <= 0.001;
    return {pass, fmt("||T1||^2=%.5f (closed form %.5f), |Omega1|=%.5f (closed form %.5f), %.3f s", norm_sq, oracle,
                      omega1, oracle_omega1, elapsed)};
}

struct ContinuousTrial {
    ScalarFunction u;
    Point center;
    double radius = 0.0;
};

Outcome criterion_2()
{
    // The same continuous trial functions are sampled on every grid.
    const double lo = artanh_map(1.0);
    const double hi = artanh_map(2.0);
    const double mid = 0.5 * (lo + hi);
    Rng rng(2);
    std::uniform_real_distribution<double> shift(-0.01, 0.01);
    std::uniform_real_distribution<double> radius(0.02, 0.04);
    std::vector<ContinuousTrial> trials;
    for (int k = 0; k < 20; ++k) {
        trials.push_back({random_smooth_function(rng, 1), Point{mid + shift(rng), 0.0}, radius(rng)});
    }
    std::vector<double> defects;
    bool bounded = true;
    for (double h : {1e-3, 5e-4}) {
        const CompositionOperator op = example_4_8_operator(h);
        std::vector<std::pair<Field, Field>> pairs;
        for (const auto& t : trials) {
            pairs.emplace_back(Field::sample(op.source(), t.u), bump(op.source(), t.center, t.radius));
        }
        defects.push_back(intertwining_defect(op, pairs, 2.0));
        bounded = bounded && defects.back() <= 10.0 * h;
    }
    const double ratio = defects[0] / defects[1];
    const bool halves = ratio >= 1.5 && ratio <= 2.5;
    return {bounded && halves, fmt("defect(1e-3)=%.3e, defect(5e-4)=%.3e, <=10h %s, ratio %.2f (needs 1.5..2.5)",
                                   defects[0], defects[1], bounded ? "yes" : "no", ratio)};
}

Outcome criterion_3()
{
    constexpr double kMagnitude = 1e-6;
    const auto omega = unit_square(2e-2);
    int checked = 0;
    int failed = 0;
    double min_slope = std::numeric_limits<double>::infinity();
    double worst_rel = 0.0;
    const auto record = [&](const GateauxReport& r) {
        if (std::abs(r.predicted) <= kMagnitude) {
            return;
        }
        ++checked;
        const double rel = r.errors.back() / std::abs(r.predicted);
        min_slope = std::min(min_slope, r.slope);
        worst_rel = std::max(worst_rel, rel);
        if (r.slope < 0.8 || rel > 1e-3) {
            ++failed;
        }
    };
    for (double p : {2.5, 3.0, 4.0}) {
        for (int seed = 1; seed <= 20; ++seed) {
            Rng rng(static_cast<std::uint64_t>(seed));
            const Field u = random_smooth_field(omega, rng);
            const Field v = random_smooth_field(omega, rng);
            const Field w = random_smooth_field(omega, rng);
            record(gateaux_check_norm(u, v, p));
            record(gateaux_check_form(u, v, w, p));
        }
    }
    return {failed == 0, fmt("%d of %d checks outside bounds, min slope %.3f, worst relative error %.2e (needs 1e-3)",
                             failed, checked, min_slope, worst_rel)};
}

Outcome criterion_4()
{
    const auto omega = unit_square(5e-2);
    const auto start = Clock::now();
    bool pass = true;
    std::string detail;
    std::uint64_t seed = 4;
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
        Rng rng(seed++);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < 1000; ++k) {
            const VectorField f = random_vector_field(omega, rng);
            const VectorField g = random_vector_field(omega, rng);
            const double s = clarkson_slack(f, g, p);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        if (p >= 2.0) {
            pass = pass && lo >= -1e-12;
        }
        if (p <= 2.0) {
            pass = pass && hi <= 1e-12;
        }
        detail += fmt("p=%.1f slack [%.2e, %.2e]; ", p, lo, hi);
    }
    const double elapsed = seconds_since(start);
    pass = pass && elapsed < 10.0;
    return {pass, detail + fmt("%.2f s", elapsed)};
}

std::vector<Field> residual_tests(const DomainPtr& omega)
{
    const double y = omega->dim() == 2 ? 1.0 : 0.0;
    return {bump(omega, Point{0.5, 0.5 * y}, 0.3), bump(omega, Point{0.3, 0.6 * y}, 0.2),
            bump(omega, Point{0.7, 0.35 * y}, 0.15)};
}

Outcome criterion_5()
{
    bool pass = true;
    std::string detail;
    for (double p : {2.0, 3.0}) {
        for (int dim : {1, 2}) {
            std::vector<double> residual;
            for (double h : {1e-2, 5e-3, 2.5e-3}) {
                const auto omega = dim == 1 ? unit_interval(h) : unit_square(h);
                residual.push_back(plap_residual(exponential_probe(omega, 0, +1, p), p, residual_tests(omega)));
            }
            const double r1 = residual[0] / residual[1];
            const double r2 = residual[1] / residual[2];
            pass = pass && r1 >= 1.8 && r2 >= 1.8;
            detail += fmt("p=%.0f dim=%d ratios %.2f %.2f; ", p, dim, r1, r2);
        }
    }
    return {pass, detail};
}

Outcome criterion_6()
{
    const double h = 1e-2;
    bool pass = true;
    double xi_err = 0.0;
    double weight = 0.0;
    double orth = 0.0;
    for (double p : {2.0, 3.0}) {
        Rng rng(6);
        for (int k = 0; k < 10; ++k) {
            const RigidSample s = random_rigid_operator(rng, h, k);
            const ReconstructionResult rec = reconstruct(s.op, p);
            const RigidFitReport fit = rigid_motion_fit(rec);
            for (std::size_t n = 0; n < rec.xi_hat.size(); ++n) {
                const Point x = s.motion.apply(s.op.target()->center(n));
                xi_err = std::max({xi_err, std::abs(x[0] - rec.xi_hat[n][0]), std::abs(x[1] - rec.xi_hat[n][1])});
            }
            weight = std::max(weight, fit.weight_defect);
            orth = std::max(orth, fit.orthogonality_defect);
        }
    }
    pass = xi_err <= 2.0 * h && weight <= 1e-8 && orth <= 1e-8;

    const CompositionOperator ex = example_4_8_operator(1e-3);
    const ReconstructionResult rec = reconstruct(ex, 2.0);
    double g_err = 0.0;
    double map_err = 0.0;
    for (std::size_t n = 0; n < rec.g_hat.size(); ++n) {
        const double y = ex.target()->center(n)[0];
        g_err = std::max(g_err, std::abs(rec.g_hat[n] - sinh_weight(y)));
        map_err = std::max(map_err, std::abs(rec.xi_hat[n][0] - artanh_map(y)));
    }
    const RigidFitReport fit = rigid_motion_fit(rec);
    const bool non_rigid = !fit.rigid(1e-6);
    pass = pass && g_err <= 1e-6 && map_err <= 1e-6 && non_rigid;
    return {pass, fmt("rigid: xi err %.2e, weight %.2e, orth %.2e; sinh: g err %.2e, xi err %.2e, %s (orth %.3f)",
                      xi_err, weight, orth, g_err, map_err, non_rigid ? "non-rigid" : "rigid",
                      fit.orthogonality_defect)};
}

Outcome criterion_7()
{
    const double h = 1e-2;
    const double tol = 4.0 * h;
    const CompositionOperator op = example_5_4_operator(h);
    const CongruenceReport rep = congruence_pipeline(op, 3.0, tol);
    bool motions = rep.pairing.size() == 2;
    bool seen_up = false;
    bool seen_down = false;
    for (const auto& pair : rep.pairing) {
        const RigidMotion& m = pair.motion;
        const double rotation = std::max({std::abs(m.Q[0][0] - 1.0), std::abs(m.Q[0][1]), std::abs(m.Q[1][0]),
                                          std::abs(m.Q[1][1] - 1.0)});
        motions = motions && rotation <= 2.0 * h && std::abs(m.b[0]) <= 2.0 * h;
        seen_up = seen_up || std::abs(m.b[1] - 1.0) <= 2.0 * h;
        seen_down = seen_down || std::abs(m.b[1] + 1.0) <= 2.0 * h;
    }
    motions = motions && seen_up && seen_down;
    const bool pass = motions && rep.defects.n2_cells() == 0 && rep.defects.n1_measure <= 2.0 * h && rep.congruent;
    return {pass, fmt("%zu components, translations (0,-1)/(0,1) %s, N2 cells %zu, N1 %.2e, %s", rep.pairing.size(),
                      motions ? "found" : "missing", rep.defects.n2_cells(), rep.defects.n1_measure,
                      rep.congruent ? "congruent" : "not congruent")};
}

Outcome criterion_8()
{
    const double h = 1e-4;
    const auto omega1 = share(make_interval(0.0, 1.0, h));
    const auto omega2 = share(make_fat_cantor_complement(0.5, h));
    const DefectSets d = defect_sets(reconstruct(inclusion_operator(omega1, omega2), 2.0), *omega1);
    const bool pass = std::abs(d.n1_measure - 0.5) <= 0.02;
    return {pass, fmt("N1 measure %.4f, N2 cells %zu, |Omega2| %.4f", d.n1_measure, d.n2_cells(), omega2->measure())};
}

Outcome criterion_9()
{
    constexpr double p = 3.0;
    const auto sq = unit_square(2e-2);
    const CompositionOperator identity = identity_operator(sq);
    const RigidMotion turn{2, {{{0.0, -1.0}, {1.0, 0.0}}}, {1.0, 0.0}, 1};
    const std::vector<RigidPiece> pieces{{turn, 0}};
    const CompositionOperator quarter = rigid_operator(sq, sq, pieces);
    const CompositionOperator strips = example_5_4_operator(2e-2);

    Rng rng(9);
    double worst = 0.0;
    for (const CompositionOperator* op : {&identity, &quarter, &strips}) {
        const auto pairs = disjoint_bump_pairs(op->source(), rng, 20, 0.2);
        worst = std::max(worst, disjointness_defect(*op, pairs, p).defect);
    }
    const auto line = unit_interval(1e-3);
    const auto pairs = disjoint_bump_pairs(line, rng, 20, 0.2);
    const double averaging = disjointness_defect(averaging_operator(line), pairs, p).defect;
    const bool pass = worst == 0.0 && averaging > 0.1;
    return {pass, fmt("composition operators max defect %.3e, averaging defect %.3f", worst, averaging)};
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"non-isometric norm gap", criterion_1},   {"intertwining convergence", criterion_2},
        {"Gateaux calculus", criterion_3},         {"Clarkson sweep", criterion_4},
        {"weak-solution residual", criterion_5},   {"reconstruction round-trip", criterion_6},
        {"congruence of translated strips", criterion_7}, {"positive-measure N1", criterion_8},
        {"disjointness preservation", criterion_9},
    };
    int failures = 0;
    int index = 1;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
        ++index;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
