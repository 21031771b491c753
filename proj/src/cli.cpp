#include "sil/cli.hpp"

#include "sil/sampling.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>

namespace sil {

namespace fs = std::filesystem;

const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names{"norm-calculus", "clarkson",       "plaplace",
                                                "examples",      "reconstruction", "congruence"};
    return names;
}

void SuiteConfig::validate() const
{
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), suite) == names.end()) {
        throw ConfigError("unknown suite: " + suite);
    }
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw ConfigError("p must lie in [1, inf)");
    }
    if (h && (!(*h > 0.0) || !std::isfinite(*h))) {
        throw ConfigError("h must be positive");
    }
    if (tol && (!(*tol > 0.0) || !std::isfinite(*tol))) {
        throw ConfigError("tol must be positive");
    }
}

bool Check::pass() const
{
    switch (relation) {
    case Relation::AtMost:
        return measured <= threshold;
    case Relation::AtLeast:
        return measured >= threshold;
    case Relation::Within:
        return std::abs(measured - expected) <= threshold;
    }
    return false;
}

bool SuiteResult::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
}

namespace {

Check at_most(std::string name, std::string tag, double measured, double threshold)
{
    return Check{std::move(name), std::move(tag), measured, threshold, Check::Relation::AtMost, 0.0};
}

Check at_least(std::string name, std::string tag, double measured, double threshold)
{
    return Check{std::move(name), std::move(tag), measured, threshold, Check::Relation::AtLeast, 0.0};
}

Check within(std::string name, std::string tag, double measured, double expected, double threshold)
{
    return Check{std::move(name), std::move(tag), measured, threshold, Check::Relation::Within, expected};
}

const char* relation_name(Check::Relation r)
{
    switch (r) {
    case Check::Relation::AtMost:
        return "<=";
    case Check::Relation::AtLeast:
        return ">=";
    case Check::Relation::Within:
        return "within";
    }
    return "?";
}

void require_form_p(double p)
{
    if (!(p > 1.0)) {
        throw ConfigError("this suite needs p > 1");
    }
}

SuiteResult norm_calculus_suite(const SuiteConfig& c)
{
    require_form_p(c.p);
    const double h = c.h.value_or(2e-2);
    auto omega = share(make_rectangle({0.0, 0.0}, {1.0, 1.0}, h));
    Rng rng(c.seed);
    constexpr int kTriples = 10;
    constexpr double kMagnitude = 1e-6;
    double norm_slope = std::numeric_limits<double>::infinity();
    double norm_rel = 0.0;
    double form_slope = std::numeric_limits<double>::infinity();
    double form_rel = 0.0;
    int norm_used = 0;
    int form_used = 0;
    SuiteResult r{"norm-calculus", {}, Json::object()};
    Json trials = Json::array();
    for (int t = 0; t < kTriples; ++t) {
        const Field u = random_smooth_field(omega, rng);
        const Field v = random_smooth_field(omega, rng);
        const Field w = random_smooth_field(omega, rng);
        const GateauxReport gn = gateaux_check_norm(u, v, c.p);
        Json entry{{"norm", to_json(gn)}};
        if (std::abs(gn.predicted) > kMagnitude) {
            ++norm_used;
            norm_slope = std::min(norm_slope, gn.slope);
            norm_rel = std::max(norm_rel, gn.errors.back() / std::abs(gn.predicted));
        }
        if (c.p > 2.0) {
            const GateauxReport gf = gateaux_check_form(u, v, w, c.p);
            entry["form"] = to_json(gf);
            if (std::abs(gf.predicted) > kMagnitude) {
                ++form_used;
                form_slope = std::min(form_slope, gf.slope);
                form_rel = std::max(form_rel, gf.errors.back() / std::abs(gf.predicted));
            }
        }
        trials.push_back(entry);
    }
    r.details["h"] = h;
    r.details["trials"] = trials;
    if (norm_used > 0) {
        r.checks.push_back(at_least("norm_derivative_min_slope", "norm-derivative", norm_slope, 0.8));
        r.checks.push_back(at_most("norm_derivative_max_rel_error", "norm-derivative", norm_rel, 1e-3));
    }
    if (form_used > 0) {
        r.checks.push_back(at_least("form_derivative_min_slope", "form-derivative", form_slope, 0.8));
        r.checks.push_back(at_most("form_derivative_max_rel_error", "form-derivative", form_rel, 1e-3));
    }
    if (c.p <= 2.0) {
        r.details["form_derivative"] = "skipped: defined only for p > 2";
    }
    return r;
}

SuiteResult clarkson_suite(const SuiteConfig& c)
{
    const double h = c.h.value_or(5e-2);
    const double tol = c.tol.value_or(1e-12);
    auto omega = share(make_rectangle({0.0, 0.0}, {1.0, 1.0}, h));
    Rng rng(c.seed);
    constexpr int kPairs = 1000;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < kPairs; ++k) {
        const VectorField f = random_vector_field(omega, rng);
        const VectorField g = random_vector_field(omega, rng);
        const double s = clarkson_slack(f, g, c.p);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    SuiteResult r{"clarkson", {}, Json{{"h", h}, {"pairs", kPairs}, {"min_slack", lo}, {"max_slack", hi}}};
    if (c.p == 2.0) {
        r.checks.push_back(at_most("max_abs_slack", "vector-clarkson", std::max(std::abs(lo), std::abs(hi)), tol));
    } else if (c.p > 2.0) {
        r.checks.push_back(at_least("min_slack", "vector-clarkson", lo, -tol));
    } else {
        r.checks.push_back(at_most("max_slack", "vector-clarkson", hi, tol));
    }
    return r;
}

SuiteResult plaplace_suite(const SuiteConfig& c)
{
    require_form_p(c.p);
    const double h0 = c.h.value_or(1e-2);
    SuiteResult r{"plaplace", {}, Json::object()};
    for (int dim : {1, 2}) {
        std::vector<double> residuals;
        double worst_ratio = std::numeric_limits<double>::infinity();
        for (double h : {h0, h0 / 2.0, h0 / 4.0}) {
            auto omega = share(dim == 1 ? make_interval(0.0, 1.0, h) : make_rectangle({0.0, 0.0}, {1.0, 1.0}, h));
            const Field w = exponential_probe(omega, 0, +1, c.p);
            const Point y = dim == 1 ? Point{0.0, 0.0} : Point{0.0, 1.0};
            const std::vector<Field> tests{bump(omega, Point{0.5, 0.5 * y[1]}, 0.3),
                                           bump(omega, Point{0.3, 0.6 * y[1]}, 0.2),
                                           bump(omega, Point{0.7, 0.35 * y[1]}, 0.15)};
            residuals.push_back(plap_residual(w, c.p, tests));
            if (residuals.size() > 1) {
                worst_ratio = std::min(worst_ratio, residuals[residuals.size() - 2] / residuals.back());
            }
        }
        const std::string key = "dim" + std::to_string(dim);
        r.details[key] = Json{{"h", {h0, h0 / 2.0, h0 / 4.0}}, {"residual", residuals}};
        r.checks.push_back(at_least(key + "_min_halving_ratio", "exponential-solution", worst_ratio, 1.8));
    }
    return r;
}

SuiteResult examples_suite(const SuiteConfig& c)
{
    const double h = c.h.value_or(1e-4);
    SuiteResult r{"examples", {}, Json::object()};

    const CompositionOperator op = example_4_8_operator(h);
    const Field one = Field::constant(op.source(), 1.0);
    const Field t1 = op.apply(one);
    const double norm_t1 = w1p_norm(t1, 2.0);
    const double norm_1 = w1p_norm(one, 2.0);
    r.checks.push_back(within("norm_sq_T1", "non-isometric-example", norm_t1 * norm_t1, 23.66, 0.05));
    r.checks.push_back(within("omega1_measure", "non-isometric-example", op.source()->measure(), 0.118, 0.001));
    r.checks.push_back(at_least("isometry_defect_T1", "non-isometric-example", std::abs(norm_t1 - norm_1), 4.0));

    Rng rng(c.seed);
    const auto trials = compact_trial_pairs(op.source(), rng, 20, 0.04);
    r.checks.push_back(at_most("intertwining_defect", "intertwining", intertwining_defect(op, trials, 2.0), 10.0 * h));

    // The two-dimensional translation example is run on a coarser grid.
    const double h2 = std::max(h, 1e-2);
    const CompositionOperator op2 = example_5_4_operator(h2);
    std::vector<Field> samples;
    for (int k = 0; k < 50; ++k) {
        samples.push_back(random_smooth_field(op2.source(), rng));
    }
    const double p = c.p > 1.0 ? c.p : 3.0;
    r.checks.push_back(at_most("translation_isometry_defect", "isometry", isometry_defect(op2, samples, p), 5.0 * h2));
    r.details = Json{{"h", h}, {"translation_h", h2}, {"translation_p", p}};
    return r;
}

SuiteResult reconstruction_suite(const SuiteConfig& c)
{
    require_form_p(c.p);
    SuiteResult r{"reconstruction", {}, Json::object()};
    const double h = c.h.value_or(1e-2);
    if (!c.spec.empty()) {
        const fs::path path(c.spec);
        const OperatorSpec spec = parse_operator_spec(load_json(path), path.parent_path(), h);
        const auto op = make_operator(spec, h);
        const ReconstructionResult rec = reconstruct(*op, c.p);
        const RigidFitReport fit = rigid_motion_fit(rec);
        const double tol = c.tol.value_or(1e-6);
        r.details = Json{{"operator", op->name()}, {"fit", to_json(fit)}, {"rigid", fit.rigid(tol)}};
        r.checks.push_back(at_most("zero_set_fraction", "reconstruction-formula",
                                   static_cast<double>(rec.zero_set_cells) / static_cast<double>(rec.g_hat.size()),
                                   0.01));
        return r;
    }
    Rng rng(c.seed);
    double xi_err = 0.0;
    double weight = 0.0;
    double orth = 0.0;
    for (int k = 0; k < 10; ++k) {
        const RigidSample s = random_rigid_operator(rng, h, k);
        const ReconstructionResult rec = reconstruct(s.op, c.p);
        const RigidFitReport fit = rigid_motion_fit(rec);
        for (std::size_t n = 0; n < rec.xi_hat.size(); ++n) {
            const Point x = s.motion.apply(s.op.target()->center(n));
            xi_err = std::max({xi_err, std::abs(x[0] - rec.xi_hat[n][0]), std::abs(x[1] - rec.xi_hat[n][1])});
        }
        weight = std::max(weight, fit.weight_defect);
        orth = std::max(orth, fit.orthogonality_defect);
    }
    r.checks.push_back(at_most("rigid_xi_hat_error", "reconstruction-formula", xi_err, 2.0 * h));
    r.checks.push_back(at_most("rigid_weight_defect", "rigid-motion", weight, 1e-8));
    r.checks.push_back(at_most("rigid_orthogonality_defect", "rigid-motion", orth, 1e-8));

    const CompositionOperator ex = example_4_8_operator(1e-3);
    const ReconstructionResult rec = reconstruct(ex, c.p);
    double g_err = 0.0;
    double map_err = 0.0;
    for (std::size_t n = 0; n < rec.g_hat.size(); ++n) {
        const double y = ex.target()->center(n)[0];
        g_err = std::max(g_err, std::abs(rec.g_hat[n] - sinh_weight(y)));
        map_err = std::max(map_err, std::abs(rec.xi_hat[n][0] - artanh_map(y)));
    }
    const RigidFitReport fit = rigid_motion_fit(rec);
    r.checks.push_back(at_most("sinh_weight_error", "reconstruction-formula", g_err, 1e-6));
    r.checks.push_back(at_most("artanh_map_error", "reconstruction-formula", map_err, 1e-6));
    r.checks.push_back(at_least("sinh_orthogonality_defect", "rigid-motion", fit.orthogonality_defect, 1e-8));
    r.details = Json{{"h", h}, {"rigid_operators", 10}, {"sinh_fit", to_json(fit)}};
    return r;
}

SuiteResult congruence_suite(const SuiteConfig& c)
{
    require_form_p(c.p);
    const double h = c.h.value_or(1e-2);
    const double tol = c.tol.value_or(4.0 * h);
    std::unique_ptr<Operator> op;
    if (c.spec.empty()) {
        op = std::make_unique<CompositionOperator>(example_5_4_operator(h));
    } else {
        const fs::path path(c.spec);
        op = make_operator(parse_operator_spec(load_json(path), path.parent_path(), h), h);
    }
    const CongruenceReport rep = congruence_pipeline(*op, c.p, tol);
    const double cell = op->target()->cell_volume();
    SuiteResult r{"congruence", {}, Json::object()};
    r.checks.push_back(at_most("orthogonality_defect", "rigid-motion", rep.fit.orthogonality_defect, tol));
    r.checks.push_back(at_most("grad_g_defect", "rigid-motion", rep.fit.grad_g_defect, tol));
    r.checks.push_back(at_most("weight_defect", "rigid-motion", rep.fit.weight_defect, tol));
    r.checks.push_back(at_most("n2_measure", "defect-sets", static_cast<double>(rep.defects.n2_cells()) * cell, tol));
    r.checks.push_back(at_most("n1_measure", "positive-measure-N1", rep.defects.n1_measure, tol));
    r.checks.push_back(at_most("overlap_measure", "congruence", rep.overlap_measure, tol));
    r.checks.push_back(at_most("tiling_defect", "congruence", rep.tiling_defect, tol));
    r.details = Json{{"operator", op->name()}, {"h", h}, {"tol", tol}, {"components", rep.pairing.size()},
                     {"report", to_json(rep)}};
    return r;
}

}  // namespace

SuiteResult run_suite(const SuiteConfig& config)
{
    config.validate();
    if (config.suite == "norm-calculus") {
        return norm_calculus_suite(config);
    }
    if (config.suite == "clarkson") {
        return clarkson_suite(config);
    }
    if (config.suite == "plaplace") {
        return plaplace_suite(config);
    }
    if (config.suite == "examples") {
        return examples_suite(config);
    }
    if (config.suite == "reconstruction") {
        return reconstruction_suite(config);
    }
    return congruence_suite(config);
}

Json report_json(const SuiteConfig& config, const SuiteResult& result)
{
    Json checks = Json::array();
    for (const auto& c : result.checks) {
        Json entry{{"name", c.name}, {"tag", c.tag}, {"measured", c.measured}, {"relation", relation_name(c.relation)}};
        if (c.relation == Check::Relation::Within) {
            entry["expected"] = c.expected;
        }
        entry["threshold"] = c.threshold;
        entry["status"] = c.pass() ? "pass" : "fail";
        checks.push_back(entry);
    }
    Json cfg{{"suite", config.suite},
             {"p", config.p},
             {"h", config.h ? Json(*config.h) : Json(nullptr)},
             {"tol", config.tol ? Json(*config.tol) : Json(nullptr)},
             {"seed", config.seed},
             {"spec", config.spec}};
    return Json{{"suite", result.suite},
                {"config", cfg},
                {"status", result.passed() ? "pass" : "fail"},
                {"checks", checks},
                {"details", result.details}};
}

void print_summary(std::ostream& out, const SuiteResult& result)
{
    const auto flags = out.flags();
    out << std::setprecision(6);
    for (const auto& c : result.checks) {
        out << (c.pass() ? "[pass] " : "[FAIL] ") << result.suite << '/' << c.name << " (" << c.tag
            << "): " << c.measured << ' ' << relation_name(c.relation) << ' ';
        if (c.relation == Check::Relation::Within) {
            out << c.expected << " +- ";
        }
        out << c.threshold << '\n';
    }
    out << result.suite << ": " << (result.passed() ? "pass" : "fail") << '\n';
    out.flags(flags);
}

namespace {

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << text;
}

}  // namespace

int cmd_verify(const SuiteConfig& config, std::ostream& out)
{
    const SuiteResult result = run_suite(config);
    print_summary(out, result);
    if (!config.report_path.empty()) {
        write_text(config.report_path, report_json(config, result).dump(2) + "\n");
    }
    return result.passed() ? 0 : 1;
}

int cmd_reconstruct(const ReconstructConfig& config, std::ostream& out)
{
    if (!(config.p > 1.0) || !std::isfinite(config.p)) {
        throw ConfigError("p must lie in (1, inf)");
    }
    if (config.spec.empty()) {
        throw ConfigError("--spec is required");
    }
    const double h = config.h.value_or(1e-2);
    DomainPtr domain;
    if (!config.domain.empty()) {
        domain = share(load_domain_spec(config.domain, h));
    }
    const fs::path path(config.spec);
    const OperatorSpec spec = parse_operator_spec(load_json(path), path.parent_path(), h, nullptr, domain);
    const auto op = make_operator(spec, domain ? domain->h() : h);
    const ReconstructionResult rec = reconstruct(*op, config.p);
    const RigidFitReport fit = rigid_motion_fit(rec);
    const double fraction = static_cast<double>(rec.zero_set_cells) / static_cast<double>(rec.g_hat.size());

    Json report = to_json(fit);
    report["rigid"] = fit.rigid(config.tol);
    report["tol"] = config.tol;
    report["zero_set_cells"] = rec.zero_set_cells;
    report["zero_set_fraction"] = fraction;
    report["axis_spread"] = rec.axis_spread;
    if (rec.g_hat.domain().dim() == 2) {
        Json angles = Json::array();
        for (const auto& c : fit.components) {
            angles.push_back(std::atan2(c.motion.Q[1][0], c.motion.Q[0][0]));
        }
        report["angles"] = angles;
    }
    const fs::path dir = config.out_dir.empty() ? fs::path(".") : fs::path(config.out_dir);
    fs::create_directories(dir);
    {
        std::ofstream g(dir / "g_hat.csv");
        write_csv(g, rec.g_hat);
        std::ofstream xi(dir / "xi_hat.csv");
        write_csv(xi, rec.xi_hat);
        if (!g || !xi) {
            throw ConfigError("cannot write reconstruction CSVs to " + dir.string());
        }
    }
    write_text(dir / "fit.json", report.dump(2) + "\n");

    out << std::setprecision(6) << "operator " << op->name() << ": " << (fit.rigid(config.tol) ? "rigid" : "non-rigid")
        << ", orthogonality_defect " << fit.orthogonality_defect << ", grad_g_defect " << fit.grad_g_defect
        << ", weight_defect " << fit.weight_defect << ", zero set " << rec.zero_set_cells << " cells\n";
    return fraction > 0.01 ? 1 : 0;
}

int cmd_congruence(const CongruenceConfig& config, std::ostream& out)
{
    const double h = config.h.value_or(1e-2);
    const GridDomain omega1 = load_domain_spec(config.domain1, h);
    const GridDomain omega2 = load_domain_spec(config.domain2, h);
    if (omega1.dim() != omega2.dim()) {
        throw ConfigError("domains have different dimensions");
    }
    const RigidMotion motion = parse_motion(load_json(config.motion), omega2.dim());
    const double tol = config.tol > 0.0 ? config.tol : 4.0 * std::max(omega1.h(), omega2.h());
    const CongruenceResult result = congruence_check(omega1, omega2, motion, tol);
    out << std::setprecision(6) << "symmetric_difference " << result.defect << '\n'
        << (result.congruent ? "congruent" : "not congruent") << " at tol " << tol << '\n';
    return result.congruent ? 0 : 1;
}

int run_cli(int argc, char** argv)
{
    CLI::App app{"Numerical checks for Sobolev isometries and composition operators"};
    // "--h" is the grid width, so help is long-form only.
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    SuiteConfig suite;
    double verify_h = 0.0;
    double verify_tol = 0.0;
    auto* verify = app.add_subcommand("verify", "Run a named verification suite");
    verify->add_option("--suite", suite.suite, "norm-calculus | clarkson | plaplace | examples | reconstruction | congruence")
        ->required();
    verify->add_option("--p", suite.p, "Exponent p");
    auto* vh = verify->add_option("--h", verify_h, "Grid width");
    auto* vt = verify->add_option("--tol", verify_tol, "Tolerance");
    verify->add_option("--seed", suite.seed, "Seed for random samples");
    verify->add_option("--spec", suite.spec, "Operator spec JSON");
    verify->add_option("--report", suite.report_path, "Report JSON output path");

    ReconstructConfig rc;
    double rec_h = 0.0;
    auto* rcmd = app.add_subcommand("reconstruct", "Recover g and xi from exponential probes");
    rcmd->add_option("--spec", rc.spec, "Operator spec JSON")->required();
    rcmd->add_option("--domain", rc.domain, "Target domain spec JSON");
    rcmd->add_option("--p", rc.p, "Exponent p");
    auto* rh = rcmd->add_option("--h", rec_h, "Grid width for specs without one");
    rcmd->add_option("--tol", rc.tol, "Rigidity tolerance");
    rcmd->add_option("--out", rc.out_dir, "Output directory");

    CongruenceConfig cc;
    double cong_h = 0.0;
    auto* ccmd = app.add_subcommand("congruence", "Check whether a rigid motion carries domain2 onto domain1");
    ccmd->add_option("domain1", cc.domain1, "First domain spec")->required();
    ccmd->add_option("domain2", cc.domain2, "Second domain spec")->required();
    ccmd->add_option("motion", cc.motion, "Rigid motion spec")->required();
    ccmd->add_option("--tol", cc.tol, "Symmetric-difference tolerance (default 4h)");
    auto* ch = ccmd->add_option("--h", cong_h, "Grid width for specs without one");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (verify->parsed()) {
            if (vh->count() > 0) {
                suite.h = verify_h;
            }
            if (vt->count() > 0) {
                suite.tol = verify_tol;
            }
            suite.validate();
            return cmd_verify(suite, std::cout);
        }
        if (rcmd->parsed()) {
            if (rh->count() > 0) {
                rc.h = rec_h;
            }
            return cmd_reconstruct(rc, std::cout);
        }
        if (ch->count() > 0) {
            cc.h = cong_h;
        }
        return cmd_congruence(cc, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace sil
