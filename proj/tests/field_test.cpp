#include "sil/field.hpp"
#include "sil/operators.hpp"
#include "sil/sampling.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace sil;

namespace {

DomainPtr unit_interval(double h)
{
    return share(make_interval(0.0, 1.0, h));
}

DomainPtr unit_square(double h)
{
    return share(make_rectangle({0.0, 0.0}, {1.0, 1.0}, h));
}

}  // namespace

TEST(Gradient, ConstantFieldHasZeroGradient)
{
    const Field u = Field::constant(unit_square(0.05), 3.5);
    const VectorField g = gradient(u);
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_EQ(g[k][0], 0.0);
        EXPECT_EQ(g[k][1], 0.0);
    }
}

TEST(Gradient, ExactForLinearFunctions)
{
    const auto omega = unit_interval(1e-3);
    const VectorField g = gradient(Field::sample(omega, [](const Point& x) { return x[0]; }));
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_NEAR(g[k][0], 1.0, 1e-9);
    }
}

TEST(Gradient, ExponentialWithinCentralDifferenceBound)
{
    const auto omega = unit_interval(1e-3);
    const VectorField g = gradient(Field::sample(omega, [](const Point& x) { return std::exp(x[0]); }));
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (omega->is_boundary_node(k)) {
            continue;
        }
        EXPECT_NEAR(g[k][0], std::exp(omega->center(k)[0]), 1e-5);
    }
}

TEST(Gradient, OneSidedAtBoundaryAndZeroWhenIsolated)
{
    const auto omega = unit_interval(0.25);
    const Field u(omega, {0.0, 1.0, 4.0, 9.0});
    const VectorField g = gradient(u);
    EXPECT_DOUBLE_EQ(g[0][0], 4.0);
    EXPECT_DOUBLE_EQ(g[1][0], 8.0);
    EXPECT_DOUBLE_EQ(g[3][0], 20.0);
    const auto single = share(GridDomain(1, 0.5, {0.0, 0.0}, {{0, 0}}));
    EXPECT_EQ(gradient(Field(single, {2.0}))[0][0], 0.0);
}

TEST(LpNorm, ClosedForms)
{
    const auto omega = unit_interval(1e-3);
    for (double p : {1.5, 2.0, 3.0, 7.0}) {
        EXPECT_NEAR(lp_norm(Field::constant(omega, 1.0), p), 1.0, 1e-12);
    }
    EXPECT_NEAR(lp_norm(Field::sample(omega, [](const Point& x) { return x[0]; }), 2.0), std::sqrt(1.0 / 3.0), 1e-4);
    EXPECT_EQ(lp_norm(Field::constant(omega, 0.0), 3.0), 0.0);
}

TEST(W1pNorm, ClosedForms)
{
    const auto omega = unit_interval(1e-3);
    EXPECT_NEAR(w1p_norm(Field::constant(omega, 1.0), 2.0), 1.0, 1e-12);
    EXPECT_NEAR(w1p_norm(Field::sample(omega, [](const Point& x) { return x[0]; }), 2.0), std::sqrt(4.0 / 3.0), 1e-3);
    const auto omega1 = share(example_4_8_omega1(1e-4));
    EXPECT_NEAR(w1p_norm(Field::constant(omega1, 1.0), 2.0), std::sqrt(0.118), 0.005);
}

TEST(W1pNorm, SplitsIntoValueAndGradientParts)
{
    Rng rng(4);
    const auto omega = unit_square(0.05);
    for (double p : {1.5, 2.0, 3.0}) {
        const Field u = random_smooth_field(omega, rng);
        const double lhs = std::pow(w1p_norm(u, p), p);
        const double rhs = std::pow(lp_norm(u, p), p) + std::pow(lp_norm(gradient(u).magnitude(), p), p);
        EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
    }
}

TEST(Norms, Homogeneity)
{
    Rng rng(5);
    const auto omega = unit_square(0.05);
    const Field u = random_smooth_field(omega, rng);
    for (double c : {-3.0, 0.5, 10.0}) {
        EXPECT_NEAR(lp_norm(c * u, 3.0), std::abs(c) * lp_norm(u, 3.0), 1e-13 * std::abs(c) * lp_norm(u, 3.0));
    }
}

TEST(Norms, TriangleInequalityOnRandomPairs)
{
    Rng rng(6);
    const auto omega = unit_square(0.1);
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
        for (int k = 0; k < 1000; ++k) {
            const Field u = random_smooth_field(omega, rng, 2);
            const Field v = random_smooth_field(omega, rng, 2);
            EXPECT_LE(w1p_norm(u + v, p), w1p_norm(u, p) + w1p_norm(v, p) + 1e-12);
        }
    }
}

TEST(Lattice, DisjointExactlyWhenSupportsDisjoint)
{
    const auto omega = unit_interval(0.1);
    const Field u(omega, {1, 2, 0, 0, 0, 0, 0, 0, 0, 0});
    const Field v(omega, {0, 0, 0, 0, -1, 0, 0, 0, 0, 3});
    const Field w(omega, {0, 5, 0, 0, 0, 0, 0, 0, 0, 0});
    EXPECT_TRUE(disjoint(u, v));
    EXPECT_FALSE(disjoint(u, w));
    const Field m = min(abs(u), abs(v));
    for (std::size_t k = 0; k < m.size(); ++k) {
        EXPECT_EQ(m[k], 0.0);
    }
    EXPECT_EQ(max(u, v)[9], 3.0);
}

TEST(Field, RejectsNonFiniteValuesAndForeignDomains)
{
    const auto omega = unit_interval(0.5);
    EXPECT_THROW(Field(omega, {1.0, std::nan("")}), FieldError);
    EXPECT_THROW(Field(omega, {1.0}), FieldError);
    const Field u = Field::constant(omega, 1.0);
    const Field v = Field::constant(unit_interval(0.25), 1.0);
    EXPECT_THROW((void)(u + v), FieldError);
}

TEST(Probe, RateMatchesClosedForm)
{
    EXPECT_DOUBLE_EQ(probe_rate(2.0), 1.0);
    EXPECT_NEAR(probe_rate(3.0), 0.7937005259840998, 1e-15);
    const auto omega = unit_interval(0.01);
    const Field plus = exponential_probe(omega, 0, +1, 3.0);
    const Field minus = exponential_probe(omega, 0, -1, 3.0);
    for (std::size_t k = 0; k < plus.size(); ++k) {
        EXPECT_NEAR(plus[k], std::exp(std::pow(2.0, -1.0 / 3.0) * omega->center(k)[0]), 1e-14);
        EXPECT_NEAR(plus[k] * minus[k], 1.0, 1e-14);
    }
    const Field two = exponential_probe(omega, 0, -1, 2.0);
    EXPECT_NEAR(two[3], std::exp(-omega->center(3)[0]), 1e-15);
}

TEST(Bump, ProfileValues)
{
    const auto f = bump_function({0.5, 0.5}, 0.25, 2);
    EXPECT_DOUBLE_EQ(f({0.5, 0.5}), 1.0);
    EXPECT_DOUBLE_EQ(f({0.9, 0.5}), 0.0);
    EXPECT_NEAR(f({0.625, 0.5}), 0.5625, 1e-15);
}

TEST(Bump, NormStableUnderRefinement)
{
    const double coarse = w1p_norm(bump(unit_square(0.01), {0.5, 0.5}, 0.25), 3.0);
    const double fine = w1p_norm(bump(unit_square(0.005), {0.5, 0.5}, 0.25), 3.0);
    EXPECT_GT(coarse, 0.0);
    EXPECT_NEAR(fine, coarse, 0.01 * coarse);
}

TEST(Bump, RejectsBallLeavingDomain)
{
    EXPECT_THROW(bump(unit_square(0.01), {0.1, 0.5}, 0.2), FieldError);
}

TEST(Bump, VanishesNearBoundary)
{
    const auto omega = unit_square(0.02);
    EXPECT_TRUE(vanishes_near_boundary(bump(omega, {0.5, 0.5}, 0.3)));
    EXPECT_FALSE(vanishes_near_boundary(Field::constant(omega, 1.0)));
}

TEST(Interpolate, ReproducesBilinearFunctions)
{
    const auto omega = unit_square(0.05);
    const auto f = [](const Point& x) { return 1.0 + 2.0 * x[0] - 3.0 * x[1] + 0.5 * x[0] * x[1]; };
    const Field u = Field::sample(omega, f);
    for (const Point& x : {Point{0.31, 0.47}, Point{0.5, 0.5}, Point{0.12, 0.88}}) {
        double value = 0.0;
        ASSERT_TRUE(interpolate(u, x, value));
        EXPECT_NEAR(value, f(x), 1e-12);
    }
    double value = 1.0;
    EXPECT_FALSE(interpolate(u, {1.5, 0.5}, value));
    EXPECT_EQ(value, 0.0);
}

TEST(Csv, RoundTrip)
{
    Rng rng(8);
    const auto omega = share(example_5_4_omega2(0.1));
    const Field u = random_smooth_field(omega, rng);
    std::stringstream buffer;
    write_csv(buffer, u);
    const Field back = read_field_csv(buffer, omega);
    for (std::size_t k = 0; k < u.size(); ++k) {
        EXPECT_EQ(back[k], u[k]);
    }
    const VectorField g = gradient(u);
    std::stringstream vbuffer;
    write_csv(vbuffer, g);
    const VectorField gback = read_vector_field_csv(vbuffer, omega);
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_EQ(gback[k][0], g[k][0]);
        EXPECT_EQ(gback[k][1], g[k][1]);
    }
}

TEST(Csv, MissingRowsAreRejected)
{
    const auto omega = unit_interval(0.25);
    std::stringstream in("i,x,value\n0,0.125,1\n1,0.375,2\n");
    EXPECT_THROW(read_field_csv(in, omega), FieldError);
}
