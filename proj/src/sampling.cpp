#include "sil/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sil {

namespace {

struct Wave {
    double amplitude;
    Point frequency;
    double phase;
};

double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

ScalarFunction random_smooth_function(Rng& rng, int dim, int terms)
{
    std::vector<Wave> waves;
    waves.reserve(static_cast<std::size_t>(terms));
    const double offset = uniform(rng, -1.0, 1.0);
    for (int t = 0; t < terms; ++t) {
        Wave w{uniform(rng, -1.0, 1.0), Point{0.0, 0.0}, uniform(rng, 0.0, 2.0 * std::numbers::pi)};
        for (int d = 0; d < dim; ++d) {
            w.frequency[d] = uniform(rng, -2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
        }
        waves.push_back(w);
    }
    return [waves = std::move(waves), offset](const Point& x) {
        double s = offset;
        for (const auto& w : waves) {
            s += w.amplitude * std::sin(w.frequency[0] * x[0] + w.frequency[1] * x[1] + w.phase);
        }
        return s;
    };
}

Field random_smooth_field(const DomainPtr& omega, Rng& rng, int terms)
{
    return Field::sample(omega, random_smooth_function(rng, omega->dim(), terms));
}

VectorField random_vector_field(const DomainPtr& omega, Rng& rng)
{
    std::vector<Point> values(omega->size(), Point{0.0, 0.0});
    for (auto& v : values) {
        for (int d = 0; d < omega->dim(); ++d) {
            v[d] = uniform(rng, -1.0, 1.0);
        }
    }
    return VectorField(omega, std::move(values));
}

namespace {

struct BumpShape {
    Point center;
    double radius;
};

BumpShape random_shape(const GridDomain& omega, Rng& rng, double max_radius, int margin_cells)
{
    const auto [lo, hi] = omega.bounding_box();
    const double margin = margin_cells * omega.h();
    double room = max_radius;
    for (int d = 0; d < omega.dim(); ++d) {
        room = std::min(room, 0.5 * (hi[d] - lo[d]) - margin);
    }
    const double min_radius = 3.0 * omega.h();
    if (!(room > min_radius)) {
        throw std::invalid_argument("domain too small for a bump");
    }
    BumpShape s{Point{0.0, 0.0}, uniform(rng, std::max(min_radius, 0.5 * room), room)};
    for (int d = 0; d < omega.dim(); ++d) {
        s.center[d] = uniform(rng, lo[d] + s.radius + margin, hi[d] - s.radius - margin);
    }
    return s;
}

bool fits(const GridDomain& omega, const BumpShape& s, int margin_cells)
{
    const double reach = s.radius + margin_cells * omega.h();
    const int dim = omega.dim();
    const auto n = static_cast<std::int64_t>(std::ceil(reach / omega.h())) + 1;
    const CellIndex c = omega.cell_of(s.center);
    for (std::int64_t a = -n; a <= n; ++a) {
        for (std::int64_t b = (dim == 2 ? -n : 0); b <= (dim == 2 ? n : 0); ++b) {
            const CellIndex q{c[0] + a, c[1] + b};
            const Point x = omega.center_of(q);
            double r2 = 0.0;
            for (int d = 0; d < dim; ++d) {
                r2 += (x[d] - s.center[d]) * (x[d] - s.center[d]);
            }
            if (r2 <= reach * reach && omega.find(q) == GridDomain::npos) {
                return false;
            }
        }
    }
    return true;
}

double random_amplitude(Rng& rng)
{
    const double a = uniform(rng, 0.5, 2.0);
    return std::bernoulli_distribution(0.5)(rng) ? a : -a;
}

constexpr int kMaxAttempts = 1000;

}  // namespace

Field random_bump(const DomainPtr& omega, Rng& rng, double max_radius, int margin_cells)
{
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const BumpShape s = random_shape(*omega, rng, max_radius, margin_cells);
        if (fits(*omega, s, margin_cells)) {
            return random_amplitude(rng) * Field::sample(omega, bump_function(s.center, s.radius, omega->dim()));
        }
    }
    throw std::runtime_error("could not place a bump inside the domain");
}

std::vector<std::pair<Field, Field>> disjoint_bump_pairs(const DomainPtr& omega, Rng& rng, int count,
                                                         double max_radius)
{
    std::vector<std::pair<Field, Field>> pairs;
    int attempts = 0;
    while (static_cast<int>(pairs.size()) < count) {
        if (++attempts > kMaxAttempts * count) {
            throw std::runtime_error("could not place disjoint bump pairs");
        }
        const BumpShape a = random_shape(*omega, rng, max_radius, 3);
        const BumpShape b = random_shape(*omega, rng, max_radius, 3);
        double dist2 = 0.0;
        for (int d = 0; d < omega->dim(); ++d) {
            dist2 += (a.center[d] - b.center[d]) * (a.center[d] - b.center[d]);
        }
        const double gap = a.radius + b.radius + omega->h();
        if (dist2 < gap * gap || !fits(*omega, a, 3) || !fits(*omega, b, 3)) {
            continue;
        }
        const double sa = random_amplitude(rng);
        const double sb = random_amplitude(rng);
        pairs.emplace_back(sa * Field::sample(omega, bump_function(a.center, a.radius, omega->dim())),
                           sb * Field::sample(omega, bump_function(b.center, b.radius, omega->dim())));
    }
    return pairs;
}

std::vector<std::pair<Field, Field>> compact_trial_pairs(const DomainPtr& omega, Rng& rng, int count,
                                                         double max_radius)
{
    std::vector<std::pair<Field, Field>> pairs;
    pairs.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        Field u = random_smooth_field(omega, rng);
        Field v = random_bump(omega, rng, max_radius);
        pairs.emplace_back(std::move(u), std::move(v));
    }
    return pairs;
}

RigidSample random_rigid_operator(Rng& rng, double h, int index)
{
    const Point lo{uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5)};
    const Point hi{lo[0] + uniform(rng, 0.5, 1.0), lo[1] + uniform(rng, 0.5, 1.0)};
    auto target = share(make_rectangle(lo, hi, h));
    const Point shift{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
    RigidMotion motion;
    switch (index % 3) {
    case 0:
        motion = RigidMotion::rotation(uniform(rng, 0.0, 2.0 * std::numbers::pi), shift);
        break;
    case 1:
        motion = RigidMotion::translation(2, shift);
        break;
    default: {
        const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        motion = RigidMotion::rotation(angle, shift);
        // Compose with the reflection x -> -x to get det Q = -1.
        motion.Q[0][0] = -motion.Q[0][0];
        motion.Q[1][0] = -motion.Q[1][0];
        motion.sign = -1;
        break;
    }
    }
    Point img_lo{1e300, 1e300};
    Point img_hi{-1e300, -1e300};
    for (const Point& corner : {lo, hi, Point{lo[0], hi[1]}, Point{hi[0], lo[1]}}) {
        const Point x = motion.apply(corner);
        for (int d = 0; d < 2; ++d) {
            img_lo[d] = std::min(img_lo[d], x[d] - 3.0 * h);
            img_hi[d] = std::max(img_hi[d], x[d] + 3.0 * h);
        }
    }
    auto source = share(make_rectangle(img_lo, img_hi, h));
    const std::vector<RigidPiece> pieces{RigidPiece{motion, 0}};
    return RigidSample{rigid_operator(source, target, pieces), motion};
}

}  // namespace sil
