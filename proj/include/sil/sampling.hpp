#pragma once

#include "sil/field.hpp"
#include "sil/operators.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace sil {

using Rng = std::mt19937_64;

/// Sum of a few random plane waves with frequencies up to 2π per axis.
ScalarFunction random_smooth_function(Rng& rng, int dim, int terms = 4);

Field random_smooth_field(const DomainPtr& omega, Rng& rng, int terms = 4);

/// Independent uniform entries in [-1, 1].
VectorField random_vector_field(const DomainPtr& omega, Rng& rng);

/// A bump whose support stays at least margin_cells cells inside omega,
/// scaled by a random amplitude of magnitude in [0.5, 2] and random sign.
Field random_bump(const DomainPtr& omega, Rng& rng, double max_radius, int margin_cells = 3);

/// Pairs of bumps with disjoint supports.
std::vector<std::pair<Field, Field>> disjoint_bump_pairs(const DomainPtr& omega, Rng& rng, int count,
                                                         double max_radius);

/// (u, v) with u smooth and v a bump vanishing near the boundary.
std::vector<std::pair<Field, Field>> compact_trial_pairs(const DomainPtr& omega, Rng& rng, int count,
                                                         double max_radius);

struct RigidSample {
    CompositionOperator op;
    RigidMotion motion;
};

/// Rigid composition operator on a random rectangle: index % 3 selects a
/// rotation, a translation, or a reflection with weight -1. The source is a
/// box covering the image of the target.
RigidSample random_rigid_operator(Rng& rng, double h, int index);

}  // namespace sil
