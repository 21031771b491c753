#pragma once

#include "sil/field.hpp"
#include "sil/grid_domain.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sil {

class OperatorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A linear map from fields on source() to fields on target().
class Operator {
public:
    virtual ~Operator() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual const DomainPtr& source() const = 0;
    [[nodiscard]] virtual const DomainPtr& target() const = 0;

    [[nodiscard]] virtual Field apply(const Field& u) const = 0;
    /// Apply to a closed-form function. The default samples u on source().
    [[nodiscard]] virtual Field apply(const ScalarFunction& u) const;
};

/// T u = g · (u ∘ ξ), with g and ξ tabulated at the target nodes.
///
/// Nodes whose ξ(y) is farther than one cell from every active source cell are
/// flagged as outside; their image value is 0.
class CompositionOperator final : public Operator {
public:
    CompositionOperator(std::string name, DomainPtr source, DomainPtr target, std::vector<double> weight,
                        std::vector<Point> map);

    static CompositionOperator from_functions(std::string name, DomainPtr source, DomainPtr target,
                                              const ScalarFunction& weight, const MapFunction& map);

    [[nodiscard]] std::string name() const override { return name_; }
    [[nodiscard]] const DomainPtr& source() const override { return source_; }
    [[nodiscard]] const DomainPtr& target() const override { return target_; }

    [[nodiscard]] Field apply(const Field& u) const override;
    [[nodiscard]] Field apply(const ScalarFunction& u) const override;

    [[nodiscard]] std::span<const double> weight() const { return weight_; }
    [[nodiscard]] std::span<const Point> map() const { return map_; }
    [[nodiscard]] const std::vector<bool>& outside() const { return outside_; }
    [[nodiscard]] std::size_t outside_count() const;

private:
    std::string name_;
    DomainPtr source_;
    DomainPtr target_;
    std::vector<double> weight_;
    std::vector<Point> map_;
    std::vector<bool> outside_;
};

/// Wraps an arbitrary Field -> Field map; used for operators that are not of
/// composition type.
class FunctionOperator final : public Operator {
public:
    using Fn = std::function<Field(const Field&)>;

    FunctionOperator(std::string name, DomainPtr source, DomainPtr target, Fn fn);

    [[nodiscard]] std::string name() const override { return name_; }
    [[nodiscard]] const DomainPtr& source() const override { return source_; }
    [[nodiscard]] const DomainPtr& target() const override { return target_; }
    [[nodiscard]] Field apply(const Field& u) const override;

private:
    std::string name_;
    DomainPtr source_;
    DomainPtr target_;
    Fn fn_;
};

// Closed forms of the p = 2, N = 1 operator on (1, 2) whose weight is not
// locally constant: ξ(y) = -artanh(e^{-2y}), g(y) = sinh(2y)^{1/2}.
double sinh_weight(double y);
double sinh_weight_derivative(double y);
double artanh_map(double y);
double artanh_map_derivative(double y);

GridDomain example_4_8_omega2(double h);
GridDomain example_4_8_omega1(double h);
GridDomain example_5_4_omega1(double h);
GridDomain example_5_4_omega2(double h);

CompositionOperator identity_operator(const DomainPtr& omega);
/// ξ = id from source into a target contained in it.
CompositionOperator inclusion_operator(const DomainPtr& source, const DomainPtr& target);
CompositionOperator scaled_identity(const DomainPtr& omega, double factor);
CompositionOperator example_4_8_operator(double h);
CompositionOperator example_5_4_operator(double h);

struct RigidPiece {
    RigidMotion motion;
    std::size_t component = 0;
};

/// ξ(y) = Q_c y + b_c and g = sign_c on component c of the target.
CompositionOperator rigid_operator(const DomainPtr& source, const DomainPtr& target,
                                   std::span<const RigidPiece> pieces);

CompositionOperator tabulated_operator(const DomainPtr& source, const Field& weight, const VectorField& map);

/// (T u)(y) = (u(y) + u(flip y)) / 2, flip mirroring the bounding box along axis.
FunctionOperator averaging_operator(const DomainPtr& omega, int axis = 0);

/// Declarative description of a composition operator.
struct OperatorSpec {
    struct Builtin {
        std::string name;
    };
    struct Rigid {
        std::vector<RigidPiece> pieces;
    };
    struct Tabulated {
        Field weight;
        VectorField map;
    };

    std::variant<Builtin, Rigid, Tabulated> variant;
    DomainPtr source;
    DomainPtr target;
};

/// Known names: identity, inclusion, scaled_identity, example_4_8, example_5_4.
/// example_* builtins ignore source/target and build their own domains at h.
std::unique_ptr<Operator> make_operator(const OperatorSpec& spec, double h);

/// Throws OperatorError unless ξ(y) lies in the closed bounding box of the
/// source (one-cell tolerance) and weights are finite.
void validate(const CompositionOperator& op);

double isometry_defect(const Operator& op, std::span<const Field> samples, double p);

struct DisjointnessResult {
    /// Lattice overlap norm over target nodes farther than band from the edge
    /// of supp(Tu) ∩ supp(Tv).
    double defect = 0.0;
    /// The same norm over every target node.
    double raw = 0.0;
};

/// Each pair must satisfy |u| ∧ |v| = 0; band <= 0 selects 2h of the target.
DisjointnessResult disjointness_defect(const Operator& op, std::span<const std::pair<Field, Field>> pairs,
                                       double p, double band = 0.0);

/// max |a_p(Tu, Tv) - a_p(u, v)|; v and Tv must vanish in a boundary layer.
double intertwining_defect(const Operator& op, std::span<const std::pair<Field, Field>> trials, double p);

struct ReconstructionResult {
    Field g_hat;
    VectorField xi_hat;
    std::vector<bool> zero_set;
    std::size_t zero_set_cells = 0;
    /// max over axes j and nodes of |g_j - g_0|.
    double axis_spread = 0.0;
};

/// Recover (g, ξ) from the images of the exponential probes e^{±α x_j}.
ReconstructionResult reconstruct(const Operator& op, double p);

struct ComponentFit {
    std::size_t component = 0;
    std::size_t nodes = 0;
    RigidMotion motion;
    /// max |ξ(y) - (Q y + b)| over the component.
    double fit_residual = 0.0;
};

struct RigidFitReport {
    std::vector<ComponentFit> components;
    double orthogonality_defect = 0.0;
    double grad_g_defect = 0.0;
    double weight_defect = 0.0;
    /// |∇ξ_0| at every target node.
    Field c_field;

    [[nodiscard]] bool rigid(double tol) const;
};

RigidFitReport rigid_motion_fit(const ReconstructionResult& rec);

struct DefectSets {
    std::vector<std::size_t> n2_nodes;
    double n1_measure = 0.0;
    std::optional<GridDomain> u1;
    std::optional<GridDomain> u2;

    [[nodiscard]] std::size_t n2_cells() const { return n2_nodes.size(); }
};

DefectSets defect_sets(const ReconstructionResult& rec, const GridDomain& omega1);

/// Flat record of every measured defect; unset entries were not measured.
struct DefectReport {
    std::optional<double> isometry;
    std::optional<double> disjointness;
    std::optional<double> intertwining;
    std::optional<double> orthogonality;
    std::optional<double> grad_g;
    std::optional<double> weight;
    std::optional<double> n1_measure;
    std::optional<std::size_t> n2_cells;
};

struct ComponentPairing {
    std::size_t component = 0;
    double measure = 0.0;
    RigidMotion motion;
    std::pair<Point, Point> source_box;
    std::pair<Point, Point> image_box;
    /// Measure of the component image falling outside the source domain.
    double outside_measure = 0.0;
};

struct CongruenceReport {
    bool congruent = false;
    std::vector<std::string> reasons;
    ReconstructionResult reconstruction;
    RigidFitReport fit;
    DefectSets defects;
    std::vector<ComponentPairing> pairing;
    double overlap_measure = 0.0;
    double tiling_defect = 0.0;
    /// max |T w - φ| for w built from φ through the fitted inverse motions.
    double h3_defect = 0.0;
    bool h3_inverted = true;

    [[nodiscard]] DefectReport defect_report() const;
};

CongruenceReport congruence_pipeline(const Operator& op, double p, double tol);

}  // namespace sil
