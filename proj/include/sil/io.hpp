#pragma once

#include "sil/forms.hpp"
#include "sil/grid_domain.hpp"
#include "sil/operators.hpp"

#include "json.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace sil {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent input file.
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Json load_json(const std::filesystem::path& path);

/// Either {"dim", "h", "boxes": [{"lo", "hi"}], "subtract": [...], "origin"?}
/// or {"builtin": name, "h"}. Builtin names: unit_interval, unit_square,
/// example_4_8_omega1, example_4_8_omega2, example_5_4_omega1,
/// example_5_4_omega2, fat_cantor(m). default_h is used when "h" is absent.
GridDomain parse_domain_spec(const Json& spec, double default_h = 0.0);
GridDomain load_domain_spec(const std::filesystem::path& path, double default_h = 0.0);

/// {"Q": [[...]], "b": [...], "sign": ±1}; Q defaults to the identity.
RigidMotion parse_motion(const Json& spec, int dim);
Json to_json(const RigidMotion& m);

/// Operator spec with optional inline "source"/"target" domain specs (objects
/// or paths relative to base_dir). Tabulated CSV paths are resolved the same
/// way. Explicit source/target arguments take precedence over the file.
OperatorSpec parse_operator_spec(const Json& spec, const std::filesystem::path& base_dir, double h,
                                 DomainPtr source = nullptr, DomainPtr target = nullptr);

Json to_json(const GateauxReport& r);
Json to_json(const DefectReport& r);
Json to_json(const RigidFitReport& r);
Json to_json(const CongruenceReport& r);

}  // namespace sil
