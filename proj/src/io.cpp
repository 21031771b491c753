#include "sil/io.hpp"

#include <cmath>
#include <fstream>
#include <regex>

namespace sil {

namespace fs = std::filesystem;

Json load_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw SpecError("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw SpecError(path.string() + ": " + e.what());
    }
}

namespace {

double number(const Json& j, const char* key)
{
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw SpecError(std::string("expected a number for \"") + key + "\"");
    }
    return j.at(key).get<double>();
}

Point point(const Json& j, int dim, const char* what)
{
    if (!j.is_array() || static_cast<int>(j.size()) != dim) {
        throw SpecError(std::string(what) + " must be an array of length " + std::to_string(dim));
    }
    Point x{0.0, 0.0};
    for (int d = 0; d < dim; ++d) {
        if (!j[static_cast<std::size_t>(d)].is_number()) {
            throw SpecError(std::string(what) + " must contain numbers");
        }
        x[d] = j[static_cast<std::size_t>(d)].get<double>();
    }
    return x;
}

struct Box {
    Point lo;
    Point hi;
};

std::vector<Box> boxes(const Json& list, int dim, const char* what)
{
    if (!list.is_array()) {
        throw SpecError(std::string(what) + " must be an array");
    }
    std::vector<Box> out;
    for (const auto& b : list) {
        if (!b.is_object() || !b.contains("lo") || !b.contains("hi")) {
            throw SpecError(std::string(what) + " entries need \"lo\" and \"hi\"");
        }
        Box box{point(b.at("lo"), dim, "lo"), point(b.at("hi"), dim, "hi")};
        for (int d = 0; d < dim; ++d) {
            if (!(box.lo[d] < box.hi[d])) {
                throw SpecError("box needs lo < hi");
            }
        }
        out.push_back(box);
    }
    return out;
}

bool inside_box(const Box& b, const Point& x, int dim)
{
    for (int d = 0; d < dim; ++d) {
        if (!(x[d] > b.lo[d] && x[d] < b.hi[d])) {
            return false;
        }
    }
    return true;
}

GridDomain builtin_domain(const std::string& name, double h)
{
    static const std::regex cantor(R"(fat_cantor\(\s*([0-9.eE+-]+)\s*\))");
    std::smatch m;
    if (name == "unit_interval") {
        return make_interval(0.0, 1.0, h);
    }
    if (name == "unit_square") {
        return make_rectangle({0.0, 0.0}, {1.0, 1.0}, h);
    }
    if (name == "example_4_8_omega1") {
        return example_4_8_omega1(h);
    }
    if (name == "example_4_8_omega2") {
        return example_4_8_omega2(h);
    }
    if (name == "example_5_4_omega1") {
        return example_5_4_omega1(h);
    }
    if (name == "example_5_4_omega2") {
        return example_5_4_omega2(h);
    }
    if (std::regex_match(name, m, cantor)) {
        return make_fat_cantor_complement(std::stod(m[1].str()), h);
    }
    throw SpecError("unknown builtin domain: " + name);
}

}  // namespace

GridDomain parse_domain_spec(const Json& spec, double default_h)
{
    if (!spec.is_object()) {
        throw SpecError("domain spec must be a JSON object");
    }
    const double h = spec.contains("h") ? number(spec, "h") : default_h;
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw SpecError("domain spec needs a positive grid width h");
    }
    try {
        if (spec.contains("builtin")) {
            if (!spec.at("builtin").is_string()) {
                throw SpecError("\"builtin\" must be a string");
            }
            return builtin_domain(spec.at("builtin").get<std::string>(), h);
        }
        const int dim = static_cast<int>(number(spec, "dim"));
        if (dim < 1 || dim > kMaxDim) {
            throw SpecError("dim must be 1 or 2");
        }
        if (!spec.contains("boxes")) {
            throw SpecError("domain spec needs \"boxes\" or \"builtin\"");
        }
        const auto include = boxes(spec.at("boxes"), dim, "boxes");
        if (include.empty()) {
            throw SpecError("domain spec needs at least one box");
        }
        const auto exclude = spec.contains("subtract") ? boxes(spec.at("subtract"), dim, "subtract") : std::vector<Box>{};
        const Point origin = spec.contains("origin") ? point(spec.at("origin"), dim, "origin") : Point{0.0, 0.0};
        CellIndex lo{0, 0};
        CellIndex hi{1, 1};
        for (int d = 0; d < dim; ++d) {
            double a = include.front().lo[d];
            double b = include.front().hi[d];
            for (const auto& box : include) {
                a = std::min(a, box.lo[d]);
                b = std::max(b, box.hi[d]);
            }
            lo[d] = static_cast<std::int64_t>(std::floor((a - origin[d]) / h));
            hi[d] = static_cast<std::int64_t>(std::ceil((b - origin[d]) / h));
        }
        return rasterize(dim, h, origin, lo, hi, [&](const Point& x) {
            bool in = false;
            for (const auto& box : include) {
                in = in || inside_box(box, x, dim);
            }
            for (const auto& box : exclude) {
                in = in && !inside_box(box, x, dim);
            }
            return in;
        });
    } catch (const DomainError& e) {
        throw SpecError(e.what());
    } catch (const Json::exception& e) {
        throw SpecError(e.what());
    }
}

GridDomain load_domain_spec(const fs::path& path, double default_h)
{
    return parse_domain_spec(load_json(path), default_h);
}

RigidMotion parse_motion(const Json& spec, int dim)
{
    if (!spec.is_object()) {
        throw SpecError("motion spec must be a JSON object");
    }
    RigidMotion m = RigidMotion::identity(dim);
    if (spec.contains("Q")) {
        const Json& q = spec.at("Q");
        if (!q.is_array() || static_cast<int>(q.size()) != dim) {
            throw SpecError("Q must be a dim x dim array");
        }
        for (int i = 0; i < dim; ++i) {
            const Point row = point(q[static_cast<std::size_t>(i)], dim, "Q row");
            for (int j = 0; j < dim; ++j) {
                m.Q[i][j] = row[j];
            }
        }
    }
    if (spec.contains("b")) {
        m.b = point(spec.at("b"), dim, "b");
    }
    if (spec.contains("sign")) {
        m.sign = static_cast<int>(number(spec, "sign"));
    }
    try {
        m.validate();
    } catch (const DomainError& e) {
        throw SpecError(e.what());
    }
    return m;
}

Json to_json(const RigidMotion& m)
{
    Json q = Json::array();
    for (int i = 0; i < m.dim; ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.dim; ++j) {
            row.push_back(m.Q[i][j]);
        }
        q.push_back(row);
    }
    Json b = Json::array();
    for (int i = 0; i < m.dim; ++i) {
        b.push_back(m.b[i]);
    }
    return Json{{"Q", q}, {"b", b}, {"sign", m.sign}};
}

namespace {

DomainPtr resolve_domain(const Json& spec, const char* key, const fs::path& base_dir, double h)
{
    if (!spec.contains(key)) {
        return nullptr;
    }
    const Json& d = spec.at(key);
    if (d.is_string()) {
        return share(load_domain_spec(base_dir / d.get<std::string>(), h));
    }
    return share(parse_domain_spec(d, h));
}

template <class T, class Reader>
T read_csv_file(const fs::path& path, const DomainPtr& omega, Reader reader)
{
    std::ifstream in(path);
    if (!in) {
        throw SpecError("cannot open " + path.string());
    }
    try {
        return reader(in, omega);
    } catch (const FieldError& e) {
        throw SpecError(path.string() + ": " + e.what());
    }
}

}  // namespace

OperatorSpec parse_operator_spec(const Json& spec, const fs::path& base_dir, double h, DomainPtr source,
                                 DomainPtr target)
{
    if (!spec.is_object()) {
        throw SpecError("operator spec must be a JSON object");
    }
    const double grid = spec.contains("h") ? number(spec, "h") : h;
    OperatorSpec out{OperatorSpec::Builtin{}, source ? source : resolve_domain(spec, "source", base_dir, grid),
                     target ? target : resolve_domain(spec, "target", base_dir, grid)};
    const int n_kinds = static_cast<int>(spec.contains("builtin")) + static_cast<int>(spec.contains("rigid")) +
                        static_cast<int>(spec.contains("tabulated"));
    if (n_kinds != 1) {
        throw SpecError("operator spec needs exactly one of builtin, rigid, tabulated");
    }
    if (spec.contains("builtin")) {
        if (!spec.at("builtin").is_string()) {
            throw SpecError("\"builtin\" must be a string");
        }
        out.variant = OperatorSpec::Builtin{spec.at("builtin").get<std::string>()};
    } else if (spec.contains("rigid")) {
        if (!out.target) {
            throw SpecError("rigid operator spec needs a target domain");
        }
        const Json& list = spec.at("rigid");
        if (!list.is_array() || list.empty()) {
            throw SpecError("\"rigid\" must be a nonempty array");
        }
        OperatorSpec::Rigid rigid;
        for (const auto& item : list) {
            RigidPiece piece{parse_motion(item, out.target->dim()), 0};
            if (item.contains("component")) {
                const double c = number(item, "component");
                if (c < 0.0 || c != std::floor(c)) {
                    throw SpecError("component must be a nonnegative integer");
                }
                piece.component = static_cast<std::size_t>(c);
            }
            rigid.pieces.push_back(piece);
        }
        out.variant = std::move(rigid);
    } else {
        if (!out.target) {
            throw SpecError("tabulated operator spec needs a target domain");
        }
        const Json& t = spec.at("tabulated");
        if (!t.is_object() || !t.contains("g") || !t.contains("xi") || !t.at("g").is_string() ||
            !t.at("xi").is_string()) {
            throw SpecError("\"tabulated\" needs string paths \"g\" and \"xi\"");
        }
        Field g = read_csv_file<Field>(base_dir / t.at("g").get<std::string>(), out.target,
                                       [](std::istream& in, const DomainPtr& d) { return read_field_csv(in, d); });
        VectorField xi = read_csv_file<VectorField>(
            base_dir / t.at("xi").get<std::string>(), out.target,
            [](std::istream& in, const DomainPtr& d) { return read_vector_field_csv(in, d); });
        out.variant = OperatorSpec::Tabulated{std::move(g), std::move(xi)};
    }
    return out;
}

namespace {

template <class T>
Json optional_json(const std::optional<T>& v)
{
    return v ? Json(*v) : Json(nullptr);
}

Json box_json(const std::pair<Point, Point>& box, int dim)
{
    Json lo = Json::array();
    Json hi = Json::array();
    for (int d = 0; d < dim; ++d) {
        lo.push_back(box.first[d]);
        hi.push_back(box.second[d]);
    }
    return Json{{"lo", lo}, {"hi", hi}};
}

}  // namespace

Json to_json(const GateauxReport& r)
{
    return Json{{"s", r.s_values}, {"error", r.errors}, {"slope", r.slope}, {"predicted", r.predicted}};
}

Json to_json(const DefectReport& r)
{
    Json out{{"isometry", optional_json(r.isometry)},
             {"disjointness", optional_json(r.disjointness)},
             {"intertwining", optional_json(r.intertwining)},
             {"orthogonality", optional_json(r.orthogonality)},
             {"grad_g", optional_json(r.grad_g)},
             {"weight", optional_json(r.weight)},
             {"n1_measure", optional_json(r.n1_measure)},
             {"n2_cells", optional_json(r.n2_cells)}};
    out["theorems"] = Json{{"isometry", "isometry"},
                           {"disjointness", "disjointness-preservation"},
                           {"intertwining", "intertwining"},
                           {"orthogonality", "rigid-motion"},
                           {"grad_g", "rigid-motion"},
                           {"weight", "rigid-motion"},
                           {"n1_measure", "defect-sets"},
                           {"n2_cells", "defect-sets"}};
    return out;
}

Json to_json(const RigidFitReport& r)
{
    Json comps = Json::array();
    for (const auto& c : r.components) {
        comps.push_back(Json{{"component", c.component},
                             {"nodes", c.nodes},
                             {"motion", to_json(c.motion)},
                             {"fit_residual", c.fit_residual}});
    }
    return Json{{"orthogonality_defect", r.orthogonality_defect},
                {"grad_g_defect", r.grad_g_defect},
                {"weight_defect", r.weight_defect},
                {"components", comps}};
}

Json to_json(const CongruenceReport& r)
{
    const int dim = r.reconstruction.g_hat.domain().dim();
    Json pairing = Json::array();
    for (const auto& p : r.pairing) {
        pairing.push_back(Json{{"component", p.component},
                               {"measure", p.measure},
                               {"motion", to_json(p.motion)},
                               {"source_box", box_json(p.source_box, dim)},
                               {"image_box", box_json(p.image_box, dim)},
                               {"outside_measure", p.outside_measure}});
    }
    return Json{{"congruent", r.congruent},
                {"reasons", r.reasons},
                {"fit", to_json(r.fit)},
                {"defects", to_json(r.defect_report())},
                {"zero_set_cells", r.reconstruction.zero_set_cells},
                {"pairing", pairing},
                {"overlap_measure", r.overlap_measure},
                {"tiling_defect", r.tiling_defect},
                {"h3_defect", r.h3_defect},
                {"h3_inverted", r.h3_inverted}};
}

}  // namespace sil
