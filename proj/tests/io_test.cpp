#include "sil/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace sil;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("sil_io_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST(DomainSpec, BoxesWithSubtraction)
{
    const Json spec = Json::parse(R"({"dim": 2, "h": 0.01,
        "boxes": [{"lo": [0, -1], "hi": [1, 1]}],
        "subtract": [{"lo": [0.25, -0.25], "hi": [0.75, 0.25]}]})");
    const GridDomain omega = parse_domain_spec(spec);
    EXPECT_NEAR(omega.measure(), 2.0 - 0.25, 0.04);
    EXPECT_FALSE(omega.contains({0.5, 0.0}));
    EXPECT_TRUE(omega.contains({0.1, 0.0}));
}

TEST(DomainSpec, BuiltinNames)
{
    const GridDomain strips = parse_domain_spec(Json::parse(R"({"builtin": "example_5_4_omega2", "h": 0.02})"));
    EXPECT_EQ(connected_components(strips).size(), 2U);
    const GridDomain cantor = parse_domain_spec(Json::parse(R"j({"builtin": "fat_cantor(0.5)"})j"), 1e-4);
    EXPECT_NEAR(cantor.measure(), 0.5, 0.02);
    EXPECT_EQ(parse_domain_spec(Json::parse(R"({"builtin": "unit_interval", "h": 0.1})")).size(), 10U);
}

TEST(DomainSpec, Errors)
{
    EXPECT_THROW(parse_domain_spec(Json::parse(R"({"builtin": "unit_square"})")), SpecError);
    EXPECT_THROW(parse_domain_spec(Json::parse(R"({"builtin": "moon", "h": 0.1})")), SpecError);
    EXPECT_THROW(parse_domain_spec(Json::parse(R"({"dim": 3, "h": 0.1, "boxes": []})")), SpecError);
    EXPECT_THROW(parse_domain_spec(Json::parse(R"({"dim": 1, "h": 0.1, "boxes": [{"lo": [1], "hi": [0]}]})")),
                 SpecError);
    EXPECT_THROW(parse_domain_spec(Json::parse(R"([1, 2])")), SpecError);
}

TEST(DomainSpec, LoadFromFile)
{
    const fs::path dir = scratch_dir("load");
    std::ofstream(dir / "d.json") << R"({"dim": 1, "h": 0.25, "boxes": [{"lo": [0], "hi": [1]}]})";
    EXPECT_EQ(load_domain_spec(dir / "d.json").size(), 4U);
    EXPECT_THROW(load_domain_spec(dir / "missing.json"), SpecError);
    std::ofstream(dir / "bad.json") << "{not json";
    EXPECT_THROW(load_domain_spec(dir / "bad.json"), SpecError);
}

TEST(MotionSpec, ParseAndRoundTrip)
{
    const RigidMotion m = parse_motion(Json::parse(R"({"Q": [[0, -1], [1, 0]], "b": [1, 0], "sign": -1})"), 2);
    EXPECT_EQ(m.sign, -1);
    EXPECT_EQ(m.Q[0][1], -1.0);
    const RigidMotion back = parse_motion(to_json(m), 2);
    EXPECT_EQ(back.Q, m.Q);
    EXPECT_EQ(back.b, m.b);
    EXPECT_THROW(parse_motion(Json::parse(R"({"Q": [[2, 0], [0, 1]]})"), 2), SpecError);
    EXPECT_THROW(parse_motion(Json::parse(R"({"sign": 0})"), 2), SpecError);
}

TEST(OperatorSpec, BuiltinAndRigid)
{
    const OperatorSpec b = parse_operator_spec(Json::parse(R"({"builtin": "example_4_8"})"), ".", 1e-3);
    EXPECT_EQ(make_operator(b, 1e-3)->name(), "example_4_8");

    const Json rigid = Json::parse(R"({
        "rigid": [{"Q": [[1, 0], [0, 1]], "b": [0, -1], "sign": 1, "component": 1},
                  {"Q": [[1, 0], [0, 1]], "b": [0, 1], "sign": 1, "component": 0}],
        "source": {"builtin": "example_5_4_omega1"},
        "target": {"builtin": "example_5_4_omega2"}})");
    const auto op = make_operator(parse_operator_spec(rigid, ".", 0.02), 0.02);
    EXPECT_TRUE(congruence_pipeline(*op, 3.0, 0.08).congruent);
}

TEST(OperatorSpec, TabulatedFromCsv)
{
    const fs::path dir = scratch_dir("tabulated");
    const auto omega = share(make_interval(0.0, 1.0, 0.1));
    {
        std::ofstream g(dir / "g.csv");
        write_csv(g, Field::constant(omega, 1.0));
        std::vector<Point> map;
        for (std::size_t k = 0; k < omega->size(); ++k) {
            map.push_back({1.0 - omega->center(k)[0], 0.0});
        }
        std::ofstream xi(dir / "xi.csv");
        write_csv(xi, VectorField(omega, map));
    }
    std::ofstream(dir / "op.json") << R"({"tabulated": {"g": "g.csv", "xi": "xi.csv"},
        "source": {"builtin": "unit_interval"}, "target": {"builtin": "unit_interval"}})";
    const OperatorSpec spec = parse_operator_spec(load_json(dir / "op.json"), dir, 0.1);
    const auto op = make_operator(spec, 0.1);
    const ReconstructionResult rec = reconstruct(*op, 2.0);
    for (std::size_t k = 0; k < omega->size(); ++k) {
        EXPECT_NEAR(rec.xi_hat[k][0], 1.0 - omega->center(k)[0], 1e-12);
    }
}

TEST(OperatorSpec, Errors)
{
    EXPECT_THROW(parse_operator_spec(Json::parse(R"({})"), ".", 0.1), SpecError);
    EXPECT_THROW(parse_operator_spec(Json::parse(R"({"builtin": "identity", "rigid": []})"), ".", 0.1), SpecError);
    EXPECT_THROW(parse_operator_spec(Json::parse(R"({"rigid": [{"b": [0, 0]}]})"), ".", 0.1), SpecError);
    EXPECT_THROW(parse_operator_spec(Json::parse(R"({"tabulated": {"g": "nope.csv", "xi": "nope.csv"},
                     "target": {"builtin": "unit_interval"}})"),
                                     ".", 0.1),
                 SpecError);
}

TEST(ReportJson, DefectReportFieldNames)
{
    DefectReport r;
    r.isometry = 0.5;
    r.n2_cells = 3;
    const Json j = to_json(r);
    const std::vector<std::string> expected{"isometry",      "disjointness", "intertwining", "orthogonality",
                                            "grad_g",        "weight",       "n1_measure",   "n2_cells"};
    std::vector<std::string> keys;
    for (const auto& [key, value] : j.items()) {
        if (key != "theorems") {
            keys.push_back(key);
        }
    }
    EXPECT_EQ(keys, expected);
    EXPECT_EQ(j["isometry"], 0.5);
    EXPECT_EQ(j["n2_cells"], 3);
    EXPECT_TRUE(j["intertwining"].is_null());
    EXPECT_EQ(j["theorems"]["disjointness"], "disjointness-preservation");
}

TEST(ReportJson, GateauxReportKeys)
{
    GateauxReport g;
    g.s_values = {1e-2};
    g.errors = {3e-3};
    g.slope = 1.0;
    const Json j = to_json(g);
    EXPECT_EQ(j["s"][0], 1e-2);
    EXPECT_EQ(j["error"][0], 3e-3);
    EXPECT_EQ(j["slope"], 1.0);
}
