#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "prhf/config.hpp"
#include "prhf/orbital_io.hpp"

using namespace prhf;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

json minimal_config() {
    return json{{"schema_version", 1},
                {"grid", {{"n", 16}, {"L", 10.0}}},
                {"physics", {{"kappa", 1.0}}},
                {"initial", {{"shells", {{{"l", 0}, {"scale", 1.2}}}}}},
                {"integrator", {{"dt", 0.01}, {"t_end", 0.1}}}};
}

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("minimal config materializes documented defaults", "[config]") {
    const SimConfig c = parse_config_json(minimal_config());
    REQUIRE(c.schema_version == 1);
    REQUIRE(c.n == 16);
    REQUIRE(c.L == 10.0);
    REQUIRE(c.m == 1.0);
    REQUIRE(c.mode == Mode::hartree_fock);
    REQUIRE(c.kappa.has_value());
    REQUIRE(*c.kappa == 1.0);
    REQUIRE_FALSE(c.margin_over_critical.has_value());
    REQUIRE(c.shells.shells.size() == 1);
    REQUIRE(c.shells.shells[0].l == 0);
    REQUIRE(c.shells.shells[0].kind == ProfileKind::gaussian);
    REQUIRE(c.shells.shells[0].scale == 1.2);
    REQUIRE(c.shells.shells[0].degree == 0);
    REQUIRE(c.container.empty());
    REQUIRE_FALSE(c.dilation.has_value());
    REQUIRE(c.integrator.dt == 0.01);
    REQUIRE(c.integrator.t_end == 0.1);
    REQUIRE(c.integrator.sample_every == 10);
    REQUIRE(c.integrator.tail_frac_max == 1e-3);
    REQUIRE(c.integrator.sobolev_growth_max == 10.0);
    REQUIRE(c.integrator.drift_tol == drift_tol);
    REQUIRE_FALSE(c.integrator.relowdin);
    REQUIRE(c.out_dir == "out");
    REQUIRE(c.write_csv);
    REQUIRE_FALSE(c.write_jsonl);
    REQUIRE(c.conc_radii == std::vector<double>{1.0, 2.0, 4.0});
    REQUIRE(c.integrator.radii == c.conc_radii);
    REQUIRE(c.seed == 0);
}

TEST_CASE("unknown keys are rejected with their full path", "[config]") {
    json j = minimal_config();
    j["grdi"] = 1;
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("unknown key \"$.grdi\""));

    j = minimal_config();
    j["grid"]["nn"] = 32;
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("unknown key \"$.grid.nn\""));

    j = minimal_config();
    j["integrator"]["dtt"] = 0.5;
    REQUIRE_THROWS_WITH(parse_config_json(j),
                        ContainsSubstring("unknown key \"$.integrator.dtt\""));

    j = minimal_config();
    j["initial"]["shells"][0]["sigma"] = 2.0;
    REQUIRE_THROWS_WITH(parse_config_json(j),
                        ContainsSubstring("unknown key \"$.initial.shells[0].sigma\""));
}

TEST_CASE("schema version gate", "[config]") {
    json j = minimal_config();
    j["schema_version"] = 2;
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("unsupported schema_version 2"));
    j.erase("schema_version");
    REQUIRE_THROWS_WITH(parse_config_json(j),
                        ContainsSubstring("missing required key \"$.schema_version\""));
}

TEST_CASE("parse errors carry the line number", "[config]") {
    const std::string text = "{\n  \"schema_version\": 1,\n  \"grid\": oops\n}";
    REQUIRE_THROWS_MATCHES(parse_config_text(text), ConfigError,
                           Catch::Matchers::MessageMatches(ContainsSubstring("line 3")));
}

TEST_CASE("coupling is kappa xor margin_over_critical", "[config]") {
    json j = minimal_config();
    j["physics"]["margin_over_critical"] = 0.5;
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("exactly one"));

    j["physics"].erase("kappa");
    j["physics"].erase("margin_over_critical");
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("exactly one"));

    j = minimal_config();
    j["physics"]["kappa"] = -0.25;
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("kappa must be >= 0"));

    j = minimal_config();
    j["physics"].erase("kappa");
    j["physics"]["margin_over_critical"] = 0.0;
    REQUIRE_THROWS_WITH(parse_config_json(j),
                        ContainsSubstring("margin_over_critical must be > 0"));

    j["physics"]["margin_over_critical"] = 0.5;
    j["physics"]["mode"] = "free";
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("no meaning in free mode"));

    // kappa = 0 is a legitimate non-interacting run
    j = minimal_config();
    j["physics"]["kappa"] = 0.0;
    REQUIRE(parse_config_json(j).kappa.value() == 0.0);
}

TEST_CASE("initial data is shells xor container", "[config]") {
    json j = minimal_config();
    j["initial"]["container"] = "state.orb";
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("exactly one"));

    j["initial"].erase("shells");
    const SimConfig c = parse_config_json(j);
    REQUIRE(c.container == "state.orb");
    REQUIRE(c.shells.shells.empty());

    j["initial"].erase("container");
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("exactly one"));

    j = minimal_config();
    j["initial"]["shells"] = json::array();
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("non-empty"));

    j = minimal_config();
    j["initial"]["shells"][0]["scale"] = "big";
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("wrong type"));

    j = minimal_config();
    j["initial"]["dilation"] = -1.0;
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("dilation must be > 0"));
}

TEST_CASE("required sections and integrator validation propagate", "[config]") {
    json j = minimal_config();
    j.erase("initial");
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("\"$.initial\""));

    j = minimal_config();
    j.erase("integrator");
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("\"$.integrator\""));

    j = minimal_config();
    j["integrator"].erase("dt");
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("\"$.integrator.dt\""));

    j = minimal_config();
    j["integrator"]["dt"] = -0.5;
    REQUIRE_THROWS_AS(parse_config_json(j), ConfigError);

    j = minimal_config();
    j["integrator"]["sample_every"] = 0;
    REQUIRE_THROWS_AS(parse_config_json(j), ConfigError);

    j = minimal_config();
    j["grid"]["n"] = 9;
    REQUIRE_THROWS_AS(parse_config_json(j), ConfigError);

    j = minimal_config();
    j["output"]["concentration_radii"] = json::array();
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("non-empty"));

    j = minimal_config();
    j["output"]["concentration_radii"] = {1.0, -2.0};
    REQUIRE_THROWS_WITH(parse_config_json(j), ContainsSubstring("must be > 0"));
}

TEST_CASE("config errors are a distinct exception type", "[config]") {
    json j = minimal_config();
    j["schema_version"] = 3;
    REQUIRE_THROWS_AS(parse_config_json(j), ConfigError);
    REQUIRE_THROWS_AS(parse_config_json(j), std::runtime_error);
}

TEST_CASE("resolved config is a fixed point of parsing", "[config]") {
    json j = minimal_config();
    j["physics"]["mode"] = "hartree";
    j["seed"] = 1234567890123ull;
    j["output"] = {{"directory", "runs/a"}, {"jsonl", true},
                   {"concentration_radii", {0.5, 1.5}}};
    j["initial"]["dilation"] = 1.2;

    const SimConfig c1 = parse_config_json(j);
    const json r1 = resolved_json(c1);
    const SimConfig c2 = parse_config_json(r1);
    const json r2 = resolved_json(c2);
    REQUIRE(r1 == r2);

    REQUIRE(c2.mode == Mode::hartree);
    REQUIRE(c2.seed == 1234567890123ull);
    REQUIRE(c2.out_dir == "runs/a");
    REQUIRE(c2.write_jsonl);
    REQUIRE(c2.conc_radii == std::vector<double>{0.5, 1.5});
    REQUIRE(c2.dilation.has_value());
    REQUIRE(*c2.dilation == 1.2);
    REQUIRE(c2.integrator.dt == c1.integrator.dt);
}

TEST_CASE("cannot open a missing config file", "[config]") {
    REQUIRE_THROWS_WITH(load_config(tmp_path("does_not_exist_qq.json")),
                        ContainsSubstring("cannot open"));
}

TEST_CASE("orbital container round-trips bit-exactly", "[io]") {
    const Grid g = make_grid(16, 10.0, 1.0);
    OrbitalSet S = testutil::gaussian_set(g, {1.0, 1.3}, 0.7, Mode::hartree);
    S.t = 0.33;
    const std::string path = tmp_path("prhf_roundtrip.orb");
    save_orbitals(S, path);

    const OrbitalSet R = load_orbitals(path);
    REQUIRE(R.grid() == g);
    REQUIRE(R.kappa == S.kappa);
    REQUIRE(R.t == S.t);
    REQUIRE(R.mode == S.mode);
    REQUIRE(R.orbitals.size() == S.orbitals.size());
    for (std::size_t j = 0; j < S.orbitals.size(); ++j)
        REQUIRE(std::memcmp(R.orbitals[j].data.data(), S.orbitals[j].data.data(),
                            S.orbitals[j].data.size() * sizeof(cxd)) == 0);

    // sidecar carries matching metadata
    std::ifstream side(path + ".json");
    REQUIRE(side.good());
    json meta;
    side >> meta;
    REQUIRE(meta.at("format") == "prhf-orbitals-v1");
    REQUIRE(meta.at("n") == 16);
    REQUIRE(meta.at("L") == 10.0);
    REQUIRE(meta.at("N") == 2);
    REQUIRE(meta.at("kappa") == 0.7);
    REQUIRE(meta.at("t") == 0.33);
    REQUIRE(meta.at("mode") == "hartree");

    std::remove(path.c_str());
    std::remove((path + ".json").c_str());
}

namespace {

// clone a container file, overwriting bytes at a given offset
std::string patched_copy(const std::string& src, const std::string& name, std::size_t offset,
                         const void* bytes, std::size_t len) {
    std::ifstream in(src, std::ios::binary);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::memcpy(blob.data() + offset, bytes, len);
    const std::string dst = tmp_path(name);
    std::ofstream out(dst, std::ios::binary | std::ios::trunc);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    return dst;
}

std::string truncated_copy(const std::string& src, const std::string& name, std::size_t keep) {
    std::ifstream in(src, std::ios::binary);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    blob.resize(keep);
    const std::string dst = tmp_path(name);
    std::ofstream out(dst, std::ios::binary | std::ios::trunc);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    return dst;
}

}  // namespace

TEST_CASE("orbital container rejects damaged files", "[io]") {
    const Grid g = make_grid(16, 10.0, 1.0);
    const OrbitalSet S = testutil::gaussian_set(g, {1.1}, 0.0, Mode::free_particle);
    const std::string good = tmp_path("prhf_good.orb");
    save_orbitals(S, good);

    SECTION("missing file") {
        REQUIRE_THROWS_WITH(load_orbitals(tmp_path("prhf_nope.orb")),
                            ContainsSubstring("cannot open"));
    }
    SECTION("not a container") {
        const std::string junk = tmp_path("prhf_junk.orb");
        std::ofstream(junk) << "this is not an orbital container, honestly";
        REQUIRE_THROWS_WITH(load_orbitals(junk), ContainsSubstring("not an orbital container"));
        std::remove(junk.c_str());
    }
    SECTION("endianness mismatch") {
        const std::uint32_t wrong = 0x04030201u;
        const std::string bad = patched_copy(good, "prhf_endian.orb", 8, &wrong, sizeof(wrong));
        REQUIRE_THROWS_WITH(load_orbitals(bad), ContainsSubstring("endianness mismatch"));
        std::remove(bad.c_str());
    }
    SECTION("truncated header") {
        const std::string bad = truncated_copy(good, "prhf_trunc_hdr.orb", 40);
        REQUIRE_THROWS_WITH(load_orbitals(bad), ContainsSubstring("truncated header"));
        std::remove(bad.c_str());
    }
    SECTION("truncated orbital data") {
        const std::string bad = truncated_copy(good, "prhf_trunc_data.orb", 60 + 1000);
        REQUIRE_THROWS_WITH(load_orbitals(bad), ContainsSubstring("truncated orbital data"));
        std::remove(bad.c_str());
    }
    SECTION("implausible orbital count") {
        const std::int32_t huge = 100000;
        const std::string bad = patched_copy(good, "prhf_count.orb", 16, &huge, sizeof(huge));
        REQUIRE_THROWS_WITH(load_orbitals(bad), ContainsSubstring("implausible orbital count"));
        std::remove(bad.c_str());
    }
    SECTION("unknown mode tag") {
        const std::int32_t weird = 7;
        const std::string bad = patched_copy(good, "prhf_mode.orb", 20, &weird, sizeof(weird));
        REQUIRE_THROWS_WITH(load_orbitals(bad), ContainsSubstring("unknown mode tag"));
        std::remove(bad.c_str());
    }
    SECTION("unwritable destination") {
        REQUIRE_THROWS_WITH(save_orbitals(S, "/nonexistent_dir_zz/x.orb"),
                            ContainsSubstring("cannot open"));
    }

    std::remove(good.c_str());
    std::remove((good + ".json").c_str());
}
