#include <doctest.h>

#include "vfd/config.hpp"
#include "vfd/errors.hpp"

using namespace vfd;

TEST_CASE("minimal profile config fills defaults") {
    RunConfig cfg = parse_config("m = -0.5\nmu = 1\n", Subcommand::Profile);
    CHECK(cfg.subcommand == Subcommand::Profile);
    CHECK(cfg.profile.m == -0.5);
    CHECK(cfg.profile.mu == 1.0);
    CHECK_FALSE(cfg.profile.use_eta);
    CHECK(cfg.profile.dr <= 0.0);   // auto
    CHECK(cfg.profile.r_max <= 0.0); // auto
}

TEST_CASE("subcommand resolution") {
    RunConfig a = parse_config("subcommand = profile\nm = -0.2\n");
    CHECK(a.subcommand == Subcommand::Profile);

    CHECK_THROWS_AS(parse_config("subcommand = profile\n", Subcommand::Converge),
                    ValidationError);
    CHECK_THROWS_AS(parse_config("m = -0.5\n"), ValidationError); // no subcommand anywhere
    CHECK_THROWS_AS(parse_config("subcommand = fly\n"), ValidationError);
    CHECK(subcommand_from_name("green-check").has_value());
    CHECK_FALSE(subcommand_from_name("greencheck").has_value());
}

TEST_CASE("range violations name the key and the range") {
    try {
        parse_config("m = 0.5\nmu = 1\n", Subcommand::Profile);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.key == "m");
        CHECK(std::string(e.what()).find("(-1") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("mu = -2\n", Subcommand::Profile), ValidationError);
    CHECK_THROWS_AS(parse_config("eps = -1e-3\n", Subcommand::Converge), ValidationError);
}

TEST_CASE("R_list must increase strictly") {
    CHECK_THROWS_AS(parse_config("R_list = [10, 5]\n", Subcommand::Converge), ValidationError);
    CHECK_THROWS_AS(parse_config("R_list = [10, 10]\n", Subcommand::Converge), ValidationError);
    RunConfig ok = parse_config("R_list = [10, 20, 40]\n", Subcommand::Converge);
    CHECK(ok.exp.R_list == std::vector<double>{10.0, 20.0, 40.0});
}

TEST_CASE("unknown keys are hard errors") {
    CHECK_THROWS_AS(parse_config("m = -0.5\nbanana = 1\n", Subcommand::Profile),
                    ValidationError);
    // a key valid for converge is unknown for profile
    CHECK_THROWS_AS(parse_config("R_list = [10, 20]\n", Subcommand::Profile), ValidationError);
}

TEST_CASE("parse errors carry the line number") {
    try {
        parse_config("m = -0.5\nmu 1\n", Subcommand::Profile);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(parse_config("m = \n", Subcommand::Profile), ParseError);
    CHECK_THROWS_AS(parse_config("m = -0.5\nm = -0.4\n", Subcommand::Profile), ParseError);
    CHECK_THROWS_AS(parse_config("xs = [1, oops]\n", Subcommand::Converge), ParseError);
    CHECK_THROWS_AS(parse_config("s = \"open\n", Subcommand::Converge), ParseError);
}

TEST_CASE("comments, quoting and arrays") {
    const char* text =
        "# leading comment\n"
        "subcommand = \"converge\"  # trailing comment\n"
        "m = -0.5\n"
        "u0 = bump\n"
        "u0_mass = 2.0\n"
        "R_list = [10, 20, 40]\n"
        "window_t = [0.1, 0.5]\n";
    RunConfig cfg = parse_config(text);
    CHECK(cfg.subcommand == Subcommand::Converge);
    CHECK(cfg.exp.u0.kind == InitialDatum::Kind::Bump);
    CHECK(cfg.exp.window.t_begin == 0.1);
    CHECK(cfg.exp.window.t_end == 0.5);
}

TEST_CASE("boundary data block") {
    RunConfig mu = parse_config("mu = 2.0\n", Subcommand::Converge);
    CHECK(mu.exp.constant_mu);
    CHECK(mu.exp.f(0.7) == 2.0);
    CHECK(mu.exp.g(0.7) == 2.0);

    RunConfig lin = parse_config("f = linear\nf_value = 1\nf_slope = 1\ng = 1.0\n",
                                 Subcommand::Converge);
    CHECK_FALSE(lin.exp.constant_mu);
    CHECK(lin.exp.f(0.5) == doctest::Approx(1.5));
    CHECK(lin.exp.g(0.5) == 1.0);

    RunConfig st = parse_config("f = step\nf_times = [0.3]\nf_values = [1, 2]\ng = 1\n",
                                Subcommand::Converge);
    CHECK(st.exp.f(0.2) == 1.0);
    CHECK(st.exp.f(0.4) == 2.0);

    CHECK_THROWS_AS(parse_config("mu = 1\nf = 2\n", Subcommand::Converge), ValidationError);
    CHECK_THROWS_AS(parse_config("f = step\nf_times = [0.3]\n", Subcommand::Converge),
                    ValidationError);
    CHECK_THROWS_AS(parse_config("f = quadratic\n", Subcommand::Converge), ValidationError);
}

TEST_CASE("custom datum block") {
    RunConfig cfg = parse_config(
        "u0 = custom\nu0_x = [-1, 0, 1]\nu0_u = [0, 2, 0]\n", Subcommand::Solve);
    CHECK(cfg.exp.u0.kind == InitialDatum::Kind::Custom);
    CHECK(cfg.exp.u0.xs.size() == 3);
    CHECK_THROWS_AS(parse_config("u0 = custom\nu0_x = [0]\nu0_u = [1]\n", Subcommand::Solve),
                    ValidationError);
}

TEST_CASE("solve extras and green parameters") {
    RunConfig s = parse_config("bc = neumann\nR = 12\nsnapshots = [0.1, 0.2]\n",
                               Subcommand::Solve);
    CHECK(s.solve.neumann);
    CHECK(s.solve.half_width == 12.0);
    CHECK(s.solve.snapshots.size() == 2);
    CHECK_THROWS_AS(parse_config("bc = robin\n", Subcommand::Solve), ValidationError);

    RunConfig g = parse_config("R = 3\nnodes = 101\nrefine_levels = 2\n",
                               Subcommand::GreenCheck);
    CHECK(g.green.half_width == 3.0);
    CHECK(g.green.nodes == 101);
    CHECK(g.green.refine_levels == 2);
    CHECK_THROWS_AS(parse_config("nodes = 100\n", Subcommand::GreenCheck), ValidationError);
}

TEST_CASE("config hash is stable and content sensitive") {
    const std::string a = "m = -0.5\nmu = 1\n";
    CHECK(config_hash(a) == config_hash(a));
    CHECK(config_hash(a) != config_hash(a + "\n"));
    CHECK(config_hash(a).size() == 16);
}
