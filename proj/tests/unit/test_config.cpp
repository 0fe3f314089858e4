#include <doctest.h>

#include "sohkit/config.hpp"
#include "sohkit/errors.hpp"
#include "sohkit/profiles.hpp"

using namespace sohkit;

TEST_CASE("key-value parsing") {
    const auto cfg = KeyValueFile::parse(
        "# comment\n"
        "alpha = 1.5\n"
        "name= square   # trailing comment\n"
        "list = 1, 2,3\n"
        "flag = true\n"
        "\n");
    CHECK(cfg.get_double("alpha") == doctest::Approx(1.5));
    CHECK(cfg.get_string("name") == "square");
    CHECK(cfg.get_ints("list") == std::vector<std::int64_t>{1, 2, 3});
    CHECK(cfg.get_bool("flag", false));
    CHECK(cfg.get_double("missing", 7.0) == 7.0);
    CHECK_THROWS_AS(cfg.get_double("name"), ConfigError);
    CHECK_THROWS_AS(cfg.get_string("missing"), ConfigError);
    CHECK_THROWS_AS(KeyValueFile::parse("novalue\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueFile::load("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("cell parameters from config text") {
    const auto cfg = KeyValueFile::parse(
        "nominal_capacity_ah = 10\n"
        "r0_init_ohm = 0.02\n"
        "k_cal_per_sqrt_hour = 0\n"
        "k_cyc_per_cycle = 0\n");
    const CellParams cell = cell_from_file(cfg);
    CHECK(cell.nominal_capacity_ah == 10.0);
    CHECK(cell.r0_init_ohm == 0.02);
    CHECK(cell.aging.k_cal == 0.0);
    CHECK(cell.r1_ohm == CellParams{}.r1_ohm);  // untouched keys keep defaults

    const auto bad = KeyValueFile::parse("ocv_soc = 0,1\nocv_v = 3.0,4.2,4.3\n");
    CHECK_THROWS_AS(cell_from_file(bad), ConfigError);
}

TEST_CASE("doe config from text") {
    const auto cfg = KeyValueFile::parse(
        "temperatures_c = 25\n"
        "amplitudes_a = 1.0\n"
        "kinds = constant\n"
        "max_hours = 10\n");
    const DoeConfig doe = DoeConfig::from_file(cfg);
    CHECK(doe.temperatures_c == std::vector<double>{25.0});
    CHECK(doe.max_hours == 10.0);
    CHECK(generate_campaign(doe).size() == 1);

    CHECK_THROWS_AS(DoeConfig::from_file(KeyValueFile::parse("kinds = sinusoid\n")),
                    ConfigError);
}
