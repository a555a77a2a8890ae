#include <filesystem>
#include <string>

#include "doctest.h"
#include "msl/config.hpp"
#include "msl/errors.hpp"

using namespace msl;

namespace {

const std::filesystem::path configs = std::filesystem::path(MSL_SOURCE_DIR) / "configs";

const std::string minimal = R"(
[sequence]
spec = gevrey 1

[problem]
k = 2
s1 = 1
r1 = 1
S = 1
a = 1
term = 2 0 0 2

[sector_data]
b.0.1 = 1
init.0 = 1:1

[grids]
eps = geometric 0.01 1 8
)";

} // namespace

TEST_CASE("sha256 of known strings") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("ini sections, comments and repeated keys") {
    const IniFile ini = IniFile::parse("# head\n[a]\nx = 1  # trailing\nterm = 1\nterm = 2\n[b]\ny=two words\n");
    CHECK(ini.has("a"));
    CHECK(ini.get("a", "x") == "1");
    CHECK(ini.get_all("a", "term").size() == 2);
    CHECK(ini.get("b", "y") == "two words");
    CHECK_FALSE(ini.get("b", "x").has_value());
    CHECK_THROWS_AS(ini.require("b", "x"), config_error);
    CHECK_THROWS_AS(IniFile::parse("x = 1\n"), config_error);
    CHECK_THROWS_AS(IniFile::parse("[a\nx = 1\n"), config_error);
    CHECK_THROWS_AS(IniFile::parse("[a]\nnonsense\n"), config_error);
}

TEST_CASE("a minimal config parses") {
    const ExperimentConfig cfg = parse_config(minimal);
    REQUIRE(cfg.problem);
    CHECK(cfg.problem->terms.size() == 1);
    CHECK(cfg.sector_count() == 1);
    CHECK(cfg.grids.eps_moduli.size() == 8);
    CHECK(cfg.sha256 == sha256_hex(minimal));
    CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config(minimal + "\n[run]\nbogus = 1\n"), config_error);
    CHECK_THROWS_AS(parse_config(minimal + "\n[nowhere]\nx = 1\n"), config_error);
    std::string big = minimal;
    big.replace(big.find("0.01 1 8"), 8, "0.01 2 8");
    CHECK_THROWS_AS(parse_config(big), invalid_grid);
    std::string term = minimal;
    term.replace(term.find("term = 2 0 0 2"), 14, "term = 2 0 0");
    CHECK_THROWS_AS(parse_config(term), config_error);
    CHECK_THROWS_AS(load_config(configs / "missing.conf"), config_error);
}

TEST_CASE("shipped configs load and validate") {
    for (const char *name : {"demo.conf", "pole_crossing.conf", "rs_synthetic.conf", "rs_pde.conf"}) {
        CAPTURE(name);
        const ExperimentConfig cfg = load_config(configs / name);
        CHECK_NOTHROW(validate_config(cfg));
        CHECK(cfg.sha256.size() == 64);
    }
}
