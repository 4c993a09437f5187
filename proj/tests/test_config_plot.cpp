#include "doctest.h"

#include "codonsoup/config.hpp"
#include "codonsoup/error.hpp"
#include "codonsoup/lab.hpp"
#include "codonsoup/plot.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace codonsoup;

namespace {

std::size_t count_of(const std::string& text, std::string_view needle)
{
    std::size_t n = 0;
    for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1))
        ++n;
    return n;
}

std::string data_file(const std::string& name)
{
    return std::string(CODONSOUP_DATA_DIR) + "/" + name;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_SUITE("config") {

TEST_CASE("rate literals")
{
    CHECK(parse_rate("0.25") == 0.25);
    CHECK(parse_rate(" 1/9001 ") == doctest::Approx(1.0 / 9001));
    CHECK(parse_rate("2/4") == 0.5);
    CHECK(parse_rate("0") == 0.0);
    CHECK(parse_rate("1") == 1.0);
    for (const char* bad : {"", "abc", "1/0", "1/-3", "1.5", "-0.1", "3/2", "1/x", "nan", "inf"})
        CHECK_THROWS_AS(parse_rate(bad), Error);

    CHECK(parse_rate_list("1/100, 1/50 0.5") == std::vector{1.0 / 100, 1.0 / 50, 0.5});
    CHECK_THROWS_AS(parse_rate_list(" , "), Error);
}

TEST_CASE("key value files")
{
    const auto kv = KeyValues::parse("# comment\n  ticks = 0x10  \nrate = 1/4 # trailing\nname = hello world\n\n"
                                     "real = -2.5\nspare = 1\n");
    CHECK(kv.count("ticks") == 16u);
    CHECK(kv.rate("rate") == 0.25);
    CHECK(kv.text("name") == "hello world");
    CHECK(kv.real("real") == -2.5);
    CHECK_FALSE(kv.text("missing").has_value());
    CHECK(kv.contains("spare"));
    CHECK(kv.unused() == std::vector<std::string>{"spare"});

    CHECK_THROWS_AS(KeyValues::parse("novalue\n"), Error);
    CHECK_THROWS_AS(KeyValues::parse("= 3\n"), Error);
    CHECK_THROWS_AS(KeyValues::parse("a = 1\na = 2\n"), Error);
    CHECK_THROWS_AS(KeyValues::parse("n = 12abc\n").count("n"), Error);
    CHECK_THROWS_AS(KeyValues::parse("n = -1\n").count("n"), Error);
    CHECK_THROWS_AS(KeyValues::load("/nonexistent/dir/world.cfg"), Error);
}

}

TEST_SUITE("data") {

TEST_CASE("shipped files match the built-ins")
{
    CHECK(load_alphabet(data_file("default.alpha")) == default_alphabet());
    CHECK(slurp(data_file("ancestor.asm")) == ancestor_source());
    for (const auto& set : standard_ablations()) {
        if (set.name == "full")
            continue;
        CAPTURE(set.name);
        CHECK(parse_lowering_table(slurp(data_file(set.name + ".iset"))) == default_lowering_table(set.active));
    }
}

TEST_CASE("shipped configs parse")
{
    const ExperimentSpec run = spec_from_config(KeyValues::load(data_file("world.cfg")), ExperimentKind::Run);
    CHECK(run.ancestor_asm == ancestor_source());
    REQUIRE(run.alphabet != nullptr);
    CHECK(*run.alphabet == default_alphabet());
    CHECK(run.world.mutation.bitflip_rate == doctest::Approx(1.0 / 1000));

    const ExperimentSpec sweep = spec_from_config(KeyValues::load(data_file("sweep.cfg")), ExperimentKind::Sweep);
    CHECK(sweep.rates == default_spec(ExperimentKind::Sweep).rates);

    const ExperimentSpec intron = spec_from_config(KeyValues::load(data_file("intron.cfg")), ExperimentKind::Hamming);
    CHECK(intron.ancestor.intron_codons == 4608);
    CHECK(intron.ancestor.placement == IntronPlacement::Tail);
}

}

TEST_SUITE("plot") {

TEST_CASE("csv parsing")
{
    const CsvTable t = parse_csv("tick,population\n1,3\n2,5\n");
    CHECK(t.header == std::vector<std::string>{"tick", "population"});
    CHECK(t.rows.size() == 2);
    CHECK(t.column("population") == 1);
    CHECK(t.column("nope") == -1);
    CHECK_THROWS_AS(parse_csv(""), Error);
}

TEST_CASE("svg rendering")
{
    const CsvTable t = parse_csv("rate,tick,population\n0.1,1,2\n0.1,2,4\n0.2,1,3\n0.2,2,1\n");
    const std::string svg = render_svg(t, {.title = "pop"});
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count_of(svg, "<polyline") == 2);
    CHECK(svg.find("pop") != std::string::npos);

    const std::string stairs = render_svg(t, {.stairs = true});
    CHECK(count_of(stairs, "<polyline") == 2);
    CHECK(stairs != svg);

    CHECK_THROWS_AS(render_svg(t, {.x = "missing"}), Error);
    CHECK_THROWS_AS(render_svg(t, {.y = {"missing"}}), Error);
    CHECK_THROWS_AS(render_svg(t, {.group = {"missing"}}), Error);
    CHECK_THROWS_AS(render_svg(parse_csv("name\nfoo\n"), {}), Error);
}

}
