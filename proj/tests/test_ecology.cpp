#include "doctest.h"

#include "codonsoup/assembler.hpp"
#include "codonsoup/ecology.hpp"
#include "codonsoup/error.hpp"

#include <map>

using namespace codonsoup;

namespace {

const Genome& ancestor()
{
    static const Genome g = [] {
        Rng rng(40);
        return assemble(ancestor_source(), default_alphabet(), rng);
    }();
    return g;
}

std::vector<Lineage> one_lineage(const Genome& g = ancestor())
{
    return {Lineage{.name = "anc", .alphabet = default_alphabet(), .ancestor = g, .founders = 1}};
}

struct Recorder final : WorldObserver {
    std::map<std::uint64_t, std::uint32_t> births_by_parent;
    std::map<DeathCause, std::size_t> deaths;
    std::vector<std::uint32_t> offspring_at_exit;
    std::size_t generation_errors = 0;

    void on_birth(const Organism& child, const Organism& parent) override
    {
        ++births_by_parent[parent.id];
        if (child.generation != parent.generation + 1 || child.parent_id != parent.id)
            ++generation_errors;
    }
    void on_death(const Organism& o, DeathCause cause) override
    {
        ++deaths[cause];
        if (cause == DeathCause::Exit)
            offspring_at_exit.push_back(o.offspring_count);
    }
};

bool same_stats(const TickStats& a, const TickStats& b)
{
    return format_tick_csv_row(a) == format_tick_csv_row(b) && a.spawn_rejected == b.spawn_rejected
           && a.population_by_lineage == b.population_by_lineage;
}

} // namespace

TEST_SUITE("ecology") {

TEST_CASE("the unmutated ancestor fills the world and each life makes three children")
{
    World w(WorldConfig{.capacity = 64, .seed = 3}, one_lineage());
    Recorder rec;
    w.set_observer(&rec);
    std::uint64_t full_at = 0;
    for (std::uint64_t t = 1; t <= 600; ++t) {
        const TickStats s = w.tick();
        CHECK(s.population <= 64);
        CHECK(s.mean_hamming == 0.0);
        if (full_at == 0 && s.population == 64)
            full_at = t;
    }
    CHECK(full_at > 0);
    CHECK(full_at <= 200);
    CHECK(rec.generation_errors == 0);
    REQUIRE_FALSE(rec.offspring_at_exit.empty());
    for (auto n : rec.offspring_at_exit)
        CHECK(n == 3);
    for (const auto& [parent, n] : rec.births_by_parent)
        CHECK(n <= 3);
    CHECK(rec.deaths[DeathCause::Fault] == 0);
}

TEST_CASE("a lone founder with room to spare makes exactly three children, then exits")
{
    World w(WorldConfig{.capacity = 1000, .seed = 4}, one_lineage());
    Recorder rec;
    w.set_observer(&rec);
    for (int t = 0; t < 100 && rec.offspring_at_exit.empty(); ++t)
        w.tick();
    REQUIRE(rec.offspring_at_exit.size() == 1);
    CHECK(rec.offspring_at_exit.front() == 3);
    CHECK(rec.births_by_parent.at(0) == 3);
}

TEST_CASE("population is conserved through births and deaths")
{
    WorldConfig c{.capacity = 48, .seed = 5};
    c.mutation.bitflip_rate = 1.0 / 200;
    c.mutation.translocate_rate = 0.05;
    World w(c, one_lineage());
    std::size_t previous = w.population();
    std::size_t faults = 0;
    for (int t = 0; t < 400 && !w.extinct(); ++t) {
        const TickStats s = w.tick();
        CHECK(s.population == previous + s.births - s.deaths());
        CHECK(s.population == w.population());
        CHECK(s.population <= 48);
        std::size_t by_lineage = 0;
        for (auto n : s.population_by_lineage)
            by_lineage += n;
        CHECK(by_lineage == s.population);
        faults += s.deaths_fault;
        previous = s.population;
    }
    CHECK(faults > 0);
}

TEST_CASE("duplicate cap")
{
    World w(WorldConfig{.capacity = 64, .duplicate_cap = 1, .seed = 6}, one_lineage());
    std::size_t dup = 0;
    for (int t = 0; t < 100; ++t) {
        const TickStats s = w.tick();
        CHECK(s.population <= 1);
        dup += s.deaths_dup;
    }
    CHECK(dup > 0);
}

TEST_CASE("unmutated children are reaped when the kill probability is one")
{
    World w(WorldConfig{.capacity = 64, .unmutated_kill_prob = 1.0, .seed = 7}, one_lineage());
    std::size_t reaped = 0, births = 0;
    while (!w.extinct() && w.current_tick() < 100) {
        const TickStats s = w.tick();
        CHECK(s.population <= 1);
        reaped += s.deaths_unmut;
        births += s.births;
    }
    CHECK(reaped == 3);
    CHECK(births == 3);
    CHECK(w.extinct());
}

TEST_CASE("a genome that faults at once goes extinct")
{
    Rng rng(8);
    const Genome bad = assemble("pop\nPAD-TO 128\n", default_alphabet(), rng);
    World w(WorldConfig{.seed = 8}, one_lineage(bad));
    std::vector<TickStats> seen;
    w.run(50, [&](const TickStats& s) { seen.push_back(s); });
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].deaths_fault == 1);
    CHECK(w.extinct());
}

TEST_CASE("a genome that never spawns is stopped by the lifetime budget")
{
    Rng rng(9);
    const Genome spin = assemble("getEIP\nsaveJmpOff\nnopdA\nJnzUp\nPAD-TO 128\n", default_alphabet(), rng);
    World w(WorldConfig{.slice_steps = 100, .lifetime_budget = 1000, .seed = 9}, one_lineage(spin));
    std::size_t loops = 0;
    w.run(50, [&](const TickStats& s) { loops += s.deaths_loop; });
    CHECK(loops == 1);
    CHECK(w.extinct());
    CHECK(w.current_tick() <= 11);
}

TEST_CASE("runs are deterministic per seed")
{
    WorldConfig c{.capacity = 32, .seed = 10};
    c.mutation.bitflip_rate = 1.0 / 300;
    c.mutation.hgt_rate = 0.1;
    World a(c, one_lineage()), b(c, one_lineage());
    for (int t = 0; t < 200; ++t)
        CHECK(same_stats(a.tick(), b.tick()));
    CHECK(a.snapshot() == b.snapshot());

    c.seed = 11;
    World other(c, one_lineage());
    for (int t = 0; t < 200; ++t)
        other.tick();
    CHECK(other.snapshot() != a.snapshot());
}

TEST_CASE("snapshots restore the exact world")
{
    WorldConfig c{.capacity = 32, .duplicate_cap = 4, .unmutated_kill_prob = 0.25, .seed = 12};
    c.mutation.bitflip_rate = 1.0 / 500;
    c.mutation.xchg_rate = 0.01;
    c.mutation.translocate_rate = 0.02;
    c.mutation.recode_rate = 0.01;
    c.mutation.hgt_rate = 0.05;
    World w(c, one_lineage());

    SUBCASE("at tick zero")
    {
        const auto copy = World::restore(w.snapshot());
        CHECK(copy->snapshot() == w.snapshot());
        CHECK(copy->config() == w.config());
    }

    SUBCASE("mid run")
    {
        for (int t = 0; t < 150; ++t)
            w.tick();
        const std::string bytes = w.snapshot();
        const auto copy = World::restore(bytes);
        CHECK(copy->snapshot() == bytes);
        CHECK(copy->current_tick() == w.current_tick());
        for (int t = 0; t < 150; ++t)
            CHECK(same_stats(w.tick(), copy->tick()));
        CHECK(copy->snapshot() == w.snapshot());
    }

    SUBCASE("damage is reported")
    {
        const std::string bytes = w.snapshot();
        auto code_of = [](const std::string& b) {
            try {
                World::restore(b);
            } catch (const Error& e) {
                return e.code();
            }
            return Errc::IoError;
        };
        CHECK(code_of(bytes.substr(0, bytes.size() / 2)) == Errc::CorruptSnapshot);
        CHECK(code_of("") == Errc::CorruptSnapshot);
        std::string bumped = bytes;
        bumped[8] = static_cast<char>(kSnapshotVersion + 1);
        CHECK(code_of(bumped) == Errc::VersionMismatch);
    }
}

TEST_CASE("founders start at distance zero")
{
    World w(WorldConfig{.seed = 13}, one_lineage());
    const Organism& o = w.organisms().front();
    CHECK(w.hamming_to_ancestor(o) == 0);
}

TEST_CASE("world config validation")
{
    CHECK_NOTHROW(WorldConfig{}.validate());
    CHECK_THROWS_AS(WorldConfig{.capacity = 0}.validate(), Error);
    CHECK_THROWS_AS(WorldConfig{.slice_steps = 0}.validate(), Error);
    CHECK_THROWS_AS(WorldConfig{.unmutated_kill_prob = 2.0}.validate(), Error);
    CHECK_THROWS_AS(World(WorldConfig{}, {}), Error);

    auto many = one_lineage();
    many[0].founders = 65;
    CHECK_THROWS_AS(World(WorldConfig{}, many), Error);

    WorldConfig big_block;
    big_block.mutation.max_block = ancestor().size() + 1;
    CHECK_THROWS_AS(World(big_block, one_lineage()), Error);
}

TEST_CASE("tick CSV")
{
    const TickStats s{.tick = 7, .population = 3, .births = 2, .deaths_fault = 1, .mean_gen = 1.5, .max_gen = 2,
                      .mean_hamming = 0.25};
    CHECK(format_tick_csv_row(s) == "7,3,2,1,0,0,0,0,1.5000,2,0.2500");
    CHECK(kTickCsvHeader.starts_with("tick,population,births"));
}

}
