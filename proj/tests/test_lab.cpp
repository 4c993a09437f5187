#include "doctest.h"

#include "codonsoup/error.hpp"
#include "codonsoup/lab.hpp"
#include "codonsoup/plot.hpp"

#include <cmath>
#include <numeric>

using namespace codonsoup;

namespace {

ExperimentSpec small(ExperimentKind kind, std::uint64_t ticks)
{
    ExperimentSpec s = default_spec(kind);
    s.replicates = 2;
    s.ticks = ticks;
    s.world.capacity = 24;
    return s;
}

const DensityRow& row(const std::vector<DensityRow>& rows, std::string_view name)
{
    for (const auto& r : rows)
        if (r.set == name)
            return r;
    FAIL("missing density row");
    return rows.front();
}

} // namespace

TEST_SUITE("lab") {

TEST_CASE("single run")
{
    ExperimentSpec s = small(ExperimentKind::Run, 120);
    s.replicates = 1;
    const Genome anc = build_ancestor(s, s.alpha()).genome;
    const auto curve = run_world(s, anc);
    REQUIRE(curve.size() == 120);
    CHECK(curve.back().population == 24);
    CHECK(curve.front().tick == 1);

    const CsvTable t = parse_csv(tick_csv(curve));
    CHECK(t.rows.size() == 120);
    CHECK(t.column("population") >= 0);
}

TEST_CASE("sweep")
{
    ExperimentSpec s = small(ExperimentKind::Sweep, 300);
    s.rates = {0.0, 1.0 / 20};
    s.analytic_length = 20480;
    const SweepResult r = exp_sweep(s);
    REQUIRE(r.points.size() == 2);
    CHECK(r.runs.size() == 4);
    CHECK(r.analytic_length == 20480);
    CHECK(r.points[0].extinctions == 0);
    CHECK(r.points[0].p_hit == 0.0);
    CHECK(r.points[0].mean_final_population == 24.0);
    CHECK(r.points[1].extinction_fraction == 1.0);
    CHECK(r.monotone);
    CHECK(r.points[1].p_hit == doctest::Approx(p_at_least_one(1.0 / 20, 20480)));

    s.rates = {1.0 / 9001};
    s.ticks = 1;
    CHECK(exp_sweep(s).points[0].p_hit == doctest::Approx(0.897).epsilon(0.001));

    const CsvTable summary = parse_csv(sweep_summary_csv(r));
    CHECK(summary.rows.size() == 2);
    CHECK(summary.column("extinction_fraction") >= 0);

    s.rates.clear();
    CHECK_THROWS_AS(exp_sweep(s), Error);
}

TEST_CASE("hamming drift")
{
    ExperimentSpec s = small(ExperimentKind::Hamming, 200);
    s.world.mutation = {};
    s.sample_every = 20;
    for (const auto& run : exp_hamming(s)) {
        REQUIRE_FALSE(run.samples.empty());
        CHECK(run.slope == 0.0);
        for (const auto& x : run.samples) {
            CHECK(x.tick % 20 == 0);
            CHECK(x.max == 0.0);
            CHECK(x.stddev == 0.0);
        }
    }

    s.world.mutation.bitflip_rate = 1.0 / 500;
    const auto runs = exp_hamming(s);
    for (const auto& run : runs) {
        CHECK(run.samples.front().stddev == 0.0);
        for (const auto& x : run.samples)
            CHECK((x.min <= x.mean && x.mean <= x.max));
        CHECK(run.slope > 0.0);
    }
    CHECK(parse_csv(hamming_summary_csv(runs)).rows.size() == 2);
}

TEST_CASE("drift slope is the least-squares fit")
{
    std::vector<HammingSample> line;
    for (std::uint64_t t = 0; t <= 100; t += 10)
        line.push_back({.tick = t, .population = 5, .mean = 3.0 + 0.25 * static_cast<double>(t)});
    CHECK(drift_slope(line) == doctest::Approx(0.25));
    line.push_back({.tick = 110, .population = 0, .mean = 0.0});
    CHECK(drift_slope(line) == doctest::Approx(0.25));
}

TEST_CASE("instruction density per ablation")
{
    const auto rows = exp_density(default_spec(ExperimentKind::Density));
    CHECK(rows.size() == standard_ablations().size());
    for (const auto& r : rows) {
        const double sum = std::accumulate(r.histogram.frequency.begin(), r.histogram.frequency.end(), 0.0);
        CHECK(sum == doctest::Approx(1.0));
        CHECK(r.code_length == r.histogram.total);
    }
    const double full = row(rows, "full").histogram.danger_density;
    double largest = full;
    std::string largest_set = "full";
    for (const auto& r : rows)
        if (r.histogram.danger_density > largest) {
            largest = r.histogram.danger_density;
            largest_set = r.set;
        }
    CHECK(largest_set == "no-addsaved");

    const auto& no_zer0 = row(rows, "no-zer0").histogram;
    CHECK(no_zer0[Op::Zer0] == 0.0);
    CHECK(row(rows, "full").histogram[Op::Zer0] > 0.0);

    const CsvTable t = parse_csv(density_csv(rows));
    CHECK(t.rows.size() == rows.size());
    CHECK(t.column("danger_density") == 2);
}

TEST_CASE("alphabet duel")
{
    ExperimentSpec s = small(ExperimentKind::Duel, 150);
    s.world.mutation = {};
    SUBCASE("identical alphabets")
    {
        s.rival_alphabet = std::make_shared<const Alphabet>(default_alphabet());
        const DuelResult r = exp_duel(s);
        CHECK(r.energy_a == r.energy_b);
        for (const auto& run : r.runs) {
            CHECK(run.curve.size() == 150);
            for (const auto& [a, b] : run.curve)
                CHECK(a + b <= 24);
            CHECK(run.final_population[0] + run.final_population[1] == 24);
        }
    }
    SUBCASE("random rival")
    {
        const DuelResult r = exp_duel(s);
        CHECK(r.energy_a != r.energy_b);
        CHECK((r.win_fraction_a >= 0.0 && r.win_fraction_a <= 1.0));
        for (const auto& run : r.runs) {
            const auto [a, b] = run.final_population;
            CHECK(run.winner == (a > b ? 0 : b > a ? 1 : -1));
        }
        CHECK(parse_csv(duel_summary_csv(r)).rows.size() == 3);
    }
}

TEST_CASE("converted exons")
{
    const Alphabet& a = default_alphabet();
    std::vector<Codon> c(40, 0x91);
    c[5] = a.stop_codon();
    c[10] = a.start_codon();
    c[14] = a.stop_codon();
    c[20] = a.start_codon();
    const Genome g(c);
    CHECK(converted_exons(g, a, 6, 30) == std::vector<std::size_t>{3, 9});
    CHECK(converted_exons(g, a, 15, 20).empty());
}

TEST_CASE("intron experiment")
{
    ExperimentSpec s = small(ExperimentKind::Intron, 60);
    s.ancestor.intron_codons = 300;
    s.world.mutation = {};
    const IntronResult r = exp_intron(s);
    CHECK(r.intron_end - r.intron_begin == 300);
    for (const auto& run : r.runs) {
        CHECK(run.births > 0);
        CHECK(run.converted_births == 0);
        CHECK(run.api_calls_in_converted == 0);
    }

    s.ancestor.intron_codons = 0;
    CHECK_THROWS_AS(exp_intron(s), Error);
}

TEST_CASE("api hash reachability")
{
    const auto r = exp_apihash(1000, 100'000, 1);
    CHECK(r.names == 1000);
    CHECK(r.naive_estimate == doctest::Approx(1000.0 / 4096));
    CHECK(r.probability >= 0.19);
    CHECK(r.probability <= 0.27);
    CHECK(exp_apihash(1, 1000, 1).probability == 0.0);
    CHECK(exp_apihash(3000, 20'000, 1).probability > r.probability);

    Rng rng(3);
    const auto names = synthetic_export_names(500, rng);
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == 500);
}

TEST_CASE("experiments are reproducible and thread-count independent")
{
    ExperimentSpec s = small(ExperimentKind::Sweep, 200);
    s.rates = {1.0 / 1000, 1.0 / 100};
    s.threads = 1;
    const Outputs one = run_experiment(s);
    s.threads = 4;
    const Outputs four = run_experiment(s);
    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].name == four[i].name);
        CHECK(one[i].content == four[i].content);
    }
    s.seed = 2;
    CHECK(run_experiment(s)[0].content != one[0].content);
}

TEST_CASE("optimize experiment")
{
    ExperimentSpec s = default_spec(ExperimentKind::Optimize);
    s.optimize_runs = 2;
    s.optimize.iterations = 2000;
    const Outputs out = run_experiment(s);
    std::set<std::string> names;
    for (const auto& f : out)
        names.insert(f.name);
    CHECK(names == std::set<std::string>{"energy_traces.csv", "alphabet_0.alpha", "alphabet_1.alpha",
                                         "optimize_summary.csv", "best.alpha"});
    for (const auto& run : exp_optimize(s))
        CHECK(run.trace.back().scaled <= run.trace.front().scaled);
}

TEST_CASE("worker pool")
{
    CHECK(worker_count(3, 10) == 3);
    CHECK(worker_count(8, 2) == 2);
    CHECK(worker_count(5, 0) == 1);

    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK_THROWS_AS(parallel_for(10, 4,
                                 [](std::size_t i) {
                                     if (i == 7)
                                         throw Error(Errc::ConfigError, "boom");
                                 }),
                    Error);
}

TEST_CASE("spec from config")
{
    const auto kv = KeyValues::parse("seed = 9\nbitflip_rate = 1/300\nrates = 1/100, 1/50\ncapacity = 16\n"
                                     "intron_placement = head\nintron_codons = 100\n");
    const ExperimentSpec s = spec_from_config(kv, ExperimentKind::Sweep);
    CHECK(s.seed == 9);
    CHECK(s.world.mutation.bitflip_rate == doctest::Approx(1.0 / 300));
    CHECK(s.rates == std::vector{1.0 / 100, 1.0 / 50});
    CHECK(s.world.capacity == 16);
    CHECK(s.ancestor.placement == IntronPlacement::Head);
    CHECK(s.ticks == 5000);

    CHECK_THROWS_AS(spec_from_config(KeyValues::parse("nonsense = 1\n"), ExperimentKind::Run), Error);
    CHECK_THROWS_AS(spec_from_config(KeyValues::parse("intron_placement = middle\n"), ExperimentKind::Run), Error);
    CHECK_THROWS_AS(spec_from_config(KeyValues::parse("capacity = 0\n"), ExperimentKind::Run), Error);
    CHECK_THROWS_AS(spec_from_config(KeyValues::parse("sweep_engine = warp\n"), ExperimentKind::Sweep), Error);
}

TEST_CASE("fixed-point formatting")
{
    CHECK(fmt(0.5) == "0.500000");
    CHECK(fmt(1.0 / 3, 3) == "0.333");
    CHECK(fmt(-0.0, 2) == "0.00");
    CHECK(fmt(-1e-9, 3) == "0.000");
    CHECK(fmt(-0.5, 1) == "-0.5");
}

}
