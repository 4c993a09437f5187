// Runs every acceptance criterion at full scale and prints one PASS/FAIL line per criterion.

#include "codonsoup/assembler.hpp"
#include "codonsoup/lab.hpp"
#include "codonsoup/mutation.hpp"
#include "support.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>

using namespace codonsoup;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string printf_string(const char* format, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// --- 1 --------------------------------------------------------------------------------

Verdict analytic_probability()
{
    constexpr std::size_t kLength = 20480;
    constexpr std::uint64_t kTrials = 100'000;
    const std::pair<double, double> cases[] = {{1.0 / 9001, 0.897}, {1.0 / 11003, 0.845}};

    ExperimentSpec spec = default_spec(ExperimentKind::Sweep);
    spec.rates = {cases[0].first, cases[1].first};
    spec.analytic_length = kLength;
    spec.replicates = 1;
    spec.ticks = 1;
    const SweepResult sweep = exp_sweep(spec);

    bool pass = true;
    std::string detail;
    Rng rng(0xacce);
    const Genome g(std::vector<Codon>(kLength, 0));
    for (std::size_t i = 0; i < 2; ++i) {
        const auto [rate, expected] = cases[i];
        const double column = sweep.points[i].p_hit;
        std::uint64_t hit = 0;
        for (std::uint64_t t = 0; t < kTrials; ++t)
            hit += bitflip(g, rate, rng) != g;
        const double mc = static_cast<double>(hit) / kTrials;
        const double sigma = std::sqrt(column * (1 - column) / kTrials);
        const bool ok = std::abs(column - expected) <= 0.001 && std::abs(mc - column) <= 3 * sigma;
        pass = pass && ok;
        detail += printf_string("rate 1/%.0f column %.4f (expected %.3f) monte-carlo %.4f (3 sigma %.4f); ", 1 / rate,
                                column, expected, mc, 3 * sigma);
    }
    return {pass, detail};
}

// --- 2 --------------------------------------------------------------------------------

Verdict splice_mask()
{
    const Alphabet& a = default_alphabet();
    int nop = 0, pattern = 0;
    for (int c = 0; c < 256; ++c) {
        nop += a[static_cast<Codon>(c | kNopMask)].role == Role::Nop;
        pattern += is_nop_pattern(static_cast<Codon>(c));
    }
    return {nop == 256 && pattern == 32 && nop_pattern_codons().size() == 32,
            printf_string("%d/256 masked codons read as NOP, %d NOP-pattern codons", nop, pattern)};
}

// --- 3 --------------------------------------------------------------------------------

Verdict energy_bounds()
{
    Rng rng(0xe3);
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < 10'000; ++i) {
        const double e = energy(random_alphabet(InstructionSet::full(), rng));
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    double single = 0.0;
    for (const auto& ins : instruction_table()) {
        std::array<AlphabetEntry, 256> same;
        same.fill(AlphabetEntry::exec(ins.op));
        single = std::max(single, energy(same));
    }

    ExperimentSpec spec = default_spec(ExperimentKind::Optimize);
    spec.optimize_runs = 5;
    spec.optimize.iterations = 300'000;
    const auto runs = exp_optimize(spec);
    bool monotone = true;
    double best = 1e9, worst = 0;
    for (const auto& run : runs) {
        for (std::size_t k = 1; k < run.trace.size(); ++k)
            monotone = monotone && run.trace[k].scaled <= run.trace[k - 1].scaled;
        monotone = monotone && run.trace.back().iteration == spec.optimize.iterations;
        best = std::min(best, run.trace.back().energy());
        worst = std::max(worst, run.trace.back().energy());
    }
    const double spread = (worst - best) / best;
    return {lo >= 0 && hi <= 2048 && single == 0.0 && monotone && spread <= 0.05,
            printf_string("random energies in [%.2f, %.2f]; single-instruction maximum %.1f; traces %s; "
                          "final energies %.2f..%.2f (spread %.2f%%)",
                          lo, hi, single, monotone ? "non-increasing" : "INCREASE SEEN", best, worst, 100 * spread)};
}

// --- 4 --------------------------------------------------------------------------------

Verdict rol_oracle()
{
    const Alphabet& a = default_alphabet();
    Rng rng(0x401);
    int exact = 0;
    for (int t = 0; t < 100; ++t) {
        const std::uint32_t x = rng.next32();
        const auto c = static_cast<int>(rng.between(1, 31));
        VmState s = test::random_state(rng, 0);
        s.regs.reg_a = x;
        Rng asm_rng(rng.next());
        const Genome g = assemble("rol_regA " + std::to_string(c) + "\n", a, asm_rng);
        const auto out = test::execute(splice_translate(g, a), s, a);
        exact += out && out->regs.reg_a == ((x << c) | (x >> (32 - c))) && out->stack.empty();
    }
    return {exact == 100, printf_string("%d/100 exact", exact)};
}

// --- 5 --------------------------------------------------------------------------------

Verdict lowering_equivalence()
{
    const Alphabet& alpha = default_alphabet();
    Rng rng(0x5eed);
    int entries = 0, failures = 0;
    for (const auto& set : standard_ablations()) {
        const auto table = default_lowering_table(set.active);
        for (const auto& ins : instruction_table()) {
            if (set.active.contains(ins.op))
                continue;
            const auto lowered = lower(ins.op, table);
            ++entries;
            const std::vector<Op> original{ins.op};
            for (int trial = 0; trial < 1000; ++trial) {
                const VmState start = test::random_state(rng, rng.below(8));
                const auto x = test::execute(original, start, alpha);
                const auto y = test::execute(lowered, start, alpha);
                if (!x || !y || x->regs.bc1 != y->regs.bc1 || x->stack != y->stack) {
                    ++failures;
                    break;
                }
            }
        }
    }
    return {failures == 0 && entries > 0, printf_string("%d lowering entries over %zu ablations, %d mismatched",
                                                        entries, standard_ablations().size(), failures)};
}

// --- 6 --------------------------------------------------------------------------------

struct LifeRecorder final : WorldObserver {
    std::vector<std::uint32_t> at_exit;
    std::map<std::uint64_t, std::uint32_t> births;
    void on_birth(const Organism&, const Organism& parent) override { ++births[parent.id]; }
    void on_death(const Organism& o, DeathCause cause) override
    {
        if (cause == DeathCause::Exit)
            at_exit.push_back(o.offspring_count);
    }
};

Verdict ancestor_replication()
{
    const ExperimentSpec spec = default_spec(ExperimentKind::Run);
    const Genome anc = build_ancestor(spec, spec.alpha()).genome;
    bool pass = true;
    std::string detail;
    for (std::uint64_t seed : {1, 2, 3}) {
        std::string snapshots[2];
        for (int again = 0; again < 2; ++again) {
            WorldConfig c{.capacity = 64, .unmutated_kill_prob = 0.0, .seed = seed};
            World w(c, {Lineage{"ancestor", spec.alpha(), anc, 1}});
            LifeRecorder rec;
            w.set_observer(&rec);
            std::uint64_t full_at = 0;
            for (std::uint64_t t = 1; t <= 400; ++t)
                if (w.tick().population == 64 && full_at == 0)
                    full_at = t;
            const bool three = !rec.at_exit.empty()
                               && std::all_of(rec.at_exit.begin(), rec.at_exit.end(), [](auto n) { return n == 3; })
                               && std::all_of(rec.births.begin(), rec.births.end(),
                                              [](const auto& kv) { return kv.second <= 3; });
            pass = pass && three && full_at > 0 && full_at <= 200;
            snapshots[again] = w.snapshot();
            if (again == 0)
                detail += printf_string("seed %llu: capacity at tick %llu, %zu exits all with 3 children %s; ",
                                        static_cast<unsigned long long>(seed),
                                        static_cast<unsigned long long>(full_at), rec.at_exit.size(),
                                        three ? "yes" : "NO");
        }
        pass = pass && snapshots[0] == snapshots[1];
    }
    return {pass, detail + "re-runs identical"};
}

// --- 7 --------------------------------------------------------------------------------

Verdict sweep_threshold()
{
    ExperimentSpec spec = default_spec(ExperimentKind::Sweep);
    spec.replicates = 5;
    spec.ticks = 5000;
    spec.world.capacity = 64;
    const SweepResult r = exp_sweep(spec);
    const auto& pts = r.points;
    const double span = pts.back().rate / pts.front().rate;
    double window_lo = pts.front().rate, window_hi = pts.back().rate;
    for (const auto& p : pts) {
        if (p.extinction_fraction == 0.0)
            window_lo = p.rate;
        if (p.extinction_fraction == 1.0 && window_hi == pts.back().rate)
            window_hi = p.rate;
    }
    std::string grid;
    for (const auto& p : pts)
        grid += printf_string("1/%.0f:%.1f ", 1 / p.rate, p.extinction_fraction);
    const double reference_lo = p_at_least_one(1.0 / 11003, 20480), reference_hi = p_at_least_one(1.0 / 9001, 20480);
    return {pts.front().extinction_fraction == 0.0 && pts.back().extinction_fraction == 1.0 && span >= 100 && r.monotone,
            printf_string("grid spans %.0fx; extinction %s; transition between 1/%.0f and 1/%.0f "
                          "(P(hit) on the %zu-codon ancestor %.3f..%.3f); reference window 1/11003..1/9001 "
                          "(P(hit) at 20480 codons %.3f..%.3f)",
                          span, grid.c_str(), 1 / window_lo, 1 / window_hi, r.analytic_length,
                          p_at_least_one(window_lo, r.analytic_length), p_at_least_one(window_hi, r.analytic_length),
                          reference_lo, reference_hi)};
}

// --- 8 --------------------------------------------------------------------------------

Verdict recode_neutrality()
{
    const Alphabet& a = default_alphabet();
    Rng rng(0x8);
    int equal = 0, changed = 0;
    for (int t = 0; t < 1000; ++t) {
        const Genome g = test::random_genome(rng.between(1, 2048), rng);
        const Genome r = neutral_recode(g, a, 1.0, rng);
        equal += splice_translate(r, a) == splice_translate(g, a);
        changed += r != g;
    }
    return {equal == 1000, printf_string("%d/1000 translations equal (%d genomes recoded)", equal, changed)};
}

// --- 9 --------------------------------------------------------------------------------

Verdict api_reachability()
{
    const ApiHashResult r = exp_apihash(1000, 100'000, 1);
    return {r.probability >= 0.19 && r.probability <= 0.27,
            printf_string("P = %.4f over %llu flips (%zu distinct hashes, naive %.4f)", r.probability,
                          static_cast<unsigned long long>(r.trials), r.distinct_hashes, r.naive_estimate)};
}

// --- 10 -------------------------------------------------------------------------------

Verdict determinism()
{
    std::vector<ExperimentSpec> specs;
    for (auto kind : {ExperimentKind::Run, ExperimentKind::Sweep, ExperimentKind::Hamming, ExperimentKind::Density,
                      ExperimentKind::Duel, ExperimentKind::Intron, ExperimentKind::ApiHash,
                      ExperimentKind::Optimize}) {
        ExperimentSpec s = default_spec(kind);
        s.seed = 77;
        s.replicates = 3;
        s.ticks = std::min<std::uint64_t>(s.ticks, 400);
        s.rates = {1.0 / 1000, 1.0 / 100, 1.0 / 30};
        s.api_trials = 20'000;
        s.optimize_runs = 2;
        s.optimize.iterations = 20'000;
        specs.push_back(s);
    }
    int identical = 0;
    std::size_t files = 0;
    for (auto& s : specs) {
        s.threads = 1;
        const Outputs a = run_experiment(s);
        s.threads = 4;
        const Outputs b = run_experiment(s);
        const Outputs c = run_experiment(s);
        bool same = a.size() == b.size() && b.size() == c.size();
        for (std::size_t i = 0; same && i < a.size(); ++i)
            same = a[i].name == b[i].name && a[i].content == b[i].content && b[i].content == c[i].content;
        identical += same;
        files += a.size();
    }
    return {identical == static_cast<int>(specs.size()),
            printf_string("%d/%zu experiment kinds byte-identical across re-runs and thread counts (%zu files)",
                          identical, specs.size(), files)};
}

// --- 11 -------------------------------------------------------------------------------

Verdict intron_drift()
{
    auto slopes = [](std::size_t intron) {
        ExperimentSpec s = default_spec(ExperimentKind::Hamming);
        s.ancestor.intron_codons = intron;
        s.ancestor.placement = IntronPlacement::Tail;
        s.world.mutation.bitflip_rate = 1.0 / 3000;
        s.ticks = 2000;
        s.replicates = 5;
        std::vector<double> out;
        for (const auto& run : exp_hamming(s))
            out.push_back(run.slope);
        return out;
    };
    const auto exon = slopes(0), intron = slopes(4608);
    int wins = 0;
    std::string pairs;
    for (std::size_t i = 0; i < 5; ++i) {
        wins += intron[i] > exon[i];
        pairs += printf_string("%.4f vs %.4f; ", intron[i], exon[i]);
    }
    return {wins >= 4, printf_string("intron-rich beats exon-only in %d/5 pairs (bits/tick: %s)", wins,
                                     pairs.substr(0, pairs.size() - 2).c_str())};
}

} // namespace

int main()
{
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"analytic mutation probability", analytic_probability},
        {"splice mask", splice_mask},
        {"energy bounds and optimizer monotonicity", energy_bounds},
        {"rotate-left oracle", rol_oracle},
        {"lowering equivalence", lowering_equivalence},
        {"ancestor replication", ancestor_replication},
        {"sweep threshold", sweep_threshold},
        {"recode neutrality", recode_neutrality},
        {"api hash reachability", api_reachability},
        {"determinism", determinism},
        {"intron drift", intron_drift},
    };
    int failed = 0, n = 0;
    for (const auto& [name, fn] : criteria) {
        ++n;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2d %s (%.1fs): %s\n", v.pass ? "PASS" : "FAIL", n, name, secs, v.detail.c_str());
        std::fflush(stdout);
        failed += !v.pass;
    }
    std::printf("%d/%d criteria passed\n", n - failed, n);
    return failed == 0 ? 0 : 1;
}
