#pragma once

#include "codonsoup/alphabet.hpp"
#include "codonsoup/assembler.hpp"
#include "codonsoup/config.hpp"
#include "codonsoup/ecology.hpp"
#include "codonsoup/isa.hpp"

#include <atomic>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace codonsoup {

enum class ExperimentKind : std::uint8_t { Run, Sweep, Hamming, Density, Duel, Intron, ApiHash, Optimize };

std::string_view to_string(ExperimentKind kind) noexcept;

/// Which mutation rate a sweep grid drives.
enum class SweepEngine : std::uint8_t { Bitflip, Xchg, Translocate, Recode, Hgt };

std::string_view to_string(SweepEngine engine) noexcept;

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Run;
    std::uint64_t seed = 1;
    std::size_t replicates = 5;
    std::uint64_t ticks = 1000;
    std::uint64_t sample_every = 50;
    WorldConfig world;

    std::vector<double> rates; // sweep grid
    SweepEngine engine = SweepEngine::Bitflip;
    std::size_t analytic_length = 0; // 0: the ancestor's length

    AncestorOptions ancestor;
    std::optional<Genome> ancestor_genome;          // replaces the built-in ancestor
    std::string ancestor_asm;                       // assembler source; replaces the built-in source
    std::shared_ptr<const Alphabet> alphabet;       // null: default_alphabet()
    std::shared_ptr<const Alphabet> rival_alphabet; // duel opponent; null: a seeded random alphabet
    LoweringTable lowering = default_lowering_table();
    std::vector<NamedInstructionSet> density_sets = standard_ablations();

    std::vector<std::size_t> api_names{1000}; // one reachability row per table size
    std::uint64_t api_trials = 100'000;

    OptimizeOptions optimize;
    std::size_t optimize_runs = 5;

    unsigned threads = 0; // 0: CODONSOUP_THREADS, else the hardware count

    const Alphabet& alpha() const { return alphabet ? *alphabet : default_alphabet(); }
};

/// Reads an experiment spec from config keys; per-kind defaults are applied first.
/// Paths are resolved against the config file's directory. Throws ConfigError for
/// unknown keys or bad values.
ExperimentSpec spec_from_config(const KeyValues& kv, ExperimentKind kind);
ExperimentSpec default_spec(ExperimentKind kind);

/// Source text of the spec's ancestor (user source or the built-in replicator).
std::string ancestor_text(const ExperimentSpec& spec);

/// The spec's ancestor: the supplied genome, or its source assembled under `alpha` and
/// the spec's lowering table.
Assembly build_ancestor(const ExperimentSpec& spec, const Alphabet& alpha);

struct OutputFile {
    std::string name;
    std::string content;
};
using Outputs = std::vector<OutputFile>;

/// Runs the experiment and returns its files; identical specs give identical bytes.
Outputs run_experiment(const ExperimentSpec& spec);

// --- single world ---------------------------------------------------------------------

std::vector<TickStats> run_world(const ExperimentSpec& spec, const Genome& ancestor);
std::string tick_csv(const std::vector<TickStats>& curve);

// --- mutation-rate sweep --------------------------------------------------------------

struct SweepRun {
    double rate = 0.0;
    std::size_t replicate = 0;
    std::vector<TickStats> curve;
    bool extinct = false;
};

struct SweepPoint {
    double rate = 0.0;
    std::size_t replicates = 0;
    std::size_t extinctions = 0;
    double extinction_fraction = 0.0;
    double mean_final_population = 0.0;
    double p_hit = 0.0; // analytic P(at least one codon hit)
};

struct SweepResult {
    std::size_t analytic_length = 0;
    std::vector<SweepRun> runs;
    std::vector<SweepPoint> points;
    bool monotone = true; // extinction fraction never drops as the rate grows
};

SweepResult exp_sweep(const ExperimentSpec& spec);
std::string sweep_curves_csv(const SweepResult& r);
std::string sweep_summary_csv(const SweepResult& r);

// --- Hamming drift --------------------------------------------------------------------

struct HammingSample {
    std::uint64_t tick = 0;
    std::size_t population = 0;
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
    double stddev = 0.0;
};

struct HammingRun {
    std::size_t replicate = 0;
    std::vector<HammingSample> samples;
    double slope = 0.0; // least-squares slope of the mean distance per tick
};

std::vector<HammingRun> exp_hamming(const ExperimentSpec& spec);
std::string hamming_csv(const std::vector<HammingRun>& runs);
std::string hamming_summary_csv(const std::vector<HammingRun>& runs);

/// Least-squares slope of mean distance against tick over samples with a living population.
double drift_slope(const std::vector<HammingSample>& samples);

// --- instruction density --------------------------------------------------------------

struct DensityRow {
    std::string set;
    std::size_t code_length = 0;
    InstructionHistogram histogram;
};

std::vector<DensityRow> exp_density(const ExperimentSpec& spec);
std::string density_csv(const std::vector<DensityRow>& rows);

// --- alphabet duel --------------------------------------------------------------------

struct DuelRun {
    std::size_t replicate = 0;
    std::vector<std::array<std::size_t, 2>> curve; // per tick: lineage populations
    std::array<std::size_t, 2> final_population{};
    int winner = -1; // 0, 1, or -1 for a draw
};

struct DuelResult {
    double energy_a = 0.0;
    double energy_b = 0.0;
    std::vector<DuelRun> runs;
    double win_fraction_a = 0.0; // draws count half
};

DuelResult exp_duel(const ExperimentSpec& spec);
std::string duel_curves_csv(const DuelResult& r);
std::string duel_summary_csv(const DuelResult& r);

// --- intron conversion ----------------------------------------------------------------

struct IntronRun {
    std::size_t replicate = 0;
    std::uint64_t ticks_run = 0;
    std::size_t births = 0;
    std::size_t converted_births = 0;       // children carrying a START inside the intron
    std::size_t new_conversions = 0;        // ... where the parent carried none at that spot
    std::size_t converters_reproduced = 0;  // converted organisms with at least one child
    std::size_t longest_converted_exon = 0; // codons from a converted START to the next STOP
    std::size_t api_calls_in_converted = 0; // export calls issued from converted intron code
    std::size_t final_population = 0;
    std::size_t final_converters = 0;
};

struct IntronResult {
    std::size_t intron_begin = 0; // first padding codon
    std::size_t intron_end = 0;   // one past the last padding codon
    std::vector<IntronRun> runs;
};

IntronResult exp_intron(const ExperimentSpec& spec);
std::string intron_csv(const IntronResult& r);

/// Converted exons inside [begin, end): for each START found there, the number of codons
/// after it and before the next STOP or `end`.
std::vector<std::size_t> converted_exons(const Genome& g, const Alphabet& alpha, std::size_t begin, std::size_t end);

// --- API hash reachability ------------------------------------------------------------

struct ApiHashResult {
    std::size_t names = 0;
    std::size_t distinct_hashes = 0;
    std::uint64_t trials = 0;
    std::uint64_t resolved = 0; // flips that land on a different export
    double probability = 0.0;
    double naive_estimate = 0.0; // names / 4096, ignoring collisions
};

/// `names` random distinct export names; flips one random bit of a random export's hash
/// per trial and counts flips that resolve to a different export.
ApiHashResult exp_apihash(std::size_t names, std::uint64_t trials, std::uint64_t seed);
ApiHashResult measure_reachability(const VirtualOs& os, std::uint64_t trials, Rng& rng);
std::vector<std::string> synthetic_export_names(std::size_t count, Rng& rng);
std::string apihash_csv(const std::vector<ApiHashResult>& rows);

// --- alphabet optimization ------------------------------------------------------------

struct OptimizeRun {
    std::uint64_t seed = 0;
    Alphabet alphabet;
    EnergyTrace trace;
};

std::vector<OptimizeRun> exp_optimize(const ExperimentSpec& spec);
std::string optimize_traces_csv(const std::vector<OptimizeRun>& runs);

// --- plumbing -------------------------------------------------------------------------

/// Worker count: `requested` if non-zero, else CODONSOUP_THREADS, else the hardware
/// count; never more than `jobs`, never less than 1.
unsigned worker_count(unsigned requested, std::size_t jobs);

/// Calls fn(i) for i in [0, n) on up to `workers` threads. The first exception is rethrown.
template <typename F>
void parallel_for(std::size_t n, unsigned workers, F&& fn)
{
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

/// Fixed-point text with `digits` decimals, never signed zero; every CSV writer goes through it.
std::string fmt(double v, int digits = 6);

} // namespace codonsoup
