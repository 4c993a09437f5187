#include "codonsoup/lab.hpp"

#include "codonsoup/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace codonsoup {

namespace {

constexpr std::uint64_t kAncestorStream = 0xa5;
constexpr std::uint64_t kRivalStream = 0xb2;
constexpr std::uint64_t kApiStream = 0xc3;

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::ConfigError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string resolve(const KeyValues& kv, const std::string& path)
{
    if (path.empty() || kv.base_dir().empty() || std::filesystem::path(path).is_absolute())
        return path;
    return (std::filesystem::path(kv.base_dir()) / path).string();
}

std::string fmt_rate(double r)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8g", r);
    return buf;
}

double& engine_rate(MutationConfig& m, SweepEngine e)
{
    switch (e) {
    case SweepEngine::Bitflip: return m.bitflip_rate;
    case SweepEngine::Xchg: return m.xchg_rate;
    case SweepEngine::Translocate: return m.translocate_rate;
    case SweepEngine::Recode: return m.recode_rate;
    case SweepEngine::Hgt: return m.hgt_rate;
    }
    return m.bitflip_rate;
}

WorldConfig world_for(const ExperimentSpec& spec, std::uint64_t seed)
{
    WorldConfig c = spec.world;
    c.seed = seed;
    return c;
}

std::string tick_header_with(std::string_view prefix)
{
    return std::string(prefix) + std::string(kTickCsvHeader) + "\n";
}

} // namespace

std::string fmt(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string_view text = buf;
    if (text.starts_with('-') && text.find_first_not_of("-0.") == std::string_view::npos)
        text.remove_prefix(1);
    return std::string(text);
}

std::string_view to_string(ExperimentKind kind) noexcept
{
    switch (kind) {
    case ExperimentKind::Run: return "run";
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::Hamming: return "hamming";
    case ExperimentKind::Density: return "density";
    case ExperimentKind::Duel: return "duel";
    case ExperimentKind::Intron: return "intron";
    case ExperimentKind::ApiHash: return "apihash";
    case ExperimentKind::Optimize: return "optimize";
    }
    return "?";
}

std::string_view to_string(SweepEngine engine) noexcept
{
    switch (engine) {
    case SweepEngine::Bitflip: return "bitflip";
    case SweepEngine::Xchg: return "xchg";
    case SweepEngine::Translocate: return "translocate";
    case SweepEngine::Recode: return "recode";
    case SweepEngine::Hgt: return "hgt";
    }
    return "?";
}

unsigned worker_count(unsigned requested, std::size_t jobs)
{
    unsigned n = requested;
    if (n == 0) {
        if (const char* env = std::getenv("CODONSOUP_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v > 0)
                n = static_cast<unsigned>(v);
        }
    }
    if (n == 0)
        n = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

ExperimentSpec default_spec(ExperimentKind kind)
{
    ExperimentSpec s;
    s.kind = kind;
    switch (kind) {
    case ExperimentKind::Run:
        s.replicates = 1;
        break;
    case ExperimentKind::Sweep:
        s.ticks = 5000;
        s.rates = {1.0 / 3000, 1.0 / 1000, 1.0 / 300, 1.0 / 150, 1.0 / 100, 1.0 / 70, 1.0 / 50, 1.0 / 30};
        break;
    case ExperimentKind::Hamming:
        s.ticks = 3000;
        s.world.mutation.bitflip_rate = 1.0 / 4000;
        s.world.mutation.xchg_rate = 1.0 / 4000;
        break;
    case ExperimentKind::Density:
        break;
    case ExperimentKind::Duel:
        s.ticks = 3000;
        s.world.mutation.bitflip_rate = 1.0 / 150;
        break;
    case ExperimentKind::Intron:
        s.ticks = 2000;
        s.ancestor.intron_codons = 4000;
        s.ancestor.placement = IntronPlacement::Head;
        s.world.slice_steps = 1000;
        s.world.lifetime_budget = 25000;
        s.world.mutation.bitflip_rate = 1.0 / 4000;
        break;
    case ExperimentKind::ApiHash:
        break;
    case ExperimentKind::Optimize:
        break;
    }
    return s;
}

ExperimentSpec spec_from_config(const KeyValues& kv, ExperimentKind kind)
{
    ExperimentSpec s = default_spec(kind);
    auto& w = s.world;
    auto& m = w.mutation;
    const auto set_count = [&](std::string_view key, auto& field) {
        if (auto v = kv.count(key))
            field = static_cast<std::remove_reference_t<decltype(field)>>(*v);
    };
    const auto set_rate = [&](std::string_view key, double& field) {
        if (auto v = kv.rate(key))
            field = *v;
    };

    set_count("seed", s.seed);
    set_count("replicates", s.replicates);
    set_count("ticks", s.ticks);
    set_count("sample_every", s.sample_every);
    set_count("threads", s.threads);

    set_count("capacity", w.capacity);
    set_count("slice_steps", w.slice_steps);
    set_count("lifetime_budget", w.lifetime_budget);
    set_count("duplicate_cap", w.duplicate_cap);
    set_rate("unmutated_kill_prob", w.unmutated_kill_prob);
    set_count("max_stack", w.vm.max_stack);
    set_count("heap_limit", w.vm.heap_limit);

    set_rate("bitflip_rate", m.bitflip_rate);
    set_rate("xchg_rate", m.xchg_rate);
    set_rate("translocate_rate", m.translocate_rate);
    set_rate("recode_rate", m.recode_rate);
    set_rate("hgt_rate", m.hgt_rate);
    set_count("max_insert", m.max_insert);
    set_count("max_block", m.max_block);

    if (auto v = kv.text("rates"))
        s.rates = parse_rate_list(*v);
    if (auto v = kv.text("sweep_engine")) {
        bool found = false;
        for (auto e : {SweepEngine::Bitflip, SweepEngine::Xchg, SweepEngine::Translocate, SweepEngine::Recode,
                       SweepEngine::Hgt})
            if (*v == to_string(e)) {
                s.engine = e;
                found = true;
            }
        if (!found)
            throw Error(Errc::ConfigError, "unknown sweep_engine '" + *v + "'");
    }
    set_count("analytic_length", s.analytic_length);

    set_count("exon_codons", s.ancestor.exon_codons);
    set_count("intron_codons", s.ancestor.intron_codons);
    set_count("offspring", s.ancestor.offspring);
    if (auto v = kv.text("intron_placement")) {
        if (*v == "tail")
            s.ancestor.placement = IntronPlacement::Tail;
        else if (*v == "head")
            s.ancestor.placement = IntronPlacement::Head;
        else
            throw Error(Errc::ConfigError, "intron_placement must be head or tail");
    }

    if (auto v = kv.text("alphabet"))
        s.alphabet = std::make_shared<const Alphabet>(load_alphabet(resolve(kv, *v)));
    if (auto v = kv.text("rival_alphabet"))
        s.rival_alphabet = std::make_shared<const Alphabet>(load_alphabet(resolve(kv, *v)));
    if (auto v = kv.text("iset"))
        s.lowering = parse_lowering_table(read_text(resolve(kv, *v)));
    if (auto v = kv.text("ancestor")) {
        const std::string path = resolve(kv, *v);
        if (std::filesystem::path(path).extension() == ".asm")
            s.ancestor_asm = read_text(path);
        else
            s.ancestor_genome = load_genome(path);
    }

    if (auto v = kv.text("api_names")) {
        s.api_names.clear();
        std::istringstream in(*v);
        for (std::string word; in >> word;) {
            KeyValues one;
            one.set("n", word);
            s.api_names.push_back(static_cast<std::size_t>(*one.count("n")));
        }
        if (s.api_names.empty())
            throw Error(Errc::ConfigError, "api_names is empty");
    }
    set_count("api_trials", s.api_trials);

    set_count("iterations", s.optimize.iterations);
    set_count("swaps_per_step", s.optimize.swaps_per_step);
    set_count("trace_stride", s.optimize.trace_stride);
    set_count("optimize_runs", s.optimize_runs);

    if (const auto unused = kv.unused(); !unused.empty()) {
        std::string list;
        for (const auto& k : unused)
            list += (list.empty() ? "" : ", ") + k;
        throw Error(Errc::ConfigError, "unknown config keys: " + list);
    }

    if (s.replicates < 1)
        throw Error(Errc::ConfigError, "replicates must be at least 1");
    if (s.sample_every < 1)
        throw Error(Errc::ConfigError, "sample_every must be at least 1");
    if (s.optimize.swaps_per_step < 1 || s.optimize.trace_stride < 1)
        throw Error(Errc::ConfigError, "swaps_per_step and trace_stride must be at least 1");
    w.validate();
    return s;
}

std::string ancestor_text(const ExperimentSpec& spec)
{
    return spec.ancestor_asm.empty() ? ancestor_source(spec.ancestor) : spec.ancestor_asm;
}

Assembly build_ancestor(const ExperimentSpec& spec, const Alphabet& alpha)
{
    if (spec.ancestor_genome)
        return Assembly{*spec.ancestor_genome, {}};
    Rng rng(derive_seed(spec.seed, kAncestorStream));
    return assemble_detailed(ancestor_text(spec), alpha, rng, AssembleOptions{spec.lowering});
}

// --- single world ---------------------------------------------------------------------

std::vector<TickStats> run_world(const ExperimentSpec& spec, const Genome& ancestor)
{
    World world(world_for(spec, spec.seed), {Lineage{"ancestor", spec.alpha(), ancestor, 1}});
    std::vector<TickStats> curve;
    world.run(spec.ticks, [&](const TickStats& s) { curve.push_back(s); });
    return curve;
}

std::string tick_csv(const std::vector<TickStats>& curve)
{
    std::string out = tick_header_with("");
    for (const auto& s : curve)
        out += format_tick_csv_row(s) + "\n";
    return out;
}

// --- sweep ----------------------------------------------------------------------------

SweepResult exp_sweep(const ExperimentSpec& spec)
{
    if (spec.rates.empty())
        throw Error(Errc::ConfigError, "sweep needs a non-empty rate grid");
    const Alphabet& alpha = spec.alpha();
    const Genome ancestor = build_ancestor(spec, alpha).genome;

    SweepResult result;
    result.analytic_length = spec.analytic_length > 0 ? spec.analytic_length : ancestor.size();
    const std::size_t jobs = spec.rates.size() * spec.replicates;
    result.runs.resize(jobs);
    parallel_for(jobs, worker_count(spec.threads, jobs), [&](std::size_t j) {
        const std::size_t ri = j / spec.replicates;
        const std::size_t rep = j % spec.replicates;
        WorldConfig config = world_for(spec, derive_seed(spec.seed, rep));
        engine_rate(config.mutation, spec.engine) = spec.rates[ri];
        World world(config, {Lineage{"ancestor", alpha, ancestor, 1}});
        SweepRun run;
        run.rate = spec.rates[ri];
        run.replicate = rep;
        world.run(spec.ticks, [&](const TickStats& s) { run.curve.push_back(s); });
        run.extinct = world.extinct();
        result.runs[j] = std::move(run);
    });

    double last_fraction = -1.0;
    for (std::size_t ri = 0; ri < spec.rates.size(); ++ri) {
        SweepPoint p;
        p.rate = spec.rates[ri];
        p.replicates = spec.replicates;
        double pop = 0.0;
        for (std::size_t rep = 0; rep < spec.replicates; ++rep) {
            const auto& run = result.runs[ri * spec.replicates + rep];
            p.extinctions += run.extinct ? 1 : 0;
            pop += run.curve.empty() ? 0.0 : static_cast<double>(run.curve.back().population);
        }
        p.extinction_fraction = static_cast<double>(p.extinctions) / static_cast<double>(spec.replicates);
        p.mean_final_population = pop / static_cast<double>(spec.replicates);
        p.p_hit = p_at_least_one(p.rate, result.analytic_length);
        result.points.push_back(p);
    }
    std::vector<SweepPoint> ordered = result.points;
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.rate < b.rate; });
    for (const auto& p : ordered) {
        if (p.extinction_fraction < last_fraction)
            result.monotone = false;
        last_fraction = p.extinction_fraction;
    }
    return result;
}

std::string sweep_curves_csv(const SweepResult& r)
{
    std::string out = tick_header_with("rate,replicate,");
    for (const auto& run : r.runs)
        for (const auto& s : run.curve)
            out += fmt_rate(run.rate) + "," + std::to_string(run.replicate) + "," + format_tick_csv_row(s) + "\n";
    return out;
}

std::string sweep_summary_csv(const SweepResult& r)
{
    std::string out = "rate,inverse_rate,replicates,extinctions,extinction_fraction,mean_final_population,p_hit,"
                      "analytic_length\n";
    for (const auto& p : r.points) {
        out += fmt_rate(p.rate) + "," + (p.rate > 0 ? fmt(1.0 / p.rate, 1) : std::string("inf")) + ","
               + std::to_string(p.replicates) + "," + std::to_string(p.extinctions) + ","
               + fmt(p.extinction_fraction, 4) + "," + fmt(p.mean_final_population, 2) + "," + fmt(p.p_hit, 6) + ","
               + std::to_string(r.analytic_length) + "\n";
    }
    return out;
}

// --- Hamming drift --------------------------------------------------------------------

double drift_slope(const std::vector<HammingSample>& samples)
{
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& s : samples) {
        if (s.population == 0)
            continue;
        const auto x = static_cast<double>(s.tick);
        n += 1;
        sx += x;
        sy += s.mean;
        sxx += x * x;
        sxy += x * s.mean;
    }
    const double denom = n * sxx - sx * sx;
    if (n < 2 || denom <= 0)
        return 0.0;
    return (n * sxy - sx * sy) / denom;
}

namespace {

HammingSample sample_world(const World& world)
{
    HammingSample s;
    s.tick = world.current_tick();
    s.population = world.population();
    if (s.population == 0)
        return s;
    double sum = 0, sq = 0;
    s.min = std::numeric_limits<double>::infinity();
    for (const auto& o : world.organisms()) {
        const auto d = static_cast<double>(world.hamming_to_ancestor(o));
        s.min = std::min(s.min, d);
        s.max = std::max(s.max, d);
        sum += d;
        sq += d * d;
    }
    const auto n = static_cast<double>(s.population);
    s.mean = sum / n;
    s.stddev = std::sqrt(std::max(0.0, sq / n - s.mean * s.mean));
    return s;
}

} // namespace

std::vector<HammingRun> exp_hamming(const ExperimentSpec& spec)
{
    const Alphabet& alpha = spec.alpha();
    const Genome ancestor = build_ancestor(spec, alpha).genome;
    std::vector<HammingRun> runs(spec.replicates);
    parallel_for(spec.replicates, worker_count(spec.threads, spec.replicates), [&](std::size_t rep) {
        World world(world_for(spec, derive_seed(spec.seed, rep)), {Lineage{"ancestor", alpha, ancestor, 1}});
        HammingRun run;
        run.replicate = rep;
        run.samples.push_back(sample_world(world));
        while (world.current_tick() < spec.ticks && !world.extinct()) {
            world.tick();
            if (world.current_tick() % spec.sample_every == 0 || world.extinct())
                run.samples.push_back(sample_world(world));
        }
        run.slope = drift_slope(run.samples);
        runs[rep] = std::move(run);
    });
    return runs;
}

std::string hamming_csv(const std::vector<HammingRun>& runs)
{
    std::string out = "replicate,tick,population,min,mean,max,stddev\n";
    for (const auto& run : runs)
        for (const auto& s : run.samples)
            out += std::to_string(run.replicate) + "," + std::to_string(s.tick) + "," + std::to_string(s.population)
                   + "," + fmt(s.min, 2) + "," + fmt(s.mean, 4) + "," + fmt(s.max, 2) + "," + fmt(s.stddev, 4) + "\n";
    return out;
}

std::string hamming_summary_csv(const std::vector<HammingRun>& runs)
{
    std::string out = "replicate,samples,final_tick,final_mean,slope\n";
    for (const auto& run : runs) {
        const auto& last = run.samples.back();
        out += std::to_string(run.replicate) + "," + std::to_string(run.samples.size()) + ","
               + std::to_string(last.tick) + "," + fmt(last.mean, 4) + "," + fmt(run.slope, 6) + "\n";
    }
    return out;
}

// --- density --------------------------------------------------------------------------

std::vector<DensityRow> exp_density(const ExperimentSpec& spec)
{
    const Alphabet& alpha = spec.alpha();
    const std::string source = ancestor_text(spec);
    std::vector<DensityRow> rows;
    for (const auto& set : spec.density_sets) {
        LoweringTable table = default_lowering_table(set.active);
        for (const auto& [op, seq] : spec.lowering.replacements)
            if (!set.active.contains(op))
                table.replacements[op] = seq;
        Rng rng(derive_seed(spec.seed, kAncestorStream));
        const Genome g = assemble(source, alpha, rng, AssembleOptions{table});
        rows.push_back({set.name, g.data_offset, instruction_histogram(g, alpha)});
    }
    return rows;
}

std::string density_csv(const std::vector<DensityRow>& rows)
{
    std::string out = "set,code_length,danger_density";
    for (const auto& instr : instruction_table())
        out += "," + std::string(instr.mnemonic);
    out += "\n";
    for (const auto& row : rows) {
        out += row.set + "," + std::to_string(row.code_length) + "," + fmt(row.histogram.danger_density, 6);
        for (double f : row.histogram.frequency)
            out += "," + fmt(f, 6);
        out += "\n";
    }
    return out;
}

// --- duel -----------------------------------------------------------------------------

DuelResult exp_duel(const ExperimentSpec& spec)
{
    const Alphabet& alpha_a = spec.alpha();
    std::shared_ptr<const Alphabet> rival = spec.rival_alphabet;
    if (!rival) {
        Rng rng(derive_seed(spec.seed, kRivalStream));
        rival = std::make_shared<const Alphabet>(random_alphabet(InstructionSet::full(), rng));
    }
    const Alphabet& alpha_b = *rival;
    const Genome anc_a = build_ancestor(spec, alpha_a).genome;
    const Genome anc_b = build_ancestor(spec, alpha_b).genome;

    DuelResult result;
    result.energy_a = energy(alpha_a);
    result.energy_b = energy(alpha_b);
    result.runs.resize(spec.replicates);
    parallel_for(spec.replicates, worker_count(spec.threads, spec.replicates), [&](std::size_t rep) {
        // Alternate which strain holds the lower founder id, so scheduling order favours neither.
        const bool swapped = rep % 2 == 1;
        std::vector<Lineage> lineages{Lineage{"a", alpha_a, anc_a, 1}, Lineage{"b", alpha_b, anc_b, 1}};
        if (swapped)
            std::swap(lineages[0], lineages[1]);
        World world(world_for(spec, derive_seed(spec.seed, rep)), std::move(lineages));
        DuelRun run;
        run.replicate = rep;
        std::array<std::uint64_t, 2> last_alive{0, 0};
        world.run(spec.ticks, [&](const TickStats& s) {
            std::array<std::size_t, 2> pops{s.population_by_lineage[0], s.population_by_lineage[1]};
            if (swapped)
                std::swap(pops[0], pops[1]);
            for (int k = 0; k < 2; ++k)
                if (pops[k] > 0)
                    last_alive[k] = s.tick;
            run.curve.push_back(pops);
        });
        run.final_population = run.curve.empty() ? std::array<std::size_t, 2>{0, 0} : run.curve.back();
        const auto [fa, fb] = run.final_population;
        if (fa != fb)
            run.winner = fa > fb ? 0 : 1;
        else if (fa == 0 && last_alive[0] != last_alive[1])
            run.winner = last_alive[0] > last_alive[1] ? 0 : 1;
        result.runs[rep] = std::move(run);
    });
    double wins = 0;
    for (const auto& run : result.runs)
        wins += run.winner == 0 ? 1.0 : run.winner == -1 ? 0.5 : 0.0;
    result.win_fraction_a = wins / static_cast<double>(result.runs.size());
    return result;
}

std::string duel_curves_csv(const DuelResult& r)
{
    std::string out = "replicate,tick,population,lineage_a,lineage_b\n";
    for (const auto& run : r.runs)
        for (std::size_t t = 0; t < run.curve.size(); ++t)
            out += std::to_string(run.replicate) + "," + std::to_string(t + 1) + ","
                   + std::to_string(run.curve[t][0] + run.curve[t][1]) + "," + std::to_string(run.curve[t][0]) + ","
                   + std::to_string(run.curve[t][1]) + "\n";
    return out;
}

std::string duel_summary_csv(const DuelResult& r)
{
    std::string out = "replicate,energy_a,energy_b,final_a,final_b,winner\n";
    for (const auto& run : r.runs)
        out += std::to_string(run.replicate) + "," + fmt(r.energy_a, 2) + "," + fmt(r.energy_b, 2) + ","
               + std::to_string(run.final_population[0]) + "," + std::to_string(run.final_population[1]) + ","
               + (run.winner == 0 ? "a" : run.winner == 1 ? "b" : "draw") + "\n";
    out += "all," + fmt(r.energy_a, 2) + "," + fmt(r.energy_b, 2) + ",,,win_fraction_a=" + fmt(r.win_fraction_a, 4)
           + "\n";
    return out;
}

// --- intron conversion ----------------------------------------------------------------

std::vector<std::size_t> converted_exons(const Genome& g, const Alphabet& alpha, std::size_t begin, std::size_t end)
{
    std::vector<std::size_t> out;
    end = std::min(end, g.size());
    for (std::size_t p = begin; p < end; ++p) {
        if (g.codons[p] != alpha.start_codon())
            continue;
        std::size_t q = p + 1;
        while (q < end && g.codons[q] != alpha.stop_codon())
            ++q;
        out.push_back(q - p - 1);
    }
    return out;
}

namespace {

class IntronObserver final : public WorldObserver {
public:
    IntronObserver(const Alphabet& alpha, std::size_t begin, std::size_t end, IntronRun& run)
        : alpha_(alpha), begin_(begin), end_(end), run_(run)
    {
    }

    void on_birth(const Organism& child, const Organism& parent) override
    {
        ++run_.births;
        if (converters_.count(parent.id) != 0 && reproduced_.insert(parent.id).second)
            ++run_.converters_reproduced;
        const auto exons = converted_exons(child.genome(), alpha_, begin_, end_);
        if (exons.empty())
            return;
        ++run_.converted_births;
        converters_.insert(child.id);
        run_.longest_converted_exon = std::max(run_.longest_converted_exon, *std::max_element(exons.begin(), exons.end()));
        const auto& cg = child.genome().codons;
        const auto& pg = parent.genome().codons;
        for (std::size_t p = begin_; p < std::min(end_, cg.size()); ++p)
            if (cg[p] == alpha_.start_codon() && (p >= pg.size() || pg[p] != alpha_.start_codon())) {
                ++run_.new_conversions;
                break;
            }
    }

    void on_api_call(const Organism& o, const Export&, std::uint32_t ip) override
    {
        if (ip >= begin_ && ip < end_ && !o.code.in_intron(ip))
            ++run_.api_calls_in_converted;
    }

    bool is_converter(std::uint64_t id) const { return converters_.count(id) != 0; }

private:
    const Alphabet& alpha_;
    std::size_t begin_;
    std::size_t end_;
    IntronRun& run_;
    std::set<std::uint64_t> converters_;
    std::set<std::uint64_t> reproduced_;
};

} // namespace

IntronResult exp_intron(const ExperimentSpec& spec)
{
    const Alphabet& alpha = spec.alpha();
    const Assembly assembly = build_ancestor(spec, alpha);
    const auto label = assembly.labels.find("intron");
    if (label == assembly.labels.end() || spec.ancestor.intron_codons == 0)
        throw Error(Errc::ConfigError, "the intron experiment needs an ancestor with intron padding");

    IntronResult result;
    result.intron_begin = static_cast<std::size_t>(label->second) + 1;
    result.intron_end = result.intron_begin + spec.ancestor.intron_codons;
    result.runs.resize(spec.replicates);
    parallel_for(spec.replicates, worker_count(spec.threads, spec.replicates), [&](std::size_t rep) {
        IntronRun run;
        run.replicate = rep;
        IntronObserver observer(alpha, result.intron_begin, result.intron_end, run);
        World world(world_for(spec, derive_seed(spec.seed, rep)), {Lineage{"ancestor", alpha, assembly.genome, 1}});
        world.set_observer(&observer);
        world.run(spec.ticks);
        run.ticks_run = world.current_tick();
        run.final_population = world.population();
        for (const auto& o : world.organisms())
            run.final_converters += observer.is_converter(o.id) ? 1 : 0;
        result.runs[rep] = run;
    });
    return result;
}

std::string intron_csv(const IntronResult& r)
{
    std::string out = "replicate,intron_begin,intron_end,ticks_run,births,converted_births,new_conversions,"
                      "converters_reproduced,longest_converted_exon,api_calls_in_converted,final_population,"
                      "final_converters\n";
    for (const auto& run : r.runs)
        out += std::to_string(run.replicate) + "," + std::to_string(r.intron_begin) + "," + std::to_string(r.intron_end)
               + "," + std::to_string(run.ticks_run) + "," + std::to_string(run.births) + ","
               + std::to_string(run.converted_births) + "," + std::to_string(run.new_conversions) + ","
               + std::to_string(run.converters_reproduced) + "," + std::to_string(run.longest_converted_exon) + ","
               + std::to_string(run.api_calls_in_converted) + "," + std::to_string(run.final_population) + ","
               + std::to_string(run.final_converters) + "\n";
    return out;
}

// --- API hash reachability ------------------------------------------------------------

std::vector<std::string> synthetic_export_names(std::size_t count, Rng& rng)
{
    static constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
    std::set<std::string> seen;
    std::vector<std::string> out;
    out.reserve(count);
    while (out.size() < count) {
        std::string name;
        const std::size_t len = rng.between(6, 16);
        for (std::size_t i = 0; i < len; ++i)
            name += kLetters[rng.below(kLetters.size())];
        if (seen.insert(name).second)
            out.push_back(std::move(name));
    }
    return out;
}

ApiHashResult measure_reachability(const VirtualOs& os, std::uint64_t trials, Rng& rng)
{
    ApiHashResult r;
    const auto exports = os.exports();
    r.names = exports.size();
    std::set<std::uint32_t> hashes;
    for (const auto& e : exports)
        hashes.insert(e.hash);
    r.distinct_hashes = hashes.size();
    r.naive_estimate = static_cast<double>(r.names) / static_cast<double>(kHashMask + 1);
    r.trials = trials;
    if (exports.empty() || trials == 0)
        return r;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto& e = exports[rng.below(exports.size())];
        const std::uint32_t flipped = e.hash ^ (1u << rng.below(kHashBits));
        const std::uint32_t addr = resolve_api(os, flipped);
        if (addr != 0 && addr != e.stub_address)
            ++r.resolved;
    }
    r.probability = static_cast<double>(r.resolved) / static_cast<double>(trials);
    return r;
}

ApiHashResult exp_apihash(std::size_t names, std::uint64_t trials, std::uint64_t seed)
{
    Rng rng(derive_seed(seed, kApiStream, names));
    const auto list = synthetic_export_names(names, rng);
    const VirtualOs os = VirtualOs::synthetic(list);
    return measure_reachability(os, trials, rng);
}

std::string apihash_csv(const std::vector<ApiHashResult>& rows)
{
    std::string out = "names,distinct_hashes,trials,resolved,probability,naive_estimate\n";
    for (const auto& r : rows)
        out += std::to_string(r.names) + "," + std::to_string(r.distinct_hashes) + "," + std::to_string(r.trials) + ","
               + std::to_string(r.resolved) + "," + fmt(r.probability, 6) + "," + fmt(r.naive_estimate, 6) + "\n";
    return out;
}

// --- optimize -------------------------------------------------------------------------

std::vector<OptimizeRun> exp_optimize(const ExperimentSpec& spec)
{
    std::vector<std::optional<OptimizeRun>> slots(spec.optimize_runs);
    parallel_for(spec.optimize_runs, worker_count(spec.threads, spec.optimize_runs), [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(spec.seed, i);
        Rng rng(seed);
        const Alphabet start = random_alphabet(InstructionSet::full(), rng);
        auto res = optimize(start, VParams{}, spec.optimize, rng);
        slots[i] = OptimizeRun{seed, std::move(res.alphabet), std::move(res.trace)};
    });
    std::vector<OptimizeRun> out;
    for (auto& s : slots)
        out.push_back(std::move(*s));
    return out;
}

std::string optimize_traces_csv(const std::vector<OptimizeRun>& runs)
{
    std::string out = "run,iteration,energy\n";
    for (std::size_t i = 0; i < runs.size(); ++i)
        for (const auto& s : runs[i].trace)
            out += std::to_string(i) + "," + std::to_string(s.iteration) + "," + fmt(s.energy(), 4) + "\n";
    return out;
}

// --- dispatcher -----------------------------------------------------------------------

Outputs run_experiment(const ExperimentSpec& spec)
{
    Outputs out;
    switch (spec.kind) {
    case ExperimentKind::Run: {
        const Genome ancestor = build_ancestor(spec, spec.alpha()).genome;
        out.push_back({"ticks.csv", tick_csv(run_world(spec, ancestor))});
        break;
    }
    case ExperimentKind::Sweep: {
        const auto r = exp_sweep(spec);
        out.push_back({"sweep_curves.csv", sweep_curves_csv(r)});
        out.push_back({"sweep_summary.csv", sweep_summary_csv(r)});
        break;
    }
    case ExperimentKind::Hamming: {
        const auto runs = exp_hamming(spec);
        out.push_back({"hamming.csv", hamming_csv(runs)});
        out.push_back({"hamming_summary.csv", hamming_summary_csv(runs)});
        break;
    }
    case ExperimentKind::Density:
        out.push_back({"density.csv", density_csv(exp_density(spec))});
        break;
    case ExperimentKind::Duel: {
        const auto r = exp_duel(spec);
        out.push_back({"duel_curves.csv", duel_curves_csv(r)});
        out.push_back({"duel_summary.csv", duel_summary_csv(r)});
        break;
    }
    case ExperimentKind::Intron:
        out.push_back({"intron.csv", intron_csv(exp_intron(spec))});
        break;
    case ExperimentKind::ApiHash: {
        std::vector<ApiHashResult> rows;
        for (std::size_t n : spec.api_names)
            rows.push_back(exp_apihash(n, spec.api_trials, spec.seed));
        out.push_back({"apihash.csv", apihash_csv(rows)});
        break;
    }
    case ExperimentKind::Optimize: {
        const auto runs = exp_optimize(spec);
        out.push_back({"energy_traces.csv", optimize_traces_csv(runs)});
        std::string summary = "run,seed,initial_energy,final_energy\n";
        std::size_t best = 0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            summary += std::to_string(i) + "," + std::to_string(runs[i].seed) + ","
                       + fmt(runs[i].trace.front().energy(), 4) + "," + fmt(runs[i].trace.back().energy(), 4) + "\n";
            if (runs[i].trace.back().scaled < runs[best].trace.back().scaled)
                best = i;
            out.push_back({"alphabet_" + std::to_string(i) + ".alpha", format_alphabet(runs[i].alphabet)});
        }
        out.push_back({"optimize_summary.csv", summary});
        if (!runs.empty())
            out.push_back({"best.alpha", format_alphabet(runs[best].alphabet)});
        break;
    }
    }
    return out;
}

} // namespace codonsoup
