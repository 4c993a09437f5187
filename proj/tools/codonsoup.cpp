#include "codonsoup/assembler.hpp"
#include "codonsoup/config.hpp"
#include "codonsoup/ecology.hpp"
#include "codonsoup/error.hpp"
#include "codonsoup/lab.hpp"
#include "codonsoup/plot.hpp"
#include "codonsoup/vm.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace codonsoup;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, std::string_view content)
{
    if (const auto dir = fs::path(path).parent_path(); !dir.empty())
        fs::create_directories(dir);
    std::ofstream out(path, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw Error(Errc::IoError, "cannot write " + path);
}

// Flags shared by the experiment subcommands; non-empty values override config keys.
struct CommonFlags {
    std::string config;
    std::string seed;
    std::string ticks;
    std::string replicates;
    std::vector<std::string> rates;
    std::string alphabet;
    std::string iset;
    std::string out = ".";

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--config", config, "Key-value config file");
        cmd->add_option("--seed", seed, "Master seed");
        cmd->add_option("--ticks", ticks, "Ticks per world");
        cmd->add_option("--replicates", replicates, "Replicate worlds per point");
        cmd->add_option("--rate", rates, "Mutation rate (e.g. 1/9001); repeat for a sweep grid");
        cmd->add_option("--alphabet", alphabet, "Alphabet file");
        cmd->add_option("--iset", iset, "Instruction-set / lowering file");
        cmd->add_option("--out", out, "Output directory (or file for run)");
    }

    ExperimentSpec spec(ExperimentKind kind) const
    {
        KeyValues kv = config.empty() ? KeyValues{} : KeyValues::load(config);
        const auto put = [&](const char* key, const std::string& v) {
            if (!v.empty())
                kv.set(key, v);
        };
        put("seed", seed);
        put("ticks", ticks);
        put("replicates", replicates);
        if (!alphabet.empty())
            kv.set("alphabet", fs::absolute(alphabet).string());
        if (!iset.empty())
            kv.set("iset", fs::absolute(iset).string());
        if (!rates.empty()) {
            if (kind == ExperimentKind::Sweep) {
                std::string grid;
                for (const auto& r : rates)
                    grid += (grid.empty() ? "" : " ") + r;
                kv.set("rates", grid);
            } else {
                if (rates.size() != 1)
                    throw Error(Errc::ConfigError, "--rate takes a single value here");
                kv.set("bitflip_rate", rates.front());
            }
        }
        return spec_from_config(kv, kind);
    }
};

void write_outputs(const Outputs& files, const std::string& dir, const std::vector<std::string>& echo)
{
    for (const auto& f : files) {
        const std::string path = (fs::path(dir) / f.name).string();
        write_file(path, f.content);
        std::cerr << "wrote " << path << "\n";
        if (std::find(echo.begin(), echo.end(), f.name) != echo.end())
            std::cout << f.content;
    }
}

const Alphabet& pick_alphabet(const std::string& path, std::unique_ptr<Alphabet>& storage)
{
    if (path.empty())
        return default_alphabet();
    storage = std::make_unique<Alphabet>(load_alphabet(path));
    return *storage;
}

int run_cli(int argc, char** argv)
{
    CLI::App app{"codonsoup: codon-based artificial evolution in a sandboxed VM"};
    app.require_subcommand(1);

    // assemble
    std::string asm_source, asm_alpha, asm_out, asm_iset, asm_listing;
    std::uint64_t asm_seed = 1;
    auto* assemble_cmd = app.add_subcommand("assemble", "Assemble source into a genome file");
    assemble_cmd->add_option("source", asm_source, "Assembler source (`-` for the built-in ancestor)")->required();
    assemble_cmd->add_option("-a,--alphabet", asm_alpha, "Alphabet file (default: built-in)");
    assemble_cmd->add_option("-o,--out", asm_out, "Genome output file")->required();
    assemble_cmd->add_option("--seed", asm_seed, "Seed for polymorphic codon choice");
    assemble_cmd->add_option("--iset", asm_iset, "Instruction-set / lowering file");
    assemble_cmd->add_option("--listing", asm_listing, "Also write a disassembly listing");

    // translate
    std::string tr_genome, tr_alpha, tr_out;
    bool tr_source = false;
    auto* translate_cmd = app.add_subcommand("translate", "Disassemble a genome file");
    translate_cmd->add_option("genome", tr_genome, "Genome file")->required();
    translate_cmd->add_option("-a,--alphabet", tr_alpha, "Alphabet file (default: built-in)");
    translate_cmd->add_option("-o,--out", tr_out, "Write the listing here instead of stdout");
    translate_cmd->add_flag("--source", tr_source, "Emit re-assemblable source instead of a listing");

    // run
    CommonFlags run_flags;
    run_flags.out = "";
    std::string trace_genome;
    std::uint64_t trace_steps = 1000;
    auto* run_cmd = app.add_subcommand("run", "Run one world and write its tick statistics");
    run_flags.attach(run_cmd);
    run_cmd->add_option("--trace-genome", trace_genome, "Instead: trace one organism from this genome file");
    run_cmd->add_option("--steps", trace_steps, "Instruction budget for --trace-genome");

    // experiments
    struct ExpCmd {
        const char* name;
        const char* help;
        ExperimentKind kind;
        std::vector<std::string> echo;
        CommonFlags flags;
        CLI::App* cmd = nullptr;
    };
    std::vector<ExpCmd> experiments;
    experiments.push_back({"sweep", "Mutation-rate sweep: population curves and extinction fractions",
                           ExperimentKind::Sweep, {"sweep_summary.csv"}, {}});
    experiments.push_back({"hamming", "Hamming distance to the ancestor over time", ExperimentKind::Hamming,
                           {"hamming_summary.csv"}, {}});
    experiments.push_back({"density", "Instruction histograms under reduced instruction sets",
                           ExperimentKind::Density, {"density.csv"}, {}});
    experiments.push_back({"duel", "Two alphabets compete in one world", ExperimentKind::Duel,
                           {"duel_summary.csv"}, {}});
    experiments.push_back({"intron", "Intron-to-exon conversion scan", ExperimentKind::Intron, {"intron.csv"}, {}});
    experiments.push_back({"apihash", "Single-bitflip API hash reachability", ExperimentKind::ApiHash,
                           {"apihash.csv"}, {}});
    experiments.push_back({"optimize-alphabet", "Greedy alphabet energy minimization", ExperimentKind::Optimize,
                           {"optimize_summary.csv"}, {}});
    for (auto& e : experiments) {
        e.cmd = app.add_subcommand(e.name, e.help);
        e.flags.attach(e.cmd);
    }

    // snapshot
    auto* snapshot_cmd = app.add_subcommand("snapshot", "Save or resume a world");
    snapshot_cmd->require_subcommand(1);
    CommonFlags snap_flags;
    std::string snap_file;
    auto* snap_create = snapshot_cmd->add_subcommand("create", "Run a world for --ticks, then save it");
    snap_flags.attach(snap_create);
    snap_create->add_option("-o,--snapshot", snap_file, "Snapshot file")->required();
    std::string resume_file, resume_save, resume_out;
    std::uint64_t resume_ticks = 100;
    auto* snap_resume = snapshot_cmd->add_subcommand("resume", "Continue a saved world");
    snap_resume->add_option("snapshot", resume_file, "Snapshot file")->required();
    snap_resume->add_option("--ticks", resume_ticks, "Further ticks");
    snap_resume->add_option("--out", resume_out, "Tick CSV (default: stdout)");
    snap_resume->add_option("--save", resume_save, "Save the world again afterwards");

    // plot
    std::string plot_in, plot_out, plot_x, plot_title;
    std::vector<std::string> plot_y, plot_group;
    bool plot_stairs = false;
    auto* plot_cmd = app.add_subcommand("plot", "Render a CSV file as a static SVG chart");
    plot_cmd->add_option("csv", plot_in, "Input CSV")->required();
    plot_cmd->add_option("-o,--out", plot_out, "Output SVG")->required();
    plot_cmd->add_option("--x", plot_x, "X column");
    plot_cmd->add_option("--y", plot_y, "Y column(s)");
    plot_cmd->add_option("--group", plot_group, "Columns that split series");
    plot_cmd->add_option("--title", plot_title, "Chart title");
    plot_cmd->add_flag("--stairs", plot_stairs, "Step chart instead of straight segments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (*assemble_cmd) {
        std::unique_ptr<Alphabet> storage;
        const Alphabet& alpha = pick_alphabet(asm_alpha, storage);
        const std::string source = asm_source == "-" ? ancestor_source() : read_file(asm_source);
        AssembleOptions options;
        if (!asm_iset.empty())
            options.lowering = parse_lowering_table(read_file(asm_iset));
        Rng rng(asm_seed);
        const Genome g = assemble(source, alpha, rng, options);
        save_genome(g, asm_out);
        if (!asm_listing.empty())
            write_file(asm_listing, disassemble(g, alpha));
        std::cerr << "assembled " << g.size() << " codons (data at " << g.data_offset << ")\n";
        return 0;
    }
    if (*translate_cmd) {
        std::unique_ptr<Alphabet> storage;
        const Alphabet& alpha = pick_alphabet(tr_alpha, storage);
        const Genome g = load_genome(tr_genome);
        const std::string text = tr_source ? disassemble_source(g, alpha) : disassemble(g, alpha);
        if (tr_out.empty())
            std::cout << text;
        else
            write_file(tr_out, text);
        return 0;
    }
    if (*run_cmd) {
        const ExperimentSpec spec = run_flags.spec(ExperimentKind::Run);
        std::ostringstream out;
        if (!trace_genome.empty()) {
            CodeImage code(load_genome(trace_genome), spec.alpha());
            VmState state = VmState::fresh(spec.world.vm, spec.seed);
            out << kTraceHeader << "\n";
            std::uint64_t left = trace_steps;
            for (;;) {
                const SliceResult r = run_slice(state, code, VirtualOs::standard(), null_host(), left, &out);
                left -= std::min(left, r.steps);
                if (const auto* req = std::get_if<SpawnRequest>(&r.outcome)) {
                    std::cerr << "spawn request: address 0x" << std::hex << req->address << std::dec << ", "
                              << req->length << " codons\n";
                    finish_spawn(state, true);
                    if (left > 0)
                        continue;
                } else if (std::holds_alternative<Exit>(r.outcome)) {
                    std::cerr << "exit after " << state.steps_executed << " steps\n";
                } else if (const auto* f = std::get_if<Fault>(&r.outcome)) {
                    std::cerr << "fault " << to_string(f->kind) << " at ip " << state.ip << "\n";
                }
                break;
            }
        } else {
            out << run_experiment(spec).front().content;
        }
        if (run_flags.out.empty())
            std::cout << out.str();
        else
            write_file(run_flags.out, out.str());
        return 0;
    }
    for (auto& e : experiments) {
        if (!*e.cmd)
            continue;
        const ExperimentSpec spec = e.flags.spec(e.kind);
        if (e.kind == ExperimentKind::Sweep) {
            const auto r = exp_sweep(spec);
            write_outputs({{"sweep_curves.csv", sweep_curves_csv(r)}, {"sweep_summary.csv", sweep_summary_csv(r)}},
                          e.flags.out, e.echo);
            if (!r.monotone)
                std::cerr << "note: extinction fraction is not monotone in the rate on this grid\n";
        } else {
            write_outputs(run_experiment(spec), e.flags.out, e.echo);
        }
        return 0;
    }
    if (*snap_create) {
        const ExperimentSpec spec = snap_flags.spec(ExperimentKind::Run);
        const Genome ancestor = build_ancestor(spec, spec.alpha()).genome;
        WorldConfig config = spec.world;
        config.seed = spec.seed;
        World world(config, {Lineage{"ancestor", spec.alpha(), ancestor, 1}});
        world.run(spec.ticks);
        write_file(snap_file, world.snapshot());
        std::cerr << "saved tick " << world.current_tick() << ", population " << world.population() << "\n";
        return 0;
    }
    if (*snap_resume) {
        auto world = World::restore(read_file(resume_file));
        std::vector<TickStats> curve;
        world->run(resume_ticks, [&](const TickStats& s) { curve.push_back(s); });
        const std::string csv = tick_csv(curve);
        if (resume_out.empty())
            std::cout << csv;
        else
            write_file(resume_out, csv);
        if (!resume_save.empty())
            write_file(resume_save, world->snapshot());
        return 0;
    }
    if (*plot_cmd) {
        PlotOptions opt;
        opt.x = plot_x;
        opt.y = plot_y;
        opt.group = plot_group;
        opt.title = plot_title.empty() ? fs::path(plot_in).filename().string() : plot_title;
        opt.stairs = plot_stairs;
        write_file(plot_out, render_svg(parse_csv(read_file(plot_in)), opt));
        return 0;
    }
    return kExitConfig;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run_cli(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_config_error() ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
