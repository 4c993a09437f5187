#include "codonsoup/alphabet.hpp"

#include "codonsoup/error.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace codonsoup {

namespace {

enum class Tier : std::uint8_t { AddFamily, Harmless, SemiHarmless, Hazard };

Tier tier_of(const AlphabetEntry& e) noexcept
{
    switch (e.role) {
    case Role::Start:
    case Role::Stop:
        return Tier::Hazard;
    case Role::Nop:
        return Tier::Harmless;
    case Role::Exec:
        break;
    }
    switch (category(e.op)) {
    case DangerCategory::AddFamily:
        return Tier::AddFamily;
    case DangerCategory::Harmless:
        return Tier::Harmless;
    case DangerCategory::SemiHarmless:
        return Tier::SemiHarmless;
    case DangerCategory::Dangerous:
        return Tier::Hazard;
    }
    return Tier::Hazard;
}

// Energy of the edges touching `slot`, counted once each.
std::int64_t local_energy(const EntryTable& t, unsigned slot, const VParams& v)
{
    std::int64_t sum = 0;
    for (unsigned bit = 0; bit < 8; ++bit)
        sum += interaction_scaled(t[slot], t[slot ^ (1u << bit)], v);
    return sum;
}

// Change in total energy (double-sum convention) caused by swapping slots a and b.
std::int64_t swap_delta(EntryTable& t, unsigned a, unsigned b, const VParams& v)
{
    if (a == b || t[a] == t[b])
        return 0;
    const bool adjacent = std::popcount(a ^ b) == 1;
    const auto edge_ab = adjacent ? interaction_scaled(t[a], t[b], v) : 0;
    const auto before = local_energy(t, a, v) + local_energy(t, b, v) - edge_ab;
    std::swap(t[a], t[b]);
    const auto after = local_energy(t, a, v) + local_energy(t, b, v) - edge_ab;
    return 2 * (after - before);
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

std::string_view to_string(Role role) noexcept
{
    switch (role) {
    case Role::Exec:
        return "exec";
    case Role::Start:
        return "start";
    case Role::Stop:
        return "stop";
    case Role::Nop:
        return "nop";
    }
    return "?";
}

Alphabet::Alphabet(const EntryTable& entries) : entries_(entries)
{
    std::optional<Codon> start, stop;
    for (std::size_t i = 0; i < kCodonCount; ++i) {
        const auto c = static_cast<Codon>(i);
        const auto& e = entries_[i];
        if (is_nop_pattern(c) && e.role != Role::Nop)
            throw Error(Errc::InvalidAlphabet, "codon " + std::to_string(i) + " matches the NOP pattern but is not NOP");
        if (e.role == Role::Start) {
            if (start)
                throw Error(Errc::InvalidAlphabet, "more than one START codon");
            start = c;
        } else if (e.role == Role::Stop) {
            if (stop)
                throw Error(Errc::InvalidAlphabet, "more than one STOP codon");
            stop = c;
        }
        if (e.role == Role::Exec && index_of(e.op) >= kInstructionCount)
            throw Error(Errc::InvalidAlphabet, "codon " + std::to_string(i) + " has an invalid instruction");
    }
    if (!start || !stop)
        throw Error(Errc::InvalidAlphabet, "alphabet needs exactly one START and one STOP codon");
    start_ = *start;
    stop_ = *stop;

    for (std::size_t i = 0; i < kCodonCount; ++i) {
        const auto c = static_cast<Codon>(i);
        const auto& e = entries_[i];
        if (e.role == Role::Exec) {
            by_op_[index_of(e.op)].push_back(c);
            if (e.op == Op::NopReal)
                exec_nop_codons_.push_back(c);
        } else if (e.role == Role::Nop) {
            nop_codons_.push_back(c);
        }
    }
    auto& nops = by_op_[index_of(Op::NopReal)];
    nops.insert(nops.end(), nop_codons_.begin(), nop_codons_.end());
    std::sort(nops.begin(), nops.end());
}

std::span<const Codon> Alphabet::same_role(Codon c) const noexcept
{
    const auto& e = entries_[c];
    switch (e.role) {
    case Role::Exec:
        return e.op == Op::NopReal ? std::span<const Codon>(exec_nop_codons_) : std::span<const Codon>(by_op_[index_of(e.op)]);
    case Role::Nop:
        return nop_codons_;
    case Role::Start:
        return {&start_, 1};
    case Role::Stop:
        return {&stop_, 1};
    }
    return {};
}

InstructionSet Alphabet::instructions() const
{
    InstructionSet s;
    for (const auto& e : entries_)
        if (e.role == Role::Exec)
            s.insert(e.op);
    return s;
}

int interaction_scaled(const AlphabetEntry& a, const AlphabetEntry& b, const VParams& v) noexcept
{
    if (a == b)
        return v.same;
    const Tier ta = tier_of(a);
    const Tier tb = tier_of(b);
    if (ta == Tier::AddFamily && tb == Tier::AddFamily)
        return v.add_family;
    if (ta <= Tier::Harmless && tb <= Tier::Harmless)
        return v.harmless;
    if (ta <= Tier::SemiHarmless && tb <= Tier::SemiHarmless)
        return v.semi_harmless;
    return v.other;
}

double interaction(const AlphabetEntry& a, const AlphabetEntry& b, const VParams& v) noexcept
{
    return unscale(interaction_scaled(a, b, v));
}

std::int64_t energy_scaled(std::span<const AlphabetEntry> entries, const VParams& v)
{
    const std::size_t n = entries.size();
    if (n == 0 || !std::has_single_bit(n))
        throw Error(Errc::InvalidAlphabet, "energy needs a power-of-two codon space");
    const unsigned dims = static_cast<unsigned>(std::countr_zero(n));
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (unsigned bit = 0; bit < dims; ++bit)
            sum += interaction_scaled(entries[i], entries[i ^ (std::size_t{1} << bit)], v);
    return sum;
}

double energy(std::span<const AlphabetEntry> entries, const VParams& v) { return unscale(energy_scaled(entries, v)); }

double energy(const Alphabet& alpha, const VParams& v) { return energy(alpha.entries(), v); }

OptimizeResult optimize(const Alphabet& alpha, const VParams& v, const OptimizeOptions& options, Rng& rng)
{
    if (options.swaps_per_step < 1)
        throw Error(Errc::ConfigError, "swaps_per_step must be at least 1");

    EntryTable work = alpha.entries();
    std::vector<unsigned> free_slots;
    for (unsigned c = 0; c < kCodonCount; ++c)
        if (!alpha.is_reserved(static_cast<Codon>(c)))
            free_slots.push_back(c);

    std::int64_t current = energy_scaled(work, v);
    EnergyTrace trace{{0, current}};
    const std::uint64_t stride = std::max<std::uint64_t>(options.trace_stride, 1);

    std::vector<std::pair<unsigned, unsigned>> swaps(options.swaps_per_step);
    for (std::uint64_t it = 1; it <= options.iterations; ++it) {
        std::int64_t delta = 0;
        for (auto& [a, b] : swaps) {
            a = free_slots[rng.below(free_slots.size())];
            b = free_slots[rng.below(free_slots.size())];
            delta += swap_delta(work, a, b, v);
        }
        if (delta < 0) {
            current += delta;
        } else {
            for (auto s = swaps.rbegin(); s != swaps.rend(); ++s)
                std::swap(work[s->first], work[s->second]);
        }
        if (it % stride == 0 || it == options.iterations)
            trace.push_back({it, current});
    }
    return {Alphabet(work), std::move(trace)};
}

Alphabet random_alphabet(const InstructionSet& instrs, Codon start, Codon stop, Rng& rng)
{
    if (start == stop || is_nop_pattern(start) || is_nop_pattern(stop))
        throw Error(Errc::InvalidAlphabet, "START and STOP must differ and lie outside the NOP pattern");
    const auto ops = instrs.ops();
    if (ops.empty())
        throw Error(Errc::InvalidAlphabet, "instruction set is empty");
    const std::size_t free = kCodonCount - kNopPatternCount - 2;
    if (ops.size() > free)
        throw Error(Errc::TooManyInstructions, std::to_string(ops.size()) + " instructions for " + std::to_string(free) + " slots");

    std::vector<Op> fill(ops.begin(), ops.end());
    while (fill.size() < free)
        fill.push_back(ops[rng.below(ops.size())]);
    for (std::size_t i = fill.size() - 1; i > 0; --i)
        std::swap(fill[i], fill[rng.below(i + 1)]);

    EntryTable t;
    std::size_t next = 0;
    for (std::size_t i = 0; i < kCodonCount; ++i) {
        const auto c = static_cast<Codon>(i);
        if (is_nop_pattern(c))
            t[i] = AlphabetEntry::nop();
        else if (c == start)
            t[i] = AlphabetEntry::start();
        else if (c == stop)
            t[i] = AlphabetEntry::stop();
        else
            t[i] = AlphabetEntry::exec(fill[next++]);
    }
    return Alphabet(t);
}

const Alphabet& default_alphabet()
{
    static const Alphabet alpha = [] {
        Rng rng(kDefaultAlphabetSeed);
        auto start = random_alphabet(InstructionSet::full(), rng);
        OptimizeOptions opts;
        opts.iterations = kDefaultAlphabetIterations;
        opts.trace_stride = kDefaultAlphabetIterations;
        return optimize(start, VParams{}, opts, rng).alphabet;
    }();
    return alpha;
}

std::string format_alphabet(const Alphabet& alpha)
{
    std::string out = "codonsoup-alphabet 1\n";
    char buf[64];
    for (std::size_t i = 0; i < kCodonCount; ++i) {
        const auto& e = alpha[static_cast<Codon>(i)];
        const char* name = "NOP";
        std::string m;
        switch (e.role) {
        case Role::Exec:
            m = std::string(mnemonic(e.op));
            name = m.c_str();
            break;
        case Role::Start:
            name = "START";
            break;
        case Role::Stop:
            name = "STOP";
            break;
        case Role::Nop:
            break;
        }
        std::snprintf(buf, sizeof buf, "%02zx %s\n", i, name);
        out += buf;
    }
    return out;
}

Alphabet parse_alphabet(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    bool header = false;
    EntryTable t;
    std::array<bool, kCodonCount> seen{};
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = trim(raw.substr(0, raw.find('#')));
        if (line.empty())
            continue;
        std::istringstream words(line);
        std::string a, b, extra;
        words >> a >> b;
        if (!header) {
            if (a != "codonsoup-alphabet")
                throw Error(Errc::BadFormat, "missing 'codonsoup-alphabet' header");
            if (b != "1")
                throw Error(Errc::VersionMismatch, "alphabet format version " + b);
            header = true;
            continue;
        }
        if (b.empty() || (words >> extra))
            throw Error(Errc::BadFormat, "line " + std::to_string(line_no) + ": expected '<hex codon> <role>'");
        unsigned long code = 0;
        try {
            std::size_t used = 0;
            code = std::stoul(a, &used, 16);
            if (used != a.size())
                throw std::invalid_argument(a);
        } catch (const std::exception&) {
            throw Error(Errc::BadFormat, "line " + std::to_string(line_no) + ": bad codon '" + a + "'");
        }
        if (code >= kCodonCount || seen[code])
            throw Error(Errc::BadFormat, "line " + std::to_string(line_no) + ": codon out of range or repeated");
        seen[code] = true;
        if (b == "START")
            t[code] = AlphabetEntry::start();
        else if (b == "STOP")
            t[code] = AlphabetEntry::stop();
        else if (b == "NOP")
            t[code] = AlphabetEntry::nop();
        else if (auto op = parse_mnemonic(b))
            t[code] = AlphabetEntry::exec(*op);
        else
            throw Error(Errc::UnknownMnemonic, "line " + std::to_string(line_no) + ": '" + b + "'");
    }
    if (!header)
        throw Error(Errc::BadFormat, "empty alphabet file");
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw Error(Errc::BadFormat, "alphabet must list all 256 codons");
    return Alphabet(t);
}

Alphabet load_alphabet(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_alphabet(ss.str());
}

void save_alphabet(const Alphabet& alpha, const std::string& path)
{
    std::ofstream out(path);
    out << format_alphabet(alpha);
    if (!out)
        throw Error(Errc::IoError, "cannot write " + path);
}

std::string format_trace_csv(const EnergyTrace& trace)
{
    std::string out = "iteration,energy\n";
    char buf[64];
    for (const auto& s : trace) {
        std::snprintf(buf, sizeof buf, "%llu,%.4f\n", static_cast<unsigned long long>(s.iteration), s.energy());
        out += buf;
    }
    return out;
}

} // namespace codonsoup
