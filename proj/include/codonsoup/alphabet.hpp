#pragma once

#include "codonsoup/isa.hpp"
#include "codonsoup/rng.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace codonsoup {

using Codon = std::uint8_t;

inline constexpr std::size_t kCodonCount = 256;
inline constexpr Codon kNopMask = 0x91;
inline constexpr std::size_t kNopPatternCount = 32;
inline constexpr Codon kDefaultStartCodon = 0x2A;
inline constexpr Codon kDefaultStopCodon = 0x54;

/// Codons of the form 1??1.???1 always translate to a NOP.
constexpr bool is_nop_pattern(Codon c) noexcept { return (c & kNopMask) == kNopMask; }

enum class Role : std::uint8_t { Exec, Start, Stop, Nop };

struct AlphabetEntry {
    Role role = Role::Nop;
    Op op = Op::NopReal; // meaningful for Exec only

    static constexpr AlphabetEntry exec(Op op) noexcept { return {Role::Exec, op}; }
    static constexpr AlphabetEntry start() noexcept { return {Role::Start, Op::NopReal}; }
    static constexpr AlphabetEntry stop() noexcept { return {Role::Stop, Op::NopReal}; }
    static constexpr AlphabetEntry nop() noexcept { return {Role::Nop, Op::NopReal}; }

    /// What the entry executes as: its instruction, or nopREAL for every other role.
    constexpr Op translated() const noexcept { return role == Role::Exec ? op : Op::NopReal; }

    friend constexpr bool operator==(const AlphabetEntry& a, const AlphabetEntry& b) noexcept
    {
        return a.role == b.role && (a.role != Role::Exec || a.op == b.op);
    }
};

using EntryTable = std::array<AlphabetEntry, kCodonCount>;

/// Pairwise interaction energies in units of 1/300, so every default tier is an integer
/// and energy sums stay exact.
struct VParams {
    static constexpr int kScale = 300;

    int same = 0;
    int add_family = 150;     // 0.5
    int harmless = 198;       // 0.66
    int semi_harmless = 225;  // 0.75
    int other = 300;          // 1.0: dangerous instructions, START, STOP

    bool valid() const noexcept
    {
        return same == 0 && same <= add_family && add_family <= harmless && harmless <= semi_harmless
               && semi_harmless <= other;
    }
};

class Alphabet {
public:
    /// Validates the table: one START, one STOP (distinct, outside the NOP pattern) and
    /// Nop at all 32 NOP-pattern slots. Throws InvalidAlphabet.
    explicit Alphabet(const EntryTable& entries);

    const AlphabetEntry& operator[](Codon c) const noexcept { return entries_[c]; }
    const EntryTable& entries() const noexcept { return entries_; }
    Codon start_codon() const noexcept { return start_; }
    Codon stop_codon() const noexcept { return stop_; }

    /// Slots the optimizer may not move: the NOP pattern, START and STOP.
    bool is_reserved(Codon c) const noexcept { return is_nop_pattern(c) || c == start_ || c == stop_; }

    /// Codons that assemble to `op` in an exon (for nopREAL this includes Nop-role codons).
    std::span<const Codon> codons_for(Op op) const noexcept { return by_op_[index_of(op)]; }

    /// Codons whose role is identical to that of `c` (including `c` itself).
    std::span<const Codon> same_role(Codon c) const noexcept;

    /// Instructions that appear in at least one Exec entry.
    InstructionSet instructions() const;

    friend bool operator==(const Alphabet& a, const Alphabet& b) noexcept { return a.entries_ == b.entries_; }

private:
    EntryTable entries_;
    Codon start_ = 0;
    Codon stop_ = 0;
    std::array<std::vector<Codon>, kInstructionCount> by_op_;
    std::vector<Codon> exec_nop_codons_;
    std::vector<Codon> nop_codons_;
};

/// Interaction energy between two entries, in 1/300 units.
int interaction_scaled(const AlphabetEntry& a, const AlphabetEntry& b, const VParams& v = {}) noexcept;
double interaction(const AlphabetEntry& a, const AlphabetEntry& b, const VParams& v = {}) noexcept;

/// Sum over every codon and each of its single-bit neighbours (each pair counted twice).
/// `entries.size()` must be a power of two; its log2 is the hypercube dimension.
std::int64_t energy_scaled(std::span<const AlphabetEntry> entries, const VParams& v = {});
double energy(std::span<const AlphabetEntry> entries, const VParams& v = {});
double energy(const Alphabet& alpha, const VParams& v = {});

inline double unscale(std::int64_t scaled) { return static_cast<double>(scaled) / VParams::kScale; }

struct EnergySample {
    std::uint64_t iteration = 0;
    std::int64_t scaled = 0;
    double energy() const { return unscale(scaled); }
};

using EnergyTrace = std::vector<EnergySample>;

struct OptimizeOptions {
    std::uint64_t iterations = 300'000;
    unsigned swaps_per_step = 2;
    std::uint64_t trace_stride = 1000;
};

struct OptimizeResult {
    Alphabet alphabet;
    EnergyTrace trace;
};

/// Greedy swap search: propose exchanging the entries of `swaps_per_step` random pairs of
/// non-reserved slots and keep the proposal only if the energy strictly drops.
OptimizeResult optimize(const Alphabet& alpha, const VParams& v, const OptimizeOptions& options, Rng& rng);

/// Reserved slots set, the remaining 222 filled from `instrs` (each at least once), shuffled.
/// Throws TooManyInstructions if `instrs` has more than 222 members.
Alphabet random_alphabet(const InstructionSet& instrs, Codon start, Codon stop, Rng& rng);
inline Alphabet random_alphabet(const InstructionSet& instrs, Rng& rng)
{
    return random_alphabet(instrs, kDefaultStartCodon, kDefaultStopCodon, rng);
}

/// The energy-optimized full-set alphabet the tools ship with (deterministic, built once).
const Alphabet& default_alphabet();

inline constexpr std::uint64_t kDefaultAlphabetSeed = 0x5eed0a1fULL;
inline constexpr std::uint64_t kDefaultAlphabetIterations = 300'000;

/// Text format: `codonsoup-alphabet 1`, then 256 lines `<hex codon> <mnemonic|START|STOP|NOP>`.
std::string format_alphabet(const Alphabet& alpha);
Alphabet parse_alphabet(std::string_view text);
Alphabet load_alphabet(const std::string& path);
void save_alphabet(const Alphabet& alpha, const std::string& path);

std::string format_trace_csv(const EnergyTrace& trace);

std::string_view to_string(Role role) noexcept;

} // namespace codonsoup
