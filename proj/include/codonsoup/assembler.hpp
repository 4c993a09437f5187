#pragma once

#include "codonsoup/genome.hpp"
#include "codonsoup/isa.hpp"
#include "codonsoup/rng.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace codonsoup {

/// `addnumber k`: the base-4 greedy sum over add4000..add0001, largest first, each
/// power used 0 to 3 times. Throws AddNumberRange for k > 0xFFFF.
std::vector<Op> expand_addnumber(std::int64_t k);

/// `rol_regA c`: RegA := rotate-left(RegA, c) for c in 1..31. Clobbers BC1 and BC2;
/// the stack depth is unchanged.
std::vector<Op> expand_rol_regA(std::int64_t c);

struct AssembleOptions {
    /// Mnemonics outside `lowering.active` are replaced by their lowering.
    LoweringTable lowering = default_lowering_table();
};

struct Assembly {
    Genome genome;
    /// Code labels hold a codon index; labels after DATA hold an offset into the data section.
    std::map<std::string, std::int64_t, std::less<>> labels;
};

/// Source format, one statement per line, `;` starts a comment:
///   label:                  defines a label (may share a line with a statement)
///   <mnemonic>              one instruction
///   addnumber <expr>        BC1 += expr via the add ladder
///   rol_regA <expr>         rotate RegA left
///   START | STOP            raw marker codon
///   PAD-INTRON <n>          STOP, n random codons (never START), START
///   DATA                    starts the data section; data_offset is set here
///   dword <expr> | byte <expr> | apihash "name" | reserve <n> | PAD-TO <total length>
/// Expressions: integers (decimal or 0x), labels, $LENGTH, $DATA, + and -, parentheses,
/// rol(x, n) and ror(x, n) on 32-bit values.
Assembly assemble_detailed(std::string_view source, const Alphabet& alpha, Rng& rng,
                           const AssembleOptions& options = {});

Genome assemble(std::string_view source, const Alphabet& alpha, Rng& rng, const AssembleOptions& options = {});

enum class IntronPlacement : std::uint8_t {
    Tail, // between the program and the data section; never executed
    Head, // before the program; executed once per life as a run of nopREAL
};

struct AncestorOptions {
    std::size_t exon_codons = 512;
    std::size_t intron_codons = 0;
    IntronPlacement placement = IntronPlacement::Tail;
    unsigned offspring = 3;
};

/// Source of the shipped self-replicator: resolves vspawn, spawns `offspring` copies of
/// its whole image (retrying while the world is full), then calls vexit. With intron
/// padding, the label `intron` marks the padding's STOP codon.
std::string ancestor_source(const AncestorOptions& options = {});

} // namespace codonsoup
