#pragma once

#include "codonsoup/alphabet.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace codonsoup {

/// A fixed-length codon sequence. Codons before `data_offset` are code; the rest is the
/// data section addressed through getDO.
struct Genome {
    std::vector<Codon> codons;
    std::size_t data_offset = 0;

    Genome() = default;
    explicit Genome(std::vector<Codon> c) : codons(std::move(c)), data_offset(codons.size()) {}
    Genome(std::vector<Codon> c, std::size_t offset) : codons(std::move(c)), data_offset(offset) {}

    std::size_t size() const noexcept { return codons.size(); }
    bool empty() const noexcept { return codons.empty(); }

    friend bool operator==(const Genome&, const Genome&) = default;
};

/// Splice mask in effect: 0x00 in an exon, 0x91 after a STOP codon.
enum class SpliceMask : Codon { Exon = 0x00, Intron = kNopMask };

struct SplicedCodon {
    Op op = Op::NopReal;
    SpliceMask mask = SpliceMask::Exon; // mask in effect when this codon was read
};

/// Advances the splicing state machine by one raw codon.
inline SplicedCodon splice_step(Codon raw, SpliceMask& mask, const Alphabet& alpha) noexcept
{
    const SplicedCodon out{Op::NopReal, mask};
    const auto& entry = alpha[raw];
    if (entry.role == Role::Stop) {
        mask = SpliceMask::Intron;
        return out;
    }
    if (entry.role == Role::Start) {
        mask = SpliceMask::Exon;
        return out;
    }
    return {alpha[static_cast<Codon>(raw | static_cast<Codon>(mask))].translated(), out.mask};
}

/// One instruction per codon; introns come out as nopREAL. START/STOP are detected on the
/// raw codon and themselves translate to nopREAL.
std::vector<Op> splice_translate(const Genome& g, const Alphabet& alpha);
std::vector<Op> splice_translate(std::span<const Codon> codons, const Alphabet& alpha);
std::vector<SplicedCodon> splice_detailed(std::span<const Codon> codons, const Alphabet& alpha);

/// Number of differing bits. Throws LengthMismatch.
std::uint64_t hamming(const Genome& a, const Genome& b);
std::uint64_t hamming(std::span<const Codon> a, std::span<const Codon> b);

struct InstructionHistogram {
    std::array<double, kInstructionCount> frequency{};
    double danger_density = 0.0;
    std::size_t total = 0;

    double operator[](Op op) const { return frequency[index_of(op)]; }
};

/// Normalized post-splice instruction counts over the code region (codons before the
/// data offset), plus the fraction of dangerous instructions.
InstructionHistogram instruction_histogram(const Genome& g, const Alphabet& alpha);

/// One line per codon: index, hex codon, role, post-splice instruction, exon/intron/marker.
std::string disassemble(const Genome& g, const Alphabet& alpha);

/// Assembler source that reproduces the genome's translation (data section as raw bytes).
std::string disassemble_source(const Genome& g, const Alphabet& alpha);

inline constexpr std::uint32_t kGenomeFormatVersion = 1;

/// Binary format: 8-byte magic "CSOUPGEN", u32 version, u32 length, u32 data_offset,
/// raw codons; integers little-endian.
void write_genome(std::ostream& out, const Genome& g);
Genome read_genome(std::istream& in);
void save_genome(const Genome& g, const std::string& path);
Genome load_genome(const std::string& path);

} // namespace codonsoup
