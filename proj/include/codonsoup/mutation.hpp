#pragma once

#include "codonsoup/genome.hpp"
#include "codonsoup/rng.hpp"

#include <array>
#include <cstddef>

namespace codonsoup {

/// Rates are per-codon (bitflip, recode), per 8-codon site (xchg) or per replication
/// (translocate, hgt) Bernoulli probabilities.
struct MutationConfig {
    double bitflip_rate = 0.0;
    double xchg_rate = 0.0;
    double translocate_rate = 0.0;
    double recode_rate = 0.0;
    double hgt_rate = 0.0;
    std::size_t max_insert = 16;
    std::size_t max_block = 64;

    bool any() const noexcept
    {
        return bitflip_rate > 0 || xchg_rate > 0 || translocate_rate > 0 || recode_rate > 0 || hgt_rate > 0;
    }

    /// Throws ConfigError when a rate leaves [0, 1] or a size exceeds `genome_length`.
    void validate(std::size_t genome_length) const;

    friend bool operator==(const MutationConfig&, const MutationConfig&) = default;
};

/// The 32 NOP-pattern codons in ascending order.
const std::array<Codon, 32>& nop_pattern_codons() noexcept;

/// P(at least one codon hit) = 1 - (1 - rate)^length.
double p_at_least_one(double rate, std::size_t length) noexcept;

/// Each codon, with probability `rate`, gets one uniformly chosen bit flipped.
Genome bitflip(Genome g, double rate, Rng& rng);

/// Each 8-aligned site, with probability `rate`, swaps its two dwords.
Genome dword_exchange(Genome g, double rate, Rng& rng);
/// Swaps [site, site+4) with [site+4, site+8). Requires site + 8 <= length.
void exchange_dwords_at(Genome& g, std::size_t site);

/// Moves [P, P+S_b) forward by S_i (anything past the end is lost) and fills [P, P+S_i)
/// with random NOP-pattern codons. P in [0, length), S_i in [1, max_insert] and
/// S_b in [0, max_block] are drawn uniformly.
Genome translocate(Genome g, std::size_t max_insert, std::size_t max_block, Rng& rng);
void translocate_at(Genome& g, std::size_t p, std::size_t insert, std::size_t block, Rng& rng);

/// Each codon, with probability `rate`, becomes a uniformly chosen codon of the same role.
Genome neutral_recode(Genome g, const Alphabet& alpha, double rate, Rng& rng);

/// Overwrites a random stretch of `g` with an equally long random stretch of `donor`;
/// the length is uniform in [1, max(1, min(lengths) / 4)].
Genome gene_transfer(Genome g, const Genome& donor, Rng& rng);
void transfer_segment(Genome& g, const Genome& donor, std::size_t src, std::size_t dst, std::size_t length);

/// The replication pipeline: bitflip, dword_exchange, translocate, neutral_recode,
/// gene_transfer. `donor` may be null, which skips gene transfer.
Genome mutate(Genome child, const MutationConfig& config, const Alphabet& alpha, const Genome* donor, Rng& rng);

} // namespace codonsoup
