#include "codonsoup/mutation.hpp"

#include "codonsoup/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace codonsoup {

namespace {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

// Calls hit(i) for each index in [0, n) selected with probability `rate`.
template <typename F>
void for_each_hit(std::size_t n, double rate, Rng& rng, F&& hit)
{
    if (rate <= 0.0 || n == 0)
        return;
    std::uint64_t i = rng.geometric(rate);
    while (i < n) {
        hit(static_cast<std::size_t>(i));
        const std::uint64_t skip = rng.geometric(rate);
        if (skip == kNever || skip >= n)
            return;
        i += 1 + skip;
    }
}

void check_rate(double r, const char* name)
{
    if (!(r >= 0.0 && r <= 1.0))
        throw Error(Errc::ConfigError, std::string(name) + " must lie in [0, 1]");
}

} // namespace

void MutationConfig::validate(std::size_t genome_length) const
{
    check_rate(bitflip_rate, "bitflip_rate");
    check_rate(xchg_rate, "xchg_rate");
    check_rate(translocate_rate, "translocate_rate");
    check_rate(recode_rate, "recode_rate");
    check_rate(hgt_rate, "hgt_rate");
    if (max_insert < 1)
        throw Error(Errc::ConfigError, "max_insert must be at least 1");
    if (max_insert > genome_length || max_block > genome_length)
        throw Error(Errc::ConfigError, "max_insert and max_block may not exceed the genome length");
}

const std::array<Codon, 32>& nop_pattern_codons() noexcept
{
    static const std::array<Codon, 32> table = [] {
        std::array<Codon, 32> t{};
        std::size_t k = 0;
        for (unsigned c = 0; c < 256; ++c)
            if (is_nop_pattern(static_cast<Codon>(c)))
                t[k++] = static_cast<Codon>(c);
        return t;
    }();
    return table;
}

double p_at_least_one(double rate, std::size_t length) noexcept
{
    if (rate >= 1.0)
        return length > 0 ? 1.0 : 0.0;
    return -std::expm1(static_cast<double>(length) * std::log1p(-rate));
}

Genome bitflip(Genome g, double rate, Rng& rng)
{
    for_each_hit(g.size(), rate, rng,
                 [&](std::size_t i) { g.codons[i] ^= static_cast<Codon>(1u << rng.below(8)); });
    return g;
}

void exchange_dwords_at(Genome& g, std::size_t site)
{
    auto first = g.codons.begin() + static_cast<std::ptrdiff_t>(site);
    std::swap_ranges(first, first + 4, first + 4);
}

Genome dword_exchange(Genome g, double rate, Rng& rng)
{
    for_each_hit(g.size() / 8, rate, rng, [&](std::size_t site) { exchange_dwords_at(g, site * 8); });
    return g;
}

void translocate_at(Genome& g, std::size_t p, std::size_t insert, std::size_t block, Rng& rng)
{
    const std::size_t n = g.size();
    if (p >= n)
        return;
    block = std::min(block, n - p);
    const std::vector<Codon> moved(g.codons.begin() + static_cast<std::ptrdiff_t>(p),
                                   g.codons.begin() + static_cast<std::ptrdiff_t>(p + block));
    for (std::size_t k = 0; k < block && p + insert + k < n; ++k)
        g.codons[p + insert + k] = moved[k];
    const auto& nops = nop_pattern_codons();
    for (std::size_t k = p; k < std::min(n, p + insert); ++k)
        g.codons[k] = nops[rng.below(nops.size())];
}

Genome translocate(Genome g, std::size_t max_insert, std::size_t max_block, Rng& rng)
{
    if (g.empty())
        return g;
    const std::size_t p = rng.below(g.size());
    const std::size_t insert = rng.between(1, std::max<std::size_t>(1, max_insert));
    const std::size_t block = rng.between(0, max_block);
    translocate_at(g, p, insert, block, rng);
    return g;
}

Genome neutral_recode(Genome g, const Alphabet& alpha, double rate, Rng& rng)
{
    for_each_hit(g.size(), rate, rng, [&](std::size_t i) {
        const auto options = alpha.same_role(g.codons[i]);
        g.codons[i] = options[rng.below(options.size())];
    });
    return g;
}

void transfer_segment(Genome& g, const Genome& donor, std::size_t src, std::size_t dst, std::size_t length)
{
    std::copy_n(donor.codons.begin() + static_cast<std::ptrdiff_t>(src), length,
                g.codons.begin() + static_cast<std::ptrdiff_t>(dst));
}

Genome gene_transfer(Genome g, const Genome& donor, Rng& rng)
{
    if (g.empty() || donor.empty())
        return g;
    const std::size_t max_len = std::max<std::size_t>(1, std::min(g.size(), donor.size()) / 4);
    const std::size_t len = rng.between(1, max_len);
    const std::size_t src = rng.below(donor.size() - len + 1);
    const std::size_t dst = rng.below(g.size() - len + 1);
    transfer_segment(g, donor, src, dst, len);
    return g;
}

Genome mutate(Genome child, const MutationConfig& config, const Alphabet& alpha, const Genome* donor, Rng& rng)
{
    child = bitflip(std::move(child), config.bitflip_rate, rng);
    child = dword_exchange(std::move(child), config.xchg_rate, rng);
    if (rng.chance(config.translocate_rate))
        child = translocate(std::move(child), config.max_insert, config.max_block, rng);
    child = neutral_recode(std::move(child), alpha, config.recode_rate, rng);
    if (donor != nullptr && rng.chance(config.hgt_rate))
        child = gene_transfer(std::move(child), *donor, rng);
    return child;
}

} // namespace codonsoup
