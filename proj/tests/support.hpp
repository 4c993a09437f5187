#pragma once

#include "codonsoup/alphabet.hpp"
#include "codonsoup/genome.hpp"
#include "codonsoup/isa.hpp"
#include "codonsoup/rng.hpp"
#include "codonsoup/virtual_os.hpp"
#include "codonsoup/vm.hpp"

#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace codonsoup::test {

/// One codon per op, always the first codon the alphabet offers for it.
inline Genome program(std::span<const Op> ops, const Alphabet& alpha)
{
    std::vector<Codon> codons;
    codons.reserve(ops.size());
    for (Op op : ops)
        codons.push_back(alpha.codons_for(op).front());
    return Genome(std::move(codons));
}

/// Runs `ops` from `start` until ip leaves the program. nullopt on any non-Continue step.
inline std::optional<VmState> execute(std::span<const Op> ops, VmState start, const Alphabet& alpha,
                                      const VirtualOs& os = VirtualOs::standard())
{
    CodeImage code(program(ops, alpha), alpha);
    start.ip = 0;
    while (start.ip < code.size()) {
        if (!std::holds_alternative<Continue>(step(start, code, os, null_host())))
            return std::nullopt;
    }
    return start;
}

inline VmState random_state(Rng& rng, std::size_t stack_depth)
{
    VmState s = VmState::fresh(VmConfig{}, rng.next());
    auto& r = s.regs;
    for (std::uint32_t* v : {&r.reg_a, &r.reg_b, &r.reg_d, &r.bc1, &r.bc2, &r.ba1, &r.ba2})
        *v = rng.next32();
    s.zf = rng.chance(0.5);
    for (std::size_t i = 0; i < stack_depth; ++i)
        s.stack.push_back(rng.next32());
    return s;
}

/// A raw codon string drawn uniformly, with the data section at the end.
inline Genome random_genome(std::size_t length, Rng& rng)
{
    std::vector<Codon> codons(length);
    for (auto& c : codons)
        c = static_cast<Codon>(rng.below(256));
    return Genome(std::move(codons));
}

} // namespace codonsoup::test
