#pragma once

#include "codonsoup/genome.hpp"
#include "codonsoup/virtual_os.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace codonsoup {

struct Registers {
    std::uint32_t reg_a = 0;
    std::uint32_t reg_b = 0;
    std::uint32_t reg_d = 0;
    std::uint32_t bc1 = 0; // operation register
    std::uint32_t bc2 = 0; // argument register
    std::uint32_t ba1 = 0; // write address
    std::uint32_t ba2 = 0; // jump address

    friend bool operator==(const Registers&, const Registers&) = default;
};

/// An organism's genome as the VM sees it: raw codons plus their spliced translation.
/// Writes into the image re-splice the affected run, so self-modification is visible on
/// the next fetch.
class CodeImage {
public:
    CodeImage(Genome genome, const Alphabet& alpha);

    const Genome& genome() const noexcept { return genome_; }
    const Alphabet& alphabet() const noexcept { return *alpha_; }
    std::size_t size() const noexcept { return genome_.size(); }

    Op op_at(std::size_t index) const noexcept { return ops_[index]; }
    bool in_intron(std::size_t index) const noexcept { return masks_[index] == SpliceMask::Intron; }
    std::span<const Op> ops() const noexcept { return ops_; }

    void write(std::size_t index, std::span<const Codon> bytes);

    /// Incremented on every write.
    std::uint64_t revision() const noexcept { return revision_; }

private:
    Genome genome_;
    const Alphabet* alpha_;
    std::vector<Op> ops_;
    std::vector<SpliceMask> masks_;
    std::uint64_t revision_ = 0;
};

struct VmConfig {
    std::size_t max_stack = 256;
    std::uint32_t heap_limit = 1u << 20;

    friend bool operator==(const VmConfig&, const VmConfig&) = default;
};

struct VmState {
    Registers regs;
    std::uint32_t ip = 0;
    bool zf = false;
    std::vector<std::uint32_t> stack;
    std::size_t max_stack = 256;
    std::vector<std::uint8_t> heap;
    std::uint32_t heap_limit = 1u << 20;
    std::array<std::vector<Codon>, layout::kPeerWindows> peers;
    std::uint32_t next_peer_slot = 0;
    std::uint64_t steps_executed = 0;
    std::uint64_t rand_seed = 0;
    std::uint64_t rand_counter = 0;

    static VmState fresh(const VmConfig& config, std::uint64_t rand_seed);

    friend bool operator==(const VmState&, const VmState&) = default;
};

enum class RegionKind : std::uint8_t { Code, Data, Heap, ApiStub, PeerCode };

struct Region {
    std::uint32_t base = 0;
    std::uint32_t length = 0;
    RegionKind kind = RegionKind::Code;
    bool writable = false;
};

/// The mapped regions, in address order.
std::vector<Region> memory_map(const VmState& state, const CodeImage& code, const VirtualOs& os);

enum class FaultKind : std::uint8_t { DivZero, BadMemory, StackOverflow, StackUnderflow, BadCall, StepBudget };

std::string_view to_string(FaultKind kind) noexcept;

struct Continue {
    friend bool operator==(Continue, Continue) = default;
};
struct Exit {
    friend bool operator==(Exit, Exit) = default;
};
struct Fault {
    FaultKind kind;
    friend bool operator==(Fault, Fault) = default;
};
struct SpawnRequest {
    std::uint32_t address;
    std::uint32_t length;
    friend bool operator==(SpawnRequest, SpawnRequest) = default;
};

using StepOutcome = std::variant<Continue, Exit, Fault, SpawnRequest>;

/// World-side services the VM needs while running one organism.
class Host {
public:
    virtual ~Host() = default;

    /// Copy of the image of the index-th other organism, if any.
    virtual std::optional<std::vector<Codon>> peer_image(std::uint32_t index);

    /// Called for every successful call into an export stub.
    virtual void on_api_call(const Export& e, std::uint32_t ip);
};

/// Host with no peers and no observers.
Host& null_host();

/// Executes the instruction at ip. A SpawnRequest leaves ip on the next instruction;
/// the caller reports the verdict with `finish_spawn`.
StepOutcome step(VmState& state, CodeImage& code, const VirtualOs& os, Host& host);

void finish_spawn(VmState& state, bool accepted) noexcept;

struct SliceResult {
    StepOutcome outcome;
    std::uint64_t steps = 0;
};

/// Steps until something other than Continue happens or `max_steps` instructions ran.
/// When `trace` is set, writes `step,ip,instr,bc1,bc2,zf` per executed instruction.
SliceResult run_slice(VmState& state, CodeImage& code, const VirtualOs& os, Host& host, std::uint64_t max_steps,
                      std::ostream* trace = nullptr);

inline constexpr std::string_view kTraceHeader = "step,ip,instr,bc1,bc2,zf";

/// Bytes at [address, address + length) if the range lies inside one readable region.
std::optional<std::vector<Codon>> read_range(const VmState& state, const CodeImage& code, std::uint32_t address,
                                             std::uint32_t length);

std::optional<std::uint32_t> read_dword(const VmState& state, const CodeImage& code, std::uint32_t address);

} // namespace codonsoup
