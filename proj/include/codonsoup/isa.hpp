#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace codonsoup {

/// The executable meta-language operations, in table order.
enum class Op : std::uint8_t {
    NopReal,
    NopsA,
    NopsB,
    NopsD,
    NopdA,
    NopdB,
    NopdD,
    Save,
    AddSaved,
    SubSaved,
    SaveWrtOff,
    SaveJmpOff,
    WriteByte,
    WriteDWord,
    GetDO,
    GetData,
    GetEIP,
    Push,
    Pop,
    PushAll,
    PopAll,
    Zer0,
    Add0001,
    Add0004,
    Add0010,
    Add0040,
    Add0100,
    Add0400,
    Add1000,
    Add4000,
    Sub0001,
    Shl,
    Shr,
    Xor,
    And,
    Mul,
    Div,
    JnzUp,
    JnzDown,
    Call,
    CallAPILoadLibrary,
};

inline constexpr std::size_t kInstructionCount = 41;
/// Executable instructions plus the START and STOP alphabet roles.
inline constexpr std::size_t kAlphabetRoleEntries = kInstructionCount + 2;

constexpr std::size_t index_of(Op op) noexcept { return static_cast<std::size_t>(op); }
constexpr Op op_at(std::size_t index) noexcept { return static_cast<Op>(index); }

/// Architectural locations an instruction may read or write.
enum class Loc : std::uint16_t {
    RegA = 1u << 0,
    RegB = 1u << 1,
    RegD = 1u << 2,
    BC1 = 1u << 3,
    BC2 = 1u << 4,
    BA1 = 1u << 5,
    BA2 = 1u << 6,
    IP = 1u << 7,
    ZF = 1u << 8,
    Stack = 1u << 9,
    Mem = 1u << 10,
};

class LocSet {
public:
    constexpr LocSet() = default;
    constexpr LocSet(std::initializer_list<Loc> locs)
    {
        for (Loc l : locs)
            bits_ |= static_cast<std::uint16_t>(l);
    }

    constexpr bool contains(Loc l) const noexcept { return (bits_ & static_cast<std::uint16_t>(l)) != 0; }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    constexpr bool intersects(LocSet other) const noexcept { return (bits_ & other.bits_) != 0; }
    constexpr std::uint16_t bits() const noexcept { return bits_; }

    friend constexpr bool operator==(LocSet, LocSet) = default;

private:
    std::uint16_t bits_ = 0;
};

std::string to_string(LocSet set);

struct Effects {
    LocSet reads;
    LocSet writes;
    bool touches_stack = false;
    bool touches_memory = false;
    bool affects_flow = false;
};

struct Instruction {
    Op op;
    std::string_view mnemonic;
    Effects effects;
};

enum class DangerCategory : std::uint8_t { Dangerous, SemiHarmless, Harmless, AddFamily };

std::string_view to_string(DangerCategory c) noexcept;

std::span<const Instruction, kInstructionCount> instruction_table() noexcept;
const Instruction& instruction(Op op) noexcept;
std::string_view mnemonic(Op op) noexcept;
std::optional<Op> parse_mnemonic(std::string_view text) noexcept;

const Effects& effect_descriptor(Op op) noexcept;
DangerCategory category(Op op) noexcept;

/// Harmless in the broad sense: only BC1 (and flags) change. Includes AddFamily.
constexpr bool is_harmless(DangerCategory c) noexcept
{
    return c == DangerCategory::Harmless || c == DangerCategory::AddFamily;
}

/// A subset of the 41 instructions.
class InstructionSet {
public:
    InstructionSet() = default;
    InstructionSet(std::initializer_list<Op> ops)
    {
        for (Op op : ops)
            insert(op);
    }

    static InstructionSet full()
    {
        InstructionSet s;
        s.bits_.set();
        return s;
    }

    bool contains(Op op) const { return bits_.test(index_of(op)); }
    void insert(Op op) { bits_.set(index_of(op)); }
    void erase(Op op) { bits_.reset(index_of(op)); }
    std::size_t size() const { return bits_.count(); }
    bool empty() const { return bits_.none(); }
    std::vector<Op> ops() const;

    friend bool operator==(const InstructionSet&, const InstructionSet&) = default;

private:
    std::bitset<kInstructionCount> bits_;
};

/// Replacement sequences for instructions removed from an active set.
struct LoweringTable {
    InstructionSet active = InstructionSet::full();
    std::map<Op, std::vector<Op>> replacements;

    friend bool operator==(const LoweringTable&, const LoweringTable&) = default;
};

/// Expands `op` into instructions of `table.active`. Replacement sequences are
/// expanded recursively. Throws MissingLowering or LoweringCycle.
std::vector<Op> lower(Op op, const LoweringTable& table);
std::vector<Op> lower(std::span<const Op> ops, const LoweringTable& table);

/// The shipped replacements for zer0, subsaved, addsaved, add0001 and the
/// add0004..add4000 family, tuned to what `active` still contains.
LoweringTable default_lowering_table(InstructionSet active = InstructionSet::full());

/// The instruction-set ablations plotted against the full set.
struct NamedInstructionSet {
    std::string name;
    InstructionSet active;
};
std::vector<NamedInstructionSet> standard_ablations();

/// Line format: `ACTIVE m1 m2 ...`, `REMOVE m`, `LOWER m = m1 m2 ...`, `#` comments.
std::string format_lowering_table(const LoweringTable& table);
LoweringTable parse_lowering_table(std::string_view text);

} // namespace codonsoup
