#include "codonsoup/isa.hpp"

#include "codonsoup/error.hpp"

#include <algorithm>
#include <sstream>

namespace codonsoup {

namespace {

using L = Loc;

constexpr Effects fx(LocSet reads, LocSet writes, bool stack = false, bool memory = false, bool flow = false)
{
    return Effects{reads, writes, stack, memory, flow};
}

constexpr LocSet kArith{L::BC1, L::ZF};

constexpr std::array<Instruction, kInstructionCount> kTable{{
    {Op::NopReal, "nopREAL", fx({}, {})},
    {Op::NopsA, "nopsA", fx({L::RegA}, {L::BC1})},
    {Op::NopsB, "nopsB", fx({L::RegB}, {L::BC1})},
    {Op::NopsD, "nopsD", fx({L::RegD}, {L::BC1})},
    {Op::NopdA, "nopdA", fx({L::BC1}, {L::RegA})},
    {Op::NopdB, "nopdB", fx({L::BC1}, {L::RegB})},
    {Op::NopdD, "nopdD", fx({L::BC1}, {L::RegD})},
    {Op::Save, "save", fx({L::BC1}, {L::BC2})},
    {Op::AddSaved, "addsaved", fx({L::BC1, L::BC2}, kArith)},
    {Op::SubSaved, "subsaved", fx({L::BC1, L::BC2}, kArith)},
    {Op::SaveWrtOff, "saveWrtOff", fx({L::BC1}, {L::BA1})},
    {Op::SaveJmpOff, "saveJmpOff", fx({L::BC1}, {L::BA2})},
    {Op::WriteByte, "writeByte", fx({L::BC1, L::BA1}, {L::Mem}, false, true)},
    {Op::WriteDWord, "writeDWord", fx({L::BC1, L::BA1}, {L::Mem}, false, true)},
    {Op::GetDO, "getDO", fx({}, {L::BC1})},
    {Op::GetData, "getdata", fx({L::BC1, L::Mem}, {L::BC1}, false, true)},
    {Op::GetEIP, "getEIP", fx({L::IP}, {L::BC1})},
    {Op::Push, "push", fx({L::BC1, L::Stack}, {L::Stack}, true)},
    {Op::Pop, "pop", fx({L::Stack}, {L::BC1, L::Stack}, true)},
    {Op::PushAll, "pushall", fx(LocSet{L::RegA, L::RegB, L::RegD, L::BC1, L::BC2, L::BA1, L::BA2, L::Stack}, {L::Stack}, true)},
    {Op::PopAll, "popall", fx({L::Stack}, LocSet{L::RegA, L::RegB, L::RegD, L::BC1, L::BC2, L::BA1, L::BA2, L::Stack}, true)},
    {Op::Zer0, "zer0", fx({}, {L::BC1})},
    {Op::Add0001, "add0001", fx({L::BC1}, kArith)},
    {Op::Add0004, "add0004", fx({L::BC1}, kArith)},
    {Op::Add0010, "add0010", fx({L::BC1}, kArith)},
    {Op::Add0040, "add0040", fx({L::BC1}, kArith)},
    {Op::Add0100, "add0100", fx({L::BC1}, kArith)},
    {Op::Add0400, "add0400", fx({L::BC1}, kArith)},
    {Op::Add1000, "add1000", fx({L::BC1}, kArith)},
    {Op::Add4000, "add4000", fx({L::BC1}, kArith)},
    {Op::Sub0001, "sub0001", fx({L::BC1}, kArith)},
    {Op::Shl, "shl", fx({L::BC1, L::BC2}, kArith)},
    {Op::Shr, "shr", fx({L::BC1, L::BC2}, kArith)},
    {Op::Xor, "xor", fx({L::BC1, L::BC2}, kArith)},
    {Op::And, "and", fx({L::BC1, L::BC2}, kArith)},
    {Op::Mul, "mul", fx({L::RegA, L::BC1}, {L::RegA, L::RegD})},
    {Op::Div, "div", fx({L::RegA, L::RegD, L::BC1}, {L::RegA, L::RegD})},
    {Op::JnzUp, "JnzUp", fx({L::ZF, L::BA2}, {L::IP}, false, false, true)},
    {Op::JnzDown, "JnzDown", fx({L::ZF}, {}, false, false, true)},
    {Op::Call, "call", fx({L::BC1, L::Stack}, {L::IP, L::Stack, L::RegA}, true, false, true)},
    {Op::CallAPILoadLibrary, "CallAPILoadLibrary", fx({L::BC1}, {L::BC1})},
}};

constexpr bool table_is_ordered()
{
    for (std::size_t i = 0; i < kTable.size(); ++i)
        if (index_of(kTable[i].op) != i)
            return false;
    return true;
}
static_assert(table_is_ordered());

bool is_dangerous(Op op)
{
    switch (op) {
    case Op::Push:
    case Op::Pop:
    case Op::PushAll:
    case Op::PopAll:
    case Op::CallAPILoadLibrary:
    case Op::JnzDown:
    case Op::JnzUp:
    case Op::Call:
    case Op::SaveJmpOff:
    case Op::SaveWrtOff:
    case Op::WriteByte:
    case Op::WriteDWord:
    case Op::GetData:
        return true;
    default:
        return false;
    }
}

constexpr std::array<std::pair<Op, unsigned>, 7> kAddPowers{{
    {Op::Add0004, 2},
    {Op::Add0010, 4},
    {Op::Add0040, 6},
    {Op::Add0100, 8},
    {Op::Add0400, 10},
    {Op::Add1000, 12},
    {Op::Add4000, 14},
}};

// BC1 += 1 << shift, built from add0001/shl; stack depth is restored and only BC2 is clobbered.
std::vector<Op> shifted_add(unsigned shift)
{
    std::vector<Op> seq{Op::Push, Op::Zer0, Op::Add0001, Op::Push, Op::Zer0};
    seq.insert(seq.end(), shift, Op::Add0001);
    seq.insert(seq.end(), {Op::Save, Op::Pop, Op::Shl, Op::Save, Op::Pop, Op::AddSaved});
    return seq;
}

void expand_into(Op op, const LoweringTable& table, std::vector<Op>& out, std::vector<Op>& stack)
{
    if (table.active.contains(op)) {
        out.push_back(op);
        return;
    }
    auto it = table.replacements.find(op);
    if (it == table.replacements.end())
        throw Error(Errc::MissingLowering, std::string(mnemonic(op)) + " is not active and has no replacement");
    if (std::find(stack.begin(), stack.end(), op) != stack.end())
        throw Error(Errc::LoweringCycle, std::string(mnemonic(op)) + " lowers into itself");
    stack.push_back(op);
    for (Op r : it->second)
        expand_into(r, table, out, stack);
    stack.pop_back();
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

Op expect_mnemonic(const std::string& word, std::size_t line)
{
    auto op = parse_mnemonic(word);
    if (!op)
        throw Error(Errc::UnknownMnemonic, "line " + std::to_string(line) + ": '" + word + "'");
    return *op;
}

} // namespace

std::string to_string(LocSet set)
{
    static constexpr std::array<std::pair<Loc, std::string_view>, 11> names{{
        {L::RegA, "RegA"},
        {L::RegB, "RegB"},
        {L::RegD, "RegD"},
        {L::BC1, "BC1"},
        {L::BC2, "BC2"},
        {L::BA1, "BA1"},
        {L::BA2, "BA2"},
        {L::IP, "IP"},
        {L::ZF, "ZF"},
        {L::Stack, "STACK"},
        {L::Mem, "MEM"},
    }};
    std::string out;
    for (auto [loc, name] : names) {
        if (!set.contains(loc))
            continue;
        if (!out.empty())
            out += ' ';
        out += name;
    }
    return out;
}

std::string_view to_string(DangerCategory c) noexcept
{
    switch (c) {
    case DangerCategory::Dangerous:
        return "dangerous";
    case DangerCategory::SemiHarmless:
        return "semi-harmless";
    case DangerCategory::Harmless:
        return "harmless";
    case DangerCategory::AddFamily:
        return "add-family";
    }
    return "?";
}

std::span<const Instruction, kInstructionCount> instruction_table() noexcept { return kTable; }

const Instruction& instruction(Op op) noexcept { return kTable[index_of(op)]; }

std::string_view mnemonic(Op op) noexcept { return kTable[index_of(op)].mnemonic; }

std::optional<Op> parse_mnemonic(std::string_view text) noexcept
{
    for (const auto& ins : kTable)
        if (ins.mnemonic == text)
            return ins.op;
    return std::nullopt;
}

const Effects& effect_descriptor(Op op) noexcept { return kTable[index_of(op)].effects; }

DangerCategory category(Op op) noexcept
{
    if (is_dangerous(op))
        return DangerCategory::Dangerous;
    if (effect_descriptor(op).writes.intersects(LocSet{L::RegA, L::RegB, L::RegD, L::BC2}))
        return DangerCategory::SemiHarmless;
    if ((op >= Op::Add0001 && op <= Op::Add4000) || op == Op::Sub0001)
        return DangerCategory::AddFamily;
    return DangerCategory::Harmless;
}

std::vector<Op> InstructionSet::ops() const
{
    std::vector<Op> out;
    for (std::size_t i = 0; i < kInstructionCount; ++i)
        if (bits_.test(i))
            out.push_back(op_at(i));
    return out;
}

std::vector<Op> lower(Op op, const LoweringTable& table)
{
    std::vector<Op> out;
    std::vector<Op> stack;
    expand_into(op, table, out, stack);
    return out;
}

std::vector<Op> lower(std::span<const Op> ops, const LoweringTable& table)
{
    std::vector<Op> out;
    std::vector<Op> stack;
    for (Op op : ops)
        expand_into(op, table, out, stack);
    return out;
}

LoweringTable default_lowering_table(InstructionSet active)
{
    LoweringTable t;
    t.active = active;
    auto& r = t.replacements;

    r[Op::Zer0] = {Op::Save, Op::Xor};
    // BC1 + ~BC2 + 1
    r[Op::SubSaved] = {Op::Push, Op::Zer0, Op::Sub0001, Op::Xor, Op::Add0001, Op::Save, Op::Pop, Op::AddSaved};
    r[Op::AddSaved] = {Op::Push, Op::Zer0, Op::SubSaved, Op::Save, Op::Pop, Op::SubSaved};
    // 0 - ~BC1; stays off the stack
    r[Op::Add0001] = {Op::Save, Op::Zer0, Op::Sub0001, Op::Xor, Op::Save, Op::Zer0, Op::SubSaved};

    const bool unit_add = active.contains(Op::Add0001);
    for (auto [op, shift] : kAddPowers) {
        const std::size_t repeats = std::size_t{1} << shift;
        auto composed = shifted_add(shift);
        if (unit_add && repeats <= composed.size())
            r[op] = std::vector<Op>(repeats, Op::Add0001);
        else
            r[op] = std::move(composed);
    }
    return t;
}

std::vector<NamedInstructionSet> standard_ablations()
{
    auto without = [](std::initializer_list<Op> removed) {
        auto s = InstructionSet::full();
        for (Op op : removed)
            s.erase(op);
        return s;
    };
    return {
        {"full", InstructionSet::full()},
        {"no-zer0", without({Op::Zer0})},
        {"no-subsaved", without({Op::SubSaved})},
        {"no-addNNNN", without({Op::Add0004, Op::Add0010, Op::Add0040, Op::Add0100, Op::Add0400, Op::Add1000, Op::Add4000})},
        {"no-addsaved", without({Op::AddSaved})},
        {"no-add0001", without({Op::Add0001})},
    };
}

std::string format_lowering_table(const LoweringTable& table)
{
    std::ostringstream out;
    out << "ACTIVE";
    for (Op op : table.active.ops())
        out << ' ' << mnemonic(op);
    out << '\n';
    for (const auto& [op, seq] : table.replacements) {
        out << "LOWER " << mnemonic(op) << " =";
        for (Op s : seq)
            out << ' ' << mnemonic(s);
        out << '\n';
    }
    return out.str();
}

LoweringTable parse_lowering_table(std::string_view text)
{
    std::optional<InstructionSet> active;
    std::vector<Op> removed;
    std::map<Op, std::vector<Op>> overrides;

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = trim(raw.substr(0, raw.find('#')));
        if (line.empty())
            continue;
        std::istringstream words(line);
        std::string keyword;
        words >> keyword;
        if (keyword == "ACTIVE") {
            InstructionSet s;
            for (std::string w; words >> w;)
                s.insert(expect_mnemonic(w, line_no));
            active = s;
        } else if (keyword == "REMOVE") {
            for (std::string w; words >> w;)
                removed.push_back(expect_mnemonic(w, line_no));
        } else if (keyword == "LOWER") {
            std::string name, eq;
            words >> name >> eq;
            if (eq != "=")
                throw Error(Errc::BadFormat, "line " + std::to_string(line_no) + ": expected 'LOWER <mnemonic> = ...'");
            const Op op = expect_mnemonic(name, line_no);
            std::vector<Op> seq;
            for (std::string w; words >> w;)
                seq.push_back(expect_mnemonic(w, line_no));
            overrides[op] = std::move(seq);
        } else {
            throw Error(Errc::BadFormat, "line " + std::to_string(line_no) + ": unknown keyword '" + keyword + "'");
        }
    }

    InstructionSet set = active.value_or(InstructionSet::full());
    for (Op op : removed)
        set.erase(op);
    LoweringTable table = default_lowering_table(set);
    for (auto& [op, seq] : overrides)
        table.replacements[op] = std::move(seq);
    return table;
}

} // namespace codonsoup
