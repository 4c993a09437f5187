#include "codonsoup/vm.hpp"

#include <cstdio>
#include <ostream>

namespace codonsoup {

namespace {

using namespace layout;

constexpr std::uint32_t kPushAllCount = 7;
constexpr std::uint32_t kHeapAlign = 4;

std::uint32_t add_amount(Op op) noexcept
{
    switch (op) {
    case Op::Add0001: return 0x0001;
    case Op::Add0004: return 0x0004;
    case Op::Add0010: return 0x0010;
    case Op::Add0040: return 0x0040;
    case Op::Add0100: return 0x0100;
    case Op::Add0400: return 0x0400;
    case Op::Add1000: return 0x1000;
    case Op::Add4000: return 0x4000;
    default: return 0;
    }
}

// Locates [address, address + length) inside a single readable region.
// Returns a pointer to the first byte, or nullptr.
const std::uint8_t* locate(const VmState& s, const CodeImage& code, std::uint32_t address, std::uint32_t length)
{
    const std::uint64_t a = address;
    const std::uint64_t end = a + length;
    const auto& codons = code.genome().codons;
    if (a >= kCodeBase && end <= kCodeBase + static_cast<std::uint64_t>(codons.size()))
        return codons.data() + (a - kCodeBase);
    if (a >= kHeapBase && end <= kHeapBase + static_cast<std::uint64_t>(s.heap.size()))
        return s.heap.data() + (a - kHeapBase);
    if (a >= kPeerBase && a < kPeerBase + static_cast<std::uint64_t>(kPeerStride) * kPeerWindows) {
        const std::uint64_t slot = (a - kPeerBase) / kPeerStride;
        const std::uint64_t offset = (a - kPeerBase) % kPeerStride;
        const auto& window = s.peers[slot];
        if (offset + length <= window.size())
            return window.data() + offset;
    }
    return nullptr;
}

bool write_bytes(VmState& s, CodeImage& code, std::uint32_t address, std::span<const std::uint8_t> bytes)
{
    const std::uint64_t a = address;
    const std::uint64_t end = a + bytes.size();
    if (a >= kCodeBase && end <= kCodeBase + static_cast<std::uint64_t>(code.size())) {
        code.write(static_cast<std::size_t>(a - kCodeBase), bytes);
        return true;
    }
    if (a >= kHeapBase && end <= kHeapBase + static_cast<std::uint64_t>(s.heap.size())) {
        std::copy(bytes.begin(), bytes.end(), s.heap.begin() + static_cast<std::ptrdiff_t>(a - kHeapBase));
        return true;
    }
    return false;
}

bool in_code(std::uint32_t address, const CodeImage& code) noexcept
{
    return address >= kCodeBase && static_cast<std::uint64_t>(address) < kCodeBase + static_cast<std::uint64_t>(code.size());
}

class NullHost final : public Host {};

StepOutcome invoke_api(const Export& e, VmState& s, CodeImage& code, Host& host)
{
    const unsigned n = arity(e.handler);
    if (s.stack.size() < n)
        return Fault{FaultKind::StackUnderflow};
    std::array<std::uint32_t, 2> args{};
    for (unsigned i = 0; i < n; ++i) {
        args[i] = s.stack.back();
        s.stack.pop_back();
    }
    const std::uint32_t call_ip = s.ip;
    ++s.ip;
    host.on_api_call(e, call_ip);

    switch (e.handler) {
    case ApiHandler::Valloc: {
        const std::uint64_t size = (static_cast<std::uint64_t>(args[0]) + kHeapAlign - 1) / kHeapAlign * kHeapAlign;
        if (args[0] == 0 || s.heap.size() + size > s.heap_limit) {
            s.regs.reg_a = 0;
        } else {
            s.regs.reg_a = kHeapBase + static_cast<std::uint32_t>(s.heap.size());
            s.heap.resize(s.heap.size() + size, 0);
        }
        return Continue{};
    }
    case ApiHandler::Vspawn:
        if (args[1] == 0 || locate(s, code, args[0], args[1]) == nullptr)
            return Fault{FaultKind::BadMemory};
        return SpawnRequest{args[0], args[1]};
    case ApiHandler::Vexit:
        return Exit{};
    case ApiHandler::Vrand:
        s.regs.reg_a = static_cast<std::uint32_t>(splitmix64(s.rand_seed + s.rand_counter++));
        return Continue{};
    case ApiHandler::Vpeer: {
        auto image = host.peer_image(args[0]);
        if (!image || image->empty()) {
            s.regs.reg_a = 0;
            return Continue{};
        }
        const std::uint32_t slot = s.next_peer_slot;
        s.next_peer_slot = (slot + 1) % kPeerWindows;
        s.peers[slot] = std::move(*image);
        s.regs.reg_a = kPeerBase + slot * kPeerStride;
        return Continue{};
    }
    case ApiHandler::Decoy:
        return Continue{};
    }
    return Continue{};
}

} // namespace

CodeImage::CodeImage(Genome genome, const Alphabet& alpha)
    : genome_(std::move(genome)), alpha_(&alpha), ops_(genome_.size()), masks_(genome_.size())
{
    SpliceMask mask = SpliceMask::Exon;
    for (std::size_t i = 0; i < genome_.size(); ++i) {
        const auto sc = splice_step(genome_.codons[i], mask, alpha);
        ops_[i] = sc.op;
        masks_[i] = sc.mask;
    }
}

void CodeImage::write(std::size_t index, std::span<const Codon> bytes)
{
    if (bytes.empty())
        return;
    std::copy(bytes.begin(), bytes.end(), genome_.codons.begin() + static_cast<std::ptrdiff_t>(index));
    ++revision_;
    // Re-splice from the first written codon until the mask state rejoins the old one.
    SpliceMask mask = masks_[index];
    const std::size_t written_end = index + bytes.size();
    for (std::size_t k = index; k < genome_.size(); ++k) {
        if (k >= written_end && masks_[k] == mask)
            break;
        const auto sc = splice_step(genome_.codons[k], mask, *alpha_);
        ops_[k] = sc.op;
        masks_[k] = sc.mask;
    }
}

VmState VmState::fresh(const VmConfig& config, std::uint64_t rand_seed)
{
    VmState s;
    s.max_stack = config.max_stack;
    s.heap_limit = config.heap_limit;
    s.rand_seed = rand_seed;
    s.stack.reserve(std::min<std::size_t>(config.max_stack, 64));
    return s;
}

std::vector<Region> memory_map(const VmState& state, const CodeImage& code, const VirtualOs& os)
{
    std::vector<Region> out;
    const auto offset = static_cast<std::uint32_t>(code.genome().data_offset);
    const auto size = static_cast<std::uint32_t>(code.size());
    if (offset > 0)
        out.push_back({kCodeBase, offset, RegionKind::Code, true});
    if (size > offset)
        out.push_back({kCodeBase + offset, size - offset, RegionKind::Data, true});
    if (!state.heap.empty())
        out.push_back({kHeapBase, static_cast<std::uint32_t>(state.heap.size()), RegionKind::Heap, true});
    for (std::uint32_t slot = 0; slot < kPeerWindows; ++slot)
        if (!state.peers[slot].empty())
            out.push_back({kPeerBase + slot * kPeerStride, static_cast<std::uint32_t>(state.peers[slot].size()),
                           RegionKind::PeerCode, false});
    if (!os.exports().empty())
        out.push_back({kStubBase, static_cast<std::uint32_t>(os.exports().size()) * kStubStride, RegionKind::ApiStub,
                       false});
    return out;
}

std::string_view to_string(FaultKind kind) noexcept
{
    switch (kind) {
    case FaultKind::DivZero: return "DivZero";
    case FaultKind::BadMemory: return "BadMemory";
    case FaultKind::StackOverflow: return "StackOverflow";
    case FaultKind::StackUnderflow: return "StackUnderflow";
    case FaultKind::BadCall: return "BadCall";
    case FaultKind::StepBudget: return "StepBudget";
    }
    return "?";
}

std::optional<std::vector<Codon>> Host::peer_image(std::uint32_t)
{
    return std::nullopt;
}

void Host::on_api_call(const Export&, std::uint32_t) {}

Host& null_host()
{
    static NullHost host;
    return host;
}

std::optional<std::vector<Codon>> read_range(const VmState& state, const CodeImage& code, std::uint32_t address,
                                             std::uint32_t length)
{
    const std::uint8_t* p = locate(state, code, address, length);
    if (p == nullptr)
        return std::nullopt;
    return std::vector<Codon>(p, p + length);
}

std::optional<std::uint32_t> read_dword(const VmState& state, const CodeImage& code, std::uint32_t address)
{
    const std::uint8_t* p = locate(state, code, address, 4);
    if (p == nullptr)
        return std::nullopt;
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8
           | static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void finish_spawn(VmState& state, bool accepted) noexcept
{
    state.regs.reg_a = accepted ? 1 : 0;
}

StepOutcome step(VmState& s, CodeImage& code, const VirtualOs& os, Host& host)
{
    if (s.ip >= code.size())
        return Fault{FaultKind::BadMemory};
    auto& r = s.regs;
    const Op op = code.op_at(s.ip);
    ++s.steps_executed;

    const auto arith = [&](std::uint32_t value) {
        r.bc1 = value;
        s.zf = value == 0;
    };

    switch (op) {
    case Op::NopReal:
    case Op::JnzDown:
        break;
    case Op::NopsA: r.bc1 = r.reg_a; break;
    case Op::NopsB: r.bc1 = r.reg_b; break;
    case Op::NopsD: r.bc1 = r.reg_d; break;
    case Op::NopdA: r.reg_a = r.bc1; break;
    case Op::NopdB: r.reg_b = r.bc1; break;
    case Op::NopdD: r.reg_d = r.bc1; break;
    case Op::Save: r.bc2 = r.bc1; break;
    case Op::AddSaved: arith(r.bc1 + r.bc2); break;
    case Op::SubSaved: arith(r.bc1 - r.bc2); break;
    case Op::SaveWrtOff: r.ba1 = r.bc1; break;
    case Op::SaveJmpOff: r.ba2 = r.bc1; break;
    case Op::WriteByte: {
        const std::uint8_t b = static_cast<std::uint8_t>(r.bc1);
        if (!write_bytes(s, code, r.ba1, std::span(&b, 1)))
            return Fault{FaultKind::BadMemory};
        break;
    }
    case Op::WriteDWord: {
        const std::array<std::uint8_t, 4> b{static_cast<std::uint8_t>(r.bc1), static_cast<std::uint8_t>(r.bc1 >> 8),
                                            static_cast<std::uint8_t>(r.bc1 >> 16),
                                            static_cast<std::uint8_t>(r.bc1 >> 24)};
        if (!write_bytes(s, code, r.ba1, b))
            return Fault{FaultKind::BadMemory};
        break;
    }
    case Op::GetDO: r.bc1 = kCodeBase + static_cast<std::uint32_t>(code.genome().data_offset); break;
    case Op::GetData: {
        const auto v = read_dword(s, code, r.bc1);
        if (!v)
            return Fault{FaultKind::BadMemory};
        r.bc1 = *v;
        break;
    }
    case Op::GetEIP: r.bc1 = kCodeBase + s.ip; break;
    case Op::Push:
        if (s.stack.size() >= s.max_stack)
            return Fault{FaultKind::StackOverflow};
        s.stack.push_back(r.bc1);
        break;
    case Op::Pop:
        if (s.stack.empty())
            return Fault{FaultKind::StackUnderflow};
        r.bc1 = s.stack.back();
        s.stack.pop_back();
        break;
    case Op::PushAll:
        if (s.stack.size() + kPushAllCount > s.max_stack)
            return Fault{FaultKind::StackOverflow};
        for (std::uint32_t v : {r.reg_a, r.reg_b, r.reg_d, r.bc1, r.bc2, r.ba1, r.ba2})
            s.stack.push_back(v);
        break;
    case Op::PopAll:
        if (s.stack.size() < kPushAllCount)
            return Fault{FaultKind::StackUnderflow};
        for (std::uint32_t* dst : {&r.ba2, &r.ba1, &r.bc2, &r.bc1, &r.reg_d, &r.reg_b, &r.reg_a}) {
            *dst = s.stack.back();
            s.stack.pop_back();
        }
        break;
    case Op::Zer0: r.bc1 = 0; break;
    case Op::Add0001:
    case Op::Add0004:
    case Op::Add0010:
    case Op::Add0040:
    case Op::Add0100:
    case Op::Add0400:
    case Op::Add1000:
    case Op::Add4000: arith(r.bc1 + add_amount(op)); break;
    case Op::Sub0001: arith(r.bc1 - 1); break;
    case Op::Shl: arith(r.bc1 << (r.bc2 & 31)); break;
    case Op::Shr: arith(r.bc1 >> (r.bc2 & 31)); break;
    case Op::Xor: arith(r.bc1 ^ r.bc2); break;
    case Op::And: arith(r.bc1 & r.bc2); break;
    case Op::Mul: {
        const std::uint64_t p = static_cast<std::uint64_t>(r.reg_a) * r.bc1;
        r.reg_a = static_cast<std::uint32_t>(p);
        r.reg_d = static_cast<std::uint32_t>(p >> 32);
        break;
    }
    case Op::Div: {
        if (r.bc1 == 0)
            return Fault{FaultKind::DivZero};
        const std::uint64_t n = static_cast<std::uint64_t>(r.reg_d) << 32 | r.reg_a;
        const std::uint64_t q = n / r.bc1;
        if (q > 0xFFFF'FFFFull)
            return Fault{FaultKind::DivZero};
        r.reg_a = static_cast<std::uint32_t>(q);
        r.reg_d = static_cast<std::uint32_t>(n % r.bc1);
        break;
    }
    case Op::JnzUp:
        if (!s.zf) {
            if (!in_code(r.ba2, code))
                return Fault{FaultKind::BadCall};
            s.ip = r.ba2 - kCodeBase;
            return Continue{};
        }
        break;
    case Op::Call:
        if (os.in_stub_region(r.bc1)) {
            const Export* e = os.export_at(r.bc1);
            if (e == nullptr)
                return Fault{FaultKind::BadCall};
            return invoke_api(*e, s, code, host);
        }
        if (in_code(r.bc1, code)) {
            if (s.stack.size() >= s.max_stack)
                return Fault{FaultKind::StackOverflow};
            s.stack.push_back(kCodeBase + s.ip + 1);
            s.ip = r.bc1 - kCodeBase;
            return Continue{};
        }
        return Fault{FaultKind::BadCall};
    case Op::CallAPILoadLibrary: r.bc1 = resolve_api(os, r.bc1); break;
    }
    ++s.ip;
    return Continue{};
}

SliceResult run_slice(VmState& state, CodeImage& code, const VirtualOs& os, Host& host, std::uint64_t max_steps,
                      std::ostream* trace)
{
    SliceResult result{Continue{}, 0};
    char line[96];
    while (result.steps < max_steps) {
        const std::uint32_t ip = state.ip;
        const Op op = ip < code.size() ? code.op_at(ip) : Op::NopReal;
        const std::uint64_t before = state.steps_executed;
        result.outcome = step(state, code, os, host);
        if (state.steps_executed != before) {
            ++result.steps;
            if (trace != nullptr) {
                const auto m = mnemonic(op);
                std::snprintf(line, sizeof line, "%llu,%u,%.*s,%u,%u,%d\n",
                              static_cast<unsigned long long>(state.steps_executed), ip, static_cast<int>(m.size()),
                              m.data(), state.regs.bc1, state.regs.bc2, state.zf ? 1 : 0);
                *trace << line;
            }
        }
        if (!std::holds_alternative<Continue>(result.outcome))
            return result;
    }
    return result;
}

} // namespace codonsoup
