#include "codonsoup/binary_io.hpp"
#include "codonsoup/ecology.hpp"
#include "codonsoup/error.hpp"

#include <cstring>

namespace codonsoup {

namespace {

constexpr char kSnapshotMagic[8] = {'C', 'S', 'O', 'U', 'P', 'S', 'N', 'P'};

void put_genome(ByteWriter& w, const Genome& g)
{
    w.u64(g.data_offset);
    w.bytes(g.codons);
}

Genome get_genome(ByteReader& r)
{
    const auto offset = r.u64();
    auto codons = r.bytes();
    if (offset > codons.size())
        throw Error(Errc::CorruptSnapshot, "data offset beyond genome end");
    return Genome(std::move(codons), static_cast<std::size_t>(offset));
}

void put_config(ByteWriter& w, const WorldConfig& c)
{
    w.u64(c.capacity);
    w.u64(c.slice_steps);
    w.u64(c.lifetime_budget);
    w.u64(c.duplicate_cap);
    w.f64(c.unmutated_kill_prob);
    const auto& m = c.mutation;
    w.f64(m.bitflip_rate);
    w.f64(m.xchg_rate);
    w.f64(m.translocate_rate);
    w.f64(m.recode_rate);
    w.f64(m.hgt_rate);
    w.u64(m.max_insert);
    w.u64(m.max_block);
    w.u64(c.vm.max_stack);
    w.u32(c.vm.heap_limit);
    w.u64(c.seed);
}

WorldConfig get_config(ByteReader& r)
{
    WorldConfig c;
    c.capacity = r.u64();
    c.slice_steps = r.u64();
    c.lifetime_budget = r.u64();
    c.duplicate_cap = r.u64();
    c.unmutated_kill_prob = r.f64();
    auto& m = c.mutation;
    m.bitflip_rate = r.f64();
    m.xchg_rate = r.f64();
    m.translocate_rate = r.f64();
    m.recode_rate = r.f64();
    m.hgt_rate = r.f64();
    m.max_insert = r.u64();
    m.max_block = r.u64();
    c.vm.max_stack = r.u64();
    c.vm.heap_limit = r.u32();
    c.seed = r.u64();
    return c;
}

void put_vm(ByteWriter& w, const VmState& s)
{
    for (std::uint32_t v : {s.regs.reg_a, s.regs.reg_b, s.regs.reg_d, s.regs.bc1, s.regs.bc2, s.regs.ba1, s.regs.ba2})
        w.u32(v);
    w.u32(s.ip);
    w.u8(s.zf ? 1 : 0);
    w.u64(s.stack.size());
    for (std::uint32_t v : s.stack)
        w.u32(v);
    w.u64(s.max_stack);
    w.bytes(s.heap);
    w.u32(s.heap_limit);
    for (const auto& p : s.peers)
        w.bytes(p);
    w.u32(s.next_peer_slot);
    w.u64(s.steps_executed);
    w.u64(s.rand_seed);
    w.u64(s.rand_counter);
}

VmState get_vm(ByteReader& r)
{
    VmState s;
    for (std::uint32_t* v : {&s.regs.reg_a, &s.regs.reg_b, &s.regs.reg_d, &s.regs.bc1, &s.regs.bc2, &s.regs.ba1,
                             &s.regs.ba2})
        *v = r.u32();
    s.ip = r.u32();
    const auto zf = r.u8();
    if (zf > 1)
        throw Error(Errc::CorruptSnapshot, "bad flag byte");
    s.zf = zf == 1;
    const auto depth = r.u64();
    if (depth > r.remaining() / 4)
        throw Error(Errc::CorruptSnapshot, "stack depth exceeds input");
    s.stack.resize(static_cast<std::size_t>(depth));
    for (auto& v : s.stack)
        v = r.u32();
    s.max_stack = r.u64();
    if (s.stack.size() > s.max_stack)
        throw Error(Errc::CorruptSnapshot, "stack deeper than its limit");
    s.heap = r.bytes();
    s.heap_limit = r.u32();
    for (auto& p : s.peers)
        p = r.bytes();
    s.next_peer_slot = r.u32();
    if (s.next_peer_slot >= layout::kPeerWindows)
        throw Error(Errc::CorruptSnapshot, "bad peer slot");
    s.steps_executed = r.u64();
    s.rand_seed = r.u64();
    s.rand_counter = r.u64();
    return s;
}

} // namespace

std::string World::snapshot() const
{
    ByteWriter w;
    w.raw({reinterpret_cast<const std::uint8_t*>(kSnapshotMagic), sizeof kSnapshotMagic});
    w.u32(kSnapshotVersion);
    put_config(w, config_);
    w.u64(lineages_.size());
    for (const auto& l : lineages_) {
        w.str(l.name);
        w.str(format_alphabet(l.alphabet));
        put_genome(w, l.ancestor);
        w.u64(l.founders);
    }
    w.str(rng_.state());
    w.u64(next_id_);
    w.u64(tick_);
    w.u64(organisms_.size());
    for (const auto& o : organisms_) {
        w.u64(o.id);
        w.u64(o.parent_id);
        w.u32(o.generation);
        w.u32(o.lineage);
        w.u64(o.birth_tick);
        w.u32(o.offspring_count);
        w.u64(o.steps_since_spawn);
        put_genome(w, o.genome());
        put_vm(w, o.vm);
    }
    const auto& d = w.data();
    return std::string(d.begin(), d.end());
}

std::unique_ptr<World> World::restore(std::string_view bytes)
{
    ByteReader r({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()}, Errc::CorruptSnapshot);
    const auto magic = r.raw(sizeof kSnapshotMagic);
    if (std::memcmp(magic.data(), kSnapshotMagic, sizeof kSnapshotMagic) != 0)
        throw Error(Errc::CorruptSnapshot, "not a world snapshot");
    const auto version = r.u32();
    if (version != kSnapshotVersion)
        throw Error(Errc::VersionMismatch, "snapshot version " + std::to_string(version));

    try {
        std::unique_ptr<World> w(new World());
        w->config_ = get_config(r);
        w->config_.validate();
        const auto lineage_count = r.u64();
        if (lineage_count == 0 || lineage_count > r.remaining())
            throw Error(Errc::CorruptSnapshot, "bad lineage count");
        for (std::uint64_t i = 0; i < lineage_count; ++i) {
            auto name = r.str();
            auto alpha = parse_alphabet(r.str());
            auto ancestor = get_genome(r);
            const auto founders = r.u64();
            w->lineages_.push_back(Lineage{std::move(name), std::move(alpha), std::move(ancestor),
                                           static_cast<std::size_t>(founders)});
        }
        if (!w->rng_.restore(r.str()))
            throw Error(Errc::CorruptSnapshot, "bad random stream state");
        w->next_id_ = r.u64();
        w->tick_ = r.u64();
        const auto count = r.u64();
        if (count > r.remaining())
            throw Error(Errc::CorruptSnapshot, "bad organism count");
        w->organisms_.reserve(std::max<std::size_t>(w->config_.capacity, static_cast<std::size_t>(count)));
        std::uint64_t last_id = 0;
        for (std::uint64_t i = 0; i < count; ++i) {
            Organism o{.code = CodeImage(Genome{}, w->lineages_.front().alphabet), .vm = {}};
            o.id = r.u64();
            o.parent_id = r.u64();
            o.generation = r.u32();
            o.lineage = r.u32();
            o.birth_tick = r.u64();
            o.offspring_count = r.u32();
            o.steps_since_spawn = r.u64();
            auto genome = get_genome(r);
            if (o.lineage >= w->lineages_.size() || (i > 0 && o.id <= last_id) || o.id >= w->next_id_)
                throw Error(Errc::CorruptSnapshot, "inconsistent organism record");
            last_id = o.id;
            o.code = CodeImage(std::move(genome), w->lineages_[o.lineage].alphabet);
            o.vm = get_vm(r);
            w->organisms_.push_back(std::move(o));
        }
        if (!r.at_end())
            throw Error(Errc::CorruptSnapshot, "trailing bytes");
        return w;
    } catch (const Error& e) {
        if (e.code() == Errc::CorruptSnapshot)
            throw;
        throw Error(Errc::CorruptSnapshot, e.what());
    }
}

} // namespace codonsoup
