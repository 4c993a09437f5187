#include "codonsoup/ecology.hpp"

#include "codonsoup/error.hpp"

#include <algorithm>
#include <cstdio>

namespace codonsoup {

namespace {

std::uint64_t genome_digest(const Genome& g) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL ^ g.data_offset;
    for (Codon c : g.codons)
        h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

} // namespace

void WorldConfig::validate() const
{
    if (capacity < 1)
        throw Error(Errc::ConfigError, "capacity must be at least 1");
    if (slice_steps < 1)
        throw Error(Errc::ConfigError, "slice_steps must be at least 1");
    if (!(unmutated_kill_prob >= 0.0 && unmutated_kill_prob <= 1.0))
        throw Error(Errc::ConfigError, "unmutated_kill_prob must lie in [0, 1]");
    if (vm.max_stack < 1)
        throw Error(Errc::ConfigError, "max_stack must be at least 1");
}

std::string format_tick_csv_row(const TickStats& s)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%llu,%zu,%zu,%zu,%zu,%zu,%zu,%zu,%.4f,%u,%.4f",
                  static_cast<unsigned long long>(s.tick), s.population, s.births, s.deaths_fault, s.deaths_exit,
                  s.deaths_loop, s.deaths_dup, s.deaths_unmut, s.mean_gen, s.max_gen, s.mean_hamming);
    return buf;
}

class World::SliceHost final : public Host {
public:
    SliceHost(World& world, std::size_t self) : world_(world), self_(self) {}

    std::optional<std::vector<Codon>> peer_image(std::uint32_t index) override
    {
        std::uint32_t seen = 0;
        for (std::size_t k = 0; k < world_.organisms_.size(); ++k) {
            const auto& o = world_.organisms_[k];
            if (k == self_ || !o.alive)
                continue;
            if (seen++ == index)
                return o.genome().codons;
        }
        return std::nullopt;
    }

    void on_api_call(const Export& e, std::uint32_t ip) override
    {
        if (world_.observer_ != nullptr)
            world_.observer_->on_api_call(world_.organisms_[self_], e, ip);
    }

private:
    World& world_;
    std::size_t self_;
};

World::World(WorldConfig config, std::vector<Lineage> lineages)
    : config_(std::move(config)), lineages_(std::move(lineages)), rng_(config_.seed)
{
    config_.validate();
    if (lineages_.empty())
        throw Error(Errc::ConfigError, "a world needs at least one lineage");
    std::size_t founders = 0;
    for (const auto& l : lineages_) {
        if (l.ancestor.empty())
            throw Error(Errc::ConfigError, "lineage '" + l.name + "' has an empty ancestor");
        config_.mutation.validate(l.ancestor.size());
        founders += l.founders;
    }
    if (founders == 0 || founders > config_.capacity)
        throw Error(Errc::ConfigError, "founder count must lie in [1, capacity]");
    organisms_.reserve(config_.capacity);
    for (std::uint32_t li = 0; li < lineages_.size(); ++li)
        for (std::size_t k = 0; k < lineages_[li].founders; ++k)
            add_organism(li, lineages_[li].ancestor, next_id_, 0);
}

void World::add_organism(std::uint32_t lineage, Genome genome, std::uint64_t parent_id, std::uint32_t generation)
{
    const std::uint64_t id = next_id_++;
    organisms_.push_back(Organism{
        .id = id,
        .parent_id = parent_id,
        .generation = generation,
        .lineage = lineage,
        .birth_tick = tick_,
        .offspring_count = 0,
        .steps_since_spawn = 0,
        .code = CodeImage(std::move(genome), lineages_[lineage].alphabet),
        .vm = VmState::fresh(config_.vm, derive_seed(config_.seed, id, 0x7ab)),
    });
}

std::uint64_t World::hamming_to_ancestor(const Organism& o) const
{
    if (o.hamming_revision != o.code.revision()) {
        o.hamming = codonsoup::hamming(o.genome(), lineages_[o.lineage].ancestor);
        o.hamming_revision = o.code.revision();
    }
    return o.hamming;
}

void World::kill(Organism& o, DeathCause cause, TickStats& stats)
{
    if (!o.alive)
        return;
    o.alive = false;
    switch (cause) {
    case DeathCause::Fault: ++stats.deaths_fault; break;
    case DeathCause::Exit: ++stats.deaths_exit; break;
    case DeathCause::Loop: ++stats.deaths_loop; break;
    case DeathCause::Duplicate: ++stats.deaths_dup; break;
    case DeathCause::Unmutated: ++stats.deaths_unmut; break;
    }
    if (observer_ != nullptr)
        observer_->on_death(o, cause);
}

bool World::spawn(std::size_t parent_index, const SpawnRequest& request, TickStats& stats)
{
    const std::size_t living = static_cast<std::size_t>(
        std::count_if(organisms_.begin(), organisms_.end(), [](const Organism& o) { return o.alive; }));
    if (living >= config_.capacity) {
        ++stats.spawn_rejected;
        return false;
    }
    const Organism& parent = organisms_[parent_index];
    auto payload = read_range(parent.vm, parent.code, request.address, request.length);
    if (!payload)
        return false;

    const Lineage& lineage = lineages_[parent.lineage];
    const std::size_t length = lineage.ancestor.size();
    const auto& nops = nop_pattern_codons();
    payload->reserve(length);
    while (payload->size() < length)
        payload->push_back(nops[rng_.below(nops.size())]);
    payload->resize(length);
    Genome child(std::move(*payload), std::min(parent.genome().data_offset, length));

    const Genome* donor = nullptr;
    if (config_.mutation.hgt_rate > 0.0 && living > 0) {
        std::size_t pick = rng_.below(living);
        for (const auto& o : organisms_) {
            if (!o.alive)
                continue;
            if (pick-- == 0) {
                donor = &o.genome();
                break;
            }
        }
    }
    child = mutate(std::move(child), config_.mutation, lineage.alphabet, donor, rng_);

    organisms_[parent_index].offspring_count++;
    organisms_[parent_index].steps_since_spawn = 0;
    ++stats.births;

    if (child == organisms_[parent_index].genome() && rng_.chance(config_.unmutated_kill_prob)) {
        // Born and reaped at once; counted as both a birth and a death.
        ++stats.deaths_unmut;
        if (observer_ != nullptr) {
            Organism stillborn{.id = next_id_++,
                               .parent_id = organisms_[parent_index].id,
                               .generation = organisms_[parent_index].generation + 1,
                               .lineage = organisms_[parent_index].lineage,
                               .birth_tick = tick_,
                               .code = CodeImage(std::move(child), lineage.alphabet),
                               .vm = {},
                               .alive = false};
            observer_->on_birth(stillborn, organisms_[parent_index]);
            observer_->on_death(stillborn, DeathCause::Unmutated);
        } else {
            ++next_id_;
        }
        return true;
    }

    const std::uint32_t li = organisms_[parent_index].lineage;
    const std::uint64_t pid = organisms_[parent_index].id;
    const std::uint32_t gen = organisms_[parent_index].generation + 1;
    add_organism(li, std::move(child), pid, gen);
    if (observer_ != nullptr)
        observer_->on_birth(organisms_.back(), organisms_[parent_index]);
    return true;
}

void World::run_organism(std::size_t index, TickStats& stats)
{
    const VirtualOs& os = VirtualOs::standard();
    std::uint64_t remaining = config_.slice_steps;
    while (remaining > 0 && organisms_[index].alive) {
        Organism& o = organisms_[index];
        SliceHost host(*this, index);
        const SliceResult r = run_slice(o.vm, o.code, os, host, remaining);
        remaining -= std::min(r.steps, remaining);
        o.steps_since_spawn += r.steps;
        if (const auto* req = std::get_if<SpawnRequest>(&r.outcome)) {
            const bool accepted = spawn(index, *req, stats);
            finish_spawn(organisms_[index].vm, accepted);
        } else if (std::holds_alternative<Exit>(r.outcome)) {
            kill(o, DeathCause::Exit, stats);
        } else if (std::holds_alternative<Fault>(r.outcome)) {
            kill(o, DeathCause::Fault, stats);
        } else {
            break;
        }
    }
}

void World::duplicate_guard(TickStats& stats)
{
    if (config_.duplicate_cap == 0)
        return;
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
    for (std::size_t i = 0; i < organisms_.size(); ++i)
        if (organisms_[i].alive)
            keyed.emplace_back(genome_digest(organisms_[i].genome()), i);
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t a = 0; a < keyed.size();) {
        std::size_t b = a;
        while (b < keyed.size() && keyed[b].first == keyed[a].first)
            ++b;
        // Within one digest bucket, confirm identity byte for byte; indices ascend with id.
        std::vector<bool> done(b - a, false);
        for (std::size_t i = a; i < b; ++i) {
            if (done[i - a])
                continue;
            std::size_t copies = 0;
            for (std::size_t j = i; j < b; ++j) {
                if (done[j - a] || organisms_[keyed[j].second].genome() != organisms_[keyed[i].second].genome())
                    continue;
                done[j - a] = true;
                if (++copies > config_.duplicate_cap)
                    kill(organisms_[keyed[j].second], DeathCause::Duplicate, stats);
            }
        }
        a = b;
    }
}

void World::fill_summary(TickStats& stats) const
{
    stats.population = organisms_.size();
    stats.population_by_lineage.assign(lineages_.size(), 0);
    if (organisms_.empty())
        return;
    double gen_sum = 0.0;
    double ham_sum = 0.0;
    for (const auto& o : organisms_) {
        gen_sum += o.generation;
        stats.max_gen = std::max(stats.max_gen, o.generation);
        ham_sum += static_cast<double>(hamming_to_ancestor(o));
        ++stats.population_by_lineage[o.lineage];
    }
    const auto n = static_cast<double>(organisms_.size());
    stats.mean_gen = gen_sum / n;
    stats.mean_hamming = ham_sum / n;
}

TickStats World::tick()
{
    TickStats stats;
    stats.tick = ++tick_;
    const std::size_t scheduled = organisms_.size();
    for (std::size_t i = 0; i < scheduled; ++i)
        if (organisms_[i].alive)
            run_organism(i, stats);

    if (config_.lifetime_budget > 0)
        for (auto& o : organisms_)
            if (o.alive && o.steps_since_spawn > config_.lifetime_budget)
                kill(o, DeathCause::Loop, stats);
    duplicate_guard(stats);

    std::erase_if(organisms_, [](const Organism& o) { return !o.alive; });
    fill_summary(stats);
    return stats;
}

void World::run(std::uint64_t ticks, const std::function<void(const TickStats&)>& on_tick)
{
    for (std::uint64_t t = 0; t < ticks && !extinct(); ++t) {
        const TickStats s = tick();
        if (on_tick)
            on_tick(s);
    }
}

} // namespace codonsoup
