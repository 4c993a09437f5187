#pragma once

#include "codonsoup/alphabet.hpp"
#include "codonsoup/genome.hpp"
#include "codonsoup/mutation.hpp"
#include "codonsoup/rng.hpp"
#include "codonsoup/vm.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace codonsoup {

struct WorldConfig {
    std::size_t capacity = 64;
    std::uint64_t slice_steps = 200;
    std::uint64_t lifetime_budget = 5000; // instructions without a successful spawn; 0 disables
    std::size_t duplicate_cap = 0;        // identical living genomes allowed; 0 disables
    double unmutated_kill_prob = 0.0;
    MutationConfig mutation;
    VmConfig vm;
    std::uint64_t seed = 1;

    /// Throws ConfigError.
    void validate() const;

    friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

/// A founding strain: its alphabet, its ancestor genome and how many copies start the run.
/// Children are always fitted to the ancestor's length.
struct Lineage {
    std::string name;
    Alphabet alphabet;
    Genome ancestor;
    std::size_t founders = 1;
};

enum class DeathCause : std::uint8_t { Fault, Exit, Loop, Duplicate, Unmutated };

struct Organism {
    std::uint64_t id = 0;
    std::uint64_t parent_id = 0; // equals id for founders
    std::uint32_t generation = 0;
    std::uint32_t lineage = 0;
    std::uint64_t birth_tick = 0;
    std::uint32_t offspring_count = 0;
    std::uint64_t steps_since_spawn = 0;
    CodeImage code;
    VmState vm;
    bool alive = true;
    mutable std::uint64_t hamming_revision = ~0ull; // code revision `hamming` was computed at
    mutable std::uint64_t hamming = 0;

    const Genome& genome() const noexcept { return code.genome(); }
};

struct TickStats {
    std::uint64_t tick = 0;
    std::size_t population = 0;
    std::size_t births = 0;
    std::size_t deaths_fault = 0;
    std::size_t deaths_exit = 0;
    std::size_t deaths_loop = 0;
    std::size_t deaths_dup = 0;
    std::size_t deaths_unmut = 0;
    std::size_t spawn_rejected = 0;
    double mean_gen = 0.0;
    std::uint32_t max_gen = 0;
    double mean_hamming = 0.0;
    std::vector<std::size_t> population_by_lineage;

    std::size_t deaths() const noexcept
    {
        return deaths_fault + deaths_exit + deaths_loop + deaths_dup + deaths_unmut;
    }
};

inline constexpr std::string_view kTickCsvHeader =
    "tick,population,births,deaths_fault,deaths_exit,deaths_loop,deaths_dup,deaths_unmut,mean_gen,max_gen,"
    "mean_hamming";

std::string format_tick_csv_row(const TickStats& s);

/// Hooks for experiments that need more than the per-tick statistics.
class WorldObserver {
public:
    virtual ~WorldObserver() = default;
    virtual void on_birth(const Organism& child, const Organism& parent) { (void)child, (void)parent; }
    virtual void on_death(const Organism& o, DeathCause cause) { (void)o, (void)cause; }
    virtual void on_api_call(const Organism& o, const Export& e, std::uint32_t ip) { (void)o, (void)e, (void)ip; }
};

/// The soup. Organisms run in ascending id order, one slice each per tick; children join
/// the schedule on the next tick.
class World {
public:
    World(WorldConfig config, std::vector<Lineage> lineages);

    World(const World&) = delete;
    World& operator=(const World&) = delete;
    World(World&&) = delete;
    World& operator=(World&&) = delete;

    TickStats tick();

    /// Ticks until `ticks` have run or the population is extinct. `on_tick` sees every tick.
    void run(std::uint64_t ticks, const std::function<void(const TickStats&)>& on_tick = {});

    void set_observer(WorldObserver* observer) noexcept { observer_ = observer; }

    const WorldConfig& config() const noexcept { return config_; }
    std::span<const Lineage> lineages() const noexcept { return lineages_; }
    std::span<const Organism> organisms() const noexcept { return organisms_; }
    std::size_t population() const noexcept { return organisms_.size(); }
    bool extinct() const noexcept { return organisms_.empty(); }
    std::uint64_t current_tick() const noexcept { return tick_; }

    /// Bit distance of an organism's genome to its lineage's ancestor.
    std::uint64_t hamming_to_ancestor(const Organism& o) const;

    /// Lossless binary image of the world, including every random stream.
    std::string snapshot() const;
    /// Throws VersionMismatch or CorruptSnapshot.
    static std::unique_ptr<World> restore(std::string_view bytes);

private:
    World() = default;

    class SliceHost;

    void add_organism(std::uint32_t lineage, Genome genome, std::uint64_t parent_id, std::uint32_t generation);
    bool spawn(std::size_t parent_index, const SpawnRequest& request, TickStats& stats);
    void kill(Organism& o, DeathCause cause, TickStats& stats);
    void run_organism(std::size_t index, TickStats& stats);
    void duplicate_guard(TickStats& stats);
    void fill_summary(TickStats& stats) const;

    WorldConfig config_;
    std::vector<Lineage> lineages_;
    std::vector<Organism> organisms_;
    Rng rng_;
    std::uint64_t next_id_ = 0;
    std::uint64_t tick_ = 0;
    WorldObserver* observer_ = nullptr;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

} // namespace codonsoup
