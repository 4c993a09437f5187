#include "doctest.h"

#include "codonsoup/alphabet.hpp"
#include "codonsoup/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

using namespace codonsoup;

namespace {

EntryTable filled(AlphabetEntry e)
{
    EntryTable t;
    t.fill(e);
    return t;
}

EntryTable default_reserved()
{
    EntryTable t = filled(AlphabetEntry::exec(Op::Zer0));
    for (int c = 0; c < 256; ++c)
        if (is_nop_pattern(static_cast<Codon>(c)))
            t[c] = AlphabetEntry::nop();
    t[kDefaultStartCodon] = AlphabetEntry::start();
    t[kDefaultStopCodon] = AlphabetEntry::stop();
    return t;
}

// Tier of a pair, restated from the table rules rather than taken from the library.
double tier(const AlphabetEntry& a, const AlphabetEntry& b)
{
    if (a == b)
        return 0.0;
    if (a.role == Role::Start || a.role == Role::Stop || b.role == Role::Start || b.role == Role::Stop)
        return 1.0;
    auto cat = [](const AlphabetEntry& e) { return e.role == Role::Nop ? DangerCategory::Harmless : category(e.op); };
    const auto ca = cat(a), cb = cat(b);
    if (ca == DangerCategory::Dangerous || cb == DangerCategory::Dangerous)
        return 1.0;
    if (ca == DangerCategory::AddFamily && cb == DangerCategory::AddFamily)
        return 0.5;
    if (ca != DangerCategory::SemiHarmless && cb != DangerCategory::SemiHarmless)
        return 0.66;
    return 0.75;
}

} // namespace

TEST_SUITE("alphabet") {

TEST_CASE("NOP pattern")
{
    CHECK(is_nop_pattern(0x91));
    CHECK(is_nop_pattern(0xFF));
    CHECK_FALSE(is_nop_pattern(0x00));
    CHECK_FALSE(is_nop_pattern(kDefaultStartCodon));
    CHECK_FALSE(is_nop_pattern(kDefaultStopCodon));
    int count = 0;
    for (int c = 0; c < 256; ++c)
        count += is_nop_pattern(static_cast<Codon>(c));
    CHECK(count == 32);
    CHECK(std::popcount(static_cast<unsigned>(kDefaultStartCodon ^ kDefaultStopCodon)) > 1);
}

TEST_CASE("interaction tiers")
{
    using E = AlphabetEntry;
    CHECK(interaction(E::exec(Op::Add0001), E::exec(Op::Add0004)) == doctest::Approx(0.5));
    CHECK(interaction(E::exec(Op::Sub0001), E::exec(Op::Add4000)) == doctest::Approx(0.5));
    CHECK(interaction(E::exec(Op::Push), E::exec(Op::Push)) == 0.0);
    CHECK(interaction(E::exec(Op::Zer0), E::start()) == 1.0);
    CHECK(interaction(E::exec(Op::Zer0), E::exec(Op::Xor)) == doctest::Approx(0.66));
    CHECK(interaction(E::exec(Op::Zer0), E::exec(Op::Add0001)) == doctest::Approx(0.66));
    CHECK(interaction(E::exec(Op::Save), E::exec(Op::Xor)) == doctest::Approx(0.75));
    CHECK(interaction(E::exec(Op::Save), E::exec(Op::Push)) == 1.0);
    CHECK(interaction(E::start(), E::stop()) == 1.0);
    CHECK(interaction(E::nop(), E::nop()) == 0.0);
    CHECK(interaction(E::nop(), E::exec(Op::NopReal)) == doctest::Approx(0.66));
    CHECK(interaction_scaled(E::exec(Op::Zer0), E::exec(Op::Xor)) == 198);

    for (const auto& a : instruction_table())
        for (const auto& b : instruction_table())
            CHECK(interaction_scaled(E::exec(a.op), E::exec(b.op)) == interaction_scaled(E::exec(b.op), E::exec(a.op)));
}

TEST_CASE("VParams ordering")
{
    CHECK(VParams{}.valid());
    VParams bad;
    bad.harmless = 400;
    CHECK_FALSE(bad.valid());
}

TEST_CASE("energy of a 2-bit toy cube matches a hand sum")
{
    // 00 add0001, 01 add0004, 10 push, 11 zer0. Edges: 00-01 0.5, 00-10 1, 01-11 0.66, 10-11 1.
    const std::array<AlphabetEntry, 4> toy{AlphabetEntry::exec(Op::Add0001), AlphabetEntry::exec(Op::Add0004),
                                           AlphabetEntry::exec(Op::Push), AlphabetEntry::exec(Op::Zer0)};
    CHECK(energy_scaled(toy) == 2 * (150 + 300 + 198 + 300));
    CHECK(energy(toy) == doctest::Approx(6.32));
}

TEST_CASE("energy extremes")
{
    CHECK(energy_scaled(filled(AlphabetEntry::exec(Op::Zer0))) == 0);

    EntryTable checker;
    for (int c = 0; c < 256; ++c)
        checker[c] = AlphabetEntry::exec(std::popcount(static_cast<unsigned>(c)) % 2 ? Op::Push : Op::Pop);
    CHECK(energy(checker) == 2048.0);
}

TEST_CASE("energy equals twice the unordered-pair sum")
{
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_alphabet(InstructionSet::full(), rng);
        std::int64_t unordered = 0;
        for (int c = 0; c < 256; ++c)
            for (int bit = 0; bit < 8; ++bit) {
                const int d = c ^ (1 << bit);
                if (c < d)
                    unordered += interaction_scaled(a[static_cast<Codon>(c)], a[static_cast<Codon>(d)]);
            }
        CHECK(energy_scaled(a.entries()) == 2 * unordered);
    }
}

TEST_CASE("XOR relabeling is a hypercube automorphism")
{
    Rng rng(12);
    const auto a = random_alphabet(InstructionSet::full(), rng);
    for (int k = 0; k < 256; ++k) {
        EntryTable permuted;
        for (int c = 0; c < 256; ++c)
            permuted[c ^ k] = a[static_cast<Codon>(c)];
        CHECK(energy_scaled(permuted) == energy_scaled(a.entries()));
    }
}

TEST_CASE("random alphabets are valid and lie in the energy bounds")
{
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = random_alphabet(InstructionSet::full(), rng);
        CHECK(a.start_codon() == kDefaultStartCodon);
        CHECK(a.stop_codon() == kDefaultStopCodon);
        CHECK(a.instructions() == InstructionSet::full());
        for (int c = 0; c < 256; ++c)
            if (is_nop_pattern(static_cast<Codon>(c)))
                CHECK(a[static_cast<Codon>(c)].role == Role::Nop);
        const double e = energy(a);
        CHECK(e >= 0.0);
        CHECK(e <= 2048.0);
    }
}

TEST_CASE("a one-instruction alphabet fills every free slot with it")
{
    Rng rng(14);
    const auto a = random_alphabet(InstructionSet{Op::Xor}, rng);
    for (int c = 0; c < 256; ++c)
        if (!a.is_reserved(static_cast<Codon>(c)))
            CHECK(a[static_cast<Codon>(c)] == AlphabetEntry::exec(Op::Xor));
}

TEST_CASE("mean random energy agrees with the uniform-slot expectation")
{
    const EntryTable reserved = default_reserved();
    auto is_free = [](int c) { return !is_nop_pattern(static_cast<Codon>(c)) && c != kDefaultStartCodon && c != kDefaultStopCodon; };

    double expected = 0.0;
    const auto table = instruction_table();
    for (int c = 0; c < 256; ++c)
        for (int bit = 0; bit < 8; ++bit) {
            const int d = c ^ (1 << bit);
            double sum = 0.0;
            int n = 0;
            for (const auto& x : table)
                for (const auto& y : table) {
                    const auto ec = is_free(c) ? AlphabetEntry::exec(x.op) : reserved[c];
                    const auto ed = is_free(d) ? AlphabetEntry::exec(y.op) : reserved[d];
                    sum += tier(ec, ed);
                    ++n;
                }
            expected += sum / n;
        }

    double mean = 0.0;
    for (int seed = 1; seed <= 1000; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed));
        mean += energy(random_alphabet(InstructionSet::full(), rng));
    }
    mean /= 1000;

    CHECK(mean == doctest::Approx(expected).epsilon(0.005));
    CHECK(mean == doctest::Approx(1568.74).epsilon(0.0005));
}

TEST_CASE("optimizer")
{
    Rng seed_rng(15);
    const auto start = random_alphabet(InstructionSet::full(), seed_rng);

    SUBCASE("zero iterations leave the alphabet alone")
    {
        Rng rng(1);
        const auto r = optimize(start, {}, {.iterations = 0}, rng);
        CHECK(r.alphabet == start);
        REQUIRE(r.trace.size() == 1);
        CHECK(r.trace[0].scaled == energy_scaled(start.entries()));
    }

    SUBCASE("traces never rise and reserved slots never move")
    {
        Rng rng(2);
        const auto r = optimize(start, {}, {.iterations = 20'000, .swaps_per_step = 2, .trace_stride = 100}, rng);
        REQUIRE(r.trace.size() > 2);
        for (std::size_t i = 1; i < r.trace.size(); ++i) {
            CHECK(r.trace[i].scaled <= r.trace[i - 1].scaled);
            CHECK(r.trace[i].iteration > r.trace[i - 1].iteration);
        }
        CHECK(r.trace.back().scaled == energy_scaled(r.alphabet.entries()));
        CHECK(r.trace.back().scaled < r.trace.front().scaled);
        for (int c = 0; c < 256; ++c)
            if (start.is_reserved(static_cast<Codon>(c)))
                CHECK(r.alphabet[static_cast<Codon>(c)] == start[static_cast<Codon>(c)]);
        CHECK(r.alphabet.instructions() == InstructionSet::full());
    }

    SUBCASE("same seed, same result")
    {
        Rng a(3), b(3);
        const OptimizeOptions opt{.iterations = 5000, .swaps_per_step = 1, .trace_stride = 500};
        CHECK(optimize(start, {}, opt, a).alphabet == optimize(start, {}, opt, b).alphabet);
    }
}

TEST_CASE("default alphabet is pinned")
{
    const Alphabet& a = default_alphabet();
    CHECK(a.start_codon() == 0x2A);
    CHECK(a.stop_codon() == 0x54);
    CHECK(a.instructions() == InstructionSet::full());
    CHECK(energy_scaled(a.entries()) == 362478);
}

TEST_CASE("validation rejects broken tables")
{
    auto expect_invalid = [](const EntryTable& t) {
        try {
            Alphabet a(t);
            FAIL("expected InvalidAlphabet");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::InvalidAlphabet);
        }
    };
    CHECK_NOTHROW(Alphabet{default_reserved()});

    auto t = default_reserved();
    t[0x91] = AlphabetEntry::exec(Op::Push);
    expect_invalid(t);

    t = default_reserved();
    t[kDefaultStartCodon] = AlphabetEntry::exec(Op::Push);
    expect_invalid(t);

    t = default_reserved();
    t[0x00] = AlphabetEntry::stop();
    expect_invalid(t);

    t = default_reserved();
    t[kDefaultStopCodon] = AlphabetEntry::exec(Op::Zer0);
    t[0x93] = AlphabetEntry::stop();
    expect_invalid(t);
}

TEST_CASE("same_role and codons_for")
{
    const Alphabet& a = default_alphabet();
    for (int c = 0; c < 256; ++c) {
        const auto peers = a.same_role(static_cast<Codon>(c));
        CHECK(std::find(peers.begin(), peers.end(), static_cast<Codon>(c)) != peers.end());
        for (Codon p : peers)
            CHECK(a[p] == a[static_cast<Codon>(c)]);
    }
    CHECK(a.same_role(a.start_codon()).size() == 1);
    CHECK(a.same_role(0x91).size() == 32);
    for (const auto& ins : instruction_table())
        for (Codon c : a.codons_for(ins.op))
            CHECK(a[c].translated() == ins.op);
}

TEST_CASE("alphabet text format")
{
    const Alphabet& a = default_alphabet();
    const std::string text = format_alphabet(a);
    CHECK(text.rfind("codonsoup-alphabet 1\n", 0) == 0);
    CHECK(parse_alphabet(text) == a);

    auto code_of = [](auto f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::IoError;
    };
    CHECK(code_of([] { parse_alphabet("not an alphabet\n"); }) == Errc::BadFormat);
    CHECK(code_of([&] { parse_alphabet("codonsoup-alphabet 9\n" + text.substr(text.find('\n') + 1)); })
          == Errc::VersionMismatch);
    std::string bad = text;
    bad.replace(bad.find(" zer0"), 5, " zeroo");
    CHECK(code_of([&] { parse_alphabet(bad); }) == Errc::UnknownMnemonic);
    CHECK(code_of([] { load_alphabet("/nonexistent/x.alpha"); }) == Errc::IoError);
}

TEST_CASE("trace CSV")
{
    const EnergyTrace trace{{0, 600}, {1000, 300}};
    CHECK(format_trace_csv(trace) == "iteration,energy\n0,2.0000\n1000,1.0000\n");
}

}
