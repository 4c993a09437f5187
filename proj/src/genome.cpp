#include "codonsoup/genome.hpp"

#include "codonsoup/binary_io.hpp"
#include "codonsoup/error.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace codonsoup {

namespace {
constexpr char kGenomeMagic[8] = {'C', 'S', 'O', 'U', 'P', 'G', 'E', 'N'};
}

std::vector<SplicedCodon> splice_detailed(std::span<const Codon> codons, const Alphabet& alpha)
{
    std::vector<SplicedCodon> out;
    out.reserve(codons.size());
    SpliceMask mask = SpliceMask::Exon;
    for (Codon c : codons)
        out.push_back(splice_step(c, mask, alpha));
    return out;
}

std::vector<Op> splice_translate(std::span<const Codon> codons, const Alphabet& alpha)
{
    std::vector<Op> out;
    out.reserve(codons.size());
    SpliceMask mask = SpliceMask::Exon;
    for (Codon c : codons)
        out.push_back(splice_step(c, mask, alpha).op);
    return out;
}

std::vector<Op> splice_translate(const Genome& g, const Alphabet& alpha) { return splice_translate(g.codons, alpha); }

std::uint64_t hamming(std::span<const Codon> a, std::span<const Codon> b)
{
    if (a.size() != b.size())
        throw Error(Errc::LengthMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " codons");
    std::uint64_t bits = 0;
    std::size_t i = 0;
    for (; i + 8 <= a.size(); i += 8) {
        std::uint64_t x, y;
        std::memcpy(&x, a.data() + i, 8);
        std::memcpy(&y, b.data() + i, 8);
        bits += static_cast<std::uint64_t>(std::popcount(x ^ y));
    }
    for (; i < a.size(); ++i)
        bits += static_cast<std::uint64_t>(std::popcount(static_cast<unsigned>(a[i] ^ b[i])));
    return bits;
}

std::uint64_t hamming(const Genome& a, const Genome& b) { return hamming(a.codons, b.codons); }

InstructionHistogram instruction_histogram(const Genome& g, const Alphabet& alpha)
{
    InstructionHistogram h;
    const auto ops = splice_translate(g, alpha);
    const std::size_t n = std::min(g.data_offset, ops.size());
    std::array<std::size_t, kInstructionCount> counts{};
    std::size_t dangerous = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ++counts[index_of(ops[i])];
        if (category(ops[i]) == DangerCategory::Dangerous)
            ++dangerous;
    }
    h.total = n;
    if (n == 0)
        return h;
    for (std::size_t k = 0; k < kInstructionCount; ++k)
        h.frequency[k] = static_cast<double>(counts[k]) / static_cast<double>(n);
    h.danger_density = static_cast<double>(dangerous) / static_cast<double>(n);
    return h;
}

std::string disassemble(const Genome& g, const Alphabet& alpha)
{
    std::string out;
    const auto spliced = splice_detailed(g.codons, alpha);
    char line[128];
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Codon c = g.codons[i];
        const auto& e = alpha[c];
        const char* flag = spliced[i].mask == SpliceMask::Intron ? "intron" : "exon";
        if (e.role == Role::Start || e.role == Role::Stop)
            flag = "marker";
        std::snprintf(line, sizeof line, "%06zu %02x %-5s %-20s %s\n", i, static_cast<unsigned>(c),
                      std::string(to_string(e.role)).c_str(), std::string(mnemonic(spliced[i].op)).c_str(), flag);
        out += line;
    }
    return out;
}

std::string disassemble_source(const Genome& g, const Alphabet& alpha)
{
    std::string out;
    const auto ops = splice_translate(g, alpha);
    const std::size_t code = std::min(g.data_offset, g.size());
    for (std::size_t i = 0; i < code; ++i) {
        const auto& e = alpha[g.codons[i]];
        if (e.role == Role::Start)
            out += "START\n";
        else if (e.role == Role::Stop)
            out += "STOP\n";
        else
            out += std::string(mnemonic(ops[i])) + "\n";
    }
    if (g.data_offset < g.size()) {
        out += "DATA\n";
        char buf[32];
        for (std::size_t i = code; i < g.size(); ++i) {
            std::snprintf(buf, sizeof buf, "byte 0x%02x\n", static_cast<unsigned>(g.codons[i]));
            out += buf;
        }
    }
    return out;
}

void write_genome(std::ostream& out, const Genome& g)
{
    ByteWriter w;
    w.raw({reinterpret_cast<const std::uint8_t*>(kGenomeMagic), sizeof kGenomeMagic});
    w.u32(kGenomeFormatVersion);
    w.u32(static_cast<std::uint32_t>(g.size()));
    w.u32(static_cast<std::uint32_t>(g.data_offset));
    w.raw(g.codons);
    const auto& d = w.data();
    out.write(reinterpret_cast<const char*>(d.data()), static_cast<std::streamsize>(d.size()));
}

Genome read_genome(std::istream& in)
{
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    ByteReader r(bytes, Errc::BadFormat);
    auto magic = r.raw(sizeof kGenomeMagic);
    if (std::memcmp(magic.data(), kGenomeMagic, sizeof kGenomeMagic) != 0)
        throw Error(Errc::BadFormat, "not a genome file");
    const auto version = r.u32();
    if (version != kGenomeFormatVersion)
        throw Error(Errc::VersionMismatch, "genome format version " + std::to_string(version));
    const auto length = r.u32();
    const auto offset = r.u32();
    if (offset > length)
        throw Error(Errc::BadFormat, "data offset beyond genome end");
    auto codons = r.raw(length);
    if (!r.at_end())
        throw Error(Errc::BadFormat, "trailing bytes after genome");
    return Genome({codons.begin(), codons.end()}, offset);
}

void save_genome(const Genome& g, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    write_genome(out, g);
    if (!out)
        throw Error(Errc::IoError, "cannot write " + path);
}

Genome load_genome(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path);
    return read_genome(in);
}

} // namespace codonsoup
