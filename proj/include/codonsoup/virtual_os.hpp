#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace codonsoup {

inline constexpr unsigned kHashBits = 12;
inline constexpr std::uint32_t kHashMask = (1u << kHashBits) - 1;

/// 12-bit name hash: h = ((h << 3) ^ (h >> 9) ^ byte) & 0xFFF over the name's bytes.
constexpr std::uint32_t hash12(std::string_view name) noexcept
{
    std::uint32_t h = 0;
    for (unsigned char b : name)
        h = ((h << 3) ^ (h >> 9) ^ b) & kHashMask;
    return h;
}

/// Fixed address-space layout shared by every organism.
namespace layout {
inline constexpr std::uint32_t kCodeBase = 0x0001'0000;
inline constexpr std::uint32_t kHeapBase = 0x0040'0000;
inline constexpr std::uint32_t kPeerBase = 0x6000'0000;
inline constexpr std::uint32_t kPeerStride = 0x0100'0000;
inline constexpr std::uint32_t kPeerWindows = 4;
inline constexpr std::uint32_t kStubBase = 0x7F00'0000;
inline constexpr std::uint32_t kStubStride = 0x10;
inline constexpr std::uint32_t kMaxGenomeLength = kHeapBase - kCodeBase;
} // namespace layout

/// Host services behind the export table.
enum class ApiHandler : std::uint8_t {
    Valloc, // valloc(size) -> heap address in regA, 0 when exhausted
    Vspawn, // vspawn(address, length) -> regA = 1 if the child was admitted
    Vexit,  // vexit()
    Vrand,  // vrand() -> random 32-bit value in regA
    Vpeer,  // vpeer(index) -> base of a read-only copy of another organism's image, or 0
    Decoy,  // does nothing
};

/// Number of arguments the handler pops from the stack.
constexpr unsigned arity(ApiHandler h) noexcept
{
    switch (h) {
    case ApiHandler::Valloc:
    case ApiHandler::Vpeer:
        return 1;
    case ApiHandler::Vspawn:
        return 2;
    default:
        return 0;
    }
}

struct Export {
    std::string name;
    std::uint32_t stub_address = 0;
    ApiHandler handler = ApiHandler::Decoy;
    std::uint32_t hash = 0;
};

class VirtualOs {
public:
    /// The five real services followed by decoy exports.
    static const VirtualOs& standard();

    /// Export table with the given names, all decoys. Used to study hash reachability.
    static VirtualOs synthetic(std::span<const std::string> names);

    explicit VirtualOs(std::vector<std::pair<std::string, ApiHandler>> exports);

    std::span<const Export> exports() const noexcept { return exports_; }

    /// The export whose stub sits exactly at `address`.
    const Export* export_at(std::uint32_t address) const noexcept;

    bool in_stub_region(std::uint32_t address) const noexcept
    {
        return address >= layout::kStubBase && address < stub_end_;
    }

    /// First export (table order) per hash value; 0 where no name hashes there.
    std::uint32_t stub_for_hash(std::uint32_t h) const noexcept { return h <= kHashMask ? first_by_hash_[h] : 0; }

private:
    std::vector<Export> exports_;
    std::vector<std::uint32_t> first_by_hash_ = std::vector<std::uint32_t>(kHashMask + 1, 0);
    std::uint32_t stub_end_ = layout::kStubBase;
};

/// Stub address of the first export (table order) whose hash is `h`; 0 when none matches
/// or `h` does not fit in 12 bits.
std::uint32_t resolve_api(const VirtualOs& os, std::uint32_t h) noexcept;

} // namespace codonsoup
