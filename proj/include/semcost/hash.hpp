#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace semcost {

/// 64-bit FNV-1a. Stable across platforms and builds, unlike std::hash; used
/// for fixture request keys and prompt ids.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// fnv1a64 as 16 lowercase hex digits.
inline std::string stable_hash(std::string_view text) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::uint64_t h = fnv1a64(text);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace semcost
