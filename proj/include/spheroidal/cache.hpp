#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "spheroidal/modes.hpp"

namespace spheroidal {

// On-disk layout: one file per (kind, c) named <dir>/<kind>_c<canonical>.swf.
//   header : magic "SWFC", format_version u32, kind u8, canonical-c string
//            (u16 length + bytes), record count u32
//   record : m u32, n u32, lambda f64, n_mn f64, tail_bound f64,
//            d length u32, d payload f64[], crc32 u32 over the record bytes
// All integers and floats little-endian.  Writes go to a temporary file that
// is renamed into place, so readers never observe torn records.  Keys match
// on the exact canonical string; there is no nearest-c reuse.
struct CacheKey {
    Kind kind;
    double c;
    int m, n;

    std::string canonical_c() const;  // 15 significant decimal digits
};

inline constexpr std::uint32_t kCacheFormatVersion = 1;

std::filesystem::path cache_file_path(const std::filesystem::path& dir, Kind kind, double c);

// Durable upsert; storing an identical key again is idempotent.
void store(const std::filesystem::path& dir, const ModeCoefficients& coeffs);

// Plain-text export of the same records (one <same>.txt per (kind, c)),
// %.17g so values round-trip exactly; for debugging.
void store_text(const std::filesystem::path& dir, const ModeCoefficients& coeffs);

// Hit returns validated coefficients; a miss (no file / no record) is a
// non-error so callers can fall back to solve_mode.  I/O, version, and
// checksum failures throw their distinct cache_* exceptions.
std::optional<ModeCoefficients> load(const std::filesystem::path& dir, const CacheKey& key);

}  // namespace spheroidal
