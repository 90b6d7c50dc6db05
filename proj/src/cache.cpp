#include "spheroidal/cache.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include "spheroidal/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "cache format is little-endian; byte swapping not implemented");

namespace spheroidal {

namespace {

constexpr char kMagic[4] = {'S', 'W', 'F', 'C'};

std::uint32_t crc32(const unsigned char* data, std::size_t len) {
    static std::uint32_t table[256];
    static bool init = false;
    if (!init) {
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t r = i;
            for (int k = 0; k < 8; ++k) r = (r >> 1) ^ (0xEDB88320u & (0u - (r & 1u)));
            table[i] = r;
        }
        init = true;
    }
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i) crc = (crc >> 8) ^ table[(crc ^ data[i]) & 0xFFu];
    return crc ^ 0xFFFFFFFFu;
}

struct Record {
    std::uint32_t m, n;
    double lambda, n_mn, tail_bound;
    std::vector<double> d;
};

void append_bytes(std::vector<unsigned char>& buf, const void* p, std::size_t len) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    buf.insert(buf.end(), b, b + len);
}

std::vector<unsigned char> record_bytes(const Record& r) {
    std::vector<unsigned char> buf;
    std::uint32_t dlen = std::uint32_t(r.d.size());
    append_bytes(buf, &r.m, 4);
    append_bytes(buf, &r.n, 4);
    append_bytes(buf, &r.lambda, 8);
    append_bytes(buf, &r.n_mn, 8);
    append_bytes(buf, &r.tail_bound, 8);
    append_bytes(buf, &dlen, 4);
    append_bytes(buf, r.d.data(), 8 * r.d.size());
    return buf;
}

struct FileContents {
    std::uint8_t kind;
    std::string c_str;
    std::map<std::pair<std::uint32_t, std::uint32_t>, Record> records;
};

// Reads and fully validates an existing cache file.
FileContents read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cache_io_error("cache: cannot open " + path.string());
    auto fail = [&](const std::string& why) -> void {
        throw cache_io_error("cache: " + why + " in " + path.string());
    };
    char magic[4];
    if (!in.read(magic, 4)) fail("truncated header");
    if (std::memcmp(magic, kMagic, 4) != 0) fail("bad magic");
    std::uint32_t version;
    if (!in.read(reinterpret_cast<char*>(&version), 4)) fail("truncated header");
    if (version != kCacheFormatVersion)
        throw cache_version_error("cache: format version " + std::to_string(version) +
                                  " not understood (expected " +
                                  std::to_string(kCacheFormatVersion) + ") in " + path.string());
    FileContents fc;
    if (!in.read(reinterpret_cast<char*>(&fc.kind), 1)) fail("truncated header");
    std::uint16_t clen;
    if (!in.read(reinterpret_cast<char*>(&clen), 2)) fail("truncated header");
    fc.c_str.resize(clen);
    if (!in.read(fc.c_str.data(), clen)) fail("truncated header");
    std::uint32_t count;
    if (!in.read(reinterpret_cast<char*>(&count), 4)) fail("truncated header");
    for (std::uint32_t i = 0; i < count; ++i) {
        Record r;
        std::uint32_t dlen;
        if (!in.read(reinterpret_cast<char*>(&r.m), 4) ||
            !in.read(reinterpret_cast<char*>(&r.n), 4) ||
            !in.read(reinterpret_cast<char*>(&r.lambda), 8) ||
            !in.read(reinterpret_cast<char*>(&r.n_mn), 8) ||
            !in.read(reinterpret_cast<char*>(&r.tail_bound), 8) ||
            !in.read(reinterpret_cast<char*>(&dlen), 4))
            fail("truncated record");
        if (dlen > (1u << 24)) fail("implausible record length");
        r.d.resize(dlen);
        if (!in.read(reinterpret_cast<char*>(r.d.data()), 8 * std::streamsize(dlen)))
            fail("truncated record payload");
        std::uint32_t stored_crc;
        if (!in.read(reinterpret_cast<char*>(&stored_crc), 4)) fail("truncated checksum");
        auto bytes = record_bytes(r);
        if (crc32(bytes.data(), bytes.size()) != stored_crc)
            throw cache_checksum_error("cache: checksum mismatch for (m=" + std::to_string(r.m) +
                                       ", n=" + std::to_string(r.n) + ") in " + path.string());
        fc.records[{r.m, r.n}] = std::move(r);
    }
    return fc;
}

void write_file(const std::filesystem::path& path, const FileContents& fc) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw cache_io_error("cache: cannot write " + tmp.string());
        out.write(kMagic, 4);
        std::uint32_t version = kCacheFormatVersion;
        out.write(reinterpret_cast<const char*>(&version), 4);
        out.write(reinterpret_cast<const char*>(&fc.kind), 1);
        std::uint16_t clen = std::uint16_t(fc.c_str.size());
        out.write(reinterpret_cast<const char*>(&clen), 2);
        out.write(fc.c_str.data(), clen);
        std::uint32_t count = std::uint32_t(fc.records.size());
        out.write(reinterpret_cast<const char*>(&count), 4);
        for (const auto& [key, r] : fc.records) {
            auto bytes = record_bytes(r);
            std::uint32_t crc = crc32(bytes.data(), bytes.size());
            out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
            out.write(reinterpret_cast<const char*>(&crc), 4);
        }
        if (!out) throw cache_io_error("cache: write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw cache_io_error("cache: rename failed: " + ec.message());
}

}  // namespace

std::string CacheKey::canonical_c() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", c);
    return buf;
}

std::filesystem::path cache_file_path(const std::filesystem::path& dir, Kind kind, double c) {
    CacheKey k{kind, c, 0, 0};
    return dir / (std::string(kind_name(family(kind))) + "_c" + k.canonical_c() + ".swf");
}

void store(const std::filesystem::path& dir, const ModeCoefficients& coeffs) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    auto path = cache_file_path(dir, coeffs.kind, coeffs.c);
    FileContents fc;
    if (std::filesystem::exists(path)) {
        fc = read_file(path);
    } else {
        fc.kind = coeffs.kind == Kind::Prolate ? 0 : 1;
        fc.c_str = CacheKey{coeffs.kind, coeffs.c, 0, 0}.canonical_c();
    }
    Record r;
    r.m = std::uint32_t(coeffs.mode.m);
    r.n = std::uint32_t(coeffs.mode.n);
    r.lambda = coeffs.lambda;
    r.n_mn = coeffs.n_mn;
    r.tail_bound = coeffs.tail_bound;
    r.d = coeffs.d;
    fc.records[{r.m, r.n}] = std::move(r);
    write_file(path, fc);
}

void store_text(const std::filesystem::path& dir, const ModeCoefficients& coeffs) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    auto path = cache_file_path(dir, coeffs.kind, coeffs.c);
    path += ".txt";
    // Rewrite the whole text export from the binary file plus this record.
    std::map<std::pair<int, int>, ModeCoefficients> all;
    auto bin = cache_file_path(dir, coeffs.kind, coeffs.c);
    if (std::filesystem::exists(bin)) {
        for (const auto& [key, r] : read_file(bin).records) {
            CacheKey k{coeffs.kind, coeffs.c, int(r.m), int(r.n)};
            if (auto mc = load(dir, k)) all[{int(r.m), int(r.n)}] = *mc;
        }
    }
    all[{coeffs.mode.m, coeffs.mode.n}] = coeffs;
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw cache_io_error("cache: cannot write " + tmp.string());
        char buf[512];
        out << "# spheroidal mode cache (text export), format "
            << kCacheFormatVersion << "\n";
        out << "# kind c m n lambda n_mn tail_bound d...\n";
        for (const auto& [key, mc] : all) {
            std::snprintf(buf, sizeof buf, "%s %.17g %d %d %.17g %.17g %.17g",
                          kind_name(mc.kind), mc.c, mc.mode.m, mc.mode.n, mc.lambda, mc.n_mn,
                          mc.tail_bound);
            out << buf;
            for (double v : mc.d) {
                std::snprintf(buf, sizeof buf, " %.17g", v);
                out << buf;
            }
            out << "\n";
        }
    }
    std::error_code ec2;
    std::filesystem::rename(tmp, path, ec2);
    if (ec2) throw cache_io_error("cache: rename failed: " + ec2.message());
}

std::optional<ModeCoefficients> load(const std::filesystem::path& dir, const CacheKey& key) {
    auto path = cache_file_path(dir, key.kind, key.c);
    if (!std::filesystem::exists(path)) return std::nullopt;  // miss
    FileContents fc = read_file(path);
    if (fc.c_str != key.canonical_c()) return std::nullopt;  // different canonical c: miss
    auto it = fc.records.find({std::uint32_t(key.m), std::uint32_t(key.n)});
    if (it == fc.records.end()) return std::nullopt;  // miss
    const Record& r = it->second;
    ModeCoefficients mc;
    mc.kind = family(key.kind);
    mc.c = key.c;
    mc.mode = {key.m, key.n};
    mc.lambda = r.lambda;
    mc.n_mn = r.n_mn;
    mc.tail_bound = r.tail_bound;
    mc.d = r.d;
    mc.truncation = int(mc.d.size());
    if (mc.d.empty() || !(mc.n_mn > 0.0))
        throw cache_checksum_error("cache: record fails invariants in " + path.string());
    return mc;
}

}  // namespace spheroidal
