#include "sparc/bytes.hpp"

#include <cstdio>
#include <cstring>

namespace sparc {

namespace {
constexpr char kMagic[4] = {'S', 'P', 'R', 'C'};
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw DataError("cannot open file: " + path);
    std::fseek(f, 0, SEEK_END);
    const long size = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    std::vector<std::uint8_t> bytes(size > 0 ? static_cast<std::size_t>(size) : 0);
    if (!bytes.empty() && std::fread(bytes.data(), 1, bytes.size(), f) != bytes.size()) {
        std::fclose(f);
        throw DataError("short read: " + path);
    }
    std::fclose(f);
    return bytes;
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot write file: " + path);
    if (!bytes.empty() && std::fwrite(bytes.data(), 1, bytes.size(), f) != bytes.size()) {
        std::fclose(f);
        throw DataError("short write: " + path);
    }
    std::fclose(f);
}

std::vector<std::uint8_t> pack_container(std::uint32_t kind,
                                         const std::vector<std::pair<std::string, ByteWriter>>& sections) {
    ByteWriter header;
    header.raw(kMagic, 4);
    header.u32(kContainerVersion);
    header.u32(kind);
    header.u32(static_cast<std::uint32_t>(sections.size()));

    // Header + table is fixed-size, so payload offsets are known up front.
    const std::size_t table_bytes = sections.size() * (8 + 8 + 8);
    std::uint64_t offset = header.size() + table_bytes;
    for (const auto& [tag, payload] : sections) {
        char t[8] = {0};
        std::memcpy(t, tag.data(), std::min<std::size_t>(tag.size(), 8));
        header.raw(t, 8);
        header.u64(offset);
        header.u64(payload.size());
        offset += payload.size();
    }

    std::vector<std::uint8_t> out;
    out.reserve(offset);
    out.insert(out.end(), header.bytes().begin(), header.bytes().end());
    for (const auto& [tag, payload] : sections)
        out.insert(out.end(), payload.bytes().begin(), payload.bytes().end());
    return out;
}

ByteReader Container::section(const std::string& tag) const {
    for (const auto& s : sections) {
        if (std::strncmp(s.tag, tag.c_str(), 8) == 0) {
            if (s.offset + s.size > bytes.size())
                throw DataError("truncated file: section '" + tag + "' at offset " +
                                std::to_string(s.offset) + " extends past end of file");
            return ByteReader(bytes.data() + s.offset, s.size);
        }
    }
    throw DataError("incompatible index: missing section '" + tag + "'");
}

bool Container::has_section(const std::string& tag) const {
    for (const auto& s : sections)
        if (std::strncmp(s.tag, tag.c_str(), 8) == 0) return true;
    return false;
}

Container open_container(const std::string& path, std::uint32_t expected_kind) {
    Container c;
    c.bytes = read_file_bytes(path);
    ByteReader r(c.bytes.data(), c.bytes.size());
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw DataError("incompatible index: bad magic in " + path);
    const std::uint32_t version = r.u32();
    if (version != kContainerVersion)
        throw DataError("incompatible index: version " + std::to_string(version) + " (expected " +
                        std::to_string(kContainerVersion) + ")");
    c.kind = r.u32();
    if (c.kind != expected_kind)
        throw DataError("incompatible index: wrong container kind in " + path);
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        Section s;
        r.raw(s.tag, 8);
        s.offset = r.u64();
        s.size = r.u64();
        c.sections.push_back(s);
    }
    return c;
}

}  // namespace sparc
