#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "sparc/errors.hpp"

namespace sparc {

/// Append-only little-endian byte buffer used by the SPRC container format.
class ByteWriter {
public:
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void i64(std::int64_t v) { raw(&v, 8); }
    void f32(float v) { raw(&v, 4); }
    void f64(double v) { raw(&v, 8); }
    void str(const std::string& s) {
        u64(s.size());
        raw(s.data(), s.size());
    }
    template <typename T>
    void array(const std::vector<T>& v) {
        u64(v.size());
        raw(v.data(), v.size() * sizeof(T));
    }

    const std::vector<std::uint8_t>& bytes() const { return buf_; }
    std::size_t size() const { return buf_.size(); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked reader over a byte span; errors report the failing offset.
class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    void raw(void* out, std::size_t n) {
        if (pos_ + n > size_)
            throw DataError("truncated file: need " + std::to_string(n) + " bytes at offset " +
                            std::to_string(pos_) + ", file has " + std::to_string(size_));
        std::memcpy(out, data_ + pos_, n);
        pos_ += n;
    }
    std::uint8_t u8() { return scalar<std::uint8_t>(); }
    std::uint32_t u32() { return scalar<std::uint32_t>(); }
    std::uint64_t u64() { return scalar<std::uint64_t>(); }
    std::int64_t i64() { return scalar<std::int64_t>(); }
    float f32() { return scalar<float>(); }
    double f64() { return scalar<double>(); }
    std::string str() {
        const std::uint64_t n = u64();
        check_count(n, 1);
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }
    template <typename T>
    std::vector<T> array() {
        const std::uint64_t n = u64();
        check_count(n, sizeof(T));
        std::vector<T> v(n);
        raw(v.data(), n * sizeof(T));
        return v;
    }

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return size_ - pos_; }

private:
    template <typename T>
    T scalar() {
        T v;
        raw(&v, sizeof(T));
        return v;
    }
    void check_count(std::uint64_t n, std::size_t elem) {
        if (n > (size_ - pos_) / elem)
            throw DataError("truncated file: length " + std::to_string(n) + " at offset " +
                            std::to_string(pos_) + " exceeds remaining bytes");
    }
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

/// FNV-1a over a byte stream; used for model fingerprints and index checks.
class Fnv1a {
public:
    void update(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            hash_ ^= b[i];
            hash_ *= 0x100000001b3ULL;
        }
    }
    void update_f64(double v) { update(&v, sizeof(v)); }
    void update_u64(std::uint64_t v) { update(&v, sizeof(v)); }
    void update_str(const std::string& s) {
        update_u64(s.size());
        update(s.data(), s.size());
    }
    std::uint64_t digest() const { return hash_; }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

/// One section of a SPRC container: fixed 8-byte tag plus payload location.
struct Section {
    char tag[8];
    std::uint64_t offset;
    std::uint64_t size;
};

/// Serializes sections under the "SPRC" magic. `kind` distinguishes model
/// files from index files so one cannot be loaded as the other.
std::vector<std::uint8_t> pack_container(std::uint32_t kind,
                                         const std::vector<std::pair<std::string, ByteWriter>>& sections);

struct Container {
    std::uint32_t kind = 0;
    std::vector<std::uint8_t> bytes;
    std::vector<Section> sections;
    ByteReader section(const std::string& tag) const;
    bool has_section(const std::string& tag) const;
};

Container open_container(const std::string& path, std::uint32_t expected_kind);

inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::uint32_t kKindModel = 1;
inline constexpr std::uint32_t kKindIndex = 2;

}  // namespace sparc
