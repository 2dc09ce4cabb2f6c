#pragma once

// Little-endian binary writer/reader used by the tagger weights, fitted
// feature artifacts and model files. Every file starts with an 8-byte magic
// followed by a u32 format version.

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "healthgrade/common.hpp"

namespace hg::binio {

class Writer {
public:
    void magic(std::string_view tag, std::uint32_t version) {
        std::string m(tag);
        m.resize(8, '\0');
        buf_ += m;
        u32(version);
    }

    template <typename T>
        requires std::is_arithmetic_v<T>
    void pod(T value) {
        char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        buf_.append(bytes, sizeof(T));
    }

    void u8(std::uint8_t v) { pod(v); }
    void u32(std::uint32_t v) { pod(v); }
    void u64(std::uint64_t v) { pod(v); }
    void f64(double v) { pod(v); }

    void str(std::string_view s) {
        u64(s.size());
        buf_.append(s);
    }

    template <typename T>
        requires std::is_arithmetic_v<T>
    void vec(const std::vector<T>& values) {
        u64(values.size());
        for (T v : values) pod(v);
    }

    void strings(const std::vector<std::string>& values) {
        u64(values.size());
        for (const auto& s : values) str(s);
    }

    const std::string& bytes() const noexcept { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string bytes) : buf_(std::move(bytes)) {}

    /// Checks the magic tag and returns the stored version.
    std::uint32_t magic(std::string_view tag) {
        std::string expected(tag);
        expected.resize(8, '\0');
        need(8);
        if (buf_.compare(pos_, 8, expected) != 0)
            throw DataError("bad file header: expected " + std::string(tag));
        pos_ += 8;
        return u32();
    }

    template <typename T>
        requires std::is_arithmetic_v<T>
    T pod() {
        need(sizeof(T));
        T value;
        std::memcpy(&value, buf_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::uint8_t u8() { return pod<std::uint8_t>(); }
    std::uint32_t u32() { return pod<std::uint32_t>(); }
    std::uint64_t u64() { return pod<std::uint64_t>(); }
    double f64() { return pod<double>(); }

    std::string str() {
        const auto n = u64();
        need(n);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    template <typename T>
        requires std::is_arithmetic_v<T>
    std::vector<T> vec() {
        const auto n = u64();
        need(n * sizeof(T));
        std::vector<T> out(n);
        if (n > 0) std::memcpy(out.data(), buf_.data() + pos_, n * sizeof(T));
        pos_ += n * sizeof(T);
        return out;
    }

    std::vector<std::string> strings() {
        const auto n = u64();
        std::vector<std::string> out;
        out.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) out.push_back(str());
        return out;
    }

    bool at_end() const noexcept { return pos_ == buf_.size(); }

private:
    void need(std::uint64_t n) const {
        if (n > buf_.size() - pos_) throw DataError("truncated binary file");
    }

    std::string buf_;
    std::size_t pos_ = 0;
};

}  // namespace hg::binio
