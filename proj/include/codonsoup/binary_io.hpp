#pragma once

#include "codonsoup/error.hpp"

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace codonsoup {

/// Little-endian byte sink for the genome and snapshot formats.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i)
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i)
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v)
    {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u64(bits);
    }
    void raw(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }
    void bytes(std::span<const std::uint8_t> bytes)
    {
        u64(bytes.size());
        raw(bytes);
    }
    void str(std::string_view s)
    {
        u64(s.size());
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    const std::vector<std::uint8_t>& data() const noexcept { return buf_; }
    std::vector<std::uint8_t> take() noexcept { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked reader; any overrun throws `Error(on_error)`.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> data, Errc on_error) : data_(data), err_(on_error) {}

    std::uint8_t u8()
    {
        need(1);
        return data_[pos_++];
    }
    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    double f64()
    {
        const auto bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    std::span<const std::uint8_t> raw(std::size_t n)
    {
        need(n);
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }
    std::vector<std::uint8_t> bytes()
    {
        const auto n = u64();
        auto s = raw(checked(n));
        return {s.begin(), s.end()};
    }
    std::string str()
    {
        const auto n = u64();
        auto s = raw(checked(n));
        return {s.begin(), s.end()};
    }
    bool at_end() const noexcept { return pos_ == data_.size(); }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

private:
    std::size_t checked(std::uint64_t n) const
    {
        if (n > remaining())
            throw Error(err_, "length field exceeds remaining input");
        return static_cast<std::size_t>(n);
    }
    void need(std::size_t n) const
    {
        if (n > remaining())
            throw Error(err_, "unexpected end of input");
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    Errc err_;
};

} // namespace codonsoup
