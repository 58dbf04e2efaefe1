#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "dkn/cascade.hpp"
#include "dkn/kernel_net.hpp"
#include "dkn/types.hpp"

namespace dkn {

/// Little-endian byte sink.
class ByteWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void i8(std::int8_t v) { buf_.push_back(static_cast<std::uint8_t>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void magic(const char (&m)[9]) { buf_.insert(buf_.end(), m, m + 8); }

    const std::vector<std::uint8_t>& bytes() const { return buf_; }
    void write_file(const std::string& path) const;

  private:
    std::vector<std::uint8_t> buf_;
};

/// Little-endian byte source; decode failures throw ParseError with the
/// offending offset.
class ByteReader {
  public:
    explicit ByteReader(std::vector<std::uint8_t> bytes) : buf_(std::move(bytes)) {}
    static ByteReader from_file(const std::string& path);

    std::uint8_t u8() { return take(1)[0]; }
    std::int8_t i8() { return static_cast<std::int8_t>(u8()); }
    std::uint32_t u32() {
        const std::uint8_t* p = take(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
        return v;
    }
    std::uint64_t u64() {
        const std::uint8_t* p = take(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    void expect_magic(const char (&m)[9]);
    std::uint64_t offset() const { return pos_; }
    bool exhausted() const { return pos_ == buf_.size(); }
    void expect_end() {
        if (!exhausted()) throw ParseError("trailing bytes after payload", pos_);
    }

  private:
    const std::uint8_t* take(std::size_t n) {
        if (pos_ + n > buf_.size()) throw ParseError("truncated payload", pos_);
        const std::uint8_t* p = buf_.data() + pos_;
        pos_ += n;
        return p;
    }
    std::vector<std::uint8_t> buf_;
    std::size_t pos_ = 0;
};

/// Network model file: architecture header followed by row-major weight
/// matrices (fan-in rows, fan-out columns). Round-trips are bit-exact.
void save_network(const KernelNetwork& net, const std::string& path);
KernelNetwork load_network(const std::string& path);
void write_network(const KernelNetwork& net, ByteWriter& w);
KernelNetwork read_network(ByteReader& r);

/// Cascade artifact: bank scales, shared feature store, then per stage the
/// network plus sparse SVM coefficients. Bit-exact round trip.
void save_cascade(const Cascade& cascade, const std::string& path,
                  std::uint64_t config_hash);
Cascade load_cascade(const std::string& path, std::uint64_t* config_hash = nullptr);

}  // namespace dkn
