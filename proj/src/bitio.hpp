#ifndef HSK_BITIO_HPP
#define HSK_BITIO_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hsk {

// Flat bit array backed by 64-bit words. Bits only ever go from 0 to 1
// in the sketch structures, but clear()/reset are provided for reuse.
class BitArray {
public:
    BitArray() = default;
    explicit BitArray(size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

    size_t size() const { return nbits_; }

    void set(size_t i) { words_[i >> 6] |= uint64_t(1) << (i & 63); }
    bool test(size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

    size_t popcount() const;

    // True when every set bit of this array is also set in other.
    bool subset_of(const BitArray& other) const;

    void clear();

    const std::vector<uint64_t>& words() const { return words_; }
    std::vector<uint64_t>& words() { return words_; }

    bool operator==(const BitArray& o) const = default;

private:
    size_t nbits_ = 0;
    std::vector<uint64_t> words_;
};

// Little-endian binary stream writers/readers for the snapshot formats.
class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u32(uint32_t v);
    void u64(uint64_t v);
    void f64(double v);
    void bytes(const void* data, size_t n);
    void bits(const BitArray& b); // u64 bit count, then byte-aligned payload

    const std::vector<uint8_t>& buffer() const { return buf_; }
    void write_file(const std::string& path) const;

private:
    std::vector<uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(const uint8_t* data, size_t n) : data_(data), size_(n) {}
    explicit ByteReader(const std::vector<uint8_t>& v) : data_(v.data()), size_(v.size()) {}

    uint8_t u8();
    uint32_t u32();
    uint64_t u64();
    double f64();
    void bytes(void* out, size_t n);
    BitArray bits();

    size_t remaining() const { return size_ - pos_; }
    size_t position() const { return pos_; }
    void skip(size_t n);

private:
    void need(size_t n) const;

    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

std::vector<uint8_t> read_file_bytes(const std::string& path);

} // namespace hsk

#endif
