#include "bitio.hpp"

#include "errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace hsk {

size_t BitArray::popcount() const {
    size_t n = 0;
    for (uint64_t w : words_) n += std::popcount(w);
    return n;
}

bool BitArray::subset_of(const BitArray& other) const {
    if (nbits_ != other.nbits_) return false;
    for (size_t i = 0; i < words_.size(); ++i)
        if (words_[i] & ~other.words_[i]) return false;
    return true;
}

void BitArray::clear() {
    std::fill(words_.begin(), words_.end(), 0);
}

void ByteWriter::u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
}

void ByteWriter::u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
}

void ByteWriter::f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
}

void ByteWriter::bytes(const void* data, size_t n) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    buf_.insert(buf_.end(), p, p + n);
}

void ByteWriter::bits(const BitArray& b) {
    u64(b.size());
    size_t nbytes = (b.size() + 7) / 8;
    size_t start = buf_.size();
    buf_.resize(start + nbytes, 0);
    // words are little-endian on disk, bit i of the array = bit (i%8) of byte i/8
    for (size_t w = 0; w < b.words().size(); ++w) {
        uint64_t v = b.words()[w];
        for (size_t byte = 0; byte < 8; ++byte) {
            size_t off = w * 8 + byte;
            if (off < nbytes) buf_[start + off] = uint8_t(v >> (8 * byte));
        }
    }
}

void ByteWriter::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(buf_.data()), std::streamsize(buf_.size()));
    if (!out) throw IoError("write failed: " + path);
}

void ByteReader::need(size_t n) const {
    if (pos_ + n > size_) throw IoError("truncated input (need " + std::to_string(n) +
                                        " bytes at offset " + std::to_string(pos_) + ")");
}

uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}

uint32_t ByteReader::u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(data_[pos_ + size_t(i)]) << (8 * i);
    pos_ += 4;
    return v;
}

uint64_t ByteReader::u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(data_[pos_ + size_t(i)]) << (8 * i);
    pos_ += 8;
    return v;
}

double ByteReader::f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void ByteReader::bytes(void* out, size_t n) {
    need(n);
    std::memcpy(out, data_ + pos_, n);
    pos_ += n;
}

BitArray ByteReader::bits() {
    uint64_t nbits = u64();
    size_t nbytes = size_t((nbits + 7) / 8);
    need(nbytes);
    BitArray b(static_cast<size_t>(nbits));
    for (size_t off = 0; off < nbytes; ++off)
        b.words()[off / 8] |= uint64_t(data_[pos_ + off]) << (8 * (off % 8));
    pos_ += nbytes;
    return b;
}

void ByteReader::skip(size_t n) {
    need(n);
    pos_ += n;
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open: " + path);
    std::streamsize n = in.tellg();
    in.seekg(0);
    std::vector<uint8_t> buf(static_cast<size_t>(n));
    in.read(reinterpret_cast<char*>(buf.data()), n);
    if (!in) throw IoError("read failed: " + path);
    return buf;
}

} // namespace hsk
