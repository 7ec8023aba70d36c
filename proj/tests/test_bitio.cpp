#include <doctest.h>

#include <cstdio>

#include "bitio.hpp"
#include "errors.hpp"

using namespace hsk;

TEST_CASE("bit array basics") {
    BitArray b(130);
    CHECK(b.size() == 130);
    CHECK(b.popcount() == 0);
    b.set(0);
    b.set(63);
    b.set(64);
    b.set(129);
    CHECK(b.popcount() == 4);
    CHECK(b.test(63));
    CHECK_FALSE(b.test(62));

    BitArray super(130);
    super.set(0);
    super.set(63);
    super.set(64);
    super.set(129);
    super.set(100);
    CHECK(b.subset_of(super));
    CHECK_FALSE(super.subset_of(b));

    b.clear();
    CHECK(b.popcount() == 0);
}

TEST_CASE("writer and reader round-trip") {
    ByteWriter w;
    w.u8(0xAB);
    w.u32(0xDEADBEEF);
    w.u64(0x0123456789ABCDEFull);
    w.f64(3.5);
    BitArray b(13);
    b.set(2);
    b.set(12);
    w.bits(b);

    ByteReader r(w.buffer());
    CHECK(r.u8() == 0xAB);
    CHECK(r.u32() == 0xDEADBEEF);
    CHECK(r.u64() == 0x0123456789ABCDEFull);
    CHECK(r.f64() == 3.5);
    BitArray back = r.bits();
    CHECK(back == b);
    CHECK(r.remaining() == 0);
}

TEST_CASE("little-endian layout is stable") {
    ByteWriter w;
    w.u32(0x11223344);
    const auto& buf = w.buffer();
    REQUIRE(buf.size() == 4);
    CHECK(buf[0] == 0x44);
    CHECK(buf[1] == 0x33);
    CHECK(buf[2] == 0x22);
    CHECK(buf[3] == 0x11);
}

TEST_CASE("truncated input throws with context") {
    ByteWriter w;
    w.u32(7);
    ByteReader r(w.buffer());
    r.u32();
    CHECK_THROWS_AS(r.u8(), IoError);
}

TEST_CASE("file round-trip") {
    std::string path = "bitio_test.bin";
    ByteWriter w;
    w.u64(42);
    w.write_file(path);
    auto bytes = read_file_bytes(path);
    ByteReader r(bytes);
    CHECK(r.u64() == 42);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_file_bytes(path), IoError);
}
