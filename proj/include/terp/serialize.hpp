#pragma once

// Little binary stream helpers for checkpoints. Doubles are written as raw
// IEEE-754 bytes so that a save/load cycle is bit-exact.

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "terp/error.hpp"

namespace terp {

class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}

    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void i64(std::int64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }

    void str(const std::string& s) {
        u64(s.size());
        raw(s.data(), s.size());
    }

    void doubles(const std::vector<double>& v) {
        u64(v.size());
        raw(v.data(), v.size() * sizeof(double));
    }

    void strings(const std::vector<std::string>& v) {
        u64(v.size());
        for (const auto& s : v) str(s);
    }

    void ints(const std::vector<std::int32_t>& v) {
        u64(v.size());
        raw(v.data(), v.size() * sizeof(std::int32_t));
    }

private:
    void raw(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!out_) throw Error("checkpoint write failed");
    }

    std::ostream& out_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::istream& in) : in_(in) {}

    std::uint64_t u64() {
        std::uint64_t v = 0;
        raw(&v, sizeof v);
        return v;
    }
    std::int64_t i64() {
        std::int64_t v = 0;
        raw(&v, sizeof v);
        return v;
    }
    double f64() {
        double v = 0;
        raw(&v, sizeof v);
        return v;
    }

    std::string str() {
        std::string s(checked_len(u64(), 1), '\0');
        raw(s.data(), s.size());
        return s;
    }

    std::vector<double> doubles() {
        std::vector<double> v(checked_len(u64(), sizeof(double)));
        raw(v.data(), v.size() * sizeof(double));
        return v;
    }

    std::vector<std::string> strings() {
        std::vector<std::string> v(checked_len(u64(), 8));
        for (auto& s : v) s = str();
        return v;
    }

    std::vector<std::int32_t> ints() {
        std::vector<std::int32_t> v(checked_len(u64(), sizeof(std::int32_t)));
        raw(v.data(), v.size() * sizeof(std::int32_t));
        return v;
    }

    void expect_magic(const std::string& magic) {
        std::string got(magic.size(), '\0');
        raw(got.data(), got.size());
        if (got != magic) throw Error("checkpoint: bad magic, expected " + magic);
    }

private:
    static std::size_t checked_len(std::uint64_t n, std::size_t elem) {
        if (n > (std::uint64_t{1} << 40) / elem) throw Error("checkpoint: implausible length");
        return static_cast<std::size_t>(n);
    }

    void raw(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in_) throw Error("checkpoint: truncated");
    }

    std::istream& in_;
};

inline void write_magic(std::ostream& out, const std::string& magic) {
    out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

}  // namespace terp
