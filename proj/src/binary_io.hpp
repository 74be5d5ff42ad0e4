#pragma once

#include "wellrom/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace wellrom::detail {

static_assert(std::endian::native == std::endian::little,
              "binary containers are written in native little-endian order");

class BinaryWriter {
public:
    BinaryWriter(const std::string& path, const char magic[4], std::uint32_t version)
        : out_(path, std::ios::binary), path_(path)
    {
        if (!out_)
            throw InputError("cannot open for writing: " + path);
        out_.write(magic, 4);
        u32(version);
    }

    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void i64(std::int64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void f64s(const double* p, std::size_t n) { raw(p, n * sizeof(double)); }
    void vec(const std::vector<double>& v)
    {
        u64(v.size());
        f64s(v.data(), v.size());
    }
    void ints(const std::vector<int>& v)
    {
        u64(v.size());
        for (int x : v)
            i64(x);
    }
    void str(const std::string& s)
    {
        u64(s.size());
        raw(s.data(), s.size());
    }
    void finish()
    {
        out_.flush();
        if (!out_)
            throw InputError("write failed: " + path_);
    }

private:
    void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }

    std::ofstream out_;
    std::string path_;
};

class BinaryReader {
public:
    BinaryReader(const std::string& path, const char magic[4], std::uint32_t max_version)
        : in_(path, std::ios::binary), path_(path)
    {
        if (!in_)
            throw InputError("cannot open for reading: " + path);
        char m[4] = {};
        in_.read(m, 4);
        if (!in_ || std::memcmp(m, magic, 4) != 0)
            throw InputError("not a " + std::string(magic, 4) + " container: " + path);
        version_ = u32();
        if (version_ == 0 || version_ > max_version)
            throw InputError("unsupported container version " + std::to_string(version_) + ": "
                             + path);
    }

    std::uint32_t version() const noexcept { return version_; }

    std::uint32_t u32() { return pod<std::uint32_t>(); }
    std::uint64_t u64() { return pod<std::uint64_t>(); }
    std::int64_t i64() { return pod<std::int64_t>(); }
    double f64() { return pod<double>(); }
    void f64s(double* p, std::size_t n) { raw(p, n * sizeof(double)); }
    std::vector<double> vec()
    {
        std::vector<double> v(count());
        f64s(v.data(), v.size());
        return v;
    }
    std::vector<int> ints()
    {
        std::vector<int> v(count());
        for (auto& x : v)
            x = static_cast<int>(i64());
        return v;
    }
    std::string str()
    {
        std::string s(count(), '\0');
        raw(s.data(), s.size());
        return s;
    }

private:
    template <class T>
    T pod()
    {
        T v{};
        raw(&v, sizeof v);
        return v;
    }
    std::size_t count()
    {
        const std::uint64_t n = u64();
        if (n > (std::uint64_t{1} << 34))
            throw InputError("corrupt length field in " + path_);
        return static_cast<std::size_t>(n);
    }
    void raw(void* p, std::size_t n)
    {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in_)
            throw InputError("truncated container: " + path_);
    }

    std::ifstream in_;
    std::string path_;
    std::uint32_t version_ = 0;
};

} // namespace wellrom::detail
