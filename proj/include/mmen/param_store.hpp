#pragma once

#include "mmen/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mmen {

/// Gradient buffers aligned with a ParamStore's tensor indices.
using Gradients = std::vector<Tensor>;

/// Named learnable tensors in insertion order.
class ParamStore {
  public:
    std::size_t add(std::string name, Tensor init) {
        if (index_.count(name)) throw ArgumentError("duplicate parameter name '" + name + "'");
        index_.emplace(name, names_.size());
        names_.push_back(std::move(name));
        values_.push_back(std::move(init));
        return values_.size() - 1;
    }

    bool contains(std::string_view name) const { return index_.find(std::string(name)) != index_.end(); }

    std::size_t index(std::string_view name) const {
        const auto it = index_.find(std::string(name));
        if (it == index_.end()) throw ArgumentError("unknown parameter '" + std::string(name) + "'");
        return it->second;
    }

    std::size_t size() const noexcept { return values_.size(); }
    const std::string &name(std::size_t i) const { return names_[i]; }
    const std::vector<std::string> &names() const noexcept { return names_; }
    Tensor &value(std::size_t i) { return values_[i]; }
    const Tensor &value(std::size_t i) const { return values_[i]; }
    Tensor &value(std::string_view n) { return values_[index(n)]; }
    const Tensor &value(std::string_view n) const { return values_[index(n)]; }

    std::size_t flat_size() const {
        std::size_t total = 0;
        for (const auto &t : values_) total += t.numel();
        return total;
    }

    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(flat_size());
        for (const auto &t : values_) out.insert(out.end(), t.data.begin(), t.data.end());
        return out;
    }

    void assign_flat(std::span<const double> flat) {
        if (flat.size() != flat_size()) throw ArgumentError("assign_flat: length mismatch");
        std::size_t pos = 0;
        for (auto &t : values_) {
            std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), t.numel(), t.data.begin());
            pos += t.numel();
        }
    }

    /// Zero-filled gradient buffers, one per tensor.
    Gradients zero_gradients() const {
        Gradients g;
        g.reserve(values_.size());
        for (const auto &t : values_) g.emplace_back(t.rows, t.cols, 0.0);
        return g;
    }

    bool operator==(const ParamStore &o) const { return names_ == o.names_ && values_ == o.values_; }

  private:
    std::vector<std::string> names_;
    std::vector<Tensor> values_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

inline std::vector<double> flatten(const Gradients &g) {
    std::vector<double> out;
    for (const auto &t : g) out.insert(out.end(), t.data.begin(), t.data.end());
    return out;
}

inline void accumulate(Gradients &into, const Gradients &from) {
    if (into.size() != from.size()) throw ArgumentError("accumulate: gradient count mismatch");
    for (std::size_t i = 0; i < into.size(); ++i)
        for (std::size_t k = 0; k < into[i].numel(); ++k) into[i].data[k] += from[i].data[k];
}

// Checkpoint format: magic "MMEN1", then per tensor
//   u64 name length, name bytes, u64 rank, rank x u64 dims, f64 payload,
// all little-endian. Tensors are written as rank 2.

inline constexpr char kCheckpointMagic[] = {'M', 'M', 'E', 'N', '1'};

namespace detail {

template <class T> void write_le(std::ostream &out, T value) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &value, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    out.write(reinterpret_cast<const char *>(&bits), 8);
}

template <class T> bool read_le(std::istream &in, T &value) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    if (!in.read(reinterpret_cast<char *>(&bits), 8)) return false;
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    std::memcpy(&value, &bits, 8);
    return true;
}

} // namespace detail

inline void save_checkpoint(const ParamStore &ps, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const auto &name = ps.name(i);
        const auto &t = ps.value(i);
        detail::write_le<std::uint64_t>(out, name.size());
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::write_le<std::uint64_t>(out, 2);
        detail::write_le<std::uint64_t>(out, t.rows);
        detail::write_le<std::uint64_t>(out, t.cols);
        for (double x : t.data) detail::write_le<double>(out, x);
    }
    if (!out) throw DataError("write failed: " + path.string());
}

inline ParamStore load_checkpoint(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    char magic[sizeof kCheckpointMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
        throw DataError(path.string() + ": not an MMEN1 checkpoint");
    ParamStore ps;
    while (true) {
        if (in.peek() == std::char_traits<char>::eof()) break;
        auto fail = [&](const std::string &what) { return DataError(path.string() + ": " + what); };
        std::uint64_t name_len;
        if (!detail::read_le(in, name_len)) throw fail("truncated tensor header");
        if (name_len > (1u << 16)) throw fail("implausible tensor name length");
        std::string name(name_len, '\0');
        std::uint64_t rank;
        if (!in.read(name.data(), static_cast<std::streamsize>(name_len)) || !detail::read_le(in, rank))
            throw fail("truncated tensor header");
        if (rank > 2) throw fail("tensor '" + name + "' has rank > 2");
        std::uint64_t dims[2] = {1, 1};
        for (std::uint64_t r = 0; r < rank; ++r)
            if (!detail::read_le(in, dims[2 - rank + r])) throw fail("truncated dims for '" + name + "'");
        if (dims[0] * dims[1] > (1ull << 32)) throw fail("tensor '" + name + "' is implausibly large");
        Tensor t(dims[0], dims[1]);
        for (double &x : t.data)
            if (!detail::read_le(in, x)) throw fail("truncated payload for '" + name + "'");
        ps.add(std::move(name), std::move(t));
    }
    return ps;
}

} // namespace mmen
