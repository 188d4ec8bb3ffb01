#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mmen {

using NodeId = std::uint32_t;

/// Base error. The subclasses map onto the CLI exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input files or inconsistent data (exit code 2).
class DataError : public Error {
  public:
    using Error::Error;
};

/// Parse failure with the offending line number attached.
class ParseError : public DataError {
  public:
    ParseError(const std::string &file, std::size_t line, const std::string &what)
        : DataError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// NaN/Inf during training, shape mismatches on the tape (exit code 3).
class NumericError : public Error {
  public:
    using Error::Error;
};

/// Invalid arguments to a library call.
class ArgumentError : public Error {
  public:
    using Error::Error;
};

namespace rng {

/// splitmix64 finalizer; used to derive independent streams from a master seed.
inline std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed) ^ mix(stream + 0x632be59bd9b4e019ULL));
}

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
    return std::mt19937_64(derive(seed, id));
}

// The distributions below are spelled out instead of using <random>'s
// distribution classes, whose output is implementation-defined.

/// Uniform double in [0, 1).
inline double uniform01(std::mt19937_64 &g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n).
inline std::uint64_t below(std::mt19937_64 &g, std::uint64_t n) {
    const std::uint64_t limit = n == 0 ? 0 : (~std::uint64_t{0} - n + 1) % n;
    std::uint64_t x = g();
    while (x < limit) x = g();
    return n == 0 ? 0 : x % n;
}

inline double normal(std::mt19937_64 &g) {
    // Box-Muller, one draw per call.
    double u1 = uniform01(g);
    while (u1 <= 0.0) u1 = uniform01(g);
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline double exponential(std::mt19937_64 &g, double mean) {
    return -mean * std::log1p(-uniform01(g));
}

template <class T> void shuffle(std::vector<T> &v, std::mt19937_64 &g) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = below(g, i);
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace rng

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Callers must make each
/// index write only to its own output slot so results do not depend on `jobs`.
template <class Fn> void parallel_for(std::size_t n, unsigned jobs, Fn &&fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) t.join();
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace mmen
