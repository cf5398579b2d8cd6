#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tid {

inline constexpr const char* kVersion = "0.1.0";

// Parse or serialization problems in network, case, config or report files.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structural problems in a network; also thrown when an operation receives an
// invalid network.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inference or estimation failures (inconsistent evidence, bad case data,
// guard limits).
struct InferenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[nodiscard]] uint64_t fnv1a64(std::string_view bytes,
                               uint64_t h = 0xcbf29ce484222325ull);

// All randomness flows from one root seed through named sub-streams, so one
// consumer's draws never depend on what other consumers exist. The optional
// indices let a stream family fan out (per sample, per dataset, ...).
[[nodiscard]] std::mt19937_64 seed_stream(uint64_t seed, std::string_view name,
                                          uint64_t a = 0, uint64_t b = 0);

// Uniform in [0,1) built from the top 53 bits of the engine output; identical
// across standard libraries, unlike std::uniform_real_distribution.
[[nodiscard]] double uniform01(std::mt19937_64& gen);

// Samples an index from an (unnormalized is fine) non-negative weight vector.
[[nodiscard]] int sample_categorical(const std::vector<double>& weights,
                                     std::mt19937_64& gen);

// Shortest decimal string that parses back to exactly the same double.
[[nodiscard]] std::string format_double(double x);

}  // namespace tid
