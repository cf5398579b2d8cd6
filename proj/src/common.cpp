#include "tid/common.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace tid {

uint64_t fnv1a64(std::string_view bytes, uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::mt19937_64 seed_stream(uint64_t seed, std::string_view name, uint64_t a,
                            uint64_t b) {
    uint64_t h = fnv1a64(name);
    char buf[24];
    std::memcpy(buf, &seed, 8);
    std::memcpy(buf + 8, &a, 8);
    std::memcpy(buf + 16, &b, 8);
    h = fnv1a64(std::string_view(buf, sizeof buf), h);
    std::mt19937_64 gen(h);
    gen.discard(16);  // move past the low-entropy warmup of a scalar seed
    return gen;
}

double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

int sample_categorical(const std::vector<double>& weights,
                       std::mt19937_64& gen) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = uniform01(gen) * total;
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

}  // namespace tid
