#include "ifista/random.hpp"

namespace ifista {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) noexcept
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    return splitmix64(h ^ splitmix64(index));
}

Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index)
{
    return Rng(derive_seed(seed, stream, index));
}

Vector random_gaussian(Index n, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector out(n);
    for (Index i = 0; i < n; ++i) out[i] = normal(rng);
    return out;
}

Vector random_unit(Index n, Rng& rng)
{
    if (n <= 0) throw std::invalid_argument("random_unit: dimension must be positive");
    for (;;) {
        Vector g = random_gaussian(n, rng);
        const double nrm = g.norm();
        if (nrm > 1e-300) return g / nrm;
    }
}

Vector random_uniform(Index n, double lo, double hi, Rng& rng)
{
    std::uniform_real_distribution<double> unif(lo, hi);
    Vector out(n);
    for (Index i = 0; i < n; ++i) out[i] = unif(rng);
    return out;
}

}  // namespace ifista
