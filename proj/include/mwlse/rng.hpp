#ifndef MWLSE_RNG_HPP
#define MWLSE_RNG_HPP

#include <cstdint>
#include <random>

namespace mwlse {

// Standard normal CDF via erfc; absolute error below 1e-15.
double normal_cdf(double x);

// Inverse standard normal CDF, Wichura's AS 241 rational approximations;
// relative error below 1e-15 over (0,1).
double normal_quantile(double p);

// splitmix64 step, used for seed derivation and seeding.
std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic seed for a (stream, substream) pair of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t substream);

// Seeded generator with platform-independent output: mt19937_64 bits mapped
// to open-interval uniforms, normals through the inverse CDF.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    // Uniform on the open interval (0, 1).
    double uniform();
    // Standard normal.
    double normal();

  private:
    std::mt19937_64 engine_;
};

}  // namespace mwlse

#endif
