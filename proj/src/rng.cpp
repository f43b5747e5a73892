#include "lnainfer/rng.hpp"

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace lnainfer {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(seed + stream));
}

double uniform01(Rng& rng) {
  boost::random::uniform_01<double> dist;
  double u = dist(rng);
  while (u <= 0.0) u = dist(rng);
  return u;
}

double standard_normal(Rng& rng) {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

double exponential(Rng& rng, double rate) {
  boost::random::exponential_distribution<double> dist(rate);
  return dist(rng);
}

double gamma_shape_scale(Rng& rng, double shape, double scale) {
  boost::random::gamma_distribution<double> dist(shape, scale);
  return dist(rng);
}

}  // namespace lnainfer
