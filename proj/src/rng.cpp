#include "nlsysid/rng.hpp"

namespace nlsysid {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix_seed(master);
  for (std::uint64_t label : path) s = mix_seed(s ^ mix_seed(label + 0x632be59bd9b4e019ULL));
  return Rng(s);
}

double Rng::normal() { return normal_(engine_); }

double Rng::uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

std::size_t Rng::index(std::size_t count) {
  return std::uniform_int_distribution<std::size_t>(0, count - 1)(engine_);
}

}  // namespace nlsysid
