#ifndef XSTS_RNG_HPP_
#define XSTS_RNG_HPP_

#include <cstdint>
#include <random>

namespace xsts {

// splitmix64 step, used as a seed mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream derivation: stream(seed, index) yields a generator
// whose state depends only on (seed, index), never on call order.  Replication
// and draw streams are derived this way so results are identical under any
// parallel schedule.
inline std::mt19937_64 derive_stream(std::uint64_t master_seed,
                                     std::uint64_t index) {
  std::uint64_t s = master_seed;
  std::uint64_t a = splitmix64(s);
  s ^= index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
  std::uint64_t b = splitmix64(s);
  std::mt19937_64 gen(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
  gen.discard(8);  // decorrelate nearby seeds
  return gen;
}

// A fresh 64-bit sub-seed for (master_seed, index); feed the result to
// derive_stream when a job needs several independent streams of its own.
inline std::uint64_t derive_seed(std::uint64_t master_seed,
                                 std::uint64_t index) {
  std::uint64_t s =
      master_seed ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  splitmix64(s);
  return splitmix64(s);
}

}  // namespace xsts

#endif  // XSTS_RNG_HPP_
