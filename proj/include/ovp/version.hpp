#ifndef OVP_VERSION_HPP_
#define OVP_VERSION_HPP_

namespace ovp {

inline constexpr const char* kVersion = "0.1.0";

// Name of the pseudo-random generator pipeline. Recorded in run manifests so
// an experiment can be replayed bit-exactly by any build carrying the same id.
inline constexpr const char* kPrngName = "mt19937_64/boxmuller-v1";

}  // namespace ovp

#endif
