#ifndef TPOSEEN_FIELD_IO_HPP
#define TPOSEEN_FIELD_IO_HPP

#include <string>

#include "tposeen/solver.hpp"

namespace tposeen {

/// Binary field dump. Layout: magic "TPOSN1\n"; little-endian u64 triple
/// (K_max, N, reserved=0); little-endian f64 triple (L, lambda, period);
/// then modes k = -K_max..K_max, each N^3 nodes in x1-fastest order with
/// ascending coordinates (x = -L .. L-h per axis), each node 3 complex
/// components as (re, im) f64 pairs.
void dump_field(const TimePeriodicField& u, const std::string& path);

TimePeriodicField load_field(const std::string& path);

}  // namespace tposeen

#endif
