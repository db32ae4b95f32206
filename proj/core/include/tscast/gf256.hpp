#pragma once

#include <cstdint>

#include "tscast/errors.hpp"

namespace tscast::gf {

/// Field polynomial x^8 + x^4 + x^3 + x^2 + 1.
inline constexpr unsigned kFieldPoly = 0x11D;

inline uint8_t add(uint8_t a, uint8_t b) { return a ^ b; }

uint8_t mul(uint8_t a, uint8_t b);
/// Throws invalid_argument on division by zero.
uint8_t div(uint8_t a, uint8_t b);
uint8_t inverse(uint8_t a);
/// alpha^e for any e (reduced mod 255).
uint8_t pow_alpha(unsigned e);
/// Discrete log base alpha; a must be nonzero.
unsigned log_alpha(uint8_t a);

} // namespace tscast::gf
