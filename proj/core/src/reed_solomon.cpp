#include "tscast/reed_solomon.hpp"

#include <algorithm>
#include <vector>

#include "tscast/gf256.hpp"

namespace tscast {

namespace {

/// g(x) = prod_{i=0..15} (x - alpha^i), stored high coefficient first;
/// g[0] is the (monic) x^16 term.
const std::array<uint8_t, kRsParitySize + 1>& generator_poly() {
  static const auto g = [] {
    std::vector<uint8_t> poly{1};
    for (unsigned i = 0; i < kRsParitySize; ++i) {
      const uint8_t root = gf::pow_alpha(i);
      std::vector<uint8_t> next(poly.size() + 1, 0);
      next[0] = poly[0];
      for (std::size_t j = 1; j < poly.size(); ++j)
        next[j] = poly[j] ^ gf::mul(root, poly[j - 1]);
      next[poly.size()] = gf::mul(root, poly.back());
      poly = std::move(next);
    }
    std::array<uint8_t, kRsParitySize + 1> out{};
    std::copy(poly.begin(), poly.end(), out.begin());
    return out;
  }();
  return g;
}

/// Evaluate a polynomial given low-order-first coefficients.
uint8_t eval_poly_at(const std::vector<uint8_t>& coeffs, uint8_t x) {
  uint8_t acc = 0;
  for (std::size_t i = coeffs.size(); i-- > 0;)
    acc = gf::mul(acc, x) ^ coeffs[i];
  return acc;
}

} // namespace

RsCodeword rs_encode(std::span<const uint8_t> data) {
  if (data.size() != kRsDataSize)
    raise(Errc::wrong_length, "encoder takes exactly 188 bytes, got " +
                                  std::to_string(data.size()));
  const auto& g = generator_poly();
  std::array<uint8_t, kRsParitySize> rem{};
  for (const uint8_t d : data) {
    const uint8_t factor = d ^ rem[0];
    for (std::size_t j = 0; j + 1 < kRsParitySize; ++j)
      rem[j] = rem[j + 1] ^ gf::mul(factor, g[j + 1]);
    rem[kRsParitySize - 1] = gf::mul(factor, g[kRsParitySize]);
  }
  RsCodeword cw{};
  std::copy(data.begin(), data.end(), cw.begin());
  std::copy(rem.begin(), rem.end(), cw.begin() + kRsDataSize);
  return cw;
}

std::array<uint8_t, kRsParitySize> rs_syndromes(
    std::span<const uint8_t> codeword) {
  if (codeword.size() != kRsCodewordSize)
    raise(Errc::wrong_length, "codeword must be 204 bytes, got " +
                                  std::to_string(codeword.size()));
  std::array<uint8_t, kRsParitySize> s{};
  for (unsigned i = 0; i < kRsParitySize; ++i) {
    const uint8_t x = gf::pow_alpha(i);
    uint8_t acc = 0;
    for (const uint8_t b : codeword)
      acc = gf::mul(acc, x) ^ b;
    s[i] = acc;
  }
  return s;
}

RsDecodeResult rs_decode(std::span<const uint8_t> codeword) {
  const auto syndromes = rs_syndromes(codeword); // validates length

  RsDecodeResult result;
  const bool clean =
      std::all_of(syndromes.begin(), syndromes.end(),
                  [](uint8_t s) { return s == 0; });
  if (clean) {
    result.ok = true;
    std::copy_n(codeword.begin(), kRsDataSize, result.data.begin());
    return result;
  }

  // Berlekamp-Massey: find the minimal error locator lambda(x).
  std::vector<uint8_t> lambda{1}, prev{1};
  unsigned errors = 0, shift = 1;
  uint8_t prev_discrepancy = 1;
  for (unsigned n = 0; n < kRsParitySize; ++n) {
    uint8_t d = syndromes[n];
    for (unsigned i = 1; i <= errors && i < lambda.size(); ++i)
      d ^= gf::mul(lambda[i], syndromes[n - i]);
    if (d == 0) {
      ++shift;
      continue;
    }
    const uint8_t coef = gf::div(d, prev_discrepancy);
    if (2 * errors <= n) {
      std::vector<uint8_t> tmp = lambda;
      if (lambda.size() < prev.size() + shift)
        lambda.resize(prev.size() + shift, 0);
      for (std::size_t i = 0; i < prev.size(); ++i)
        lambda[i + shift] ^= gf::mul(coef, prev[i]);
      errors = n + 1 - errors;
      prev = std::move(tmp);
      prev_discrepancy = d;
      shift = 1;
    } else {
      if (lambda.size() < prev.size() + shift)
        lambda.resize(prev.size() + shift, 0);
      for (std::size_t i = 0; i < prev.size(); ++i)
        lambda[i + shift] ^= gf::mul(coef, prev[i]);
      ++shift;
    }
  }
  while (!lambda.empty() && lambda.back() == 0)
    lambda.pop_back();
  const unsigned degree = static_cast<unsigned>(lambda.size()) - 1;
  if (degree == 0 || degree > kRsMaxCorrectable || degree != errors)
    return result; // not correctable

  // Chien search over the full (255,239) position space; the shortened
  // prefix positions 204..254 must stay root-free.
  std::vector<unsigned> error_powers; // X_l = alpha^p
  for (unsigned p = 0; p < 255; ++p) {
    const uint8_t x_inv = gf::pow_alpha(255 - p);
    if (eval_poly_at(lambda, x_inv) == 0)
      error_powers.push_back(p);
  }
  if (error_powers.size() != degree)
    return result;
  for (const unsigned p : error_powers)
    if (p >= kRsCodewordSize)
      return result; // error "located" in the virtual prefix

  // Forney (generator root exponent starts at 0):
  // omega(x) = S(x) * lambda(x) mod x^16,
  // e_l = X_l * omega(X_l^-1) / lambda'(X_l^-1).
  std::vector<uint8_t> omega(kRsParitySize, 0);
  for (std::size_t i = 0; i < lambda.size(); ++i)
    for (std::size_t j = 0; i + j < kRsParitySize; ++j)
      omega[i + j] ^= gf::mul(lambda[i], syndromes[j]);
  std::vector<uint8_t> lambda_prime;
  for (std::size_t i = 1; i < lambda.size(); i += 2) {
    lambda_prime.resize(i, 0);
    lambda_prime[i - 1] = lambda[i];
  }

  std::array<uint8_t, kRsCodewordSize> corrected{};
  std::copy_n(codeword.begin(), kRsCodewordSize, corrected.begin());
  for (const unsigned p : error_powers) {
    const uint8_t x = gf::pow_alpha(p);
    const uint8_t x_inv = gf::pow_alpha(255 - p);
    const uint8_t denom = eval_poly_at(lambda_prime, x_inv);
    if (denom == 0)
      return result;
    const uint8_t magnitude =
        gf::mul(x, gf::div(eval_poly_at(omega, x_inv), denom));
    if (magnitude == 0)
      return result;
    corrected[kRsCodewordSize - 1 - p] ^= magnitude;
  }

  const auto recheck = rs_syndromes(corrected);
  if (!std::all_of(recheck.begin(), recheck.end(),
                   [](uint8_t s) { return s == 0; }))
    return result;

  result.ok = true;
  result.corrected = degree;
  std::copy_n(corrected.begin(), kRsDataSize, result.data.begin());
  return result;
}

} // namespace tscast
