#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fidsus/common.hpp"

namespace fidsus {

using word_t = std::uint32_t;

// One fermionic Fock configuration of a chain of up to 32 sites: bit j of
// each word is the occupation of site j for that spin species.
struct Config {
  word_t up = 0;
  word_t dn = 0;
  auto operator<=>(const Config&) const = default;
};

enum class Spin { up, dn };

namespace detail {

// All L-bit words with n bits set, ascending (Gosper's hack).
inline std::vector<word_t> words_with_population(int L, int n) {
  std::vector<word_t> out;
  out.reserve(binomial(L, n));
  if (n == 0) {
    out.push_back(0);
    return out;
  }
  const std::uint64_t limit = std::uint64_t{1} << L;
  std::uint64_t v = (std::uint64_t{1} << n) - 1;
  while (v < limit) {
    out.push_back(static_cast<word_t>(v));
    const std::uint64_t t = v | (v - 1);
    v = (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
  }
  return out;
}

}  // namespace detail

// Fixed-(n_up, n_dn) sector basis. States are ordered by the composite key
// up * 2^L + dn, i.e. ascending up-word, then ascending down-word, so the
// ordinal factorizes as rank(up) * |dn sector| + rank(dn).
class FockBasis {
 public:
  FockBasis(int L, int n_up, int n_dn) : L_(L), n_up_(n_up), n_dn_(n_dn) {
    if (L < 1 || L > 32) throw ArgumentError("FockBasis: L must be in [1, 32]");
    if (n_up < 0 || n_up > L || n_dn < 0 || n_dn > L) {
      throw ArgumentError("FockBasis: particle numbers must be in [0, L]");
    }
    const std::uint64_t d = binomial(L, n_up) * binomial(L, n_dn);
    if (d > (std::uint64_t{1} << 31)) {
      throw SizingError("FockBasis: sector dimension exceeds addressable limit");
    }
    up_words_ = detail::words_with_population(L, n_up);
    dn_words_ = detail::words_with_population(L, n_dn);
  }

  int L() const { return L_; }
  int n_up() const { return n_up_; }
  int n_dn() const { return n_dn_; }
  std::size_t dim() const { return up_words_.size() * dn_words_.size(); }

  Config state(std::size_t i) const {
    return {up_words_[i / dn_words_.size()], dn_words_[i % dn_words_.size()]};
  }

  std::size_t index_of(Config c) const {
    const auto iu = std::lower_bound(up_words_.begin(), up_words_.end(), c.up);
    const auto id = std::lower_bound(dn_words_.begin(), dn_words_.end(), c.dn);
    if (iu == up_words_.end() || *iu != c.up || id == dn_words_.end() || *id != c.dn) {
      throw ArgumentError("FockBasis: configuration not in this sector");
    }
    return static_cast<std::size_t>(iu - up_words_.begin()) * dn_words_.size() +
           static_cast<std::size_t>(id - dn_words_.begin());
  }

  const std::vector<word_t>& up_words() const { return up_words_; }
  const std::vector<word_t>& dn_words() const { return dn_words_; }

 private:
  int L_, n_up_, n_dn_;
  std::vector<word_t> up_words_, dn_words_;
};

// c^dag_{i,sigma} c_{j,sigma} acting on a configuration. Returns the moved
// configuration and the fermionic sign, or nullopt when the move is blocked
// (site j empty or site i occupied).
//
// Operator ordering puts the whole up block before the down block; a
// same-species move then picks up (-1)^(number of that species strictly
// between i and j), and the opposite species never contributes because its
// string is crossed twice.
inline std::optional<std::pair<Config, int>> hop(Config c, int L, int i, int j,
                                                 Spin spin) {
  if (i < 0 || i >= L || j < 0 || j >= L || i == j) {
    throw ArgumentError("hop: site indices out of range");
  }
  const word_t w = (spin == Spin::up) ? c.up : c.dn;
  if (!((w >> j) & 1u) || ((w >> i) & 1u)) return std::nullopt;

  const int lo = std::min(i, j);
  const int hi = std::max(i, j);
  // Bits strictly between lo and hi; hi <= 31 so the shifts stay in range.
  const word_t between = ((word_t{1} << hi) - 1) & ~((word_t{1} << (lo + 1)) - 1);
  const int sign = (std::popcount(w & between) & 1) ? -1 : 1;

  const word_t moved = (w & ~(word_t{1} << j)) | (word_t{1} << i);
  Config out = c;
  (spin == Spin::up ? out.up : out.dn) = moved;
  return std::make_pair(out, sign);
}

}  // namespace fidsus
