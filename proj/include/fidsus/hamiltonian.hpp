#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "fidsus/basis.hpp"
#include "fidsus/sparse.hpp"

namespace fidsus {

enum class Boundary { periodic, antiperiodic, open };

inline const char* to_string(Boundary b) {
  switch (b) {
    case Boundary::periodic: return "periodic";
    case Boundary::antiperiodic: return "antiperiodic";
    case Boundary::open: return "open";
  }
  return "?";
}

// Boundary rule for half-filled chains: L = 2 (mod 4) closes the shell with
// periodic wrapping, L = 0 (mod 4) needs the antiperiodic twist. Odd L has
// no closed shell at half filling.
inline Boundary boundary_rule(int L) {
  if (L % 2 != 0) throw ArgumentError("boundary_rule: L must be even");
  return (L % 4 == 2) ? Boundary::periodic : Boundary::antiperiodic;
}

struct ModelSpec {
  int L = 0;
  double t = 1.0;
  double u = 0.0;
  Boundary boundary = Boundary::periodic;
  int n_up = 0;
  int n_dn = 0;
};

struct Bond {
  int a, b;
  double sign;  // +1 bulk, -1 on the wrap bond of an antiperiodic ring
};

// Nearest-neighbour bonds of a chain. The wrap bond appears only for L >= 3:
// on a two-site ring it would duplicate the single bulk bond.
inline std::vector<Bond> chain_bonds(int L, Boundary boundary) {
  std::vector<Bond> bonds;
  for (int i = 0; i + 1 < L; ++i) bonds.push_back({i, i + 1, 1.0});
  if (L >= 3 && boundary != Boundary::open) {
    bonds.push_back({L - 1, 0, boundary == Boundary::antiperiodic ? -1.0 : 1.0});
  }
  return bonds;
}

// Hubbard chain split as H(lambda) = H0 + lambda * HI with H0 the hopping
// part and HI the diagonal count of doubly occupied sites.
struct HubbardOperators {
  SparseOperator h0;
  std::vector<std::int32_t> hi;
};

inline HubbardOperators build_hubbard(const ModelSpec& spec, const FockBasis& basis) {
  if (spec.L != basis.L() || spec.n_up != basis.n_up() || spec.n_dn != basis.n_dn()) {
    throw ArgumentError("build_hubbard: model and basis sectors disagree");
  }
  if (spec.t <= 0.0) throw ArgumentError("build_hubbard: hopping t must be positive");

  const auto bonds = chain_bonds(spec.L, spec.boundary);
  const double t = spec.t;

  SparseOperator h0 = SparseOperator::from_rows(
      basis.dim(), [&](std::size_t r, std::vector<SparseOperator::Entry>& row) {
        const Config c = basis.state(r);
        for (Spin spin : {Spin::up, Spin::dn}) {
          for (const Bond& bond : bonds) {
            for (const auto& [i, j] : {std::pair{bond.a, bond.b}, std::pair{bond.b, bond.a}}) {
              if (auto moved = hop(c, spec.L, i, j, spin)) {
                const auto& [target, sign] = *moved;
                row.emplace_back(static_cast<std::uint32_t>(basis.index_of(target)),
                                 -t * bond.sign * sign);
              }
            }
          }
        }
      });

  std::vector<std::int32_t> hi(basis.dim());
  for (std::size_t r = 0; r < basis.dim(); ++r) {
    const Config c = basis.state(r);
    hi[r] = std::popcount(c.up & c.dn);
  }
  return {std::move(h0), std::move(hi)};
}

inline SparseOperator hamiltonian_at(const SparseOperator& h0,
                                     const std::vector<std::int32_t>& hi,
                                     double lambda) {
  if (h0.dim() != hi.size()) throw ArgumentError("hamiltonian_at: dimension mismatch");
  if (lambda == 0.0) return h0;
  return SparseOperator::from_rows(
      h0.dim(), [&](std::size_t r, std::vector<SparseOperator::Entry>& row) {
        for (std::size_t k = h0.row_ptr()[r]; k < h0.row_ptr()[r + 1]; ++k) {
          row.emplace_back(h0.cols()[k], h0.vals()[k]);
        }
        if (hi[r] != 0) {
          row.emplace_back(static_cast<std::uint32_t>(r), lambda * hi[r]);
        }
      });
}

}  // namespace fidsus
