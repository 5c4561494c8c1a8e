#pragma once

// Physicochemical property calculators and the percentile-band validity check.
//
// Residue tables (free amino-acid masses, Kyte-Doolittle hydropathy, the
// Guruprasad dipeptide instability weights, Bjellqvist pKa values) follow
// Biopython's Bio.SeqUtils.ProtParamData / IsoelectricPoint.

#include "prospero/sequence.hpp"

#include <array>
#include <span>
#include <vector>

namespace prospero {

struct PropertyVector {
  double molecular_weight = 0.0;   ///< Da, average masses
  double aromaticity = 0.0;        ///< freq(F, W, Y)
  double isoelectric_point = 0.0;  ///< pH
  double gravy = 0.0;
  double instability_index = 0.0;

  static constexpr std::size_t kCount = 5;
  std::array<double, kCount> values() const {
    return {molecular_weight, aromaticity, isoelectric_point, gravy, instability_index};
  }
};

double molecular_weight(const Sequence& x);
double aromaticity(const Sequence& x);
double gravy(const Sequence& x);
/// Throws LengthTooShort when x has fewer than 2 residues.
double instability_index(const Sequence& x);
double net_charge(const Sequence& x, double ph);
/// Bisection on net_charge over [0, 14] down to `tolerance` pH units.
double isoelectric_point(const Sequence& x, double tolerance = 1e-6);

double kyte_doolittle(AminoAcid a);

/// Throws LengthTooShort (instability needs two residues).
PropertyVector physicochemical(const Sequence& x);

/// Per-property [lo, hi] bands. lo is the sorted value at index
/// floor(0.005 (n-1)), hi at ceil(0.995 (n-1)), so the band never cuts
/// inside the reference's own extremes for n <= 200.
struct PropertyBands {
  std::array<double, PropertyVector::kCount> lo{}, hi{};
  std::size_t reference_size = 0;

  bool contains(const PropertyVector& p) const;
};

/// Throws EmptyReference. Warns below 200 members.
PropertyBands property_bands(std::span<const Sequence> reference);

struct ValidityResult {
  double percent = 0.0;
  std::size_t valid = 0;
  std::size_t total = 0;
  bool empty_candidates = false;
  bool small_reference = false;
};

/// Share of candidates whose five properties all lie inside the bands.
/// Sequences too short for the instability index count as invalid.
ValidityResult validity(std::span<const Sequence> candidates, std::span<const Sequence> reference);
ValidityResult validity(std::span<const Sequence> candidates, const PropertyBands& bands);

}  // namespace prospero
