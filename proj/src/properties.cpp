#include "prospero/properties.hpp"

#include "prospero/error.hpp"
#include "prospero/log.hpp"

#include <algorithm>
#include <cmath>

namespace prospero {

namespace {

constexpr double kWater = 18.01528;

// Alphabet order ACDEFGHIKLMNPQRSTVWY throughout.
constexpr std::array<double, kAlphabetSize> kFreeMass = {
    89.0932,  121.1582, 133.1027, 147.1293, 165.1891, 75.0666,  155.1546, 131.1729, 146.1876, 131.1729,
    149.2113, 132.1179, 115.1305, 146.1445, 174.201,  105.0926, 119.1192, 117.1463, 204.2252, 181.1885};

constexpr std::array<double, kAlphabetSize> kKyteDoolittle = {1.8,  2.5,  -3.5, -3.5, 2.8,  -0.4, -3.2,
                                                              4.5,  -3.9, 3.8,  1.9,  -3.5, -1.6, -3.5,
                                                              -4.5, -0.8, -0.7, 4.2,  -0.9, -1.3};

// Row: first residue of the dipeptide; column: second.
constexpr double kDiwv[kAlphabetSize][kAlphabetSize] = {
    {1, 44.94, -7.49, 1, 1, 1, -7.49, 1, 1, 1, 1, 1, 20.26, 1, 1, 1, 1, 1, 1, 1},
    {1, 1, 20.26, 1, 1, 1, 33.6, 1, 1, 20.26, 33.6, 1, 20.26, -6.54, 1, 1, 33.6, -6.54, 24.68, 1},
    {1, 1, 1, 1, -6.54, 1, 1, 1, -7.49, 1, 1, 1, 1, 1, -6.54, 20.26, -14.03, 1, 1, 1},
    {1, 44.94, 20.26, 33.6, 1, 1, -6.54, 20.26, 1, 1, 1, 1, 20.26, 20.26, 1, 20.26, 1, 1, -14.03, 1},
    {1, 1, 13.34, 1, 1, 1, 1, 1, -14.03, 1, 1, 1, 20.26, 1, 1, 1, 1, 1, 1, 33.601},
    {-7.49, 1, 1, -6.54, 1, 13.34, 1, -7.49, -7.49, 1, 1, -7.49, 1, 1, 1, 1, -7.49, 1, 13.34, -7.49},
    {1, 1, 1, 1, -9.37, -9.37, 1, 44.94, 24.68, 1, 1, 24.68, -1.88, 1, 1, 1, -6.54, 1, -1.88, 44.94},
    {1, 1, 1, 44.94, 1, 1, 13.34, 1, -7.49, 20.26, 1, 1, -1.88, 1, 1, 1, 1, -7.49, 1, 1},
    {1, 1, 1, 1, 1, -7.49, 1, -7.49, 1, -7.49, 33.6, 1, -6.54, 24.64, 33.6, 1, 1, -7.49, 1, 1},
    {1, 1, 1, 1, 1, 1, 1, 1, -7.49, 1, 1, 1, 20.26, 33.6, 20.26, 1, 1, 1, 24.68, 1},
    {13.34, 1, 1, 1, 1, 1, 58.28, 1, 1, 1, -1.88, 1, 44.94, -6.54, -6.54, 44.94, -1.88, 1, 1, 24.68},
    {1, -1.88, 1, 1, -14.03, -14.03, 1, 44.94, 24.68, 1, 1, 1, -1.88, -6.54, 1, 1, -7.49, 1, -9.37, 1},
    {20.26, -6.54, -6.54, 18.38, 20.26, 1, 1, 1, 1, 1, -6.54, 1, 20.26, 20.26, -6.54, 20.26, 1, 20.26, -1.88, 1},
    {1, -6.54, 20.26, 20.26, -6.54, 1, 1, 1, 1, 1, 1, 1, 20.26, 20.26, 1, 44.94, 1, -6.54, 1, -6.54},
    {1, 1, 1, 1, 1, -7.49, 20.26, 1, 1, 1, 1, 13.34, 20.26, 20.26, 58.28, 44.94, 1, 1, 58.28, -6.54},
    {1, 33.6, 1, 20.26, 1, 1, 1, 1, 1, 1, 1, 1, 44.94, 20.26, 20.26, 20.26, 1, 1, 1, 1},
    {1, 1, 1, 20.26, 13.34, -7.49, 1, 1, 1, 1, 1, -14.03, 1, -6.54, 1, 1, 1, 1, -14.03, 1},
    {1, 1, -14.03, 1, 1, -7.49, 1, 1, -1.88, 1, 1, 1, 20.26, 1, 1, 1, -7.49, 1, 1, -6.54},
    {-14.03, 1, 1, 1, 1, -9.37, 24.68, 1, 1, 13.34, 24.68, 13.34, 1, 1, 1, 1, -14.03, -7.49, 1, 1},
    {24.68, 1, 24.68, -6.54, 1, -7.49, 13.34, 1, 1, 1, 44.94, 1, 13.34, 1, -15.91, 1, -7.49, 1, -9.37, 13.34},
};

double positive_fraction(double ph, double pk) { return 1.0 / (std::pow(10.0, ph - pk) + 1.0); }
double negative_fraction(double ph, double pk) { return 1.0 / (std::pow(10.0, pk - ph) + 1.0); }

double n_terminal_pk(char c) {
  switch (c) {
    case 'A': return 7.59;
    case 'M': return 7.0;
    case 'S': return 6.93;
    case 'P': return 8.36;
    case 'T': return 6.82;
    case 'V': return 7.44;
    case 'E': return 7.7;
    default: return 7.5;
  }
}

double c_terminal_pk(char c) {
  switch (c) {
    case 'D': return 4.55;
    case 'E': return 4.75;
    default: return 3.55;
  }
}

void require_nonempty(const Sequence& x) {
  if (x.empty()) throw Error(ErrorKind::EmptySequence, "property of an empty sequence");
}

}  // namespace

double molecular_weight(const Sequence& x) {
  require_nonempty(x);
  double m = kWater;
  for (const auto a : x) m += kFreeMass[a.index()] - kWater;
  return m;
}

double aromaticity(const Sequence& x) {
  require_nonempty(x);
  std::size_t n = 0;
  for (const auto a : x) n += (a.code() == 'F' || a.code() == 'W' || a.code() == 'Y');
  return static_cast<double>(n) / static_cast<double>(x.size());
}

double kyte_doolittle(AminoAcid a) { return kKyteDoolittle[a.index()]; }

double gravy(const Sequence& x) {
  require_nonempty(x);
  double s = 0.0;
  for (const auto a : x) s += kyte_doolittle(a);
  return s / static_cast<double>(x.size());
}

double instability_index(const Sequence& x) {
  if (x.size() < 2) throw Error(ErrorKind::LengthTooShort, "instability index needs at least 2 residues");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) s += kDiwv[x[i].index()][x[i + 1].index()];
  return 10.0 / static_cast<double>(x.size()) * s;
}

double net_charge(const Sequence& x, double ph) {
  require_nonempty(x);
  double pos = positive_fraction(ph, n_terminal_pk(x[0].code()));
  double neg = negative_fraction(ph, c_terminal_pk(x[x.size() - 1].code()));
  for (const auto a : x) {
    switch (a.code()) {
      case 'K': pos += positive_fraction(ph, 10.0); break;
      case 'R': pos += positive_fraction(ph, 12.0); break;
      case 'H': pos += positive_fraction(ph, 5.98); break;
      case 'D': neg += negative_fraction(ph, 4.05); break;
      case 'E': neg += negative_fraction(ph, 4.45); break;
      case 'C': neg += negative_fraction(ph, 9.0); break;
      case 'Y': neg += negative_fraction(ph, 10.0); break;
      default: break;
    }
  }
  return pos - neg;
}

double isoelectric_point(const Sequence& x, double tolerance) {
  // Net charge is strictly decreasing in pH.
  double lo = 0.0, hi = 14.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (net_charge(x, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

PropertyVector physicochemical(const Sequence& x) {
  PropertyVector p;
  p.instability_index = instability_index(x);
  p.molecular_weight = molecular_weight(x);
  p.aromaticity = aromaticity(x);
  p.isoelectric_point = isoelectric_point(x);
  p.gravy = gravy(x);
  return p;
}

bool PropertyBands::contains(const PropertyVector& p) const {
  const auto v = p.values();
  for (std::size_t k = 0; k < PropertyVector::kCount; ++k) {
    if (v[k] < lo[k] || v[k] > hi[k]) return false;
  }
  return true;
}

PropertyBands property_bands(std::span<const Sequence> reference) {
  if (reference.empty()) throw Error(ErrorKind::EmptyReference, "validity needs a reference set");
  if (reference.size() < 200) {
    log_warn("reference set has " + std::to_string(reference.size()) +
             " members; percentile bands are unstable below 200");
  }
  std::array<std::vector<double>, PropertyVector::kCount> cols;
  for (const auto& s : reference) {
    const auto v = physicochemical(s).values();
    for (std::size_t k = 0; k < v.size(); ++k) cols[k].push_back(v[k]);
  }
  PropertyBands b;
  b.reference_size = reference.size();
  const double last = static_cast<double>(reference.size() - 1);
  const auto lo_idx = static_cast<std::size_t>(std::floor(0.005 * last));
  const auto hi_idx = static_cast<std::size_t>(std::ceil(0.995 * last));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    std::sort(cols[k].begin(), cols[k].end());
    b.lo[k] = cols[k][lo_idx];
    b.hi[k] = cols[k][hi_idx];
  }
  return b;
}

ValidityResult validity(std::span<const Sequence> candidates, const PropertyBands& bands) {
  ValidityResult r;
  r.total = candidates.size();
  r.small_reference = bands.reference_size < 200;
  if (candidates.empty()) {
    r.empty_candidates = true;
    return r;
  }
  for (const auto& c : candidates) {
    if (c.size() < 2) continue;
    if (bands.contains(physicochemical(c))) ++r.valid;
  }
  r.percent = 100.0 * static_cast<double>(r.valid) / static_cast<double>(r.total);
  return r;
}

ValidityResult validity(std::span<const Sequence> candidates, std::span<const Sequence> reference) {
  return validity(candidates, property_bands(reference));
}

}  // namespace prospero
