#include "prospero/sequence.hpp"

#include "prospero/error.hpp"

#include <algorithm>
#include <cassert>

namespace prospero {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptySequence: return "EmptySequence";
    case ErrorKind::NonCanonicalResidue: return "NonCanonicalResidue";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::PositionOutOfRange: return "PositionOutOfRange";
    case ErrorKind::PositionNotMasked: return "PositionNotMasked";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DegenerateTargets: return "DegenerateTargets";
    case ErrorKind::ZeroMaskCount: return "ZeroMaskCount";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::MixedLengths: return "MixedLengths";
    case ErrorKind::ExternalPriorUnavailable: return "ExternalPriorUnavailable";
    case ErrorKind::ProtocolError: return "ProtocolError";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownSequence: return "UnknownSequence";
    case ErrorKind::NegativeVariance: return "NegativeVariance";
    case ErrorKind::ExhaustedSpace: return "ExhaustedSpace";
    case ErrorKind::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::EmptyReference: return "EmptyReference";
    case ErrorKind::LengthTooShort: return "LengthTooShort";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

constexpr std::array<int, 256> make_lookup() {
  std::array<int, 256> table{};
  for (auto& v : table) v = -1;
  for (std::size_t i = 0; i < kAlphabet.size(); ++i) {
    table[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int>(i);
  }
  return table;
}

constexpr auto kLookup = make_lookup();

// Alphabet indices: A0 C1 D2 E3 F4 G5 H6 I7 K8 L9 M10 N11 P12 Q13 R14 S15 T16 V17 W18 Y19
constexpr std::array<std::size_t, 2> kNegative = {2, 3};
constexpr std::array<std::size_t, 3> kPositive = {6, 8, 14};
constexpr std::array<std::size_t, 15> kNeutral = {0, 1, 4, 5, 7, 9, 10, 11, 12, 13, 15, 16, 17, 18, 19};

}  // namespace

int alphabet_index(char code) noexcept { return kLookup[static_cast<unsigned char>(code)]; }

AminoAcid AminoAcid::from_code(char code) {
  const int idx = alphabet_index(code);
  if (idx < 0) {
    throw Error(ErrorKind::NonCanonicalResidue, std::string("residue '") + code + "'");
  }
  return from_index(static_cast<std::size_t>(idx));
}

ChargeClass charge_class(AminoAcid residue) {
  switch (residue.code()) {
    case 'D':
    case 'E': return ChargeClass::Negative;
    case 'R':
    case 'K':
    case 'H': return ChargeClass::Positive;
    default: return ChargeClass::Neutral;
  }
}

const char* to_string(ChargeClass cls) noexcept {
  switch (cls) {
    case ChargeClass::Negative: return "negative";
    case ChargeClass::Positive: return "positive";
    case ChargeClass::Neutral: return "neutral";
  }
  return "?";
}

std::span<const std::size_t> class_members(ChargeClass cls) {
  switch (cls) {
    case ChargeClass::Negative: return kNegative;
    case ChargeClass::Positive: return kPositive;
    case ChargeClass::Neutral: return kNeutral;
  }
  return {};
}

std::string Sequence::str() const {
  std::string out(residues_.size(), '?');
  for (std::size_t i = 0; i < residues_.size(); ++i) out[i] = residues_[i].code();
  return out;
}

Sequence parse_sequence(std::string_view text) {
  if (text.empty()) throw Error(ErrorKind::EmptySequence, "empty sequence");
  std::vector<AminoAcid> residues;
  residues.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const int idx = alphabet_index(text[i]);
    if (idx < 0) {
      throw Error(ErrorKind::NonCanonicalResidue,
                  "position " + std::to_string(i + 1) + " char '" + text[i] + "'");
    }
    residues.push_back(AminoAcid::from_index(static_cast<std::size_t>(idx)));
  }
  return Sequence(std::move(residues));
}

std::size_t hamming(const Sequence& a, const Sequence& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::LengthMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
  return d;
}

Eigen::VectorXd encode_one_hot(const Sequence& x) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kAlphabetSize * x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    v(static_cast<Eigen::Index>(kAlphabetSize * i + x[i].index())) = 1.0;
  }
  return v;
}

std::size_t SequenceHash::operator()(const Sequence& s) const noexcept {
  // FNV-1a over residue indices.
  std::size_t h = 1469598103934665603ull;
  for (const AminoAcid a : s.residues()) {
    h ^= a.index();
    h *= 1099511628211ull;
  }
  return h;
}

MaskedSequence::MaskedSequence(const Sequence& base, std::span<const std::size_t> positions) {
  slots_.resize(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) slots_[i] = static_cast<std::int8_t>(base[i].index());
  for (const std::size_t p : positions) {
    if (p >= base.size()) {
      throw Error(ErrorKind::PositionOutOfRange,
                  "position " + std::to_string(p + 1) + " > length " + std::to_string(base.size()));
    }
    slots_[p] = kMask;
  }
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i] == kMask) mask_set_.push_back(i);
  }
}

AminoAcid MaskedSequence::at(std::size_t i) const {
  assert(!is_masked(i));
  return AminoAcid::from_index(static_cast<std::size_t>(slots_[i]));
}

void MaskedSequence::fill(std::size_t i, AminoAcid residue) {
  const auto it = std::lower_bound(mask_set_.begin(), mask_set_.end(), i);
  if (it == mask_set_.end() || *it != i) {
    throw Error(ErrorKind::PositionNotMasked, "position " + std::to_string(i + 1));
  }
  mask_set_.erase(it);
  slots_[i] = static_cast<std::int8_t>(residue.index());
}

Sequence MaskedSequence::complete() const {
  if (!mask_set_.empty()) {
    throw Error(ErrorKind::PositionNotMasked,
                std::to_string(mask_set_.size()) + " positions still masked");
  }
  std::vector<AminoAcid> residues(slots_.size());
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    residues[i] = AminoAcid::from_index(static_cast<std::size_t>(slots_[i]));
  }
  return Sequence(std::move(residues));
}

std::vector<int> MaskedSequence::tokens() const { return {slots_.begin(), slots_.end()}; }

std::string MaskedSequence::str() const {
  std::string out(slots_.size(), '#');
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i] >= 0) out[i] = kAlphabet[static_cast<std::size_t>(slots_[i])];
  }
  return out;
}

Permutation build_permutation(const MaskedSequence& masked, const Sequence& wild_type) {
  if (masked.size() != wild_type.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(masked.size()) + " vs " +
                                               std::to_string(wild_type.size()));
  }
  Permutation perm;
  perm.order.reserve(masked.size());
  std::vector<std::size_t> negative, positive, neutral;
  for (std::size_t i = 0; i < masked.size(); ++i) {
    if (!masked.is_masked(i)) {
      perm.order.push_back(i);
      continue;
    }
    switch (charge_class(wild_type[i])) {
      case ChargeClass::Negative: negative.push_back(i); break;
      case ChargeClass::Positive: positive.push_back(i); break;
      case ChargeClass::Neutral: neutral.push_back(i); break;
    }
  }
  perm.boundary = perm.order.size();
  for (const auto* block : {&negative, &positive, &neutral}) {
    perm.order.insert(perm.order.end(), block->begin(), block->end());
  }
  return perm;
}

}  // namespace prospero
