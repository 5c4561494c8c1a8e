#pragma once

// Residue alphabet, sequences, masked sequences, charge classes and the
// unmasking permutation shared by every other part of the engine.
//
// Positions are 0-based in this API. Every external format (JSON traces,
// wire protocol, CLI output) uses 1-based positions.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prospero {

inline constexpr std::size_t kAlphabetSize = 20;
inline constexpr std::string_view kAlphabet = "ACDEFGHIKLMNPQRSTVWY";

class AminoAcid {
 public:
  constexpr AminoAcid() = default;

  /// Throws NonCanonicalResidue (position 0) for anything outside the 20 letters.
  static AminoAcid from_code(char code);
  static constexpr AminoAcid from_index(std::size_t index) {
    return AminoAcid(static_cast<std::uint8_t>(index));
  }

  constexpr std::size_t index() const { return index_; }
  constexpr char code() const { return kAlphabet[index_]; }

  friend constexpr bool operator==(AminoAcid a, AminoAcid b) = default;

 private:
  constexpr explicit AminoAcid(std::uint8_t index) : index_(index) {}
  std::uint8_t index_ = 0;
};

/// Index of `code` in the alphabet, or -1.
int alphabet_index(char code) noexcept;

enum class ChargeClass { Negative, Positive, Neutral };

ChargeClass charge_class(AminoAcid residue);
const char* to_string(ChargeClass cls) noexcept;

/// Alphabet indices of the residues in `cls`, ascending.
std::span<const std::size_t> class_members(ChargeClass cls);

class Sequence {
 public:
  Sequence() = default;
  explicit Sequence(std::vector<AminoAcid> residues) : residues_(std::move(residues)) {}

  std::size_t size() const { return residues_.size(); }
  bool empty() const { return residues_.empty(); }
  AminoAcid operator[](std::size_t i) const { return residues_[i]; }
  AminoAcid& operator[](std::size_t i) { return residues_[i]; }
  std::span<const AminoAcid> residues() const { return residues_; }
  auto begin() const { return residues_.begin(); }
  auto end() const { return residues_.end(); }

  std::string str() const;

  friend bool operator==(const Sequence&, const Sequence&) = default;
  friend bool operator<(const Sequence& a, const Sequence& b) {
    return std::lexicographical_compare(
        a.residues_.begin(), a.residues_.end(), b.residues_.begin(), b.residues_.end(),
        [](AminoAcid x, AminoAcid y) { return x.index() < y.index(); });
  }

 private:
  std::vector<AminoAcid> residues_;
};

/// Throws EmptySequence or NonCanonicalResidue (1-based position in the message).
Sequence parse_sequence(std::string_view text);

/// Throws LengthMismatch.
std::size_t hamming(const Sequence& a, const Sequence& b);

/// Flattened one-hot encoding: entry 20*i + index(x[i]) is 1.
Eigen::VectorXd encode_one_hot(const Sequence& x);

struct SequenceHash {
  std::size_t operator()(const Sequence& s) const noexcept;
};

/// A sequence with some positions replaced by a mask sentinel.
class MaskedSequence {
 public:
  MaskedSequence() = default;

  /// Copies `base` and masks every position in `positions` (0-based, any order,
  /// duplicates ignored). Throws PositionOutOfRange.
  MaskedSequence(const Sequence& base, std::span<const std::size_t> positions);
  MaskedSequence(const Sequence& base, std::initializer_list<std::size_t> positions)
      : MaskedSequence(base, std::span<const std::size_t>(positions.begin(), positions.size())) {}

  std::size_t size() const { return slots_.size(); }
  bool is_masked(std::size_t i) const { return slots_[i] < 0; }
  /// Residue of an unmasked slot.
  AminoAcid at(std::size_t i) const;
  std::int8_t token(std::size_t i) const { return slots_[i]; }

  /// Sorted 0-based masked positions.
  const std::vector<std::size_t>& mask_set() const { return mask_set_; }
  std::size_t masked_count() const { return mask_set_.size(); }

  /// Fills a masked slot; the position leaves the mask set.
  void fill(std::size_t i, AminoAcid residue);

  /// Throws PositionNotMasked if any slot is still masked.
  Sequence complete() const;

  /// Wire tokens: alphabet index or -1 for mask.
  std::vector<int> tokens() const;

  /// Residues with '#' at masked positions.
  std::string str() const;

  friend bool operator==(const MaskedSequence&, const MaskedSequence&) = default;

  static constexpr std::int8_t kMask = -1;

 private:
  std::vector<std::int8_t> slots_;
  std::vector<std::size_t> mask_set_;
};

/// Unmasking order: unmasked positions, then masked Negative, Positive and
/// Neutral positions (classes taken from the wild type), each block ascending.
struct Permutation {
  std::vector<std::size_t> order;
  std::size_t boundary = 0;  ///< order[0, boundary) are the unmasked positions.

  std::size_t masked_count() const { return order.size() - boundary; }
  std::span<const std::size_t> masked_order() const {
    return std::span(order).subspan(boundary);
  }
};

/// Throws LengthMismatch.
Permutation build_permutation(const MaskedSequence& masked, const Sequence& wild_type);

}  // namespace prospero
