#pragma once

#include "prospero/sequence.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace prospero {

struct Record {
  Sequence sequence;
  double fitness = 0.0;
  int round = 0;  ///< 0 for the initial dataset.
};

/// Growing labelled set. Sequences are unique; lengths are uniform.
class Dataset {
 public:
  Dataset() = default;

  /// Throws LengthMismatch. Returns false (and stores nothing) for a sequence
  /// that is already present.
  bool add(Sequence sequence, double fitness, int round = 0);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t sequence_length() const { return records_.empty() ? 0 : records_.front().sequence.size(); }
  const std::vector<Record>& records() const { return records_; }
  const Record& operator[](std::size_t i) const { return records_[i]; }

  bool contains(const Sequence& s) const { return index_.contains(s); }
  std::optional<double> fitness_of(const Sequence& s) const;

  /// Index of the highest-fitness record; earliest-added wins ties.
  /// Throws EmptyDataset.
  std::size_t best_index() const;

  /// Population variance of the fitness values.
  double fitness_variance() const;

  std::vector<Sequence> sequences() const;
  std::vector<double> fitness_values() const;

  /// CSV with header `sequence,fitness,round`.
  std::string to_csv() const;

  /// Accepts `sequence,fitness` or `sequence,fitness,round`. Throws ParseError.
  static Dataset from_csv_text(const std::string& text);
  static Dataset from_csv_file(const std::string& path);

 private:
  std::vector<Record> records_;
  std::unordered_map<Sequence, std::size_t, SequenceHash> index_;
};

}  // namespace prospero
