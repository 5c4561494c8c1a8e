#include "prospero/dataset.hpp"

#include "prospero/csv.hpp"
#include "prospero/error.hpp"

#include <fstream>
#include <sstream>

namespace prospero {

bool Dataset::add(Sequence sequence, double fitness, int round) {
  if (!records_.empty() && sequence.size() != sequence_length()) {
    throw Error(ErrorKind::LengthMismatch, "dataset length " + std::to_string(sequence_length()) +
                                               ", record length " + std::to_string(sequence.size()));
  }
  if (index_.contains(sequence)) return false;
  index_.emplace(sequence, records_.size());
  records_.push_back(Record{std::move(sequence), fitness, round});
  return true;
}

std::optional<double> Dataset::fitness_of(const Sequence& s) const {
  const auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return records_[it->second].fitness;
}

std::size_t Dataset::best_index() const {
  if (records_.empty()) throw Error(ErrorKind::EmptyDataset, "no records");
  std::size_t best = 0;
  for (std::size_t i = 1; i < records_.size(); ++i) {
    if (records_[i].fitness > records_[best].fitness) best = i;
  }
  return best;
}

double Dataset::fitness_variance() const {
  if (records_.empty()) return 0.0;
  double mean = 0.0;
  for (const auto& r : records_) mean += r.fitness;
  mean /= static_cast<double>(records_.size());
  double ss = 0.0;
  for (const auto& r : records_) ss += (r.fitness - mean) * (r.fitness - mean);
  return ss / static_cast<double>(records_.size());
}

std::vector<Sequence> Dataset::sequences() const {
  std::vector<Sequence> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.sequence);
  return out;
}

std::vector<double> Dataset::fitness_values() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.fitness);
  return out;
}

std::string Dataset::to_csv() const {
  std::ostringstream os;
  os << "sequence,fitness,round\n";
  for (const auto& r : records_) {
    os << r.sequence.str() << ',' << format_double(r.fitness) << ',' << r.round << '\n';
  }
  return os.str();
}

Dataset Dataset::from_csv_text(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw Error(ErrorKind::ParseError, "missing header");
  const auto& header = rows.front();
  if (header.size() < 2 || header[0] != "sequence" || header[1] != "fitness") {
    throw Error(ErrorKind::ParseError, "header must start with sequence,fitness");
  }
  const bool has_round = header.size() >= 3 && header[2] == "round";
  Dataset data;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < 2) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(r + 1) + ": too few fields");
    }
    Sequence s;
    try {
      s = parse_sequence(row[0]);
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(r + 1) + ": " + e.what());
    }
    const double fitness = parse_double_field(row[1], r + 1);
    const int round = has_round && row.size() >= 3 ? static_cast<int>(parse_double_field(row[2], r + 1)) : 0;
    try {
      if (!data.add(std::move(s), fitness, round)) {
        throw Error(ErrorKind::ParseError,
                    "line " + std::to_string(r + 1) + ": DuplicateKey " + row[0]);
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ParseError) throw;
      throw Error(ErrorKind::ParseError, "line " + std::to_string(r + 1) + ": " + e.what());
    }
  }
  return data;
}

Dataset Dataset::from_csv_file(const std::string& path) {
  return from_csv_text(read_text_file(path));
}

}  // namespace prospero
