#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dmabep/dma_model.hpp"

namespace dmabep {

/// BPSK or Gray-mapped square QAM, scaled so that a vector of `n_streams`
/// i.i.d. uniform symbols has unit expected energy.
struct Alphabet {
  std::size_t order = 0;                 // M
  std::size_t bits_per_symbol = 0;       // log2(M)
  double scale = 1.0;                    // point = scale * (lattice_re + j lattice_im)
  Eigen::VectorXcd points;
  std::vector<std::uint32_t> bit_labels;
  std::vector<int> lattice_re;
  std::vector<int> lattice_im;
};

/// All M^{N_d} transmit vectors in lexicographic symbol order (position 0 most
/// significant), with their concatenated bit labels.
class VectorSet {
 public:
  std::size_t n_vectors() const { return static_cast<std::size_t>(vectors_.cols()); }
  std::size_t n_streams() const { return static_cast<std::size_t>(vectors_.rows()); }
  std::size_t bits_per_vector() const { return bits_per_vector_; }

  /// Column m is x_m.
  const Eigen::MatrixXcd& vectors() const { return vectors_; }
  auto vector(std::size_t m) const { return vectors_.col(static_cast<Eigen::Index>(m)); }

  /// Symbol index of position i in vector m.
  std::size_t symbol(std::size_t m, std::size_t position) const {
    return symbols_[m * n_streams() + position];
  }
  std::uint64_t label(std::size_t m) const { return labels_[m]; }

  /// Bit-level Hamming distance D(x_m, x_n).
  int hamming(std::size_t m, std::size_t n) const;

  /// Dense D table. Intended for small sets; costs N_vec^2 bytes.
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> hamming_table() const;

  const Alphabet& alphabet() const { return alphabet_; }

 private:
  friend VectorSet enumerate_vectors(const Alphabet&, std::size_t, std::size_t);
  Alphabet alphabet_;
  std::size_t bits_per_vector_ = 0;
  Eigen::MatrixXcd vectors_;
  std::vector<std::size_t> symbols_;
  std::vector<std::uint64_t> labels_;
};

/// Distinct non-zero difference vectors x_m - x_n, each paired with the sum of
/// D(x_m, x_n) over every ordered pair producing it. A difference and its
/// negation give identical pairwise distances, so only one representative of
/// each +/- pair is kept and its weight covers both.
struct DifferenceSet {
  Eigen::MatrixXcd deltas;      // N_d x K
  Eigen::VectorXd weights;      // K, exact integers
  double total_weight = 0.0;    // sum over all ordered pairs m != n of D(x_m, x_n)

  std::size_t size() const { return static_cast<std::size_t>(deltas.cols()); }
};

inline constexpr std::size_t kDefaultVectorBudget = std::size_t{1} << 16;

/// Throws std::invalid_argument for M outside {2, 4, 16, 64} or n_streams == 0.
Alphabet build_alphabet(std::size_t order, std::size_t n_streams);

/// Throws ResourceLimitError when M^{N_d} exceeds `budget`.
VectorSet enumerate_vectors(const Alphabet& alphabet, std::size_t n_streams,
                            std::size_t budget = kDefaultVectorBudget);

/// x_m - x_n. Throws std::invalid_argument for m == n or out-of-range indices.
Eigen::VectorXcd difference(const VectorSet& vset, std::size_t m, std::size_t n);

/// Groups all ordered pairs of `vset` by their difference vector. Exact; built
/// per symbol position and combined, without visiting the N_vec^2 pairs.
DifferenceSet build_difference_set(const VectorSet& vset);

}  // namespace dmabep
