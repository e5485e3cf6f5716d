#include "dmabep/signal_space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "dmabep/errors.hpp"

namespace dmabep {

namespace {

std::uint32_t gray(std::uint32_t v) { return v ^ (v >> 1); }

struct AxisKey {
  int re;
  int im;
  auto operator<=>(const AxisKey&) const = default;
};

struct PositionTerm {
  AxisKey key;
  double count = 0.0;    // ordered symbol pairs with this difference
  double hamming = 0.0;  // summed label distance over those pairs
};

}  // namespace

Alphabet build_alphabet(std::size_t order, std::size_t n_streams) {
  if (n_streams == 0) {
    throw std::invalid_argument("build_alphabet: number of streams must be positive");
  }
  Alphabet a;
  a.order = order;
  double raw_energy = 0.0;
  if (order == 2) {
    a.bits_per_symbol = 1;
    a.lattice_re = {1, -1};
    a.lattice_im = {0, 0};
    a.bit_labels = {0, 1};
    raw_energy = 1.0;
  } else if (order == 4 || order == 16 || order == 64) {
    const auto side = static_cast<std::uint32_t>(std::lround(std::sqrt(static_cast<double>(order))));
    const auto axis_bits = static_cast<std::uint32_t>(std::countr_zero(side));
    a.bits_per_symbol = 2 * axis_bits;
    for (std::uint32_t ii = 0; ii < side; ++ii) {
      for (std::uint32_t qi = 0; qi < side; ++qi) {
        a.lattice_re.push_back(2 * static_cast<int>(ii) - static_cast<int>(side - 1));
        a.lattice_im.push_back(2 * static_cast<int>(qi) - static_cast<int>(side - 1));
        a.bit_labels.push_back((gray(ii) << axis_bits) | gray(qi));
      }
    }
    raw_energy = 2.0 * (static_cast<double>(side) * side - 1.0) / 3.0;
  } else {
    throw std::invalid_argument("build_alphabet: unsupported alphabet size " + std::to_string(order) +
                                " (expected 2, 4, 16 or 64)");
  }
  a.scale = std::sqrt(1.0 / (static_cast<double>(n_streams) * raw_energy));
  a.points.resize(static_cast<Eigen::Index>(order));
  for (std::size_t s = 0; s < order; ++s) {
    a.points(static_cast<Eigen::Index>(s)) = a.scale * cd(a.lattice_re[s], a.lattice_im[s]);
  }
  return a;
}

VectorSet enumerate_vectors(const Alphabet& alphabet, std::size_t n_streams, std::size_t budget) {
  if (n_streams == 0) {
    throw std::invalid_argument("enumerate_vectors: number of streams must be positive");
  }
  const std::size_t M = alphabet.order;
  std::size_t n_vec = 1;
  for (std::size_t i = 0; i < n_streams; ++i) {
    if (n_vec > budget / M) {
      throw ResourceLimitError("enumerate_vectors: N_vec = " + std::to_string(M) + "^" +
                               std::to_string(n_streams) + " exceeds budget " +
                               std::to_string(budget));
    }
    n_vec *= M;
  }
  if (n_vec > budget) {
    throw ResourceLimitError("enumerate_vectors: N_vec = " + std::to_string(n_vec) +
                             " exceeds budget " + std::to_string(budget));
  }

  VectorSet v;
  v.alphabet_ = alphabet;
  v.bits_per_vector_ = n_streams * alphabet.bits_per_symbol;
  v.vectors_.resize(static_cast<Eigen::Index>(n_streams), static_cast<Eigen::Index>(n_vec));
  v.symbols_.resize(n_vec * n_streams);
  v.labels_.resize(n_vec);
  for (std::size_t m = 0; m < n_vec; ++m) {
    std::size_t rest = m;
    std::uint64_t label = 0;
    for (std::size_t pos = n_streams; pos-- > 0;) {
      const std::size_t s = rest % M;
      rest /= M;
      v.symbols_[m * n_streams + pos] = s;
      v.vectors_(static_cast<Eigen::Index>(pos), static_cast<Eigen::Index>(m)) =
          alphabet.points(static_cast<Eigen::Index>(s));
    }
    for (std::size_t pos = 0; pos < n_streams; ++pos) {
      label = (label << alphabet.bits_per_symbol) | alphabet.bit_labels[v.symbols_[m * n_streams + pos]];
    }
    v.labels_[m] = label;
  }
  return v;
}

int VectorSet::hamming(std::size_t m, std::size_t n) const {
  return std::popcount(labels_[m] ^ labels_[n]);
}

Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> VectorSet::hamming_table() const {
  const auto n = static_cast<Eigen::Index>(n_vectors());
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> D(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = 0; k < n; ++k) {
      D(m, k) = static_cast<std::uint8_t>(hamming(static_cast<std::size_t>(m), static_cast<std::size_t>(k)));
    }
  }
  return D;
}

Eigen::VectorXcd difference(const VectorSet& vset, std::size_t m, std::size_t n) {
  if (m >= vset.n_vectors() || n >= vset.n_vectors()) {
    throw std::invalid_argument("difference: index out of range");
  }
  if (m == n) {
    throw std::invalid_argument("difference: pairs with m == n are excluded");
  }
  return vset.vector(m) - vset.vector(n);
}

DifferenceSet build_difference_set(const VectorSet& vset) {
  const Alphabet& a = vset.alphabet();
  const std::size_t nd = vset.n_streams();

  std::map<AxisKey, PositionTerm> per_position;
  for (std::size_t s = 0; s < a.order; ++s) {
    for (std::size_t t = 0; t < a.order; ++t) {
      const AxisKey key{a.lattice_re[s] - a.lattice_re[t], a.lattice_im[s] - a.lattice_im[t]};
      auto& term = per_position[key];
      term.key = key;
      term.count += 1.0;
      term.hamming += std::popcount(a.bit_labels[s] ^ a.bit_labels[t]);
    }
  }
  std::vector<PositionTerm> terms;
  terms.reserve(per_position.size());
  for (const auto& [key, term] : per_position) terms.push_back(term);
  const auto zero_it = std::find_if(terms.begin(), terms.end(),
                                    [](const PositionTerm& t) { return t.key == AxisKey{0, 0}; });
  const auto zero_index = static_cast<std::size_t>(zero_it - terms.begin());

  const std::size_t n_keys = terms.size();
  std::size_t n_tuples = 1;
  for (std::size_t i = 0; i < nd; ++i) n_tuples *= n_keys;

  std::vector<Eigen::VectorXcd> deltas;
  std::vector<double> weights;
  deltas.reserve(n_tuples / 2);
  weights.reserve(n_tuples / 2);
  DifferenceSet out;

  std::vector<std::size_t> digits(nd, 0);
  for (std::size_t t = 0; t < n_tuples; ++t) {
    std::size_t rest = t;
    for (std::size_t pos = nd; pos-- > 0;) {
      digits[pos] = rest % n_keys;
      rest /= n_keys;
    }
    // keys are sorted, so the first non-zero digit decides the sign class
    std::size_t lead = 0;
    while (lead < nd && digits[lead] == zero_index) ++lead;
    if (lead == nd) continue;

    double weight = 0.0;
    for (std::size_t i = 0; i < nd; ++i) {
      double w = terms[digits[i]].hamming;
      for (std::size_t j = 0; j < nd; ++j) {
        if (j != i) w *= terms[digits[j]].count;
      }
      weight += w;
    }
    out.total_weight += weight;
    if (digits[lead] < zero_index) continue;

    Eigen::VectorXcd delta(static_cast<Eigen::Index>(nd));
    for (std::size_t i = 0; i < nd; ++i) {
      const AxisKey& k = terms[digits[i]].key;
      delta(static_cast<Eigen::Index>(i)) = a.scale * cd(k.re, k.im);
    }
    if (weight == 0.0) continue;
    deltas.push_back(std::move(delta));
    weights.push_back(2.0 * weight);
  }

  out.deltas.resize(static_cast<Eigen::Index>(nd), static_cast<Eigen::Index>(deltas.size()));
  out.weights.resize(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    out.deltas.col(static_cast<Eigen::Index>(k)) = deltas[k];
    out.weights(static_cast<Eigen::Index>(k)) = weights[k];
  }
  return out;
}

}  // namespace dmabep
