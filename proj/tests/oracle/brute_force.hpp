// Test-only reference routines. Plain nested vectors and explicit index
// loops; nothing here calls into the library under test.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace decohere::oracle {

using cd = std::complex<double>;
using Grid = std::vector<std::vector<cd>>;

inline Grid zeros(std::size_t d) { return Grid(d, std::vector<cd>(d, cd{0.0, 0.0})); }

inline Grid outer(const std::vector<cd>& amps) {
  Grid out = zeros(amps.size());
  for (std::size_t i = 0; i < amps.size(); ++i)
    for (std::size_t j = 0; j < amps.size(); ++j) out[i][j] = amps[i] * std::conj(amps[j]);
  return out;
}

inline int bit(std::size_t index, int qubit, int n) {
  return static_cast<int>((index >> (n - 1 - qubit)) & 1U);
}

// Reduced state on `keep` (ascending labels) by summing every (i, j) pair whose
// traced-out bits agree.
inline Grid partial_trace(const Grid& rho, int n, const std::vector<int>& keep) {
  const std::size_t dk = std::size_t{1} << keep.size();
  Grid out = zeros(dk);
  const std::size_t d = rho.size();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      bool traced_equal = true;
      for (int q = 0; q < n; ++q) {
        bool kept = false;
        for (int k : keep) kept = kept || (k == q);
        if (!kept && bit(i, q, n) != bit(j, q, n)) traced_equal = false;
      }
      if (!traced_equal) continue;
      std::size_t ri = 0, rj = 0;
      for (int k : keep) {
        ri = (ri << 1) | static_cast<std::size_t>(bit(i, k, n));
        rj = (rj << 1) | static_cast<std::size_t>(bit(j, k, n));
      }
      out[ri][rj] += rho[i][j];
    }
  }
  return out;
}

inline Grid kron(const Grid& a, const Grid& b) {
  Grid out = zeros(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k)
        for (std::size_t l = 0; l < b.size(); ++l)
          out[i * b.size() + k][j * b.size() + l] = a[i][j] * b[k][l];
  return out;
}

// Off-diagonal (i, j) scaled by prod over targets of exp(-gamma ell^2) for
// every target bit where i and j differ.
inline Grid dephase_by_hamming(const Grid& rho, int n, const std::vector<int>& targets,
                               double gamma, double ell) {
  Grid out = rho;
  const double per_flip = std::exp(-gamma * ell * ell);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    for (std::size_t j = 0; j < rho.size(); ++j) {
      int flips = 0;
      for (int q : targets) flips += bit(i, q, n) != bit(j, q, n) ? 1 : 0;
      out[i][j] *= std::pow(per_flip, flips);
    }
  }
  return out;
}

// Eigenvalues of a 2x2 Hermitian matrix, ascending.
inline std::array<double, 2> eig2(const Grid& m) {
  const double a = m[0][0].real(), d = m[1][1].real();
  const double c = std::abs(m[0][1]);
  const double mean = 0.5 * (a + d);
  const double half = std::sqrt(0.25 * (a - d) * (a - d) + c * c);
  return {mean - half, mean + half};
}

inline double shannon(const std::vector<double>& ps) {
  double s = 0.0;
  for (double p : ps)
    if (p > 0.0) s -= p * std::log(p);
  return s;
}

}  // namespace decohere::oracle
