// Spectral analysis of the exact (enumerated) chain.
#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mrflearn/basis.hpp"
#include "mrflearn/matrix.hpp"
#include "mrflearn/support.hpp"

namespace mrflearn {

struct Spectrum {
  std::shared_ptr<const SupportIndex> support;
  std::vector<double> pi;
  std::vector<double> eigenvalues;  // descending
  DenseMatrix eigenvectors;         // row l is nu_l on the support, pi-orthonormal

  std::size_t size() const { return eigenvalues.size(); }
  std::span<const double> vector(std::size_t l) const { return eigenvectors.row(l); }
};

// Largest relative violation of pi(x) P(x,y) = pi(y) P(y,x) over all pairs.
double detailed_balance_violation(const TransitionMatrix& p, std::span<const double> pi);

// Throws NumericalError when detailed balance fails by more than 1e-8.
Spectrum eigendecompose(const TransitionMatrix& p, std::span<const double> pi);

// Eigenvalues (descending, same order as eigendecompose) and the Fourier
// coefficients <f_j, nu_l>_pi of each function f_j (rows of fs), computed
// without forming eigenvectors. Coefficients are determined up to the sign
// convention of each eigenvector, so only sign-invariant uses are meaningful.
struct SpectralProjection {
  std::vector<double> eigenvalues;
  DenseMatrix coefficients;  // (l, j)
};
SpectralProjection spectral_projection(const TransitionMatrix& p, std::span<const double> pi,
                                       const DenseMatrix& fs);

// Eigenvalues only, descending.
std::vector<double> chain_eigenvalues(const TransitionMatrix& p, std::span<const double> pi);

// Same result as spectral_projection for a single function f that is odd
// under the global spin flip, on an Ising chain with zero field. The flip
// commutes with the chain, so the problem splits into an even and an odd
// half of half the size; f only has weight on the odd half. Throws
// InputError when the symmetry does not hold.
SpectralProjection flip_symmetric_projection(const TransitionMatrix& p, std::span<const double> pi,
                                             std::span<const double> f);

double inner_product_pi(std::span<const double> f, std::span<const double> g,
                        std::span<const double> pi);
std::vector<double> fourier_coefficients(std::span<const double> f, const Spectrum& spec);

struct Block {
  std::size_t begin = 0;  // 0-based, half-open
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

struct BlockStructure {
  double gamma = 0.0;
  std::size_t max_block = 0;   // requested N
  double c = 0.0;              // requested c
  // Cut i_j: number of eigenvalues up to and including block j.
  std::vector<std::size_t> cuts;
  std::vector<Block> blocks;
  Block remainder;
  std::size_t achieved_n = 0;  // largest block size
  double achieved_c = 0.0;     // ln(lambda_{i_k}) / ln(gamma)
  bool discrete = false;
  std::string reason;          // why the spectrum is not discrete, if it is not
};

// Greedy left-to-right cuts wherever lambda_{j+1} / lambda_j <= gamma (a zero
// lambda_{j+1} counts as ratio 0), truncated to cuts with lambda_{i_j} >= gamma^c.
BlockStructure detect_blocks(std::span<const double> eigenvalues, double gamma, std::size_t n_max,
                             double c);

struct BlockBasis {
  Block block;
  std::vector<std::size_t> chosen;  // indices into the basis family
  DenseMatrix a;                    // a(m, l) = <g_chosen[m], nu_{block.begin + l}>
  double sigma_min = 0.0;
  double alpha = 0.0;               // 1 / sigma_min
  bool exhaustive = true;
};

struct UsefulBasisReport {
  std::vector<BlockBasis> blocks;
  double alpha = 0.0;  // max over blocks
};

// Smallest singular value of a (any shape), from the eigenvalues of the Gram matrix.
double smallest_singular_value(const DenseMatrix& a);

// g_values: row m holds g_m on the support (see tabulate).
UsefulBasisReport useful_basis_alpha(const DenseMatrix& g_values, const Spectrum& spec,
                                     const BlockStructure& blocks);
UsefulBasisReport useful_basis_alpha(const BasisFamily& family, const Spectrum& spec,
                                     const BlockStructure& blocks);

// P^t g by repeated matrix-vector products.
std::vector<double> exact_Pt_g(const TransitionMatrix& p, std::span<const double> g, std::size_t t);

inline constexpr std::size_t kDefaultDictionaryCap = 20000;

struct EigenReconstruction {
  std::size_t ell = 0;
  std::size_t tau_max = 0;
  DenseMatrix coefficients;  // (t, m)
  double residual = 0.0;     // || nu_ell - sum beta P^t g ||_pi
  double coefficient_mass = 0.0;
};

// Damped (1e-10) pi-weighted least squares over the dictionary {P^t g_m}.
EigenReconstruction reconstruct_eigenvector(const Spectrum& spec, const TransitionMatrix& p,
                                            const DenseMatrix& g_values, std::size_t ell,
                                            std::size_t tau_max,
                                            std::size_t dictionary_cap = kDefaultDictionaryCap);

struct Theorem1Bounds {
  double log_b = 0.0;
  double b = 0.0;            // +inf when it overflows
  double tau_max_real = 0.0;
  std::size_t tau_max = 0;   // saturates at SIZE_MAX
};

// B = (2 alpha N k)^((1+c)^(k+1)) * eps^(-(1+c)^k) and
// tau_max = k (1+c)^(k-1) (ln N + ln k + ln alpha + ln(1/eps)) / ln(1/gamma),
// with all hidden constants set to 1. Order-of-magnitude guidance only.
Theorem1Bounds theorem1_bounds(double n_max, double k, double gamma, double c, double alpha,
                               double epsilon);

}  // namespace mrflearn
