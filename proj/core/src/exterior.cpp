#include "cmm/exterior.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

#include "cmm/errors.hpp"

namespace cmm {
namespace {

struct RankTable {
  std::vector<std::vector<std::uint32_t>> masks;  // per degree, lex order
  std::vector<std::uint32_t> rank;                // mask -> rank within its degree
};

void enumerate(int dim, int degree, int start, std::uint32_t mask, std::vector<std::uint32_t>& out) {
  if (degree == 0) {
    out.push_back(mask);
    return;
  }
  for (int i = start; i <= dim - degree; ++i) enumerate(dim, degree - 1, i + 1, mask | (1u << i), out);
}

const RankTable& rank_table(int dim) {
  static std::array<std::once_flag, kMaxFormDim + 1> flags;
  static std::array<std::unique_ptr<RankTable>, kMaxFormDim + 1> tables;
  std::call_once(flags[dim], [dim] {
    auto t = std::make_unique<RankTable>();
    t->masks.resize(dim + 1);
    t->rank.assign(std::size_t{1} << dim, 0);
    for (int k = 0; k <= dim; ++k) {
      enumerate(dim, k, 0, 0, t->masks[k]);
      for (std::size_t r = 0; r < t->masks[k].size(); ++r) t->rank[t->masks[k][r]] = static_cast<std::uint32_t>(r);
    }
    tables[dim] = std::move(t);
  });
  return *tables[dim];
}

// Sign of reordering e^A ∧ e^B into increasing order: one factor −1 for
// every pair (i in A, j in B) with i > j.
int merge_sign(std::uint32_t a, std::uint32_t b) {
  int inversions = 0;
  while (b) {
    int j = std::countr_zero(b);
    b &= b - 1;
    inversions += std::popcount(a >> (j + 1));
  }
  return (inversions & 1) ? -1 : 1;
}

struct WedgeTerm {
  std::uint32_t ia, ib, out;
  double sign;
};

const std::vector<WedgeTerm>& wedge_plan(int dim, int da, int db) {
  constexpr int S = kMaxFormDim + 1;
  static std::array<std::once_flag, S * S * S> flags;
  static std::array<std::unique_ptr<std::vector<WedgeTerm>>, S * S * S> plans;
  const int key = (dim * S + da) * S + db;
  std::call_once(flags[key], [&] {
    const RankTable& t = rank_table(dim);
    auto plan = std::make_unique<std::vector<WedgeTerm>>();
    const auto& ma = t.masks[da];
    const auto& mb = t.masks[db];
    for (std::uint32_t i = 0; i < ma.size(); ++i) {
      for (std::uint32_t j = 0; j < mb.size(); ++j) {
        if (ma[i] & mb[j]) continue;
        plan->push_back({i, j, t.rank[ma[i] | mb[j]], static_cast<double>(merge_sign(ma[i], mb[j]))});
      }
    }
    plans[key] = std::move(plan);
  });
  return *plans[key];
}

void check_dim(int dim) {
  if (dim <= 0 || dim % 2 != 0 || dim > kMaxFormDim)
    throw DimensionError("form dimension must be even and in [2, " + std::to_string(kMaxFormDim) +
                         "], got " + std::to_string(dim));
}


// Perfect matchings of {0..dim−1} with Pfaffian signs, as ranks of the pairs
// in the degree-2 lex order.
struct MatchingTable {
  std::vector<std::uint32_t> pairs;  // dim/2 entries per matching
  std::vector<double> signs;
};

std::uint32_t pair_rank(int dim, int i, int j) { return static_cast<std::uint32_t>(i * (2 * dim - i - 1) / 2 + (j - i - 1)); }

void matchings(int dim, std::vector<int>& rest, std::vector<std::uint32_t>& prefix, double sign, MatchingTable& t) {
  if (rest.empty()) {
    t.pairs.insert(t.pairs.end(), prefix.begin(), prefix.end());
    t.signs.push_back(sign);
    return;
  }
  const int first = rest[0];
  for (std::size_t j = 1; j < rest.size(); ++j) {
    std::vector<int> next;
    for (std::size_t k = 1; k < rest.size(); ++k)
      if (k != j) next.push_back(rest[k]);
    prefix.push_back(pair_rank(dim, first, rest[j]));
    matchings(dim, next, prefix, (j % 2 == 1) ? sign : -sign, t);
    prefix.pop_back();
  }
}

const MatchingTable& matching_table(int dim) {
  static std::array<std::once_flag, kMaxFormDim + 1> flags;
  static std::array<std::unique_ptr<MatchingTable>, kMaxFormDim + 1> tables;
  std::call_once(flags[dim], [dim] {
    auto t = std::make_unique<MatchingTable>();
    std::vector<int> all(dim);
    for (int i = 0; i < dim; ++i) all[i] = i;
    std::vector<std::uint32_t> prefix;
    matchings(dim, all, prefix, 1.0, *t);
    tables[dim] = std::move(t);
  });
  return *tables[dim];
}

}  // namespace

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

AlternatingForm::AlternatingForm(int dim, int degree) : dim_(dim), degree_(degree) {
  check_dim(dim);
  if (degree < 0 || degree > dim)
    throw DegreeError("degree " + std::to_string(degree) + " out of range for dimension " + std::to_string(dim));
  coeffs_.assign(binomial(dim, degree), 0.0);
}

AlternatingForm AlternatingForm::scalar(int dim, double value) {
  AlternatingForm f(dim, 0);
  f.coeffs_[0] = value;
  return f;
}

AlternatingForm AlternatingForm::basis(int dim, std::initializer_list<int> indices) {
  AlternatingForm f(dim, static_cast<int>(indices.size()));
  std::uint32_t mask = 0;
  double sign = 1.0;
  for (int i : indices) {
    if (i < 0 || i >= dim) throw DimensionError("basis index out of range");
    std::uint32_t bit = 1u << i;
    if (mask & bit) return f;
    sign *= merge_sign(mask, bit);
    mask |= bit;
  }
  f.coeffs_[rank_table(dim).rank[mask]] = sign;
  return f;
}

AlternatingForm AlternatingForm::from_matrix(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw DimensionError("2-form matrix must be square");
  const int dim = static_cast<int>(a.rows());
  AlternatingForm f(dim, 2);
  const RankTable& t = rank_table(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) f.coeffs_[t.rank[(1u << i) | (1u << j)]] = a(i, j);
  return f;
}

AlternatingForm AlternatingForm::standard_symplectic(int n, bool interleaved) {
  AlternatingForm f(2 * n, 2);
  const RankTable& t = rank_table(2 * n);
  for (int i = 0; i < n; ++i) {
    std::uint32_t mask = interleaved ? (3u << (2 * i)) : ((1u << i) | (1u << (n + i)));
    f.coeffs_[t.rank[mask]] = 1.0;
  }
  return f;
}

double AlternatingForm::at_mask(std::uint32_t mask) const {
  if (std::popcount(mask) != degree_) return 0.0;
  return coeffs_[rank_table(dim_).rank[mask]];
}

std::uint32_t AlternatingForm::mask_of(std::size_t rank) const { return rank_table(dim_).masks[degree_][rank]; }

std::size_t AlternatingForm::rank_of(std::uint32_t mask) const { return rank_table(dim_).rank[mask]; }

double AlternatingForm::top() const {
  if (degree_ != dim_) throw DegreeError("top() requires a top-degree form");
  return coeffs_[0];
}

Eigen::MatrixXd AlternatingForm::to_matrix() const {
  if (degree_ != 2) throw DegreeError("to_matrix() requires a 2-form");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim_, dim_);
  const RankTable& t = rank_table(dim_);
  for (std::size_t r = 0; r < coeffs_.size(); ++r) {
    std::uint32_t mask = t.masks[2][r];
    int i = std::countr_zero(mask);
    int j = 31 - std::countl_zero(mask);
    m(i, j) = coeffs_[r];
    m(j, i) = -coeffs_[r];
  }
  return m;
}

AlternatingForm& AlternatingForm::operator+=(const AlternatingForm& other) {
  if (dim_ != other.dim_) throw DimensionError("dimension mismatch in form sum");
  if (degree_ != other.degree_) throw DegreeError("degree mismatch in form sum");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

AlternatingForm& AlternatingForm::operator-=(const AlternatingForm& other) {
  if (dim_ != other.dim_) throw DimensionError("dimension mismatch in form difference");
  if (degree_ != other.degree_) throw DegreeError("degree mismatch in form difference");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

AlternatingForm& AlternatingForm::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

AlternatingForm operator+(AlternatingForm a, const AlternatingForm& b) { return a += b; }
AlternatingForm operator-(AlternatingForm a, const AlternatingForm& b) { return a -= b; }
AlternatingForm operator*(double s, AlternatingForm a) { return a *= s; }

TangentVector TangentVector::basis(int dim, int i) {
  std::vector<double> c(dim, 0.0);
  c.at(i) = 1.0;
  return TangentVector(std::move(c));
}

AlternatingForm wedge(const AlternatingForm& a, const AlternatingForm& b) {
  if (a.dim() != b.dim())
    throw DimensionError("wedge of forms on R^" + std::to_string(a.dim()) + " and R^" + std::to_string(b.dim()));
  if (a.degree() + b.degree() > a.dim())
    throw DegreeError("wedge degree " + std::to_string(a.degree() + b.degree()) + " exceeds dimension " +
                      std::to_string(a.dim()));
  AlternatingForm out(a.dim(), a.degree() + b.degree());
  const auto& plan = wedge_plan(a.dim(), a.degree(), b.degree());
  const double* ca = a.coeffs().data();
  const double* cb = b.coeffs().data();
  double* co = out.coeffs().data();
  for (const WedgeTerm& t : plan) co[t.out] += t.sign * ca[t.ia] * cb[t.ib];
  return out;
}

AlternatingForm power(const AlternatingForm& a, int m) {
  if (a.degree() != 2) throw DegreeError("power() requires a 2-form");
  if (m < 0 || 2 * m > a.dim()) throw DegreeError("power " + std::to_string(m) + " out of range");
  AlternatingForm out = AlternatingForm::scalar(a.dim(), 1.0);
  for (int i = 0; i < m; ++i) out = wedge(out, a);
  return out;
}

AlternatingForm interior(const TangentVector& u, const AlternatingForm& a) {
  if (u.dim() != a.dim()) throw DimensionError("interior product dimension mismatch");
  if (a.degree() < 1) throw DegreeError("interior product of a 0-form");
  AlternatingForm out(a.dim(), a.degree() - 1);
  for (std::size_t r = 0; r < a.size(); ++r) {
    const double c = a[r];
    if (c == 0.0) continue;
    std::uint32_t mask = a.mask_of(r);
    int position = 0;
    for (std::uint32_t m = mask; m; m &= m - 1, ++position) {
      int i = std::countr_zero(m);
      double s = (position & 1) ? -1.0 : 1.0;
      out[out.rank_of(mask & ~(1u << i))] += s * u.components[i] * c;
    }
  }
  return out;
}

double evaluate(const AlternatingForm& a, const TangentVector& u, const TangentVector& v) {
  if (a.degree() != 2) throw DegreeError("evaluate() requires a 2-form");
  if (u.dim() != a.dim() || v.dim() != a.dim()) throw DimensionError("evaluate() dimension mismatch");
  double s = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    std::uint32_t mask = a.mask_of(r);
    int i = std::countr_zero(mask);
    int j = 31 - std::countl_zero(mask);
    s += a[r] * (u.components[i] * v.components[j] - u.components[j] * v.components[i]);
  }
  return s;
}

double top_ratio(const AlternatingForm& eta, const AlternatingForm& alpha, const AlternatingForm& gamma) {
  if (eta.degree() != 2 || alpha.degree() != 2) throw DegreeError("top_ratio expects 2-forms eta, alpha");
  if (gamma.degree() != eta.dim() - 2) throw DegreeError("top_ratio expects gamma of degree 2n-2");
  const double den = wedge(alpha, gamma).top();
  if (std::abs(den) <= kVolumeEpsilon) throw DegenerateVolumeError("alpha ∧ gamma is not a volume form");
  const int n = eta.dim() / 2;
  return n * wedge(eta, gamma).top() / den;
}

InteriorIdentity check_interior_identity(const AlternatingForm& alpha, const AlternatingForm& beta,
                                         const TangentVector& u, const TangentVector& v, int p) {
  if (alpha.degree() != 2 || beta.degree() != 2) throw DegreeError("alpha and beta must be 2-forms");
  if (alpha.dim() != beta.dim()) throw DimensionError("alpha and beta dimension mismatch");
  const int n = alpha.dim() / 2;
  if (p < 0 || p > n - 1) throw DegreeError("p must lie in [0, n-1]");
  const AlternatingForm gamma = wedge(power(alpha, n - 1 - p), power(beta, p));
  const double volume = wedge(alpha, gamma).top();
  if (volume <= kVolumeEpsilon) throw DegenerateVolumeError("alpha^{n-p} ∧ beta^p is not positive");
  InteriorIdentity r;
  r.volume = volume;
  r.lhs = n * wedge(wedge(interior(u, alpha), interior(v, beta)), gamma).top();
  r.rhs = -evaluate(beta, u, v) * volume;
  return r;
}

void mixed_volumes(int dim, const double* a, const double* b, double* m) {
  const int n = dim / 2;
  const MatchingTable& t = matching_table(dim);
  for (int k = 0; k <= n; ++k) m[k] = 0.0;
  std::array<double, kMaxFormDim / 2 + 1> poly;
  for (std::size_t r = 0; r < t.signs.size(); ++r) {
    const std::uint32_t* e = &t.pairs[r * n];
    poly[0] = t.signs[r];
    for (int d = 1; d <= n; ++d) poly[d] = 0.0;
    for (int f = 0; f < n; ++f) {
      const double x = a[e[f]], y = b[e[f]];
      for (int d = f + 1; d >= 1; --d) poly[d] = y * poly[d] + x * poly[d - 1];
      poly[0] *= y;
    }
    for (int k = 0; k <= n; ++k) m[k] += poly[k];
  }
}

double mixed_volume(const AlternatingForm& a, int ka, const AlternatingForm& b, int kb) {
  if (2 * (ka + kb) != a.dim()) throw DegreeError("mixed_volume powers must fill the top degree");
  if (a.degree() == 2 && b.degree() == 2 && a.dim() == b.dim() && a.dim() % 2 == 0) {
    std::array<double, kMaxFormDim / 2 + 1> m;
    mixed_volumes(a.dim(), a.coeffs().data(), b.coeffs().data(), m.data());
    return m[ka];
  }
  double f = 1.0;
  for (int i = 2; i <= ka; ++i) f *= i;
  for (int i = 2; i <= kb; ++i) f *= i;
  return wedge(power(a, ka), power(b, kb)).top() / f;
}

}  // namespace cmm
