#include "hfvol/gaussian_moments.hpp"

#include <map>
#include <numeric>

namespace hfvol {

namespace {

class WickEvaluator {
 public:
  explicit WickEvaluator(const Matrix& cov) : cov_(cov) {}

  double operator()(std::vector<int> k) {
    const int total = std::accumulate(k.begin(), k.end(), 0);
    if (total == 0) return 1.0;
    if (total % 2 == 1) return 0.0;
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;
    std::size_t i = 0;
    while (k[i] == 0) ++i;
    // E[x_i M] = sum_j cov(i, j) * (d/dx_j M) evaluated in expectation.
    std::vector<int> rest = k;
    rest[i] -= 1;
    double sum = 0.0;
    for (std::size_t j = 0; j < rest.size(); ++j) {
      if (rest[j] == 0 || cov_(i, j) == 0.0) continue;
      std::vector<int> next = rest;
      const int mult = next[j];
      next[j] -= 1;
      sum += cov_(i, j) * mult * (*this)(next);
    }
    memo_.emplace(std::move(k), sum);
    return sum;
  }

 private:
  const Matrix& cov_;
  std::map<std::vector<int>, double> memo_;
};

}  // namespace

double gaussian_monomial_moment(const Matrix& cov, const std::vector<int>& exponents) {
  if (cov.rows() != exponents.size() || cov.cols() != exponents.size())
    fail(ErrorCode::SpecMismatch, "covariance shape does not match monomial");
  WickEvaluator eval(cov);
  return eval(exponents);
}

double gaussian_polynomial_moment(const Matrix& cov, const Polynomial& poly) {
  WickEvaluator eval(cov);
  double sum = 0.0;
  for (const auto& m : poly) {
    if (m.exponents.size() != cov.rows()) fail(ErrorCode::SpecMismatch, "covariance shape does not match monomial");
    if (m.coefficient != 0.0) sum += m.coefficient * eval(m.exponents);
  }
  return sum;
}

}  // namespace hfvol
