#include "core/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "core/errors.hpp"

namespace dkgp {

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, const NelderMeadOptions& opts) {
  const int dim = static_cast<int>(start.size());
  if (dim < 1) throw InputError("nelder_mead: empty start point");

  auto safe_eval = [&](const Eigen::VectorXd& x) {
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  // Simplex: start plus one perturbed vertex per coordinate.
  std::vector<Eigen::VectorXd> verts(dim + 1, start);
  std::vector<double> vals(dim + 1);
  for (int i = 0; i < dim; ++i) {
    double step = opts.initial_step;
    if (std::abs(start[i]) > 1.0) step *= std::abs(start[i]);
    verts[i + 1][i] += step;
  }
  for (int i = 0; i <= dim; ++i) vals[i] = safe_eval(verts[i]);

  std::vector<int> order(dim + 1);
  NelderMeadResult res;
  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order[0];
    const int second_worst = order[dim - 1];
    const int worst = order[dim];

    // Convergence on both value spread and simplex size.
    const double f_spread = vals[worst] - vals[best];
    double x_spread = 0.0;
    for (int i = 0; i <= dim; ++i)
      x_spread = std::max(x_spread, (verts[i] - verts[best]).norm());
    if (f_spread < opts.f_tol && x_spread < opts.x_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i <= dim; ++i)
      if (i != worst) centroid += verts[i];
    centroid /= static_cast<double>(dim);

    const Eigen::VectorXd reflected = centroid + (centroid - verts[worst]);
    const double f_reflected = safe_eval(reflected);

    if (f_reflected < vals[best]) {
      const Eigen::VectorXd expanded =
          centroid + 2.0 * (centroid - verts[worst]);
      const double f_expanded = safe_eval(expanded);
      if (f_expanded < f_reflected) {
        verts[worst] = expanded;
        vals[worst] = f_expanded;
      } else {
        verts[worst] = reflected;
        vals[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < vals[second_worst]) {
      verts[worst] = reflected;
      vals[worst] = f_reflected;
      continue;
    }

    // Contract toward the better of {worst, reflected}.
    Eigen::VectorXd contracted;
    double f_contracted;
    if (f_reflected < vals[worst]) {
      contracted = centroid + 0.5 * (reflected - centroid);
      f_contracted = safe_eval(contracted);
      if (f_contracted <= f_reflected) {
        verts[worst] = contracted;
        vals[worst] = f_contracted;
        continue;
      }
    } else {
      contracted = centroid + 0.5 * (verts[worst] - centroid);
      f_contracted = safe_eval(contracted);
      if (f_contracted < vals[worst]) {
        verts[worst] = contracted;
        vals[worst] = f_contracted;
        continue;
      }
    }

    // Shrink toward the best vertex.
    for (int i = 0; i <= dim; ++i) {
      if (i == best) continue;
      verts[i] = verts[best] + 0.5 * (verts[i] - verts[best]);
      vals[i] = safe_eval(verts[i]);
    }
  }

  int best = 0;
  for (int i = 1; i <= dim; ++i)
    if (vals[i] < vals[best]) best = i;
  res.x = verts[best];
  res.value = vals[best];
  return res;
}

}  // namespace dkgp
