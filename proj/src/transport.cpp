#include "clusterdist/transport.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace clusterdist {
namespace {

constexpr double kMassTol = 1e-9;

void require_finite_p(double p) {
  if (!(p > 0.0) || !std::isfinite(p))
    throw std::invalid_argument("wasserstein: p must be a positive finite number");
}

} // namespace

PointCloud PointCloud::uniform(Eigen::MatrixXd points) {
  const auto n = points.rows();
  if (n < 1)
    throw std::invalid_argument("PointCloud: at least one point is required");
  PointCloud c{std::move(points), Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n))};
  return c;
}

void PointCloud::validate() const {
  if (points.rows() < 1)
    throw std::invalid_argument("PointCloud: empty cloud");
  if (masses.size() != points.rows())
    throw std::invalid_argument("PointCloud: one mass per point is required");
  if ((masses.array() < 0.0).any() || !masses.allFinite())
    throw std::invalid_argument("PointCloud: masses must be nonnegative and finite");
  if (std::abs(masses.sum() - 1.0) > kMassTol)
    throw std::invalid_argument(
        fmt::format("PointCloud: masses sum to {:.17g}, expected 1", masses.sum()));
  if (!points.allFinite())
    throw std::invalid_argument("PointCloud: non-finite coordinates");
}

bool PointCloud::has_uniform_masses() const {
  const double expected = 1.0 / static_cast<double>(masses.size());
  return ((masses.array() - expected).abs() <= 1e-15).all();
}

Eigen::MatrixXd pairwise_cost(const Eigen::MatrixXd &x, const Eigen::MatrixXd &y, double p) {
  require_finite_p(p);
  if (x.cols() != y.cols())
    throw std::invalid_argument("pairwise_cost: dimension mismatch");
  Eigen::MatrixXd c(x.rows(), y.rows());
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double sq = (x.row(i) - y.row(j)).squaredNorm();
      c(i, j) = p == 2.0 ? sq : (p == 1.0 ? std::sqrt(sq) : std::pow(sq, 0.5 * p));
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Linear assignment

Assignment solve_assignment(const Eigen::MatrixXd &cost_matrix) {
  const auto n = static_cast<std::size_t>(cost_matrix.rows());
  if (cost_matrix.rows() != cost_matrix.cols())
    throw std::invalid_argument("solve_assignment: cost matrix must be square");
  if (n == 0)
    throw std::invalid_argument("solve_assignment: empty problem");
  if (!cost_matrix.allFinite())
    throw std::invalid_argument("solve_assignment: costs must be finite");

  // Row-major copy: the inner loops run along rows.
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i * n + j] =
          cost_matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  auto c = [&](std::size_t i, std::size_t j) { return cost[i * n + j]; };

  constexpr long kNone = -1;
  std::vector<long> row_sol(n, kNone);
  std::vector<long> col_sol(n, kNone);
  std::vector<double> v(n, 0.0);
  std::vector<int> matches(n, 0);

  // Column reduction, scanning columns in reverse.
  for (std::size_t jj = n; jj-- > 0;) {
    std::size_t imin = 0;
    double min = c(0, jj);
    for (std::size_t i = 1; i < n; ++i) {
      if (c(i, jj) < min) {
        min = c(i, jj);
        imin = i;
      }
    }
    v[jj] = min;
    if (++matches[imin] == 1) {
      row_sol[imin] = static_cast<long>(jj);
      col_sol[jj] = static_cast<long>(imin);
    }
  }

  // Reduction transfer from rows assigned exactly once; collect free rows.
  std::vector<std::size_t> free_rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (matches[i] == 0) {
      free_rows.push_back(i);
    } else if (matches[i] == 1) {
      const auto j1 = static_cast<std::size_t>(row_sol[i]);
      double min = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j)
        if (j != j1)
          min = std::min(min, c(i, j) - v[j]);
      if (std::isfinite(min))
        v[j1] -= min;
    }
  }

  // Shortest augmenting path from each free row (Dijkstra on reduced costs).
  std::vector<double> d(n);
  std::vector<std::size_t> pred(n);
  std::vector<std::size_t> col_list(n);
  for (std::size_t free_row : free_rows) {
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = c(free_row, j) - v[j];
      pred[j] = free_row;
      col_list[j] = j;
    }
    std::size_t low = 0;
    std::size_t up = 0;
    std::size_t last = 0;
    std::size_t end_of_path = 0;
    bool found = false;
    double min = 0.0;
    while (!found) {
      if (up == low) {
        last = low;
        min = d[col_list[up++]];
        for (std::size_t k = up; k < n; ++k) {
          const std::size_t j = col_list[k];
          const double h = d[j];
          if (h <= min) {
            if (h < min) {
              up = low;
              min = h;
            }
            col_list[k] = col_list[up];
            col_list[up++] = j;
          }
        }
        for (std::size_t k = low; k < up; ++k) {
          if (col_sol[col_list[k]] == kNone) {
            end_of_path = col_list[k];
            found = true;
            break;
          }
        }
      }
      if (!found) {
        const std::size_t j1 = col_list[low++];
        const auto i = static_cast<std::size_t>(col_sol[j1]);
        const double h = c(i, j1) - v[j1] - min;
        for (std::size_t k = up; k < n; ++k) {
          const std::size_t j = col_list[k];
          const double v2 = c(i, j) - v[j] - h;
          if (v2 < d[j]) {
            pred[j] = i;
            if (v2 == min) {
              if (col_sol[j] == kNone) {
                end_of_path = j;
                found = true;
                break;
              }
              col_list[k] = col_list[up];
              col_list[up++] = j;
            }
            d[j] = v2;
          }
        }
      }
    }
    // Columns scanned before the final minimum level get their prices raised.
    for (std::size_t k = 0; k < last; ++k) {
      const std::size_t j1 = col_list[k];
      v[j1] += d[j1] - min;
    }
    // Flip the alternating path.
    for (;;) {
      const std::size_t i = pred[end_of_path];
      col_sol[end_of_path] = static_cast<long>(i);
      const long previous = row_sol[i];
      row_sol[i] = static_cast<long>(end_of_path);
      if (i == free_row)
        break;
      end_of_path = static_cast<std::size_t>(previous);
    }
  }

  Assignment out;
  out.row_to_col.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.row_to_col[i] = row_sol[i];
    out.cost += c(i, static_cast<std::size_t>(row_sol[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transportation simplex

TransportPlan solve_transportation(const Eigen::VectorXd &supply, const Eigen::VectorXd &demand,
                                   const Eigen::MatrixXd &cost) {
  const auto m = static_cast<std::size_t>(supply.size());
  const auto n = static_cast<std::size_t>(demand.size());
  if (m == 0 || n == 0)
    throw std::invalid_argument("solve_transportation: empty problem");
  if (cost.rows() != supply.size() || cost.cols() != demand.size())
    throw std::invalid_argument("solve_transportation: cost shape does not match masses");
  if ((supply.array() < 0.0).any() || (demand.array() < 0.0).any())
    throw std::invalid_argument("solve_transportation: masses must be nonnegative");
  if (!cost.allFinite())
    throw std::invalid_argument("solve_transportation: costs must be finite");
  const double total = supply.sum();
  if (!(total > 0.0) || std::abs(total - demand.sum()) > kMassTol * std::max(1.0, total))
    throw std::invalid_argument("solve_transportation: supply and demand totals differ");

  struct Cell {
    std::size_t row;
    std::size_t col;
    double flow;
  };

  // Northwest-corner start: a path of m + n - 1 cells, zero flows kept basic.
  const Eigen::VectorXd target = demand * (total / demand.sum());
  std::vector<Cell> basis;
  basis.reserve(m + n - 1);
  {
    std::size_t i = 0;
    std::size_t j = 0;
    double ra = supply[0];
    double rb = target[0];
    while (true) {
      const double x = std::min(ra, rb);
      basis.push_back({i, j, x});
      ra -= x;
      rb -= x;
      if (i == m - 1 && j == n - 1)
        break;
      const bool advance_row = (j == n - 1) || (i < m - 1 && ra <= rb);
      if (advance_row) {
        ++i;
        ra = supply[static_cast<Eigen::Index>(i)];
      } else {
        ++j;
        rb = target[static_cast<Eigen::Index>(j)];
      }
    }
  }

  const std::size_t nodes = m + n;
  const double scale = std::max(cost.cwiseAbs().maxCoeff(), 1e-300);
  const double tol = 1e-12 * scale;
  std::vector<std::vector<std::size_t>> adj(nodes);
  std::vector<double> pot(nodes);
  std::vector<long> parent_edge(nodes);
  std::vector<std::size_t> parent(nodes);
  std::vector<std::size_t> depth(nodes);
  std::vector<std::size_t> queue;
  queue.reserve(nodes);

  const std::size_t block = std::max<std::size_t>(1, m / 8);
  std::size_t scan_start = 0;
  const std::size_t max_iter = 50 * (m + n) * std::max<std::size_t>(10, std::min(m, n));

  for (std::size_t iter = 0;; ++iter) {
    if (iter > max_iter)
      throw std::runtime_error("solve_transportation: iteration limit reached");

    // Tree structure and potentials: u_i + v_j = c_ij on basic cells.
    for (auto &a : adj)
      a.clear();
    for (std::size_t e = 0; e < basis.size(); ++e) {
      adj[basis[e].row].push_back(e);
      adj[m + basis[e].col].push_back(e);
    }
    std::fill(parent_edge.begin(), parent_edge.end(), -2);
    queue.clear();
    queue.push_back(0);
    parent_edge[0] = -1;
    parent[0] = 0;
    depth[0] = 0;
    pot[0] = 0.0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const std::size_t u = queue[qi];
      for (std::size_t e : adj[u]) {
        const std::size_t r = basis[e].row;
        const std::size_t cnode = m + basis[e].col;
        const std::size_t w = (u == r) ? cnode : r;
        if (parent_edge[w] != -2)
          continue;
        parent_edge[w] = static_cast<long>(e);
        parent[w] = u;
        depth[w] = depth[u] + 1;
        pot[w] = cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(basis[e].col)) -
                 pot[u];
        queue.push_back(w);
      }
    }
    if (queue.size() != nodes)
      throw std::logic_error("solve_transportation: basis is not a spanning tree");

    // Block pricing: stop at the first block holding a negative reduced cost.
    double best = -tol;
    std::size_t enter_row = m;
    std::size_t enter_col = 0;
    for (std::size_t scanned = 0; scanned < m; ++scanned) {
      const std::size_t i = (scan_start + scanned) % m;
      const double ui = pot[i];
      for (std::size_t j = 0; j < n; ++j) {
        const double r =
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - ui - pot[m + j];
        if (r < best) {
          best = r;
          enter_row = i;
          enter_col = j;
        }
      }
      if (enter_row != m && scanned + 1 >= block) {
        scan_start = (i + 1) % m;
        break;
      }
    }
    if (enter_row == m)
      break;

    // Tree path from the entering column node back to the entering row node.
    std::size_t a = enter_row;
    std::size_t b = m + enter_col;
    std::vector<std::size_t> from_b;
    std::vector<std::size_t> from_a;
    while (depth[a] > depth[b]) {
      from_a.push_back(static_cast<std::size_t>(parent_edge[a]));
      a = parent[a];
    }
    while (depth[b] > depth[a]) {
      from_b.push_back(static_cast<std::size_t>(parent_edge[b]));
      b = parent[b];
    }
    while (a != b) {
      from_a.push_back(static_cast<std::size_t>(parent_edge[a]));
      a = parent[a];
      from_b.push_back(static_cast<std::size_t>(parent_edge[b]));
      b = parent[b];
    }
    std::vector<std::size_t> cycle = std::move(from_b);
    cycle.insert(cycle.end(), from_a.rbegin(), from_a.rend());

    // Signs alternate -, +, -, ... starting next to the entering column.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = cycle.front();
    for (std::size_t k = 0; k < cycle.size(); k += 2) {
      if (basis[cycle[k]].flow < theta) {
        theta = basis[cycle[k]].flow;
        leave = cycle[k];
      }
    }
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      auto &flow = basis[cycle[k]].flow;
      flow = (k % 2 == 0) ? std::max(0.0, flow - theta) : flow + theta;
    }
    basis[leave] = {enter_row, enter_col, theta};
  }

  TransportPlan plan;
  for (const auto &cell : basis) {
    if (cell.flow <= 0.0)
      continue;
    plan.couplings.push_back(
        {static_cast<Eigen::Index>(cell.row), static_cast<Eigen::Index>(cell.col), cell.flow});
    plan.cost +=
        cell.flow * cost(static_cast<Eigen::Index>(cell.row), static_cast<Eigen::Index>(cell.col));
  }
  std::sort(plan.couplings.begin(), plan.couplings.end(), [](const auto &x, const auto &y) {
    return x.source != y.source ? x.source < y.source : x.target < y.target;
  });
  return plan;
}

// ---------------------------------------------------------------------------

TransportResult wasserstein(const PointCloud &a, const PointCloud &b, double p) {
  require_finite_p(p);
  a.validate();
  b.validate();
  if (a.points.cols() != b.points.cols())
    throw std::invalid_argument(fmt::format("wasserstein: dimension mismatch ({} vs {})",
                                            a.points.cols(), b.points.cols()));
  const Eigen::MatrixXd cost = pairwise_cost(a.points, b.points, p);

  TransportResult out;
  if (a.points.rows() == b.points.rows() && a.has_uniform_masses() && b.has_uniform_masses()) {
    // For squared costs, translating a cloud adds only row and column
    // constants, so centred clouds share the optimal assignment. Centring
    // avoids the slow start where distant clouds leave most rows unmatched.
    Assignment assignment;
    if (p == 2.0) {
      const Eigen::MatrixXd xa = a.points.rowwise() - a.points.colwise().mean();
      const Eigen::MatrixXd xb = b.points.rowwise() - b.points.colwise().mean();
      assignment = solve_assignment(pairwise_cost(xa, xb, p));
    } else {
      assignment = solve_assignment(cost);
    }
    const double mass = 1.0 / static_cast<double>(a.points.rows());
    double total = 0.0;
    out.plan.couplings.reserve(assignment.row_to_col.size());
    for (std::size_t i = 0; i < assignment.row_to_col.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      out.plan.couplings.push_back({row, assignment.row_to_col[i], mass});
      total += cost(row, assignment.row_to_col[i]);
    }
    out.plan.cost = total * mass;
  } else {
    out.plan = solve_transportation(a.masses, b.masses, cost);
  }
  out.distance = std::pow(std::max(0.0, out.plan.cost), 1.0 / p);
  return out;
}

double wasserstein_between_models(const ClusterModel &f, const ClusterModel &g, std::size_t n,
                                  double p, std::uint64_t seed) {
  if (n < 2)
    throw std::invalid_argument("wasserstein_between_models: n must be at least 2");
  if (dimension(f) != dimension(g))
    throw std::invalid_argument("wasserstein_between_models: dimension mismatch");
  Rng rng = make_rng(seed);
  PointCloud a = PointCloud::uniform(sample(f, rng, n));
  PointCloud b = PointCloud::uniform(sample(g, rng, n));
  return wasserstein(a, b, p).distance;
}

} // namespace clusterdist
