#include "arx/series.hpp"

#include "arx/error.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace arx {

TruncationOrder truncation_order(double rho, double tol, double c, int min_order,
                                 int safety_cap) {
  if (!(rho < 1.0)) {
    throw NonCausalError("truncation_order: spectral radius " +
                             linalg::format_double(rho) + " >= 1, B is not causal",
                         rho);
  }
  if (!(tol > 0.0)) throw ConfigError("truncation_order: tolerance must be positive");
  const int floor_order = std::max(min_order, 0);
  if (rho <= 0.0 || c <= 0.0) {
    return {std::min(floor_order, safety_cap), floor_order > safety_cap};
  }
  // c rho^K < tol  <=>  K > log(tol / c) / log(rho)
  const double bound = std::log(tol / c) / std::log(rho);
  double k = std::floor(bound) + 1.0;
  if (k < floor_order) k = floor_order;
  if (k > safety_cap) return {safety_cap, true};
  return {static_cast<int>(k), false};
}

MatrixList compute_d(const ArxModel& model, int kmax) {
  const int d = model.d();
  const int q = model.q();
  MatrixList out;
  out.reserve(static_cast<std::size_t>(kmax) + 1);
  out.push_back(Matrix::Identity(d, d));
  for (int k = 1; k <= kmax; ++k) {
    Matrix acc = Matrix::Zero(d, d);
    // Both branches reduce to sum over j = 1..min(k, q) of D_{k-j} B_j.
    for (int j = 1; j <= std::min(k, q); ++j) {
      acc.noalias() -= out[static_cast<std::size_t>(k - j)] * model.b(j);
    }
    out.push_back(std::move(acc));
  }
  return out;
}

MatrixList compute_p(const ArxModel& model, const MatrixList& d_list, int kmax) {
  const int d = model.d();
  const int p = model.p();
  if (static_cast<int>(d_list.size()) < kmax + 1) {
    throw ConfigError("compute_p: D sequence shorter than kmax + 1");
  }
  MatrixList out;
  out.reserve(static_cast<std::size_t>(kmax) + 1);
  out.push_back(Matrix::Zero(d, d));
  for (int k = 1; k <= kmax; ++k) {
    Matrix acc = Matrix::Zero(d, d);
    for (int j = 1; j <= std::min(k, p); ++j) {
      acc.noalias() -= d_list[static_cast<std::size_t>(k - j)] * model.a(j);
    }
    out.push_back(std::move(acc));
  }
  return out;
}

MatrixList compute_q(const MatrixList& d, const MatrixList& p) {
  if (d.size() != p.size()) throw ConfigError("compute_q: D and P lengths differ");
  MatrixList out;
  out.reserve(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) out.push_back(d[k] + p[k]);
  return out;
}

double fitted_tail(const std::vector<const MatrixList*>& sequences, int first,
                   int kmax, double rho_fit) {
  // log c = max_k (log ||M_k|| - k log rho_fit); done in log space so that
  // tiny rho_fit^k never underflows.
  const double log_rho = std::log(rho_fit);
  double log_c = -std::numeric_limits<double>::infinity();
  for (const auto* seq : sequences) {
    for (int k = std::max(first, 0); k <= kmax; ++k) {
      const double norm = linalg::operator_norm((*seq)[static_cast<std::size_t>(k)]);
      if (norm > 0.0) log_c = std::max(log_c, std::log(norm) - k * log_rho);
    }
  }
  if (!std::isfinite(log_c)) return 0.0;
  return std::exp(log_c + (kmax + 1) * log_rho) / (1.0 - rho_fit);
}

SeriesTable make_series(const ArxModel& model, const SeriesOptions& options) {
  const auto causality = is_causal(model);
  if (!causality.causal) {
    throw NonCausalError("B is not causal: companion spectral radius " +
                             linalg::format_double(causality.spectral_radius),
                         causality.spectral_radius);
  }
  const double rho = causality.spectral_radius;
  // Polynomial (Jordan) factors are absorbed by fitting at a slightly larger rate.
  const double rho_fit = std::min(rho + 0.01, 0.5 * (1.0 + rho));
  const int min_order = std::max(model.p(), model.q()) + 2;

  SeriesTable table;
  table.rho = rho;
  table.rho_fit = rho_fit;
  int kmax = truncation_order(rho_fit, options.tol, 1.0, min_order, options.safety_cap).order;
  for (;;) {
    table.kmax = kmax;
    table.d = compute_d(model, kmax);
    table.p = compute_p(model, table.d, kmax);
    table.q = compute_q(table.d, table.p);
    const double tail =
        fitted_tail({&table.d, &table.p, &table.q}, model.q(), kmax, rho_fit);
    double largest = 0.0;
    for (int k = 0; k <= kmax; ++k) {
      const auto i = static_cast<std::size_t>(k);
      largest = std::max({largest, linalg::operator_norm(table.d[i]),
                          linalg::operator_norm(table.p[i]),
                          linalg::operator_norm(table.q[i])});
    }
    const auto last = static_cast<std::size_t>(kmax);
    const double at_kmax = std::max({linalg::operator_norm(table.d[last]),
                                     linalg::operator_norm(table.p[last]),
                                     linalg::operator_norm(table.q[last])});
    // Rounding in the recursions is O(eps * kmax * largest coefficient).
    const double rounding =
        std::numeric_limits<double>::epsilon() * (kmax + 1) * largest;
    table.tail_bound = std::max(tail, at_kmax) + rounding;
    if (tail <= options.tol) {
      table.capped = false;
      break;
    }
    if (kmax >= options.safety_cap) {
      table.capped = true;
      std::cerr << "warning: series truncation capped at " << kmax
                << " terms; tail bound " << table.tail_bound << '\n';
      break;
    }
    // tail scales like rho_fit^{K}: step K until tail * rho_fit^{dK} <= tol.
    const double steps = std::ceil(std::log(options.tol / tail) / std::log(rho_fit));
    const double next = static_cast<double>(kmax) + std::max(steps, 1.0);
    kmax = next >= options.safety_cap ? options.safety_cap : static_cast<int>(next);
  }
  return table;
}

}  // namespace arx
