#include "drlp/primitives.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace drlp {

Vector owner_products(const PseudoInverse& P, const ReluNetwork& net, const ActivationPattern& s,
                      const Vector& v) {
  Vector w(P.size());
  if (P.size() == 0) return w;
  const LayerValues ips = inner_products_all(net, s, v);
  for (int i = 0; i < P.size(); ++i) w[i] = ips[P.owners[i].layer][P.owners[i].pos];
  return w;
}

Vector project(const PseudoInverse& P, const Vector& column_products) {
  if (column_products.size() != P.size()) throw DimensionError("one inner product per row expected");
  if (P.size() == 0) return Vector::Zero(P.dim());
  return P.rows.transpose() * column_products;
}

Vector project(const PseudoInverse& P, const ReluNetwork& net, const ActivationPattern& s,
               const Vector& v) {
  return project(P, owner_products(P, net, s, v));
}

PseudoInverse add_pseudorow(PseudoInverse P, const Vector& u, const Vector& column_products,
                            NeuronIndex owner, double dep_tol) {
  const int m = P.size();
  if (u.size() != P.dim()) throw DimensionError("column length must equal input dimension");
  if (m >= P.dim()) throw DependentColumn("already n0 columns; cannot add " + to_string(owner));
  const Vector w_perp = u - project(P, column_products);
  if (w_perp.norm() <= dep_tol * u.norm()) {
    throw DependentColumn("normal of " + to_string(owner) + " is dependent on the current columns");
  }
  const Vector new_row = w_perp / w_perp.dot(u);
  if (m > 0) {
    const Vector coeff = P.rows * u;
    P.rows.noalias() -= coeff * new_row.transpose();
  }
  P.rows.conservativeResize(m + 1, Eigen::NoChange);
  P.rows.row(m) = new_row.transpose();
  P.owners.push_back(owner);
  return P;
}

PseudoInverse add_pseudorow(PseudoInverse P, const ReluNetwork& net, const ActivationPattern& s,
                            const Vector& u, NeuronIndex owner, double dep_tol) {
  Vector cp = owner_products(P, net, s, u);
  return add_pseudorow(std::move(P), u, cp, owner, dep_tol);
}

PseudoInverse remove_pseudorow(PseudoInverse P, int row) {
  const int m = P.size();
  if (row < 0 || row >= m) {
    throw std::out_of_range("row " + std::to_string(row) + " out of range for " + std::to_string(m) + " rows");
  }
  const Vector a = P.row(row);
  const double aa = a.squaredNorm();
  PseudoInverse out{PseudoInverse::Rows(m - 1, P.dim()), {}};
  out.owners.reserve(m - 1);
  for (int k = 0, r = 0; k < m; ++k) {
    if (k == row) continue;
    out.rows.row(r) = P.rows.row(k) - (P.rows.row(k).dot(a) / aa) * a.transpose();
    out.owners.push_back(P.owners[k]);
    ++r;
  }
  return out;
}

PseudoInverse add_axis(PseudoInverse P, const ReluNetwork& net, const ActivationPattern& s,
                       NeuronIndex c, double dep_tol) {
  return add_pseudorow(std::move(P), net, s, oriented_normal(net, s, c), c, dep_tol);
}

ActivationPattern flip(ActivationPattern s, NeuronIndex c) {
  s.flip(c);
  return s;
}

ActivationPattern flip(ActivationPattern s, NeuronIndex c, const PairGroups& pairs) {
  flip_in_place(s, c, pairs);
  return s;
}

void flip_in_place(ActivationPattern& s, NeuronIndex c, const PairGroups& pairs) {
  s.flip(c);
  if (auto p = pairs.partner(c)) s.flip(*p);
}

PseudoInverse update_axis_new_region(PseudoInverse P, int row, const ReluNetwork& net,
                                     const ActivationPattern& s_new, NeuronIndex c, double dep_tol) {
  if (row < 0 || row >= P.size()) throw std::out_of_range("axis row out of range");
  if (P.owners[row] != c) {
    throw std::invalid_argument("row " + std::to_string(row) + " is owned by " + to_string(P.owners[row]) +
                                ", not " + to_string(c));
  }
  const Vector u = oriented_normal(net, s_new, c);
  Vector ip = owner_products(P, net, s_new, u);
  ip[row] = 0.0;
  const Vector w = u - P.rows.transpose() * ip;
  const double denom = w.dot(u);
  if (std::abs(denom) <= dep_tol * u.squaredNorm() || u.squaredNorm() == 0.0) {
    throw Degenerate("axis update for " + to_string(c) + " has a vanishing denominator");
  }
  P.rows.row(row) = (w / denom).transpose();
  return P;
}

AdvanceResult advance_max(const ReluNetwork& net, const Vector& x, const Vector& v,
                          const ActivationPattern& s, const NeuronSet& ignore,
                          const PairGroups& pairs, double zero_tol) {
  if (x.size() != net.input_dim() || v.size() != net.input_dim()) {
    throw DimensionError("position and direction must have length n0");
  }
  const int L = net.hidden_layers();
  const double thresh = zero_tol * v.norm();
  Vector alpha = net.weight(0) * x + net.bias(0);
  Vector beta = net.weight(0) * v;
  AdvanceResult best;
  for (int k = 0;; ++k) {
    const std::size_t off = net.layout().offset(k);
    for (int j = 0; j < alpha.size(); ++j) {
      const std::size_t f = off + j;
      if (ignore.contains_flat(f) || pairs.is_secondary_flat(f)) continue;
      const double b = beta[j];
      if (std::abs(b) <= thresh) continue;
      const bool on = s.active_flat(f);
      if (!((on && b < 0) || (!on && b > 0))) continue;
      const double t = -alpha[j] / b;
      if (!best) {
        best = Crossing{t, {k, j}, 0};
      } else if (std::abs(t - best->step) <= 1e-12 * (1.0 + std::abs(best->step))) {
        ++best->ties;
      } else if (t < best->step) {
        best = Crossing{t, {k, j}, 0};
      }
    }
    if (k + 1 == L) break;
    alpha = net.weight(k + 1) * s.mask(k).cwiseProduct(alpha) + net.bias(k + 1);
    beta = net.weight(k + 1) * s.mask(k).cwiseProduct(beta);
  }
  return best;
}

Matrix owner_columns(const ReluNetwork& net, const ActivationPattern& s,
                     const std::vector<NeuronIndex>& owners) {
  Matrix A(net.input_dim(), owners.size());
  for (std::size_t i = 0; i < owners.size(); ++i) A.col(i) = oriented_normal(net, s, owners[i]);
  return A;
}

PseudoInverse build_pseudoinverse(const ReluNetwork& net, const ActivationPattern& s,
                                  const std::vector<NeuronIndex>& owners, double dep_tol) {
  const int n0 = net.input_dim();
  PseudoInverse P = PseudoInverse::empty(n0);
  if (owners.empty()) return P;
  if (static_cast<int>(owners.size()) > n0) throw DependentColumn("more owners than input dimensions");
  const Matrix A = owner_columns(net, s, owners);
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= dep_tol * sv(0)) {
    throw DependentColumn("oriented normals of the owners are linearly dependent");
  }
  const Matrix pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  P.rows = pinv;
  P.owners = owners;
  return P;
}

}  // namespace drlp
