#include "reference_gcn.hpp"

#include <cmath>

namespace reference {

Eigen::MatrixXd normalized_adjacency(const Eigen::MatrixXd& adjacency) {
  const Eigen::Index n = adjacency.rows();
  const Eigen::MatrixXd a = adjacency + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(a.row(i).sum());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = inv_sqrt[i] * a(i, j) * inv_sqrt[j];
  }
  return out;
}

namespace {

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd p(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double m = z(i, 0);
    for (Eigen::Index c = 1; c < z.cols(); ++c) m = std::max(m, z(i, c));
    double s = 0.0;
    for (Eigen::Index c = 0; c < z.cols(); ++c) s += std::exp(z(i, c) - m);
    for (Eigen::Index c = 0; c < z.cols(); ++c) p(i, c) = std::exp(z(i, c) - m) / s;
  }
  return p;
}

}  // namespace

GcnOutput gcn_forward(const Eigen::MatrixXd& a_hat, const Eigen::MatrixXd& x,
                      const Eigen::MatrixXd& w1, const Eigen::MatrixXd& w2,
                      const std::vector<int>& labels, const std::vector<int>& train,
                      double weight_decay) {
  GcnOutput out;
  out.pre1 = a_hat * (x * w1);
  out.hidden = out.pre1.cwiseMax(0.0);
  out.logits = a_hat * (out.hidden * w2);
  const Eigen::MatrixXd p = softmax_rows(out.logits);
  double ce = 0.0;
  for (int v : train) ce -= std::log(p(v, labels[static_cast<std::size_t>(v)]));
  out.loss = ce / static_cast<double>(train.size()) +
             0.5 * weight_decay * (w1.squaredNorm() + w2.squaredNorm());
  return out;
}

GcnGrads gcn_backward(const Eigen::MatrixXd& a_hat, const Eigen::MatrixXd& x,
                      const Eigen::MatrixXd& w1, const Eigen::MatrixXd& w2,
                      const GcnOutput& out, const std::vector<int>& labels,
                      const std::vector<int>& train, double weight_decay) {
  Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(out.logits.rows(), out.logits.cols());
  const Eigen::MatrixXd p = softmax_rows(out.logits);
  for (int v : train) {
    d_logits.row(v) = p.row(v);
    d_logits(v, labels[static_cast<std::size_t>(v)]) -= 1.0;
  }
  d_logits /= static_cast<double>(train.size());
  // logits = A H W2  =>  dW2 = (A H)^T dL,  dH = A^T dL W2^T
  GcnGrads g;
  g.w2 = (a_hat * out.hidden).transpose() * d_logits + weight_decay * w2;
  Eigen::MatrixXd d_hidden = a_hat.transpose() * d_logits * w2.transpose();
  for (Eigen::Index i = 0; i < d_hidden.rows(); ++i) {
    for (Eigen::Index c = 0; c < d_hidden.cols(); ++c) {
      if (out.pre1(i, c) <= 0.0) d_hidden(i, c) = 0.0;
    }
  }
  g.w1 = (a_hat * x).transpose() * d_hidden + weight_decay * w1;
  return g;
}

}  // namespace reference
