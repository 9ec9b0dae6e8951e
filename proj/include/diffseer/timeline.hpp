#pragma once

#include "diffseer/error.hpp"
#include "diffseer/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace diffseer {

struct TimelinePoint {
  std::size_t time_index = 0;
  std::string label;
  double offset = 0.0;            // first principal component score
  double change_intensity = 0.0;  // L1 norm of the incoming diff
};

struct Timeline {
  std::vector<TimelinePoint> points;
  bool degenerate = false;  // every snapshot identical; offsets all zero
};

/// Upper-triangle weight vectors, one row per snapshot.
inline Eigen::MatrixXd vectorize_snapshots(const DynamicWeightedGraph& g) {
  const std::size_t n = g.node_count();
  const auto pairs = static_cast<Eigen::Index>(n * (n - (n > 0 ? 1 : 0)) / 2);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.timeslice_count()), pairs);
  auto column = [n](std::size_t u, std::size_t v) {
    if (u > v) std::swap(u, v);
    return static_cast<Eigen::Index>(u * (2 * n - u - 1) / 2 + (v - u - 1));
  };
  for (std::size_t t = 0; t < g.timeslice_count(); ++t)
    for (const auto& e : g.snapshots[t].edges)
      x(static_cast<Eigen::Index>(t), column(e.u, e.v)) = e.weight;
  return x;
}

/// Projects each snapshot onto the first principal axis of the mean-centered
/// snapshot vectors. The largest-magnitude loading is made positive.
inline Timeline project_timeline(const DynamicWeightedGraph& g) {
  require_valid(g);
  const std::size_t steps = g.timeslice_count();
  if (steps < 2) throw Error(ErrorCode::InsufficientData, "timeline needs at least two timeslices");

  Eigen::MatrixXd x = vectorize_snapshots(g);
  x.rowwise() -= x.colwise().mean();

  Timeline out;
  out.points.resize(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    out.points[t].time_index = t;
    out.points[t].label = g.snapshots[t].label;
    if (t > 0)
      for (const auto& e : diff_edges(g.snapshots[t - 1], g.snapshots[t]))
        out.points[t].change_intensity += std::abs(e.delta);
  }

  if (x.size() == 0 || x.cwiseAbs().maxCoeff() == 0.0) {
    out.degenerate = true;
    return out;
  }

  Eigen::VectorXd loading;
  if (x.cols() <= x.rows()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x.transpose() * x);
    loading = eig.eigenvectors().col(x.cols() - 1);
  } else {
    // Fewer snapshots than pairs: diagonalize the Gram matrix instead.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x * x.transpose());
    const double lambda = eig.eigenvalues()(x.rows() - 1);
    loading = x.transpose() * eig.eigenvectors().col(x.rows() - 1) / std::sqrt(lambda);
  }

  Eigen::Index pivot = 0;
  loading.cwiseAbs().maxCoeff(&pivot);
  if (loading(pivot) < 0) loading = -loading;

  const Eigen::VectorXd scores = x * loading;
  for (std::size_t t = 0; t < steps; ++t) out.points[t].offset = scores(static_cast<Eigen::Index>(t));
  return out;
}

}  // namespace diffseer
