#include "cdm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cdm/error.hpp"
#include "cdm/rng.hpp"

namespace cdm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_label_pair(const LabelVector& truth, const LabelVector& pred) {
  require(!truth.empty(), ErrorCode::InvalidInput, "labels must be nonempty");
  require(truth.size() == pred.size(), ErrorCode::InvalidInput,
          "label vectors must have the same length");
  for (std::size_t i = 0; i < truth.size(); ++i)
    require(truth[i] >= 0 && pred[i] >= 0, ErrorCode::InvalidInput,
            "labels must be nonnegative");
}

Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> contingency(
    const LabelVector& truth, const LabelVector& pred) {
  check_label_pair(truth, pred);
  int kt = 0, kp = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    kt = std::max(kt, truth[i] + 1);
    kp = std::max(kp, pred[i] + 1);
  }
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> table =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(kt,
                                                                        kp);
  for (std::size_t i = 0; i < truth.size(); ++i)
    ++table(truth[i], pred[i]);
  return table;
}

// Pearson correlation of two equal-length sequences. Two constant sequences
// correlate 1 if they are the same constant, 0 otherwise; one constant
// sequence correlates 0 with anything.
double pearson(const double* u, const double* v, Index n) {
  double mu = 0.0, mv = 0.0;
  for (Index i = 0; i < n; ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= static_cast<double>(n);
  mv /= static_cast<double>(n);
  double suu = 0.0, svv = 0.0, suv = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double du = u[i] - mu;
    const double dv = v[i] - mv;
    suu += du * du;
    svv += dv * dv;
    suv += du * dv;
  }
  if (suu == 0.0 && svv == 0.0) return (mu == mv) ? 1.0 : 0.0;
  if (suu == 0.0 || svv == 0.0) return 0.0;
  return std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0);
}

// Minimum-cost assignment of n rows to n columns (potentials method).
// Returns the optimal total cost; exact for integral costs.
double assignment_min_cost(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(match[j] - 1, j - 1);
  return total;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

ConfusionMatrix confusion_matrix(const LabelVector& truth,
                                 const LabelVector& pred) {
  check_label_pair(truth, pred);
  int k = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    k = std::max({k, truth[i] + 1, pred[i] + 1});
  ConfusionMatrix cm;
  cm.counts = Eigen::Matrix<std::int64_t, Eigen::Dynamic,
                            Eigen::Dynamic>::Zero(k, k);
  for (std::size_t i = 0; i < truth.size(); ++i)
    ++cm.counts(truth[i], pred[i]);
  return cm;
}

KMeansResult kmeans(const Matrix& E, int k, std::uint64_t seed) {
  const Index n = E.rows();
  const Index d = E.cols();
  require(n > 0 && d > 0, ErrorCode::InvalidInput, "kmeans: empty input");
  require(E.allFinite(), ErrorCode::InvalidInput, "kmeans: input not finite");
  require(k >= 1 && k <= n, ErrorCode::InvalidInput,
          "kmeans: k must lie in [1, N]");
  Rng rng(seed);

  Matrix centroids(k, d);
  centroids.row(0) = E.row(static_cast<Index>(rng.uniform_index(
      static_cast<std::size_t>(n))));
  Vector nearest_d2(n);
  for (Index i = 0; i < n; ++i)
    nearest_d2(i) = (E.row(i) - centroids.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = nearest_d2.sum();
    Index pick;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double cum = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        cum += nearest_d2(i);
        if (cum >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.uniform_index(static_cast<std::size_t>(n)));
    }
    centroids.row(c) = E.row(pick);
    for (Index i = 0; i < n; ++i)
      nearest_d2(i) = std::min(
          nearest_d2(i), (E.row(i) - centroids.row(c)).squaredNorm());
  }

  LabelVector labels(static_cast<std::size_t>(n), 0);
  LabelVector prev = labels;
  int iter = 0;
  while (iter < 300) {
    // Assign to the nearest centroid, lowest index on ties.
    for (Index i = 0; i < n; ++i) {
      int best_c = 0;
      double best = (E.row(i) - centroids.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d2 = (E.row(i) - centroids.row(c)).squaredNorm();
        if (d2 < best) {
          best = d2;
          best_c = c;
        }
      }
      labels[static_cast<std::size_t>(i)] = best_c;
    }
    // Re-seed empty clusters from the point farthest from its centroid.
    std::vector<Index> count(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < labels.size(); ++i)
      ++count[static_cast<std::size_t>(labels[i])];
    for (int c = 0; c < k; ++c) {
      if (count[static_cast<std::size_t>(c)] > 0) continue;
      Index far = 0;
      double far_d2 = -1.0;
      for (Index i = 0; i < n; ++i) {
        const int ci = labels[static_cast<std::size_t>(i)];
        if (count[static_cast<std::size_t>(ci)] <= 1) continue;
        const double d2 = (E.row(i) - centroids.row(ci)).squaredNorm();
        if (d2 > far_d2) {
          far_d2 = d2;
          far = i;
        }
      }
      require(far_d2 >= 0.0, ErrorCode::NumericalFailure,
              "kmeans: unable to re-seed an empty cluster");
      --count[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = c;
      ++count[static_cast<std::size_t>(c)];
    }
    // Means update.
    Matrix next = Matrix::Zero(k, d);
    for (Index i = 0; i < n; ++i)
      next.row(labels[static_cast<std::size_t>(i)]) += E.row(i);
    for (int c = 0; c < k; ++c)
      next.row(c) /= static_cast<double>(count[static_cast<std::size_t>(c)]);
    const double movement = (next - centroids).squaredNorm();
    centroids = next;
    ++iter;
    if (labels == prev || movement <= 1e-6) break;
    prev = labels;
  }

  double inertia = 0.0;
  for (Index i = 0; i < n; ++i)
    inertia +=
        (E.row(i) - centroids.row(labels[static_cast<std::size_t>(i)]))
            .squaredNorm();
  return KMeansResult{std::move(labels), std::move(centroids), inertia, iter};
}

Matrix realify(const CMatrix& E) {
  Matrix R(E.rows(), 2 * E.cols());
  for (Index c = 0; c < E.cols(); ++c) {
    R.col(2 * c) = E.col(c).real();
    R.col(2 * c + 1) = E.col(c).imag();
  }
  return R;
}

CMatrix complexify(const Matrix& R) {
  require(R.cols() % 2 == 0, ErrorCode::InvalidInput,
          "complexify: column count must be even");
  CMatrix E(R.rows(), R.cols() / 2);
  for (Index c = 0; c < E.cols(); ++c)
    E.col(c) = R.col(2 * c) + Complex(0.0, 1.0) * R.col(2 * c + 1);
  return E;
}

double clustering_accuracy(const LabelVector& truth, const LabelVector& pred) {
  const auto table = contingency(truth, pred);
  const Index k = std::max(table.rows(), table.cols());
  Matrix cost = Matrix::Zero(k, k);
  for (Index i = 0; i < table.rows(); ++i)
    for (Index j = 0; j < table.cols(); ++j)
      cost(i, j) = -static_cast<double>(table(i, j));
  return -assignment_min_cost(cost) / static_cast<double>(truth.size());
}

double ari(const LabelVector& truth, const LabelVector& pred) {
  const auto table = contingency(truth, pred);
  const double n = static_cast<double>(truth.size());
  double sum_ij = 0.0;
  for (Index i = 0; i < table.rows(); ++i)
    for (Index j = 0; j < table.cols(); ++j)
      sum_ij += comb2(static_cast<double>(table(i, j)));
  double sum_a = 0.0;
  for (Index i = 0; i < table.rows(); ++i)
    sum_a += comb2(static_cast<double>(table.row(i).sum()));
  double sum_b = 0.0;
  for (Index j = 0; j < table.cols(); ++j)
    sum_b += comb2(static_cast<double>(table.col(j).sum()));
  const double expected = sum_a * sum_b / comb2(n);
  const double maximum = (sum_a + sum_b) / 2.0;
  if (maximum == expected) return 1.0;
  return (sum_ij - expected) / (maximum - expected);
}

double nmi(const LabelVector& truth, const LabelVector& pred) {
  const auto table = contingency(truth, pred);
  const double n = static_cast<double>(truth.size());
  Vector a(table.rows()), b(table.cols());
  for (Index i = 0; i < table.rows(); ++i)
    a(i) = static_cast<double>(table.row(i).sum());
  for (Index j = 0; j < table.cols(); ++j)
    b(j) = static_cast<double>(table.col(j).sum());
  double ht = 0.0, hp = 0.0;
  for (Index i = 0; i < a.size(); ++i)
    if (a(i) > 0.0) ht -= (a(i) / n) * std::log(a(i) / n);
  for (Index j = 0; j < b.size(); ++j)
    if (b(j) > 0.0) hp -= (b(j) / n) * std::log(b(j) / n);
  if (ht == 0.0 && hp == 0.0) return 1.0;
  if (ht == 0.0 || hp == 0.0) return 0.0;
  double info = 0.0;
  for (Index i = 0; i < table.rows(); ++i) {
    for (Index j = 0; j < table.cols(); ++j) {
      const double nij = static_cast<double>(table(i, j));
      if (nij == 0.0) continue;
      info += (nij / n) * std::log(nij * n / (a(i) * b(j)));
    }
  }
  return std::clamp(info / std::sqrt(ht * hp), 0.0, 1.0);
}

double fdr(const Matrix& E, const LabelVector& labels) {
  const Index n = E.rows();
  require(n > 0 && static_cast<std::size_t>(n) == labels.size(),
          ErrorCode::InvalidInput, "fdr: labels must match rows of E");
  int k = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0, ErrorCode::InvalidInput,
            "fdr: labels must be nonnegative");
    k = std::max(k, labels[i] + 1);
  }
  Matrix mu = Matrix::Zero(k, E.cols());
  Vector count = Vector::Zero(k);
  for (Index i = 0; i < n; ++i) {
    mu.row(labels[static_cast<std::size_t>(i)]) += E.row(i);
    count(labels[static_cast<std::size_t>(i)]) += 1.0;
  }
  for (int c = 0; c < k; ++c) {
    require(count(c) > 0.0, ErrorCode::InvalidInput,
            "fdr: every class in [0, K) must be nonempty");
    mu.row(c) /= count(c);
  }
  const Eigen::RowVectorXd grand = E.colwise().mean();
  double sw = 0.0, sb = 0.0;
  for (Index i = 0; i < n; ++i)
    sw += (E.row(i) - mu.row(labels[static_cast<std::size_t>(i)]))
              .squaredNorm();
  for (int c = 0; c < k; ++c)
    sb += count(c) * (mu.row(c) - grand).squaredNorm();
  if (sw == 0.0) return (sb == 0.0) ? 0.0 : kInf;
  return sb / sw;
}

ClassificationReport classification_metrics(const ConfusionMatrix& cm) {
  const auto& C = cm.counts;
  require(C.rows() == C.cols() && C.rows() > 0, ErrorCode::InvalidInput,
          "classification_metrics: confusion matrix must be square");
  require((C.array() >= 0).all(), ErrorCode::InvalidInput,
          "classification_metrics: counts must be nonnegative");
  const double n = static_cast<double>(C.sum());
  require(n > 0.0, ErrorCode::InvalidInput,
          "classification_metrics: confusion matrix is empty");
  const Index k = C.rows();
  double correct = 0.0;
  for (Index i = 0; i < k; ++i) correct += static_cast<double>(C(i, i));
  const double acc = correct / n;
  double f1_sum = 0.0;
  for (Index i = 0; i < k; ++i) {
    const double tp = static_cast<double>(C(i, i));
    const double fp = static_cast<double>(C.col(i).sum()) - tp;
    const double fn = static_cast<double>(C.row(i).sum()) - tp;
    const double prec = (tp + fp > 0.0) ? tp / (tp + fp) : 0.0;
    const double rec = (tp + fn > 0.0) ? tp / (tp + fn) : 0.0;
    f1_sum += (prec + rec > 0.0) ? 2.0 * prec * rec / (prec + rec) : 0.0;
  }
  double pe = 0.0;
  for (Index i = 0; i < k; ++i)
    pe += static_cast<double>(C.row(i).sum()) *
          static_cast<double>(C.col(i).sum()) / (n * n);
  double kappa;
  if (pe == 1.0)
    kappa = (acc == 1.0) ? 1.0 : 0.0;
  else
    kappa = (acc - pe) / (1.0 - pe);
  return ClassificationReport{acc, f1_sum / static_cast<double>(k), kappa};
}

Matrix fc(const Matrix& X) {
  const Index t = X.rows();
  const Index m = X.cols();
  require(t >= 2 && m >= 1, ErrorCode::InvalidInput,
          "fc: need at least two time points and one column");
  require(X.allFinite(), ErrorCode::InvalidInput, "fc: input not finite");
  Matrix dev = X.rowwise() - X.colwise().mean();
  Vector norm(m);
  for (Index j = 0; j < m; ++j) norm(j) = dev.col(j).norm();
  Matrix R(m, m);
  for (Index j = 0; j < m; ++j) {
    R(j, j) = 1.0;
    for (Index i = j + 1; i < m; ++i) {
      double r = 0.0;
      if (norm(i) > 0.0 && norm(j) > 0.0)
        r = std::clamp(dev.col(i).dot(dev.col(j)) / (norm(i) * norm(j)), -1.0,
                       1.0);
      R(i, j) = r;
      R(j, i) = r;
    }
  }
  return R;
}

double fc_error(const Matrix& FC, const Matrix& FC_G) {
  require(FC.rows() == FC.cols() && FC.rows() > 0, ErrorCode::InvalidInput,
          "fc_error: matrices must be square");
  require(FC.rows() == FC_G.rows() && FC.cols() == FC_G.cols(),
          ErrorCode::InvalidInput, "fc_error: shape mismatch");
  const double m = static_cast<double>(FC.rows());
  return (FC - FC_G).squaredNorm() / (m * m);
}

double fc_corr(const Matrix& FC, const Matrix& FC_G) {
  require(FC.rows() == FC.cols() && FC.rows() > 0, ErrorCode::InvalidInput,
          "fc_corr: matrices must be square");
  require(FC.rows() == FC_G.rows() && FC.cols() == FC_G.cols(),
          ErrorCode::InvalidInput, "fc_corr: shape mismatch");
  return pearson(FC.data(), FC_G.data(), FC.size());
}

EdgeDynamics edge_dynamics(const Matrix& X) {
  const Index t = X.rows();
  const Index m = X.cols();
  require(t >= 2 && m >= 2, ErrorCode::InvalidInput,
          "edge_dynamics: need at least 2 time points and 2 columns");
  require(X.allFinite(), ErrorCode::InvalidInput,
          "edge_dynamics: input not finite");
  Matrix Z = X.rowwise() - X.colwise().mean();
  for (Index j = 0; j < m; ++j) {
    const double sd =
        std::sqrt(Z.col(j).squaredNorm() / static_cast<double>(t - 1));
    require(sd > 0.0, ErrorCode::ZeroVariance,
            "edge_dynamics: column " + std::to_string(j) +
                " has zero variance");
    Z.col(j) /= sd;
  }
  EdgeDynamics out;
  out.edge_series.resize(t, m * (m - 1));
  Index col = 0;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      if (i == j) continue;
      out.edge_series.col(col++) = Z.col(i).cwiseProduct(Z.col(j));
    }
  Vector norms(t);
  for (Index r = 0; r < t; ++r) norms(r) = out.edge_series.row(r).norm();
  out.fcd.resize(t, t);
  for (Index r = 0; r < t; ++r) {
    out.fcd(r, r) = 1.0;
    for (Index s = r + 1; s < t; ++s) {
      double c = 0.0;
      if (norms(r) > 0.0 && norms(s) > 0.0)
        c = std::clamp(out.edge_series.row(r).dot(out.edge_series.row(s)) /
                           (norms(r) * norms(s)),
                       -1.0, 1.0);
      out.fcd(r, s) = c;
      out.fcd(s, r) = c;
    }
  }
  return out;
}

double ecm_entropy(const Matrix& fcd) {
  require(fcd.rows() == fcd.cols() && fcd.rows() >= 2, ErrorCode::InvalidInput,
          "ecm_entropy: FCD must be square with at least 2 rows");
  double mean = 0.0;
  Index count = 0;
  for (Index i = 0; i < fcd.rows(); ++i)
    for (Index j = i + 1; j < fcd.cols(); ++j) {
      mean += fcd(i, j);
      ++count;
    }
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (Index i = 0; i < fcd.rows(); ++i)
    for (Index j = i + 1; j < fcd.cols(); ++j) {
      const double dev = fcd(i, j) - mean;
      var += dev * dev;
    }
  var /= static_cast<double>(count);
  if (var == 0.0) return -kInf;
  constexpr double two_pi = 6.283185307179586;
  return 0.5 * std::log(two_pi * var) + 0.5;
}

double ecm_corr(const Vector& h_source, const Vector& h_embed) {
  require(h_source.size() == h_embed.size() && h_source.size() >= 2,
          ErrorCode::InvalidInput,
          "ecm_corr: profiles must match and have length >= 2");
  require(h_source.allFinite() && h_embed.allFinite(), ErrorCode::InvalidInput,
          "ecm_corr: profiles must be finite");
  return pearson(h_source.data(), h_embed.data(), h_source.size());
}

}  // namespace cdm
