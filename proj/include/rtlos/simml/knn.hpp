#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rtlos/error.hpp"

namespace rtlos::simml {

// One neighbor candidate; ordered by distance, then by training row.
struct Neighbor {
  double distance = 0.0;
  std::size_t index = 0;

  bool operator<(const Neighbor& o) const {
    return distance < o.distance || (distance == o.distance && index < o.index);
  }
};

// Per-feature min-max scaling fitted on training data. Constant columns map
// to 0.
class MinMaxScaler {
 public:
  void fit(const std::vector<double>& rows, std::size_t dims) {
    lo_.assign(dims, std::numeric_limits<double>::infinity());
    hi_.assign(dims, -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r * dims < rows.size(); ++r)
      for (std::size_t d = 0; d < dims; ++d) {
        lo_[d] = std::min(lo_[d], rows[r * dims + d]);
        hi_[d] = std::max(hi_[d], rows[r * dims + d]);
      }
  }

  double apply(std::size_t d, double v) const {
    const double span = hi_[d] - lo_[d];
    return span > 0.0 ? (v - lo_[d]) / span : 0.0;
  }

  std::size_t dims() const { return lo_.size(); }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  void set(std::vector<double> lo, std::vector<double> hi) {
    lo_ = std::move(lo);
    hi_ = std::move(hi);
  }

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

// k-nearest-neighbor regressor under the L1 metric in min-max scaled space.
// The prediction is the unweighted mean label of the k nearest training rows.
// A k-d tree answers queries; exhaustive() is the reference scan. Both return
// exactly the same neighbor set, ties included.
class KnnRegressor {
 public:
  static constexpr int kFormatVersion = 1;
  static constexpr std::size_t kLeafSize = 16;

  KnnRegressor() = default;

  // `rows` is row-major with `dims` columns.
  void fit(std::vector<double> rows, std::vector<double> labels, std::size_t dims, int k = 2) {
    if (dims == 0) throw std::invalid_argument("knn needs at least one feature");
    if (rows.size() != labels.size() * dims) throw std::invalid_argument("knn rows/labels size mismatch");
    if (k < 1 || static_cast<std::size_t>(k) > labels.size())
      throw std::invalid_argument("knn requires 1 <= k <= training size");
    dims_ = dims;
    k_ = k;
    scaler_.fit(rows, dims);
    points_ = std::move(rows);
    for (std::size_t r = 0; r < labels.size(); ++r)
      for (std::size_t d = 0; d < dims; ++d) points_[r * dims + d] = scaler_.apply(d, points_[r * dims + d]);
    labels_ = std::move(labels);
    build();
  }

  bool fitted() const { return !labels_.empty(); }
  int k() const { return k_; }
  std::size_t dims() const { return dims_; }
  std::size_t size() const { return labels_.size(); }

  std::vector<Neighbor> neighbors(const double* query) const {
    const auto q = scale(query);
    std::vector<Neighbor> best;
    best.reserve(static_cast<std::size_t>(k_) + 1);
    search(0, q, best);
    std::sort(best.begin(), best.end());
    return best;
  }

  std::vector<Neighbor> exhaustive(const double* query) const {
    const auto q = scale(query);
    std::vector<Neighbor> all;
    all.reserve(labels_.size());
    for (std::size_t r = 0; r < labels_.size(); ++r) all.push_back({distance(q, r), r});
    std::partial_sort(all.begin(), all.begin() + k_, all.end());
    all.resize(static_cast<std::size_t>(k_));
    return all;
  }

  double predict(const double* query) const { return mean_label(neighbors(query)); }
  double predict(const std::vector<double>& query) const {
    check(query);
    return predict(query.data());
  }
  double predict_exhaustive(const std::vector<double>& query) const {
    check(query);
    return mean_label(exhaustive(query.data()));
  }

  // Text dump: header, k and dims, scaler bounds, then one row per training
  // point (scaled features and label) at full precision.
  void save(std::ostream& out) const {
    const auto precision = out.precision(17);
    out << "rtlos-knn " << kFormatVersion << " manhattan\n";
    out << k_ << ' ' << dims_ << ' ' << labels_.size() << '\n';
    for (double v : scaler_.lo()) out << v << ' ';
    out << '\n';
    for (double v : scaler_.hi()) out << v << ' ';
    out << '\n';
    for (std::size_t r = 0; r < labels_.size(); ++r) {
      for (std::size_t d = 0; d < dims_; ++d) out << points_[r * dims_ + d] << ' ';
      out << labels_[r] << '\n';
    }
    out.precision(precision);
  }

  static KnnRegressor load(std::istream& in) {
    std::string magic, metric;
    int version = 0;
    if (!(in >> magic >> version >> metric) || magic != "rtlos-knn" || version != kFormatVersion ||
        metric != "manhattan")
      throw ConfigError("not an rtlos-knn v1 model file");
    KnnRegressor m;
    std::size_t n = 0;
    if (!(in >> m.k_ >> m.dims_ >> n)) throw ConfigError("truncated knn model header");
    std::vector<double> lo(m.dims_), hi(m.dims_);
    for (auto& v : lo) in >> v;
    for (auto& v : hi) in >> v;
    m.scaler_.set(std::move(lo), std::move(hi));
    m.points_.resize(n * m.dims_);
    m.labels_.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t d = 0; d < m.dims_; ++d) in >> m.points_[r * m.dims_ + d];
      in >> m.labels_[r];
    }
    if (!in) throw ConfigError("truncated knn model body");
    if (m.k_ < 1 || static_cast<std::size_t>(m.k_) > n) throw ConfigError("knn model has invalid k");
    m.build();
    return m;
  }

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t dim = 0;
    double split = 0.0;
    std::int64_t left = -1;
    std::int64_t right = -1;
  };

  // L1 distance from q to the bounding box of node `id`.
  double box_distance(const std::vector<double>& q, std::int64_t id) const {
    const double* lo = &box_lo_[static_cast<std::size_t>(id) * dims_];
    const double* hi = &box_hi_[static_cast<std::size_t>(id) * dims_];
    double s = 0.0;
    for (std::size_t d = 0; d < dims_; ++d) {
      if (q[d] < lo[d]) s += lo[d] - q[d];
      else if (q[d] > hi[d]) s += q[d] - hi[d];
    }
    return s;
  }

  void check(const std::vector<double>& query) const {
    if (!fitted()) throw std::logic_error("knn model not fitted");
    if (query.size() != dims_) throw std::invalid_argument("query has wrong dimensionality");
  }

  std::vector<double> scale(const double* query) const {
    std::vector<double> q(dims_);
    for (std::size_t d = 0; d < dims_; ++d) q[d] = scaler_.apply(d, query[d]);
    return q;
  }

  double distance(const std::vector<double>& q, std::size_t row) const {
    double s = 0.0;
    const double* p = &points_[row * dims_];
    for (std::size_t d = 0; d < dims_; ++d) s += std::fabs(q[d] - p[d]);
    return s;
  }

  // Stops once the partial sum exceeds `limit`; the result is then only
  // known to be larger than `limit`, which is all a rejection needs.
  double distance_bounded(const std::vector<double>& q, std::size_t row, double limit) const {
    double s = 0.0;
    const double* p = &points_[row * dims_];
    for (std::size_t d = 0; d < dims_; ++d) {
      s += std::fabs(q[d] - p[d]);
      if (s > limit) return s;
    }
    return s;
  }

  double mean_label(const std::vector<Neighbor>& nn) const {
    double s = 0.0;
    for (const auto& n : nn) s += labels_[n.index];
    return s / static_cast<double>(nn.size());
  }

  void build() {
    order_.resize(labels_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    nodes_.clear();
    box_lo_.clear();
    box_hi_.clear();
    make_node(0, order_.size());
  }

  std::int64_t make_node(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::int64_t>(nodes_.size());
    nodes_.push_back({begin, end});
    const auto base = box_lo_.size();
    box_lo_.resize(base + dims_, std::numeric_limits<double>::infinity());
    box_hi_.resize(base + dims_, -std::numeric_limits<double>::infinity());
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t d = 0; d < dims_; ++d) {
        const double v = points_[order_[i] * dims_ + d];
        box_lo_[base + d] = std::min(box_lo_[base + d], v);
        box_hi_[base + d] = std::max(box_hi_[base + d], v);
      }
    if (end - begin <= kLeafSize) return id;

    std::size_t best_dim = 0;
    double best_spread = -1.0;
    for (std::size_t d = 0; d < dims_; ++d) {
      const double lo = box_lo_[base + d], hi = box_hi_[base + d];
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = d;
      }
    }
    if (best_spread <= 0.0) return id;  // all points identical

    const std::size_t mid = begin + (end - begin) / 2;
    auto key = [&](std::size_t row) { return points_[row * dims_ + best_dim]; };
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    const double split = key(order_[mid]);
    const auto left = make_node(begin, mid);
    const auto right = make_node(mid, end);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.dim = best_dim;
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
  }

  void offer(std::vector<Neighbor>& best, Neighbor cand) const {
    const auto k = static_cast<std::size_t>(k_);
    if (best.size() < k) {
      best.push_back(cand);
      std::push_heap(best.begin(), best.end());
    } else if (cand < best.front()) {
      std::pop_heap(best.begin(), best.end());
      best.back() = cand;
      std::push_heap(best.begin(), best.end());
    }
  }

  // A node is skipped only when the L1 distance to its bounding box exceeds
  // the current k-th distance by more than rounding, so equal-distance rows
  // with a lower index are never missed.
  bool prunable(double bound, const std::vector<Neighbor>& best) const {
    return best.size() == static_cast<std::size_t>(k_) && bound > best.front().distance * (1.0 + 1e-12) + 1e-300;
  }

  void search(std::int64_t id, const std::vector<double>& q, std::vector<Neighbor>& best) const {
    const auto& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const double limit = best.size() == static_cast<std::size_t>(k_) ? best.front().distance
                                                                         : std::numeric_limits<double>::infinity();
        offer(best, {distance_bounded(q, order_[i], limit), order_[i]});
      }
      return;
    }
    double near_bound = box_distance(q, node.left);
    double far_bound = box_distance(q, node.right);
    auto near = node.left, far = node.right;
    if (far_bound < near_bound) {
      std::swap(near, far);
      std::swap(near_bound, far_bound);
    }
    if (!prunable(near_bound, best)) search(near, q, best);
    if (!prunable(far_bound, best)) search(far, q, best);
  }

  std::size_t dims_ = 0;
  int k_ = 2;
  MinMaxScaler scaler_;
  std::vector<double> points_;
  std::vector<double> labels_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::vector<double> box_lo_;  // per node, dims_ values each
  std::vector<double> box_hi_;
};

}  // namespace rtlos::simml
