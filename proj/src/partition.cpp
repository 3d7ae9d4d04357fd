#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "capm/partition_prior.hpp"
#include "capm/types.hpp"

namespace capm {

Partition Partition::from_labels(std::vector<int> raw) {
  Partition p;
  p.labels.resize(raw.size());
  std::unordered_map<int, int> remap;
  int next = 0;
  for (std::size_t t = 0; t < raw.size(); ++t) {
    auto [it, inserted] = remap.try_emplace(raw[t], next);
    if (inserted) ++next;
    p.labels[t] = it->second;
  }
  p.num_clusters = next;
  if (p.labels.empty()) throw std::invalid_argument("Partition: empty label sequence");
  return p;
}

Partition Partition::single_cluster(int T) {
  return from_labels(std::vector<int>(T, 0));
}

Partition Partition::singletons(int T) {
  std::vector<int> raw(T);
  for (int t = 0; t < T; ++t) raw[t] = t;
  return from_labels(std::move(raw));
}

Partition Partition::from_clusters(int T, const std::vector<std::vector<int>>& clusters) {
  std::vector<int> raw(T, -1);
  int d = 0;
  for (const auto& S : clusters) {
    for (int t : S) {
      if (t < 0 || t >= T) throw std::invalid_argument("Partition: index out of range");
      if (raw[t] != -1) throw std::invalid_argument("Partition: overlapping clusters");
      raw[t] = d;
    }
    ++d;
  }
  for (int t = 0; t < T; ++t)
    if (raw[t] == -1) throw std::invalid_argument("Partition: clusters do not cover all indices");
  return from_labels(std::move(raw));
}

std::vector<int> Partition::cluster_sizes() const {
  std::vector<int> sizes(num_clusters, 0);
  for (int lab : labels) ++sizes[lab];
  return sizes;
}

std::vector<std::vector<int>> Partition::members() const {
  std::vector<std::vector<int>> m(num_clusters);
  for (int t = 0; t < size(); ++t) m[labels[t]].push_back(t);
  return m;
}

double log_cohesion(int cluster_size, double c) {
  if (cluster_size < 1) throw std::invalid_argument("log_cohesion: cluster_size must be >= 1");
  if (c <= 0) throw std::invalid_argument("log_cohesion: c must be > 0");
  return std::log(c) + std::lgamma(static_cast<double>(cluster_size));
}

double log_partition_prior_unnormalized(const Partition& p, double c) {
  double lp = 0.0;
  for (int s : p.cluster_sizes()) lp += log_cohesion(s, c);
  return lp;
}

BigInt bell_number(int n) {
  if (n < 0) throw std::invalid_argument("bell_number: n must be >= 0");
  // B(a+1) = sum_k C(a,k) B(k), B(0) = 1
  std::vector<BigInt> bell(n + 1);
  bell[0] = 1;
  std::vector<BigInt> binom{1};  // row a of Pascal's triangle
  for (int a = 0; a < n; ++a) {
    BigInt next = 0;
    for (int k = 0; k <= a; ++k) next += binom[k] * bell[k];
    bell[a + 1] = next;
    binom.push_back(1);
    for (int k = a; k >= 1; --k) binom[k] += binom[k - 1];
  }
  return bell[n];
}

namespace {

void grow(std::vector<int>& labels, int t, int T, int used,
          std::vector<Partition>& out) {
  if (t == T) {
    out.push_back(Partition::from_labels(labels));
    return;
  }
  // restricted growth: label of t is at most one past the labels used so far
  for (int lab = 0; lab <= used; ++lab) {
    labels[t] = lab;
    grow(labels, t + 1, T, std::max(used, lab + 1), out);
  }
}

}  // namespace

std::vector<Partition> enumerate_partitions(int T) {
  if (T < 1) throw std::invalid_argument("enumerate_partitions: T must be >= 1");
  if (T > 12) throw std::invalid_argument("enumerate_partitions: refused for T > 12");
  std::vector<Partition> out;
  std::vector<int> labels(T, 0);
  grow(labels, 1, T, 1, out);
  return out;
}

double exact_partition_prior(const Partition& p, double c) {
  const int T = p.size();
  const auto all = enumerate_partitions(T);
  double total = 0.0;
  for (const auto& q : all) total += std::exp(log_partition_prior_unnormalized(q, c));
  return std::exp(log_partition_prior_unnormalized(p, c)) / total;
}

}  // namespace capm
