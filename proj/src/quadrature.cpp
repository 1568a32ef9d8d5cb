#include "dfock/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace dfock {

namespace {

GaussRule make_gauss(int n) {
  if (n < 1) throw ConfigError("gauss_legendre: n must be positive");
  GaussRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const int m = (n + 1) / 2;
  for (int i = 1; i <= m; ++i) {
    double z = std::cos(kPi * (i - 0.25) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) break;
    }
    rule.nodes[i - 1] = -z;
    rule.nodes[n - i] = z;
    rule.weights[i - 1] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[n - i] = rule.weights[i - 1];
  }
  return rule;
}

DiskRule make_disk(int n_rad, int n_ang) {
  if (n_rad < 1 || n_ang < 1) throw ConfigError("disk_rule: node counts must be positive");
  const GaussRule& g = gauss_legendre(n_rad);
  DiskRule rule;
  rule.n_rad = n_rad;
  rule.n_ang = n_ang;
  rule.max_degree = std::min({n_rad - 1, (n_ang - 1) / 2, 48});
  const Eigen::Index n = static_cast<Eigen::Index>(n_rad) * n_ang;
  rule.points.resize(n);
  rule.weights.resize(n);
  const double dtheta = 2.0 * kPi / n_ang;
  Eigen::Index idx = 0;
  for (int i = 0; i < n_rad; ++i) {
    const double s = 0.5 * (g.nodes[i] + 1.0);
    const double ws = 0.5 * g.weights[i] * s * dtheta;
    for (int j = 0; j < n_ang; ++j, ++idx) {
      const double theta = (j + 0.5) * dtheta;
      rule.points[idx] = std::polar(s, theta);
      rule.weights[idx] = ws;
    }
  }
  rule.powers.resize(n, rule.max_degree + 1);
  rule.powers.col(0).setOnes();
  for (int k = 1; k <= rule.max_degree; ++k)
    rule.powers.col(k) = rule.powers.col(k - 1).cwiseProduct(rule.points);
  return rule;
}

std::mutex g_cache_mutex;
std::map<int, std::unique_ptr<GaussRule>> g_gauss_cache;
std::map<std::pair<int, int>, std::unique_ptr<DiskRule>> g_disk_cache;

}  // namespace

const GaussRule& gauss_legendre(int n) {
  {
    std::lock_guard lock(g_cache_mutex);
    auto it = g_gauss_cache.find(n);
    if (it != g_gauss_cache.end()) return *it->second;
  }
  auto rule = std::make_unique<GaussRule>(make_gauss(n));
  std::lock_guard lock(g_cache_mutex);
  auto [it, inserted] = g_gauss_cache.emplace(n, std::move(rule));
  return *it->second;
}

const DiskRule& disk_rule(int n_rad, int n_ang) {
  const auto key = std::make_pair(n_rad, n_ang);
  {
    std::lock_guard lock(g_cache_mutex);
    auto it = g_disk_cache.find(key);
    if (it != g_disk_cache.end()) return *it->second;
  }
  auto rule = std::make_unique<DiskRule>(make_disk(n_rad, n_ang));
  std::lock_guard lock(g_cache_mutex);
  auto [it, inserted] = g_disk_cache.emplace(key, std::move(rule));
  return *it->second;
}

}  // namespace dfock
