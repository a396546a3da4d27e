#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "fmsos/errors.hpp"
#include "fmsos/metrics.hpp"

namespace fmsos {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFlowEps = 1e-15;

void check_weights(const WeightedAtoms& w, const char* which) {
  if (w.atoms.empty() || w.atoms.size() != w.weights.size()) {
    throw DomainError(std::string(which) + ": atoms and weights must be nonempty and of equal length");
  }
  double total = 0.0;
  for (double x : w.weights) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(which) + ": weights must be positive");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError(std::string(which) + ": weights must sum to 1");
}

struct Edge {
  int to;
  int rev;
  double cap;
  double cost;
};

class MinCostFlow {
public:
  explicit MinCostFlow(int n) : graph_(static_cast<std::size_t>(n)) {}

  void add_edge(int from, int to, double cap, double cost) {
    auto& gf = graph_[static_cast<std::size_t>(from)];
    auto& gt = graph_[static_cast<std::size_t>(to)];
    gf.push_back({to, static_cast<int>(gt.size()), cap, cost});
    gt.push_back({from, static_cast<int>(gf.size()) - 1, 0.0, -cost});
  }

  // Successive shortest paths with dense Dijkstra and Johnson potentials.
  double run(int s, int t, double demand) {
    const auto n = graph_.size();
    std::vector<double> potential(n, 0.0);
    std::vector<double> dist(n);
    std::vector<int> prev_node(n);
    std::vector<int> prev_edge(n);
    std::vector<char> done(n);
    double flow = 0.0;
    double total_cost = 0.0;
    while (flow < demand - 1e-12) {
      std::fill(dist.begin(), dist.end(), kInf);
      std::fill(done.begin(), done.end(), 0);
      dist[static_cast<std::size_t>(s)] = 0.0;
      for (;;) {
        int u = -1;
        for (std::size_t v = 0; v < n; ++v) {
          if (!done[v] && dist[v] < kInf && (u < 0 || dist[v] < dist[static_cast<std::size_t>(u)])) {
            u = static_cast<int>(v);
          }
        }
        if (u < 0) break;
        const auto uu = static_cast<std::size_t>(u);
        done[uu] = 1;
        for (std::size_t e = 0; e < graph_[uu].size(); ++e) {
          const Edge& edge = graph_[uu][e];
          if (edge.cap <= kFlowEps) continue;
          const auto v = static_cast<std::size_t>(edge.to);
          const double reduced = std::max(0.0, edge.cost + potential[uu] - potential[v]);
          if (dist[uu] + reduced < dist[v]) {
            dist[v] = dist[uu] + reduced;
            prev_node[v] = u;
            prev_edge[v] = static_cast<int>(e);
          }
        }
      }
      const auto tt = static_cast<std::size_t>(t);
      if (dist[tt] == kInf) break;
      for (std::size_t v = 0; v < n; ++v) {
        if (dist[v] < kInf) potential[v] += dist[v];
      }
      double push = demand - flow;
      for (int v = t; v != s; v = prev_node[static_cast<std::size_t>(v)]) {
        const auto vv = static_cast<std::size_t>(v);
        push = std::min(push, graph_[static_cast<std::size_t>(prev_node[vv])][static_cast<std::size_t>(prev_edge[vv])].cap);
      }
      for (int v = t; v != s; v = prev_node[static_cast<std::size_t>(v)]) {
        const auto vv = static_cast<std::size_t>(v);
        Edge& edge = graph_[static_cast<std::size_t>(prev_node[vv])][static_cast<std::size_t>(prev_edge[vv])];
        edge.cap -= push;
        graph_[vv][static_cast<std::size_t>(edge.rev)].cap += push;
        total_cost += push * edge.cost;
      }
      flow += push;
    }
    return total_cost;
  }

  const std::vector<Edge>& edges(int node) const { return graph_[static_cast<std::size_t>(node)]; }

private:
  std::vector<std::vector<Edge>> graph_;
};

} // namespace

TransportPlan optimal_transport_plan(const WeightedAtoms& mu, const WeightedAtoms& nu) {
  check_weights(mu, "source measure");
  check_weights(nu, "target measure");
  const int a = static_cast<int>(mu.atoms.size());
  const int b = static_cast<int>(nu.atoms.size());
  if (mu.atoms.front().dim() != nu.atoms.front().dim()) {
    throw DomainError("measures live on spheres of different dimension");
  }
  const int source = 0;
  const int sink = a + b + 1;
  MinCostFlow flow(a + b + 2);
  for (int i = 0; i < a; ++i) flow.add_edge(source, 1 + i, mu.weights[static_cast<std::size_t>(i)], 0.0);
  for (int i = 0; i < a; ++i) {
    for (int j = 0; j < b; ++j) {
      const double d = geodesic_distance(mu.atoms[static_cast<std::size_t>(i)], nu.atoms[static_cast<std::size_t>(j)]);
      flow.add_edge(1 + i, 1 + a + j, kInf, d);
    }
  }
  for (int j = 0; j < b; ++j) flow.add_edge(1 + a + j, sink, nu.weights[static_cast<std::size_t>(j)], 0.0);

  const double mass = std::min(std::accumulate(mu.weights.begin(), mu.weights.end(), 0.0),
                               std::accumulate(nu.weights.begin(), nu.weights.end(), 0.0));
  TransportPlan plan;
  plan.cost = flow.run(source, sink, mass);
  plan.coupling = Eigen::MatrixXd::Zero(a, b);
  for (int i = 0; i < a; ++i) {
    for (const Edge& e : flow.edges(1 + i)) {
      if (e.to > a && e.to <= a + b) {
        // Flow on a forward edge equals the residual capacity of its reverse edge.
        plan.coupling(i, e.to - 1 - a) = flow.edges(e.to)[static_cast<std::size_t>(e.rev)].cap;
      }
    }
  }
  return plan;
}

double wasserstein1_discrete(const WeightedAtoms& mu, const WeightedAtoms& nu) {
  return optimal_transport_plan(mu, nu).cost;
}

} // namespace fmsos
