#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qnet/network.hpp"

namespace qnet {

struct RandomNetworkOptions {
  int min_leads = 2, max_leads = 4;
  int min_edges = 1, max_edges = 6;
  double min_length = 0.3, max_length = 2.0;
  double max_abs_potential = 3.0;
  double max_abs_delta = 2.0;
};

/// Connected simple graph (random spanning tree plus extra edges) with random
/// lengths, potentials, delta strengths and lead attachments.
inline Network random_network(std::mt19937_64& rng, const RandomNetworkOptions& opt = {}) {
  auto uni_int = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  const int ne = uni_int(opt.min_edges, opt.max_edges);
  // smallest vertex count that can hold ne simple edges
  int nv_min = 2;
  while (nv_min * (nv_min - 1) / 2 < ne) ++nv_min;
  const int nv = uni_int(nv_min, ne + 1);

  std::vector<Vertex> vertices;
  for (int v = 0; v < nv; ++v) {
    const double delta = uni(0.0, 1.0) < 0.3 ? uni(-opt.max_abs_delta, opt.max_abs_delta) : 0.0;
    vertices.push_back({"v" + std::to_string(v), delta});
  }
  std::set<std::pair<int, int>> used;
  std::vector<Edge> edges;
  auto add_edge = [&](int a, int b) {
    used.insert({std::min(a, b), std::max(a, b)});
    if (uni(0.0, 1.0) < 0.5) std::swap(a, b);
    edges.push_back({"e" + std::to_string(edges.size()), vertices[a].id, vertices[b].id,
                     uni(opt.min_length, opt.max_length), uni(-opt.max_abs_potential, opt.max_abs_potential)});
  };
  for (int v = 1; v < nv; ++v) add_edge(uni_int(0, v - 1), v);
  while (static_cast<int>(edges.size()) < ne) {
    const int a = uni_int(0, nv - 1), b = uni_int(0, nv - 1);
    if (a == b || used.count({std::min(a, b), std::max(a, b)})) continue;
    add_edge(a, b);
  }
  std::vector<Lead> leads;
  const int nl = uni_int(opt.min_leads, opt.max_leads);
  for (int l = 0; l < nl; ++l) leads.push_back({"L" + std::to_string(l), vertices[uni_int(0, nv - 1)].id});
  return Network(std::move(vertices), std::move(edges), std::move(leads));
}

/// An energy above every edge potential (and above 0) by a random margin.
inline double random_energy_above(std::mt19937_64& rng, const Network& net, double min_margin = 0.3,
                                  double max_margin = 5.0) {
  double top = 0.0;
  for (const auto& e : net.edges()) top = std::max(top, e.potential);
  return top + std::uniform_real_distribution<double>(min_margin, max_margin)(rng);
}

}  // namespace qnet
