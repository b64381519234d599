// Times the OpenMP Gram-matrix path against the serial reference on
// random graphs and checks they agree.

#include <chrono>
#include <iostream>

#include "graphbo/bench.hpp"
#include "graphbo/candidate.hpp"
#include "graphbo/wl.hpp"

using namespace graphbo;

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 400;
  int H = argc > 2 ? std::atoi(argv[2]) : 2;

  Rng rng(7);
  SearchSpaceSpec spec = SyntheticObjective::search_space();
  std::vector<LabeledDigraph> graphs;
  for (int i = 0; i < n; ++i) graphs.push_back(random_graph(spec, rng));

  KernelConfig cfg;
  cfg.H = H;

  auto time = [&](auto&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    auto r = fn(graphs, cfg);
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::make_pair(std::move(r), s);
  };

  auto [serial, t_serial] = time([](auto& g, auto& c) { return gram_serial(g, c); });
  auto [parallel, t_parallel] = time([](auto& g, auto& c) { return gram(g, c); });

  double max_diff = (serial.gram - parallel.gram).cwiseAbs().maxCoeff();
  std::cout << "graphs=" << n << " H=" << H << "\n"
            << "serial   " << t_serial << " s\n"
            << "parallel " << t_parallel << " s  (speedup "
            << t_serial / t_parallel << "x)\n"
            << "max |serial - parallel| = " << max_diff << "\n";
  return max_diff == 0.0 ? 0 : 1;
}
