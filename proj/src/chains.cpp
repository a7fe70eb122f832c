#include "spilab/chains.hpp"

#include <algorithm>

namespace spilab {
namespace {

struct TarjanState {
  const std::vector<double>* matrix;
  int n = 0;
  int counter = 0;
  std::vector<int> index, lowlink, stack;
  std::vector<bool> on_stack;
  std::vector<std::vector<int>> components;

  double edge(int u, int v) const { return (*matrix)[static_cast<std::size_t>(u) * n + v]; }

  // Iterative Tarjan to keep recursion depth independent of chain size.
  void run(int root) {
    struct Frame {
      int v;
      int next_child;
    };
    std::vector<Frame> frames;
    frames.push_back({root, 0});
    index[root] = lowlink[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      bool descended = false;
      while (f.next_child < n) {
        const int w = f.next_child++;
        if (edge(f.v, w) <= 0.0) continue;
        if (index[w] < 0) {
          index[w] = lowlink[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) lowlink[f.v] = std::min(lowlink[f.v], index[w]);
      }
      if (descended) continue;
      const int v = f.v;
      frames.pop_back();
      if (!frames.empty()) {
        lowlink[frames.back().v] = std::min(lowlink[frames.back().v], lowlink[v]);
      }
      if (lowlink[v] == index[v]) {
        std::vector<int> component;
        while (true) {
          const int w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component.push_back(w);
          if (w == v) break;
        }
        std::sort(component.begin(), component.end());
        components.push_back(std::move(component));
      }
    }
  }
};

}  // namespace

std::vector<int> ChainStructure::closed_class_indices() const {
  std::vector<int> out;
  for (int c = 0; c < static_cast<int>(classes.size()); ++c) {
    if (closed[c]) out.push_back(c);
  }
  return out;
}

ChainStructure analyze_chain(const std::vector<double>& matrix, int n) {
  TarjanState t;
  t.matrix = &matrix;
  t.n = n;
  t.index.assign(n, -1);
  t.lowlink.assign(n, -1);
  t.on_stack.assign(n, false);
  for (int s = 0; s < n; ++s) {
    if (t.index[s] < 0) t.run(s);
  }
  ChainStructure out;
  out.classes = std::move(t.components);
  // Deterministic order: sort classes by their smallest state.
  std::sort(out.classes.begin(), out.classes.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) { return a[0] < b[0]; });
  out.class_of.assign(n, -1);
  for (int c = 0; c < static_cast<int>(out.classes.size()); ++c) {
    for (int s : out.classes[c]) out.class_of[s] = c;
  }
  out.closed.assign(out.classes.size(), true);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (matrix[static_cast<std::size_t>(u) * n + v] > 0.0 &&
          out.class_of[u] != out.class_of[v]) {
        out.closed[out.class_of[u]] = false;
      }
    }
  }
  return out;
}

std::vector<int> reachable_states(const std::vector<double>& matrix, int n, int from) {
  std::vector<bool> seen(n, false);
  std::vector<int> frontier{from};
  seen[from] = true;
  while (!frontier.empty()) {
    const int u = frontier.back();
    frontier.pop_back();
    for (int v = 0; v < n; ++v) {
      if (!seen[v] && matrix[static_cast<std::size_t>(u) * n + v] > 0.0) {
        seen[v] = true;
        frontier.push_back(v);
      }
    }
  }
  std::vector<int> out;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) out.push_back(s);
  }
  return out;
}

std::string format_state_set(const std::vector<int>& states) {
  std::string out = "{";
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(states[i]);
  }
  out += "}";
  return out;
}

}  // namespace spilab
