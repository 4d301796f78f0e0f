// Copyright 2026 The Fabrics Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fabrics/fabric_terms.hpp"
#include "fabrics/lagrangian.hpp"
#include "fabrics/spec.hpp"
#include "fabrics/task_map.hpp"
#include "fabrics/types.hpp"

namespace fabrics {

// Star-shaped transform tree: one configuration-space root, one task map
// per leaf, and a spec or fabric term living on each leaf space. Fabric
// terms are lowered to their natural-form spec (M_e, M_e h2) before
// transport, so resolving the tree yields the metric-weighted combination
// of all leaf equations at the root.
struct TransformTree {
  struct Leaf {
    TaskMap map;
    std::variant<Spec, FabricTerm> content;
  };

  int root_dim = 0;
  std::vector<Leaf> leaves;

  void add(TaskMap map, Spec spec) {
    check_leaf(map, spec.dim);
    leaves.push_back({std::move(map), std::move(spec)});
  }

  void add(TaskMap map, FabricTerm term) {
    check_leaf(map, term.generator.dim);
    leaves.push_back({std::move(map), std::move(term)});
  }

 private:
  void check_leaf(const TaskMap& map, int content_dim) const {
    if (map.domain_dim != root_dim) {
      throw DimensionError("TransformTree: leaf map domain must equal root dim");
    }
    if (map.codomain_dim != content_dim) {
      throw DimensionError("TransformTree: leaf content dim must match map codomain");
    }
  }
};

inline Spec leaf_spec(const TransformTree::Leaf& leaf) {
  if (std::holds_alternative<Spec>(leaf.content)) {
    return std::get<Spec>(leaf.content);
  }
  return as_spec(std::get<FabricTerm>(leaf.content));
}

// Pullback-and-sum of every leaf at one root state.
inline SpecEval tree_resolve(const TransformTree& tree, const Vec& q,
                             const Vec& qd) {
  if (tree.leaves.empty()) throw DimensionError("tree_resolve: empty tree");
  SpecEval out{Mat::Zero(tree.root_dim, tree.root_dim), Vec::Zero(tree.root_dim)};
  for (const auto& leaf : tree.leaves) {
    const SpecEval e = pullback_eval(leaf_spec(leaf), leaf.map, q, qd);
    out.m += e.m;
    out.f += e.f;
  }
  return out;
}

// Closure view of the resolved tree.
inline Spec tree_spec(const TransformTree& tree) {
  Spec s;
  s.dim = tree.root_dim;
  s.metric = [tree](const Vec& q, const Vec& qd) {
    return tree_resolve(tree, q, qd).m;
  };
  s.force = [tree](const Vec& q, const Vec& qd) {
    return tree_resolve(tree, q, qd).f;
  };
  return s;
}

// Total fabric energy at the root: the sum of every term leaf's energy
// pulled back through its map. Its Hamiltonian is the conserved quantity
// of the energized fabric, and its Euler-Lagrange terms feed energization
// and speed regulation.
inline EnergyLagrangian tree_energy(const TransformTree& tree) {
  std::vector<EnergyLagrangian> parts;
  for (const auto& leaf : tree.leaves) {
    if (std::holds_alternative<FabricTerm>(leaf.content)) {
      parts.push_back(
          pullback_energy(std::get<FabricTerm>(leaf.content).energy, leaf.map));
    }
  }
  if (parts.empty()) {
    throw DimensionError("tree_energy: tree has no fabric-term leaves");
  }
  return sum_energies(std::move(parts));
}

// Root geometry generator of the combined fabric, h2 = M~^{-1} f~. Raises
// SingularMetricError where the accumulated metric is rank deficient.
inline GeometryGenerator tree_generator(const TransformTree& tree) {
  GeometryGenerator g;
  g.dim = tree.root_dim;
  g.accel = [tree](const Vec& q, const Vec& qd) -> Vec {
    return canonical_accel(tree_resolve(tree, q, qd));
  };
  return g;
}

}  // namespace fabrics
