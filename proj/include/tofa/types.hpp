#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace tofa {

using Matrix = Eigen::MatrixXd;
using IntMatrix = Eigen::MatrixXi;
using Vector = Eigen::VectorXd;

/// Platform node index, lexicographic over (x, y, z).
using NodeId = int;

/// entries[p] = node hosting process p.
using Mapping = std::vector<NodeId>;

}  // namespace tofa
