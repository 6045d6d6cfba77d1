#pragma once

#include <array>
#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mlsg/point_id.hpp"
#include "mlsg/random_field.hpp"

namespace mlsg {

/// Uniform mesh of [0,1] (intervals) or [0,1]^2 (right triangles, each
/// square cut along its (i,j)-(i+1,j+1) diagonal). Consecutive levels are
/// nested because all squares are cut the same way.
class Mesh {
public:
    /// h = h0 * s^-level; 1/h0 must be an integer and s >= 2.
    static Mesh build(int dim, double h0, int refinement, int level);

    int dim() const { return dim_; }
    int level() const { return level_; }
    int refinement() const { return refinement_; }
    double h() const { return 1.0 / cells_per_side_; }
    /// Number of intervals along each axis.
    int cells_per_side() const { return cells_per_side_; }

    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int element_count() const;
    const std::vector<SpatialPoint>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 2>>& intervals() const { return intervals_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }

private:
    int dim_ = 1;
    int level_ = 0;
    int refinement_ = 2;
    int cells_per_side_ = 1;
    std::vector<SpatialPoint> vertices_;
    std::vector<std::array<int, 2>> intervals_;
    std::vector<std::array<int, 3>> triangles_;
};

/// Continuous Lagrange elements with homogeneous Dirichlet conditions:
/// degree 1..3 on intervals, degree 1 on triangles. Only interior nodes
/// carry degrees of freedom.
class FiniteElementSpace {
public:
    FiniteElementSpace(std::shared_ptr<const Mesh> mesh, int degree);

    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    int degree() const { return degree_; }
    int dof_count() const { return dof_count_; }

    /// Nodes per side including boundary nodes (1D: cells * r + 1).
    int nodes_per_side() const { return mesh_->cells_per_side() * degree_ + 1; }

    /// Coordinates of the interior nodes in DOF order.
    std::vector<SpatialPoint> dof_coordinates() const;

    /// DOF index of global node g (1D) or of node (i, j) (2D); -1 on the boundary.
    int dof_of_node(int i, int j = 0) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    int degree_ = 1;
    int dof_count_ = 0;
};

/// Finite element function: coefficients of the interior nodal basis.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(std::shared_ptr<const FiniteElementSpace> space);
    GridFunction(std::shared_ptr<const FiniteElementSpace> space, Eigen::VectorXd coefficients);

    const FiniteElementSpace& space() const { return *space_; }
    std::shared_ptr<const FiniteElementSpace> space_ptr() const { return space_; }
    const Eigen::VectorXd& coefficients() const { return coefficients_; }
    Eigen::VectorXd& coefficients() { return coefficients_; }
    bool empty() const { return space_ == nullptr; }

    /// Point evaluation; zero on the boundary.
    double value_at(const SpatialPoint& x) const;

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(double factor);
    /// this += factor * other
    GridFunction& add_scaled(double factor, const GridFunction& other);

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double f, GridFunction a) { return a *= f; }

private:
    void require_same_space(const GridFunction& other) const;

    std::shared_ptr<const FiniteElementSpace> space_;
    Eigen::VectorXd coefficients_;
};

using ScalarField = std::function<double(const SpatialPoint&)>;

struct SolveStats {
    int iterations = 0; // 0 for the direct solver
    /// Normwise backward error ||b - A x|| / (||A|| ||x|| + ||b||), infinity norms.
    double relative_residual = 0.0;
    bool direct = true;
};

/// Systems with at most this many unknowns use sparse Cholesky, larger ones
/// Jacobi-preconditioned conjugate gradients.
inline constexpr int kDirectSolverLimit = 40000;
inline constexpr double kSolverTolerance = 1e-12;

/// Galerkin solution of -div(a grad u) = f, u = 0 on the boundary.
/// Throws NumericalFailure if the system is not SPD or the backward error
/// stays above kSolverTolerance.
GridFunction assemble_solve(std::shared_ptr<const FiniteElementSpace> space, const ScalarField& a,
                            const ScalarField& f, SolveStats* stats = nullptr);

/// Stiffness matrix only, dense, for small diagnostic problems.
Eigen::MatrixXd assemble_stiffness_dense(const FiniteElementSpace& space, const ScalarField& a);

/// Exact representation of a coarse function on a nested finer space.
GridFunction prolongate(const GridFunction& coarse, std::shared_ptr<const FiniteElementSpace> fine_space);

enum class NormKind { L2, H1Semi };

double norm(const GridFunction& g, NormKind kind = NormKind::L2);

/// L2 distance to a given function, with quadrature well above the element order.
double l2_distance(const GridFunction& g, const ScalarField& exact);

/// Interpolant of a continuous function (nodal values at interior nodes).
GridFunction interpolate_nodal(std::shared_ptr<const FiniteElementSpace> space, const ScalarField& fn);

struct DiscretizationConfig {
    int dim = 1;
    double h0 = 0.125;
    int refinement = 4;
    int degree = 1;

    void validate() const;
};

inline constexpr int kMaxLevels = 16;

/// The parameterised elliptic problem on a hierarchy of nested meshes.
/// Spaces are created lazily and shared; solves are counted per level.
class LevelHierarchy {
public:
    LevelHierarchy(DiscretizationConfig disc, FieldConfig field);

    const DiscretizationConfig& discretization() const { return disc_; }
    const FieldConfig& field() const { return field_; }

    std::shared_ptr<const FiniteElementSpace> space(int level) const;
    double h(int level) const;
    int dof_count(int level) const;

    /// Machine-independent cost of one solve: n_dof (1D banded) or n_dof^1.5 (2D).
    double model_cost(int level) const;

    /// One uncached solve at parameter y.
    GridFunction solve(int level, const ParameterVector& y) const;

    long solve_count(int level) const;
    long total_solve_count() const;
    double solve_seconds(int level) const;

private:
    DiscretizationConfig disc_;
    FieldConfig field_;
    mutable std::mutex spaces_mutex_;
    mutable std::array<std::shared_ptr<const FiniteElementSpace>, kMaxLevels> spaces_;
    mutable std::array<std::atomic<long>, kMaxLevels> solves_{};
    mutable std::array<std::atomic<double>, kMaxLevels> seconds_{};
};

/// Memo of solutions keyed by (level, sparse-grid point). Concurrent lookups
/// are allowed; insertions take an exclusive lock.
class SolutionCache {
public:
    std::shared_ptr<const GridFunction> find(int level, const PointId& id) const;
    void insert(int level, const PointId& id, std::shared_ptr<const GridFunction> value);
    std::size_t size() const;
    void clear();

private:
    mutable std::mutex mutex_;
    std::map<std::pair<int, PointId>, std::shared_ptr<const GridFunction>> entries_;
};

/// Memoised solve at a labelled parameter point.
std::shared_ptr<const GridFunction> fem_solution(const LevelHierarchy& hierarchy, int level, const PointId& id,
                                                 const ParameterVector& y, SolutionCache& cache);

} // namespace mlsg
