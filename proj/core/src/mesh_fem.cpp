#include "mlsg/mesh_fem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "mlsg/errors.hpp"
#include "mlsg/quadrature.hpp"

namespace mlsg {

namespace {

/// Lagrange basis of degree r on equispaced nodes k / r of [0, 1].
struct ReferenceBasis1D {
    int degree;

    double value(int k, double xi) const
    {
        double v = 1.0;
        for (int m = 0; m <= degree; ++m) {
            if (m != k)
                v *= (xi - static_cast<double>(m) / degree) / (static_cast<double>(k - m) / degree);
        }
        return v;
    }

    double derivative(int k, double xi) const
    {
        double sum = 0.0;
        for (int skip = 0; skip <= degree; ++skip) {
            if (skip == k)
                continue;
            double term = 1.0 / (static_cast<double>(k - skip) / degree);
            for (int m = 0; m <= degree; ++m) {
                if (m != k && m != skip)
                    term *= (xi - static_cast<double>(m) / degree) / (static_cast<double>(k - m) / degree);
            }
            sum += term;
        }
        return sum;
    }
};

/// Gauss rule mapped to [0, 1] with weights summing to 1.
QuadratureRule1D unit_gauss(int n)
{
    QuadratureRule1D rule = gauss_legendre(n);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        rule.nodes[q] = 0.5 * (rule.nodes[q] + 1.0);
        rule.weights[q] *= 0.5;
    }
    return rule;
}

/// Coefficient of global 1D node g, zero on the boundary.
double nodal_value_1d(const GridFunction& g, int node)
{
    const int dof = g.space().dof_of_node(node);
    return dof < 0 ? 0.0 : g.coefficients()[dof];
}

double nodal_value_2d(const GridFunction& g, int i, int j)
{
    const int dof = g.space().dof_of_node(i, j);
    return dof < 0 ? 0.0 : g.coefficients()[dof];
}

/// Value of a P1 function on the unit-square cell with corner values
/// u00, u10, u01, u11 at local coordinates (xi, eta).
double p1_cell_value(double u00, double u10, double u01, double u11, double xi, double eta)
{
    if (xi >= eta)
        return u00 * (1.0 - xi) + u10 * (xi - eta) + u11 * eta;
    return u00 * (1.0 - eta) + u11 * xi + u01 * (eta - xi);
}

struct Triangle {
    std::array<SpatialPoint, 3> v;
    std::array<std::array<double, 2>, 3> grad; // gradients of barycentric coordinates
    double area;
};

Triangle make_triangle(const SpatialPoint& a, const SpatialPoint& b, const SpatialPoint& c)
{
    Triangle t{{a, b, c}, {}, 0.0};
    const double det = (b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2);
    t.area = 0.5 * std::abs(det);
    t.grad[0] = {(b.x2 - c.x2) / det, (c.x1 - b.x1) / det};
    t.grad[1] = {(c.x2 - a.x2) / det, (a.x1 - c.x1) / det};
    t.grad[2] = {(a.x2 - b.x2) / det, (b.x1 - a.x1) / det};
    return t;
}

SpatialPoint triangle_point(const Triangle& t, double xi, double eta)
{
    const double l0 = 1.0 - xi - eta;
    return {l0 * t.v[0].x1 + xi * t.v[1].x1 + eta * t.v[2].x1, l0 * t.v[0].x2 + xi * t.v[1].x2 + eta * t.v[2].x2};
}

int integer_inverse(double h0)
{
    if (!(h0 > 0.0) || h0 > 1.0)
        throw InvalidArgument("h0 must lie in (0, 1]");
    const double inv = 1.0 / h0;
    const double rounded = std::round(inv);
    if (std::abs(inv - rounded) > 1e-9 * inv)
        throw InvalidArgument("1/h0 must be an integer, got h0 = " + std::to_string(h0));
    return static_cast<int>(rounded);
}

} // namespace

// ---------------------------------------------------------------------------
// Mesh

Mesh Mesh::build(int dim, double h0, int refinement, int level)
{
    if (dim != 1 && dim != 2)
        throw InvalidArgument("spatial dimension must be 1 or 2");
    if (refinement < 2)
        throw InvalidArgument("refinement factor s must be an integer >= 2");
    if (level < 0)
        throw InvalidArgument("mesh level must be non-negative");

    long cells = integer_inverse(h0);
    for (int l = 0; l < level; ++l) {
        cells *= refinement;
        if (cells > (1L << 24))
            throw InvalidArgument("mesh level too fine");
    }

    Mesh mesh;
    mesh.dim_ = dim;
    mesh.level_ = level;
    mesh.refinement_ = refinement;
    mesh.cells_per_side_ = static_cast<int>(cells);
    const int n = mesh.cells_per_side_;
    const double h = 1.0 / n;

    if (dim == 1) {
        mesh.vertices_.reserve(static_cast<std::size_t>(n + 1));
        for (int i = 0; i <= n; ++i)
            mesh.vertices_.push_back({i * h, 0.0});
        mesh.intervals_.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            mesh.intervals_.push_back({i, i + 1});
    } else {
        mesh.vertices_.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i)
                mesh.vertices_.push_back({i * h, j * h});
        auto vid = [n](int i, int j) { return j * (n + 1) + i; };
        mesh.triangles_.reserve(static_cast<std::size_t>(2 * n * n));
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                mesh.triangles_.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
                mesh.triangles_.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
            }
        }
    }
    return mesh;
}

int Mesh::element_count() const
{
    return dim_ == 1 ? static_cast<int>(intervals_.size()) : static_cast<int>(triangles_.size());
}

// ---------------------------------------------------------------------------
// FiniteElementSpace

FiniteElementSpace::FiniteElementSpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree)
{
    if (!mesh_)
        throw InvalidArgument("finite element space needs a mesh");
    if (mesh_->dim() == 1 && (degree < 1 || degree > 3))
        throw InvalidArgument("1D elements support degree 1..3");
    if (mesh_->dim() == 2 && degree != 1)
        throw InvalidArgument("2D elements support degree 1 only");
    const int inner = nodes_per_side() - 2;
    dof_count_ = mesh_->dim() == 1 ? inner : inner * inner;
}

int FiniteElementSpace::dof_of_node(int i, int j) const
{
    const int last = nodes_per_side() - 1;
    if (mesh_->dim() == 1)
        return (i <= 0 || i >= last) ? -1 : i - 1;
    if (i <= 0 || i >= last || j <= 0 || j >= last)
        return -1;
    return (j - 1) * (last - 1) + (i - 1);
}

std::vector<SpatialPoint> FiniteElementSpace::dof_coordinates() const
{
    std::vector<SpatialPoint> coords;
    coords.reserve(static_cast<std::size_t>(dof_count_));
    const int last = nodes_per_side() - 1;
    const double step = 1.0 / last;
    if (mesh_->dim() == 1) {
        for (int g = 1; g < last; ++g)
            coords.push_back({g * step, 0.0});
    } else {
        for (int j = 1; j < last; ++j)
            for (int i = 1; i < last; ++i)
                coords.push_back({i * step, j * step});
    }
    return coords;
}

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(std::shared_ptr<const FiniteElementSpace> space)
    : space_(std::move(space)), coefficients_(Eigen::VectorXd::Zero(space_->dof_count()))
{
}

GridFunction::GridFunction(std::shared_ptr<const FiniteElementSpace> space, Eigen::VectorXd coefficients)
    : space_(std::move(space)), coefficients_(std::move(coefficients))
{
    if (coefficients_.size() != space_->dof_count())
        throw InvalidArgument("coefficient vector length " + std::to_string(coefficients_.size()) +
                              " does not match DOF count " + std::to_string(space_->dof_count()));
}

void GridFunction::require_same_space(const GridFunction& other) const
{
    if (space_ != other.space_ &&
        (space_->dof_count() != other.space_->dof_count() || space_->degree() != other.space_->degree() ||
         space_->mesh().cells_per_side() != other.space_->mesh().cells_per_side() ||
         space_->mesh().dim() != other.space_->mesh().dim()))
        throw InvalidArgument("grid functions live on different spaces");
}

GridFunction& GridFunction::operator+=(const GridFunction& other)
{
    require_same_space(other);
    coefficients_ += other.coefficients_;
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other)
{
    require_same_space(other);
    coefficients_ -= other.coefficients_;
    return *this;
}

GridFunction& GridFunction::operator*=(double factor)
{
    coefficients_ *= factor;
    return *this;
}

GridFunction& GridFunction::add_scaled(double factor, const GridFunction& other)
{
    require_same_space(other);
    coefficients_ += factor * other.coefficients_;
    return *this;
}

double GridFunction::value_at(const SpatialPoint& x) const
{
    const FiniteElementSpace& V = *space_;
    const int n = V.mesh().cells_per_side();
    if (V.mesh().dim() == 1) {
        const int r = V.degree();
        const int e = std::clamp(static_cast<int>(std::floor(x.x1 * n)), 0, n - 1);
        const double xi = x.x1 * n - e;
        const ReferenceBasis1D basis{r};
        double v = 0.0;
        for (int k = 0; k <= r; ++k)
            v += nodal_value_1d(*this, e * r + k) * basis.value(k, xi);
        return v;
    }
    const int i = std::clamp(static_cast<int>(std::floor(x.x1 * n)), 0, n - 1);
    const int j = std::clamp(static_cast<int>(std::floor(x.x2 * n)), 0, n - 1);
    return p1_cell_value(nodal_value_2d(*this, i, j), nodal_value_2d(*this, i + 1, j), nodal_value_2d(*this, i, j + 1),
                         nodal_value_2d(*this, i + 1, j + 1), x.x1 * n - i, x.x2 * n - j);
}

// ---------------------------------------------------------------------------
// Assembly and solve

namespace {

struct LinearSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
};

LinearSystem assemble(const FiniteElementSpace& V, const ScalarField& a, const ScalarField* f)
{
    const Mesh& mesh = V.mesh();
    const int n = mesh.cells_per_side();
    const double h = mesh.h();
    std::vector<Eigen::Triplet<double>> triplets;
    LinearSystem sys;
    sys.rhs = Eigen::VectorXd::Zero(V.dof_count());

    if (mesh.dim() == 1) {
        const int r = V.degree();
        const ReferenceBasis1D basis{r};
        const QuadratureRule1D rule = unit_gauss(r + 2);
        triplets.reserve(static_cast<std::size_t>(n * (r + 1) * (r + 1)));
        std::vector<double> ke(static_cast<std::size_t>((r + 1) * (r + 1)));
        std::vector<double> fe(static_cast<std::size_t>(r + 1));
        for (int e = 0; e < n; ++e) {
            std::fill(ke.begin(), ke.end(), 0.0);
            std::fill(fe.begin(), fe.end(), 0.0);
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double xi = rule.nodes[q];
                const SpatialPoint x{(e + xi) * h, 0.0};
                const double aw = rule.weights[q] * a(x) / h;
                const double fw = f ? rule.weights[q] * (*f)(x) * h : 0.0;
                for (int k = 0; k <= r; ++k) {
                    const double dk = basis.derivative(k, xi);
                    for (int m = 0; m <= r; ++m)
                        ke[static_cast<std::size_t>(k * (r + 1) + m)] += aw * dk * basis.derivative(m, xi);
                    fe[static_cast<std::size_t>(k)] += fw * basis.value(k, xi);
                }
            }
            for (int k = 0; k <= r; ++k) {
                const int row = V.dof_of_node(e * r + k);
                if (row < 0)
                    continue;
                sys.rhs[row] += fe[static_cast<std::size_t>(k)];
                for (int m = 0; m <= r; ++m) {
                    const int col = V.dof_of_node(e * r + m);
                    if (col >= 0)
                        triplets.emplace_back(row, col, ke[static_cast<std::size_t>(k * (r + 1) + m)]);
                }
            }
        }
    } else {
        const auto& rule = triangle_rule_degree4();
        const auto& verts = mesh.vertices();
        triplets.reserve(mesh.triangles().size() * 9);
        for (const auto& tri : mesh.triangles()) {
            const Triangle t = make_triangle(verts[static_cast<std::size_t>(tri[0])],
                                             verts[static_cast<std::size_t>(tri[1])],
                                             verts[static_cast<std::size_t>(tri[2])]);
            double a_integral = 0.0;
            std::array<double, 3> fe{0.0, 0.0, 0.0};
            for (const auto& qp : rule) {
                const SpatialPoint x = triangle_point(t, qp.xi, qp.eta);
                const double w = qp.weight * t.area;
                a_integral += w * a(x);
                if (f) {
                    const double fx = (*f)(x);
                    fe[0] += w * fx * (1.0 - qp.xi - qp.eta);
                    fe[1] += w * fx * qp.xi;
                    fe[2] += w * fx * qp.eta;
                }
            }
            std::array<int, 3> dofs{};
            for (int k = 0; k < 3; ++k) {
                const int vid = tri[static_cast<std::size_t>(k)];
                dofs[static_cast<std::size_t>(k)] = V.dof_of_node(vid % (n + 1), vid / (n + 1));
            }
            for (int k = 0; k < 3; ++k) {
                const int row = dofs[static_cast<std::size_t>(k)];
                if (row < 0)
                    continue;
                sys.rhs[row] += fe[static_cast<std::size_t>(k)];
                for (int m = 0; m < 3; ++m) {
                    const int col = dofs[static_cast<std::size_t>(m)];
                    if (col < 0)
                        continue;
                    const auto& gk = t.grad[static_cast<std::size_t>(k)];
                    const auto& gm = t.grad[static_cast<std::size_t>(m)];
                    triplets.emplace_back(row, col, a_integral * (gk[0] * gm[0] + gk[1] * gm[1]));
                }
            }
        }
    }
    sys.matrix.resize(V.dof_count(), V.dof_count());
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return sys;
}

} // namespace

Eigen::MatrixXd assemble_stiffness_dense(const FiniteElementSpace& space, const ScalarField& a)
{
    return Eigen::MatrixXd(assemble(space, a, nullptr).matrix);
}

namespace {

/// Normwise backward error ||b - A x|| / (||A|| ||x|| + ||b||) in the infinity norm.
double backward_error(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b,
                      double a_norm)
{
    const double r = (b - A * x).lpNorm<Eigen::Infinity>();
    const double scale = a_norm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
    return scale > 0.0 ? r / scale : 0.0;
}

double infinity_norm(const Eigen::SparseMatrix<double>& A)
{
    // symmetric, so the max column sum equals the max row sum
    double best = 0.0;
    for (int k = 0; k < A.outerSize(); ++k) {
        double sum = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
            sum += std::abs(it.value());
        best = std::max(best, sum);
    }
    return best;
}

} // namespace

GridFunction assemble_solve(std::shared_ptr<const FiniteElementSpace> space, const ScalarField& a,
                            const ScalarField& f, SolveStats* stats)
{
    if (!space)
        throw InvalidArgument("assemble_solve needs a space");
    LinearSystem sys = assemble(*space, a, &f);
    const double a_norm = infinity_norm(sys.matrix);
    SolveStats local;
    Eigen::VectorXd u;

    if (sys.rhs.lpNorm<Eigen::Infinity>() == 0.0) {
        u = Eigen::VectorXd::Zero(space->dof_count());
    } else if (space->dof_count() <= kDirectSolverLimit) {
        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol(sys.matrix);
        if (chol.info() != Eigen::Success)
            throw NumericalFailure("Cholesky factorisation failed: stiffness matrix not SPD");
        u = chol.solve(sys.rhs);
        // iterative refinement, rarely more than one pass
        for (int pass = 0; pass < 3; ++pass) {
            local.relative_residual = backward_error(sys.matrix, u, sys.rhs, a_norm);
            if (local.relative_residual <= kSolverTolerance)
                break;
            u += chol.solve(sys.rhs - sys.matrix * u);
        }
        local.direct = true;
    } else {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                 Eigen::DiagonalPreconditioner<double>>
            cg;
        cg.setTolerance(kSolverTolerance);
        cg.setMaxIterations(20 * space->dof_count());
        cg.compute(sys.matrix);
        u = cg.solve(sys.rhs);
        local.iterations = static_cast<int>(cg.iterations());
        local.direct = false;
        if (cg.info() != Eigen::Success && backward_error(sys.matrix, u, sys.rhs, a_norm) > kSolverTolerance)
            throw NumericalFailure("conjugate gradients did not converge");
    }
    local.relative_residual = backward_error(sys.matrix, u, sys.rhs, a_norm);
    if (!(local.relative_residual <= kSolverTolerance))
        throw NumericalFailure("linear solve backward error " + std::to_string(local.relative_residual) +
                               " above tolerance");
    if (stats)
        *stats = local;
    return GridFunction(std::move(space), std::move(u));
}

// ---------------------------------------------------------------------------
// Prolongation

GridFunction prolongate(const GridFunction& coarse, std::shared_ptr<const FiniteElementSpace> fine_space)
{
    const FiniteElementSpace& C = coarse.space();
    const FiniteElementSpace& F = *fine_space;
    if (C.mesh().dim() != F.mesh().dim() || C.degree() != F.degree())
        throw InvalidArgument("prolongation needs spaces of equal dimension and degree");
    const int nc = C.mesh().cells_per_side();
    const int nf = F.mesh().cells_per_side();
    if (nf < nc || nf % nc != 0)
        throw InvalidArgument("fine mesh (" + std::to_string(nf) + " cells) is not a nested refinement of " +
                              std::to_string(nc) + " cells");
    const int q = nf / nc;
    if (q == 1)
        return GridFunction(std::move(fine_space), coarse.coefficients());

    GridFunction fine(fine_space);
    auto& out = fine.coefficients();
    if (F.mesh().dim() == 1) {
        const int r = F.degree();
        const ReferenceBasis1D basis{r};
        const int stride = r * q; // fine nodes per coarse element
        for (int g = 1; g < F.nodes_per_side() - 1; ++g) {
            const int e = std::min(g / stride, nc - 1);
            const double xi = static_cast<double>(g - e * stride) / stride;
            double v = 0.0;
            for (int k = 0; k <= r; ++k)
                v += nodal_value_1d(coarse, e * r + k) * basis.value(k, xi);
            out[F.dof_of_node(g)] = v;
        }
    } else {
        for (int J = 1; J < nf; ++J) {
            for (int I = 1; I < nf; ++I) {
                const int i = std::min(I / q, nc - 1);
                const int j = std::min(J / q, nc - 1);
                const double xi = static_cast<double>(I - i * q) / q;
                const double eta = static_cast<double>(J - j * q) / q;
                out[F.dof_of_node(I, J)] =
                    p1_cell_value(nodal_value_2d(coarse, i, j), nodal_value_2d(coarse, i + 1, j),
                                  nodal_value_2d(coarse, i, j + 1), nodal_value_2d(coarse, i + 1, j + 1), xi, eta);
            }
        }
    }
    return fine;
}

// ---------------------------------------------------------------------------
// Norms

namespace {

double squared_norm_1d(const GridFunction& g, NormKind kind, const ScalarField* exact, int extra_points)
{
    const FiniteElementSpace& V = g.space();
    const int n = V.mesh().cells_per_side();
    const int r = V.degree();
    const double h = V.mesh().h();
    const ReferenceBasis1D basis{r};
    const QuadratureRule1D rule = unit_gauss(r + 1 + extra_points);
    std::vector<double> local(static_cast<std::size_t>(r + 1));
    double total = 0.0;
    for (int e = 0; e < n; ++e) {
        for (int k = 0; k <= r; ++k)
            local[static_cast<std::size_t>(k)] = nodal_value_1d(g, e * r + k);
        for (std::size_t qi = 0; qi < rule.nodes.size(); ++qi) {
            const double xi = rule.nodes[qi];
            double v = 0.0;
            for (int k = 0; k <= r; ++k) {
                const double phi = kind == NormKind::L2 ? basis.value(k, xi) : basis.derivative(k, xi) / h;
                v += local[static_cast<std::size_t>(k)] * phi;
            }
            if (exact)
                v -= (*exact)({(e + xi) * h, 0.0});
            total += rule.weights[qi] * h * v * v;
        }
    }
    return total;
}

double squared_norm_2d(const GridFunction& g, NormKind kind, const ScalarField* exact)
{
    const FiniteElementSpace& V = g.space();
    const Mesh& mesh = V.mesh();
    const int n = mesh.cells_per_side();
    const auto& verts = mesh.vertices();
    const auto& rule = triangle_rule_degree4();
    double total = 0.0;
    for (const auto& tri : mesh.triangles()) {
        const Triangle t = make_triangle(verts[static_cast<std::size_t>(tri[0])], verts[static_cast<std::size_t>(tri[1])],
                                         verts[static_cast<std::size_t>(tri[2])]);
        std::array<double, 3> u{};
        for (int k = 0; k < 3; ++k) {
            const int vid = tri[static_cast<std::size_t>(k)];
            u[static_cast<std::size_t>(k)] = nodal_value_2d(g, vid % (n + 1), vid / (n + 1));
        }
        if (kind == NormKind::H1Semi) {
            double gx = 0.0;
            double gy = 0.0;
            for (std::size_t k = 0; k < 3; ++k) {
                gx += u[k] * t.grad[k][0];
                gy += u[k] * t.grad[k][1];
            }
            total += t.area * (gx * gx + gy * gy);
            continue;
        }
        for (const auto& qp : rule) {
            double v = u[0] * (1.0 - qp.xi - qp.eta) + u[1] * qp.xi + u[2] * qp.eta;
            if (exact)
                v -= (*exact)(triangle_point(t, qp.xi, qp.eta));
            total += qp.weight * t.area * v * v;
        }
    }
    return total;
}

} // namespace

double norm(const GridFunction& g, NormKind kind)
{
    if (g.empty())
        return 0.0;
    const double sq = g.space().mesh().dim() == 1 ? squared_norm_1d(g, kind, nullptr, 0)
                                                  : squared_norm_2d(g, kind, nullptr);
    return std::sqrt(sq);
}

double l2_distance(const GridFunction& g, const ScalarField& exact)
{
    const double sq = g.space().mesh().dim() == 1 ? squared_norm_1d(g, NormKind::L2, &exact, 4)
                                                  : squared_norm_2d(g, NormKind::L2, &exact);
    return std::sqrt(sq);
}

GridFunction interpolate_nodal(std::shared_ptr<const FiniteElementSpace> space, const ScalarField& fn)
{
    GridFunction g(space);
    const auto coords = space->dof_coordinates();
    for (std::size_t i = 0; i < coords.size(); ++i)
        g.coefficients()[static_cast<Eigen::Index>(i)] = fn(coords[i]);
    return g;
}

// ---------------------------------------------------------------------------
// LevelHierarchy and cache

void DiscretizationConfig::validate() const
{
    if (dim != 1 && dim != 2)
        throw InvalidArgument("spatial dimension must be 1 or 2");
    integer_inverse(h0);
    if (refinement < 2)
        throw InvalidArgument("refinement factor s must be an integer >= 2");
    if (dim == 1 && (degree < 1 || degree > 3))
        throw InvalidArgument("1D elements support degree 1..3");
    if (dim == 2 && degree != 1)
        throw InvalidArgument("2D elements support degree 1 only");
}

LevelHierarchy::LevelHierarchy(DiscretizationConfig disc, FieldConfig field) : disc_(disc), field_(field)
{
    disc_.validate();
    field_.validate();
}

std::shared_ptr<const FiniteElementSpace> LevelHierarchy::space(int level) const
{
    if (level < 0 || level >= kMaxLevels)
        throw InvalidArgument("level " + std::to_string(level) + " outside [0, " + std::to_string(kMaxLevels) + ")");
    std::lock_guard lock(spaces_mutex_);
    auto& slot = spaces_[static_cast<std::size_t>(level)];
    if (!slot) {
        auto mesh = std::make_shared<const Mesh>(Mesh::build(disc_.dim, disc_.h0, disc_.refinement, level));
        slot = std::make_shared<const FiniteElementSpace>(std::move(mesh), disc_.degree);
    }
    return slot;
}

double LevelHierarchy::h(int level) const
{
    return disc_.h0 * std::pow(static_cast<double>(disc_.refinement), -level);
}

int LevelHierarchy::dof_count(int level) const
{
    // closed form, avoids building the mesh
    long cells = integer_inverse(disc_.h0);
    for (int l = 0; l < level; ++l)
        cells *= disc_.refinement;
    const long inner = cells * disc_.degree - 1;
    const long dofs = disc_.dim == 1 ? inner : inner * inner;
    return dofs > (1L << 30) ? (1 << 30) : static_cast<int>(dofs);
}

double LevelHierarchy::model_cost(int level) const
{
    const double n = dof_count(level);
    return disc_.dim == 1 ? n : std::pow(n, 1.5);
}

GridFunction LevelHierarchy::solve(int level, const ParameterVector& y) const
{
    auto V = space(level);
    const FieldConfig& field = field_;
    const int dim = disc_.dim;
    const auto start = std::chrono::steady_clock::now();
    GridFunction u = assemble_solve(
        V, [&field, &y](const SpatialPoint& x) { return eval_coefficient(field, x, y); },
        [dim](const SpatialPoint& x) { return eval_forcing(dim, x); });
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    solves_[static_cast<std::size_t>(level)].fetch_add(1);
    seconds_[static_cast<std::size_t>(level)].fetch_add(elapsed.count());
    return u;
}

long LevelHierarchy::solve_count(int level) const
{
    return solves_.at(static_cast<std::size_t>(level)).load();
}

long LevelHierarchy::total_solve_count() const
{
    long total = 0;
    for (const auto& c : solves_)
        total += c.load();
    return total;
}

double LevelHierarchy::solve_seconds(int level) const
{
    return seconds_.at(static_cast<std::size_t>(level)).load();
}

std::shared_ptr<const GridFunction> SolutionCache::find(int level, const PointId& id) const
{
    std::lock_guard lock(mutex_);
    auto it = entries_.find({level, id});
    return it == entries_.end() ? nullptr : it->second;
}

void SolutionCache::insert(int level, const PointId& id, std::shared_ptr<const GridFunction> value)
{
    std::lock_guard lock(mutex_);
    entries_.emplace(std::make_pair(level, id), std::move(value));
}

std::size_t SolutionCache::size() const
{
    std::lock_guard lock(mutex_);
    return entries_.size();
}

void SolutionCache::clear()
{
    std::lock_guard lock(mutex_);
    entries_.clear();
}

std::shared_ptr<const GridFunction> fem_solution(const LevelHierarchy& hierarchy, int level, const PointId& id,
                                                 const ParameterVector& y, SolutionCache& cache)
{
    if (auto hit = cache.find(level, id))
        return hit;
    auto value = std::make_shared<const GridFunction>(hierarchy.solve(level, y));
    cache.insert(level, id, value);
    return cache.find(level, id);
}

} // namespace mlsg
