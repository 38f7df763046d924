#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace exlink {

/// Node classification on the lattice box.  Obstacle nodes (inside the
/// excluded ball) and the outermost box layer carry homogeneous Dirichlet
/// values; only interior nodes hold degrees of freedom.
enum class NodeClass : unsigned char { Interior = 0, Obstacle = 1, Boundary = 2 };

using Field = std::vector<double>;

/// Uniform lattice box for the exterior domain  R^N minus the closed ball of
/// radius rho.  The box corners must be lattice-aligned with the origin as a
/// lattice point, so that grids over different boxes share node coordinates
/// exactly.  Fields are stored over the full box with zeros at non-interior
/// nodes; all quadratures and operators read non-interior entries as zero.
class Grid {
public:
    /// N in {2, 3}; lo/hi corner coordinates (third entry ignored when
    /// N = 2); rho >= 0 is the obstacle radius (0 = no obstacle).
    Grid(int N, double h, std::array<double, 3> lo, std::array<double, 3> hi, double rho);

    int dim() const { return N_; }
    double spacing() const { return h_; }
    double obstacle_radius() const { return rho_; }
    std::size_t node_count() const { return total_; }
    std::size_t interior_count() const { return interior_.size(); }
    const std::vector<NodeClass>& mask() const { return mask_; }
    const std::vector<std::size_t>& interior() const { return interior_; }
    double cell_volume() const { return vol_; }

    long extent(int d) const { return ext_[d]; }
    long lo_index(int d) const { return lo_idx_[d]; }
    std::size_t stride(int d) const { return stride_[d]; }

    /// Physical coordinates of a node.
    std::array<double, 3> coords(std::size_t idx) const;
    /// Global lattice coordinates (coordinate / h) of a node.
    std::array<long, 3> lattice(std::size_t idx) const;
    /// Node index of a global lattice point (must lie in the box).
    std::size_t index_of(const std::array<long, 3>& latt) const;
    bool contains(const std::array<long, 3>& latt) const;

    Field zeros() const { return Field(total_, 0.0); }

    /// Reads a field entry as zero unless the node is interior.
    double at(const Field& u, std::size_t idx) const {
        return mask_[idx] == NodeClass::Interior ? u[idx] : 0.0;
    }

    /// Sum over forward lattice edges of  du dv h^(N-2): the discrete
    /// Dirichlet form of the extension-by-zero.
    double dirichlet_sum(const Field& u, const Field& v) const;

    /// Sum over nodes of  u v h^N.
    double mass_sum(const Field& u, const Field& v) const;

    /// out = (-Lap + lambda) u  with the 2N+1 point Laplacian, zero at
    /// non-interior nodes.  Adjoint to dirichlet_sum + lambda * mass_sum.
    void apply_operator(double lambda, const Field& u, Field& out) const;

    /// Field with g(x) at interior nodes, zero elsewhere.
    template <class G>
    Field sample(G&& g) const {
        Field u(total_, 0.0);
        for (std::size_t idx : interior_) {
            const auto x = coords(idx);
            u[idx] = g(x);
        }
        return u;
    }

    /// FNV-1a digest of the discretization (dims, box, spacing, mask).
    std::uint64_t mask_hash() const;

private:
    int N_;
    double h_, rho_, vol_;
    std::array<long, 3> lo_idx_{}, ext_{};
    std::array<std::size_t, 3> stride_{};
    std::size_t total_;
    std::vector<NodeClass> mask_;
    std::vector<std::size_t> interior_;
};

/// Multilinear interpolation of a coarse-grid field onto the interior nodes
/// of a finer (or equal-spacing) grid over the same or overlapping box.
/// Outside the coarse box the result is zero.
Field prolong(const Grid& coarse, const Grid& fine, const Field& u);

}  // namespace exlink
