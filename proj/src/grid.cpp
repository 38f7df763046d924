#include "exlink/grid.hpp"

#include <cmath>
#include <sstream>

#include "exlink/errors.hpp"

namespace exlink {

namespace {

long aligned_index(double x, double h, const char* what) {
    const double q = x / h;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q))) {
        std::ostringstream os;
        os << what << " coordinate " << x << " is not a lattice multiple of h = " << h;
        throw GridMismatch(os.str());
    }
    return static_cast<long>(r);
}

}  // namespace

Grid::Grid(int N, double h, std::array<double, 3> lo, std::array<double, 3> hi, double rho)
    : N_(N), h_(h), rho_(rho) {
    if (N != 2 && N != 3) throw ConfigError("grid dimension must be 2 or 3");
    if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");
    if (rho < 0.0) throw ConfigError("obstacle radius must be nonnegative");
    if (N == 2) lo[2] = hi[2] = 0.0;

    for (int d = 0; d < 3; ++d) {
        lo_idx_[d] = aligned_index(lo[d], h, "box corner");
        const long hi_idx = aligned_index(hi[d], h, "box corner");
        if (d < N && hi_idx - lo_idx_[d] < 4)
            throw ConfigError("grid box needs at least 4 cells per dimension");
        ext_[d] = (d < N) ? hi_idx - lo_idx_[d] + 1 : 1;
    }
    stride_[0] = 1;
    stride_[1] = static_cast<std::size_t>(ext_[0]);
    stride_[2] = static_cast<std::size_t>(ext_[0]) * ext_[1];
    total_ = stride_[2] * ext_[2];
    vol_ = std::pow(h, N);

    // Obstacle test in integer lattice arithmetic for determinism.
    const double t2 = (rho / h) * (rho / h) * (1.0 + 1e-12);
    mask_.assign(total_, NodeClass::Interior);
    std::size_t idx = 0;
    for (long k = 0; k < ext_[2]; ++k) {
        for (long j = 0; j < ext_[1]; ++j) {
            for (long i = 0; i < ext_[0]; ++i, ++idx) {
                const long a = lo_idx_[0] + i, b = lo_idx_[1] + j, c = lo_idx_[2] + k;
                const bool face = i == 0 || i == ext_[0] - 1 || j == 0 || j == ext_[1] - 1 ||
                                  (N_ == 3 && (k == 0 || k == ext_[2] - 1));
                if (face) {
                    mask_[idx] = NodeClass::Boundary;
                } else if (rho > 0.0 &&
                           double(a) * a + double(b) * b + double(c) * c <= t2) {
                    mask_[idx] = NodeClass::Obstacle;
                }
            }
        }
    }
    interior_.reserve(total_);
    for (std::size_t n = 0; n < total_; ++n)
        if (mask_[n] == NodeClass::Interior) interior_.push_back(n);
    if (interior_.empty()) throw ConfigError("grid box contains no interior nodes");
}

std::array<double, 3> Grid::coords(std::size_t idx) const {
    const auto l = lattice(idx);
    return {h_ * l[0], h_ * l[1], h_ * l[2]};
}

std::array<long, 3> Grid::lattice(std::size_t idx) const {
    const long i = static_cast<long>(idx % stride_[1]);
    const long j = static_cast<long>((idx / stride_[1]) % static_cast<std::size_t>(ext_[1]));
    const long k = static_cast<long>(idx / stride_[2]);
    return {lo_idx_[0] + i, lo_idx_[1] + j, lo_idx_[2] + k};
}

std::size_t Grid::index_of(const std::array<long, 3>& latt) const {
    if (!contains(latt)) throw GridMismatch("lattice point outside the grid box");
    const std::size_t i = static_cast<std::size_t>(latt[0] - lo_idx_[0]);
    const std::size_t j = static_cast<std::size_t>(latt[1] - lo_idx_[1]);
    const std::size_t k = static_cast<std::size_t>(latt[2] - lo_idx_[2]);
    return i + stride_[1] * j + stride_[2] * k;
}

bool Grid::contains(const std::array<long, 3>& latt) const {
    for (int d = 0; d < 3; ++d) {
        const long rel = latt[d] - lo_idx_[d];
        if (rel < 0 || rel >= ext_[d]) return false;
    }
    return true;
}

double Grid::dirichlet_sum(const Field& u, const Field& v) const {
    const double scale = std::pow(h_, N_ - 2);
    double sum = 0.0;
    std::size_t idx = 0;
    for (long k = 0; k < ext_[2]; ++k) {
        for (long j = 0; j < ext_[1]; ++j) {
            for (long i = 0; i < ext_[0]; ++i, ++idx) {
                const double u0 = at(u, idx), v0 = at(v, idx);
                if (i + 1 < ext_[0]) {
                    const std::size_t n = idx + stride_[0];
                    sum += (at(u, n) - u0) * (at(v, n) - v0);
                }
                if (j + 1 < ext_[1]) {
                    const std::size_t n = idx + stride_[1];
                    sum += (at(u, n) - u0) * (at(v, n) - v0);
                }
                if (N_ == 3 && k + 1 < ext_[2]) {
                    const std::size_t n = idx + stride_[2];
                    sum += (at(u, n) - u0) * (at(v, n) - v0);
                }
            }
        }
    }
    return scale * sum;
}

double Grid::mass_sum(const Field& u, const Field& v) const {
    double sum = 0.0;
    for (std::size_t idx : interior_) sum += u[idx] * v[idx];
    return vol_ * sum;
}

void Grid::apply_operator(double lambda, const Field& u, Field& out) const {
    out.assign(total_, 0.0);
    const double inv2 = 1.0 / (h_ * h_);
    const int twoN = 2 * N_;
    for (std::size_t idx : interior_) {
        // Interior nodes never touch the box faces, so all neighbors exist.
        double nb = at(u, idx + stride_[0]) + at(u, idx - stride_[0]) +
                    at(u, idx + stride_[1]) + at(u, idx - stride_[1]);
        if (N_ == 3) nb += at(u, idx + stride_[2]) + at(u, idx - stride_[2]);
        out[idx] = inv2 * (twoN * u[idx] - nb) + lambda * u[idx];
    }
}

std::uint64_t Grid::mask_hash() const {
    std::uint64_t hash = 1469598103934665603ull;
    auto mix = [&hash](const void* p, std::size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            hash ^= b[i];
            hash *= 1099511628211ull;
        }
    };
    mix(&N_, sizeof N_);
    mix(&h_, sizeof h_);
    mix(&rho_, sizeof rho_);
    mix(lo_idx_.data(), sizeof lo_idx_);
    mix(ext_.data(), sizeof ext_);
    mix(mask_.data(), mask_.size());
    return hash;
}

Field prolong(const Grid& coarse, const Grid& fine, const Field& u) {
    Field out = fine.zeros();
    // Lattice-based coordinate so that coincident nodes (for binade spacing
    // ratios such as h -> h/2) get exact interpolation weights 0 and 1.
    const double ratio = fine.spacing() / coarse.spacing();
    const int N = fine.dim();
    for (std::size_t idx : fine.interior()) {
        const auto l = fine.lattice(idx);
        std::array<long, 3> base{};
        std::array<double, 3> t{};
        bool inside = true;
        for (int d = 0; d < 3; ++d) {
            if (d >= N) continue;
            const double q = ratio * l[d];
            double f = std::floor(q);
            // Clamp to the top edge so hi-corner nodes interpolate inward.
            if (f >= coarse.lo_index(d) + coarse.extent(d) - 1)
                f = coarse.lo_index(d) + coarse.extent(d) - 2;
            base[d] = static_cast<long>(f);
            t[d] = q - f;
            if (base[d] < coarse.lo_index(d) ||
                base[d] + 1 > coarse.lo_index(d) + coarse.extent(d) - 1) {
                inside = false;
                break;
            }
        }
        if (!inside) continue;
        double val = 0.0;
        const int corners = 1 << N;
        for (int c = 0; c < corners; ++c) {
            double wgt = 1.0;
            std::array<long, 3> latt = base;
            for (int d = 0; d < N; ++d) {
                if (c & (1 << d)) {
                    latt[d] += 1;
                    wgt *= t[d];
                } else {
                    wgt *= 1.0 - t[d];
                }
            }
            if (wgt == 0.0) continue;
            val += wgt * coarse.at(u, coarse.index_of(latt));
        }
        out[idx] = val;
    }
    return out;
}

}  // namespace exlink
