#pragma once

#include "qlb/algebra.hpp"

#include <array>
#include <cstddef>
#include <cstring>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace qlb {

enum class Boundary {
    /// Streaming is an exact permutation; norm is conserved to the last bit.
    periodic,
    /// Edge sites copy themselves into the inflow slot. Outflow approximation, not norm-conserving.
    copy,
};

Boundary parse_boundary(std::string_view name);
std::string_view boundary_name(Boundary b);

/// Regular lattice with one to three active axes. An axis with extent 1 is
/// inactive; every active axis must have at least two sites. Sites are
/// ordered with x fastest, then y, then z.
class Grid {
  public:
    explicit Grid(std::array<std::size_t, 3> extents, Boundary boundary = Boundary::periodic);

    /// One-dimensional line of n sites along `axis` (z by default).
    static Grid line(std::size_t n, Axis axis = Axis::z, Boundary boundary = Boundary::periodic);

    int dims() const { return dims_; }
    std::size_t extent(Axis a) const { return extents_[static_cast<std::size_t>(a)]; }
    const std::array<std::size_t, 3> &extents() const { return extents_; }
    bool active(Axis a) const { return extent(a) > 1; }
    std::vector<Axis> active_axes() const;
    std::size_t sites() const { return sites_; }
    std::size_t stride(Axis a) const { return strides_[static_cast<std::size_t>(a)]; }
    Boundary boundary() const { return boundary_; }

    std::array<std::size_t, 3> coords(std::size_t site) const;
    std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const {
        return ix + extents_[0] * (iy + extents_[1] * iz);
    }

    friend bool operator==(const Grid &, const Grid &) = default;

  private:
    std::array<std::size_t, 3> extents_;
    std::array<std::size_t, 3> strides_;
    std::size_t sites_ = 0;
    int dims_ = 0;
    Boundary boundary_;
};

/// Complex four-spinor per site, stored site-major (the four components of a
/// site are contiguous). Lattice spacing equals the time step: dx = c dt.
class SpinorField {
  public:
    SpinorField(Grid grid, double dt);

    const Grid &grid() const { return grid_; }
    double dt() const { return dt_; }
    double dx() const { return dt_; }
    /// dx^dims
    double cell_volume() const;

    std::span<Spinor> data() { return data_; }
    std::span<const Spinor> data() const { return data_; }
    Spinor &at(std::size_t site) { return data_[site]; }
    const Spinor &at(std::size_t site) const { return data_[site]; }

    /// Σ_sites Σ_i |ψ_i|² dx^dims. The result does not depend on site order.
    double norm2() const;

    /// Exchanges amplitude storage with a buffer of the same size (used by double-buffered steppers).
    void swap_storage(std::vector<Spinor> &other);

    /// Bitwise comparison of amplitudes plus grid and dt.
    friend bool operator==(const SpinorField &, const SpinorField &) = default;

  private:
    Grid grid_;
    double dt_;
    std::vector<Spinor> data_;
};

enum class ShiftPattern {
    /// Components 1,2 move one site towards +axis, components 3,4 towards -axis.
    forward,
    /// The inverse permutation.
    reverse,
};

/// Exact light-cone shift of the spinor components along `axis`.
/// Throws std::invalid_argument if the axis is inactive.
SpinorField shift_components(const SpinorField &field, Axis axis,
                             ShiftPattern pattern = ShiftPattern::forward);

/// ψ(x) <- U ψ(x) at every site. Throws NumericalError if U is not unitary to 1e-12.
SpinorField apply_site_matrix(const SpinorField &field, const Complex4x4 &u);

/// ψ(x) <- U(x) ψ(x) with U supplied per site index.
SpinorField apply_site_matrix_field(const SpinorField &field,
                                    const std::function<Complex4x4(std::size_t)> &u_of_site);

namespace detail {

/// A site matrix prepared for the streaming kernels. Matrices with at most two
/// nonzeros per row (the rotations S_a and their products with diagonal
/// collisions) keep only those two terms per row.
class SiteKernel {
  public:
    explicit SiteKernel(const Complex4x4 &m);

    const Complex4x4 &matrix() const { return m_; }
    bool sparse() const { return sparse_; }

    cplx row(int r, const Spinor &v) const {
        if (!sparse_) {
            double re = 0.0, im = 0.0;
            for (int c = 0; c < 4; ++c) mac(m_(r, c), v[static_cast<std::size_t>(c)], re, im);
            return {re, im};
        }
        return sparse_row(r, v);
    }

    cplx sparse_row(int r, const Spinor &v) const {
        const auto i = static_cast<std::size_t>(r);
        const V2 x0 = load(v[col_[i][0]]);
        const V2 x1 = load(v[col_[i][1]]);
        const V2 acc = re_[i][0] * x0 + im_[i][0] * swap(x0) + re_[i][1] * x1 + im_[i][1] * swap(x1);
        return {acc[0], acc[1]};
    }

  private:
    // (re, im) pairs; a * x = (a_re, a_re) * x + (-a_im, a_im) * (x_im, x_re).
    using V2 = double __attribute__((vector_size(16)));

    static V2 load(const cplx &c) {
        V2 out;
        std::memcpy(&out, &c, sizeof out);
        return out;
    }
    static V2 swap(V2 v) {
#if defined(__clang__)
        return __builtin_shufflevector(v, v, 1, 0);
#else
        using I2 = long long __attribute__((vector_size(16)));
        return __builtin_shuffle(v, I2{1, 0});
#endif
    }
    static void mac(const cplx &a, const cplx &x, double &re, double &im) {
        re += a.real() * x.real() - a.imag() * x.imag();
        im += a.real() * x.imag() + a.imag() * x.real();
    }

    Complex4x4 m_;
    bool sparse_ = false;
    std::array<std::array<std::size_t, 2>, 4> col_{};
    std::array<std::array<V2, 2>, 4> re_{};
    std::array<std::array<V2, 2>, 4> im_{};
};

/// Forward (or reverse) light-cone gather along `axis`: component j of the
/// gathered spinor at s is component j of pre * in[s - stride] for j = 0,1 and
/// of pre * in[s + stride] for j = 2,3 (mirrored for the reverse pattern).
/// out[s] = post * gathered. Null kernels mean the identity. `in` and `out`
/// must not alias.
void shift_and_apply(const Grid &grid, Axis axis, ShiftPattern pattern, const SiteKernel *pre,
                     const SiteKernel *post, std::span<const Spinor> in, std::span<Spinor> out,
                     int workers);

/// out[s] = m * in[s]; in place when the spans alias.
void apply_uniform(const Complex4x4 &m, std::span<const Spinor> in, std::span<Spinor> out,
                   int workers);

} // namespace detail

} // namespace qlb
