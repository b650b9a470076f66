#include "qlb/lattice.hpp"

#include "qlb/error.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qlb {

Boundary parse_boundary(std::string_view name) {
    if (name == "periodic") return Boundary::periodic;
    if (name == "copy") return Boundary::copy;
    throw std::invalid_argument("invalid boundary '" + std::string(name) +
                                "' (expected periodic or copy)");
}

std::string_view boundary_name(Boundary b) {
    return b == Boundary::periodic ? "periodic" : "copy";
}

Grid::Grid(std::array<std::size_t, 3> extents, Boundary boundary)
    : extents_(extents), boundary_(boundary) {
    sites_ = 1;
    for (std::size_t a = 0; a < 3; ++a) {
        if (extents_[a] == 0) throw std::invalid_argument("grid extent must be at least 1");
        if (extents_[a] > 1) ++dims_;
        sites_ *= extents_[a];
    }
    if (dims_ == 0) throw std::invalid_argument("grid needs at least one axis with extent >= 2");
    strides_ = {1, extents_[0], extents_[0] * extents_[1]};
}

Grid Grid::line(std::size_t n, Axis axis, Boundary boundary) {
    if (n < 2) throw std::invalid_argument("a line needs at least two sites");
    std::array<std::size_t, 3> ext{1, 1, 1};
    ext[static_cast<std::size_t>(axis)] = n;
    return Grid(ext, boundary);
}

std::vector<Axis> Grid::active_axes() const {
    std::vector<Axis> out;
    for (Axis a : {Axis::x, Axis::y, Axis::z})
        if (active(a)) out.push_back(a);
    return out;
}

std::array<std::size_t, 3> Grid::coords(std::size_t site) const {
    const std::size_t ix = site % extents_[0];
    const std::size_t rest = site / extents_[0];
    return {ix, rest % extents_[1], rest / extents_[1]};
}

SpinorField::SpinorField(Grid grid, double dt) : grid_(grid), dt_(dt), data_(grid.sites()) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("time step must be positive and finite");
}

double SpinorField::cell_volume() const { return std::pow(dt_, grid_.dims()); }

double SpinorField::norm2() const {
    // Fixed-point accumulation makes the sum independent of site order, so a
    // permutation of amplitudes leaves the norm bit-identical. Terms below
    // 2^-96 are truncated; fields with large amplitudes fall back to a plain sum.
    constexpr int kFractionBits = 96;
    constexpr double kMaxTerm = 1073741824.0;  // 2^30 keeps the 128-bit sum far from overflow
    __int128 fixed = 0;
    double plain = 0.0;
    bool use_fixed = true;
    for (const Spinor &s : data_)
        for (const cplx &c : s) {
            const double t = std::norm(c);
            plain += t;
            if (!(t < kMaxTerm)) use_fixed = false;
            if (use_fixed) {
                // floor(t 2^96) as hi 2^64 + lo without a libgcc 128-bit conversion;
                // x - trunc(x) and the power-of-two scalings are exact.
                const double x = t * 0x1p32;
                const auto hi = static_cast<std::int64_t>(x);
                const auto lo = static_cast<std::uint64_t>((x - static_cast<double>(hi)) * 0x1p64);
                fixed += (static_cast<__int128>(hi) << 64) + static_cast<__int128>(lo);
            }
        }
    const double sum = use_fixed ? std::ldexp(static_cast<double>(fixed), -kFractionBits) : plain;
    return sum * cell_volume();
}

void SpinorField::swap_storage(std::vector<Spinor> &other) {
    if (other.size() != data_.size()) throw std::invalid_argument("swap_storage: size mismatch");
    data_.swap(other);
}

namespace detail {

SiteKernel::SiteKernel(const Complex4x4 &m) : m_(m) {
    sparse_ = true;
    for (int r = 0; r < 4 && sparse_; ++r) {
        int count = 0;
        for (int c = 0; c < 4; ++c) {
            if (m(r, c) == cplx{0.0, 0.0}) continue;
            if (count == 2) {
                sparse_ = false;
                break;
            }
            const auto i = static_cast<std::size_t>(r);
            col_[i][static_cast<std::size_t>(count)] = static_cast<std::size_t>(c);
            const cplx a = m(r, c);
            re_[i][static_cast<std::size_t>(count)] = V2{a.real(), a.real()};
            im_[i][static_cast<std::size_t>(count)] = V2{-a.imag(), a.imag()};
            ++count;
        }
    }
}

namespace {

// Kernel flavours resolved at compile time so the inner loop carries no branches.
enum class Kind { identity, sparse, dense };

Kind kind_of(const SiteKernel *k) {
    if (!k) return Kind::identity;
    return k->sparse() ? Kind::sparse : Kind::dense;
}

template <Kind K> cplx row_of(const SiteKernel &k, int r, const Spinor &v) {
    if constexpr (K == Kind::identity) return v[static_cast<std::size_t>(r)];
    else if constexpr (K == Kind::sparse) return k.sparse_row(r, v);
    else return k.row(r, v);
}

template <Kind Pre, Kind Post>
void gather_rows(const Grid &grid, Axis axis, ShiftPattern pattern, const SiteKernel *pre,
                 const SiteKernel *post, std::span<const Spinor> in, std::span<Spinor> out,
                 int workers) {
    const std::size_t n = grid.extent(axis);
    const std::size_t stride = grid.stride(axis);
    const std::size_t block = n * stride;
    const std::size_t outer = grid.sites() / block;
    const bool periodic = grid.boundary() == Boundary::periodic;
    // Offsets (in units of stride) that components 0,1 and 2,3 read from.
    const long lo_from = pattern == ShiftPattern::forward ? -1 : +1;
    const long hi_from = -lo_from;

    const long outer_l = static_cast<long>(outer);
    const long n_l = static_cast<long>(n);
    // Each thread works on private kernel copies so stores into `out` cannot
    // force the coefficients to be reloaded. collapse(2) recovers (o, c) once
    // per chunk instead of dividing on every row.
    const SiteKernel identity(Complex4x4::identity());
    const SiteKernel pre_k = pre ? *pre : identity;
    const SiteKernel post_k = post ? *post : identity;
#pragma omp parallel for collapse(2) num_threads(workers) schedule(static) if (workers > 1) \
    firstprivate(pre_k, post_k)
    for (long oo = 0; oo < outer_l; ++oo)
    for (long cc = 0; cc < n_l; ++cc) {
        const auto o = static_cast<std::size_t>(oo);
        const auto c = static_cast<std::size_t>(cc);
        auto neighbour = [&](long offset) {
            const long target = cc + offset;
            if (target >= 0 && target < n_l) return static_cast<std::size_t>(target);
            if (!periodic) return c;
            return target < 0 ? n - 1 : std::size_t{0};
        };
        const std::size_t base = o * block;
        const std::size_t lo_base = base + neighbour(lo_from) * stride;
        const std::size_t hi_base = base + neighbour(hi_from) * stride;
        const std::size_t dst_base = base + c * stride;
        for (std::size_t i = 0; i < stride; ++i) {
            const Spinor &lo = in[lo_base + i];
            const Spinor &hi = in[hi_base + i];
            const Spinor gathered{row_of<Pre>(pre_k, 0, lo), row_of<Pre>(pre_k, 1, lo),
                                  row_of<Pre>(pre_k, 2, hi), row_of<Pre>(pre_k, 3, hi)};
            Spinor &dst = out[dst_base + i];
            if constexpr (Post == Kind::identity) {
                dst = gathered;
            } else {
                dst = Spinor{row_of<Post>(post_k, 0, gathered), row_of<Post>(post_k, 1, gathered),
                             row_of<Post>(post_k, 2, gathered), row_of<Post>(post_k, 3, gathered)};
            }
        }
    }
}

template <Kind Pre>
void dispatch_post(const Grid &grid, Axis axis, ShiftPattern pattern, const SiteKernel *pre,
                   const SiteKernel *post, std::span<const Spinor> in, std::span<Spinor> out,
                   int workers) {
    switch (kind_of(post)) {
    case Kind::identity:
        return gather_rows<Pre, Kind::identity>(grid, axis, pattern, pre, post, in, out, workers);
    case Kind::sparse:
        return gather_rows<Pre, Kind::sparse>(grid, axis, pattern, pre, post, in, out, workers);
    case Kind::dense:
        return gather_rows<Pre, Kind::dense>(grid, axis, pattern, pre, post, in, out, workers);
    }
}

} // namespace

void shift_and_apply(const Grid &grid, Axis axis, ShiftPattern pattern, const SiteKernel *pre,
                     const SiteKernel *post, std::span<const Spinor> in, std::span<Spinor> out,
                     int workers) {
    if (in.size() != grid.sites() || out.size() != grid.sites())
        throw std::invalid_argument("shift_and_apply: buffer size does not match the grid");
    switch (kind_of(pre)) {
    case Kind::identity:
        return dispatch_post<Kind::identity>(grid, axis, pattern, pre, post, in, out, workers);
    case Kind::sparse:
        return dispatch_post<Kind::sparse>(grid, axis, pattern, pre, post, in, out, workers);
    case Kind::dense:
        return dispatch_post<Kind::dense>(grid, axis, pattern, pre, post, in, out, workers);
    }
}

void apply_uniform(const Complex4x4 &m, std::span<const Spinor> in, std::span<Spinor> out,
                   int workers) {
    const long sites = static_cast<long>(in.size());
#pragma omp parallel for num_threads(workers) schedule(static) if (workers > 1)
    for (long s = 0; s < sites; ++s) out[static_cast<std::size_t>(s)] = matvec(m, in[static_cast<std::size_t>(s)]);
}

} // namespace detail

SpinorField shift_components(const SpinorField &field, Axis axis, ShiftPattern pattern) {
    if (!field.grid().active(axis)) {
        std::ostringstream msg;
        msg << "shift_components: axis " << axis_name(axis) << " is not active in this grid";
        throw std::invalid_argument(msg.str());
    }
    SpinorField out(field.grid(), field.dt());
    detail::shift_and_apply(field.grid(), axis, pattern, nullptr, nullptr, field.data(), out.data(),
                            1);
    return out;
}

namespace {

void require_unitary(const Complex4x4 &u, std::size_t site) {
    const double r = unitarity_residual(u);
    if (!(r <= kUnitarityTol)) {
        std::ostringstream msg;
        msg << "site matrix at site " << site << " is not unitary (residual " << r << ")";
        throw NumericalError(msg.str());
    }
}

} // namespace

SpinorField apply_site_matrix(const SpinorField &field, const Complex4x4 &u) {
    require_unitary(u, 0);
    SpinorField out(field.grid(), field.dt());
    detail::apply_uniform(u, field.data(), out.data(), 1);
    return out;
}

SpinorField apply_site_matrix_field(const SpinorField &field,
                                    const std::function<Complex4x4(std::size_t)> &u_of_site) {
    SpinorField out(field.grid(), field.dt());
    for (std::size_t s = 0; s < field.grid().sites(); ++s) {
        const Complex4x4 u = u_of_site(s);
        require_unitary(u, s);
        out.at(s) = matvec(u, field.at(s));
    }
    return out;
}

} // namespace qlb
