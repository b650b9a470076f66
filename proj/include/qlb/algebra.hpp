#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <string_view>

namespace qlb {

using cplx = std::complex<double>;

/// Four complex spinor components at one lattice site.
using Spinor = std::array<cplx, 4>;

enum class Axis : int { x = 0, y = 1, z = 2 };

/// Parses "x", "y" or "z"; anything else throws std::invalid_argument.
Axis parse_axis(std::string_view name);
char axis_name(Axis axis);

inline constexpr double kUnitarityTol = 1e-12;
inline constexpr double kRotationTol = 1e-14;

/// Dense 4x4 complex matrix, row-major.
class Complex4x4 {
  public:
    constexpr Complex4x4() = default;

    static Complex4x4 identity();
    static Complex4x4 diagonal(cplx d0, cplx d1, cplx d2, cplx d3);

    cplx &operator()(int row, int col) { return a_[static_cast<std::size_t>(4 * row + col)]; }
    const cplx &operator()(int row, int col) const {
        return a_[static_cast<std::size_t>(4 * row + col)];
    }

    const std::array<cplx, 16> &entries() const { return a_; }

    Complex4x4 adjoint() const;
    cplx trace() const;
    cplx determinant() const;

    Complex4x4 &operator+=(const Complex4x4 &rhs);
    Complex4x4 &operator-=(const Complex4x4 &rhs);
    Complex4x4 &operator*=(cplx s);

    friend Complex4x4 operator+(Complex4x4 lhs, const Complex4x4 &rhs) { return lhs += rhs; }
    friend Complex4x4 operator-(Complex4x4 lhs, const Complex4x4 &rhs) { return lhs -= rhs; }
    friend Complex4x4 operator-(Complex4x4 m) { return m *= -1.0; }
    friend Complex4x4 operator*(Complex4x4 m, cplx s) { return m *= s; }
    friend Complex4x4 operator*(cplx s, Complex4x4 m) { return m *= s; }
    friend Complex4x4 operator*(const Complex4x4 &lhs, const Complex4x4 &rhs);

    /// Exact entrywise equality; use max_abs_diff for tolerance comparisons.
    friend bool operator==(const Complex4x4 &, const Complex4x4 &) = default;

  private:
    std::array<cplx, 16> a_{};
};

/// Largest entrywise modulus of a - b.
double max_abs_diff(const Complex4x4 &a, const Complex4x4 &b);
double max_abs(const Complex4x4 &a);
inline bool approx_equal(const Complex4x4 &a, const Complex4x4 &b, double tol) {
    return max_abs_diff(a, b) <= tol;
}

Complex4x4 anticommutator(const Complex4x4 &a, const Complex4x4 &b);
Complex4x4 commutator(const Complex4x4 &a, const Complex4x4 &b);

/// max |U†U - I| over entries.
double unitarity_residual(const Complex4x4 &u);
/// max |M + M†| over entries.
double antihermiticity_residual(const Complex4x4 &m);

/// Matrix-vector product written out on real and imaginary parts so the
/// compiler does not route through the NaN-checking complex multiply.
inline Spinor matvec(const Complex4x4 &m, const Spinor &v) {
    const auto &a = m.entries();
    Spinor out;
    for (int r = 0; r < 4; ++r) {
        double re = 0.0;
        double im = 0.0;
        for (int c = 0; c < 4; ++c) {
            const cplx &e = a[static_cast<std::size_t>(4 * r + c)];
            const cplx &x = v[static_cast<std::size_t>(c)];
            re += e.real() * x.real() - e.imag() * x.imag();
            im += e.real() * x.imag() + e.imag() * x.real();
        }
        out[static_cast<std::size_t>(r)] = {re, im};
    }
    return out;
}

/// ψ† M φ
cplx bilinear(const Spinor &psi, const Complex4x4 &m, const Spinor &phi);

/// Dirac-Pauli matrices plus the streaming rotations S_a = (β + α_a)/√2.
struct DiracSet {
    Complex4x4 beta;
    std::array<Complex4x4, 3> alpha;
    Complex4x4 gamma5;
    /// βγ⁵; anti-Hermitian, squares to -I.
    Complex4x4 sigma;
    std::array<Complex4x4, 3> rot;

    const Complex4x4 &alpha_of(Axis a) const { return alpha[static_cast<std::size_t>(a)]; }
    const Complex4x4 &rotation_of(Axis a) const { return rot[static_cast<std::size_t>(a)]; }
};

DiracSet build_dirac_set();

/// S_a for the given axis. S_a is Hermitian and involutory, so it is also its own inverse.
const Complex4x4 &rotation(const DiracSet &set, Axis axis);

/// exp(M) for anti-Hermitian M (already scaled by the time step).
/// Throws NumericalError if M + M† exceeds 1e-12 anywhere.
Complex4x4 expm_antihermitian(const Complex4x4 &m);

/// cos(m dt) I - i β sin(m dt)
Complex4x4 collision_matrix_free(const DiracSet &set, double mass, double dt);

/// exp(dt M) with M = -iβ(m - g ρ_S) - g ρ_A Σ, evaluated in closed form.
Complex4x4 collision_matrix_njl(const DiracSet &set, double mass, double coupling, double rho_s,
                                double rho_a, double dt);

/// exp(-dt M) with M = iβm - i e α·A + i e V. Uses the two-term closed form when the
/// traceless part of M squares to a multiple of I, expm_antihermitian otherwise.
Complex4x4 collision_matrix_em(const DiracSet &set, double mass, double charge,
                               const std::array<double, 3> &vector_potential,
                               double scalar_potential, double dt);

} // namespace qlb
