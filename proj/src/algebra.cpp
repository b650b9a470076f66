#include "qlb/algebra.hpp"

#include "qlb/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace qlb {

namespace {

constexpr cplx kI{0.0, 1.0};

Complex4x4 block2(const std::array<cplx, 4> &tl, const std::array<cplx, 4> &tr,
                  const std::array<cplx, 4> &bl, const std::array<cplx, 4> &br) {
    Complex4x4 m;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            const auto k = static_cast<std::size_t>(2 * r + c);
            m(r, c) = tl[k];
            m(r, c + 2) = tr[k];
            m(r + 2, c) = bl[k];
            m(r + 2, c + 2) = br[k];
        }
    }
    return m;
}

} // namespace

Axis parse_axis(std::string_view name) {
    if (name == "x") return Axis::x;
    if (name == "y") return Axis::y;
    if (name == "z") return Axis::z;
    throw std::invalid_argument("invalid axis '" + std::string(name) + "' (expected x, y or z)");
}

char axis_name(Axis axis) {
    switch (axis) {
    case Axis::x: return 'x';
    case Axis::y: return 'y';
    case Axis::z: return 'z';
    }
    throw std::invalid_argument("invalid axis");
}

Complex4x4 Complex4x4::identity() { return diagonal(1.0, 1.0, 1.0, 1.0); }

Complex4x4 Complex4x4::diagonal(cplx d0, cplx d1, cplx d2, cplx d3) {
    Complex4x4 m;
    m(0, 0) = d0;
    m(1, 1) = d1;
    m(2, 2) = d2;
    m(3, 3) = d3;
    return m;
}

Complex4x4 Complex4x4::adjoint() const {
    Complex4x4 out;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
}

cplx Complex4x4::trace() const { return a_[0] + a_[5] + a_[10] + a_[15]; }

cplx Complex4x4::determinant() const {
    // Gaussian elimination with partial pivoting.
    std::array<cplx, 16> w = a_;
    cplx det = 1.0;
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(w[static_cast<std::size_t>(4 * r + col)]) >
                std::abs(w[static_cast<std::size_t>(4 * pivot + col)]))
                pivot = r;
        const cplx p = w[static_cast<std::size_t>(4 * pivot + col)];
        if (p == cplx{0.0, 0.0}) return 0.0;
        if (pivot != col) {
            for (int c = 0; c < 4; ++c)
                std::swap(w[static_cast<std::size_t>(4 * col + c)],
                          w[static_cast<std::size_t>(4 * pivot + c)]);
            det = -det;
        }
        det *= p;
        for (int r = col + 1; r < 4; ++r) {
            const cplx f = w[static_cast<std::size_t>(4 * r + col)] / p;
            for (int c = col; c < 4; ++c)
                w[static_cast<std::size_t>(4 * r + c)] -= f * w[static_cast<std::size_t>(4 * col + c)];
        }
    }
    return det;
}

Complex4x4 &Complex4x4::operator+=(const Complex4x4 &rhs) {
    for (std::size_t i = 0; i < 16; ++i) a_[i] += rhs.a_[i];
    return *this;
}

Complex4x4 &Complex4x4::operator-=(const Complex4x4 &rhs) {
    for (std::size_t i = 0; i < 16; ++i) a_[i] -= rhs.a_[i];
    return *this;
}

Complex4x4 &Complex4x4::operator*=(cplx s) {
    for (auto &e : a_) e *= s;
    return *this;
}

Complex4x4 operator*(const Complex4x4 &lhs, const Complex4x4 &rhs) {
    Complex4x4 out;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            cplx acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += lhs(r, k) * rhs(k, c);
            out(r, c) = acc;
        }
    return out;
}

double max_abs_diff(const Complex4x4 &a, const Complex4x4 &b) { return max_abs(a - b); }

double max_abs(const Complex4x4 &a) {
    double worst = 0.0;
    for (const auto &e : a.entries()) worst = std::max(worst, std::abs(e));
    return worst;
}

Complex4x4 anticommutator(const Complex4x4 &a, const Complex4x4 &b) { return a * b + b * a; }

Complex4x4 commutator(const Complex4x4 &a, const Complex4x4 &b) { return a * b - b * a; }

double unitarity_residual(const Complex4x4 &u) {
    return max_abs_diff(u.adjoint() * u, Complex4x4::identity());
}

double antihermiticity_residual(const Complex4x4 &m) { return max_abs(m + m.adjoint()); }

cplx bilinear(const Spinor &psi, const Complex4x4 &m, const Spinor &phi) {
    const Spinor mphi = matvec(m, phi);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < 4; ++i) acc += std::conj(psi[i]) * mphi[i];
    return acc;
}

DiracSet build_dirac_set() {
    const std::array<cplx, 4> zero{0.0, 0.0, 0.0, 0.0};
    const std::array<cplx, 4> one{1.0, 0.0, 0.0, 1.0};
    const std::array<cplx, 4> minus_one{-1.0, 0.0, 0.0, -1.0};
    const std::array<std::array<cplx, 4>, 3> pauli{{
        {0.0, 1.0, 1.0, 0.0},
        {0.0, -kI, kI, 0.0},
        {1.0, 0.0, 0.0, -1.0},
    }};

    DiracSet set;
    set.beta = block2(one, zero, zero, minus_one);
    for (std::size_t a = 0; a < 3; ++a) set.alpha[a] = block2(zero, pauli[a], pauli[a], zero);

    // γ⁵ = iγ⁰γ¹γ²γ³ with γ⁰ = β and γⁱ = βαⁱ.
    set.gamma5 = kI * set.beta * (set.beta * set.alpha[0]) * (set.beta * set.alpha[1]) *
                 (set.beta * set.alpha[2]);
    set.sigma = set.beta * set.gamma5;

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t a = 0; a < 3; ++a) set.rot[a] = (set.beta + set.alpha[a]) * inv_sqrt2;
    return set;
}

const Complex4x4 &rotation(const DiracSet &set, Axis axis) {
    const int a = static_cast<int>(axis);
    if (a < 0 || a > 2) throw std::invalid_argument("invalid axis");
    return set.rotation_of(axis);
}

Complex4x4 expm_antihermitian(const Complex4x4 &m) {
    const double residual = antihermiticity_residual(m);
    if (!(residual <= kUnitarityTol)) {
        std::ostringstream msg;
        msg << "invalid scattering matrix: not anti-Hermitian (|M + M^dagger|_max = " << residual
            << ")";
        throw NumericalError(msg.str());
    }

    // iM is Hermitian; exp(M) = V exp(-i Λ) V† from its eigendecomposition.
    Eigen::Matrix4cd h;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) h(r, c) = kI * m(r, c);
    h = 0.5 * (h + h.adjoint()).eval();

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> eig(h);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed in expm");
    const Eigen::Matrix4cd &v = eig.eigenvectors();
    Eigen::Vector4cd phases;
    for (int k = 0; k < 4; ++k) phases(k) = std::exp(-kI * eig.eigenvalues()(k));
    const Eigen::Matrix4cd u = v * phases.asDiagonal() * v.adjoint();

    Complex4x4 out;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out(r, c) = u(r, c);
    return out;
}

Complex4x4 collision_matrix_free(const DiracSet &set, double mass, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("collision_matrix_free: dt must be positive");
    const double phase = mass * dt;
    return Complex4x4::identity() * std::cos(phase) - kI * std::sin(phase) * set.beta;
}

Complex4x4 collision_matrix_njl(const DiracSet &set, double mass, double coupling, double rho_s,
                                double rho_a, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("collision_matrix_njl: dt must be positive");
    const double a = (mass - coupling * rho_s) * dt;
    const double b = coupling * rho_a * dt;
    // M = -iaβ - bΣ squares to -(a² + b²) I because β and Σ anticommute.
    const Complex4x4 generator = -kI * a * set.beta - b * set.sigma;
    const double theta = std::hypot(a, b);
    double sinc = 0.0;
    if (theta < 1e-4) {
        const double t2 = theta * theta;
        sinc = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    } else {
        sinc = std::sin(theta) / theta;
    }
    return Complex4x4::identity() * std::cos(theta) + generator * sinc;
}

Complex4x4 collision_matrix_em(const DiracSet &set, double mass, double charge,
                               const std::array<double, 3> &vector_potential,
                               double scalar_potential, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("collision_matrix_em: dt must be positive");
    Complex4x4 scattering = kI * mass * set.beta + Complex4x4::identity() * (kI * charge * scalar_potential);
    for (std::size_t a = 0; a < 3; ++a)
        scattering -= kI * (charge * vector_potential[a]) * set.alpha[a];
    const Complex4x4 g = scattering * (-dt);
    if (antihermiticity_residual(g) > kUnitarityTol) return expm_antihermitian(g);

    // Split off the trace; for Clifford generators the rest squares to -θ² I and
    // exp(g) = e^τ (cos θ I + sinc θ K). Anything else takes the generic route.
    const cplx tau = g.trace() / 4.0;
    const Complex4x4 k = g - Complex4x4::identity() * tau;
    const Complex4x4 k2 = k * k;
    const double theta2 = -k2.trace().real() / 4.0;
    if (!(theta2 >= 0.0) ||
        max_abs_diff(k2, Complex4x4::identity() * (-theta2)) > 1e-14 * std::max(1.0, theta2))
        return expm_antihermitian(g);
    const double theta = std::sqrt(theta2);
    const double sinc = theta < 1e-4 ? 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0 : std::sin(theta) / theta;
    return (Complex4x4::identity() * std::cos(theta) + k * sinc) * std::exp(tau);
}

} // namespace qlb
