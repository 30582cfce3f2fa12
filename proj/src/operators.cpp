#include "cuspscale/operators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <sstream>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "cuspscale/smooth.hpp"

namespace cuspscale {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Scaled: return "scaled";
        case Variant::ScaledCap: return "scaled+cap";
        case Variant::UnscaledCap: return "unscaled+cap";
    }
    return "?";
}

std::vector<double> Grid1D::nodes() const {
    if (N < 3 || !(hi > lo)) throw ConfigError("grid needs N >= 3 and hi > lo");
    std::vector<double> x(N);
    if (scheme == Scheme::FD4) {
        const double d = spacing();
        for (int i = 0; i < N; ++i) x[i] = lo + (i + 1) * d;
    } else {
        for (int i = 0; i < N; ++i) {
            const double c = std::cos(M_PI * (i + 1) / (N + 1));
            x[i] = lo + (hi - lo) * (1.0 - c) / 2.0;
        }
    }
    return x;
}

KineticCoeffs kinetic_coefficients(double f1, double f2) {
    const cplx g = 1.0 / cplx(1.0, f1);
    const cplx dg = cplx(0, -f2) * g * g;
    return {g * g, cplx(0, -1) * g * dg};
}

cplx correction_coefficient(double f1, double f2) {
    const cplx d(1.0, f1);
    return -f2 / (d * d * d);
}

namespace {

constexpr int KL = 2, KU = 2, LDAB = 2 * KL + KU + 1;

// FD4 row i: coefficients for u_{i-2..i+2} after folding the Dirichlet ends.
void fd4_row(const ModeOperator& op, int i, double d, cplx row[5]) {
    const double h2 = op.h * op.h;
    static const double s2[5] = {-1, 16, -30, 16, -1};
    static const double s1[5] = {1, -8, 0, 8, -1};
    for (int k = 0; k < 5; ++k)
        row[k] = -h2 * op.a[i] * s2[k] / (12 * d * d) - cplx(0, 1) * h2 * op.b[i] * s1[k] / (12 * d);
    row[2] += op.c[i];
    const int N = op.grid.N;
    // u_{-1} = u_N = 0; ghosts u_{-2} = -u_0, u_{N+1} = -u_{N-1}
    if (i == 0) {
        row[2] -= row[0];
        row[0] = 0;
        row[1] = 0;
    }
    if (i == 1) row[0] = 0;
    if (i == N - 1) {
        row[2] -= row[4];
        row[4] = 0;
        row[3] = 0;
    }
    if (i == N - 2) row[4] = 0;
}

Eigen::MatrixXcd cheb_matrix(int M) {
    // Trefethen's differentiation matrix on cos(pi k / M), k = 0..M.
    Eigen::VectorXd x(M + 1), c(M + 1);
    for (int k = 0; k <= M; ++k) {
        x[k] = std::cos(M_PI * k / M);
        c[k] = ((k == 0 || k == M) ? 2.0 : 1.0) * ((k % 2) ? -1.0 : 1.0);
    }
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(M + 1, M + 1);
    for (int i = 0; i <= M; ++i)
        for (int j = 0; j <= M; ++j)
            if (i != j) D(i, j) = c[i] / c[j] / (x[i] - x[j]);
    for (int i = 0; i <= M; ++i) D(i, i) = -D.row(i).sum();
    return D;
}

void check_correction(const KineticCoeffs& k, double f1, double f2) {
    const cplx ref = correction_coefficient(f1, f2);
    if (std::abs(k.first - ref) > 1e-12 * std::max(1.0, std::abs(ref)))
        throw NumericError("kinetic first-order coefficient disagrees with closed form");
}

}  // namespace

Eigen::MatrixXcd ModeOperator::dense() const {
    const int N = grid.N;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
    if (grid.scheme == Scheme::FD4) {
        const double d = grid.spacing();
        cplx row[5];
        for (int i = 0; i < N; ++i) {
            fd4_row(*this, i, d, row);
            for (int k = 0; k < 5; ++k) {
                const int j = i + k - 2;
                if (j >= 0 && j < N) A(i, j) += row[k];
            }
        }
        return A;
    }
    Eigen::MatrixXcd D = cheb_matrix(N + 1) * (-2.0 / (grid.hi - grid.lo));
    Eigen::MatrixXcd D2 = D * D;
    const double h2 = h * h;
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j)
            A(i, j) = -h2 * a[i] * D2(i + 1, j + 1) - cplx(0, 1) * h2 * b[i] * D(i + 1, j + 1);
        A(i, i) += c[i];
    }
    return A;
}

std::vector<cplx> ModeOperator::band(cplx shift) const {
    if (grid.scheme != Scheme::FD4) throw ConfigError("band storage needs the FD4 scheme");
    const int N = grid.N;
    std::vector<cplx> ab(static_cast<size_t>(LDAB) * N, cplx(0));
    const double d = grid.spacing();
    cplx row[5];
    for (int i = 0; i < N; ++i) {
        fd4_row(*this, i, d, row);
        row[2] -= shift;
        for (int k = 0; k < 5; ++k) {
            const int j = i + k - 2;
            if (j < 0 || j >= N) continue;
            ab[static_cast<size_t>(j) * LDAB + KL + KU + i - j] = row[k];
        }
    }
    return ab;
}

std::string ModeOperator::triplets() const {
    const Eigen::MatrixXcd A = dense();
    std::ostringstream os;
    os.precision(17);
    os << "i,j,re,im\n";
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
            if (A(i, j) != cplx(0)) os << i << ',' << j << ',' << A(i, j).real() << ',' << A(i, j).imag() << '\n';
    return os.str();
}

double ExteriorCap::operator()(double x) const {
    if (strength == 0) return 0;
    double u = 0;
    if (lo && x < lo_start) u = (lo_start - x) / length;
    if (hi && x > hi_start) u = std::max(u, (x - hi_start) / length);
    return strength * u * u * u;
}

double CapProfile::operator()(double x) const {
    if (x <= 0) return height;
    if (x >= ramp_end) return 0;
    return height * (1.0 - smooth_step(x / ramp_end).v);
}

ModeOperator build_mode_operator(const ModelSurface& m, const ContourSpec* cusp, const ContourSpec* funnel,
                                 double alpha, double h, const Grid1D& grid, int mode, const ExteriorCap& cap) {
    if (!m.glue) throw ConfigError("global operator needs the glued model");
    if (m.n != 2) throw ConfigError("global chart is two-dimensional");
    if (!(h > 0)) throw ConfigError("h must be positive");
    ModeOperator op;
    op.grid = grid;
    op.h = h;
    op.alpha = alpha;
    op.mode = mode;
    const bool scaled = cusp || funnel;
    op.variant = scaled ? (cap.strength > 0 ? Variant::ScaledCap : Variant::Scaled) : Variant::UnscaledCap;
    op.x = grid.nodes();
    const int N = grid.N;
    op.a.resize(N);
    op.b.resize(N);
    op.c.resize(N);
    op.contour_f.resize(N);
    for (int i = 0; i < N; ++i) {
        const double t = op.x[i];
        Jet F{0, 0, 0};
        if (t > 1 && cusp) {
            F = eval_contour(*cusp, t - 1);
        } else if (t < -1 && funnel) {
            const Jet g = eval_contour(*funnel, -t - 1);
            F = {-g.v, g.d1, -g.d2};
        }
        const KineticCoeffs k = kinetic_coefficients(F.d1, F.d2);
        check_correction(k, F.d1, F.d2);
        const double pert = m.perturbation(t);
        if (pert != 0 && F.v != 0) throw ConfigError("perturbation overlaps the scaled region");
        op.a[i] = k.second;
        op.b[i] = k.first;
        op.c[i] = std::exp(2.0 * cplx(t, F.v)) * alpha + pert - 1.0 - cplx(0, 1) * cap(t);
        op.contour_f[i] = F.v;
    }
    return op;
}

ModeOperator build_end_operator(End end, const WarpProfile& profile, int n, const ContourSpec& contour,
                                double alpha, double h, const Grid1D& grid) {
    if (grid.lo != 0) throw ConfigError("end operator lives on (0, r_max]");
    ModeOperator op;
    op.grid = grid;
    op.h = h;
    op.alpha = alpha;
    op.x = grid.nodes();
    const int N = grid.N;
    op.a.resize(N);
    op.b.resize(N);
    op.c.resize(N);
    op.contour_f.resize(N);
    const double s = end == End::Cusp ? 2.0 : -2.0;
    for (int i = 0; i < N; ++i) {
        const double r = op.x[i];
        const Jet F = eval_contour(contour, r);
        const KineticCoeffs k = kinetic_coefficients(F.d1, F.d2);
        check_correction(k, F.d1, F.d2);
        const cplx z(r, F.v);
        const cplx b = warp_jet(profile, z).b;
        op.a[i] = k.second;
        op.b[i] = k.first;
        op.c[i] = std::exp(s * z) * alpha * b + h * h * potential_V(end, profile, n, z) - 1.0;
        op.contour_f[i] = F.v;
    }
    return op;
}

ModeOperator build_cap_operator(const ModeOperator& base, const CapProfile& W, double R, double R_j) {
    if (W.height < 1) throw ConfigError("CAP profile must satisfy W >= 1 on (-inf, 0]");
    if (W.ramp_end > 1) throw ConfigError("CAP profile must vanish on [1, inf)");
    if (base.grid.lo != 0) throw ConfigError("absorbing potential is defined for end operators only");
    ModeOperator op = base;
    op.variant = Variant::ScaledCap;
    for (size_t i = 0; i < op.x.size(); ++i) op.c[i] -= cplx(0, 1) * W(op.x[i] - R - R_j);
    return op;
}

std::vector<cplx> dense_eigenvalues(Eigen::MatrixXcd A) {
    const int N = static_cast<int>(A.rows());
    std::vector<cplx> w(N);
    const int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', N, A.data(), N, w.data(), nullptr, 1, nullptr, 1);
    if (info != 0) throw NumericError("zgeev failed");
    std::sort(w.begin(), w.end(), [](cplx p, cplx q) {
        return p.real() != q.real() ? p.real() < q.real() : p.imag() < q.imag();
    });
    return w;
}

std::vector<cplx> mode_eigenvalues(const ModeOperator& op) { return dense_eigenvalues(op.dense()); }

std::vector<FloorSample> resolvent_floor(const ModeOperator& op, const std::vector<cplx>& zetas) {
    const Eigen::MatrixXcd A0 = op.dense();
    const int N = static_cast<int>(A0.rows());
    std::vector<FloorSample> out;
    std::vector<double> s(N), superb(N);
    for (cplx z : zetas) {
        Eigen::MatrixXcd A = A0;
        A.diagonal().array() -= z;
        const int info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'N', N, N, A.data(), N, s.data(), nullptr, 1,
                                        nullptr, 1, superb.data());
        if (info != 0) throw NumericError("zgesvd failed");
        out.push_back({z, s[N - 1], true});
    }
    return out;
}

namespace {

struct BandLU {
    int N;
    std::vector<cplx> ab;
    std::vector<lapack_int> ipiv;
    int info = 0;
    BandLU(const ModeOperator& op, cplx shift) : N(op.grid.N), ab(op.band(shift)), ipiv(N) {
        info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, N, N, KL, KU, ab.data(), LDAB, ipiv.data());
    }
    void solve(char trans, std::vector<cplx>& v) const {
        LAPACKE_zgbtrs(LAPACK_COL_MAJOR, trans, N, KL, KU, 1, ab.data(), LDAB, ipiv.data(), v.data(), N);
    }
    // arg det in [0, 2 pi)
    double phase() const {
        double p = 0;
        for (int j = 0; j < N; ++j) {
            p += std::arg(ab[static_cast<size_t>(j) * LDAB + KL + KU]);
            if (ipiv[j] != j + 1) p += M_PI;
        }
        p = std::fmod(p, 2 * M_PI);
        return p < 0 ? p + 2 * M_PI : p;
    }
};

double norm(const std::vector<cplx>& v) {
    double s = 0;
    for (cplx x : v) s += std::norm(x);
    return std::sqrt(s);
}

}  // namespace

std::vector<FloorSample> resolvent_floor_banded(const ModeOperator& op, const std::vector<cplx>& zetas,
                                                double rel_tol, int max_iter) {
    const int N = op.grid.N;
    std::vector<FloorSample> out;
    std::vector<cplx> v(N);
    for (int i = 0; i < N; ++i) v[i] = cplx(std::sin(0.7 * i + 0.3), std::cos(1.3 * i));
    for (cplx z : zetas) {
        BandLU lu(op, z);
        if (lu.info > 0) {
            out.push_back({z, 0.0, true});
            continue;
        }
        // warm start from the previous singular vector
        double nv = norm(v);
        for (auto& x : v) x /= nv;
        double sigma = std::numeric_limits<double>::infinity();
        bool conv = false;
        std::vector<cplx> w;
        for (int it = 0; it < max_iter; ++it) {
            w = v;
            lu.solve('C', w);
            lu.solve('N', w);
            const double nw = norm(w);
            for (auto& x : w) x /= nw;
            // sigma estimate ||A w|| for unit w, an upper bound on sigma_min
            std::vector<cplx> aw(N);
            const double d = op.grid.spacing();
            cplx row[5];
            for (int i = 0; i < N; ++i) {
                fd4_row(op, i, d, row);
                row[2] -= z;
                cplx acc = 0;
                for (int k = 0; k < 5; ++k) {
                    const int j = i + k - 2;
                    if (j >= 0 && j < N) acc += row[k] * w[j];
                }
                aw[i] = acc;
            }
            const double s = norm(aw);
            v = w;
            if (std::abs(sigma - s) <= rel_tol * s) {
                sigma = std::min(sigma, s);
                conv = true;
                break;
            }
            sigma = std::min(sigma, s);
        }
        out.push_back({z, sigma, conv});
    }
    return out;
}

DiscCount count_in_disc(const ModeOperator& op, cplx center, double radius) {
    DiscCount dc;
    auto phase_at = [&](double th) {
        ++dc.evaluations;
        BandLU lu(op, center + radius * std::exp(cplx(0, th)));
        if (lu.info > 0) throw NumericError("eigenvalue on the counting contour");
        return lu.phase();
    };
    auto wrap = [](double d) {
        d = std::fmod(d + M_PI, 2 * M_PI);
        if (d < 0) d += 2 * M_PI;
        return d - M_PI;
    };
    const double limit = M_PI / 3;
    double total = 0;
    // recursive refinement on [t0, t1]
    std::function<double(double, double, double, double, int)> seg = [&](double t0, double p0, double t1, double p1,
                                                                       int depth) -> double {
        const double d = wrap(p1 - p0);
        if (std::abs(d) <= limit) return d;
        if (depth > 24) {
            dc.reliable = false;
            return d;
        }
        const double tm = 0.5 * (t0 + t1);
        const double pm = phase_at(tm);
        return seg(t0, p0, tm, pm, depth + 1) + seg(tm, pm, t1, p1, depth + 1);
    };
    const int K = 64;
    std::vector<double> ph(K + 1);
    for (int k = 0; k < K; ++k) ph[k] = phase_at(2 * M_PI * k / K);
    ph[K] = ph[0];
    for (int k = 0; k < K; ++k) total += seg(2 * M_PI * k / K, ph[k], 2 * M_PI * (k + 1) / K, ph[k + 1], 0);
    dc.winding = total / (2 * M_PI);
    dc.count = static_cast<int>(std::lround(dc.winding));
    if (std::abs(dc.winding - dc.count) > 0.05) dc.reliable = false;
    return dc;
}

}  // namespace cuspscale
