#include "wavestab/spectral.hpp"

#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "wavestab/errors.hpp"

namespace wavestab {

namespace {

// The FFTW planner is not reentrant; execution with new-array calls is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

constexpr double kPi = 3.14159265358979323846;

} // namespace

void GridSpec::validate() const {
    if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("grid: period L must be positive");
    if (M < 64 || M % 2 != 0) throw ConfigError("grid: mode count M must be even and at least 64");
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("grid: depth h must be positive");
    if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("grid: gravity g must be positive");
}

double GridSpec::wavenumber(int m) const { return 2.0 * kPi * m / L; }

bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.L == b.L && a.M == b.M && a.h == b.h && a.g == b.g;
}

double symbol_n(double k, double h) {
    const double kh = std::abs(k * h);
    if (kh < 1e-6) return (1.0 + kh * kh / 3.0) / h;
    return std::abs(k) / std::tanh(kh);
}

struct Spectral::Plans {
    int M = 0;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;

    explicit Plans(int m) : M(m) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        double* in = fftw_alloc_real(M);
        fftw_complex* out = fftw_alloc_complex(M / 2 + 1);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        r2c = fftw_plan_dft_r2c_1d(M, in, out, flags);
        c2r = fftw_plan_dft_c2r_1d(M, out, in, flags);
        fftw_free(in);
        fftw_free(out);
    }
    ~Plans() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(r2c);
        fftw_destroy_plan(c2r);
    }
    Plans(const Plans&) = delete;
    Plans& operator=(const Plans&) = delete;
};

Spectral::Spectral(const GridSpec& grid, Dealias mode) : grid_(grid), mode_(mode) {
    grid_.validate();
    const int M = grid_.M;
    const int H = M / 2;
    nodes_.resize(M);
    for (int j = 0; j < M; ++j) nodes_[j] = grid_.node(j);
    n_.resize(H + 1);
    mult_N_.resize(H + 1);
    mult_C_.resize(H + 1);
    mult_D_.resize(H + 1);
    for (int m = 0; m <= H; ++m) {
        const double k = grid_.wavenumber(m);
        n_[m] = symbol_n(k, grid_.h);
        mult_N_[m] = n_[m];
        // Odd multipliers are dropped at the Nyquist bin to keep outputs real.
        if (m == 0 || m == H) {
            mult_C_[m] = 0.0;
            mult_D_[m] = 0.0;
        } else {
            mult_C_[m] = std::complex<double>(0.0, -n_[m] / k);
            mult_D_[m] = std::complex<double>(0.0, k);
        }
    }
    plans_ = std::make_shared<Plans>(M);
}

std::complex<double> Spectral::symbol_C(int m) const { return mult_C_.at(m); }

void Spectral::check(const Field& f) const {
    if (f.size() != grid_.M) throw InvalidField("field length does not match grid");
    if (!f.allFinite()) throw InvalidField("field has non-finite entries");
}

Spectrum Spectral::forward(const Field& f) const {
    check(f);
    Spectrum F(grid_.M / 2 + 1);
    fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(f.data()),
                         reinterpret_cast<fftw_complex*>(F.data()));
    return F;
}

Field Spectral::inverse(const Spectrum& F) const {
    Spectrum tmp = F;
    Field f(grid_.M);
    fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(tmp.data()), f.data());
    f /= grid_.M;
    return f;
}

Field Spectral::apply_multiplier(const Field& f,
                                 const std::vector<std::complex<double>>& mult) const {
    Spectrum F = forward(f);
    for (size_t m = 0; m < F.size(); ++m) F[m] *= mult[m];
    return inverse(F);
}

Field Spectral::apply_N(const Field& f) const { return apply_multiplier(f, mult_N_); }
Field Spectral::apply_C(const Field& f) const { return apply_multiplier(f, mult_C_); }
Field Spectral::apply_ddxi(const Field& f) const { return apply_multiplier(f, mult_D_); }

Field Spectral::apply_C_edge(const Field& f) const {
    Field Cf = apply_C(f);
    Cf.array() -= Cf[0];
    return Cf;
}

Field Spectral::antiderivative(const Field& f) const {
    Spectrum F = forward(f);
    const int H = grid_.M / 2;
    F[0] = 0.0;
    F[H] = 0.0;
    for (int m = 1; m < H; ++m) F[m] /= std::complex<double>(0.0, grid_.wavenumber(m));
    return inverse(F);
}

int Spectral::cutoff() const {
    return mode_ == Dealias::two_thirds ? grid_.M / 3 : grid_.M / 2 - 1;
}

Field Spectral::dealias(const Field& f) const {
    if (mode_ == Dealias::none) {
        check(f);
        return f;
    }
    Spectrum F = forward(f);
    for (int m = cutoff() + 1; m < static_cast<int>(F.size()); ++m) F[m] = 0.0;
    return inverse(F);
}

Field Spectral::product(const Field& a, const Field& b) const {
    if (mode_ == Dealias::none) return a.cwiseProduct(b);
    return dealias(dealias(a).cwiseProduct(dealias(b)));
}

double Spectral::integrate(const Field& f) const { return f.sum() * grid_.dxi(); }

double Spectral::inner(const Field& a, const Field& b) const { return a.dot(b) * grid_.dxi(); }

double Spectral::norm(const Field& f) const { return std::sqrt(inner(f, f)); }

double Spectral::evaluate(const Spectrum& F, double xi) const {
    const int M = grid_.M;
    const int H = M / 2;
    const double x = xi + 0.5 * grid_.L;
    double s = F[0].real();
    const double dk = grid_.wavenumber(1);
    const std::complex<double> step = std::polar(1.0, dk * x);
    std::complex<double> e = step;
    for (int m = 1; m < H; ++m) {
        s += 2.0 * (F[m] * e).real();
        e *= step;
        // Refresh the phase occasionally so rounding cannot accumulate.
        if ((m & 63) == 0) e = std::polar(1.0, dk * x * (m + 1));
    }
    s += F[H].real() * std::cos(grid_.wavenumber(H) * x);
    return s / M;
}

Field Spectral::resample(const Field& f, const Spectral& target) const {
    if (target.grid().L != grid_.L) throw ConfigError("resample: periods differ");
    const int M1 = grid_.M;
    const int M2 = target.grid().M;
    Spectrum F = forward(f);
    Spectrum G(M2 / 2 + 1, 0.0);
    const double scale = static_cast<double>(M2) / M1;
    if (M2 >= M1) {
        for (int m = 0; m < M1 / 2; ++m) G[m] = scale * F[m];
        // The old Nyquist bin is a cosine shared between +/- M1/2.
        G[M1 / 2] = (M2 > M1 ? 0.5 : 1.0) * scale * F[M1 / 2].real();
    } else {
        for (int m = 0; m < M2 / 2; ++m) G[m] = scale * F[m];
    }
    return target.inverse(G);
}

Field Spectral::interpolate(const Field& f, const Spectral& target) const {
    if (target.grid().L == grid_.L) return resample(f, target);
    const Spectrum F = forward(f);
    Field out(target.size());
    for (int j = 0; j < target.size(); ++j) out[j] = evaluate(F, target.nodes()[j]);
    return out;
}

double Spectral::tail_spectrum_ratio(const Field& f) const {
    Spectrum F = forward(f);
    double top = 0.0;
    for (const auto& c : F) top = std::max(top, std::abs(c));
    if (top == 0.0) return 0.0;
    const int hi = cutoff();
    const int lo = static_cast<int>(0.8 * hi);
    double band = 0.0;
    for (int m = lo; m <= hi; ++m) band = std::max(band, std::abs(F[m]));
    return band / top;
}

namespace {

Eigen::MatrixXd circulant(const Field& col) {
    const int M = static_cast<int>(col.size());
    Eigen::MatrixXd A(M, M);
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < M; ++i) A(i, j) = col[(i - j + M) % M];
    return A;
}

} // namespace

Eigen::MatrixXd Spectral::matrix_N() const {
    Field e = Field::Zero(grid_.M);
    e[0] = 1.0;
    return circulant(apply_N(e));
}

Eigen::MatrixXd Spectral::matrix_ddxi() const {
    Field e = Field::Zero(grid_.M);
    e[0] = 1.0;
    return circulant(apply_ddxi(e));
}

Eigen::VectorXd Spectral::cosine_coefficients(const Field& w) const {
    Spectrum F = forward(w);
    const int H = grid_.M / 2;
    Eigen::VectorXd a(H + 1);
    // Shift the origin from xi_0 = -L/2 to xi = 0.
    for (int m = 0; m <= H; ++m) a[m] = (m % 2 ? -1.0 : 1.0) * F[m].real() / grid_.M;
    return a;
}

Field Spectral::from_cosine_coefficients(const Eigen::VectorXd& a) const {
    const int H = grid_.M / 2;
    Spectrum F(H + 1, 0.0);
    const int n = std::min<int>(H + 1, static_cast<int>(a.size()));
    for (int m = 0; m < n; ++m) F[m] = (m % 2 ? -1.0 : 1.0) * a[m] * grid_.M;
    return inverse(F);
}

Field symmetrize(const Field& f) {
    const int M = static_cast<int>(f.size());
    Field s(M);
    s[0] = f[0];
    for (int j = 1; j < M; ++j) s[j] = 0.5 * (f[j] + f[M - j]);
    return s;
}

} // namespace wavestab
