#include "magnomech/inference.hpp"

#include "magnomech/backaction.hpp"
#include "magnomech/errors.hpp"
#include "magnomech/units.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace magnomech
{
namespace
{

// Parameter layout: [Re A, Im A, u_c, log w_u, Re b0, Im b0, Re b1, Im b1, ...].
constexpr Eigen::Index kLinearOffset = 4;

Complex lorentzian(double u, double uc, double w)
{
    const double hw = 0.5 * w;
    const double d = u - uc;
    const double scale = hw / (hw * hw + d * d);
    return {hw * scale, d * scale};
}

Complex times(Complex a, Complex b)
{
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

Complex polynomial(std::span<const Complex> coeffs, double u)
{
    Complex acc{};
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * u + *it;
    }
    return acc;
}

// Best amplitude and background for fixed centre and width; returns the
// squared residual norm.
double project_linear(std::span<const double> u, std::span<const Complex> y, double uc, double w, int order,
                      Eigen::VectorXcd& coeffs)
{
    const Eigen::Index n = static_cast<Eigen::Index>(u.size());
    const Eigen::Index cols = order + 2;
    Eigen::MatrixXcd design(n, cols);
    Eigen::VectorXcd rhs(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        design(k, 0) = lorentzian(u[k], uc, w);
        double power = 1.0;
        for (int j = 0; j <= order; ++j) {
            design(k, j + 1) = power;
            power *= u[k];
        }
        rhs[k] = y[k];
    }
    // Normal equations are accurate enough for a starting point.
    const Eigen::MatrixXcd gram = design.adjoint() * design;
    coeffs = gram.ldlt().solve(design.adjoint() * rhs);
    return (design * coeffs - rhs).squaredNorm();
}

double moving_average_argmax(std::span<const double> values, std::size_t half)
{
    const std::size_t n = values.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        prefix[k + 1] = prefix[k] + values[k];
    }
    std::size_t best = 0;
    double best_value = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t lo = k >= half ? k - half : 0;
        const std::size_t hi = std::min(n, k + half + 1);
        const double mean = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
        if (mean > best_value) {
            best_value = mean;
            best = k;
        }
    }
    return static_cast<double>(best);
}

double cov_sqrt(const Eigen::MatrixXd& cov, Eigen::Index k)
{
    const double v = cov(k, k);
    return v > 0.0 ? std::sqrt(v) : 0.0;
}
}  // namespace

Complex WindowFit::background_at(double f_hz) const
{
    return polynomial(background, (f_hz - reference_hz) / scale_hz);
}

Complex WindowFit::model_at(double f_hz) const
{
    return background_at(f_hz) + amplitude * lorentzian(f_hz, center, fwhm);
}

double WindowFit::transparency() const
{
    const Complex bg = background_at(center);
    return std::abs(1.0 - bg) - std::abs(1.0 - bg - amplitude);
}

WindowFit fit_window(const Spectrum& s, double init_center_hz, const WindowFitOptions& options)
{
    check_grid(s.freq);
    if (s.response.size() != s.freq.size()) {
        throw BadWindow("response length differs from grid length");
    }
    if (options.background_order < 0) {
        throw InvalidParameter("background order must be non-negative");
    }
    if (!(init_center_hz >= s.freq.front() && init_center_hz <= s.freq.back())) {
        throw BadWindow("initial centre lies outside the spectrum grid");
    }
    const int order = options.background_order;
    const Eigen::Index param_count = kLinearOffset + 2 * (order + 1);
    const std::size_t n = s.size();
    if (static_cast<Eigen::Index>(n) <= param_count) {
        throw BadWindow("window has too few points for the model");
    }

    WindowFit fit;
    fit.reference_hz = init_center_hz;
    fit.scale_hz = 0.5 * (s.freq.back() - s.freq.front());

    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k) {
        u[k] = (s.freq[k] - fit.reference_hz) / fit.scale_hz;
    }

    // Seed: smoothed peak of the deviation from the end-point chord, then a
    // width scan with the linear parameters projected out.
    std::vector<double> deviation(n);
    const Complex z0 = s.response.front();
    const Complex dz = s.response.back() - z0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = (u[k] - u.front()) / (u.back() - u.front());
        deviation[k] = std::abs(s.response[k] - (z0 + dz * t));
    }
    const std::size_t smooth = std::max<std::size_t>(1, n / 400);
    const double uc0 = u[static_cast<std::size_t>(moving_average_argmax(deviation, smooth))];

    const double du = (u.back() - u.front()) / static_cast<double>(n - 1);
    double w0 = 0.1;
    double best_norm = std::numeric_limits<double>::infinity();
    Eigen::VectorXcd coeffs;
    Eigen::VectorXcd best_coeffs;
    const double w_min = std::max(4.0 * du, 1e-4);
    for (int k = 0; k <= 40; ++k) {
        const double w = w_min * std::pow(2.0 / w_min, k / 40.0);
        const double norm = project_linear(u, s.response, uc0, w, order, coeffs);
        if (norm < best_norm) {
            best_norm = norm;
            w0 = w;
            best_coeffs = coeffs;
        }
    }

    Eigen::VectorXd x0(param_count);
    x0[0] = best_coeffs[0].real();
    x0[1] = best_coeffs[0].imag();
    x0[2] = uc0;
    x0[3] = std::log(w0);
    for (int j = 0; j <= order; ++j) {
        x0[kLinearOffset + 2 * j] = best_coeffs[j + 1].real();
        x0[kLinearOffset + 2 * j + 1] = best_coeffs[j + 1].imag();
    }

    const Eigen::Index residual_count = 2 * static_cast<Eigen::Index>(n);
    std::vector<Complex> bg(order + 1);
    auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        const Complex amp{p[0], p[1]};
        const double uc = p[2];
        const double w = std::exp(p[3]);
        for (int j = 0; j <= order; ++j) {
            bg[j] = Complex{p[kLinearOffset + 2 * j], p[kLinearOffset + 2 * j + 1]};
        }
        for (std::size_t k = 0; k < n; ++k) {
            const Complex diff = polynomial(bg, u[k]) + times(amp, lorentzian(u[k], uc, w)) - s.response[k];
            r[2 * static_cast<Eigen::Index>(k)] = diff.real();
            r[2 * static_cast<Eigen::Index>(k) + 1] = diff.imag();
        }
    };

    const LmResult lm = levenberg_marquardt(residuals, x0, residual_count, options.lm);
    const Eigen::VectorXd& p = lm.params;

    fit.amplitude = Complex{p[0], p[1]};
    fit.center = fit.reference_hz + p[2] * fit.scale_hz;
    fit.fwhm = std::exp(p[3]) * fit.scale_hz;
    fit.background.resize(order + 1);
    for (int j = 0; j <= order; ++j) {
        fit.background[j] = Complex{p[kLinearOffset + 2 * j], p[kLinearOffset + 2 * j + 1]};
    }
    fit.amplitude_re_err = cov_sqrt(lm.covariance, 0);
    fit.amplitude_im_err = cov_sqrt(lm.covariance, 1);
    fit.center_err = cov_sqrt(lm.covariance, 2) * fit.scale_hz;
    fit.fwhm_err = cov_sqrt(lm.covariance, 3) * fit.fwhm;
    fit.residual_rms = std::sqrt(2.0 * lm.cost / static_cast<double>(n));
    fit.converged = lm.converged && std::isfinite(fit.fwhm) && fit.fwhm > 0.0;
    fit.iterations = lm.iterations;
    fit.cost_history = lm.accepted_costs;
    return fit;
}

double PowerSeriesFit::intercept_err() const
{
    return std::sqrt(std::max(covariance[0][0], 0.0));
}

double PowerSeriesFit::slope_err() const
{
    return std::sqrt(std::max(covariance[1][1], 0.0));
}

PowerSeriesFit fit_power_series(std::span<const PowerPoint> points)
{
    if (points.size() < 3) {
        throw InvalidParameter("power series fit needs at least three points");
    }
    const double count = static_cast<double>(points.size());
    double mean_p = 0.0;
    double mean_g = 0.0;
    for (const auto& pt : points) {
        mean_p += pt.power;
        mean_g += pt.gamma_hz;
    }
    mean_p /= count;
    mean_g /= count;

    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& pt : points) {
        sxx += (pt.power - mean_p) * (pt.power - mean_p);
        sxy += (pt.power - mean_p) * (pt.gamma_hz - mean_g);
    }
    if (!(sxx > 0.0)) {
        throw DegenerateDesign("all drive powers are equal");
    }

    PowerSeriesFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_g - fit.slope * mean_p;

    double ssr = 0.0;
    fit.residuals.reserve(points.size());
    for (const auto& pt : points) {
        const double r = pt.gamma_hz - (fit.intercept + fit.slope * pt.power);
        fit.residuals.push_back(r);
        ssr += r * r;
    }
    const double s2 = ssr / (count - 2.0);
    fit.covariance[1][1] = s2 / sxx;
    fit.covariance[0][0] = s2 * (1.0 / count + mean_p * mean_p / sxx);
    fit.covariance[0][1] = fit.covariance[1][0] = -s2 * mean_p / sxx;
    return fit;
}

double GlobalFit::g_mb0_err() const
{
    return std::sqrt(std::max(covariance[0][0], 0.0));
}

double GlobalFit::alpha_err() const
{
    return std::sqrt(std::max(covariance[1][1], 0.0));
}

DriveConfig drive_at_detuning(const SystemParams& params, double detuning_plus_hz, double power)
{
    const HybridModes modes = hybridize(params);
    return DriveConfig{modes.omega_plus + angular(detuning_plus_hz), power};
}

namespace
{
// Damping per unit g_mb0^2 and magnon population, both angular.
struct Regressors
{
    double per_coupling_sq = 0.0;
    double population = 0.0;
};

Regressors regressors_at(const SystemParams& known, const GammaPoint& pt)
{
    SystemParams unit = known;
    unit.g_mb0 = 1.0;
    unit.alpha = 0.0;
    const BackactionResult r = gamma_mag(unit, drive_at_detuning(unit, pt.detuning_hz, pt.power));
    return {r.gamma_mag_exact, r.magnon_population};
}
}  // namespace

std::vector<double> predict_gamma_mag_hz(const SystemParams& known, std::span<const GammaPoint> data)
{
    std::vector<double> out;
    out.reserve(data.size());
    for (const auto& pt : data) {
        const Regressors reg = regressors_at(known, pt);
        out.push_back(linear(known.g_mb0 * known.g_mb0 * reg.per_coupling_sq + known.alpha * reg.population));
    }
    return out;
}

GlobalFit fit_global(std::span<const GammaPoint> data, const SystemParams& known)
{
    std::set<double> powers;
    std::set<double> detunings;
    for (const auto& pt : data) {
        if (!(pt.weight >= 0.0) || !std::isfinite(pt.weight)) {
            throw InvalidParameter("weights must be finite and non-negative");
        }
        powers.insert(pt.power);
        detunings.insert(pt.detuning_hz);
    }
    if (powers.size() < 2 || detunings.size() < 5) {
        throw InvalidParameter("global fit needs at least two powers and five detunings");
    }

    const Eigen::Index n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const GammaPoint& pt = data[static_cast<std::size_t>(k)];
        const Regressors reg = regressors_at(known, pt);
        const double sw = std::sqrt(pt.weight);
        design(k, 0) = sw * linear(reg.per_coupling_sq);
        design(k, 1) = sw * linear(reg.population);
        rhs[k] = sw * pt.gamma_hz;
    }

    // Columns differ by ~25 orders of magnitude; equilibrate before solving.
    Eigen::Vector2d col_scale;
    for (Eigen::Index j = 0; j < 2; ++j) {
        const double norm = design.col(j).norm();
        col_scale[j] = norm > 0.0 ? norm : 1.0;
        design.col(j) /= col_scale[j];
    }
    const Eigen::Vector2d scaled = design.colPivHouseholderQr().solve(rhs);
    const double coupling_sq = scaled[0] / col_scale[0];  // (rad/s)^2
    const double alpha = scaled[1] / col_scale[1];        // rad/s

    if (coupling_sq < 0.0) {
        throw NegativeCouplingSquare("fitted g_mb0^2 is negative; model and data disagree");
    }

    GlobalFit fit;
    fit.g_mb0 = linear(std::sqrt(coupling_sq));
    fit.alpha = linear(alpha);
    fit.dof = data.size() - 2;

    const Eigen::VectorXd weighted_residuals = rhs - design * scaled;
    fit.chi_square = weighted_residuals.squaredNorm();
    fit.residuals.reserve(data.size());
    for (Eigen::Index k = 0; k < n; ++k) {
        const double sw = std::sqrt(data[static_cast<std::size_t>(k)].weight);
        fit.residuals.push_back(sw > 0.0 ? weighted_residuals[k] / sw : 0.0);
    }

    const double s2 = fit.dof > 0 ? fit.chi_square / static_cast<double>(fit.dof) : 0.0;
    const Eigen::Matrix2d normal = design.transpose() * design;
    Eigen::Matrix2d cov_scaled = s2 * normal.inverse();
    // Back to (g_mb0^2, alpha) in angular units, then to (g_mb0, alpha) in Hz.
    Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
    const double root = std::sqrt(coupling_sq);
    jac(0, 0) = root > 0.0 ? linear(1.0 / (2.0 * root)) / col_scale[0] : 0.0;
    jac(1, 1) = linear(1.0) / col_scale[1];
    const Eigen::Matrix2d cov = jac * cov_scaled * jac.transpose();
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            fit.covariance[r][c] = cov(r, c);
        }
    }
    return fit;
}
}  // namespace magnomech
