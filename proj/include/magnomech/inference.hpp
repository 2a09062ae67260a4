#pragma once

#include "magnomech/core_model.hpp"
#include "magnomech/levenberg_marquardt.hpp"
#include "magnomech/spectra.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace magnomech
{
// ---------------------------------------------------------------------------
// Window fit
// ---------------------------------------------------------------------------

// Complex Lorentzian on a polynomial complex background:
//   S(f) = sum_k b_k u^k + A (w/2) / (w/2 - i (f - center)),  u = (f - reference_hz) / scale_hz
// `amplitude` is the deviation from the background at the window centre.
struct WindowFit
{
    double center = 0.0;  // Hz
    double fwhm = 0.0;    // Hz
    Complex amplitude;
    std::vector<Complex> background;
    double reference_hz = 0.0;
    double scale_hz = 1.0;

    double center_err = 0.0;  // one standard deviation, Hz
    double fwhm_err = 0.0;
    double amplitude_re_err = 0.0;
    double amplitude_im_err = 0.0;

    double residual_rms = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> cost_history;

    Complex background_at(double f_hz) const;
    Complex model_at(double f_hz) const;

    // Positive when the window suppresses the intracavity response |1 - S|
    // (transparency), negative when it enhances it (absorption).
    double transparency() const;
};

struct WindowFitOptions
{
    // Polynomial order of the background. 1 is constant + linear; 3 absorbs
    // the curvature of the hybrid mode across a wide window.
    int background_order = 3;
    LmOptions lm = {};
};

// Throws BadWindow if init_center lies outside the grid or the grid is too
// short for the model. Non-convergence is reported through `converged`.
WindowFit fit_window(const Spectrum& s, double init_center_hz, const WindowFitOptions& options = {});

// ---------------------------------------------------------------------------
// Linewidth versus power
// ---------------------------------------------------------------------------

struct PowerPoint
{
    double power = 0.0;      // W
    double gamma_hz = 0.0;   // total linewidth, Hz
};

struct PowerSeriesFit
{
    double intercept = 0.0;  // Hz; estimates the intrinsic linewidth
    double slope = 0.0;      // Hz / W
    std::array<std::array<double, 2>, 2> covariance{};  // (intercept, slope)
    std::vector<double> residuals;

    double intercept_err() const;
    double slope_err() const;
};

// Ordinary least squares line. Throws DegenerateDesign when all powers are
// equal, InvalidParameter for fewer than three points.
PowerSeriesFit fit_power_series(std::span<const PowerPoint> points);

// ---------------------------------------------------------------------------
// Global backaction fit
// ---------------------------------------------------------------------------

struct GammaPoint
{
    double detuning_hz = 0.0;  // drive detuning from the upper normal mode, Delta_+ / 2pi
    double power = 0.0;        // W
    double gamma_hz = 0.0;     // magnomechanical damping, Hz
    double weight = 1.0;
};

struct GlobalFit
{
    double g_mb0 = 0.0;  // Hz
    double alpha = 0.0;  // Hz per magnon
    std::array<std::array<double, 2>, 2> covariance{};  // (g_mb0, alpha), Hz^2
    double chi_square = 0.0;
    std::size_t dof = 0;
    std::vector<double> residuals;  // Hz

    double g_mb0_err() const;
    double alpha_err() const;
};

// Model predictions for a dataset at the given couplings (angular).
std::vector<double> predict_gamma_mag_hz(const SystemParams& known, std::span<const GammaPoint> data);

// gamma_mag_corrected is linear in (g_mb0^2, alpha); solved by weighted
// linear least squares. The g_mb0 and alpha fields of `known` are ignored.
// Throws NegativeCouplingSquare if the solved g_mb0^2 is negative.
GlobalFit fit_global(std::span<const GammaPoint> data, const SystemParams& known);

// Drive configuration for a detuning from the upper normal mode.
DriveConfig drive_at_detuning(const SystemParams& params, double detuning_plus_hz, double power);
}  // namespace magnomech
