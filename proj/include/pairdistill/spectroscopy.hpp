#pragma once

// Dispersive-fiber spectroscopy helpers: delay -> wavelength calibration,
// conjugate wavelengths from energy conservation, and Fedorov mode counting.

#include <iosfwd>
#include <utility>
#include <vector>

#include "pairdistill/histogram.hpp"

namespace pairdistill::spectro {

/// Speed of light in nm * THz.
inline constexpr double kSpeedOfLightNmThz = 299792.458;

struct CalibrationPoint {
    double delay_ps = 0.0;
    double wavelength_nm = 0.0;
};

/// wavelength = c0 + c1 * delay + c2 * delay^2.
struct QuadraticMap {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;

    double operator()(double delay_ps) const noexcept { return c0 + (c1 + c2 * delay_ps) * delay_ps; }
};

struct CalibrationFit {
    QuadraticMap map;
    std::vector<double> residuals_nm;  // measured - fitted, per input point
    double rms_residual_nm = 0.0;
    double max_abs_residual_nm = 0.0;
};

struct SpectralSummary {
    double lambda_min_nm = 0.0;
    double lambda_max_nm = 0.0;
    double delta_nu_thz = 0.0;
    double delta_nu_corr_thz = 0.0;
    double mode_count = 1.0;  // raw Fedorov ratio
    long long mode_count_rounded = 1;
};

/// 1/lambda_c = 1/lambda_pump - 1/lambda. Throws Error{NonPhysical} unless
/// lambda > pump > 0.
double conjugate_wavelength(double lambda_nm, double pump_nm);

/// Least-squares quadratic through >= 3 points. Throws Error{RankDeficient}
/// with fewer than three distinct delays.
CalibrationFit fit_calibration(const std::vector<CalibrationPoint>& points);

/// c (1/lambda_min - 1/lambda_max) in THz, as an absolute value.
double band_to_thz(double lambda_a_nm, double lambda_b_nm);

struct FedorovRatio {
    double raw = 1.0;
    long long rounded = 1;
};

/// R = delta_nu / delta_nu_corr. Throws Error{Domain} unless both > 0.
FedorovRatio fedorov_modes(double delta_nu_thz, double delta_nu_corr_thz);

/// Band edges plus mode count for a spectrum spanning [lambda_a, lambda_b].
SpectralSummary summarize_band(double lambda_a_nm, double lambda_b_nm, double delta_nu_corr_thz);

/// Maps a delay histogram onto wavelength: (bin-center wavelength, count).
std::vector<std::pair<double, std::int64_t>> map_spectrum(const tags::Histogram1D& hist, const QuadraticMap& map);

/// Heuristic band edges of a mapped spectrum: outermost wavelengths whose
/// count reaches threshold_fraction of the maximum. Throws Error{NoPeak} on
/// an empty spectrum.
std::pair<double, double> spectrum_edges(const std::vector<std::pair<double, std::int64_t>>& spectrum,
                                         double threshold_fraction);

/// CSV "delay_ps,wavelength_nm" with an optional header line.
std::vector<CalibrationPoint> read_calibration_csv(std::istream& in);
void write_calibration_csv(const std::vector<CalibrationPoint>& points, std::ostream& out);
void write_spectrum_csv(const std::vector<std::pair<double, std::int64_t>>& spectrum, std::ostream& out);

}  // namespace pairdistill::spectro
