#include "pairdistill/spectroscopy.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include <Eigen/Dense>

#include "pairdistill/error.hpp"

namespace pairdistill::spectro {

double conjugate_wavelength(double lambda_nm, double pump_nm) {
    if (!(pump_nm > 0.0) || !(lambda_nm > pump_nm)) {
        throw Error(ErrorCategory::NonPhysical, "need lambda > pump wavelength > 0");
    }
    const double inv = 1.0 / pump_nm - 1.0 / lambda_nm;
    if (!(inv > 0.0)) throw Error(ErrorCategory::NonPhysical, "conjugate wavelength is not positive");
    return 1.0 / inv;
}

CalibrationFit fit_calibration(const std::vector<CalibrationPoint>& points) {
    std::set<double> distinct;
    for (const auto& p : points) {
        if (!std::isfinite(p.delay_ps) || !std::isfinite(p.wavelength_nm)) {
            throw Error(ErrorCategory::Domain, "calibration points must be finite");
        }
        distinct.insert(p.delay_ps);
    }
    if (distinct.size() < 3) {
        throw Error(ErrorCategory::RankDeficient, "quadratic calibration needs at least three distinct delays");
    }

    // Center and scale the delay axis so the Vandermonde system stays well conditioned.
    const auto n = static_cast<Eigen::Index>(points.size());
    double mean = 0.0;
    for (const auto& p : points) mean += p.delay_ps;
    mean /= static_cast<double>(n);
    double scale = 0.0;
    for (const auto& p : points) scale = std::max(scale, std::abs(p.delay_ps - mean));

    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = (points[static_cast<std::size_t>(i)].delay_ps - mean) / scale;
        a(i, 0) = 1.0;
        a(i, 1) = u;
        a(i, 2) = u * u;
        b(i) = points[static_cast<std::size_t>(i)].wavelength_nm;
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 3) throw Error(ErrorCategory::RankDeficient, "calibration design matrix is rank deficient");
    const Eigen::Vector3d coef = qr.solve(b);

    // lambda = a0 + a1 u + a2 u^2 with u = (t - m) / s, expanded in t.
    CalibrationFit fit;
    const double s2 = scale * scale;
    fit.map.c2 = coef(2) / s2;
    fit.map.c1 = coef(1) / scale - 2.0 * coef(2) * mean / s2;
    fit.map.c0 = coef(0) - coef(1) * mean / scale + coef(2) * mean * mean / s2;

    double sum_sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = a(i, 1);
        const double r = b(i) - (coef(0) + coef(1) * u + coef(2) * u * u);
        fit.residuals_nm.push_back(r);
        sum_sq += r * r;
        fit.max_abs_residual_nm = std::max(fit.max_abs_residual_nm, std::abs(r));
    }
    fit.rms_residual_nm = std::sqrt(sum_sq / static_cast<double>(n));
    return fit;
}

double band_to_thz(double lambda_a_nm, double lambda_b_nm) {
    if (!(lambda_a_nm > 0.0 && lambda_b_nm > 0.0)) throw Error(ErrorCategory::Domain, "wavelengths must be > 0");
    return std::abs(kSpeedOfLightNmThz * (1.0 / lambda_a_nm - 1.0 / lambda_b_nm));
}

FedorovRatio fedorov_modes(double delta_nu_thz, double delta_nu_corr_thz) {
    if (!(delta_nu_thz > 0.0 && delta_nu_corr_thz > 0.0)) {
        throw Error(ErrorCategory::Domain, "spectral and correlation widths must be > 0");
    }
    const double raw = delta_nu_thz / delta_nu_corr_thz;
    return {raw, std::llround(raw)};
}

SpectralSummary summarize_band(double lambda_a_nm, double lambda_b_nm, double delta_nu_corr_thz) {
    SpectralSummary s;
    s.lambda_min_nm = std::min(lambda_a_nm, lambda_b_nm);
    s.lambda_max_nm = std::max(lambda_a_nm, lambda_b_nm);
    s.delta_nu_thz = band_to_thz(lambda_a_nm, lambda_b_nm);
    s.delta_nu_corr_thz = delta_nu_corr_thz;
    const FedorovRatio r = fedorov_modes(s.delta_nu_thz, delta_nu_corr_thz);
    s.mode_count = r.raw;
    s.mode_count_rounded = r.rounded;
    return s;
}

std::vector<std::pair<double, std::int64_t>> map_spectrum(const tags::Histogram1D& hist, const QuadraticMap& map) {
    std::vector<std::pair<double, std::int64_t>> out;
    out.reserve(hist.size());
    for (std::size_t i = 0; i < hist.size(); ++i) out.emplace_back(map(hist.bin_center(i)), hist.counts[i]);
    return out;
}

std::pair<double, double> spectrum_edges(const std::vector<std::pair<double, std::int64_t>>& spectrum,
                                         double threshold_fraction) {
    std::int64_t peak = 0;
    for (const auto& [lambda, count] : spectrum) peak = std::max(peak, count);
    if (peak == 0) throw Error(ErrorCategory::NoPeak, "spectrum is empty");
    const double level = threshold_fraction * static_cast<double>(peak);
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& [lambda, count] : spectrum) {
        if (static_cast<double>(count) >= level) {
            lo = std::min(lo, lambda);
            hi = std::max(hi, lambda);
        }
    }
    return {lo, hi};
}

std::vector<CalibrationPoint> read_calibration_csv(std::istream& in) {
    std::vector<CalibrationPoint> points;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#' || line.rfind("delay", 0) == 0) continue;
        const auto comma = line.find(',');
        try {
            if (comma == std::string::npos) throw std::invalid_argument("no comma");
            points.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        } catch (const std::exception&) {
            throw Error(ErrorCategory::FileFormat, "calibration CSV line " + std::to_string(line_no) + " is malformed");
        }
    }
    return points;
}

void write_calibration_csv(const std::vector<CalibrationPoint>& points, std::ostream& out) {
    out << "delay_ps,wavelength_nm\n";
    for (const auto& p : points) out << p.delay_ps << ',' << p.wavelength_nm << '\n';
}

void write_spectrum_csv(const std::vector<std::pair<double, std::int64_t>>& spectrum, std::ostream& out) {
    out << "wavelength_nm,count\n";
    for (const auto& [lambda, count] : spectrum) out << lambda << ',' << count << '\n';
}

}  // namespace pairdistill::spectro
