// pairdistill: simulate, gate and analyze SPDC / photoluminescence tag streams.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "pairdistill/config_io.hpp"
#include "pairdistill/core_stats.hpp"
#include "pairdistill/error.hpp"
#include "pairdistill/estimators.hpp"
#include "pairdistill/histogram.hpp"
#include "pairdistill/polarization.hpp"
#include "pairdistill/simulator.hpp"
#include "pairdistill/spectroscopy.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pairdistill;

namespace {

constexpr int kUsageExit = 2;

struct Globals {
    unsigned threads = 1;
};

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCategory::Io, "cannot open '" + path.string() + "' for writing");
    return out;
}

void write_json(const json& doc, const fs::path& path) {
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string config_path;
    std::string output = "stream.psft";
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> pulses;
    std::string echo_path;
};

int run_simulate(const SimulateArgs& args, const Globals& g) {
    EmissionConfig config = args.config_path.empty() ? EmissionConfig{}
                                                     : parse_config_text(read_text_file(args.config_path));
    if (args.seed) config.rng_seed = *args.seed;
    if (args.pulses) config.pulse_count = *args.pulses;
    config.validate();

    const TagStream stream = sim::simulate(config, g.threads);
    save_stream(stream, args.output);

    const json echo = config_to_json(config);
    if (!args.echo_path.empty()) write_json(echo, args.echo_path);
    json summary{{"output", args.output},
                 {"events", stream.size()},
                 {"det1", stream.count(Channel::Det1)},
                 {"det2", stream.count(Channel::Det2)},
                 {"triggers", stream.count(Channel::Trigger)},
                 {"config", echo}};
    std::cout << summary.dump(2) << '\n';
    return 0;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
    std::string input;
    double eta_det = 0.1;
    std::int64_t modes = 1130;
    bool no_gate = false;
    double threshold = 0.05;
    std::optional<Picoseconds> gate_offset;
    std::optional<Picoseconds> gate_width;
    Picoseconds bin_width = 50;
    Picoseconds sync_range = 50'000;
    Picoseconds coincidence_range = 5'000;
    std::optional<Picoseconds> window;
    std::optional<double> n0;
    std::string out_dir;
    bool json_out = false;
};

int run_analyze(const AnalyzeArgs& args, const Globals& g) {
    const TagStream stream = load_stream(args.input);

    estimate::ReportOptions opt;
    opt.use_gate = !args.no_gate;
    opt.threshold_fraction = args.threshold;
    opt.bin_width = args.bin_width;
    opt.sync_range = args.sync_range;
    opt.cw_window = args.window;
    opt.n0_override = args.n0;
    if (args.gate_offset.has_value() != args.gate_width.has_value()) {
        throw Error(ErrorCategory::Domain, "--gate-offset and --gate-width go together");
    }
    if (args.gate_offset) opt.gate = tags::GateWindow{*args.gate_offset, *args.gate_width};

    const estimate::AnalysisReport report = estimate::full_report(stream, args.eta_det, args.modes, opt);
    const json doc = estimate::to_json(report);

    if (!args.out_dir.empty()) {
        const fs::path dir(args.out_dir);
        write_json(doc, dir / "report.json");
        auto coinc = open_output(dir / "coincidence.csv");
        tags::write_csv(tags::coincidence_histogram(stream, args.bin_width, args.coincidence_range,
                                                    tags::PairingRule::MultiStop, g.threads),
                        coinc);
        if (report.regime == Regime::Pulsed) {
            auto s1 = open_output(dir / "sync_det1.csv");
            tags::write_csv(tags::sync_histogram(stream, Channel::Det1, args.bin_width, args.sync_range), s1);
            auto s2 = open_output(dir / "sync_det2.csv");
            tags::write_csv(tags::sync_histogram(stream, Channel::Det2, args.bin_width, args.sync_range), s2);
            auto three = open_output(dir / "threefold.csv");
            tags::write_csv(tags::threefold_histogram(stream, args.bin_width, args.sync_range), three);
            if (report.gate) write_json(tags::to_json(*report.gate), dir / "gate.json");
        }
    }

    if (args.json_out) {
        std::cout << doc.dump(2) << '\n';
    } else {
        estimate::print_table(report, std::cout);
    }
    return 0;
}

// ---------------------------------------------------------------- efficiency

struct EfficiencyArgs {
    std::string tensor_path;
    double thickness_um = 7.0;
    bool sweep = false;
    double sweep_min_um = 0.0;
    double sweep_max_um = 20.0;
    std::size_t steps = 201;
    std::string output;
    bool json_out = false;
};

int run_efficiency(const EfficiencyArgs& args) {
    polarization::NonlinearTensor tensor;
    if (!args.tensor_path.empty()) {
        const std::string text = read_text_file(args.tensor_path);
        tensor = polarization::tensor_from_json(parse_json_text(text, "tensor"));
    }
    const auto configs = polarization::default_configs(tensor);

    std::ostringstream body;
    if (args.sweep) {
        polarization::write_csv(polarization::thickness_sweep(configs, args.sweep_min_um, args.sweep_max_um, args.steps),
                                body);
    } else {
        const auto table = polarization::efficiency_table(configs, args.thickness_um);
        if (args.json_out) {
            body << polarization::to_json(table, args.thickness_um).dump(2) << '\n';
        } else {
            polarization::write_csv(table, body);
        }
    }
    if (args.output.empty()) {
        std::cout << body.str();
    } else {
        auto out = open_output(args.output);
        out << body.str();
    }
    return 0;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
    std::string points_path;
    std::string spectrum_path;
    std::string output;
    double pump_nm = 532.0;
    std::optional<double> band_min_nm;
    std::optional<double> band_max_nm;
    double corr_width_thz = 0.06;
    double edge_threshold = 0.5;
};

int run_calibrate(const CalibrateArgs& args) {
    std::ifstream in(args.points_path);
    if (!in) throw Error(ErrorCategory::Io, "cannot open '" + args.points_path + "'");
    const auto points = spectro::read_calibration_csv(in);
    const spectro::CalibrationFit fit = spectro::fit_calibration(points);

    json doc{{"map", {{"c0_nm", fit.map.c0}, {"c1_nm_per_ps", fit.map.c1}, {"c2_nm_per_ps2", fit.map.c2}}},
             {"residuals_nm", fit.residuals_nm},
             {"rms_residual_nm", fit.rms_residual_nm},
             {"max_abs_residual_nm", fit.max_abs_residual_nm}};

    std::optional<std::pair<double, double>> band;
    if (args.band_min_nm.has_value() != args.band_max_nm.has_value()) {
        throw Error(ErrorCategory::Domain, "--band-min and --band-max go together");
    }
    if (args.band_min_nm) band = std::pair{*args.band_min_nm, *args.band_max_nm};

    if (!args.spectrum_path.empty()) {
        std::ifstream hist_in(args.spectrum_path);
        if (!hist_in) throw Error(ErrorCategory::Io, "cannot open '" + args.spectrum_path + "'");
        const auto spectrum = spectro::map_spectrum(tags::read_histogram_csv(hist_in), fit.map);
        if (!args.output.empty()) {
            auto out = open_output(args.output);
            spectro::write_spectrum_csv(spectrum, out);
        }
        if (!band) {
            band = spectro::spectrum_edges(spectrum, args.edge_threshold);
            doc["edges_heuristic"] = true;
        }
    }
    if (band) {
        const auto s = spectro::summarize_band(band->first, band->second, args.corr_width_thz);
        doc["band"] = {{"lambda_min_nm", s.lambda_min_nm},
                       {"lambda_max_nm", s.lambda_max_nm},
                       {"delta_nu_thz", s.delta_nu_thz},
                       {"delta_nu_corr_thz", s.delta_nu_corr_thz},
                       {"mode_count", s.mode_count},
                       {"mode_count_rounded", s.mode_count_rounded},
                       {"conjugate_of_min_nm", s.lambda_min_nm > args.pump_nm
                                                   ? json(spectro::conjugate_wavelength(s.lambda_min_nm, args.pump_nm))
                                                   : json(nullptr)}};
    }
    std::cout << doc.dump(2) << '\n';
    return 0;
}

// ---------------------------------------------------------------- selftest

int run_selftest(const Globals& g) {
    int failures = 0, checks = 0;
    auto check = [&](bool ok, const char* what) {
        ++checks;
        if (!ok) {
            ++failures;
            std::cout << "FAIL " << what << '\n';
        }
    };

    const stats::ModePopulation pop{0.9 * 0.2 / 1130, 0.1 * 0.2 / 1130, 1130};
    check(stats::q_total(0.0, 0.0, pop) == 1.0, "generating function normalization");
    check(std::abs(stats::purity_from_p(stats::p_simple({0.9, 0.2, 1130}), 1130) - 0.99557) < 1e-4, "purity at alpha 0.9");
    check(std::abs(stats::g2_theory(pop).exact - 5.5007) < 1e-3, "g2 theory");

    EmissionConfig c;
    c.pulse_count = 20000;
    c.detector_efficiency = {0.5, 0.5};
    const TagStream a = sim::simulate_pulsed(c, 1);
    const TagStream b = sim::simulate_pulsed(c, std::max(2u, g.threads));
    check(a == b, "simulation independent of thread count");
    const auto gate = tags::find_gate(tags::combined_sync_histogram(a, 50, 50000), 0.5);
    check(std::abs(static_cast<double>(gate.width) - 235.5) < 60.0, "gate width near jitter FWHM");

    const auto table = polarization::efficiency_table(polarization::default_configs(), 7.0);
    check(table.front().label == polarization::ConfigLabel::EToOO, "e->oo strongest at 7 um");
    check(std::abs(spectro::fedorov_modes(spectro::band_to_thz(950, 1210), 0.06).raw - 1130) < 12, "mode count");

    std::cout << "selftest: " << (checks - failures) << '/' << checks << " checks passed\n";
    return failures == 0 ? 0 : 1;
}

void report_error(std::string_view category, std::string_view message) {
    std::cerr << json{{"error", {{"category", category}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pairdistill: photon-pair source simulation and time-gated distillation analysis.\n"
                 "Times are integer picoseconds (ps) throughout."};
    app.require_subcommand(1);
    app.set_version_flag("--version", "pairdistill 1.0.0");

    Globals g;
    g.threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--threads", g.threads, "Worker threads for simulation and histograms (count; output is identical for any value)")
        ->envname("PAIRDISTILL_THREADS")
        ->check(CLI::Range(1u, 1024u));

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Generate a time-tag stream from a JSON emission config");
    simulate->add_option("-c,--config", sim_args.config_path, "Emission config (JSON; durations in ps, rates in Hz)")
        ->check(CLI::ExistingFile);
    simulate->add_option("-o,--output", sim_args.output, "Tag file (.csv for CSV, anything else binary PSFT1)")
        ->capture_default_str();
    simulate->add_option("--seed", sim_args.seed, "RNG seed (64-bit integer), overrides the config")
        ->envname("PAIRDISTILL_SEED");
    simulate->add_option("--pulses", sim_args.pulses, "Pulse count override (pulses)");
    simulate->add_option("--echo-config", sim_args.echo_path, "Write the resolved config (JSON) here");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Estimate g2, heralding, alpha and purity from a tag file");
    analyze->add_option("input", an.input, "Tag file (binary PSFT1 or CSV)")->required()->check(CLI::ExistingFile);
    analyze->add_option("--eta-det", an.eta_det, "Detector efficiency used to convert heralding to alpha (0..1]")
        ->capture_default_str();
    analyze->add_option("--modes", an.modes, "Mode count d for the purity models (count)")->capture_default_str();
    analyze->add_flag("--no-gate", an.no_gate, "Pulsed: count whole pulse periods instead of the distillation gate");
    analyze->add_option("--threshold", an.threshold, "Gate threshold as a fraction of the peak above floor (0..1)")
        ->capture_default_str();
    analyze->add_option("--gate-offset", an.gate_offset, "Fixed gate start after the trigger (ps); needs --gate-width");
    analyze->add_option("--gate-width", an.gate_width, "Fixed gate width (ps); needs --gate-offset");
    analyze->add_option("--bin-width", an.bin_width, "Histogram bin width (ps)")->capture_default_str();
    analyze->add_option("--sync-range", an.sync_range, "Trigger-delay histogram range (ps)")->capture_default_str();
    analyze->add_option("--coincidence-range", an.coincidence_range, "Coincidence histogram half range (ps)")
        ->capture_default_str();
    analyze->add_option("--window", an.window, "CW coincidence window T (ps); default from the file's config");
    analyze->add_option("--n0", an.n0, "Photons per arm used for purity instead of N_det / eta_det (photons)");
    analyze->add_option("--out-dir", an.out_dir, "Directory for report.json, gate.json and histogram CSVs");
    analyze->add_flag("--json", an.json_out, "Print the report as JSON instead of a table");

    EfficiencyArgs ef;
    auto* efficiency = app.add_subcommand("efficiency", "Relative SPDC efficiency of X-cut LiNbO3 polarization configurations");
    efficiency->add_option("--tensor", ef.tensor_path, "JSON with d22, d31, d33 (pm/V); missing entries keep defaults")
        ->check(CLI::ExistingFile);
    efficiency->add_option("--thickness", ef.thickness_um, "Film thickness (um)")->capture_default_str();
    efficiency->add_flag("--sweep", ef.sweep, "Emit efficiency curves over a thickness range instead of a table");
    efficiency->add_option("--sweep-min", ef.sweep_min_um, "Sweep start thickness (um)")->capture_default_str();
    efficiency->add_option("--sweep-max", ef.sweep_max_um, "Sweep end thickness (um)")->capture_default_str();
    efficiency->add_option("--steps", ef.steps, "Sweep samples (count)")->capture_default_str();
    efficiency->add_option("-o,--output", ef.output, "Write CSV/JSON here instead of standard output");
    efficiency->add_flag("--json", ef.json_out, "Table as JSON (table mode only)");

    CalibrateArgs cal;
    auto* calibrate = app.add_subcommand("calibrate", "Fit a delay-to-wavelength calibration and count spectral modes");
    calibrate->add_option("points", cal.points_path, "CSV of delay_ps,wavelength_nm (ps, nm)")
        ->required()
        ->check(CLI::ExistingFile);
    calibrate->add_option("--spectrum", cal.spectrum_path, "Delay histogram CSV (bin_start_ps,count) to map onto wavelength")
        ->check(CLI::ExistingFile);
    calibrate->add_option("-o,--output", cal.output, "Mapped spectrum CSV (wavelength_nm,count)");
    calibrate->add_option("--pump", cal.pump_nm, "Pump wavelength (nm)")->capture_default_str();
    calibrate->add_option("--band-min", cal.band_min_nm, "Short band edge (nm)");
    calibrate->add_option("--band-max", cal.band_max_nm, "Long band edge (nm)");
    calibrate->add_option("--corr-width", cal.corr_width_thz, "Correlation width, e.g. pump linewidth (THz)")
        ->capture_default_str();
    calibrate->add_option("--edge-threshold", cal.edge_threshold,
                          "Heuristic edge level as a fraction of the spectrum maximum (0..1)")
        ->capture_default_str();

    auto* selftest = app.add_subcommand("selftest", "Run quick internal consistency checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("usage", e.what());
        std::cerr << "run with --help for usage\n";
        return kUsageExit;
    }

    try {
        if (*simulate) return run_simulate(sim_args, g);
        if (*analyze) return run_analyze(an, g);
        if (*efficiency) return run_efficiency(ef);
        if (*calibrate) return run_calibrate(cal);
        if (*selftest) return run_selftest(g);
    } catch (const Error& e) {
        report_error(category_name(e.category()), e.what());
        return category_exit_code(e.category());
    } catch (const fs::filesystem_error& e) {
        report_error(category_name(ErrorCategory::Io), e.what());
        return category_exit_code(ErrorCategory::Io);
    } catch (const std::exception& e) {
        report_error("internal", e.what());
        return 1;
    }
    return kUsageExit;
}
