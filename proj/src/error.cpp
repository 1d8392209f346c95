#include "pairdistill/error.hpp"

namespace pairdistill {

std::string_view category_name(ErrorCategory category) noexcept {
    switch (category) {
        case ErrorCategory::DegenerateInput: return "degenerate_input";
        case ErrorCategory::Domain: return "domain";
        case ErrorCategory::Divergence: return "divergence";
        case ErrorCategory::Configuration: return "configuration";
        case ErrorCategory::EmptyStream: return "empty_stream";
        case ErrorCategory::NoTrigger: return "no_trigger";
        case ErrorCategory::NoPeak: return "no_peak";
        case ErrorCategory::MissingTruth: return "missing_truth";
        case ErrorCategory::RankDeficient: return "rank_deficient";
        case ErrorCategory::NonPhysical: return "non_physical";
        case ErrorCategory::FileFormat: return "file_format";
        case ErrorCategory::ConfigParse: return "config_parse";
        case ErrorCategory::Io: return "io";
    }
    return "unknown";
}

int category_exit_code(ErrorCategory category) noexcept {
    return 10 + static_cast<int>(category);
}

}  // namespace pairdistill
