#include "srfpll/errors.hpp"

namespace srfpll {
namespace {

std::string join(const std::vector<std::string>& parts) {
    std::string out = "invalid configuration:";
    for (const auto& p : parts) {
        out += "\n  - " + p;
    }
    return out;
}

std::string with_row(const std::string& message, std::size_t row) {
    if (row == 0) {
        return message;
    }
    return message + " (line " + std::to_string(row) + ")";
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

IngestError::IngestError(const std::string& message, std::size_t row)
    : std::runtime_error(with_row(message, row)), row_(row) {}

}  // namespace srfpll
