#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace srfpll {

// Rejected configuration. Carries every violated constraint, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

// Failure while reading recorded data (missing file, malformed row, bad timestamps).
// `row` is the 1-based line number in the source file, 0 when not applicable.
class IngestError : public std::runtime_error {
public:
    explicit IngestError(const std::string& message, std::size_t row = 0);

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

// Frequency-domain analysis could not complete (e.g. no 0 dB crossing in the scan range).
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values encountered while running.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace srfpll
