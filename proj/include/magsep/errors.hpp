#ifndef MAGSEP_ERRORS_HPP
#define MAGSEP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace magsep {

// Invalid physical parameter or malformed configuration. Carries the
// config path of the offending entry when known (empty otherwise).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& message)
        : std::runtime_error(message) {}
    ValidationError(const std::string& path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), path_(path) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// Requested operation cannot produce a result (e.g. a calibration bracket
// that does not straddle the target).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace magsep

#endif
