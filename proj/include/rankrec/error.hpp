#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rankrec {

enum class errc {
    unknown_node,
    already_failed,
    no_alive_nodes,
    empty_table,
    invalid_size,
    invalid_argument,
    not_converged,
    parse_error,
    validation_error,
    corrupt_log,
    instance_too_large,
    unsupported_format,
};

constexpr std::string_view to_string(errc code) noexcept {
    switch (code) {
    case errc::unknown_node: return "UnknownNode";
    case errc::already_failed: return "AlreadyFailed";
    case errc::no_alive_nodes: return "NoAliveNodes";
    case errc::empty_table: return "EmptyTable";
    case errc::invalid_size: return "InvalidSize";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::not_converged: return "NotConverged";
    case errc::parse_error: return "ParseError";
    case errc::validation_error: return "ValidationError";
    case errc::corrupt_log: return "CorruptLog";
    case errc::instance_too_large: return "InstanceTooLarge";
    case errc::unsupported_format: return "UnsupportedFormat";
    }
    return "Unknown";
}

// Every failure surfaced by the library. `details` carries one entry per
// problem when several are reported at once (config validation).
class error : public std::runtime_error {
public:
    error(errc code, std::string const & message, std::vector<std::string> details = {})
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code),
          message_(message),
          details_(std::move(details)) {}

    errc code() const noexcept { return code_; }
    std::string const & message() const noexcept { return message_; }
    std::vector<std::string> const & details() const noexcept { return details_; }

private:
    errc code_;
    std::string message_;
    std::vector<std::string> details_;
};

} // namespace rankrec
