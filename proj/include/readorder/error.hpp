#pragma once

#include <stdexcept>
#include <string>

namespace readorder {

// Exit-status families; the CLI maps them 1:1 onto process exit codes.
enum class error_kind : int {
    usage = 1,
    data = 2,
    numeric = 3,
};

class error : public std::runtime_error {
public:
    error(error_kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    error_kind kind() const noexcept { return kind_; }

private:
    error_kind kind_;
};

class data_error : public error {
public:
    explicit data_error(const std::string& what) : error(error_kind::data, what) {}
};

// Raised when two token streams cannot be matched one-to-one.
class alignment_error : public data_error {
public:
    explicit alignment_error(const std::string& what) : data_error("alignment: " + what) {}
};

class range_error : public data_error {
public:
    explicit range_error(const std::string& what) : data_error("range: " + what) {}
};

class numeric_error : public error {
public:
    explicit numeric_error(const std::string& what) : error(error_kind::numeric, what) {}
};

class usage_error : public error {
public:
    explicit usage_error(const std::string& what) : error(error_kind::usage, what) {}
};

} // namespace readorder
