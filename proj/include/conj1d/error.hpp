#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace conj1d {

/// Error categories, mapped to CLI exit codes (input=1, structure=2, verification=3).
enum class errc {
    parse,         // malformed expression text
    domain,        // point/interval outside what an operation accepts
    structure,     // signature or inventory mismatch, unmet construction hypotheses
    verification,  // a check ran and failed
    internal,      // should-not-happen guards
};

class error : public std::runtime_error {
  public:
    error(errc kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    errc kind() const { return kind_; }

  private:
    errc kind_;
};

class parse_error : public error {
  public:
    parse_error(const std::string& what, std::size_t offset)
        : error(errc::parse, what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

  private:
    std::size_t offset_;
};

}  // namespace conj1d
