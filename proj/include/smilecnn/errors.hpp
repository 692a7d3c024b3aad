#pragma once

#include <stdexcept>
#include <string>

namespace smilecnn {

/// Non-finite loss or gradient during training. Message names the layer or
/// the epoch/batch where the value blew up.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what)
        : std::runtime_error(what) {}
};

/// Malformed input file (CSV or binary). Message carries the line number or
/// byte offset.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace smilecnn
