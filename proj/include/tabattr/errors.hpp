#pragma once

#include <stdexcept>
#include <string>

namespace tabattr {

// Base for all domain errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Coordinate or index outside the valid range of a table or view.
class BoundsError : public Error {
public:
    using Error::Error;
};

// prune() called with an empty row or column selection.
class EmptySelectionError : public Error {
public:
    using Error::Error;
};

// Filter text could not be parsed; carries the byte offset of the failure.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t position)
        : Error(msg + " (at offset " + std::to_string(position) + ")"), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

// A filter references a column that does not resolve against the table.
class ColumnNotFoundError : public Error {
public:
    using Error::Error;
};

// argmax over a column with no numerically coercible candidate cells.
class NoNumericCandidatesError : public Error {
public:
    using Error::Error;
};

// An agent's model output stayed unusable after the repair re-prompt.
class AgentOutputError : public Error {
public:
    using Error::Error;
};

// Replay backend has no recorded response for a request hash.
class ReplayMissError : public Error {
public:
    using Error::Error;
};

// Live HTTP backend failed after exhausting retries.
class TransportError : public Error {
public:
    using Error::Error;
};

// No balanced JSON value could be extracted from model text.
class ExtractionError : public Error {
public:
    ExtractionError(const std::string& msg, std::string raw)
        : Error(msg), raw_(std::move(raw)) {}
    const std::string& raw_text() const { return raw_; }

private:
    std::string raw_;
};

// Dataset instance failed schema validation; names the instance and field.
class ValidationError : public Error {
public:
    ValidationError(const std::string& instance_id, const std::string& field,
                    const std::string& msg)
        : Error("instance '" + instance_id + "', field '" + field + "': " + msg),
          instance_id_(instance_id),
          field_(field) {}
    const std::string& instance_id() const { return instance_id_; }
    const std::string& field() const { return field_; }

private:
    std::string instance_id_;
    std::string field_;
};

// Bad CLI flags, config file, or environment.
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace tabattr
