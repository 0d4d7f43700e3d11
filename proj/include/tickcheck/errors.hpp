#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tickcheck
{

struct SourcePos
{
    std::size_t line = 1;
    std::size_t column = 1;

    friend bool operator==( const SourcePos&, const SourcePos& ) = default;
};

// Malformed input text. Carries the 1-based line/column of the offending token.
class ParseError : public std::runtime_error
{
    SourcePos _pos;
    std::string _detail;

public:
    ParseError( SourcePos pos, const std::string& detail )
            : std::runtime_error( std::to_string( pos.line ) + ":" + std::to_string( pos.column ) + ": " + detail ),
              _pos{ pos }, _detail{ detail }
    {
    }

    [[nodiscard]] SourcePos pos() const { return _pos; }
    [[nodiscard]] const std::string& detail() const { return _detail; }
};

// Structurally parsed input that violates a semantic rule (timer bounds, references, ...).
class ValidationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Expression evaluation failure: an assignment leaving 0..65535 or a modulo by zero.
class EvaluationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// An assignment produced a value outside the 16-bit variable domain.
class OverflowError : public EvaluationError
{
public:
    using EvaluationError::EvaluationError;
};

// An exploration bound was hit. `states_seen` is the number of states stored when aborting.
class LimitExceeded : public std::runtime_error
{
    std::size_t _states_seen;

public:
    explicit LimitExceeded( std::size_t states_seen )
            : std::runtime_error( "state limit exceeded after " + std::to_string( states_seen ) + " states" ),
              _states_seen{ states_seen }
    {
    }

    [[nodiscard]] std::size_t states_seen() const { return _states_seen; }
};

} // namespace tickcheck
