#pragma once

#include <stdexcept>
#include <string>

namespace mpiflow {

using Line = int;

/// Base for every error the pipeline raises. `line()` is 0 when the error is
/// not tied to a source line.
class Error : public std::runtime_error {
public:
    Error(Line line, const std::string &what)
        : std::runtime_error(what), line_(line) {}

    Line line() const noexcept { return line_; }

private:
    Line line_;
};

class LexError : public Error {
public:
    LexError(Line line, char character);

    char character() const noexcept { return character_; }

private:
    char character_;
};

class ParseError : public Error {
public:
    ParseError(Line line, std::string expected, std::string found);

    const std::string &expected() const noexcept { return expected_; }
    const std::string &found() const noexcept { return found_; }

private:
    std::string expected_;
    std::string found_;
};

/// An `if` whose `endif` never arrives.
class UnbalancedIf : public Error {
public:
    explicit UnbalancedIf(Line line);
};

class ClassifyError : public Error {
public:
    enum class Code {
        MultipleRank,
        NonConstantProcessId,
        NestedProcessSection,
        DuplicateProcessSection,
        ProcessSectionElse,
    };

    ClassifyError(Code code, Line line, const std::string &detail);

    Code code() const noexcept { return code_; }

private:
    Code code_;
};

class CommOutsideSection : public Error {
public:
    explicit CommOutsideSection(Line line);
};

class UnknownDefinition : public Error {
public:
    UnknownDefinition(std::string var, Line line);

    const std::string &var() const noexcept { return var_; }

private:
    std::string var_;
};

} // namespace mpiflow
