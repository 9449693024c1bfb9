#include "mpiflow/diagnostic.hpp"
#include "mpiflow/error.hpp"

#include <sstream>

namespace mpiflow {

namespace {

std::string describe_char(char c)
{
    std::ostringstream os;
    if (c >= 0x20 && c < 0x7f)
        os << '\'' << c << '\'';
    else
        os << "byte 0x" << std::hex << (static_cast<unsigned>(c) & 0xffu);
    return os.str();
}

std::string at_line(Line line, const std::string &msg)
{
    return "line " + std::to_string(line) + ": " + msg;
}

std::string_view code_name(ClassifyError::Code code)
{
    switch (code) {
    case ClassifyError::Code::MultipleRank:
        return "multiple mpi_comm_rank statements";
    case ClassifyError::Code::NonConstantProcessId:
        return "process-section condition must have the form <rank> == <integer>";
    case ClassifyError::Code::NestedProcessSection:
        return "process section nested inside another if";
    case ClassifyError::Code::DuplicateProcessSection:
        return "process id declared by more than one section";
    case ClassifyError::Code::ProcessSectionElse:
        return "process section cannot have an else branch";
    }
    return "classification error";
}

} // namespace

LexError::LexError(Line line, char character)
    : Error(line, at_line(line, "unexpected character " + describe_char(character))),
      character_(character)
{
}

ParseError::ParseError(Line line, std::string expected, std::string found)
    : Error(line, at_line(line, "expected " + expected + ", found " + found)),
      expected_(std::move(expected)), found_(std::move(found))
{
}

UnbalancedIf::UnbalancedIf(Line line)
    : Error(line, at_line(line, "if without matching endif"))
{
}

ClassifyError::ClassifyError(Code code, Line line, const std::string &detail)
    : Error(line, at_line(line, std::string(code_name(code)) +
                                    (detail.empty() ? "" : " (" + detail + ")"))),
      code_(code)
{
}

CommOutsideSection::CommOutsideSection(Line line)
    : Error(line, at_line(line, "send/recv outside any process section"))
{
}

UnknownDefinition::UnknownDefinition(std::string var, Line line)
    : Error(line, "no definition of " + var + " at line " + std::to_string(line)),
      var_(std::move(var))
{
}

std::string_view to_string(Level level)
{
    return level == Level::Error ? "error" : "warning";
}

std::string format(const Diagnostic &d)
{
    std::ostringstream os;
    os << to_string(d.level) << " line " << d.line << ": " << d.message;
    return os.str();
}

} // namespace mpiflow
