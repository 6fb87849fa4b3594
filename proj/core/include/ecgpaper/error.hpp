#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ecgpaper {

enum class Errc {
    // waveform / manifest
    MissingLead,
    NonFiniteSample,
    LengthMismatch,
    BadHeader,
    MalformedCsv,
    IoFailure,
    SchemaViolation,
    // render
    TooShort,
    BadDimensions,
    // distort
    InvalidArgument,
    DegeneratePolygon,
    SingularHomography,
    // rectify
    NoPaperFound,
    DegenerateQuad,
    SingularSystem,
    TinyImage,
    // eval
    SingleClass,
    ZeroPositives,
    ShapeMismatch,
    // batch commands
    MissingImage,
    MissingPrediction,
    TooFewEntries,
    NonEmptyOutDir,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure surfaced by the toolkit. what() is "<ErrcName>: <detail>".
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail);

    Errc code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

} // namespace ecgpaper
