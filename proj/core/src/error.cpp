#include "ecgpaper/error.hpp"

namespace ecgpaper {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::MissingLead: return "MissingLead";
    case Errc::NonFiniteSample: return "NonFiniteSample";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::BadHeader: return "BadHeader";
    case Errc::MalformedCsv: return "MalformedCsv";
    case Errc::IoFailure: return "IoFailure";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::TooShort: return "TooShort";
    case Errc::BadDimensions: return "BadDimensions";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DegeneratePolygon: return "DegeneratePolygon";
    case Errc::SingularHomography: return "SingularHomography";
    case Errc::NoPaperFound: return "NoPaperFound";
    case Errc::DegenerateQuad: return "DegenerateQuad";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::TinyImage: return "TinyImage";
    case Errc::SingleClass: return "SingleClass";
    case Errc::ZeroPositives: return "ZeroPositives";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::MissingImage: return "MissingImage";
    case Errc::MissingPrediction: return "MissingPrediction";
    case Errc::TooFewEntries: return "TooFewEntries";
    case Errc::NonEmptyOutDir: return "NonEmptyOutDir";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code), detail_(detail) {}

} // namespace ecgpaper
